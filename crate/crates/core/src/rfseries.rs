//! Coefficient families {a_q} and the damped Ramanujan-Fourier series built
//! from them:
//!
//! ```text
//! f_Q(z, n) = sum for q = 1..Q of a_q z^q c_q(n),   0 < z < 1
//! ```
//!
//! Every family declares a majorant M(q) >= |a_q| phi(q). Since
//! |c_q(n)| <= phi(q) for all n, the series tail beyond Q is bounded by
//! sum over q > Q of M(q) z^q uniformly in n, which is what [`tail_bound`]
//! certifies and [`choose_q_epsilon`] inverts. Tail bounds come from the
//! declared majorant, not from the tabulated |a_q| values, so they have
//! closed forms: geometric for the mu/phi family, a finite sum for tabulated
//! families.
//!
//! Summation is always ascending in q with no reordering, so results are
//! reproducible bit for bit.

use crate::error::{Error, Result};
use crate::ramanujan::csum_fast_unchecked;
use crate::sieves::SieveTable;

/// Default search budget for [`choose_q_epsilon`].
pub const DEFAULT_Q_SEARCH_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone)]
enum FamilyKind {
    /// a_q = mu(q) / phi(q), so |a_q| phi(q) = |mu(q)| <= 1.
    MuOverPhi,
    /// Explicit values a_q for q = 1..=values.len(); zero beyond.
    Tabulated { values: Vec<f64>, majorant: Vec<f64> },
}

/// A coefficient sequence {a_q} together with a certified majorant for
/// |a_q| phi(q).
#[derive(Debug, Clone)]
pub struct CoefficientFamily {
    kind: FamilyKind,
    description: String,
}

/// Totient by trial division; used only at family construction time where no
/// sieve table is in scope.
fn phi_trial(n: u64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result = result / p * (p - 1);
        }
        p += 1;
    }
    if n > 1 {
        result = result / n * (n - 1);
    }
    result
}

impl CoefficientFamily {
    /// The mu(q)/phi(q) family of the weighted von Mangoldt expansion.
    pub fn mu_over_phi() -> Self {
        Self {
            kind: FamilyKind::MuOverPhi,
            description: "mu-over-phi".into(),
        }
    }

    /// Finite family from explicit values a_1, a_2, ... (index 0 of the slice
    /// is a_1). The majorant defaults to |a_q| phi(q).
    pub fn tabulated(values: Vec<f64>) -> Self {
        let majorant = values
            .iter()
            .enumerate()
            .map(|(i, v)| v.abs() * phi_trial(i as u64 + 1) as f64)
            .collect();
        Self {
            kind: FamilyKind::Tabulated { values, majorant },
            description: "tabulated".into(),
        }
    }

    /// Finite family with a caller-supplied majorant for |a_q| phi(q).
    pub fn tabulated_with_majorant(values: Vec<f64>, majorant: Vec<f64>) -> Result<Self> {
        if majorant.len() != values.len() {
            return Err(Error::Parameter(
                "majorant and value tables must have equal length".into(),
            ));
        }
        if majorant.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Parameter(
                "majorant entries must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            kind: FamilyKind::Tabulated { values, majorant },
            description: "tabulated".into(),
        })
    }

    /// The family with a_1 = a1 and a_q = 0 for q > 1.
    pub fn delta_one(a1: f64) -> Self {
        let mut fam = Self::tabulated(vec![a1]);
        fam.description = "delta-one".into();
        fam
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Coefficient a_q. The mu/phi rule reads the sieve table, so q must be
    /// within table range for that family.
    pub fn value(&self, table: &SieveTable, q: u64) -> Result<f64> {
        if q == 0 {
            return Err(Error::Parameter("coefficient index q must be >= 1".into()));
        }
        match &self.kind {
            FamilyKind::MuOverPhi => {
                table.check_range(q, "q")?;
                Ok(table.mu(q) as f64 / table.phi(q) as f64)
            }
            FamilyKind::Tabulated { values, .. } => {
                Ok(values.get(q as usize - 1).copied().unwrap_or(0.0))
            }
        }
    }

    /// Declared majorant M(q) >= |a_q| phi(q); table-free by construction.
    pub fn majorant(&self, q: u64) -> f64 {
        match &self.kind {
            FamilyKind::MuOverPhi => 1.0,
            FamilyKind::Tabulated { majorant, .. } => {
                majorant.get(q as usize - 1).copied().unwrap_or(0.0)
            }
        }
    }

    /// Largest q with a possibly nonzero coefficient, if the family is finite.
    pub fn support_end(&self) -> Option<u64> {
        match &self.kind {
            FamilyKind::MuOverPhi => None,
            FamilyKind::Tabulated { values, .. } => Some(values.len() as u64),
        }
    }

    /// Uniform bound on the majorant when one exists (infinite families).
    fn uniform_majorant_bound(&self) -> Option<f64> {
        match &self.kind {
            FamilyKind::MuOverPhi => Some(1.0),
            FamilyKind::Tabulated { .. } => None,
        }
    }

    /// True when the coefficients are multiplicative and supported on
    /// squarefree q, which unlocks Euler-product evaluation of limits.
    pub(crate) fn is_multiplicative_squarefree(&self) -> bool {
        matches!(self.kind, FamilyKind::MuOverPhi)
    }
}

/// Damping and truncation parameters (z, Q, epsilon), validated on entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedSeriesParams {
    pub z: f64,
    pub q_max: u64,
    pub epsilon: f64,
}

impl DampedSeriesParams {
    pub fn new(z: f64, q_max: u64, epsilon: f64) -> Result<Self> {
        if !(z > 0.0 && z < 1.0) {
            return Err(Error::Parameter(format!(
                "damping z = {z} must lie in the open interval (0, 1)"
            )));
        }
        if q_max == 0 {
            return Err(Error::Parameter("q_max must be >= 1".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!(
                "epsilon = {epsilon} must lie in (0, 1)"
            )));
        }
        Ok(Self { z, q_max, epsilon })
    }
}

fn check_damping_open(z: f64) -> Result<()> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::Parameter(format!(
            "damping z = {z} must lie in the open interval (0, 1)"
        )));
    }
    Ok(())
}

fn check_damping_diagnostic(z: f64) -> Result<()> {
    // z = 1 is permitted as an explicitly undamped diagnostic evaluation.
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::Parameter(format!(
            "damping z = {z} must lie in (0, 1] (z = 1 only for undamped diagnostics)"
        )));
    }
    Ok(())
}

/// Partial sum f_Q(z, n) = sum for q = 1..=Q of a_q z^q c_q(n), evaluated
/// strictly left to right.
pub fn partial_sum(
    table: &SieveTable,
    a: &CoefficientFamily,
    z: f64,
    q_max: u64,
    n: i64,
) -> Result<f64> {
    check_damping_diagnostic(z)?;
    if q_max > 0 {
        table.check_range(q_max, "q_max")?;
    }
    let mut sum = 0.0;
    let mut zp = 1.0;
    for q in 1..=q_max {
        zp *= z;
        let aq = a.value(table, q)?;
        if aq == 0.0 {
            continue;
        }
        let c = csum_fast_unchecked(table, q, n) as f64;
        sum += (aq * zp) * c;
    }
    Ok(sum)
}

/// Certified upper bound on the series tail
/// sum over q > Q of |a_q| z^q phi(q) <= sum over q > Q of M(q) z^q.
///
/// For uniformly bounded majorants this is the geometric closed form
/// M z^(Q+1) / (1 - z); for finite families it is the exact remaining sum.
pub fn tail_bound(a: &CoefficientFamily, z: f64, q_max: u64) -> Result<f64> {
    check_damping_open(z)?;
    match (a.uniform_majorant_bound(), a.support_end()) {
        (Some(bound), _) => {
            let exp = i32::try_from(q_max + 1)
                .map_err(|_| Error::Parameter(format!("q_max = {q_max} too large")))?;
            Ok(bound * z.powi(exp) / (1.0 - z))
        }
        (None, Some(end)) => {
            let mut sum = 0.0;
            let mut zp = z.powi(i32::try_from(q_max + 1).unwrap_or(i32::MAX));
            for q in q_max + 1..=end {
                sum += a.majorant(q) * zp;
                zp *= z;
            }
            Ok(sum)
        }
        (None, None) => Err(Error::DivergenceSuspected(format!(
            "family '{}' declares no summable majorant",
            a.description
        ))),
    }
}

/// Smallest Q (within `budget`) whose certified tail bound is below epsilon,
/// giving |f(z, n) - f_Q(z, n)| <= epsilon uniformly in n.
pub fn choose_q_epsilon_with_budget(
    a: &CoefficientFamily,
    z: f64,
    epsilon: f64,
    budget: u64,
) -> Result<u64> {
    check_damping_open(z)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon = {epsilon} must lie in (0, 1)"
        )));
    }
    for q in 1..=budget {
        if tail_bound(a, z, q)? < epsilon {
            return Ok(q);
        }
    }
    Err(Error::DivergenceSuspected(format!(
        "no Q <= {budget} certifies tail < {epsilon} at z = {z} for family '{}'",
        a.description
    )))
}

/// [`choose_q_epsilon_with_budget`] with the default budget.
pub fn choose_q_epsilon(a: &CoefficientFamily, z: f64, epsilon: f64) -> Result<u64> {
    choose_q_epsilon_with_budget(a, z, epsilon, DEFAULT_Q_SEARCH_BUDGET)
}

/// Result of a damped evaluation: the value, the truncation actually used and
/// the certified tail bound at that truncation.
#[derive(Debug, Clone, Copy)]
pub struct DampedEval {
    pub value: f64,
    pub q_epsilon: u64,
    pub tail_bound: f64,
}

/// Evaluates the damped series at n, truncated at Q_epsilon so the result is
/// within epsilon of f(z, n) uniformly in n.
pub fn damped_eval(
    table: &SieveTable,
    a: &CoefficientFamily,
    z: f64,
    epsilon: f64,
    n: i64,
) -> Result<DampedEval> {
    let q_epsilon = choose_q_epsilon(a, z, epsilon)?;
    let params = DampedSeriesParams::new(z, q_epsilon, epsilon)?;
    table.check_range(params.q_max, "Q_epsilon")?;
    let value = partial_sum(table, a, params.z, params.q_max, n)?;
    let tail = tail_bound(a, params.z, params.q_max)?;
    Ok(DampedEval {
        value,
        q_epsilon: params.q_max,
        tail_bound: tail,
    })
}

/// Certified tail of the product series
/// sum over q > Q of M_a(q) M_b(q) z^(2q), used by the sandwich check to
/// account for truncating the damped prediction.
pub fn product_tail_bound(
    a: &CoefficientFamily,
    b: &CoefficientFamily,
    z: f64,
    q_max: u64,
) -> Result<f64> {
    check_damping_open(z)?;
    let z2 = z * z;
    let finite_end = match (a.support_end(), b.support_end()) {
        (None, None) => None,
        (Some(ea), None) => Some(ea),
        (None, Some(eb)) => Some(eb),
        (Some(ea), Some(eb)) => Some(ea.min(eb)),
    };
    match finite_end {
        Some(end) => {
            let mut sum = 0.0;
            let mut zp = z2.powi(i32::try_from(q_max + 1).unwrap_or(i32::MAX));
            for q in q_max + 1..=end {
                sum += a.majorant(q) * b.majorant(q) * zp;
                zp *= z2;
            }
            Ok(sum)
        }
        None => {
            let ca = a.uniform_majorant_bound().ok_or_else(|| {
                Error::DivergenceSuspected("no summable product majorant".into())
            })?;
            let cb = b.uniform_majorant_bound().ok_or_else(|| {
                Error::DivergenceSuspected("no summable product majorant".into())
            })?;
            let exp = i32::try_from(q_max + 1)
                .map_err(|_| Error::Parameter(format!("q_max = {q_max} too large")))?;
            Ok(ca * cb * z2.powi(exp) / (1.0 - z2))
        }
    }
}

/// Empirical Ramanujan-Fourier coefficient
/// (1/phi(q)) (1/N) sum for n = 1..=N of f(n) c_q(n).
///
/// `f_values` is indexed from 1: entry 0 is ignored and the slice must hold
/// at least n_terms + 1 entries.
pub fn rf_coefficient_empirical(
    f_values: &[f64],
    table: &SieveTable,
    q: u64,
    n_terms: u64,
) -> Result<f64> {
    table.check_range(q, "q")?;
    if n_terms == 0 {
        return Err(Error::Parameter("mean over zero terms".into()));
    }
    if (f_values.len() as u64) < n_terms + 1 {
        return Err(Error::Range(format!(
            "f_values holds {} entries, need {} (1-indexed)",
            f_values.len(),
            n_terms + 1
        )));
    }
    let mut sum = 0.0;
    for n in 1..=n_terms {
        let c = csum_fast_unchecked(table, q, n as i64) as f64;
        sum += f_values[n as usize] * c;
    }
    Ok(sum / (table.phi(q) as f64 * n_terms as f64))
}

struct DampedRow {
    q: u64,
    coef: f64,
    cvals: Vec<f64>,
}

/// Precomputed damped partial sum f_Q(z, .) as one residue row per q, giving
/// O(Q) evaluation with no gcd work and a block fill for correlation loops.
///
/// Values agree bit for bit with [`partial_sum`] at the same (z, Q).
pub struct DampedSeriesTable {
    rows: Vec<DampedRow>,
    q_max: u64,
    z: f64,
    description: String,
}

impl DampedSeriesTable {
    pub fn build(
        table: &SieveTable,
        a: &CoefficientFamily,
        z: f64,
        q_max: u64,
    ) -> Result<Self> {
        check_damping_diagnostic(z)?;
        if q_max > 0 {
            table.check_range(q_max, "q_max")?;
        }
        let mut rows = Vec::new();
        let mut zp = 1.0;
        for q in 1..=q_max {
            zp *= z;
            let aq = a.value(table, q)?;
            if aq == 0.0 {
                continue;
            }
            let cvals = (0..q)
                .map(|j| csum_fast_unchecked(table, q, j as i64) as f64)
                .collect();
            rows.push(DampedRow {
                q,
                coef: aq * zp,
                cvals,
            });
        }
        Ok(Self {
            rows,
            q_max,
            z,
            description: format!("damped({}, z={z}, Q={q_max})", a.description()),
        })
    }

    pub fn q_max(&self) -> u64 {
        self.q_max
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// f_Q(z, n); defined for every integer n by periodicity and evenness.
    pub fn eval(&self, n: i64) -> f64 {
        let mut sum = 0.0;
        for row in &self.rows {
            let idx = n.rem_euclid(row.q as i64) as usize;
            sum += row.coef * row.cvals[idx];
        }
        sum
    }

    /// Writes f_Q(z, lo + i) into out[i]. Accumulation order per element is
    /// identical to [`Self::eval`], so the two agree bitwise.
    pub fn fill(&self, lo: i64, out: &mut [f64]) {
        out.fill(0.0);
        for row in &self.rows {
            let q = row.q as i64;
            let mut idx = lo.rem_euclid(q) as usize;
            for slot in out.iter_mut() {
                *slot += row.coef * row.cvals[idx];
                idx += 1;
                if idx == row.q as usize {
                    idx = 0;
                }
            }
        }
    }

    /// Certified sup over n of |f_Q(z, n)|: sum of |coef| phi(q), using
    /// c_q(0) = phi(q).
    pub fn sup_bound(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.coef.abs() * row.cvals[0])
            .sum()
    }

    /// Per-row (q, |a_q z^q| phi(q)) pairs; the sup norm of each term of the
    /// series, used for period-aware sampling slack.
    pub fn row_weights(&self) -> Vec<(u64, f64)> {
        self.rows
            .iter()
            .map(|row| (row.q, row.coef.abs() * row.cvals[0]))
            .collect()
    }
}
