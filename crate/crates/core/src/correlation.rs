//! Empirical correlation means, their Abel-summed predictions, and the
//! sandwich-inequality verdict tying the two together.
//!
//! The estimator computes (1/N) sum for n = 1..=N of f(n) g(n +/- m) with
//! Neumaier-compensated summation over fixed-size chunks. Chunks may be
//! processed in parallel but their partial sums are always reduced in
//! ascending chunk order, so for a fixed chunk size the result is bitwise
//! identical no matter how many workers run. Long runs can checkpoint the
//! accumulator state between chunk windows and resume later to the exact same
//! bits.
//!
//! All sequences here are real-valued, so the conjugate in g is the identity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ramanujan::csum_fast_unchecked;
use crate::rfseries::{
    choose_q_epsilon, product_tail_bound, CoefficientFamily, DampedSeriesTable,
};
use crate::sieves::{lcm, SieveTable};
use crate::Sign;

/// Fixed chunk length for the deterministic reduction; 2^16 terms.
pub const DEFAULT_CHUNK_SIZE: usize = 1 << 16;

/// Tail level used for the near-limit proxy inside [`sandwich_check`].
const PROXY_EPSILON: f64 = 1e-8;

/// An integer-indexed real sequence usable as a correlation operand.
///
/// `value(n)` must be defined for every n the correlation touches, i.e.
/// [1, N + m]. Sequences that are even (g(-n) = g(n), with g(0) defined, like
/// any Ramanujan-sum combination) additionally support negative and zero
/// arguments, which lets the minus-shift correlation keep all N terms.
pub trait Sequence: Sync {
    fn value(&self, n: i64) -> f64;

    /// Whether the sequence extends evenly to all integers.
    fn is_even(&self) -> bool {
        false
    }

    /// Writes value(lo + i) into out[i]; override when block evaluation is
    /// cheaper than repeated scalar calls. Must produce the same bits as
    /// `value`.
    fn fill(&self, lo: i64, out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.value(lo + i as i64);
        }
    }

    fn describe(&self) -> String {
        "sequence".into()
    }
}

/// The constant sequence 1.
pub struct ConstOne;

impl Sequence for ConstOne {
    fn value(&self, _n: i64) -> f64 {
        1.0
    }

    fn is_even(&self) -> bool {
        true
    }

    fn fill(&self, _lo: i64, out: &mut [f64]) {
        out.fill(1.0);
    }

    fn describe(&self) -> String {
        "one".into()
    }
}

/// The sequence n -> c_q(n) for a fixed modulus q.
pub struct CqSequence<'a> {
    table: &'a SieveTable,
    q: u64,
}

impl<'a> CqSequence<'a> {
    pub fn new(table: &'a SieveTable, q: u64) -> Result<Self> {
        table.check_range(q, "q")?;
        Ok(Self { table, q })
    }
}

impl Sequence for CqSequence<'_> {
    fn value(&self, n: i64) -> f64 {
        csum_fast_unchecked(self.table, self.q, n) as f64
    }

    fn is_even(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("cq({})", self.q)
    }
}

/// A sequence tabulated from index 1; entry 0 of the backing vector is unused.
pub struct TabulatedSequence {
    values: Vec<f64>,
    description: String,
}

impl TabulatedSequence {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            description: "tabulated".into(),
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }
}

impl Sequence for TabulatedSequence {
    fn value(&self, n: i64) -> f64 {
        self.values[n as usize]
    }

    fn describe(&self) -> String {
        self.description.clone()
    }
}

impl Sequence for DampedSeriesTable {
    fn value(&self, n: i64) -> f64 {
        self.eval(n)
    }

    fn is_even(&self) -> bool {
        true
    }

    fn fill(&self, lo: i64, out: &mut [f64]) {
        DampedSeriesTable::fill(self, lo, out);
    }

    fn describe(&self) -> String {
        self.description().to_string()
    }
}

/// Options for the chunked correlation engine.
#[derive(Debug, Clone)]
pub struct CorrelateOptions {
    /// Terms per chunk; the determinism contract is per chunk size.
    pub chunk_size: usize,
    /// Chunks between checkpoint callbacks; 0 disables checkpointing.
    pub checkpoint_interval: u64,
    /// Stop (with a resumable state) once this many chunks are done.
    pub stop_after_chunks: Option<u64>,
}

impl Default for CorrelateOptions {
    fn default() -> Self {
        Self {
            chunk_size: DEFAULT_CHUNK_SIZE,
            checkpoint_interval: 0,
            stop_after_chunks: None,
        }
    }
}

/// Result of a correlation run.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationEstimate {
    /// Requested number of terms N.
    pub n_terms: u64,
    /// Terms actually averaged (differs from N only for minus shifts of
    /// non-even sequences, where the first m terms are dropped).
    pub retained: u64,
    pub shift: u64,
    pub sign: Sign,
    /// The mean (sum + compensation) / retained.
    pub value: f64,
    pub sum: f64,
    pub compensation: f64,
    pub f_desc: String,
    pub g_desc: String,
}

/// Resumable accumulator state; serialized to JSON between runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCheckpoint {
    pub version: u32,
    pub params_hash: u64,
    pub chunk_size: u64,
    pub n_terms: u64,
    pub chunks_done: u64,
    pub retained: u64,
    pub sum: f64,
    pub compensation: f64,
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Outcome of a resumable run: finished, or suspended at a chunk boundary.
pub enum CorrelateOutcome {
    Complete(CorrelationEstimate),
    Suspended(CorrelationCheckpoint),
}

#[inline]
fn neumaier_add(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

struct ChunkOutcome {
    sum: f64,
    comp: f64,
    retained: u64,
}

fn process_chunk(
    f: &dyn Sequence,
    g: &dyn Sequence,
    m: u64,
    sign: Sign,
    lo: u64,
    len: usize,
) -> ChunkOutcome {
    // For minus shifts of non-even g the terms with n <= m are dropped; the
    // caller renormalizes by the retained count.
    let start = if sign == Sign::Minus && !g.is_even() {
        lo.max(m + 1)
    } else {
        lo
    };
    let end = lo + len as u64;
    if start >= end {
        return ChunkOutcome {
            sum: 0.0,
            comp: 0.0,
            retained: 0,
        };
    }
    let eff = (end - start) as usize;
    let mut f_buf = vec![0.0; eff];
    let mut g_buf = vec![0.0; eff];
    f.fill(start as i64, &mut f_buf);
    let g_lo = match sign {
        Sign::Plus => start as i64 + m as i64,
        Sign::Minus => start as i64 - m as i64,
    };
    g.fill(g_lo, &mut g_buf);

    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in 0..eff {
        neumaier_add(&mut sum, &mut comp, f_buf[i] * g_buf[i]);
    }
    ChunkOutcome {
        sum,
        comp,
        retained: eff as u64,
    }
}

/// Resumable chunked correlation. `params_hash` ties checkpoints to one
/// parameter set; `on_checkpoint` fires every `checkpoint_interval` chunks.
#[allow(clippy::too_many_arguments)]
pub fn correlate_resumable(
    f: &dyn Sequence,
    g: &dyn Sequence,
    m: u64,
    sign: Sign,
    n_terms: u64,
    opts: &CorrelateOptions,
    params_hash: u64,
    resume: Option<&CorrelationCheckpoint>,
    on_checkpoint: &mut dyn FnMut(&CorrelationCheckpoint) -> Result<()>,
) -> Result<CorrelateOutcome> {
    if n_terms == 0 {
        return Err(Error::Parameter("correlation over zero terms".into()));
    }
    if opts.chunk_size == 0 {
        return Err(Error::Parameter("chunk size must be >= 1".into()));
    }
    if sign == Sign::Minus && !g.is_even() && m >= n_terms {
        return Err(Error::Domain(format!(
            "minus shift m = {m} leaves no valid terms for a non-even g over N = {n_terms}"
        )));
    }

    let chunk_size = opts.chunk_size as u64;
    let total_chunks = n_terms.div_ceil(chunk_size);

    let (mut chunks_done, mut retained, mut sum, mut comp) = match resume {
        None => (0u64, 0u64, 0.0, 0.0),
        Some(cp) => {
            if cp.version != CHECKPOINT_VERSION {
                return Err(Error::CheckpointMismatch(format!(
                    "checkpoint version {} != {CHECKPOINT_VERSION}",
                    cp.version
                )));
            }
            if cp.params_hash != params_hash {
                return Err(Error::CheckpointMismatch(format!(
                    "checkpoint params hash {:#018x} does not match run {:#018x}",
                    cp.params_hash, params_hash
                )));
            }
            if cp.chunk_size != chunk_size || cp.n_terms != n_terms || cp.chunks_done > total_chunks
            {
                return Err(Error::CheckpointMismatch(
                    "checkpoint geometry does not match this run".into(),
                ));
            }
            (cp.chunks_done, cp.retained, cp.sum, cp.compensation)
        }
    };

    let stop_at = opts.stop_after_chunks.unwrap_or(u64::MAX);
    while chunks_done < total_chunks && chunks_done < stop_at {
        let window = if opts.checkpoint_interval > 0 {
            opts.checkpoint_interval
        } else {
            total_chunks
        };
        let upper = (chunks_done + window).min(total_chunks).min(stop_at);

        let outcomes: Vec<ChunkOutcome> = (chunks_done..upper)
            .into_par_iter()
            .map(|ci| {
                let lo = 1 + ci * chunk_size;
                let len = chunk_size.min(n_terms + 1 - lo) as usize;
                process_chunk(f, g, m, sign, lo, len)
            })
            .collect();

        // Ascending chunk order; this is what makes the reduction
        // worker-count independent.
        for oc in &outcomes {
            neumaier_add(&mut sum, &mut comp, oc.sum);
            neumaier_add(&mut sum, &mut comp, oc.comp);
            retained += oc.retained;
        }
        chunks_done = upper;

        if opts.checkpoint_interval > 0 && (chunks_done < total_chunks || chunks_done == stop_at) {
            let state = CorrelationCheckpoint {
                version: CHECKPOINT_VERSION,
                params_hash,
                chunk_size,
                n_terms,
                chunks_done,
                retained,
                sum,
                compensation: comp,
            };
            on_checkpoint(&state)?;
        }
    }

    if chunks_done < total_chunks {
        return Ok(CorrelateOutcome::Suspended(CorrelationCheckpoint {
            version: CHECKPOINT_VERSION,
            params_hash,
            chunk_size,
            n_terms,
            chunks_done,
            retained,
            sum,
            compensation: comp,
        }));
    }

    debug_assert!(retained > 0);
    Ok(CorrelateOutcome::Complete(CorrelationEstimate {
        n_terms,
        retained,
        shift: m,
        sign,
        value: (sum + comp) / retained as f64,
        sum,
        compensation: comp,
        f_desc: f.describe(),
        g_desc: g.describe(),
    }))
}

/// One-shot correlation mean (1/N) sum of f(n) g(n +/- m).
pub fn correlate_raw(
    f: &dyn Sequence,
    g: &dyn Sequence,
    m: u64,
    sign: Sign,
    n_terms: u64,
    opts: &CorrelateOptions,
) -> Result<CorrelationEstimate> {
    let opts = CorrelateOptions {
        checkpoint_interval: 0,
        stop_after_chunks: None,
        ..opts.clone()
    };
    match correlate_resumable(f, g, m, sign, n_terms, &opts, 0, None, &mut |_| Ok(()))? {
        CorrelateOutcome::Complete(est) => Ok(est),
        CorrelateOutcome::Suspended(_) => unreachable!("no stop condition was set"),
    }
}

/// Damped Abel prediction: sum for q = 1..=Q of a_q b_q z^(2q) c_q(m).
pub fn abel_prediction_damped(
    table: &SieveTable,
    a: &CoefficientFamily,
    b: &CoefficientFamily,
    z: f64,
    q_max: u64,
    m: i64,
) -> Result<f64> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::Parameter(format!(
            "damping z = {z} must lie in (0, 1] (z = 1 only for undamped diagnostics)"
        )));
    }
    if q_max > 0 {
        table.check_range(q_max, "q_max")?;
    }
    let z2 = z * z;
    let mut sum = 0.0;
    let mut zp = 1.0;
    for q in 1..=q_max {
        zp *= z2;
        let aq = a.value(table, q)?;
        let bq = b.value(table, q)?;
        if aq == 0.0 || bq == 0.0 {
            continue;
        }
        let c = csum_fast_unchecked(table, q, m) as f64;
        sum += ((aq * bq) * zp) * c;
    }
    Ok(sum)
}

/// The Abel limit sum for q >= 1 of a_q b_q c_q(m), summed with a certified
/// remainder below `tol`.
#[derive(Debug, Clone, Copy)]
pub struct LimitPrediction {
    pub value: f64,
    pub remainder_bound: f64,
    /// Largest index (q or prime cutoff) that entered the evaluation.
    pub cutoff: u64,
}

/// Evaluates the undamped limit series.
///
/// Finite families reduce to an exact finite sum. For the mu/phi pair the
/// term a_q b_q c_q(m) is multiplicative in q and supported on squarefree q
/// with sum of |terms| finite for m != 0, so the series is evaluated as the
/// absolutely convergent Euler product over primes
/// prod over p of (1 + a_p b_p c_p(m)), whose tail beyond P is certified by
/// sum for p > P of |log(1 + t_p)| <= 2 / (P - 1).
pub fn abel_prediction_limit(
    table: &SieveTable,
    a: &CoefficientFamily,
    b: &CoefficientFamily,
    m: i64,
    tol: f64,
) -> Result<LimitPrediction> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Parameter(format!("tolerance {tol} must be in (0, 1)")));
    }

    let finite_end = match (a.support_end(), b.support_end()) {
        (None, None) => None,
        (Some(ea), None) => Some(ea),
        (None, Some(eb)) => Some(eb),
        (Some(ea), Some(eb)) => Some(ea.min(eb)),
    };
    if let Some(end) = finite_end {
        if end > 0 {
            table.check_range(end, "family support")?;
        }
        let mut sum = 0.0;
        for q in 1..=end {
            let aq = a.value(table, q)?;
            let bq = b.value(table, q)?;
            if aq == 0.0 || bq == 0.0 {
                continue;
            }
            sum += (aq * bq) * csum_fast_unchecked(table, q, m) as f64;
        }
        return Ok(LimitPrediction {
            value: sum,
            remainder_bound: 0.0,
            cutoff: end,
        });
    }

    if !(a.is_multiplicative_squarefree() && b.is_multiplicative_squarefree()) {
        return Err(Error::DivergenceSuspected(
            "no certified summation route for this family pair".into(),
        ));
    }
    if m == 0 {
        return Err(Error::DivergenceSuspected(
            "limit series at m = 0 has non-summable terms (prime factors contribute 1/(p-1))"
                .into(),
        ));
    }

    let mut cutoff = 1_000u64.max(m.unsigned_abs() + 1).min(table.n_max());
    loop {
        let (value, had_zero_factor) = mu_phi_pair_product(table, a, b, m, cutoff)?;
        let remainder_bound = if had_zero_factor {
            0.0
        } else {
            value.abs() * ((2.0 / (cutoff as f64 - 1.0)).exp_m1())
        };
        if remainder_bound < tol {
            return Ok(LimitPrediction {
                value,
                remainder_bound,
                cutoff,
            });
        }
        if cutoff >= table.n_max() {
            return Err(Error::DivergenceSuspected(format!(
                "cannot certify remainder < {tol}: prime cutoff limited to {} by the table",
                table.n_max()
            )));
        }
        cutoff = (cutoff * 2).min(table.n_max());
    }
}

/// Euler product over primes p <= cutoff of (1 + a_p b_p c_p(m)), accumulated
/// in log space with primes ascending. Returns the product and whether an
/// exactly-zero factor occurred (which pins the whole series to zero).
fn mu_phi_pair_product(
    table: &SieveTable,
    a: &CoefficientFamily,
    b: &CoefficientFamily,
    m: i64,
    cutoff: u64,
) -> Result<(f64, bool)> {
    let mut log_sum = 0.0f64;
    let mut negative_factors = 0u32;
    for p in table.primes() {
        if p > cutoff {
            break;
        }
        let ap = a.value(table, p)?;
        let bp = b.value(table, p)?;
        let factor = 1.0 + (ap * bp) * csum_fast_unchecked(table, p, m) as f64;
        if factor == 0.0 {
            return Ok((0.0, true));
        }
        if factor < 0.0 {
            negative_factors += 1;
        }
        log_sum += factor.abs().ln();
    }
    let sign = if negative_factors % 2 == 0 { 1.0 } else { -1.0 };
    Ok((sign * log_sum.exp(), false))
}

/// Everything the sandwich verdict rests on, reported explicitly.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub z: f64,
    pub epsilon: f64,
    pub shift: u64,
    pub n_terms: u64,
    /// Truncation index of the prediction side.
    pub q_epsilon: u64,
    /// Truncation index of the empirical damped series (near-limit proxy).
    pub q_proxy: u64,
    /// Empirical damped correlation mean.
    pub lhs: f64,
    /// Truncated prediction sum for q <= Q_epsilon of a_q b_q z^(2q) c_q(m).
    pub rhs_truncated: f64,
    pub gap: f64,
    /// epsilon^2 + epsilon (|a_1| + |b_1|).
    pub epsilon_term: f64,
    /// Finite-N deviation bound for the periodic truncated product.
    pub pair_slack: f64,
    /// Prediction tail between Q_epsilon and Q_proxy.
    pub truncation_slack: f64,
    /// Error from evaluating the damped series at Q_proxy instead of fully.
    pub proxy_slack: f64,
    /// Total reported slack (sum of the three components).
    pub slack: f64,
    /// epsilon_term + slack.
    pub bound: f64,
    pub pass: bool,
}

/// Verifies the sandwich inequality at finite N: the empirical damped
/// correlation must sit within epsilon^2 + epsilon (|a_1| + |b_1|) plus the
/// reported finite-N slack of the truncated prediction.
///
/// The sampling slack is period-aware: each product term c_q1(n) c_q2(n + m)
/// is periodic with period lcm(q1, q2), so its running mean deviates from the
/// full-period mean by at most 2 lcm(q1, q2) / N times the term's sup norm.
/// Failures are reported in the returned record, never thrown.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_check(
    table: &SieveTable,
    a: &CoefficientFamily,
    b: &CoefficientFamily,
    z: f64,
    epsilon: f64,
    m: u64,
    n_terms: u64,
    opts: &CorrelateOptions,
) -> Result<SandwichReport> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::Parameter(format!(
            "damping z = {z} must lie in the open interval (0, 1)"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon = {epsilon} must lie in (0, 1)"
        )));
    }

    let q_epsilon = choose_q_epsilon(a, z, epsilon)?.max(choose_q_epsilon(b, z, epsilon)?);
    let proxy_eps = PROXY_EPSILON.min(epsilon);
    let q_proxy = q_epsilon
        .max(choose_q_epsilon(a, z, proxy_eps)?)
        .max(choose_q_epsilon(b, z, proxy_eps)?);
    table.check_range(q_proxy, "Q_proxy")?;

    let f_tab = DampedSeriesTable::build(table, a, z, q_proxy)?;
    let g_tab = DampedSeriesTable::build(table, b, z, q_proxy)?;

    let est = correlate_raw(&f_tab, &g_tab, m, Sign::Plus, n_terms, opts)?;
    let rhs = abel_prediction_damped(table, a, b, z, q_epsilon, m as i64)?;
    let gap = (est.value - rhs).abs();

    let a1 = a.value(table, 1)?.abs();
    let b1 = b.value(table, 1)?.abs();
    let epsilon_term = epsilon * epsilon + epsilon * (a1 + b1);

    let f_weights = f_tab.row_weights();
    let g_weights = g_tab.row_weights();
    let mut pair_slack = 0.0;
    for &(q1, w1) in &f_weights {
        for &(q2, w2) in &g_weights {
            pair_slack += 2.0 * lcm(q1, q2) as f64 * w1 * w2;
        }
    }
    pair_slack /= n_terms as f64;

    let truncation_slack = product_tail_bound(a, b, z, q_epsilon)?;
    let proxy_slack = proxy_eps * (f_tab.sup_bound() + g_tab.sup_bound() + proxy_eps);
    let slack = pair_slack + truncation_slack + proxy_slack;
    let bound = epsilon_term + slack;

    Ok(SandwichReport {
        z,
        epsilon,
        shift: m,
        n_terms,
        q_epsilon,
        q_proxy,
        lhs: est.value,
        rhs_truncated: rhs,
        gap,
        epsilon_term,
        pair_slack,
        truncation_slack,
        proxy_slack,
        slack,
        bound,
        pass: gap <= bound,
    })
}
