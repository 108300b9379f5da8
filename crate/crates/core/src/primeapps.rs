//! Prime-correlation applications: the weighted von Mangoldt function
//! w(n) = (phi(n)/n) Lambda(n), its Ramanujan-Fourier coefficients
//! a_q = mu(q)/phi(q), the Hardy-Littlewood singular series
//!
//! ```text
//! C(h) = 2 prod over p | h, p > 2 of (p-1)/(p-2)
//!          * prod over p > 2 of (1 - 1/(p-1)^2)     for even h, else 0
//! ```
//!
//! the Sophie Germain constant S(a, b, l), and the end-to-end experiment that
//! compares the empirical autocorrelation (1/N) sum of w(n) w(n+h) against
//! C(h) and against the damped Abel predictions.
//!
//! Euler products are evaluated in log space with primes ascending. The
//! reported remainder estimate is the measured log-gap between the requested
//! cutoff P and the 4P refinement, plus an analytic bound for the tail beyond
//! 4P. The experiment reports ratios and ladders rather than asserting tight
//! tolerances: whether the empirical means converge at all is an open
//! question, so the numbers probe the conjecture instead of claiming it.

use serde::Serialize;

use crate::correlation::{
    abel_prediction_damped, correlate_raw, CorrelateOptions, Sequence,
};
use crate::error::{Error, Result};
use crate::rfseries::{choose_q_epsilon, CoefficientFamily};
use crate::sieves::{fill_segment, gcd, primes_up_to, SieveTable};
use crate::Sign;

/// w(n) = (phi(n)/n) Lambda(n); nonzero exactly on prime powers.
pub fn weighted_lambda(table: &SieveTable, n: u64) -> Result<f64> {
    table.check_range(n, "n")?;
    Ok(table.phi(n) as f64 / n as f64 * table.lambda(n))
}

/// a_q = mu(q)/phi(q), the R-F coefficient of the weighted von Mangoldt
/// expansion.
pub fn mu_over_phi(table: &SieveTable, q: u64) -> Result<f64> {
    table.check_range(q, "q")?;
    Ok(table.mu(q) as f64 / table.phi(q) as f64)
}

/// The weighted von Mangoldt sequence backed by a dense sieve table.
pub struct WeightedLambdaSeq<'a> {
    table: &'a SieveTable,
}

impl<'a> WeightedLambdaSeq<'a> {
    pub fn new(table: &'a SieveTable) -> Self {
        Self { table }
    }
}

impl Sequence for WeightedLambdaSeq<'_> {
    fn value(&self, n: i64) -> f64 {
        let n = n as u64;
        self.table.phi(n) as f64 / n as f64 * self.table.lambda(n)
    }

    fn describe(&self) -> String {
        "weighted-lambda".into()
    }
}

/// The weighted von Mangoldt sequence computed by a segmented sieve, for
/// correlation loops over ranges where a dense table would not fit. Produces
/// bit-identical values to [`WeightedLambdaSeq`].
pub struct StreamingWeightedLambda {
    base_primes: Vec<u64>,
    n_hi: u64,
}

impl StreamingWeightedLambda {
    pub fn new(n_hi: u64) -> Result<Self> {
        if n_hi == 0 {
            return Err(Error::Parameter("upper index must be >= 1".into()));
        }
        let root = (n_hi as f64).sqrt() as u64 + 2;
        Ok(Self {
            base_primes: primes_up_to(root),
            n_hi,
        })
    }
}

impl Sequence for StreamingWeightedLambda {
    fn value(&self, n: i64) -> f64 {
        let mut out = [0.0];
        self.fill(n, &mut out);
        out[0]
    }

    fn fill(&self, lo: i64, out: &mut [f64]) {
        assert!(lo >= 1 && lo as u64 + out.len() as u64 - 1 <= self.n_hi);
        let seg = fill_segment(&self.base_primes, lo as u64, out.len());
        for (i, slot) in out.iter_mut().enumerate() {
            let n = seg.lo + i as u64;
            *slot = seg.phi[i] as f64 / n as f64 * seg.lambda[i];
        }
    }

    fn describe(&self) -> String {
        "weighted-lambda (streaming)".into()
    }
}

/// A truncated Euler product with its cutoff and a remainder estimate.
#[derive(Debug, Clone, Serialize)]
pub struct EulerProductValue {
    pub value: f64,
    pub prime_cutoff: u64,
    /// Log-scale remainder: the measured gap to the 4P refinement plus an
    /// analytic bound for everything beyond 4P.
    pub remainder_estimate: f64,
    /// The arithmetic inputs the constant was evaluated for.
    pub params: String,
}

/// Odd prime factors of n, ascending, by trial division.
fn odd_prime_factors(n: u64) -> Vec<u64> {
    let mut n = n;
    let mut out = Vec::new();
    while n % 2 == 0 {
        n /= 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Log of the twin-prime product over 2 < p <= cutoff and over 2 < p <= 4*cutoff.
fn twin_log_sums(prime_cutoff: u64) -> (f64, f64) {
    let refined = prime_cutoff.saturating_mul(4);
    let primes = primes_up_to(refined);
    let mut log_sum = 0.0f64;
    let mut log_at_cutoff = None;
    for &p in &primes {
        if p <= 2 {
            continue;
        }
        if p > prime_cutoff && log_at_cutoff.is_none() {
            log_at_cutoff = Some(log_sum);
        }
        let pm1 = (p - 1) as f64;
        log_sum += (1.0 - 1.0 / (pm1 * pm1)).ln();
    }
    (log_at_cutoff.unwrap_or(log_sum), log_sum)
}

fn euler_remainder(log_at_p: f64, log_at_4p: f64, prime_cutoff: u64) -> f64 {
    // Beyond 4P: sum of |log(1 - 1/(p-1)^2)| <= sum over n > 4P of 2/(n-1)^2.
    (log_at_p - log_at_4p).abs() + 2.0 / (4.0 * prime_cutoff as f64 - 1.0)
}

/// Hardy-Littlewood singular series C(h), truncated at `prime_cutoff`.
///
/// Exactly zero for odd h. The p | h correction factors are exact finite
/// products kept outside the log-space accumulation so ratios like
/// C(6)/C(2) = 2 hold exactly at any fixed cutoff.
pub fn singular_series_c(h: u64, prime_cutoff: u64) -> Result<EulerProductValue> {
    if h == 0 {
        return Err(Error::Parameter("shift h must be >= 1".into()));
    }
    if prime_cutoff < 3 {
        return Err(Error::Parameter(format!(
            "prime cutoff {prime_cutoff} must be >= 3"
        )));
    }
    let params = format!("C(h={h})");
    if h % 2 == 1 {
        return Ok(EulerProductValue {
            value: 0.0,
            prime_cutoff,
            remainder_estimate: 0.0,
            params,
        });
    }
    let mut prefactor = 2.0;
    for p in odd_prime_factors(h) {
        prefactor *= (p - 1) as f64 / (p - 2) as f64;
    }
    let (log_at_p, log_at_4p) = twin_log_sums(prime_cutoff);
    Ok(EulerProductValue {
        value: prefactor * log_at_p.exp(),
        prime_cutoff,
        remainder_estimate: euler_remainder(log_at_p, log_at_4p, prime_cutoff),
        params,
    })
}

/// Sophie Germain singular constant
/// S = (2C/a) prod over p > 2, p | abl of (p-1)/(p-2)
/// when (a,b) = (a,l) = (b,l) = 1 and exactly one of a, b, l is even; else 0.
/// C is the twin-prime product over 2 < p <= cutoff of (1 - 1/(p-1)^2).
pub fn sophie_germain_s(a: u64, b: u64, l: u64, prime_cutoff: u64) -> Result<EulerProductValue> {
    if a == 0 || b == 0 || l == 0 {
        return Err(Error::Parameter("a, b, l must all be >= 1".into()));
    }
    if prime_cutoff < 3 {
        return Err(Error::Parameter(format!(
            "prime cutoff {prime_cutoff} must be >= 3"
        )));
    }
    let params = format!("S(a={a}, b={b}, l={l})");
    let coprime = gcd(a, b) == 1 && gcd(a, l) == 1 && gcd(b, l) == 1;
    let even_count = [a, b, l].iter().filter(|v| *v % 2 == 0).count();
    if !coprime || even_count != 1 {
        return Ok(EulerProductValue {
            value: 0.0,
            prime_cutoff,
            remainder_estimate: 0.0,
            params,
        });
    }
    // a, b, l are pairwise coprime, so their odd prime factors are disjoint.
    let mut factors = Vec::new();
    for v in [a, b, l] {
        factors.extend(odd_prime_factors(v));
    }
    factors.sort_unstable();
    let mut prefactor = 2.0 / a as f64;
    for p in factors {
        prefactor *= (p - 1) as f64 / (p - 2) as f64;
    }
    let (log_at_p, log_at_4p) = twin_log_sums(prime_cutoff);
    Ok(EulerProductValue {
        value: prefactor * log_at_p.exp(),
        prime_cutoff,
        remainder_estimate: euler_remainder(log_at_p, log_at_4p, prime_cutoff),
        params,
    })
}

/// One rung of the doubling ladder: empirical mean at N' against C(h).
#[derive(Debug, Clone, Serialize)]
pub struct LadderRow {
    pub n_terms: u64,
    pub empirical: f64,
    pub predicted: f64,
    pub ratio: f64,
}

/// Damped Abel prediction at one z of the schedule.
#[derive(Debug, Clone, Serialize)]
pub struct DampedPredictionRow {
    pub z: f64,
    pub q_epsilon: u64,
    pub damped: f64,
    pub predicted: f64,
    pub ratio: f64,
}

/// Full prime-pair experiment output.
#[derive(Debug, Clone, Serialize)]
pub struct PrimePairReport {
    pub h: u64,
    pub n_terms: u64,
    pub predicted: EulerProductValue,
    pub ladder: Vec<LadderRow>,
    pub damped: Vec<DampedPredictionRow>,
}

/// Compares (1/N') sum of w(n) w(n+h) for w the weighted von Mangoldt
/// function against C(h), over a doubling ladder of N' up to N, plus one
/// damped Abel prediction per scheduled z.
pub fn experiment_prime_pair(
    table: &SieveTable,
    h: u64,
    n_terms: u64,
    z_schedule: &[f64],
    epsilon: f64,
    prime_cutoff: u64,
    opts: &CorrelateOptions,
) -> Result<PrimePairReport> {
    if h == 0 || h % 2 == 1 {
        return Err(Error::Parameter(format!(
            "shift h = {h} rejected: prime-pair correlations need even h >= 2 \
             (C(h) vanishes identically for odd h)"
        )));
    }
    if n_terms == 0 {
        return Err(Error::Parameter("N must be >= 1".into()));
    }
    if n_terms + h > table.n_max() {
        return Err(Error::Range(format!(
            "N + h = {} exceeds table size {}",
            n_terms + h,
            table.n_max()
        )));
    }
    let predicted = singular_series_c(h, prime_cutoff)?;

    let mut rungs = Vec::new();
    let mut v = n_terms;
    while v >= 1024 && rungs.len() < 11 {
        rungs.push(v);
        v /= 2;
    }
    if rungs.is_empty() {
        rungs.push(n_terms);
    }
    rungs.reverse();

    let w = WeightedLambdaSeq::new(table);
    let mut ladder = Vec::new();
    for rung in rungs {
        let est = correlate_raw(&w, &w, h, Sign::Plus, rung, opts)?;
        ladder.push(LadderRow {
            n_terms: rung,
            empirical: est.value,
            predicted: predicted.value,
            ratio: est.value / predicted.value,
        });
    }

    let mu_phi = CoefficientFamily::mu_over_phi();
    let mut damped = Vec::new();
    for &z in z_schedule {
        let q_epsilon = choose_q_epsilon(&mu_phi, z, epsilon)?;
        table.check_range(q_epsilon, "Q_epsilon")?;
        let value = abel_prediction_damped(table, &mu_phi, &mu_phi, z, q_epsilon, h as i64)?;
        damped.push(DampedPredictionRow {
            z,
            q_epsilon,
            damped: value,
            predicted: predicted.value,
            ratio: value / predicted.value,
        });
    }

    Ok(PrimePairReport {
        h,
        n_terms,
        predicted,
        ladder,
        damped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> SieveTable {
        SieveTable::build(8192).unwrap()
    }

    #[test]
    fn weighted_lambda_examples() {
        let t = table();
        assert!((weighted_lambda(&t, 2).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(weighted_lambda(&t, 6).unwrap(), 0.0);
        assert!((weighted_lambda(&t, 9).unwrap() - 6.0 / 9.0 * 3f64.ln()).abs() < 1e-15);
        assert_eq!(weighted_lambda(&t, 1).unwrap(), 0.0);
        assert!(weighted_lambda(&t, 0).is_err());
        assert!(weighted_lambda(&t, 9000).is_err());
    }

    #[test]
    fn weighted_lambda_prime_power_support() {
        let t = table();
        for n in 2..=2000u64 {
            let v = weighted_lambda(&t, n).unwrap();
            let p = t.spf(n);
            let mut m = n;
            while m % p == 0 {
                m /= p;
            }
            if m == 1 {
                assert!(v > 0.0, "w({n}) should be positive on prime powers");
                if n == p {
                    let expected = (1.0 - 1.0 / p as f64) * (p as f64).ln();
                    assert!((v - expected).abs() < 1e-12);
                }
            } else {
                assert_eq!(v, 0.0, "w({n}) should vanish off prime powers");
            }
        }
    }

    #[test]
    fn mu_over_phi_examples() {
        let t = table();
        assert_eq!(mu_over_phi(&t, 1).unwrap(), 1.0);
        assert_eq!(mu_over_phi(&t, 4).unwrap(), 0.0);
        assert_eq!(mu_over_phi(&t, 3).unwrap(), -0.5);
    }

    #[test]
    fn streaming_matches_dense_bitwise() {
        let t = table();
        let dense = WeightedLambdaSeq::new(&t);
        let stream = StreamingWeightedLambda::new(8192).unwrap();
        let mut buf = vec![0.0; 3000];
        stream.fill(5000, &mut buf);
        for (i, &v) in buf.iter().enumerate() {
            let n = 5000 + i as i64;
            assert_eq!(v.to_bits(), dense.value(n).to_bits(), "n = {n}");
        }
        assert_eq!(
            stream.value(4096).to_bits(),
            dense.value(4096).to_bits()
        );
    }

    #[test]
    fn singular_series_odd_is_zero() {
        for h in (1..=99u64).step_by(2) {
            let v = singular_series_c(h, 1000).unwrap();
            assert_eq!(v.value, 0.0);
        }
    }

    #[test]
    fn singular_series_ratios_exact() {
        let c2 = singular_series_c(2, 10_000).unwrap();
        let c6 = singular_series_c(6, 10_000).unwrap();
        assert_eq!(c6.value / c2.value, 2.0);
        // C(4) carries no extra factor: 4 = 2^2 has no odd prime divisor.
        let c4 = singular_series_c(4, 10_000).unwrap();
        assert_eq!(c4.value.to_bits(), c2.value.to_bits());
        // C(30): factors 3 and 5 contribute 2 * (4/3).
        let c30 = singular_series_c(30, 10_000).unwrap();
        assert!((c30.value / c2.value - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn singular_series_value_and_remainder() {
        let c2 = singular_series_c(2, 100_000).unwrap();
        assert!((c2.value - 1.3203236).abs() < 1e-5, "C(2) = {}", c2.value);
        // The remainder estimate must dominate the measured refinement gap.
        let refined = singular_series_c(2, 400_000).unwrap();
        let log_gap = (c2.value.ln() - refined.value.ln()).abs();
        assert!(c2.remainder_estimate >= log_gap);
    }

    #[test]
    fn singular_series_parameter_errors() {
        assert!(singular_series_c(0, 100).is_err());
        assert!(singular_series_c(2, 2).is_err());
    }

    #[test]
    fn sophie_examples() {
        assert_eq!(sophie_germain_s(2, 2, 1, 1000).unwrap().value, 0.0);
        assert_eq!(sophie_germain_s(1, 1, 1, 1000).unwrap().value, 0.0);
        let s = sophie_germain_s(2, 1, 1, 100_000).unwrap();
        assert!((s.value - 0.6601618).abs() < 1e-5, "S = {}", s.value);
        // (1, 2, 3): prefactor (2C/1) * (3-1)/(3-2) = 4C, so the ratio to
        // (2, 1, 1) = C is exactly 4.
        let s4 = sophie_germain_s(1, 2, 3, 100_000).unwrap();
        assert_eq!(s4.value / s.value, 4.0);
        assert!(sophie_germain_s(0, 1, 1, 1000).is_err());
        assert!(sophie_germain_s(2, 1, 1, 2).is_err());
    }

    #[test]
    fn experiment_rejects_odd_shift() {
        let t = table();
        let err = experiment_prime_pair(
            &t,
            1,
            1000,
            &[],
            0.01,
            1000,
            &CorrelateOptions::default(),
        );
        assert!(matches!(err, Err(Error::Parameter(_))));
    }

    #[test]
    fn experiment_smoke() {
        let t = table();
        let report = experiment_prime_pair(
            &t,
            2,
            8000,
            &[0.9],
            0.01,
            10_000,
            &CorrelateOptions::default(),
        )
        .unwrap();
        assert!(report.predicted.value > 1.3 && report.predicted.value < 1.4);
        assert_eq!(report.ladder.len(), 3); // 2000, 4000, 8000
        assert!(report.ladder.windows(2).all(|w| w[0].n_terms < w[1].n_terms));
        for row in &report.ladder {
            assert!(row.empirical.is_finite());
            assert!((row.ratio - row.empirical / report.predicted.value).abs() < 1e-15);
        }
        assert_eq!(report.damped.len(), 1);
        assert_eq!(report.damped[0].q_epsilon, 65);
        assert!(report.damped[0].damped > 0.0);
    }
}
