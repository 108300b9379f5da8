//! The Ramanujan sum c_q(n) = sum of e^(2 pi i k n / q) over k in [1, q]
//! coprime to q, and the mean values built from it.
//!
//! Two evaluation routes are kept deliberately independent:
//!
//! * [`csum_direct`] sums the complex exponentials from the definition and
//!   checks that the result is an integer to within a strict residual. It is
//!   the oracle.
//! * [`csum_fast`] uses the multiplicative closed form
//!   c_q(n) = mu(q/d) phi(q) / phi(q/d) with d = gcd(n mod q, q), which needs
//!   only table lookups. It is the workhorse and is validated exhaustively
//!   against the oracle.
//!
//! c_q(n) is even in n and periodic with period q, so negative arguments
//! reduce through `rem_euclid` with no special casing.
//!
//! One classical dichotomy needs a caveat: "c_q(n) = phi(q) if q | n, else
//! -1" holds only for prime q. Composite moduli break it (c_4(2) = -2), so
//! nothing here relies on it beyond the prime case.
//!
//! Mean values keep exact integer numerators and divide once at the end, so
//! full-period identities hold bitwise.

use crate::error::{Error, Result};
use crate::sieves::{gcd, SieveTable};
use crate::Sign;

/// Residual above which the direct evaluation refuses to round to an integer.
pub const DIRECT_INTEGRALITY_TOL: f64 = 1e-6;

/// Ramanujan sum from the definition: a complex exponential sum over the
/// residues coprime to q, rounded to the nearest integer after checking that
/// both the imaginary part and the rounding residual are below
/// [`DIRECT_INTEGRALITY_TOL`].
pub fn csum_direct(q: u64, n: i64) -> Result<i64> {
    csum_direct_with_tol(q, n, DIRECT_INTEGRALITY_TOL)
}

pub(crate) fn csum_direct_with_tol(q: u64, n: i64, tol: f64) -> Result<i64> {
    if q == 0 {
        return Err(Error::Parameter("modulus q must be >= 1".into()));
    }
    let r = n.rem_euclid(q as i64) as u64;
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    let step = std::f64::consts::TAU / q as f64;
    for k in 1..=q {
        if gcd(k, q) != 1 {
            continue;
        }
        // Reduce k*r mod q in integers so the angle stays small and exact.
        let j = ((k as u128 * r as u128) % q as u128) as u64;
        let angle = step * j as f64;
        re += angle.cos();
        im += angle.sin();
    }
    let rounded = re.round();
    let residual = (re - rounded).abs().max(im.abs());
    if residual >= tol {
        return Err(Error::NumericIntegrity(format!(
            "c_{q}({n}) direct sum residual {residual:.3e} >= {tol:.3e}; \
             q too large for the direct method, use csum_fast"
        )));
    }
    Ok(rounded as i64)
}

/// Ramanujan sum via the multiplicative closed form; exact integers only.
pub fn csum_fast(table: &SieveTable, q: u64, n: i64) -> Result<i64> {
    table.check_range(q, "q")?;
    Ok(csum_fast_unchecked(table, q, n))
}

/// As [`csum_fast`] but without the range check; q must be in table range.
#[inline]
pub(crate) fn csum_fast_unchecked(table: &SieveTable, q: u64, n: i64) -> i64 {
    let r = n.rem_euclid(q as i64) as u64;
    let d = gcd(r, q); // gcd(0, q) = q covers q | n
    let qd = q / d;
    let mu = table.mu(qd);
    if mu == 0 {
        return 0;
    }
    let quotient = table.phi(q) / table.phi(qd);
    debug_assert_eq!(table.phi(q) % table.phi(qd), 0);
    mu * quotient as i64
}

/// Mean value (1/N) sum of c_q(n) for n = 1..=N, with an exact integer
/// numerator and a single final division.
pub fn csum_mean(table: &SieveTable, q: u64, n_max: u64) -> Result<f64> {
    if n_max == 0 {
        return Err(Error::Parameter("mean over zero terms".into()));
    }
    table.check_range(q, "q")?;
    let mut sum: i128 = 0;
    for n in 1..=n_max {
        sum += csum_fast_unchecked(table, q, n as i64) as i128;
    }
    Ok(sum as f64 / n_max as f64)
}

/// Exact integer numerator of the cross mean
/// sum over n = 1..=N of c_{q1}(n) * c_{q2}(n +/- m).
pub fn csum_cross_sum(
    table: &SieveTable,
    q1: u64,
    q2: u64,
    m: i64,
    sign: Sign,
    n_max: u64,
) -> Result<i128> {
    table.check_range(q1, "q1")?;
    table.check_range(q2, "q2")?;
    let mut sum: i128 = 0;
    for n in 1..=n_max {
        let n = n as i64;
        let shifted = match sign {
            Sign::Plus => n + m,
            Sign::Minus => n - m,
        };
        let a = csum_fast_unchecked(table, q1, n);
        let b = csum_fast_unchecked(table, q2, shifted);
        sum += a as i128 * b as i128;
    }
    Ok(sum)
}

/// Cross mean (1/N) sum of c_{q1}(n) c_{q2}(n +/- m); integer-exact numerator.
pub fn csum_cross_mean(
    table: &SieveTable,
    q1: u64,
    q2: u64,
    m: i64,
    sign: Sign,
    n_max: u64,
) -> Result<f64> {
    if n_max == 0 {
        return Err(Error::Parameter("mean over zero terms".into()));
    }
    let sum = csum_cross_sum(table, q1, q2, m, sign, n_max)?;
    Ok(sum as f64 / n_max as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieves::lcm;
    use proptest::prelude::*;

    fn table() -> SieveTable {
        SieveTable::build(512).unwrap()
    }

    #[test]
    fn direct_known_values() {
        assert_eq!(csum_direct(1, 5).unwrap(), 1);
        assert_eq!(csum_direct(4, 0).unwrap(), 2); // c_q(0) = phi(q)
        assert_eq!(csum_direct(4, 2).unwrap(), -2); // e^{i pi} + e^{3 i pi}
        assert_eq!(csum_direct(3, 1).unwrap(), -1); // 2 cos(2 pi / 3)
    }

    #[test]
    fn direct_rejects_zero_modulus() {
        assert!(matches!(csum_direct(0, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn direct_integrality_guard_fires() {
        // An absurdly tight tolerance forces the integrity error path.
        assert!(matches!(
            csum_direct_with_tol(360, 7, 1e-18),
            Err(Error::NumericIntegrity(_))
        ));
    }

    #[test]
    fn fast_known_values() {
        let t = table();
        assert_eq!(csum_fast(&t, 6, 1).unwrap(), 1);
        assert_eq!(csum_fast(&t, 5, 5).unwrap(), 4); // q | n gives phi(q)
        assert_eq!(csum_fast(&t, 4, 2).unwrap(), -2);
    }

    #[test]
    fn fast_range_error() {
        let t = table();
        assert!(matches!(csum_fast(&t, 10_000, 1), Err(Error::Range(_))));
        assert!(matches!(csum_fast(&t, 0, 1), Err(Error::Range(_))));
    }

    #[test]
    fn fast_matches_direct_on_grid() {
        let t = table();
        for q in 1..=60u64 {
            for n in -200..=200i64 {
                assert_eq!(
                    csum_fast(&t, q, n).unwrap(),
                    csum_direct(q, n).unwrap(),
                    "q={q} n={n}"
                );
            }
        }
    }

    #[test]
    fn prime_case_of_divides_or_not() {
        // For prime q: phi(q) when q | n, else -1. (Composite q breaks this:
        // c_4(2) = -2.)
        let t = table();
        for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23] {
            for n in -50..=50i64 {
                let expected = if n.rem_euclid(p as i64) == 0 {
                    (p - 1) as i64
                } else {
                    -1
                };
                assert_eq!(csum_fast(&t, p, n).unwrap(), expected);
            }
        }
        assert_eq!(csum_fast(&t, 4, 2).unwrap(), -2);
    }

    #[test]
    fn mean_values() {
        let t = table();
        assert_eq!(csum_mean(&t, 1, 100).unwrap(), 1.0);
        assert_eq!(csum_mean(&t, 3, 3).unwrap(), 0.0);
        assert_eq!(csum_mean(&t, 2, 1000).unwrap(), 0.0);
    }

    #[test]
    fn cross_mean_values() {
        let t = table();
        assert_eq!(csum_cross_mean(&t, 2, 2, 0, Sign::Plus, 2).unwrap(), 1.0);
        assert_eq!(csum_cross_mean(&t, 2, 3, 5, Sign::Plus, 6).unwrap(), 0.0);
        assert_eq!(csum_cross_mean(&t, 3, 3, 1, Sign::Plus, 3).unwrap(), -1.0);
    }

    #[test]
    fn full_period_orthogonality_exact() {
        let t = table();
        for q1 in 1..=12u64 {
            for q2 in 1..=12u64 {
                let period = lcm(q1, q2);
                for m in 0..=6i64 {
                    for sign in [Sign::Plus, Sign::Minus] {
                        let numer = csum_cross_sum(&t, q1, q2, m, sign, period).unwrap();
                        let expected = if q1 == q2 {
                            csum_fast(&t, q1, m).unwrap() as i128 * period as i128
                        } else {
                            0
                        };
                        assert_eq!(numer, expected, "q1={q1} q2={q2} m={m} sign={sign}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bounded_even_periodic(q in 1u64..=200, n in -2000i64..=2000) {
            let t = table();
            let v = csum_fast(&t, q, n).unwrap();
            prop_assert!(v.unsigned_abs() <= t.phi(q));
            prop_assert_eq!(v, csum_fast(&t, q, -n).unwrap());
            prop_assert_eq!(v, csum_fast(&t, q, n + q as i64).unwrap());
        }

        #[test]
        fn partial_mean_decay(q in 2u64..=40, n_max in 1u64..=3000) {
            // Each full period sums to zero, so the mean decays like 1/N.
            let t = table();
            let mean = csum_mean(&t, q, n_max).unwrap();
            let bound = (q * t.phi(q)) as f64 / n_max as f64;
            prop_assert!(mean.abs() <= bound + 1e-12);
        }
    }
}
