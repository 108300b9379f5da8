//! Numerics for Ramanujan sums, Ramanujan-Fourier series and their Abel-summed
//! correlation identities, plus the prime-pair applications built on them
//! (weighted von Mangoldt autocorrelation against Hardy-Littlewood singular
//! series).
//!
//! Layering, bottom up:
//!
//! * [`sieves`]: exact tables of phi, mu, Lambda and smallest prime factors.
//! * [`ramanujan`]: the Ramanujan sum c_q(n), evaluated both from its
//!   definition (complex exponential sum) and from the multiplicative closed
//!   form, plus exact-period mean values.
//! * [`rfseries`]: coefficient families {a_q}, damped partial sums
//!   f_Q(z, n) = sum over q <= Q of a_q z^q c_q(n), certified tail bounds and
//!   truncation-index selection.
//! * [`correlation`]: deterministic compensated correlation means
//!   (1/N) sum f(n) g(n +/- m), damped and limiting Abel predictions, and the
//!   sandwich-inequality verdict.
//! * [`primeapps`]: the weighted von Mangoldt function, mu/phi coefficients,
//!   singular-series constants and the prime-pair experiment.

// `n % p == 0` is the natural notation throughout sieve code.
#![allow(clippy::manual_is_multiple_of)]

pub mod correlation;
pub mod error;
pub mod primeapps;
pub mod ramanujan;
pub mod rfseries;
pub mod sieves;

pub use error::{Error, Result};
pub use sieves::SieveTable;

use std::fmt;
use std::str::FromStr;

/// Direction of the shift in correlation sums: g(n + m) or g(n - m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+"),
            Sign::Minus => write!(f, "-"),
        }
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            other => Err(Error::Parameter(format!(
                "sign must be '+' or '-', got '{other}'"
            ))),
        }
    }
}
