//! Sequence specifications accepted by `correlate --f/--g`:
//!
//! * `one`                - the constant sequence 1
//! * `cq:<q>`             - the Ramanujan sum sequence n -> c_q(n)
//! * `weighted-lambda`    - (phi(n)/n) Lambda(n)
//! * `damped:mu-over-phi` - the damped partial sum f_Q(z, n) of the mu/phi
//!   family, truncated at Q_epsilon from the --z / --eps flags
//!
//! Dense tables back everything by default; weighted-lambda switches to the
//! segmented streaming sieve above [`STREAM_THRESHOLD`] indices (or when
//! forced), producing bit-identical values.

use std::str::FromStr;

use rfabel_core::correlation::{ConstOne, CqSequence, Sequence};
use rfabel_core::primeapps::{StreamingWeightedLambda, WeightedLambdaSeq};
use rfabel_core::rfseries::{choose_q_epsilon, CoefficientFamily, DampedSeriesTable};
use rfabel_core::{Error, Result, SieveTable};

/// Above this index range, weighted-lambda correlations stream segments
/// instead of holding a dense table.
pub const STREAM_THRESHOLD: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    One,
    Cq(u64),
    WeightedLambda,
    DampedMuOverPhi,
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(Self::One),
            "weighted-lambda" => Ok(Self::WeightedLambda),
            "damped:mu-over-phi" => Ok(Self::DampedMuOverPhi),
            other => {
                if let Some(q) = other.strip_prefix("cq:") {
                    let q: u64 = q.parse().map_err(|_| {
                        Error::Parameter(format!("bad modulus in family spec '{other}'"))
                    })?;
                    if q == 0 {
                        return Err(Error::Parameter("cq modulus must be >= 1".into()));
                    }
                    Ok(Self::Cq(q))
                } else {
                    Err(Error::Parameter(format!(
                        "unknown family '{other}' (expected one, cq:<q>, weighted-lambda, \
                         damped:mu-over-phi)"
                    )))
                }
            }
        }
    }
}

impl FamilySpec {
    /// Table size this spec needs for indices up to `max_index`, or 0 when it
    /// can run without one.
    pub fn table_requirement(
        &self,
        max_index: u64,
        z: Option<f64>,
        epsilon: Option<f64>,
        force_streaming: bool,
    ) -> Result<u64> {
        match self {
            FamilySpec::One => Ok(0),
            FamilySpec::Cq(q) => Ok(*q),
            FamilySpec::WeightedLambda => {
                if force_streaming || max_index > STREAM_THRESHOLD {
                    Ok(0)
                } else {
                    Ok(max_index)
                }
            }
            FamilySpec::DampedMuOverPhi => {
                let (z, eps) = damping_params(z, epsilon)?;
                choose_q_epsilon(&CoefficientFamily::mu_over_phi(), z, eps)
            }
        }
    }

    pub fn build<'a>(
        &self,
        table: Option<&'a SieveTable>,
        max_index: u64,
        z: Option<f64>,
        epsilon: Option<f64>,
        force_streaming: bool,
    ) -> Result<SequenceHolder<'a>> {
        match self {
            FamilySpec::One => Ok(SequenceHolder::One(ConstOne)),
            FamilySpec::Cq(q) => {
                let table = expect_table(table)?;
                Ok(SequenceHolder::Cq(CqSequence::new(table, *q)?))
            }
            FamilySpec::WeightedLambda => {
                if force_streaming || max_index > STREAM_THRESHOLD {
                    Ok(SequenceHolder::Streaming(StreamingWeightedLambda::new(
                        max_index,
                    )?))
                } else {
                    let table = expect_table(table)?;
                    Ok(SequenceHolder::Dense(WeightedLambdaSeq::new(table)))
                }
            }
            FamilySpec::DampedMuOverPhi => {
                let (z, eps) = damping_params(z, epsilon)?;
                let table = expect_table(table)?;
                let family = CoefficientFamily::mu_over_phi();
                let q = choose_q_epsilon(&family, z, eps)?;
                Ok(SequenceHolder::Damped(DampedSeriesTable::build(
                    table, &family, z, q,
                )?))
            }
        }
    }
}

fn damping_params(z: Option<f64>, epsilon: Option<f64>) -> Result<(f64, f64)> {
    match (z, epsilon) {
        (Some(z), Some(eps)) => Ok((z, eps)),
        _ => Err(Error::Parameter(
            "damped families need both --z and --eps".into(),
        )),
    }
}

fn expect_table(table: Option<&SieveTable>) -> Result<&SieveTable> {
    table.ok_or_else(|| Error::Parameter("this family needs a sieve table".into()))
}

/// Owns whichever concrete sequence a spec produced.
pub enum SequenceHolder<'a> {
    One(ConstOne),
    Cq(CqSequence<'a>),
    Dense(WeightedLambdaSeq<'a>),
    Streaming(StreamingWeightedLambda),
    Damped(DampedSeriesTable),
}

impl SequenceHolder<'_> {
    pub fn as_dyn(&self) -> &dyn Sequence {
        match self {
            SequenceHolder::One(s) => s,
            SequenceHolder::Cq(s) => s,
            SequenceHolder::Dense(s) => s,
            SequenceHolder::Streaming(s) => s,
            SequenceHolder::Damped(s) => s,
        }
    }
}
