//! Experiment configuration: the full parameter set of a run, loadable from a
//! JSON file, with a platform-stable digest used to tie checkpoints to the
//! run they belong to.

use serde::{Deserialize, Serialize};

use crate::output::fmt_f64;

/// Parameters of a long-running subcommand. Round-trips losslessly through
/// JSON; `params_hash` covers everything that influences the numbers (not
/// output paths or checkpoint cadence).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: String,
    #[serde(default)]
    pub f: Option<String>,
    #[serde(default)]
    pub g: Option<String>,
    #[serde(default)]
    pub m: Option<u64>,
    #[serde(default)]
    pub sign: Option<String>,
    #[serde(default)]
    pub h: Option<u64>,
    pub n_terms: u64,
    #[serde(default)]
    pub z: Vec<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub cutoff: Option<u64>,
    pub chunk_size: usize,
    /// Chunks between checkpoint writes; 0 disables. Not part of the hash:
    /// cadence does not change results.
    #[serde(default)]
    pub checkpoint_interval: u64,
}

impl ExperimentConfig {
    /// Canonical ASCII form of the result-determining parameters. Floats are
    /// rendered with 17 significant digits so the string (and the hash) is
    /// identical across platforms.
    pub fn canonical_string(&self) -> String {
        let z = self
            .z
            .iter()
            .map(|v| fmt_f64(*v))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "v1|sub={}|f={}|g={}|m={}|sign={}|h={}|n={}|z={}|eps={}|cutoff={}|chunk={}",
            self.subcommand,
            self.f.as_deref().unwrap_or(""),
            self.g.as_deref().unwrap_or(""),
            self.m.map(|v| v.to_string()).unwrap_or_default(),
            self.sign.as_deref().unwrap_or(""),
            self.h.map(|v| v.to_string()).unwrap_or_default(),
            self.n_terms,
            z,
            self.epsilon.map(fmt_f64).unwrap_or_default(),
            self.cutoff.map(|v| v.to_string()).unwrap_or_default(),
            self.chunk_size,
        )
    }

    pub fn params_hash(&self) -> u64 {
        fnv1a64(self.canonical_string().as_bytes())
    }
}

/// FNV-1a, 64-bit: tiny, dependency-free and stable everywhere.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentConfig {
        ExperimentConfig {
            subcommand: "correlate".into(),
            f: Some("weighted-lambda".into()),
            g: Some("weighted-lambda".into()),
            m: Some(2),
            sign: Some("+".into()),
            h: None,
            n_terms: 1_000_000,
            z: vec![0.9, 0.99],
            epsilon: Some(0.01),
            cutoff: None,
            chunk_size: 65536,
            checkpoint_interval: 16,
        }
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let cfg = sample();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.params_hash(), cfg.params_hash());
    }

    #[test]
    fn hash_tracks_numeric_parameters() {
        let cfg = sample();
        let mut other = cfg.clone();
        other.n_terms += 1;
        assert_ne!(cfg.params_hash(), other.params_hash());

        let mut other = cfg.clone();
        other.chunk_size = 1024;
        assert_ne!(cfg.params_hash(), other.params_hash());

        // Checkpoint cadence does not affect results, so not the hash either.
        let mut other = cfg.clone();
        other.checkpoint_interval = 99;
        assert_eq!(cfg.params_hash(), other.params_hash());
    }

    #[test]
    fn fnv_reference_vector() {
        // FNV-1a test vector: empty input hashes to the offset basis.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }
}
