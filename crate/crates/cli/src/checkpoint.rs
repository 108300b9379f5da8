//! Checkpoint files: JSON, written atomically (temp file then rename) so an
//! interrupted write can never corrupt a resumable state.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rfabel_core::correlation::CorrelationCheckpoint;

pub fn save_atomic(path: &Path, state: &CorrelationCheckpoint) -> Result<()> {
    let json = serde_json::to_string_pretty(state)?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, json).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Loads a checkpoint if the file exists; a missing file is a fresh start.
pub fn load(path: &Path) -> Result<Option<CorrelationCheckpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let state = serde_json::from_str(&text)
        .with_context(|| format!("parsing checkpoint {}", path.display()))?;
    Ok(Some(state))
}
