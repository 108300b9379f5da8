//! Structured output: CSV with `#`-prefixed metadata header lines, JSON for
//! machine consumers. Every float is printed with 17 significant digits so a
//! value can be reproduced bit for bit from the text.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Where a report goes: stdout by default, a file when requested.
pub struct Sink {
    inner: Box<dyn Write>,
}

impl Sink {
    pub fn stdout() -> Self {
        Self {
            inner: Box::new(io::stdout().lock()),
        }
    }

    pub fn file(path: &Path) -> io::Result<Self> {
        Ok(Self {
            inner: Box::new(BufWriter::new(File::create(path)?)),
        })
    }

    pub fn open(path: Option<&Path>) -> io::Result<Self> {
        match path {
            Some(p) => Self::file(p),
            None => Ok(Self::stdout()),
        }
    }

    /// A `# key: value` metadata line. Metadata is excluded from the
    /// determinism contract; data rows are not.
    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> io::Result<()> {
        writeln!(self.inner, "# {key}: {value}")
    }

    pub fn row(&mut self, line: &str) -> io::Result<()> {
        writeln!(self.inner, "{line}")
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.inner.flush()
    }
}
