//! Data ingestion, residual diagnostics, parameter distances and the
//! command-line front end.

pub mod cli;
pub mod distance;
pub mod ingest;
pub mod residuals;

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub use distance::distance;
pub use ingest::{load_csv, ColumnRole, ColumnSpec, LoadedData, Preprocessor};
pub use residuals::{generalized_residuals, generalized_residuals_at, ResidualReport};

/// Writes `path` atomically: the content goes to a temporary file in the same
/// directory, which is then renamed over the target.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
