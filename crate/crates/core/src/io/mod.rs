//! Dataset files, run configuration and atomic output.

mod config;
mod dataset;

use std::io::Write;
use std::path::Path;

pub use config::{
    DataPaths, FieldConfig, MetricsSection, ReconstructSection, RunConfig, SampleSection, SamplerSection,
};
pub use dataset::{
    canonical_float, load_dataset, parse_dataset, record_to_line, save_dataset, write_dataset, CrystalRecord,
};

use crate::error::Result;

/// Write `bytes` to `path` through a temporary file in the same directory,
/// renamed into place once complete.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
