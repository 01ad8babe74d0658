//! Model files, DOT export and atomic output.

mod dot;
mod model;

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub use dot::export_dot;
pub use model::{ModelFile, FORMAT_VERSION};

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
