//! Result files: CSV curves, SVG plots and run manifests.

pub mod csv;
pub mod manifest;
pub mod svg;

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
