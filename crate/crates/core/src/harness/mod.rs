//! Experiment orchestration: phase sweeps, the density study and the erasure
//! decoding benchmark, with their on-disk formats.

mod decode;
mod density;
mod record;
mod sweep;

use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub use decode::{run_decoding_benchmark, DecodingRow, DecodingTable, MinimumRow};
pub use density::{density_csv, run_density_study, DensityRow};
pub use record::{CodeRecord, Provenance};
pub use sweep::{
    classify, gamma_grid, instance_stream, run_phase_sweep, load_pixels, load_records,
    PixelClass, PixelResult, SweepConfig, SweepOutcome,
};

/// First line of every CSV written by the harness.
pub const CSV_VERSION_LINE: &str = "# format_version: 1";

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary sibling and a rename, so an interrupted run
/// never leaves a truncated file behind.
pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Strips the version line from a harness CSV, rejecting other versions.
pub(crate) fn csv_body(text: &str) -> Result<&str> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    if first.trim_end() != CSV_VERSION_LINE {
        return Err(Error::Parse(format!("unsupported CSV version line {first:?}")));
    }
    Ok(rest)
}

/// Shortest round-trip formatting, so CSV bytes are a function of the values.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
