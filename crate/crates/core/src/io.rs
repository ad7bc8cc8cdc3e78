//! Result files: the pinned CSV column contract and the JSON sidecar that
//! carries the full scenario and its digest for provenance.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! read-back CSV reproduces the in-memory values exactly.

use crate::sim::{BerCurve, BerPoint};
use std::fs;
use std::path::{Path, PathBuf};

/// Column order is frozen; downstream plotting scripts key on these names.
pub const CSV_HEADER: &str = "snr_db,frames,bits,bit_errors,ber,avg_iterations,avg_neighbor_evals";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {msg}")]
    Malformed { path: String, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn malformed(path: &Path, msg: impl Into<String>) -> IoError {
    IoError::Malformed {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

pub fn write_csv(path: &Path, points: &[BerPoint]) -> Result<(), IoError> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.snr_db, p.frames, p.bits, p.bit_errors, p.ber, p.avg_iterations, p.avg_neighbor_evals
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<BerPoint>, IoError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed(path, "empty file"))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| -> Result<usize, IoError> {
        names
            .iter()
            .position(|&n| n == name)
            .ok_or_else(|| malformed(path, format!("missing column {name}")))
    };
    let (c_snr, c_frames, c_bits, c_errs, c_ber, c_iter, c_nev) = (
        col("snr_db")?,
        col("frames")?,
        col("bits")?,
        col("bit_errors")?,
        col("ber")?,
        col("avg_iterations")?,
        col("avg_neighbor_evals")?,
    );

    let mut points = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let take = |c: usize| -> Result<&str, IoError> {
            fields
                .get(c)
                .copied()
                .ok_or_else(|| malformed(path, format!("line {}: too few fields", lineno + 2)))
        };
        let f64_at = |c: usize| -> Result<f64, IoError> {
            take(c)?
                .parse()
                .map_err(|e| malformed(path, format!("line {}: {e}", lineno + 2)))
        };
        let u64_at = |c: usize| -> Result<u64, IoError> {
            take(c)?
                .parse()
                .map_err(|e| malformed(path, format!("line {}: {e}", lineno + 2)))
        };
        points.push(BerPoint {
            snr_db: f64_at(c_snr)?,
            frames: u64_at(c_frames)?,
            bits: u64_at(c_bits)?,
            bit_errors: u64_at(c_errs)?,
            ber: f64_at(c_ber)?,
            avg_iterations: f64_at(c_iter)?,
            avg_neighbor_evals: f64_at(c_nev)?,
            antenna_bit_errors: 0,
            symbol_bit_errors: 0,
        });
    }
    Ok(points)
}

/// Sidecar lives next to the CSV with the extension swapped to .json.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_sidecar(path: &Path, curve: &BerCurve) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(curve)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<BerCurve, IoError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
