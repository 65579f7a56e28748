//! Deterministic artifact emission: CSV with 12 significant digits and LF
//! endings, JSON documents, and atomic file replacement.

use crate::CliError;
use quench_core::stirap::FidelityCurve;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub const CSV_HEADER: &str = "omega_over_gamma,fidelity_initial,fidelity_target,leakage";

fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn curve_csv(curve: &FidelityCurve) -> String {
    let mut out = String::with_capacity(64 * (curve.samples.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &curve.samples {
        out.push_str(&sig(s.omega));
        out.push(',');
        out.push_str(&sig(s.fidelity_initial));
        out.push(',');
        out.push_str(&sig(s.fidelity_target));
        out.push(',');
        out.push_str(&sig(s.leakage));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct CurveColumns {
    omega_over_gamma: Vec<f64>,
    fidelity_initial: Vec<f64>,
    fidelity_target: Vec<f64>,
    leakage: Vec<f64>,
}

/// JSON mirror of the CSV columns.
pub fn curve_json(curve: &FidelityCurve) -> String {
    let columns = CurveColumns {
        omega_over_gamma: curve.samples.iter().map(|s| s.omega).collect(),
        fidelity_initial: curve.samples.iter().map(|s| s.fidelity_initial).collect(),
        fidelity_target: curve.samples.iter().map(|s| s.fidelity_target).collect(),
        leakage: curve.samples.iter().map(|s| s.leakage).collect(),
    };
    let mut doc = serde_json::to_string_pretty(&columns).expect("column serialization");
    doc.push('\n');
    doc
}

pub fn pattern_csv(flags: &[bool]) -> String {
    let mut out = String::from("site,occupied\n");
    for (i, &f) in flags.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", u8::from(f)));
    }
    out
}

pub fn json_doc<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut doc = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serialization failed: {e}")))?;
    doc.push('\n');
    Ok(doc)
}

/// Write via a temporary file in the destination directory and rename into
/// place, so readers never observe a partial artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Io(format!("cannot create temp file in {}: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("cannot move artifact into {}: {e}", path.display())))?;
    Ok(())
}
