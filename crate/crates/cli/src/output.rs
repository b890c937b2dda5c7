//! File plumbing: whole-buffer atomic writes and the CSV shapes.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use basinkernel::kernel::KernelValue;
use basinkernel::Complex64;
use serde::{Deserialize, Serialize};

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so a failed run never leaves a truncated output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// To `path` if given, else stdout.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Deserialize)]
struct PointRow {
    z_re: f64,
    z_im: f64,
    w_re: f64,
    w_im: f64,
}

pub fn read_point_pairs(path: &Path) -> Result<Vec<(Complex64, Complex64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    rdr.deserialize::<PointRow>()
        .enumerate()
        .map(|(i, row)| {
            let r = row.with_context(|| format!("{} row {}", path.display(), i + 1))?;
            Ok((
                Complex64::new(r.z_re, r.z_im),
                Complex64::new(r.w_re, r.w_im),
            ))
        })
        .collect()
}

#[derive(Serialize)]
pub struct KernelRow {
    z_re: f64,
    z_im: f64,
    w_re: f64,
    w_im: f64,
    #[serde(rename = "K_re")]
    k_re: f64,
    #[serde(rename = "K_im")]
    k_im: f64,
    factors_used: usize,
    tail_bound: f64,
    converged: bool,
}

impl KernelRow {
    pub fn new(z: Complex64, w: Complex64, k: &KernelValue) -> Self {
        Self {
            z_re: z.re,
            z_im: z.im,
            w_re: w.re,
            w_im: w.im,
            k_re: k.value.re,
            k_im: k.value.im,
            factors_used: k.factors_used,
            tail_bound: k.tail_bound,
            converged: k.converged,
        }
    }
}

pub fn kernel_csv(rows: impl IntoIterator<Item = KernelRow>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(w.into_inner()?)
}

#[derive(Serialize)]
struct ContinuityRow {
    k: usize,
    a_re: f64,
    a_im: f64,
    distance: f64,
}

pub fn continuity_csv(path: &[Complex64], distances: &[f64]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, (a, &distance)) in path.iter().zip(distances).enumerate() {
        w.serialize(ContinuityRow {
            k: i + 1,
            a_re: a.re,
            a_im: a.im,
            distance,
        })?;
    }
    Ok(w.into_inner()?)
}
