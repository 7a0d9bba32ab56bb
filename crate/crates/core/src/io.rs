//! On-disk formats: per-iteration CSV traces and the JSON run summary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    alpha_rate_bound, lambda_rate_bound, value_rate_bound, BoundCertificate, EquivalenceReport,
    ReferenceOptima,
};
use crate::error::{Error, Result};
use crate::trace::{Algorithm, RunTrace, Termination};

/// Column order of every trace CSV.
pub const TRACE_COLUMNS: [&str; 18] = [
    "iter",
    "t_added",
    "primal_value",
    "dual_value",
    "gap",
    "alpha",
    "gradient_norm",
    "violation",
    "wasserstein",
    "bound13_rhs",
    "bound14_rhs",
    "bound15_lhs",
    "bound15_rhs",
    "bound16_lhs",
    "bound16_rhs",
    "bound17_lhs",
    "bound17_rhs",
    "wall_ms",
];

/// One CSV row. Columns that do not apply to an algorithm are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub t_added: Option<f64>,
    pub primal_value: f64,
    pub dual_value: Option<f64>,
    pub gap: f64,
    pub alpha: Option<f64>,
    pub gradient_norm: f64,
    pub violation: Option<f64>,
    pub wasserstein: Option<f64>,
    pub bound13_rhs: Option<f64>,
    pub bound14_rhs: Option<f64>,
    pub bound15_lhs: Option<f64>,
    pub bound15_rhs: Option<f64>,
    pub bound16_lhs: Option<f64>,
    pub bound16_rhs: Option<f64>,
    pub bound17_lhs: Option<f64>,
    pub bound17_rhs: Option<f64>,
    pub wall_ms: Option<f64>,
}

/// Flattens a trace into CSV rows. `wasserstein[i]` belongs to `trace.records[i]`.
/// Bound columns are filled only when reference optima are available.
pub fn trace_rows(
    trace: &RunTrace,
    wasserstein: Option<&[f64]>,
    refs: Option<&ReferenceOptima>,
    record_timing: bool,
) -> Vec<TraceRow> {
    let meta = &trace.metadata;
    let (gamma, r, eps) = (meta.gamma, meta.r, meta.lmo_epsilon);
    trace
        .records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let l = rec.l;
            let certified = l >= 1 && refs.is_some();
            let dual = rec.dual.as_ref();
            let em_bound = |f: &dyn Fn() -> f64| match (trace.algorithm, certified, dual) {
                (Algorithm::Em, true, Some(_)) => Some(f()),
                _ => None,
            };
            TraceRow {
                iter: l,
                t_added: rec.t_added,
                primal_value: rec.primal_value,
                dual_value: dual.map(|d| d.value),
                gap: rec.gap,
                alpha: dual.map(|d| d.alpha),
                gradient_norm: rec.gradient_norm,
                violation: dual.map(|d| d.violation),
                wasserstein: wasserstein.and_then(|w| w.get(i).copied()),
                bound13_rhs: (trace.algorithm == Algorithm::Cgm && certified)
                    .then(|| value_rate_bound(l, gamma, r, eps)),
                bound14_rhs: em_bound(&|| value_rate_bound(l, gamma, r, eps)),
                bound15_lhs: em_bound(&|| {
                    dual.expect("em")
                        .lambda
                        .sub(&refs.expect("certified").lambda_d)
                        .norm()
                }),
                bound15_rhs: em_bound(&|| lambda_rate_bound(l, gamma, r, eps)),
                bound16_lhs: em_bound(&|| (dual.expect("em").alpha - refs.expect("certified").alpha_d).abs()),
                bound16_rhs: em_bound(&|| alpha_rate_bound(l, gamma, r, eps)),
                bound17_lhs: em_bound(&|| dual.expect("em").gauge),
                bound17_rhs: em_bound(&|| refs.expect("certified").alpha_d + alpha_rate_bound(l, gamma, r, eps)),
                wall_ms: record_timing.then_some(rec.wall_time.as_secs_f64() * 1e3),
            }
        })
        .collect()
}

pub fn write_trace_csv<W: std::io::Write>(writer: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

pub fn trace_csv_string(rows: &[TraceRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

/// Parses a trace CSV, requiring the exact column header.
pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().ne(TRACE_COLUMNS.iter().copied()) {
        return Err(Error::Format(format!(
            "unexpected trace header: {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        let row: TraceRow = row?;
        let finite = [row.primal_value, row.gap, row.gradient_norm]
            .into_iter()
            .chain(row.t_added)
            .chain(row.dual_value);
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(format!("row {} holds non-finite values", row.iter)));
        }
        if rows.last().is_some_and(|prev: &TraceRow| prev.iter >= row.iter) {
            return Err(Error::Format(format!("iteration {} out of order", row.iter)));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn trace_file_name(algorithm: Algorithm, grid_size: usize) -> String {
    format!("trace_{}_{}.csv", algorithm.as_str(), grid_size)
}

/// Per-algorithm outcome stored in the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub iterations: usize,
    pub atoms_added: usize,
    pub termination: Termination,
    pub final_value: f64,
    pub final_mass: f64,
    pub final_wasserstein: Option<f64>,
    pub wall_ms: f64,
}

/// Everything recorded for one grid size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub grid_size: usize,
    pub grid_spacing: f64,
    pub r: f64,
    pub gamma: f64,
    pub lmo_epsilon: f64,
    pub tv_bound: f64,
    pub config_fingerprint: String,
    pub reference: ReferenceOptima,
    pub equivalence: EquivalenceReport,
    pub strong_duality_gap: f64,
    pub strong_duality_ok: bool,
    pub certificates_ok: bool,
    pub sparsity_ok: bool,
    pub cgm: AlgorithmSummary,
    pub em: AlgorithmSummary,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format_version: u32,
    pub created_unix_ms: u128,
    pub dictionary: String,
    pub m: usize,
    pub noise_model: String,
    pub rng: String,
    pub seed: Option<u64>,
    pub iterations: usize,
    pub runs: Vec<GridSummary>,
    pub passed: bool,
}

pub fn parse_summary_json(text: &str) -> Result<Summary> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCertificates {
    pub grid_size: usize,
    pub certificates: Vec<BoundCertificate>,
}

pub fn parse_certificates_json(text: &str) -> Result<Vec<GridCertificates>> {
    Ok(serde_json::from_str(text)?)
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn ensure_dir(path: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path.to_path_buf())
}
