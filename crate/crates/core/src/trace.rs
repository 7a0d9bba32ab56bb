//! Solver configuration and per-iteration run records shared by CGM and EM.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cvec::CVec;
use crate::dictionary::Grid;
use crate::error::{Error, Result};
use crate::fcsolver::{DualPoint, InnerOptions, SupportSet};
use crate::measure::DiscreteMeasure;

/// Outer-loop configuration. Both algorithms must share one of these for
/// their traces to be comparable.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stopping tolerance: gradient norm for CGM, constraint violation for EM.
    pub eta: f64,
    pub max_iterations: usize,
    pub grid: Grid,
    /// Oracle accuracy parameter used only on the right-hand side of the rate bounds.
    pub lmo_epsilon: f64,
    pub inner: InnerOptions,
    /// Optional Frank-Wolfe gap stop (CGM) / violation-gap stop (EM); off by default.
    pub gap_tolerance: Option<f64>,
    pub seed: Option<u64>,
}

impl SolverConfig {
    pub fn new(grid: Grid, max_iterations: usize) -> Self {
        Self {
            eta: 0.0,
            max_iterations,
            grid,
            lmo_epsilon: 0.0,
            inner: InnerOptions::default(),
            gap_tolerance: None,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        if self.eta.is_nan() || self.eta < 0.0 {
            return Err(Error::Parameter(format!("eta must be nonnegative, got {}", self.eta)));
        }
        if !self.lmo_epsilon.is_finite() || self.lmo_epsilon < 0.0 {
            return Err(Error::Parameter("lmo_epsilon must be nonnegative".into()));
        }
        if self.inner.tol.is_nan() || self.inner.tol <= 0.0 || self.inner.max_iterations == 0 {
            return Err(Error::Parameter("inner solver tolerance and cap must be positive".into()));
        }
        Ok(())
    }

    /// Stable hash of every field that influences the iterates.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.grid.fingerprint().as_bytes());
        h.update(self.eta.to_bits().to_le_bytes());
        h.update((self.max_iterations as u64).to_le_bytes());
        h.update(self.lmo_epsilon.to_bits().to_le_bytes());
        h.update(self.inner.tol.to_bits().to_le_bytes());
        h.update((self.inner.max_iterations as u64).to_le_bytes());
        h.update([u8::from(self.inner.exact_finish)]);
        h.update(self.gap_tolerance.unwrap_or(-1.0).to_bits().to_le_bytes());
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Cgm,
    Em,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Cgm => "cgm",
            Algorithm::Em => "em",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ToleranceMet,
    MaxIterations,
    Stalled,
}

/// Dual quantities recorded by EM at iteration `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualRecord {
    pub lambda: CVec,
    pub alpha: f64,
    /// `v_EM^l`.
    pub value: f64,
    /// `max_t Re<lambda, Phi(t)>` over the grid.
    pub gauge: f64,
    /// `gauge - alpha`.
    pub violation: f64,
    pub kkt_residual: f64,
}

/// One iteration of either algorithm.
///
/// CGM record `l` describes `x^l` on `T^l` (record 0 is the initial zero
/// measure). EM record `l` describes `(lambda^l, alpha^l)` computed on
/// `T^{l-1}`; `support` is `T^l`, i.e. it includes `t_added`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub l: usize,
    pub t_added: Option<f64>,
    pub support: SupportSet,
    /// Primal measure of the restricted solve made in this iteration.
    pub measure: DiscreteMeasure,
    /// Restricted primal optimum (`v_CGM^l` for CGM).
    pub primal_value: f64,
    pub fitted: CVec,
    /// `|grad L(fitted - y)|_2`.
    pub gradient_norm: f64,
    /// CGM: Frank-Wolfe gap of `x^l` over the grid. EM: restricted primal minus restricted dual.
    pub gap: f64,
    pub dual: Option<DualRecord>,
    pub inner_iterations: usize,
    pub wall_time: Duration,
}

impl IterationRecord {
    pub fn dual_value(&self) -> Option<f64> {
        self.dual.as_ref().map(|d| d.value)
    }
}

/// Run-level facts needed to interpret and compare traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub r: f64,
    pub gamma: f64,
    pub tv_bound: f64,
    pub lmo_epsilon: f64,
    pub grid_size: usize,
    pub grid_spacing: f64,
    pub grid_fingerprint: String,
    pub config_fingerprint: String,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: Algorithm,
    pub records: Vec<IterationRecord>,
    pub final_measure: DiscreteMeasure,
    /// EM's returned `(lambda, alpha)`.
    pub final_dual: Option<DualPoint>,
    pub termination: Termination,
    pub metadata: TraceMetadata,
}

impl RunTrace {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("traces always hold at least one record")
    }

    pub fn record(&self, l: usize) -> Option<&IterationRecord> {
        self.records.iter().find(|r| r.l == l)
    }

    /// Number of atoms added during the run.
    pub fn atoms_added(&self) -> usize {
        self.records.iter().filter(|r| r.t_added.is_some()).count()
    }

    pub fn max_l(&self) -> usize {
        self.records.iter().map(|r| r.l).max().unwrap_or(0)
    }
}
