//! Fully-corrective conditional gradient over measures.
//!
//! Each iteration adds the grid point whose atom is least correlated with
//! the loss gradient at the current residual, then re-solves the restricted
//! primal over the whole support found so far.

use std::time::Instant;

use crate::cvec::CVec;
use crate::dictionary::{AtomDictionary, AtomTable, Grid};
use crate::error::{Error, Result};
use crate::fcsolver::{solve_restricted_columns, SupportSet};
use crate::loss::Loss;
use crate::measure::DiscreteMeasure;
use crate::problem::ProblemInstance;
use crate::trace::{Algorithm, IterationRecord, RunTrace, SolverConfig, Termination, TraceMetadata};

/// Relative width of the tie band in the grid scan.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Required objective decrease when the oracle returns an atom already in the support.
pub const STALL_DECREASE: f64 = 1e-12;

/// Result of a grid linear-minimization scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmoResult {
    pub index: usize,
    pub t: f64,
    pub value: f64,
}

/// Grid minimizer of `Re<Phi(t), g>`. Among points within
/// `TIE_TOLERANCE * (1 + |min|)` of the minimum the smallest `t` wins, so the
/// answer does not depend on how the parallel scan is partitioned.
pub fn lmo_min(table: &AtomTable, g: &CVec) -> LmoResult {
    let values = table.correlations(g);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let band = min + TIE_TOLERANCE * (1.0 + min.abs());
    let index = values
        .iter()
        .position(|&v| v <= band)
        .expect("grids are nonempty");
    LmoResult {
        index,
        t: table.grid().points()[index],
        value: values[index],
    }
}

/// [`lmo_min`] without a precomputed table.
pub fn lmo_min_scan(dict: &AtomDictionary, grid: &Grid, g: &CVec) -> Result<LmoResult> {
    Ok(lmo_min(&AtomTable::new(dict, grid)?, g))
}

pub(crate) fn metadata(
    problem: &ProblemInstance,
    config: &SolverConfig,
    notes: Vec<String>,
) -> Result<TraceMetadata> {
    Ok(TraceMetadata {
        r: problem.dict().radius(&config.grid)?,
        gamma: problem.loss().gamma(),
        tv_bound: problem.tv_bound(),
        lmo_epsilon: config.lmo_epsilon,
        grid_size: config.grid.len(),
        grid_spacing: config.grid.spacing(),
        grid_fingerprint: config.grid.fingerprint(),
        config_fingerprint: config.fingerprint(),
        seed: config.seed,
        notes,
    })
}

pub(crate) fn check_table(problem: &ProblemInstance, config: &SolverConfig, table: &AtomTable) -> Result<()> {
    config.validate()?;
    if table.grid() != &config.grid {
        return Err(Error::Parameter("atom table was sampled on a different grid".into()));
    }
    if table.m() != problem.y().len() {
        return Err(Error::Dimension {
            expected: problem.y().len(),
            found: table.m(),
        });
    }
    Ok(())
}

pub fn cgm_run(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    let table = AtomTable::new(problem.dict(), &config.grid)?;
    cgm_run_with_table(problem, config, &table)
}

/// CGM on a pre-sampled grid.
pub fn cgm_run_with_table(
    problem: &ProblemInstance,
    config: &SolverConfig,
    table: &AtomTable,
) -> Result<RunTrace> {
    check_table(problem, config, table)?;
    let loss = problem.loss();
    let y = problem.y();
    let tau = problem.tv_bound();
    let m = y.len();

    let mut support = SupportSet::empty();
    let mut columns: Vec<CVec> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();

    let started = Instant::now();
    let mut fitted = CVec::zeros(m);
    let mut value = loss.value(&y.neg());
    let mut grad = loss.gradient(&y.neg());
    let mut lmo = lmo_min(table, &grad);
    let mut records = vec![IterationRecord {
        l: 0,
        t_added: None,
        support: support.clone(),
        measure: DiscreteMeasure::empty(),
        primal_value: value,
        fitted: fitted.clone(),
        gradient_norm: grad.norm(),
        gap: frank_wolfe_gap(&fitted, &grad, lmo.value, tau),
        dual: None,
        inner_iterations: 0,
        wall_time: started.elapsed(),
    }];

    let mut l = 1;
    let termination = loop {
        let current = records.last().expect("nonempty");
        if current.gradient_norm <= config.eta {
            break Termination::ToleranceMet;
        }
        if config.gap_tolerance.is_some_and(|tol| current.gap <= tol) {
            break Termination::ToleranceMet;
        }
        if l > config.max_iterations {
            break Termination::MaxIterations;
        }

        let iter_start = Instant::now();
        let chosen = lmo;
        let repeated = match support.insert(chosen.t) {
            Some(i) => {
                columns.insert(i, CVec::from_vec_unchecked(table.row(chosen.index).to_vec()));
                weights.insert(i, 0.0);
                false
            }
            None => true,
        };
        let sol = solve_restricted_columns(&columns, y, loss, tau, &config.inner, Some(&weights))?;
        if !sol.converged {
            return Err(Error::NotConverged {
                iteration: l,
                inner_iterations: sol.inner_iterations,
                mapping_norm: sol.mapping_norm,
            });
        }
        if repeated && sol.value >= value - STALL_DECREASE {
            break Termination::Stalled;
        }

        weights = sol.weights;
        value = sol.value;
        fitted = sol.fitted;
        grad = loss.gradient(&fitted.sub(y));
        lmo = lmo_min(table, &grad);
        records.push(IterationRecord {
            l,
            t_added: Some(chosen.t),
            support: support.clone(),
            measure: DiscreteMeasure::from_parts(support.locations(), &weights)?,
            primal_value: value,
            fitted: fitted.clone(),
            gradient_norm: grad.norm(),
            gap: frank_wolfe_gap(&fitted, &grad, lmo.value, tau),
            dual: None,
            inner_iterations: sol.inner_iterations,
            wall_time: iter_start.elapsed(),
        });
        l += 1;
    };

    let final_measure = records.last().expect("nonempty").measure.clone();
    Ok(RunTrace {
        algorithm: Algorithm::Cgm,
        records,
        final_measure,
        final_dual: None,
        termination,
        metadata: metadata(problem, config, cgm_notes(config))?,
    })
}

/// `<x - s, grad>` with `s = tau delta_t*` when the scan minimum is negative, else `s = 0`.
fn frank_wolfe_gap(fitted: &CVec, grad: &CVec, lmo_value: f64, tau: f64) -> f64 {
    fitted.re_dot(grad) - tau * lmo_value.min(0.0)
}

fn cgm_notes(config: &SolverConfig) -> Vec<String> {
    vec![
        format!(
            "linear minimization solved exactly on a {}-point grid (spacing {:e}); lmo_epsilon {} enters only the bound right-hand sides",
            config.grid.len(),
            config.grid.spacing(),
            config.lmo_epsilon
        ),
        "radius r is exact for trigonometric atoms and a grid maximum otherwise".into(),
    ]
}
