//! Exchange method on the dual semi-infinite program.
//!
//! Iteration `l` maximizes the dual restricted to the constraints in
//! `T^{l-1}`, then adds the grid point of maximal constraint violation. The
//! restricted dual is obtained from the restricted primal through the KKT
//! conditions; [`em_run_verified`] additionally re-derives every restricted
//! dual with the independent subgradient oracle.

use std::time::Instant;

use crate::cgm::{check_table, lmo_min, metadata, LmoResult};
use crate::cvec::CVec;
use crate::dictionary::AtomTable;
use crate::error::{Error, Result};
use crate::fcsolver::{
    recover_dual_columns, solve_restricted_columns, solve_restricted_dual_oracle_columns,
    OracleOptions, SupportSet,
};
use crate::loss::Loss;
use crate::measure::DiscreteMeasure;
use crate::problem::ProblemInstance;
use crate::trace::{
    Algorithm, DualRecord, IterationRecord, RunTrace, SolverConfig, Termination,
};

/// Grid maximizer of `Re<lambda, Phi(t)>`, defined as `lmo_min(-lambda)` with
/// the value negated so both scans share one tie-break.
pub fn lmo_max(table: &AtomTable, lambda: &CVec) -> LmoResult {
    let r = lmo_min(table, &lambda.neg());
    LmoResult {
        value: -r.value,
        ..r
    }
}

pub fn em_run(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    let table = AtomTable::new(problem.dict(), &config.grid)?;
    em_run_with_table(problem, config, &table, None)
}

/// EM that cross-checks every restricted dual against the subgradient oracle
/// and fails when they disagree by more than `1e-4 (1 + |v|)`.
pub fn em_run_verified(
    problem: &ProblemInstance,
    config: &SolverConfig,
    oracle: &OracleOptions,
) -> Result<RunTrace> {
    let table = AtomTable::new(problem.dict(), &config.grid)?;
    em_run_with_table(problem, config, &table, Some(oracle))
}

/// EM on a pre-sampled grid.
///
/// Runs at most `max_iterations` exchanges; the restricted dual on the final
/// support is always computed and recorded, so a run that exhausts its budget
/// holds `max_iterations + 1` records.
pub fn em_run_with_table(
    problem: &ProblemInstance,
    config: &SolverConfig,
    table: &AtomTable,
    oracle: Option<&OracleOptions>,
) -> Result<RunTrace> {
    check_table(problem, config, table)?;
    let loss = problem.loss();
    let y = problem.y();
    let tau = problem.tv_bound();

    let mut support = SupportSet::empty();
    let mut columns: Vec<CVec> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut records: Vec<IterationRecord> = Vec::new();

    let mut l = 1;
    let (termination, final_dual) = loop {
        let iter_start = Instant::now();
        let sol = solve_restricted_columns(&columns, y, loss, tau, &config.inner, Some(&weights))?;
        if !sol.converged {
            return Err(Error::NotConverged {
                iteration: l,
                inner_iterations: sol.inner_iterations,
                mapping_norm: sol.mapping_norm,
            });
        }
        let dual = recover_dual_columns(&sol, &columns, y, loss, tau)?;
        if let Some(opts) = oracle {
            let check = solve_restricted_dual_oracle_columns(&columns, y, loss, tau, opts);
            if (check.value - dual.value).abs() > 1e-4 * (1.0 + dual.value.abs()) {
                return Err(Error::Numerical(format!(
                    "iteration {l}: KKT-recovered dual value {} disagrees with oracle value {}",
                    dual.value, check.value
                )));
            }
        }
        let scan = lmo_max(table, &dual.lambda);
        let violation = scan.value - dual.alpha;
        let measure = DiscreteMeasure::from_parts(support.locations(), &sol.weights)?;
        let residual = sol.fitted.sub(y);

        let stop = if violation <= config.eta
            || config.gap_tolerance.is_some_and(|tol| tau * violation <= tol)
        {
            Some(Termination::ToleranceMet)
        } else if l > config.max_iterations {
            Some(Termination::MaxIterations)
        } else if support.contains(scan.t) {
            Some(Termination::Stalled)
        } else {
            None
        };

        let t_added = match stop {
            Some(_) => None,
            None => {
                let i = support.insert(scan.t).expect("checked above");
                columns.insert(i, CVec::from_vec_unchecked(table.row(scan.index).to_vec()));
                Some(i)
            }
        };
        // warm start for the next restricted solve: previous weights, 0 for the new atom
        weights = sol.weights;
        if let Some(i) = t_added {
            weights.insert(i, 0.0);
        }

        records.push(IterationRecord {
            l,
            t_added: t_added.map(|_| scan.t),
            support: support.clone(),
            measure,
            primal_value: sol.value,
            fitted: sol.fitted,
            gradient_norm: loss.gradient(&residual).norm(),
            gap: sol.value - dual.value,
            dual: Some(DualRecord {
                lambda: dual.lambda.clone(),
                alpha: dual.alpha,
                value: dual.value,
                gauge: scan.value,
                violation,
                kkt_residual: dual.kkt_residual,
            }),
            inner_iterations: sol.inner_iterations,
            wall_time: iter_start.elapsed(),
        });

        if let Some(reason) = stop {
            break (reason, dual);
        }
        l += 1;
    };

    let final_measure = records.last().expect("nonempty").measure.clone();
    let notes = vec![
        format!(
            "constraint violation maximized over the same {}-point grid used for the exchange step",
            config.grid.len()
        ),
        "restricted duals recovered from the restricted primal via KKT conditions".into(),
    ];
    Ok(RunTrace {
        algorithm: Algorithm::Em,
        records,
        final_measure,
        final_dual: Some(final_dual),
        termination,
        metadata: metadata(problem, config, notes)?,
    })
}
