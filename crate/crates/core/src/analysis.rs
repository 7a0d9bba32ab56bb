//! Recovery metrics and numerical certificates for CGM/EM runs.

use serde::{Deserialize, Serialize};

use crate::cgm::cgm_run_with_table;
use crate::cvec::CVec;
use crate::dictionary::{AtomDictionary, AtomTable, Grid};
use crate::em::{em_run_with_table, lmo_max};
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, ParameterDomain};
use crate::problem::ProblemInstance;
use crate::trace::{Algorithm, RunTrace, SolverConfig};

/// Slack allowed when comparing a measured quantity to its bound.
pub const CERTIFICATE_SLACK: f64 = 1e-9;

/// Relative tolerance of the strong-duality certificate.
pub const STRONG_DUALITY_TOLERANCE: f64 = 1e-6;

/// `int_lo^hi |F_1(t) - F_2(t)| dt` with `F_i` the cumulative weight functions.
/// Equals the 1-Wasserstein distance when both measures have the same mass.
pub fn wasserstein1(x1: &DiscreteMeasure, x2: &DiscreteMeasure, domain: &ParameterDomain) -> Result<f64> {
    for (name, x) in [("first", x1), ("second", x2)] {
        x.check_domain(domain)
            .map_err(|e| Error::Parameter(format!("{name} measure not on the given domain: {e}")))?;
    }
    let mut events: Vec<(f64, f64)> = x1
        .atoms()
        .iter()
        .map(|a| (a.t, a.a))
        .chain(x2.atoms().iter().map(|a| (a.t, -a.a)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut diff = 0.0f64;
    let mut prev = domain.lo;
    for (t, delta) in events {
        total += diff.abs() * (t - prev);
        diff += delta;
        prev = t;
    }
    total += diff.abs() * (domain.hi - prev);
    Ok(total)
}

/// Distance plus the mass mismatch it silently absorbs when masses differ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WassersteinReport {
    pub distance: f64,
    pub mass_difference: f64,
}

pub fn wasserstein_report(
    estimate: &DiscreteMeasure,
    truth: &DiscreteMeasure,
    domain: &ParameterDomain,
) -> Result<WassersteinReport> {
    Ok(WassersteinReport {
        distance: wasserstein1(estimate, truth, domain)?,
        mass_difference: (estimate.tv_mass() - truth.tv_mass()).abs(),
    })
}

/// Support function of the atom hull at `lambda`, `max_t Re<lambda, Phi(t)>` over the grid.
pub fn gauge_value(table: &AtomTable, lambda: &CVec) -> f64 {
    lmo_max(table, lambda).value
}

/// `max_t Re<lambda, Phi(t)> - alpha`; negative means strictly feasible.
pub fn feasibility_violation(table: &AtomTable, lambda: &CVec, alpha: f64) -> f64 {
    gauge_value(table, lambda) - alpha
}

pub fn feasibility_violation_scan(
    dict: &AtomDictionary,
    grid: &Grid,
    lambda: &CVec,
    alpha: f64,
) -> Result<f64> {
    Ok(feasibility_violation(&AtomTable::new(dict, grid)?, lambda, alpha))
}

/// `4 gamma r^2 (1 + eps) / (l + 2)`: primal gap of CGM and dual gap of EM.
pub fn value_rate_bound(l: usize, gamma: f64, r: f64, eps: f64) -> f64 {
    4.0 * gamma * r * r * (1.0 + eps) / (l as f64 + 2.0)
}

/// `sqrt(8 gamma^2 r^2 (1 + eps) / (l + 2))`: distance of `lambda^l` to `lambda_d`.
pub fn lambda_rate_bound(l: usize, gamma: f64, r: f64, eps: f64) -> f64 {
    (8.0 * gamma * gamma * r * r * (1.0 + eps) / (l as f64 + 2.0)).sqrt()
}

/// `sqrt(8 gamma^2 r^4 (1 + eps) / (l + 2))`: distance of `alpha^l` to `alpha_d`,
/// and the infeasibility allowance of `lambda^l`.
pub fn alpha_rate_bound(l: usize, gamma: f64, r: f64, eps: f64) -> f64 {
    (8.0 * gamma * gamma * r.powi(4) * (1.0 + eps) / (l as f64 + 2.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    PrimalRate,
    DualRate,
    LambdaDistance,
    AlphaDistance,
    Feasibility,
    StrongDuality,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub l: usize,
    pub kind: BoundKind,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl BoundCertificate {
    pub fn new(l: usize, kind: BoundKind, lhs: f64, rhs: f64) -> Self {
        Self {
            l,
            kind,
            lhs,
            rhs,
            satisfied: lhs <= rhs + CERTIFICATE_SLACK,
        }
    }
}

/// Optimal values and dual maximizer estimated by long reference runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptima {
    pub v_p: f64,
    pub v_d: f64,
    pub lambda_d: CVec,
    pub alpha_d: f64,
    /// Iteration budget given to the reference runs.
    pub iteration_budget: usize,
    pub cgm_iterations: usize,
    pub em_iterations: usize,
}

/// Reference budget for traces of length `l_max`: `max(500, 20 l_max)`.
pub fn reference_budget(l_max: usize) -> usize {
    500.max(20 * l_max)
}

/// Runs CGM and EM with [`reference_budget`] iterations on the configured grid.
/// CGM stops on a Frank-Wolfe gap of `1e-12 (1 + |v|)`, EM on the matching
/// violation test, unless the budget runs out first.
pub fn reference_optima(
    problem: &ProblemInstance,
    config: &SolverConfig,
    table: &AtomTable,
    l_max: usize,
) -> Result<ReferenceOptima> {
    let budget = reference_budget(l_max);
    let mut cfg = config.clone();
    cfg.max_iterations = budget;
    cfg.eta = 0.0;
    let v0 = problem.loss_at_zero();
    cfg.gap_tolerance = Some(1e-12 * (1.0 + v0.abs()));
    let cgm = cgm_run_with_table(problem, &cfg, table)?;
    let em = em_run_with_table(problem, &cfg, table, None)?;
    let last_em = em.last();
    let dual = last_em
        .dual
        .as_ref()
        .ok_or_else(|| Error::Numerical("EM record without dual data".into()))?;
    Ok(ReferenceOptima {
        v_p: cgm.last().primal_value,
        v_d: dual.value,
        lambda_d: dual.lambda.clone(),
        alpha_d: dual.alpha,
        iteration_budget: budget,
        cgm_iterations: cgm.max_l(),
        em_iterations: em.max_l(),
    })
}

/// One certificate per recorded iteration per bound family, plus a single
/// strong-duality certificate.
pub fn certify_bounds(
    cgm: &RunTrace,
    em: &RunTrace,
    refs: Option<&ReferenceOptima>,
    gamma: f64,
    r: f64,
    eps: f64,
) -> Result<Vec<BoundCertificate>> {
    let refs = refs.ok_or_else(|| Error::Refused("certificates need reference optima".into()))?;
    if cgm.algorithm != Algorithm::Cgm || em.algorithm != Algorithm::Em {
        return Err(Error::Refused("expected one CGM and one EM trace".into()));
    }
    let longest = cgm.max_l().max(em.max_l());
    if refs.iteration_budget < 10 * longest {
        return Err(Error::Refused(format!(
            "reference budget {} is below 10x the trace length {longest}",
            refs.iteration_budget
        )));
    }
    if !(refs.v_p.is_finite() && refs.v_d.is_finite() && refs.alpha_d.is_finite()) {
        return Err(Error::Refused("reference optima are not finite".into()));
    }

    let mut out = Vec::new();
    for rec in cgm.records.iter().filter(|r| r.l >= 1) {
        out.push(BoundCertificate::new(
            rec.l,
            BoundKind::PrimalRate,
            rec.primal_value - refs.v_p,
            value_rate_bound(rec.l, gamma, r, eps),
        ));
    }
    for rec in em.records.iter().filter(|r| r.l >= 1) {
        let dual = rec
            .dual
            .as_ref()
            .ok_or_else(|| Error::Refused(format!("EM record {} lacks dual data", rec.l)))?;
        let iterate_bound = alpha_rate_bound(rec.l, gamma, r, eps);
        out.push(BoundCertificate::new(
            rec.l,
            BoundKind::DualRate,
            dual.value - refs.v_d,
            value_rate_bound(rec.l, gamma, r, eps),
        ));
        out.push(BoundCertificate::new(
            rec.l,
            BoundKind::LambdaDistance,
            dual.lambda.sub(&refs.lambda_d).norm(),
            lambda_rate_bound(rec.l, gamma, r, eps),
        ));
        out.push(BoundCertificate::new(
            rec.l,
            BoundKind::AlphaDistance,
            (dual.alpha - refs.alpha_d).abs(),
            iterate_bound,
        ));
        out.push(BoundCertificate::new(
            rec.l,
            BoundKind::Feasibility,
            dual.gauge,
            refs.alpha_d + iterate_bound,
        ));
    }
    out.push(strong_duality_certificate(refs.v_p, refs.v_d));
    Ok(out)
}

/// `|v_p - v_d| <= 1e-6 (1 + |v_p|)`.
pub fn strong_duality_certificate(v_p: f64, v_d: f64) -> BoundCertificate {
    let lhs = (v_p - v_d).abs();
    let rhs = STRONG_DUALITY_TOLERANCE * (1.0 + v_p.abs());
    BoundCertificate {
        l: 0,
        kind: BoundKind::StrongDuality,
        lhs,
        rhs,
        satisfied: lhs <= rhs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub iterations_compared: usize,
    /// `T_CGM^l == T_EM^l` for every common `l >= 1`.
    pub supports_match: bool,
    /// Largest Hausdorff distance between paired supports.
    pub max_support_discrepancy: f64,
    /// Largest `|v_CGM^l - v_EM^{l+1}| / (1 + |v_CGM^l|)`.
    pub max_value_discrepancy: f64,
    pub values_match: bool,
    pub first_support_mismatch: Option<usize>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.supports_match && self.values_match
    }
}

fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let directed = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => directed(a, b).max(directed(b, a)),
    }
}

/// Compares supports `T^l` index by index and values under the one-step shift
/// `v_CGM^l` vs `v_EM^{l+1}`. Refuses traces produced with different grids or configs.
pub fn equivalence_check(cgm: &RunTrace, em: &RunTrace, tol: f64) -> Result<EquivalenceReport> {
    if cgm.algorithm != Algorithm::Cgm || em.algorithm != Algorithm::Em {
        return Err(Error::Refused("expected one CGM and one EM trace".into()));
    }
    if cgm.metadata.grid_fingerprint != em.metadata.grid_fingerprint {
        return Err(Error::Refused("traces were produced on different grids".into()));
    }
    if cgm.metadata.config_fingerprint != em.metadata.config_fingerprint {
        return Err(Error::Refused("traces were produced with different solver configs".into()));
    }

    let mut compared = 0;
    let mut supports_match = true;
    let mut first_support_mismatch = None;
    let mut max_support_discrepancy: f64 = 0.0;
    for rec in cgm.records.iter().filter(|r| r.l >= 1) {
        let Some(other) = em.record(rec.l).filter(|o| o.t_added.is_some()) else {
            continue;
        };
        compared += 1;
        if rec.support != other.support {
            supports_match = false;
            first_support_mismatch.get_or_insert(rec.l);
        }
        max_support_discrepancy = max_support_discrepancy
            .max(hausdorff(rec.support.locations(), other.support.locations()));
    }

    let mut max_value_discrepancy: f64 = 0.0;
    for rec in &cgm.records {
        if let Some(dual) = em.record(rec.l + 1).and_then(|o| o.dual_value()) {
            let d = (rec.primal_value - dual).abs() / (1.0 + rec.primal_value.abs());
            max_value_discrepancy = max_value_discrepancy.max(d);
        }
    }

    Ok(EquivalenceReport {
        iterations_compared: compared,
        supports_match,
        max_support_discrepancy,
        max_value_discrepancy,
        values_match: max_value_discrepancy <= tol,
        first_support_mismatch,
    })
}

/// Whether every iterate of the trace has at most `m` weights above `1e-6`.
pub fn sparsity_within(trace: &RunTrace, m: usize) -> bool {
    trace
        .records
        .iter()
        .all(|r| r.measure.atoms().iter().filter(|a| a.a > 1e-6).count() <= m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;

    fn unit() -> ParameterDomain {
        ParameterDomain::closed(0.0, 1.0).unwrap()
    }

    #[test]
    fn wasserstein_examples() {
        let d = unit();
        let a = DiscreteMeasure::dirac(0.2).unwrap();
        let b = DiscreteMeasure::dirac(0.5).unwrap();
        assert!((wasserstein1(&a, &b, &d).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(wasserstein1(&a, &a, &d).unwrap(), 0.0);

        let split = DiscreteMeasure::new(vec![Atom { t: 0.0, a: 0.5 }, Atom { t: 1.0, a: 0.5 }]).unwrap();
        assert!((wasserstein1(&split, &b, &d).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_unequal_mass_and_domain_errors() {
        let d = unit();
        let x = DiscreteMeasure::new(vec![Atom { t: 0.4, a: 0.5 }]).unwrap();
        let y = DiscreteMeasure::dirac(0.4).unwrap();
        // CDF difference 0.5 on [0.4, 1]
        let rep = wasserstein_report(&x, &y, &d).unwrap();
        assert!((rep.distance - 0.3).abs() < 1e-15);
        assert!((rep.mass_difference - 0.5).abs() < 1e-15);

        let outside = DiscreteMeasure::dirac(1.5).unwrap();
        assert!(matches!(wasserstein1(&outside, &y, &d), Err(Error::Parameter(_))));
    }

    #[test]
    fn rate_bound_values() {
        assert!((value_rate_bound(1, 1.0, 33f64.sqrt(), 0.0) - 44.0).abs() < 1e-12);
        assert!((alpha_rate_bound(2, 1.0, 1.0, 0.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((lambda_rate_bound(6, 1.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn feasibility_examples() {
        let tab = AtomDictionary::tabulated_indexed(vec![
            CVec::from_real(&[1.0, 0.0]).unwrap(),
            CVec::from_real(&[0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let table = AtomTable::new(&tab, &tab.uniform_grid(0).unwrap()).unwrap();
        assert_eq!(feasibility_violation(&table, &CVec::zeros(2), 0.0), 0.0);
        assert_eq!(feasibility_violation(&table, &CVec::zeros(2), 1.0), -1.0);
        let lambda = CVec::from_real(&[0.5, 0.5]).unwrap();
        assert_eq!(feasibility_violation(&table, &lambda, 0.5), 0.0);
    }

    #[test]
    fn certificate_slack() {
        assert!(BoundCertificate::new(1, BoundKind::PrimalRate, 1.0 + 5e-10, 1.0).satisfied);
        assert!(!BoundCertificate::new(1, BoundKind::PrimalRate, 1.0 + 2e-9, 1.0).satisfied);
        assert!(strong_duality_certificate(1.0, 1.0 + 1e-6).satisfied);
        assert!(!strong_duality_certificate(1.0, 1.0 + 3e-6).satisfied);
    }

    #[test]
    fn hausdorff_cases() {
        assert_eq!(hausdorff(&[], &[]), 0.0);
        assert_eq!(hausdorff(&[0.1], &[]), f64::INFINITY);
        assert!((hausdorff(&[0.1, 0.5], &[0.1, 0.45]) - 0.05).abs() < 1e-15);
    }
}
