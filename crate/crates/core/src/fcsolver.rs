//! Finite-dimensional subproblems shared by both outer algorithms.
//!
//! Over a fixed finite support `T` the primal becomes
//!
//! ```text
//! min_a  L(sum_i a_i Phi(t_i) - y)   s.t.  a >= 0, sum_i a_i <= tau
//! ```
//!
//! and its dual is the finitely constrained
//!
//! ```text
//! max_{lambda, alpha}  Re<lambda, y> - L_o(-lambda) - tau alpha
//! s.t.  Re<lambda, Phi(t)> <= alpha  for t in T,   alpha >= 0.
//! ```
//!
//! The primal is solved exactly by an active-set method when the loss is
//! quadratic, with accelerated projected gradient as the general path and
//! fallback; both are accepted only through the projected-gradient mapping
//! test. The dual is recovered from it through the KKT conditions. A slow
//! but independent subgradient ascent on the dual is kept as a cross-check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cvec::{re_dot, CVec};
use crate::dictionary::AtomDictionary;
use crate::error::{Error, Result};
use crate::loss::{Loss, LossModel};

/// Weights more negative than this after projection indicate a solver bug.
const NEGATIVE_WEIGHT_FLOOR: f64 = -1e-12;

/// Sorted, duplicate-free finite support.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SupportSet {
    locations: Vec<f64>,
}

impl SupportSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut locations: Vec<f64>) -> Result<Self> {
        if locations.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("support locations must be finite".into()));
        }
        locations.sort_by(f64::total_cmp);
        if locations.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter("support locations must be distinct".into()));
        }
        Ok(Self { locations })
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.position(t).is_some()
    }

    pub fn position(&self, t: f64) -> Option<usize> {
        self.locations.binary_search_by(|p| p.total_cmp(&t)).ok()
    }

    /// Inserts `t`, returning its index, or `None` when already present.
    pub fn insert(&mut self, t: f64) -> Option<usize> {
        match self.locations.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(_) => None,
            Err(i) => {
                self.locations.insert(i, t);
                Some(i)
            }
        }
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.locations.iter().all(|&t| other.contains(t))
    }
}

/// Stopping controls of the accelerated projected gradient solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    /// Threshold on the norm of the projected-gradient mapping.
    pub tol: f64,
    pub max_iterations: usize,
    /// Try an exact active-set solve first when the loss is quadratic.
    pub exact_finish: bool,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 10_000,
            exact_finish: true,
        }
    }
}

/// Minimizer of the restricted primal over a fixed support.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedSolution {
    /// Aligned with the support, all nonnegative.
    pub weights: Vec<f64>,
    pub value: f64,
    /// `sum_i a_i Phi(t_i)`.
    pub fitted: CVec,
    pub converged: bool,
    pub inner_iterations: usize,
    pub mapping_norm: f64,
}

/// Dual pair `(lambda, alpha)` and the dual objective at it.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub lambda: CVec,
    pub alpha: f64,
    pub value: f64,
    /// `|Re<fitted, lambda> - tau alpha|` when recovered from a primal solution.
    pub kkt_residual: f64,
}

/// Euclidean projection onto `{a >= 0, sum a <= tau}`.
pub fn project_capped_simplex(a: &[f64], tau: f64) -> Vec<f64> {
    let clamped: Vec<f64> = a.iter().map(|&v| v.max(0.0)).collect();
    if clamped.iter().sum::<f64>() <= tau {
        return clamped;
    }
    // Onto the face sum = tau: a_i - theta clipped at zero.
    let mut u = clamped;
    u.sort_by(|x, y| y.total_cmp(x));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - tau) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    a.iter().map(|&v| (v - theta).max(0.0)).collect()
}

fn synthesize_columns(columns: &[CVec], weights: &[f64], m: usize) -> CVec {
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (col, &w) in columns.iter().zip(weights) {
        if w != 0.0 {
            for (o, c) in out.iter_mut().zip(col.entries()) {
                *o += c * w;
            }
        }
    }
    CVec::from_vec_unchecked(out)
}

fn correlate_columns(columns: &[CVec], g: &CVec, out: &mut [f64]) {
    for (o, col) in out.iter_mut().zip(columns) {
        *o = re_dot(col.entries(), g.entries());
    }
}

/// Largest eigenvalue of `Re(A^H A)` by power iteration.
fn gram_spectral_norm(columns: &[CVec], m: usize) -> f64 {
    let n = columns.len();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin()).collect();
    let mut norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut estimate = 0.0;
    let mut w = vec![0.0; n];
    for _ in 0..500 {
        let av = synthesize_columns(columns, &v, m);
        correlate_columns(columns, &av, &mut w);
        norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / norm);
        if (next - estimate).abs() <= 1e-12 * next {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Normal equations `Re(A^H A) a = Re(A^H y)` of a quadratic loss. An exact
/// active-set solve on them is tried before APG; the loss scale does not move
/// the minimizer, so it is dropped.
struct QuadraticFace {
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl QuadraticFace {
    fn new(columns: &[CVec], y: &CVec, loss: &LossModel) -> Option<Self> {
        match loss {
            LossModel::ScaledQuadratic { .. } => {}
        }
        let n = columns.len();
        let gram = DMatrix::from_fn(n, n, |i, j| re_dot(columns[i].entries(), columns[j].entries()));
        let rhs = DVector::from_fn(n, |i, _| re_dot(columns[i].entries(), y.entries()));
        Some(Self { gram, rhs })
    }

    /// Exact minimizer by a primal active-set method started from the zero
    /// measure: the working set holds the coordinates fixed at zero and,
    /// optionally, the mass cap. `None` when the pivot budget runs out; the
    /// caller still checks the projected-gradient mapping before accepting.
    fn solve(&self, tau: f64) -> Option<Vec<f64>> {
        let n = self.rhs.len();
        let tol = 1e-13 * (1.0 + self.rhs.amax());
        let mut a = vec![0.0; n];
        let mut free: Vec<usize> = Vec::new();
        let mut cap = false;
        for _ in 0..10 * n + 20 {
            let (target, multiplier) = self.face_minimizer(&free, cap, tau)?;
            let blocked = free.iter().any(|&i| target[i] <= 0.0)
                || (!cap && target.iter().sum::<f64>() > tau);
            if !blocked {
                a = target;
                if cap && multiplier < -tol {
                    cap = false;
                    continue;
                }
                let w = DVector::from_column_slice(&a);
                let reduced = &self.gram * &w - &self.rhs;
                let entering = (0..n)
                    .filter(|i| !free.contains(i))
                    .map(|i| (i, reduced[i] + multiplier.max(0.0)))
                    .filter(|&(_, v)| v < -tol)
                    .min_by(|x, y| x.1.total_cmp(&y.1));
                match entering {
                    Some((i, _)) => {
                        free.push(i);
                        free.sort_unstable();
                    }
                    None => return Some(a),
                }
                continue;
            }
            // Step toward the face minimizer until the first constraint blocks.
            let mut step = 1.0f64;
            for &i in &free {
                if target[i] <= 0.0 && a[i] - target[i] > 0.0 {
                    step = step.min(a[i] / (a[i] - target[i]));
                }
            }
            let mass: f64 = a.iter().sum();
            let target_mass: f64 = target.iter().sum();
            let mut hits_cap = false;
            if !cap && target_mass > tau {
                let to_cap = (tau - mass) / (target_mass - mass);
                if to_cap <= step {
                    step = to_cap;
                    hits_cap = true;
                }
            }
            for i in 0..n {
                a[i] += step * (target[i] - a[i]);
            }
            if hits_cap {
                cap = true;
            }
            free.retain(|&i| a[i] > 1e-15 * tau);
            for (i, v) in a.iter_mut().enumerate() {
                if !free.contains(&i) {
                    *v = 0.0;
                }
            }
        }
        None
    }

    /// Minimizer of the quadratic over `{a_i = 0 for i not in free}`, with
    /// `sum a = tau` when `cap` is set, and the cap multiplier.
    fn face_minimizer(&self, free: &[usize], cap: bool, tau: f64) -> Option<(Vec<f64>, f64)> {
        let n = self.rhs.len();
        let k = free.len();
        let dim = if cap { k + 1 } else { k };
        if dim == 0 {
            return Some((vec![0.0; n], 0.0));
        }
        let mut system = DMatrix::zeros(dim, dim);
        let mut rhs = DVector::zeros(dim);
        for (r, &i) in free.iter().enumerate() {
            for (c, &j) in free.iter().enumerate() {
                system[(r, c)] = self.gram[(i, j)];
            }
            rhs[r] = self.rhs[i];
            if cap {
                system[(r, k)] = 1.0;
                system[(k, r)] = 1.0;
            }
        }
        if cap {
            rhs[k] = tau;
        }
        let svd = system.svd(true, true);
        let cutoff = 1e-14 * svd.singular_values.max();
        let solution = svd.solve(&rhs, cutoff).ok()?;
        let mut out = vec![0.0; n];
        for (r, &i) in free.iter().enumerate() {
            out[i] = solution[r];
        }
        Some((out, if cap { solution[k] } else { 0.0 }))
    }
}

/// Restricted primal over atom columns `Phi(t_i)`; `warm` seeds the iterate
/// (projected onto the feasible set first).
pub fn solve_restricted_columns(
    columns: &[CVec],
    y: &CVec,
    loss: &LossModel,
    tau: f64,
    opts: &InnerOptions,
    warm: Option<&[f64]>,
) -> Result<RestrictedSolution> {
    let m = y.len();
    if let Some(bad) = columns.iter().find(|c| c.len() != m) {
        return Err(Error::Dimension {
            expected: m,
            found: bad.len(),
        });
    }
    let n = columns.len();
    if n == 0 {
        return Ok(RestrictedSolution {
            weights: Vec::new(),
            value: loss.value(&y.neg()),
            fitted: CVec::zeros(m),
            converged: true,
            inner_iterations: 0,
            mapping_norm: 0.0,
        });
    }
    if let Some(w) = warm {
        if w.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: w.len(),
            });
        }
    }

    let objective_grad = |a: &[f64], grad: &mut [f64]| {
        let residual = synthesize_columns(columns, a, m).sub(y);
        correlate_columns(columns, &loss.gradient(&residual), grad);
    };

    let mut x = project_capped_simplex(warm.unwrap_or(&vec![0.0; n]), tau);
    let lipschitz = loss.smoothness() * gram_spectral_norm(columns, m) * 1.01;

    let face = QuadraticFace::new(columns, y, loss);
    let mut iterations = 0;
    let mut mapping_norm = 0.0;
    let mut converged = false;
    if lipschitz > 0.0 {
        let step = 1.0 / lipschitz;
        let mapping_at = |point: &[f64], grad: &mut [f64], trial: &mut [f64]| -> (Vec<f64>, f64) {
            objective_grad(point, grad);
            for ((t, p), g) in trial.iter_mut().zip(point).zip(grad.iter()) {
                *t = p - step * g;
            }
            let next = project_capped_simplex(trial, tau);
            let norm = lipschitz
                * point
                    .iter()
                    .zip(&next)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
            (next, norm)
        };
        let mut z = x.clone();
        let mut momentum = 1.0f64;
        let mut grad = vec![0.0; n];
        let mut trial = vec![0.0; n];
        while iterations < opts.max_iterations {
            iterations += 1;
            let (x_next, norm) = mapping_at(&z, &mut grad, &mut trial);
            mapping_norm = norm;
            if mapping_norm <= opts.tol {
                x = x_next;
                converged = true;
                break;
            }
            if iterations == 1 && opts.exact_finish {
                if let Some(candidate) = face.as_ref().and_then(|g| g.solve(tau)) {
                    let (_, norm) = mapping_at(&candidate, &mut grad, &mut trial);
                    if norm <= opts.tol {
                        x = candidate;
                        mapping_norm = norm;
                        converged = true;
                        break;
                    }
                }
            }
            // Gradient-based adaptive restart.
            let restart: f64 = z
                .iter()
                .zip(&x_next)
                .zip(&x)
                .map(|((zi, xn), xo)| (zi - xn) * (xn - xo))
                .sum();
            if restart > 0.0 {
                momentum = 1.0;
                z.copy_from_slice(&x_next);
            } else {
                let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
                let beta = (momentum - 1.0) / next_momentum;
                for ((zi, xn), xo) in z.iter_mut().zip(&x_next).zip(&x) {
                    *zi = xn + beta * (xn - xo);
                }
                momentum = next_momentum;
            }
            x = x_next;
        }
    } else {
        converged = true;
    }

    if let Some(&w) = x.iter().find(|&&w| w < NEGATIVE_WEIGHT_FLOOR) {
        return Err(Error::Numerical(format!("projected weight {w} is negative")));
    }
    x.iter_mut().for_each(|w| *w = w.max(0.0));
    let fitted = synthesize_columns(columns, &x, m);
    let value = loss.value(&fitted.sub(y));
    Ok(RestrictedSolution {
        weights: x,
        value,
        fitted,
        converged,
        inner_iterations: iterations,
        mapping_norm,
    })
}

/// Restricted primal over a support set of `dict`.
pub fn solve_restricted_primal(
    dict: &AtomDictionary,
    support: &SupportSet,
    y: &CVec,
    loss: &LossModel,
    tau: f64,
    opts: &InnerOptions,
) -> Result<RestrictedSolution> {
    let columns = dict.eval_many(support.locations())?;
    solve_restricted_columns(&columns, y, loss, tau, opts, None)
}

/// Dual objective `Re<lambda, y> - L_o(-lambda) - tau max(0, max_i Re<lambda, Phi_i>)`.
pub fn restricted_dual_objective(
    columns: &[CVec],
    y: &CVec,
    loss: &LossModel,
    tau: f64,
    lambda: &CVec,
) -> (f64, f64) {
    let alpha = columns
        .iter()
        .map(|c| lambda.re_dot(c))
        .fold(0.0, f64::max);
    let value = lambda.re_dot(y) - loss.conjugate(&lambda.neg()) - tau * alpha;
    (value, alpha)
}

/// Dual point from a converged primal solution:
/// `lambda = -grad L(fitted - y)`, `alpha = max(0, max_i Re<lambda, Phi_i>)`.
pub fn recover_dual_columns(
    sol: &RestrictedSolution,
    columns: &[CVec],
    y: &CVec,
    loss: &LossModel,
    tau: f64,
) -> Result<DualPoint> {
    if !sol.converged {
        return Err(Error::Refused(format!(
            "dual recovery needs a converged primal (mapping norm {:e} after {} steps)",
            sol.mapping_norm, sol.inner_iterations
        )));
    }
    if columns.len() != sol.weights.len() {
        return Err(Error::Dimension {
            expected: sol.weights.len(),
            found: columns.len(),
        });
    }
    let lambda = loss.gradient(&sol.fitted.sub(y)).neg();
    let (value, alpha) = restricted_dual_objective(columns, y, loss, tau, &lambda);
    let kkt_residual = if alpha > 0.0 {
        (sol.fitted.re_dot(&lambda) - tau * alpha).abs()
    } else {
        0.0
    };
    Ok(DualPoint {
        lambda,
        alpha,
        value,
        kkt_residual,
    })
}

/// [`recover_dual_columns`] for a support set of `dict`.
pub fn recover_dual(
    sol: &RestrictedSolution,
    support: &SupportSet,
    dict: &AtomDictionary,
    y: &CVec,
    loss: &LossModel,
    tau: f64,
) -> Result<DualPoint> {
    let columns = dict.eval_many(support.locations())?;
    recover_dual_columns(sol, &columns, y, loss, tau)
}

/// Iteration budget of the subgradient dual oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub iterations: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { iterations: 400_000 }
    }
}

/// Maximizes the restricted dual directly by supergradient ascent on the
/// unconstrained form (alpha eliminated), with steps `2 / (mu (k + 1))` and
/// `k`-weighted averaging. Verification only.
pub fn solve_restricted_dual_oracle_columns(
    columns: &[CVec],
    y: &CVec,
    loss: &LossModel,
    tau: f64,
    opts: &OracleOptions,
) -> DualPoint {
    let m = y.len();
    let mu = 1.0 / loss.smoothness();
    let mut lambda = CVec::zeros(m);
    let mut avg = vec![Complex64::new(0.0, 0.0); m];
    let mut weight_sum = 0.0;
    for k in 1..=opts.iterations {
        // supergradient: y + grad L_o(-lambda) - tau Phi_{i*} (when the max is positive)
        let mut s = y.add(&loss.conjugate_gradient(&lambda.neg()));
        let mut best = 0.0;
        let mut arg = None;
        for (i, c) in columns.iter().enumerate() {
            let v = lambda.re_dot(c);
            if v > best {
                best = v;
                arg = Some(i);
            }
        }
        if let Some(i) = arg {
            s.axpy(-tau, &columns[i]);
        }
        lambda.axpy(2.0 / (mu * (k as f64 + 1.0)), &s);
        let w = k as f64;
        weight_sum += w;
        let blend = w / weight_sum;
        for (a, l) in avg.iter_mut().zip(lambda.entries()) {
            *a += (l - *a) * blend;
        }
    }
    let averaged = CVec::from_vec_unchecked(avg);
    let (v_avg, a_avg) = restricted_dual_objective(columns, y, loss, tau, &averaged);
    let (v_last, a_last) = restricted_dual_objective(columns, y, loss, tau, &lambda);
    let (lambda, value, alpha) = if v_last > v_avg {
        (lambda, v_last, a_last)
    } else {
        (averaged, v_avg, a_avg)
    };
    DualPoint {
        lambda,
        alpha,
        value,
        kkt_residual: f64::NAN,
    }
}

/// [`solve_restricted_dual_oracle_columns`] for a support set of `dict`.
pub fn solve_restricted_dual_oracle(
    dict: &AtomDictionary,
    support: &SupportSet,
    y: &CVec,
    loss: &LossModel,
    tau: f64,
    opts: &OracleOptions,
) -> Result<DualPoint> {
    let columns = dict.eval_many(support.locations())?;
    Ok(solve_restricted_dual_oracle_columns(&columns, y, loss, tau, opts))
}
