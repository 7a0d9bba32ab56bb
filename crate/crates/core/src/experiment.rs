//! Super-resolution experiment harness: instance generation, grid sweeps,
//! artifact emission and re-verification of stored artifacts.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    alpha_rate_bound, certify_bounds, equivalence_check, lambda_rate_bound, reference_optima,
    sparsity_within, strong_duality_certificate, value_rate_bound, wasserstein1, BoundCertificate,
    CERTIFICATE_SLACK,
};
use crate::cgm::cgm_run_with_table;
use crate::cvec::CVec;
use crate::dictionary::{AtomTable, DictionarySpec};
use crate::em::em_run_with_table;
use crate::error::{Error, Result};
use crate::fcsolver::InnerOptions;
use crate::io::{
    ensure_dir, parse_summary_json, parse_trace_csv, read_to_string, trace_csv_string,
    trace_file_name, trace_rows, write_file, AlgorithmSummary, GridCertificates, GridSummary,
    Summary, TraceRow,
};
use crate::loss::LossModel;
use crate::measure::{Atom, DiscreteMeasure};
use crate::problem::{synthesize, ProblemInstance};
use crate::trace::{Algorithm, RunTrace, SolverConfig};

/// Tolerance of the value identity `v_CGM^l = v_EM^{l+1}` (relative to `1 + |v|`).
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-8;

pub const RNG_NAME: &str = "ChaCha8 (rand_chacha), seeded with seed_from_u64";

/// Spikes at `{0.1, 0.2, 0.3, 0.31} * pi` with weight 1/4 each.
pub fn default_ground_truth() -> DiscreteMeasure {
    DiscreteMeasure::from_parts(&[0.1 * PI, 0.2 * PI, 0.3 * PI, 0.31 * PI], &[0.25; 4])
        .expect("valid constant measure")
}

fn default_dictionary() -> DictionarySpec {
    DictionarySpec::Fourier { m: 33 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    Gaussian,
}

/// Additive noise on every real coordinate (real and imaginary parts independently).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub kind: NoiseKind,
    #[serde(default)]
    pub variance: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub eta: f64,
    pub max_iterations: usize,
    pub grid_size: usize,
    pub lmo_epsilon: f64,
    pub inner_tol: f64,
    pub inner_max_iterations: usize,
    /// Exact active-set solve of each restricted problem before APG.
    pub exact_finish: bool,
    pub gap_tolerance: Option<f64>,
    pub tv_bound: f64,
    pub sigma: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let inner = InnerOptions::default();
        Self {
            eta: 0.0,
            max_iterations: 50,
            grid_size: 1000,
            lmo_epsilon: 0.0,
            inner_tol: inner.tol,
            inner_max_iterations: inner.max_iterations,
            exact_finish: inner.exact_finish,
            gap_tolerance: None,
            tv_bound: 1.0,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
    /// Fill the `wall_ms` CSV column (makes CSV bodies run-dependent).
    pub record_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_dictionary")]
    pub dictionary: DictionarySpec,
    #[serde(default = "default_ground_truth")]
    pub ground_truth: DiscreteMeasure,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub sweep: Vec<usize>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dictionary: default_dictionary(),
            ground_truth: default_ground_truth(),
            noise: NoiseSpec::default(),
            solver: SolverSettings::default(),
            sweep: Vec::new(),
            output: OutputSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise.variance >= 0.0 && self.noise.variance.is_finite()) {
            return Err(Error::Parameter(format!(
                "noise variance must be finite and nonnegative, got {}",
                self.noise.variance
            )));
        }
        if self.noise.kind == NoiseKind::Gaussian && self.noise.seed.is_none() {
            return Err(Error::Parameter("gaussian noise needs a seed".into()));
        }
        if self.solver.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        if self.grid_sizes().iter().any(|&n| n < 2) {
            return Err(Error::Parameter("grid sizes must be at least 2".into()));
        }
        Ok(())
    }

    /// Sweep entries, or the single configured grid when the sweep is empty.
    pub fn grid_sizes(&self) -> Vec<usize> {
        if self.sweep.is_empty() {
            vec![self.solver.grid_size]
        } else {
            self.sweep.clone()
        }
    }

    pub fn loss(&self) -> Result<LossModel> {
        LossModel::scaled_quadratic(self.solver.sigma)
    }

    pub fn noise_model(&self) -> String {
        match self.noise.kind {
            NoiseKind::None => "none".into(),
            NoiseKind::Gaussian => format!(
                "i.i.d. N(0, {}) added to the real and to the imaginary part of every coordinate",
                self.noise.variance
            ),
        }
    }
}

pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text)?;
    config.validate()?;
    Ok(config)
}

/// Ground truth measure with its clean and observed measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub measure: DiscreteMeasure,
    pub clean_observations: CVec,
    pub noisy_observations: CVec,
    pub seed: Option<u64>,
}

/// Builds the dictionary, synthesizes `y = sum a_i Phi(t_i)` and adds noise when enabled.
pub fn gen_superres_instance(config: &ExperimentConfig) -> Result<(ProblemInstance, GroundTruth)> {
    config.validate()?;
    let dict = config.dictionary.build()?;
    config
        .ground_truth
        .check_domain(dict.domain())
        .map_err(|e| Error::Parameter(format!("ground truth spike outside the domain: {e}")))?;
    let clean = synthesize(&dict, &config.ground_truth)?;
    let noisy = match config.noise.kind {
        NoiseKind::Gaussian if config.noise.variance > 0.0 => {
            let seed = config.noise.seed.expect("validated");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, config.noise.variance.sqrt())
                .map_err(|e| Error::Parameter(e.to_string()))?;
            let entries = clean
                .entries()
                .iter()
                .map(|z| {
                    let re = normal.sample(&mut rng);
                    let im = normal.sample(&mut rng);
                    z + num_complex::Complex64::new(re, im)
                })
                .collect();
            CVec::new(entries)?
        }
        _ => clean.clone(),
    };
    let problem = ProblemInstance::new(noisy.clone(), dict, config.loss()?, config.solver.tv_bound)?;
    Ok((
        problem,
        GroundTruth {
            measure: config.ground_truth.clone(),
            clean_observations: clean,
            noisy_observations: noisy,
            seed: config.noise.seed,
        },
    ))
}

/// Solver configuration for one grid size.
pub fn solver_config(problem: &ProblemInstance, settings: &SolverSettings, grid_size: usize, seed: Option<u64>) -> Result<SolverConfig> {
    let grid = problem.dict().uniform_grid(grid_size)?;
    let config = SolverConfig {
        eta: settings.eta,
        max_iterations: settings.max_iterations,
        grid,
        lmo_epsilon: settings.lmo_epsilon,
        inner: InnerOptions {
            tol: settings.inner_tol,
            max_iterations: settings.inner_max_iterations,
            exact_finish: settings.exact_finish,
        },
        gap_tolerance: settings.gap_tolerance,
        seed,
    };
    config.validate()?;
    Ok(config)
}

/// Everything produced for one grid size.
#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub summary: GridSummary,
    pub cgm: RunTrace,
    pub em: RunTrace,
    pub cgm_rows: Vec<TraceRow>,
    pub em_rows: Vec<TraceRow>,
    pub certificates: Vec<BoundCertificate>,
    /// `W1(x^l, truth)` per CGM record.
    pub cgm_wasserstein: Vec<f64>,
}

impl GridOutcome {
    pub fn passed(&self) -> bool {
        self.summary.equivalence.passed() && self.summary.certificates_ok
    }
}

/// Which algorithms to run on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Cgm,
    Em,
    Both,
}

fn wasserstein_series(trace: &RunTrace, truth: &DiscreteMeasure, problem: &ProblemInstance) -> Result<Vec<f64>> {
    trace
        .records
        .iter()
        .map(|r| wasserstein1(&r.measure, truth, problem.dict().domain()))
        .collect()
}

fn algorithm_summary(trace: &RunTrace, w: &[f64], wall_ms: f64) -> AlgorithmSummary {
    AlgorithmSummary {
        iterations: trace.max_l(),
        atoms_added: trace.atoms_added(),
        termination: trace.termination,
        final_value: trace.last().dual_value().unwrap_or(trace.last().primal_value),
        final_mass: trace.final_measure.tv_mass(),
        final_wasserstein: w.last().copied(),
        wall_ms,
    }
}

/// Runs CGM and EM on one grid, checks their equivalence and certifies the rate bounds.
pub fn run_grid(
    problem: &ProblemInstance,
    truth: &GroundTruth,
    settings: &SolverSettings,
    grid_size: usize,
    record_timing: bool,
) -> Result<GridOutcome> {
    let config = solver_config(problem, settings, grid_size, truth.seed)?;
    let table = AtomTable::new(problem.dict(), &config.grid)?;

    let started = Instant::now();
    let cgm = cgm_run_with_table(problem, &config, &table)?;
    let cgm_ms = started.elapsed().as_secs_f64() * 1e3;
    let started = Instant::now();
    let em = em_run_with_table(problem, &config, &table, None)?;
    let em_ms = started.elapsed().as_secs_f64() * 1e3;

    let equivalence = equivalence_check(&cgm, &em, EQUIVALENCE_TOLERANCE)?;
    let l_max = cgm.max_l().max(em.max_l());
    let refs = reference_optima(problem, &config, &table, l_max)?;
    let meta = &cgm.metadata;
    let certificates = certify_bounds(&cgm, &em, Some(&refs), meta.gamma, meta.r, meta.lmo_epsilon)?;
    let strong = strong_duality_certificate(refs.v_p, refs.v_d);

    let cgm_w = wasserstein_series(&cgm, &truth.measure, problem)?;
    let em_w = wasserstein_series(&em, &truth.measure, problem)?;
    let cgm_rows = trace_rows(&cgm, Some(&cgm_w), Some(&refs), record_timing);
    let em_rows = trace_rows(&em, Some(&em_w), Some(&refs), record_timing);

    let mut notes = cgm.metadata.notes.clone();
    notes.extend(em.metadata.notes.iter().cloned());
    if (cgm.final_measure.tv_mass() - truth.measure.tv_mass()).abs() > 1e-9 {
        notes.push(
            "estimate and truth differ in mass; wasserstein column is the CDF L1 distance".into(),
        );
    }
    let sparsity_ok = sparsity_within(&cgm, problem.dict().m());
    if !sparsity_ok {
        notes.push(format!(
            "warning: some CGM iterate carries more than m = {} weights above 1e-6",
            problem.dict().m()
        ));
    }

    let summary = GridSummary {
        grid_size: config.grid.len(),
        grid_spacing: config.grid.spacing(),
        r: meta.r,
        gamma: meta.gamma,
        lmo_epsilon: meta.lmo_epsilon,
        tv_bound: meta.tv_bound,
        config_fingerprint: meta.config_fingerprint.clone(),
        strong_duality_gap: strong.lhs,
        strong_duality_ok: strong.satisfied,
        certificates_ok: certificates.iter().all(|c| c.satisfied),
        sparsity_ok,
        cgm: algorithm_summary(&cgm, &cgm_w, cgm_ms),
        em: algorithm_summary(&em, &em_w, em_ms),
        reference: refs,
        equivalence,
        notes,
    };
    Ok(GridOutcome {
        summary,
        cgm,
        em,
        cgm_rows,
        em_rows,
        certificates,
        cgm_wasserstein: cgm_w,
    })
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: Summary,
    pub grids: Vec<GridOutcome>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }
}

/// Runs every grid of the sweep (in parallel) and, when `out_dir` is given,
/// writes `trace_{algo}_{grid}.csv`, `summary.json` and `certificates.json`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ExperimentOutcome> {
    let (problem, truth) = gen_superres_instance(config)?;
    let grids = config
        .grid_sizes()
        .par_iter()
        .map(|&n| run_grid(&problem, &truth, &config.solver, n, config.output.record_timing))
        .collect::<Result<Vec<_>>>()?;

    let passed = grids.iter().all(GridOutcome::passed);
    let summary = Summary {
        format_version: 1,
        created_unix_ms: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        dictionary: problem.dict().family_name().into(),
        m: problem.dict().m(),
        noise_model: config.noise_model(),
        rng: RNG_NAME.into(),
        seed: config.noise.seed,
        iterations: config.solver.max_iterations,
        runs: grids.iter().map(|g| g.summary.clone()).collect(),
        passed,
    };

    if let Some(dir) = out_dir {
        let dir = ensure_dir(dir)?;
        for g in &grids {
            let n = g.summary.grid_size;
            write_file(
                &dir.join(trace_file_name(Algorithm::Cgm, n)),
                trace_csv_string(&g.cgm_rows)?.as_bytes(),
            )?;
            write_file(
                &dir.join(trace_file_name(Algorithm::Em, n)),
                trace_csv_string(&g.em_rows)?.as_bytes(),
            )?;
        }
        write_file(&dir.join("summary.json"), serde_json::to_string_pretty(&summary)?.as_bytes())?;
        let certs: Vec<GridCertificates> = grids
            .iter()
            .map(|g| GridCertificates {
                grid_size: g.summary.grid_size,
                certificates: g.certificates.clone(),
            })
            .collect();
        write_file(&dir.join("certificates.json"), serde_json::to_string_pretty(&certs)?.as_bytes())?;
    }
    Ok(ExperimentOutcome { summary, grids })
}

/// One solver on one grid: trace rows without bound columns.
pub fn run_single(config: &ExperimentConfig, algorithm: Algorithm, grid_size: usize) -> Result<(RunTrace, Vec<TraceRow>)> {
    let (problem, truth) = gen_superres_instance(config)?;
    let solver = solver_config(&problem, &config.solver, grid_size, truth.seed)?;
    let table = AtomTable::new(problem.dict(), &solver.grid)?;
    let trace = match algorithm {
        Algorithm::Cgm => cgm_run_with_table(&problem, &solver, &table)?,
        Algorithm::Em => em_run_with_table(&problem, &solver, &table, None)?,
    };
    let w = wasserstein_series(&trace, &truth.measure, &problem)?;
    let rows = trace_rows(&trace, Some(&w), None, config.output.record_timing);
    Ok((trace, rows))
}

/// Outcome of re-checking stored artifacts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub grids_checked: usize,
    pub rows_checked: usize,
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.grids_checked > 0
    }
}

fn rhs_matches(stored: Option<f64>, expected: f64) -> bool {
    stored.is_some_and(|s| (s - expected).abs() <= 1e-12 * (1.0 + expected.abs()))
}

/// Re-verifies a stored CGM/EM trace pair against the summary: recomputes
/// every bound right-hand side from `(l, gamma, r, eps)`, re-checks every
/// inequality and re-checks both equivalence identities.
pub fn verify_grid(run: &GridSummary, cgm: &[TraceRow], em: &[TraceRow], report: &mut VerificationReport) {
    let (g, r, eps) = (run.gamma, run.r, run.lmo_epsilon);
    let refs = &run.reference;
    let n = run.grid_size;
    let mut fail = |msg: String| report.failures.push(format!("grid {n}: {msg}"));

    for row in cgm.iter().filter(|row| row.iter >= 1) {
        let rhs = value_rate_bound(row.iter, g, r, eps);
        if !rhs_matches(row.bound13_rhs, rhs) {
            fail(format!("cgm iter {}: stored bound13_rhs does not match formula", row.iter));
        }
        if row.primal_value - refs.v_p > rhs + CERTIFICATE_SLACK {
            fail(format!("cgm iter {}: primal rate bound violated", row.iter));
        }
    }
    for row in em.iter().filter(|row| row.iter >= 1) {
        let l = row.iter;
        let checks = [
            ("bound14", row.dual_value.map(|v| v - refs.v_d), row.bound14_rhs, value_rate_bound(l, g, r, eps)),
            ("bound15", row.bound15_lhs, row.bound15_rhs, lambda_rate_bound(l, g, r, eps)),
            ("bound16", row.bound16_lhs, row.bound16_rhs, alpha_rate_bound(l, g, r, eps)),
            ("bound17", row.bound17_lhs, row.bound17_rhs, refs.alpha_d + alpha_rate_bound(l, g, r, eps)),
        ];
        for (name, lhs, stored_rhs, rhs) in checks {
            if !rhs_matches(stored_rhs, rhs) {
                fail(format!("em iter {l}: stored {name} right-hand side does not match formula"));
            }
            match lhs {
                Some(v) if v <= rhs + CERTIFICATE_SLACK => {}
                Some(_) => fail(format!("em iter {l}: {name} violated")),
                None => fail(format!("em iter {l}: {name} left-hand side missing")),
            }
        }
    }

    if !strong_duality_certificate(refs.v_p, refs.v_d).satisfied {
        fail("strong duality certificate violated".into());
    }

    // Supports are the running unions of added points.
    let mut cgm_support: Vec<f64> = Vec::new();
    let mut em_support: Vec<f64> = Vec::new();
    for row in cgm.iter().filter(|row| row.iter >= 1) {
        let Some(em_row) = em.iter().find(|e| e.iter == row.iter) else { continue };
        let (Some(a), Some(b)) = (row.t_added, em_row.t_added) else { continue };
        cgm_support.push(a);
        em_support.push(b);
        let mut x = cgm_support.clone();
        let mut y = em_support.clone();
        x.sort_by(f64::total_cmp);
        x.dedup();
        y.sort_by(f64::total_cmp);
        y.dedup();
        if x != y {
            fail(format!("supports differ at iteration {}", row.iter));
            break;
        }
    }
    for row in cgm {
        if let Some(dual) = em.iter().find(|e| e.iter == row.iter + 1).and_then(|e| e.dual_value) {
            if (row.primal_value - dual).abs() > EQUIVALENCE_TOLERANCE * (1.0 + row.primal_value.abs()) {
                fail(format!("value identity fails at iteration {}", row.iter));
            }
        }
    }
    report.grids_checked += 1;
    report.rows_checked += cgm.len() + em.len();
}

/// Loads `summary.json` and the trace CSVs from `dir` and re-verifies them.
pub fn verify_artifacts(dir: &Path) -> Result<VerificationReport> {
    let summary = parse_summary_json(&read_to_string(&dir.join("summary.json"))?)?;
    let mut report = VerificationReport::default();
    for run in &summary.runs {
        let cgm = parse_trace_csv(&read_to_string(&dir.join(trace_file_name(Algorithm::Cgm, run.grid_size)))?)?;
        let em = parse_trace_csv(&read_to_string(&dir.join(trace_file_name(Algorithm::Em, run.grid_size)))?)?;
        verify_grid(run, &cgm, &em, &mut report);
    }
    Ok(report)
}

/// Caps rayon's global pool from `MEASURE_FORGE_THREADS` when set.
pub fn configure_threads_from_env() -> Result<Option<usize>> {
    let Ok(value) = std::env::var("MEASURE_FORGE_THREADS") else {
        return Ok(None);
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::Parameter(format!("MEASURE_FORGE_THREADS must be a positive integer, got {value:?}")))?;
    if n == 0 {
        return Err(Error::Parameter("MEASURE_FORGE_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Parameter(e.to_string()))?;
    Ok(Some(n))
}

/// Ground-truth atoms from parallel slices, rejecting bad weights.
pub fn spikes(locations: &[f64], weights: &[f64]) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(
        locations
            .iter()
            .zip(weights)
            .map(|(&t, &a)| Atom { t, a })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_instance_matches_setup() {
        let config = ExperimentConfig::default();
        let (problem, truth) = gen_superres_instance(&config).unwrap();
        assert_eq!(problem.dict().m(), 33);
        assert_eq!(truth.measure.tv_mass(), 1.0);
        let locs: Vec<f64> = truth.measure.locations().collect();
        let expected = [0.3142, 0.6283, 0.9425, 0.9739];
        for (a, b) in locs.iter().zip(expected) {
            assert!((a - b).abs() < 5e-5);
        }
        assert_eq!(truth.noisy_observations, truth.clean_observations);
        assert!(truth.clean_observations.is_finite());
    }

    #[test]
    fn zero_variance_gaussian_is_exact() {
        let mut config = ExperimentConfig::default();
        config.noise = NoiseSpec {
            kind: NoiseKind::Gaussian,
            variance: 0.0,
            seed: Some(3),
        };
        let (_, truth) = gen_superres_instance(&config).unwrap();
        assert_eq!(truth.noisy_observations, truth.clean_observations);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let mut config = ExperimentConfig::default();
        config.noise = NoiseSpec {
            kind: NoiseKind::Gaussian,
            variance: 0.01,
            seed: Some(0),
        };
        let a = gen_superres_instance(&config).unwrap().1.noisy_observations;
        let b = gen_superres_instance(&config).unwrap().1.noisy_observations;
        let bits = |v: &CVec| v.entries().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        config.noise.seed = Some(1);
        let c = gen_superres_instance(&config).unwrap().1.noisy_observations;
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn config_validation() {
        let mut config = ExperimentConfig::default();
        config.noise.kind = NoiseKind::Gaussian;
        assert!(config.validate().is_err());
        config.noise.seed = Some(1);
        config.noise.variance = -1.0;
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::default();
        config.ground_truth = spikes(&[1.5], &[1.0]).unwrap();
        assert!(matches!(gen_superres_instance(&config), Err(Error::Parameter(_))));
    }

    #[test]
    fn empty_sweep_defaults_to_one_thousand() {
        let config = ExperimentConfig::default();
        assert_eq!(config.grid_sizes(), vec![1000]);
        let parsed = parse_experiment_config("{}").unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn config_json_shape() {
        let text = r#"{
            "dictionary": {"family":"gaussian","c":100,"samples":{"count":33,"lo":0,"hi":1}},
            "noise": {"kind":"gaussian","variance":0.01,"seed":7},
            "solver": {"max_iterations": 20, "grid_size": 500},
            "sweep": [100, 1000]
        }"#;
        let config = parse_experiment_config(text).unwrap();
        assert_eq!(config.solver.max_iterations, 20);
        assert_eq!(config.grid_sizes(), vec![100, 1000]);
        assert!(parse_experiment_config(r#"{"bogus": 1}"#).is_err());
        assert!(parse_experiment_config(r#"{"noise":{"kind":"gaussian","variance":0.1}}"#).is_err());
    }
}
