//! Property suites and instance generators shared by the integration tests
//! and the acceptance runner. Each suite runs a deterministic proptest
//! runner and returns the first failure as a message.

#![allow(dead_code)]

use measure_forge::analysis::wasserstein1;
use measure_forge::cgm::cgm_run;
use measure_forge::dictionary::AtomDictionary;
use measure_forge::em::em_run;
use measure_forge::fcsolver::project_capped_simplex;
use measure_forge::loss::Loss;
use measure_forge::measure::{Atom, DiscreteMeasure, ParameterDomain};
use measure_forge::trace::RunTrace;
use measure_forge::{synthesize, CVec, LossModel, ProblemInstance, SolverConfig};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

pub fn cvec_strategy(m: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), m)
        .prop_map(|v| CVec::new(v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap())
}

pub fn measure_strategy(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 0..=max_atoms).prop_map(|v| {
        DiscreteMeasure::new(v.into_iter().map(|(t, a)| Atom { t, a }).collect()).unwrap()
    })
}

/// Projection onto `{a >= 0, sum a <= tau}` by enumerating every face: the
/// projection is the closest feasible candidate among the per-face minimizers.
pub fn projection_by_enumeration(v: &[f64], tau: f64) -> Vec<f64> {
    let n = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        for cap in [false, true] {
            if cap && members.is_empty() {
                continue;
            }
            let shift = if cap {
                (members.iter().map(|&i| v[i]).sum::<f64>() - tau) / members.len() as f64
            } else {
                0.0
            };
            let mut a = vec![0.0; n];
            for &i in &members {
                a[i] = v[i] - shift;
            }
            let feasible = a.iter().all(|&x| x >= -1e-14) && a.iter().sum::<f64>() <= tau + 1e-14;
            if !feasible {
                continue;
            }
            let d: f64 = a.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, a));
            }
        }
    }
    best.expect("zero is always feasible").1
}

pub fn projection_suite(cases: u32) -> Result<(), String> {
    let strategy = (1usize..=3, prop::collection::vec(-2.0..2.0f64, 3), 0.1..2.0f64);
    run(cases, strategy, |(n, v, tau)| {
        let v = &v[..n];
        let fast = project_capped_simplex(v, tau);
        let slow = projection_by_enumeration(v, tau);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-12, "v={v:?} tau={tau}: {fast:?} vs {slow:?}");
        }
        let again = project_capped_simplex(&fast, tau);
        prop_assert!(fast.iter().zip(&again).all(|(a, b)| (a - b).abs() <= 1e-14));
        Ok(())
    })
}

pub fn loss_strategy() -> impl Strategy<Value = LossModel> {
    (0.2..5.0f64).prop_map(|s| LossModel::scaled_quadratic(s).unwrap())
}

pub fn fenchel_young_suite(cases: u32) -> Result<(), String> {
    run(cases, (loss_strategy(), cvec_strategy(6), cvec_strategy(6)), |(loss, z, lambda)| {
        let lhs = loss.value(&z) + loss.conjugate(&lambda);
        prop_assert!(lhs >= z.re_dot(&lambda) - 1e-10);
        let g = loss.gradient(&z);
        let tight = loss.value(&z) + loss.conjugate(&g) - z.re_dot(&g);
        prop_assert!(tight.abs() <= 1e-10 * (1.0 + z.norm_sq()), "gap {tight}");
        Ok(())
    })
}

pub fn sandwich_suite(cases: u32) -> Result<(), String> {
    run(cases, (loss_strategy(), cvec_strategy(5), cvec_strategy(5)), |(loss, x, xp)| {
        let gamma = loss.gamma();
        prop_assert!(gamma >= 1.0);
        let d2 = x.sub(&xp).norm_sq();
        let bregman = loss.value(&x) - loss.value(&xp) - x.sub(&xp).re_dot(&loss.gradient(&xp));
        let tol = 1e-10 * (1.0 + loss.value(&x).abs() + loss.value(&xp).abs());
        prop_assert!(d2 / (2.0 * gamma) <= bregman + tol);
        prop_assert!(bregman <= gamma / 2.0 * d2 + tol);
        Ok(())
    })
}

pub fn gradient_suite(cases: u32) -> Result<(), String> {
    run(cases, (loss_strategy(), cvec_strategy(4)), |(loss, z)| {
        let g = loss.gradient(&z);
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for k in 0..z.len() {
            for part in 0..2 {
                let bump = |s: f64| {
                    let mut e = z.entries().to_vec();
                    if part == 0 {
                        e[k].re += s;
                    } else {
                        e[k].im += s;
                    }
                    loss.value(&CVec::new(e).unwrap())
                };
                let fd = (bump(h) - bump(-h)) / (2.0 * h);
                let exact = if part == 0 { g.entries()[k].re } else { g.entries()[k].im };
                worst = worst.max((fd - exact).abs());
            }
        }
        prop_assert!(worst <= 1e-6 * (1.0 + g.norm()), "worst deviation {worst}");
        Ok(())
    })
}

pub fn wasserstein_suite(cases: u32) -> Result<(), String> {
    let domain = ParameterDomain::closed(0.0, 1.0).unwrap();
    let strategy = (measure_strategy(5), measure_strategy(5), measure_strategy(5));
    run(cases, strategy, move |(a, b, c)| {
        let d = |x: &DiscreteMeasure, y: &DiscreteMeasure| wasserstein1(x, y, &domain).unwrap();
        let (ab, ba, bc, ac) = (d(&a, &b), d(&b, &a), d(&b, &c), d(&a, &c));
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(d(&a, &a) == 0.0);
        prop_assert!(ac <= ab + bc + 1e-12);
        Ok(())
    })
}

/// `count` points in `[0, 1)` with pairwise separation at least `gap`.
fn separated_points(count: usize, gap: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, count).prop_filter_map("points too close", move |mut v| {
        v.sort_by(f64::total_cmp);
        v.windows(2).all(|w| w[1] - w[0] >= gap).then_some(v)
    })
}

pub fn chebyshev_suite(cases: u32) -> Result<(), String> {
    let fourier = AtomDictionary::fourier(7).unwrap();
    run(cases, separated_points(7, 0.02), |pts| {
        prop_assert!(fourier.chebyshev_check(&pts).unwrap(), "fourier at {pts:?}");
        Ok(())
    })?;
    // With 5 samples and c = 100 a cluster far from every sample is singular
    // in floating point, so draw one point from each sample's cell instead.
    let gaussian = AtomDictionary::gaussian_uniform(5, 0.0, 1.0, 100.0).unwrap();
    let cells = prop::collection::vec(-0.125..0.125f64, 5).prop_map(|jitter| {
        jitter
            .iter()
            .enumerate()
            .map(|(i, d)| (i as f64 / 4.0 + d).clamp(0.0, 1.0))
            .collect::<Vec<f64>>()
    });
    run(cases, cells, |pts| {
        prop_assert!(gaussian.chebyshev_check(&pts).unwrap(), "gaussian at {pts:?}");
        Ok(())
    })
}

pub fn synthesis_suite(cases: u32) -> Result<(), String> {
    let dict = AtomDictionary::fourier(9).unwrap();
    run(cases, (measure_strategy(4), measure_strategy(4)), |(x1, x2)| {
        let merged = x1.merge(&x2);
        let sum = synthesize(&dict, &x1).unwrap().add(&synthesize(&dict, &x2).unwrap());
        prop_assert!(synthesize(&dict, &merged).unwrap().sub(&sum).norm() <= 1e-12 * (1.0 + sum.norm()));
        let again = DiscreteMeasure::new(merged.atoms().to_vec()).unwrap();
        prop_assert_eq!(&again, &merged);
        prop_assert!((merged.tv_mass() - x1.tv_mass() - x2.tv_mass()).abs() <= 1e-12);
        Ok(())
    })
}

/// Random tabulated instance: `m` rows, `n` complex atoms, observations from a
/// sparse nonnegative measure plus perturbation.
pub fn random_tabulated_instance(seed: u64, m: usize, n: usize) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms: Vec<CVec> = (0..n)
        .map(|_| {
            CVec::new(
                (0..m)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    let mut y = CVec::zeros(m);
    for _ in 0..3 {
        let j = rng.random_range(0..n);
        y.axpy(rng.random_range(0.1..0.5), &atoms[j]);
    }
    let noise = CVec::new((0..m).map(|_| Complex64::new(rng.random_range(-0.2..0.2), 0.0)).collect()).unwrap();
    let y = y.add(&noise);
    let dict = AtomDictionary::tabulated_indexed(atoms).unwrap();
    let sigma = rng.random_range(0.5..2.0);
    ProblemInstance::new(y, dict, LossModel::scaled_quadratic(sigma).unwrap(), 1.0).unwrap()
}

pub fn tabulated_config(problem: &ProblemInstance, iters: usize) -> SolverConfig {
    SolverConfig::new(problem.dict().uniform_grid(0).unwrap(), iters)
}

/// Support monotonicity, nonnegativity and the TV budget on every record.
pub fn check_trace_feasibility(trace: &RunTrace, tau: f64) -> Result<(), String> {
    for pair in trace.records.windows(2) {
        if !pair[0].support.is_subset_of(&pair[1].support) {
            return Err(format!("support shrank between l={} and l={}", pair[0].l, pair[1].l));
        }
    }
    for rec in &trace.records {
        if rec.measure.atoms().iter().any(|a| a.a < 0.0) {
            return Err(format!("negative weight at l={}", rec.l));
        }
        if rec.measure.tv_mass() > tau * (1.0 + 1e-12) {
            return Err(format!("mass {} exceeds {tau} at l={}", rec.measure.tv_mass(), rec.l));
        }
    }
    Ok(())
}

/// Restricted feasibility and complementary slackness of every EM iterate.
pub fn check_em_dual_records(trace: &RunTrace, problem: &ProblemInstance) -> Result<(), String> {
    let mut previous: Vec<f64> = Vec::new();
    for rec in &trace.records {
        let dual = rec.dual.as_ref().ok_or("EM record without dual")?;
        for &t in &previous {
            let v = dual.lambda.re_dot(&problem.dict().eval(t).unwrap());
            if v > dual.alpha + 1e-8 {
                return Err(format!("l={}: Re<lambda, Phi({t})> = {v} exceeds alpha {}", rec.l, dual.alpha));
            }
        }
        if dual.alpha > 0.0 && dual.kkt_residual > 1e-8 * (1.0 + dual.value.abs()) {
            return Err(format!("l={}: complementary slackness residual {}", rec.l, dual.kkt_residual));
        }
        previous = rec.support.locations().to_vec();
    }
    Ok(())
}

/// Trace invariants on random tabulated instances and the Fourier example.
pub fn trace_suite(instances: u64) -> Result<(), String> {
    let mut problems: Vec<(ProblemInstance, SolverConfig)> = (0..instances)
        .map(|s| {
            let p = random_tabulated_instance(1000 + s, 4 + (s as usize % 5), 8 + (s as usize * 3) % 25);
            let c = tabulated_config(&p, 40);
            (p, c)
        })
        .collect();
    let dict = AtomDictionary::fourier(33).unwrap();
    let truth = DiscreteMeasure::from_parts(
        &[0.1, 0.2, 0.3, 0.31].map(|x| x * std::f64::consts::PI),
        &[0.25; 4],
    )
    .unwrap();
    let y = synthesize(&dict, &truth).unwrap();
    let grid = dict.uniform_grid(1000).unwrap();
    problems.push((ProblemInstance::with_defaults(y, dict).unwrap(), SolverConfig::new(grid, 50)));

    for (i, (problem, config)) in problems.iter().enumerate() {
        let cgm = cgm_run(problem, config).map_err(|e| format!("instance {i}: {e}"))?;
        let em = em_run(problem, config).map_err(|e| format!("instance {i}: {e}"))?;
        check_trace_feasibility(&cgm, problem.tv_bound()).map_err(|e| format!("instance {i} cgm: {e}"))?;
        check_trace_feasibility(&em, problem.tv_bound()).map_err(|e| format!("instance {i} em: {e}"))?;
        check_em_dual_records(&em, problem).map_err(|e| format!("instance {i}: {e}"))?;
        // Objective is nonincreasing along CGM.
        for pair in cgm.records.windows(2) {
            if pair[1].primal_value > pair[0].primal_value + 1e-12 * (1.0 + pair[0].primal_value) {
                return Err(format!("instance {i}: CGM value increased at l={}", pair[1].l));
            }
        }
    }
    Ok(())
}
