use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use measure_forge::experiment::{
    configure_threads_from_env, parse_experiment_config, run_experiment, run_single,
    verify_artifacts, ExperimentConfig, ExperimentOutcome, NoiseKind,
};
use measure_forge::io::{trace_csv_string, trace_file_name};
use measure_forge::Algorithm;

#[derive(Parser)]
#[command(name = "measure-forge", version, about = "Sparse measure recovery with CGM and the exchange method")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one instance and write its trace.
    Solve(RunArgs),
    /// Run both algorithms, check their equivalence and certify the rate bounds.
    Compare(RunArgs),
    /// Grid-refinement sweep (100, 1000 and 10000 points unless configured).
    Bench(BenchArgs),
    /// Re-verify the bounds and equivalence identities stored in an output directory.
    Certify {
        /// Directory holding summary.json and the trace CSVs.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoChoice {
    Cgm,
    Em,
    Both,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Noise seed; only used when the config enables gaussian noise.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "both")]
    algo: AlgoChoice,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Add gaussian noise with this variance per real coordinate.
    #[arg(long)]
    noise_variance: Option<f64>,
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            parse_experiment_config(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(n) = args.grid {
        config.solver.grid_size = n;
        config.sweep.clear();
    }
    if let Some(k) = args.iters {
        config.solver.max_iterations = k;
    }
    if let Some(eta) = args.eta {
        config.solver.eta = eta;
    }
    if let Some(seed) = args.seed {
        config.noise.seed = Some(seed);
    }
    config.output.dir = Some(args.out.display().to_string());
    config.validate()?;
    Ok(config)
}

fn solve(args: &RunArgs) -> Result<bool> {
    let config = load_config(args)?;
    let algorithms: &[Algorithm] = match args.algo {
        AlgoChoice::Cgm => &[Algorithm::Cgm],
        AlgoChoice::Em => &[Algorithm::Em],
        AlgoChoice::Both => &[Algorithm::Cgm, Algorithm::Em],
    };
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for &n in &config.grid_sizes() {
        for &algo in algorithms {
            let (trace, rows) = run_single(&config, algo, n)?;
            let path = args.out.join(trace_file_name(algo, n));
            std::fs::write(&path, trace_csv_string(&rows)?)
                .with_context(|| format!("writing {}", path.display()))?;
            let last = trace.last();
            println!(
                "{} grid={} iterations={} termination={:?} value={:.12e} atoms={} -> {}",
                algo.as_str(),
                n,
                trace.max_l(),
                trace.termination,
                last.dual_value().unwrap_or(last.primal_value),
                trace.final_measure.len(),
                path.display()
            );
        }
    }
    Ok(true)
}

fn report(outcome: &ExperimentOutcome, out: &Path) {
    for g in &outcome.grids {
        let s = &g.summary;
        let eq = &s.equivalence;
        println!(
            "grid={} supports_match={} max_value_discrepancy={:.3e} certificates_ok={} strong_duality_gap={:.3e} final_w1={}",
            s.grid_size,
            eq.supports_match,
            eq.max_value_discrepancy,
            s.certificates_ok,
            s.strong_duality_gap,
            s.cgm.final_wasserstein.map_or("-".into(), |w| format!("{w:.6e}")),
        );
        for c in g.certificates.iter().filter(|c| !c.satisfied) {
            println!("  violated: {:?} at l={} lhs={:.6e} rhs={:.6e}", c.kind, c.l, c.lhs, c.rhs);
        }
    }
    println!(
        "{} -> {}",
        if outcome.passed() { "PASSED" } else { "FAILED" },
        out.display()
    );
}

fn compare(args: &RunArgs) -> Result<bool> {
    let config = load_config(args)?;
    let outcome = run_experiment(&config, Some(&args.out))?;
    report(&outcome, &args.out);
    Ok(outcome.passed())
}

fn bench(args: &BenchArgs) -> Result<bool> {
    let mut config = load_config(&args.run)?;
    if config.sweep.is_empty() && args.run.grid.is_none() {
        config.sweep = vec![100, 1000, 10000];
    }
    if let Some(variance) = args.noise_variance {
        config.noise.kind = NoiseKind::Gaussian;
        config.noise.variance = variance;
        config.noise.seed.get_or_insert(0);
    }
    config.validate()?;
    let outcome = run_experiment(&config, Some(&args.run.out))?;
    report(&outcome, &args.run.out);
    Ok(outcome.passed())
}

fn certify(out: &Path) -> Result<bool> {
    let report = verify_artifacts(out)?;
    for failure in &report.failures {
        println!("FAIL {failure}");
    }
    if report.grids_checked == 0 {
        bail!("{} holds no runs to verify", out.display());
    }
    println!(
        "checked {} grid(s), {} rows: {}",
        report.grids_checked,
        report.rows_checked,
        if report.passed() { "PASSED" } else { "FAILED" }
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads_from_env()
        .map_err(anyhow::Error::from)
        .and_then(|_| match &cli.command {
            Command::Solve(args) => solve(args),
            Command::Compare(args) => compare(args),
            Command::Bench(args) => bench(args),
            Command::Certify { out } => certify(out),
        });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
