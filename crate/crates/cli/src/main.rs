//! `mmcsp`: spatial filter experiments from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mmcsp_cli::{
    cmd_classify, cmd_fit, cmd_synth, cmd_trace, ClassifyOptions, CliError, FitOptions, Method,
    SynthOptions, TraceOptions,
};
use mmcsp_core::solvers::SolveSettings;

#[derive(Parser)]
#[command(
    name = "mmcsp",
    about = "Spatial filters for two-condition signal classification: synthetic datasets, \
             classical and worst-case robust filter solvers, convergence traces, and \
             classification sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Tolerance set radius.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Number of interpolation matrices kept by the PCA.
    #[arg(long = "m", default_value_t = 10)]
    interp_count: usize,
    /// Relative residual stopping tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Iteration budget.
    #[arg(long = "max-iter", default_value_t = 200)]
    max_iter: usize,
    /// Line search sufficient-decrease factor.
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    /// Line search backtracking shrink factor.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
}

impl SolverArgs {
    fn settings(&self) -> SolveSettings {
        SolveSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            mu: self.mu,
            tau: self.tau,
            ..SolveSettings::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic two-condition dataset.
    Synth {
        /// Experiment seed; datasets are bit-reproducible per seed.
        #[arg(long)]
        seed: u64,
        /// Output directory for trials and manifest.
        #[arg(long)]
        out: PathBuf,
        /// Testing counterpart: same mixing matrix, noise variance 30.
        #[arg(long = "test-noise", default_value_t = false)]
        test_noise: bool,
        /// Trials per condition (default 50).
        #[arg(long)]
        trials: Option<usize>,
        /// Channel count (default 10).
        #[arg(long)]
        channels: Option<usize>,
        /// Samples per trial (default 200).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Fit both conditions' principal filters on a dataset.
    Fit {
        /// Dataset manifest path.
        #[arg(long)]
        manifest: PathBuf,
        /// Solver: csp, fp, nepv, or frob.
        #[arg(long)]
        method: String,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output directory for fit_report.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train filters and a linear classifier, score the balanced rate.
    Classify {
        /// Training dataset manifest (file mode).
        #[arg(long)]
        train: Option<PathBuf>,
        /// Testing dataset manifest (file mode).
        #[arg(long)]
        test: Option<PathBuf>,
        /// Seeded synthetic replicates (replicate mode; ignores --train/--test).
        #[arg(long, default_value_t = 0)]
        replicates: usize,
        /// Base seed of the replicate mode.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Solver: csp, fp, nepv, or frob.
        #[arg(long)]
        method: String,
        /// Comma-separated tolerance radii.
        #[arg(long = "delta-grid", value_delimiter = ',', default_value = "0.5,1,2,4,6,8")]
        delta_grid: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output directory for rates.csv and classify_report.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit per-iteration convergence traces for plotting.
    Trace {
        /// Dataset manifest path.
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated solvers to trace (csp, fp, nepv, frob).
        #[arg(long, value_delimiter = ',', default_value = "fp,nepv")]
        methods: Vec<String>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth {
            seed,
            out,
            test_noise,
            trials,
            channels,
            samples,
        } => {
            let path = cmd_synth(&SynthOptions {
                seed,
                out_dir: out,
                test_noise,
                trials,
                channels,
                samples,
            })?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Fit {
            manifest,
            method,
            solver,
            out,
        } => {
            let report = cmd_fit(&FitOptions {
                manifest,
                method: Method::parse(&method)?,
                delta: solver.delta,
                interp_count: solver.interp_count,
                settings: solver.settings(),
                out_dir: out.clone(),
            })?;
            for c in &report.conditions {
                println!(
                    "{}: objective {:.6} eigenvalue {:.6} converged {}",
                    c.condition, c.filter.objective, c.filter.eigenvalue, c.filter.converged
                );
            }
            println!("{}", out.join("fit_report.json").display());
            Ok(())
        }
        Command::Classify {
            train,
            test,
            replicates,
            seed,
            method,
            delta_grid,
            solver,
            out,
        } => {
            let report = cmd_classify(&ClassifyOptions {
                train_manifest: train,
                test_manifest: test,
                replicates,
                seed,
                method: Method::parse(&method)?,
                delta_grid,
                interp_count: solver.interp_count,
                settings: solver.settings(),
                out_dir: out.clone(),
            })?;
            for delta in &report.delta_grid {
                let rates: Vec<f64> = report
                    .rows
                    .iter()
                    .filter(|r| r.delta == *delta)
                    .map(|r| r.rate)
                    .collect();
                let mean = rates.iter().sum::<f64>() / rates.len().max(1) as f64;
                println!("delta {delta}: mean rate {mean:.4} over {} run(s)", rates.len());
            }
            println!("{}", out.join("rates.csv").display());
            Ok(())
        }
        Command::Trace {
            manifest,
            methods,
            solver,
            out,
        } => {
            let methods = methods
                .iter()
                .map(|m| Method::parse(m))
                .collect::<Result<Vec<_>, _>>()?;
            let path = cmd_trace(&TraceOptions {
                manifest,
                methods,
                delta: solver.delta,
                interp_count: solver.interp_count,
                settings: solver.settings(),
                out_file: out,
            })?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::FAILURE
        }
    }
}
