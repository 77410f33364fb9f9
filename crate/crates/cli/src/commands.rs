//! Implementations behind the CLI subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use mmcsp_core::classify::evaluate_filters;
use mmcsp_core::covariance::{center_scale_trial, covariance_ensemble, CovarianceEnsemble};
use mmcsp_core::kernel::KernelPair;
use mmcsp_core::solvers::{
    csp_filter, csp_initializer, solve_fixed_point, solve_frobenius_minmax, solve_scf,
    verify_solution, SolveSettings, SolveTrace, SpatialFilter,
};
use mmcsp_core::synth::{generate, SynthSpec};
use mmcsp_core::{SymmetricMatrix, TrialSet};

use crate::error::{CliError, Result};
use crate::manifest::{load_dataset, save_dataset, DatasetManifest};
use crate::report::{
    ClassifyReport, ClassifyRow, ConditionFitJson, FitReport, SettingsEcho, TraceJson,
};

/// Filter computation route selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Csp,
    FixedPoint,
    Scf,
    Frobenius,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Csp => "csp",
            Method::FixedPoint => "fp",
            Method::Scf => "nepv",
            Method::Frobenius => "frob",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csp" => Ok(Method::Csp),
            "fp" => Ok(Method::FixedPoint),
            "nepv" => Ok(Method::Scf),
            "frob" => Ok(Method::Frobenius),
            other => Err(CliError::Args(format!(
                "unknown method {other:?}; expected csp, fp, nepv, or frob"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub test_noise: bool,
    pub trials: Option<usize>,
    pub channels: Option<usize>,
    pub samples: Option<usize>,
}

/// Generates a synthetic dataset and serializes it. A `--test-noise` set
/// shares the mixing matrix of the training set with the same seed but
/// draws independent trials with noise variance 30.
pub fn cmd_synth(opts: &SynthOptions) -> Result<PathBuf> {
    let mut spec = if opts.test_noise {
        SynthSpec::test(opts.seed)
    } else {
        SynthSpec::train(opts.seed)
    };
    if let Some(t) = opts.trials {
        spec.trials_per_condition = t;
    }
    if let Some(c) = opts.channels {
        spec.channels = c;
    }
    if let Some(s) = opts.samples {
        spec.samples = s;
    }
    let (minus, plus) = generate(&spec)?;
    fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::io(&opts.out_dir, e))?;
    let notes = serde_json::json!({
        "generator": "linear-mixing-synthetic",
        "seed": opts.seed,
        "mixing_seed": spec.mixing_seed,
        "draw_seed": spec.seed,
        "noise_variance": spec.noise_variance,
        "test_noise": opts.test_noise,
        "trials_per_condition": spec.trials_per_condition,
        "channels": spec.channels,
        "samples": spec.samples,
    });
    save_dataset(&opts.out_dir, &minus, &plus, false, Some(notes))
}

/// Loaded dataset with preprocessing applied once.
pub struct PreparedDataset {
    pub manifest: DatasetManifest,
    pub trials_minus: Vec<Array2<f64>>,
    pub trials_plus: Vec<Array2<f64>>,
    pub ensemble_minus: CovarianceEnsemble,
    pub ensemble_plus: CovarianceEnsemble,
}

/// Loads a manifest, centers and scales the trials unless the manifest
/// declares them preprocessed, and computes the covariance ensembles.
pub fn prepare_dataset(manifest_path: &Path) -> Result<PreparedDataset> {
    let (manifest, minus, plus) = load_dataset(manifest_path)?;
    let preprocess = |ts: &TrialSet| -> Result<Vec<Array2<f64>>> {
        if manifest.preprocessed {
            Ok(ts.trials().to_vec())
        } else {
            ts.trials()
                .iter()
                .map(|t| center_scale_trial(t).map_err(CliError::from))
                .collect()
        }
    };
    let trials_minus = preprocess(&minus)?;
    let trials_plus = preprocess(&plus)?;
    let ensemble_minus = covariance_ensemble(&minus, manifest.preprocessed)?;
    let ensemble_plus = covariance_ensemble(&plus, manifest.preprocessed)?;
    Ok(PreparedDataset {
        manifest,
        trials_minus,
        trials_plus,
        ensemble_minus,
        ensemble_plus,
    })
}

/// Filters for both conditions with optional traces.
pub struct FittedPair {
    pub minus: SpatialFilter,
    pub plus: SpatialFilter,
    pub trace_minus: Option<SolveTrace>,
    pub trace_plus: Option<SolveTrace>,
}

/// Fits the principal filters of both conditions (own/other roles
/// swapped) with the selected method.
pub fn fit_filters(
    ensemble_minus: &CovarianceEnsemble,
    ensemble_plus: &CovarianceEnsemble,
    method: Method,
    delta: f64,
    interp_count: usize,
    settings: &SolveSettings,
) -> Result<FittedPair> {
    match method {
        Method::Csp => {
            let minus = csp_filter(ensemble_minus.average(), ensemble_plus.average())?;
            let plus = csp_filter(ensemble_plus.average(), ensemble_minus.average())?;
            Ok(FittedPair {
                minus,
                plus,
                trace_minus: None,
                trace_plus: None,
            })
        }
        Method::Frobenius => {
            let n = ensemble_minus.order();
            let shape = SymmetricMatrix::identity(n);
            let minus = solve_frobenius_minmax(
                ensemble_minus.average(),
                ensemble_plus.average(),
                &shape,
                &shape,
                delta,
                delta,
            )?;
            let plus = solve_frobenius_minmax(
                ensemble_plus.average(),
                ensemble_minus.average(),
                &shape,
                &shape,
                delta,
                delta,
            )?;
            Ok(FittedPair {
                minus,
                plus,
                trace_minus: None,
                trace_plus: None,
            })
        }
        Method::FixedPoint | Method::Scf => {
            let pair_minus =
                KernelPair::from_ensembles(ensemble_minus, ensemble_plus, interp_count, delta, delta)?;
            let pair_plus =
                KernelPair::from_ensembles(ensemble_plus, ensemble_minus, interp_count, delta, delta)?;
            let solve = |pair: &KernelPair| -> Result<(SpatialFilter, SolveTrace)> {
                let x0 = csp_initializer(pair)?;
                let out = match method {
                    Method::FixedPoint => solve_fixed_point(pair, &x0, settings)?,
                    _ => solve_scf(pair, &x0, settings)?,
                };
                Ok(out)
            };
            let (minus, trace_minus) = solve(&pair_minus)?;
            let (plus, trace_plus) = solve(&pair_plus)?;
            Ok(FittedPair {
                minus,
                plus,
                trace_minus: Some(trace_minus),
                trace_plus: Some(trace_plus),
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub manifest: PathBuf,
    pub method: Method,
    pub delta: f64,
    pub interp_count: usize,
    pub settings: SolveSettings,
    pub out_dir: PathBuf,
}

fn settings_echo(method: Method, delta: f64, interp_count: usize, s: &SolveSettings) -> SettingsEcho {
    SettingsEcho {
        method: method.label().to_string(),
        delta,
        interp_count,
        tol: s.tol,
        max_iter: s.max_iter,
        mu: s.mu,
        tau: s.tau,
    }
}

/// Fits both conditions' filters, verifies converged ones against the
/// worst-case optimality conditions at the commanded radius, and writes
/// `fit_report.json`.
pub fn cmd_fit(opts: &FitOptions) -> Result<FitReport> {
    let start = Instant::now();
    let data = prepare_dataset(&opts.manifest)?;
    let fitted = fit_filters(
        &data.ensemble_minus,
        &data.ensemble_plus,
        opts.method,
        opts.delta,
        opts.interp_count,
        &opts.settings,
    )?;

    // Verification runs against the data-driven tolerance pair at the
    // commanded radius; a filter from another route (csp at delta > 0,
    // frob) simply reports how far it is from those optimality conditions.
    let verification = |own: &CovarianceEnsemble,
                        other: &CovarianceEnsemble,
                        filter: &SpatialFilter|
     -> Option<crate::report::VerificationJson> {
        if !filter.converged {
            return None;
        }
        let pair =
            KernelPair::from_ensembles(own, other, opts.interp_count, opts.delta, opts.delta)
                .ok()?;
        verify_solution(&pair, filter)
            .ok()
            .map(|r| crate::report::VerificationJson::from(&r))
    };

    let conditions = vec![
        ConditionFitJson {
            condition: "minus",
            filter: (&fitted.minus).into(),
            trace: fitted.trace_minus.as_ref().map(TraceJson::from),
            verification: verification(&data.ensemble_minus, &data.ensemble_plus, &fitted.minus),
        },
        ConditionFitJson {
            condition: "plus",
            filter: (&fitted.plus).into(),
            trace: fitted.trace_plus.as_ref().map(TraceJson::from),
            verification: verification(&data.ensemble_plus, &data.ensemble_minus, &fitted.plus),
        },
    ];

    let report = FitReport {
        settings: settings_echo(opts.method, opts.delta, opts.interp_count, &opts.settings),
        manifest: opts.manifest.display().to_string(),
        conditions,
        wall_clock_ms: start.elapsed().as_millis(),
    };
    fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::io(&opts.out_dir, e))?;
    let path = opts.out_dir.join("fit_report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    /// File mode: train/test manifests. Ignored when `replicates > 0`.
    pub train_manifest: Option<PathBuf>,
    pub test_manifest: Option<PathBuf>,
    /// Replicate mode: number of seeded synthetic experiments.
    pub replicates: usize,
    pub seed: u64,
    pub method: Method,
    pub delta_grid: Vec<f64>,
    pub interp_count: usize,
    pub settings: SolveSettings,
    pub out_dir: PathBuf,
}

struct SplitData {
    train_minus: Vec<Array2<f64>>,
    train_plus: Vec<Array2<f64>>,
    test_minus: Vec<Array2<f64>>,
    test_plus: Vec<Array2<f64>>,
    ensemble_minus: CovarianceEnsemble,
    ensemble_plus: CovarianceEnsemble,
}

fn classify_on_split(
    data: &SplitData,
    method: Method,
    delta: f64,
    interp_count: usize,
    settings: &SolveSettings,
) -> Result<(f64, String, String)> {
    let fitted = fit_filters(
        &data.ensemble_minus,
        &data.ensemble_plus,
        method,
        delta,
        interp_count,
        settings,
    )?;
    let (rate, _) = evaluate_filters(
        &fitted.minus.weights,
        &fitted.plus.weights,
        &data.train_minus,
        &data.train_plus,
        &data.test_minus,
        &data.test_plus,
    )?;
    let status = |trace: &Option<SolveTrace>, filter: &SpatialFilter| -> String {
        match trace {
            Some(t) => t.status.label().to_string(),
            None => {
                if filter.converged {
                    "converged".to_string()
                } else {
                    "max-iter".to_string()
                }
            }
        }
    };
    Ok((
        rate,
        status(&fitted.trace_minus, &fitted.minus),
        status(&fitted.trace_plus, &fitted.plus),
    ))
}

fn synthetic_split(seed: u64) -> Result<SplitData> {
    let (train_minus, train_plus) = generate(&SynthSpec::train(seed))?;
    let (test_minus, test_plus) = generate(&SynthSpec::test(seed))?;
    let prep = |ts: &TrialSet| -> Result<Vec<Array2<f64>>> {
        ts.trials()
            .iter()
            .map(|t| center_scale_trial(t).map_err(CliError::from))
            .collect()
    };
    Ok(SplitData {
        train_minus: prep(&train_minus)?,
        train_plus: prep(&train_plus)?,
        test_minus: prep(&test_minus)?,
        test_plus: prep(&test_plus)?,
        ensemble_minus: covariance_ensemble(&train_minus, false)?,
        ensemble_plus: covariance_ensemble(&train_plus, false)?,
    })
}

/// Runs the train/fit/score pipeline over the radius grid, either on a
/// stored train/test pair or over seeded synthetic replicates (one worker
/// per replicate; row order is fixed by seed).
pub fn cmd_classify(opts: &ClassifyOptions) -> Result<ClassifyReport> {
    let start = Instant::now();
    let mut rows: Vec<ClassifyRow> = Vec::new();

    if opts.replicates > 0 {
        let results: Vec<Result<Vec<ClassifyRow>>> = (0..opts.replicates)
            .into_par_iter()
            .map(|replicate| {
                let seed = opts.seed + replicate as u64;
                let data = synthetic_split(seed)?;
                let mut local = Vec::with_capacity(opts.delta_grid.len());
                for &delta in &opts.delta_grid {
                    let (rate, minus_status, plus_status) = classify_on_split(
                        &data,
                        opts.method,
                        delta,
                        opts.interp_count,
                        &opts.settings,
                    )?;
                    local.push(ClassifyRow {
                        delta,
                        replicate,
                        seed: Some(seed),
                        rate,
                        minus_status,
                        plus_status,
                    });
                }
                Ok(local)
            })
            .collect();
        for r in results {
            rows.extend(r?);
        }
        rows.sort_by(|a, b| {
            a.replicate
                .cmp(&b.replicate)
                .then(a.delta.partial_cmp(&b.delta).unwrap())
        });
    } else {
        let train_path = opts
            .train_manifest
            .as_ref()
            .ok_or_else(|| CliError::Args("need --train (or --replicates)".into()))?;
        let test_path = opts
            .test_manifest
            .as_ref()
            .ok_or_else(|| CliError::Args("need --test (or --replicates)".into()))?;
        let train = prepare_dataset(train_path)?;
        let test = prepare_dataset(test_path)?;
        if train.manifest.channels != test.manifest.channels {
            return Err(CliError::Args(format!(
                "channel counts differ: train {} vs test {}",
                train.manifest.channels, test.manifest.channels
            )));
        }
        let data = SplitData {
            train_minus: train.trials_minus,
            train_plus: train.trials_plus,
            test_minus: test.trials_minus,
            test_plus: test.trials_plus,
            ensemble_minus: train.ensemble_minus,
            ensemble_plus: train.ensemble_plus,
        };
        for &delta in &opts.delta_grid {
            let (rate, minus_status, plus_status) =
                classify_on_split(&data, opts.method, delta, opts.interp_count, &opts.settings)?;
            rows.push(ClassifyRow {
                delta,
                replicate: 0,
                seed: None,
                rate,
                minus_status,
                plus_status,
            });
        }
    }

    fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::io(&opts.out_dir, e))?;
    let csv_path = opts.out_dir.join("rates.csv");
    let mut csv = String::new();
    if opts.replicates > 0 {
        csv.push_str("delta,replicate,seed,rate\n");
        for row in &rows {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                row.delta,
                row.replicate,
                row.seed.unwrap_or(0),
                row.rate
            ));
        }
    } else {
        csv.push_str("delta,rate\n");
        for row in &rows {
            csv.push_str(&format!("{},{}\n", row.delta, row.rate));
        }
    }
    fs::write(&csv_path, csv).map_err(|e| CliError::io(&csv_path, e))?;

    let report = ClassifyReport {
        settings: settings_echo(
            opts.method,
            f64::NAN,
            opts.interp_count,
            &opts.settings,
        ),
        delta_grid: opts.delta_grid.clone(),
        replicates: opts.replicates,
        seed: (opts.replicates > 0).then_some(opts.seed),
        train_manifest: opts
            .train_manifest
            .as_ref()
            .map(|p| p.display().to_string()),
        test_manifest: opts.test_manifest.as_ref().map(|p| p.display().to_string()),
        rows,
        wall_clock_ms: start.elapsed().as_millis(),
    };
    let json_path = opts.out_dir.join("classify_report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&json_path, json + "\n").map_err(|e| CliError::io(&json_path, e))?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct TraceOptions {
    pub manifest: PathBuf,
    pub methods: Vec<Method>,
    pub delta: f64,
    pub interp_count: usize,
    pub settings: SolveSettings,
    pub out_file: PathBuf,
}

/// Runs the selected solvers on the minus condition from the shared CSP
/// initializer and writes per-iteration rows
/// `method,iteration,objective,residual,error`, where `error` measures
/// each objective against the converged self-consistent solve at the same
/// radius.
pub fn cmd_trace(opts: &TraceOptions) -> Result<PathBuf> {
    let data = prepare_dataset(&opts.manifest)?;
    let pair = KernelPair::from_ensembles(
        &data.ensemble_minus,
        &data.ensemble_plus,
        opts.interp_count,
        opts.delta,
        opts.delta,
    )?;
    let x0 = csp_initializer(&pair)?;

    // Reference objective: the self-consistent solve at this radius.
    let (reference, _) = solve_scf(&pair, &x0, &opts.settings)?;
    let q_reference = reference.objective;

    // One objective function per file: every row reports the worst-case
    // quotient at the commanded radius, so single-shot filters are
    // comparable with the iterative traces.
    let mut csv = String::from("method,iteration,objective,residual,error\n");
    for &method in &opts.methods {
        match method {
            Method::Csp => {
                let f = csp_filter(data.ensemble_minus.average(), data.ensemble_plus.average())?;
                let (q, residual) =
                    mmcsp_core::solvers::objective_and_residual(&pair, &f.weights)?;
                csv.push_str(&format!("csp,0,{q},{residual},{}\n", q - q_reference));
            }
            Method::Frobenius => {
                let n = data.ensemble_minus.order();
                let shape = SymmetricMatrix::identity(n);
                let f = solve_frobenius_minmax(
                    data.ensemble_minus.average(),
                    data.ensemble_plus.average(),
                    &shape,
                    &shape,
                    opts.delta,
                    opts.delta,
                )?;
                let (q, residual) =
                    mmcsp_core::solvers::objective_and_residual(&pair, &f.weights)?;
                csv.push_str(&format!("frob,0,{q},{residual},{}\n", q - q_reference));
            }
            Method::FixedPoint | Method::Scf => {
                let (_, trace) = match method {
                    Method::FixedPoint => solve_fixed_point(&pair, &x0, &opts.settings)?,
                    _ => solve_scf(&pair, &x0, &opts.settings)?,
                };
                for (k, r) in trace.iterations.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        method.label(),
                        k,
                        r.objective,
                        r.residual,
                        r.objective - q_reference
                    ));
                }
            }
        }
    }
    if let Some(parent) = opts.out_file.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    fs::write(&opts.out_file, csv).map_err(|e| CliError::io(&opts.out_file, e))?;
    Ok(opts.out_file.clone())
}
