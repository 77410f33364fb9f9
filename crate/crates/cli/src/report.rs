//! Serializable report types mirroring the solver outputs.

use serde::Serialize;

use mmcsp_core::solvers::{SolveTrace, SpatialFilter, VerificationReport};

#[derive(Debug, Clone, Serialize)]
pub struct FilterJson {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub eigenvalue: f64,
    pub converged: bool,
}

impl From<&SpatialFilter> for FilterJson {
    fn from(f: &SpatialFilter) -> Self {
        Self {
            weights: f.weights.to_vec(),
            objective: f.objective,
            eigenvalue: f.eigenvalue,
            converged: f.converged,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRowJson {
    pub iteration: usize,
    pub objective: f64,
    pub residual: f64,
    pub eigenvalue: f64,
    pub step_length: f64,
    pub backtracks: usize,
    pub direction: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceJson {
    pub status: &'static str,
    pub iterations: usize,
    pub line_searches: usize,
    pub rows: Vec<TraceRowJson>,
}

impl From<&SolveTrace> for TraceJson {
    fn from(t: &SolveTrace) -> Self {
        Self {
            status: t.status.label(),
            iterations: t.iterations.len(),
            line_searches: t.line_search_count(),
            rows: t
                .iterations
                .iter()
                .enumerate()
                .map(|(i, r)| TraceRowJson {
                    iteration: i,
                    objective: r.objective,
                    residual: r.residual,
                    eigenvalue: r.eigenvalue,
                    step_length: r.step_length,
                    backtracks: r.backtracks,
                    direction: r.direction.map(|d| d.label()),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationJson {
    pub stationarity_residual: f64,
    pub residual_ok: bool,
    pub spectrum: Vec<f64>,
    pub smallest_positive: Option<f64>,
    pub ordering_ok: bool,
    pub projected_second_order_min: f64,
    pub second_order_ok: bool,
    pub passed: bool,
    pub pencil_normalized: Option<Vec<f64>>,
}

impl From<&VerificationReport> for VerificationJson {
    fn from(v: &VerificationReport) -> Self {
        Self {
            stationarity_residual: v.stationarity_residual,
            residual_ok: v.residual_ok,
            spectrum: v.spectrum.clone(),
            smallest_positive: v.smallest_positive,
            ordering_ok: v.ordering_ok,
            projected_second_order_min: v.projected_second_order_min,
            second_order_ok: v.second_order_ok,
            passed: v.passed(),
            pencil_normalized: v.pencil_normalized.as_ref().map(|x| x.to_vec()),
        }
    }
}

/// Settings echoed into every report so runs can be replayed.
#[derive(Debug, Clone, Serialize)]
pub struct SettingsEcho {
    pub method: String,
    pub delta: f64,
    pub interp_count: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub mu: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionFitJson {
    pub condition: &'static str,
    pub filter: FilterJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub settings: SettingsEcho,
    pub manifest: String,
    pub conditions: Vec<ConditionFitJson>,
    pub wall_clock_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyRow {
    pub delta: f64,
    pub replicate: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub rate: f64,
    pub minus_status: String,
    pub plus_status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub settings: SettingsEcho,
    pub delta_grid: Vec<f64>,
    pub replicates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_manifest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_manifest: Option<String>,
    pub rows: Vec<ClassifyRow>,
    pub wall_clock_ms: u128,
}
