//! Spatial filter solvers.
//!
//! Four routes to a principal spatial filter:
//!
//! * [`csp_filter`] — the classical solve: smallest eigenvector of the
//!   pencil built from the two average covariance matrices.
//! * [`solve_fixed_point`] — freeze the worst-case covariances at the
//!   current iterate, solve the resulting generalized Rayleigh quotient,
//!   repeat. Cheap per step but prone to oscillation between two points;
//!   oscillation is detected and the best iterate (smallest objective) is
//!   returned when the iteration does not settle.
//! * [`solve_scf`] — self-consistent field iteration on the
//!   eigenvector-dependent pencil `(H_own(x), H_own(x) + H_other(x))`
//!   derived from second-order optimality, whose desired eigenvalue is
//!   known to be the smallest positive one. A backtracking line search on
//!   the quotient guards every step that fails to decrease the objective,
//!   which restores global descent and preserves the fast local
//!   convergence of the plain iteration.
//! * [`solve_frobenius_minmax`] — closed-form variant for Frobenius-ball
//!   tolerance sets: a single generalized eigensolve of a shifted pencil.
//!
//! [`verify_solution`] independently checks a converged filter: the
//! stationarity residual, the position of its eigenvalue in the spectrum
//! (it must be the smallest positive), and positive semidefiniteness of
//! the projected second-order form on the constraint tangent space.

use ndarray::{Array1, Array2};

use crate::eig::{
    cholesky, gen_eig_definite, pd_repair, pencil_finite_spectrum, smallest_positive_pair, sym_eig,
    SymmetricMatrix,
};
use crate::error::{Error, Result};
use crate::kernel::{kernel_eval, objective, objective_gradient, worst_case_sigma, KernelPair};

/// Pass threshold for the stationarity residual in [`verify_solution`].
const VERIFY_RESIDUAL_TOL: f64 = 1e-6;

/// Slack for locating the attained eigenvalue among the pencil spectrum.
const VERIFY_EIGENVALUE_SLACK: f64 = 1e-8;

/// Slack on the smallest eigenvalue of the projected second-order form.
const VERIFY_SECOND_ORDER_SLACK: f64 = 1e-8;

/// Iterates matching a previous iterate this closely (up to sign) flag the
/// fixed-point iteration as oscillating.
const OSCILLATION_TOL: f64 = 1e-10;

/// A revisit only counts as a cycle when the step leaving the current
/// iterate is macroscopic; a contracting spiral revisits neighborhoods with
/// shrinking steps and is left to the residual test instead.
const OSCILLATION_MIN_STEP: f64 = 1e-4;

/// Stopping and line-search parameters shared by the iterative solvers.
#[derive(Debug, Clone)]
pub struct SolveSettings {
    /// Relative residual below which the iteration stops.
    pub tol: f64,
    /// Iteration budget.
    pub max_iter: usize,
    /// Sufficient-decrease factor of the backtracking line search.
    pub mu: f64,
    /// Step shrink factor of the backtracking line search.
    pub tau: f64,
    /// Backtracking budget; exhausting it aborts the solve.
    pub max_backtracks: usize,
}

impl Default for SolveSettings {
    /// `tol` and `max_iter` follow the experiment settings. The
    /// sufficient-decrease factor is the customary small value; the shrink
    /// factor 0.5 keeps rejected full steps from collapsing to near-zero
    /// steps, which otherwise turns a handful of line searches into a long
    /// crawl on large tolerance radii.
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            mu: 0.01,
            tau: 0.5,
            max_backtracks: 60,
        }
    }
}

impl SolveSettings {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive"));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidConfig("mu must be in (0, 1)"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidConfig("tau must be in (0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive"));
        }
        Ok(())
    }
}

/// A unit-norm spatial filter with the objective it attains and the pencil
/// eigenvalue it satisfies.
#[derive(Debug, Clone)]
pub struct SpatialFilter {
    /// Filter vector, unit 2-norm.
    pub weights: Array1<f64>,
    /// Objective value at the filter.
    pub objective: f64,
    /// Eigenvalue satisfied at convergence (equals the objective there).
    pub eigenvalue: f64,
    /// Whether the producing iteration converged.
    pub converged: bool,
}

/// Which search direction an iteration used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionKind {
    /// Step toward the eigenvector of the frozen pencil.
    Scf,
    /// Same, with the eigenvector sign flipped to force descent.
    ScfFlipped,
    /// Steepest descent fallback when the eigenvector step is orthogonal
    /// to the constraint form.
    SteepestDescent,
}

impl DirectionKind {
    pub fn label(self) -> &'static str {
        match self {
            DirectionKind::Scf => "scf",
            DirectionKind::ScfFlipped => "scf-flipped",
            DirectionKind::SteepestDescent => "steepest-descent",
        }
    }
}

/// One row of a solve trace.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// Objective value at the iterate.
    pub objective: f64,
    /// Relative residual of the frozen pencil at the iterate.
    pub residual: f64,
    /// Eigenvalue produced by this iteration's eigensolve (the objective
    /// itself on the terminal record).
    pub eigenvalue: f64,
    /// Accepted step length (1 when the eigenvector was taken directly).
    pub step_length: f64,
    /// Backtracking steps the line search needed.
    pub backtracks: usize,
    /// Direction used to leave this iterate; `None` on the terminal record.
    pub direction: Option<DirectionKind>,
}

/// Why an iterative solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    OscillationDetected,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max-iter",
            SolveStatus::OscillationDetected => "oscillation-detected",
        }
    }
}

/// Per-iteration history of a solve.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub iterations: Vec<IterationRecord>,
    pub status: SolveStatus,
}

impl SolveTrace {
    /// Total line-search backtracks across the solve.
    pub fn total_backtracks(&self) -> usize {
        self.iterations.iter().map(|r| r.backtracks).sum()
    }

    /// Number of iterations that needed a line search.
    pub fn line_search_count(&self) -> usize {
        self.iterations.iter().filter(|r| r.backtracks > 0).count()
    }
}

fn normalized(x: &Array1<f64>) -> Result<Array1<f64>> {
    let norm = x.dot(x).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(x / norm)
}

fn relative_residual(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    lambda: f64,
    x: &Array1<f64>,
) -> f64 {
    let ax = a.matvec(x);
    let bx = b.matvec(x);
    let r = &ax - &(lambda * &bx);
    let num = r.dot(&r).sqrt();
    let den = ax.dot(&ax).sqrt() + lambda.abs() * bx.dot(&bx).sqrt();
    if den == 0.0 {
        return 0.0;
    }
    num / den
}

/// Worst-case objective and relative first-order stationarity residual of
/// the worst-case pencil at `x`, with the Rayleigh quotient as eigenvalue.
/// Measures how far an arbitrary filter is from solving the problem at the
/// pair's radius.
pub fn objective_and_residual(pair: &KernelPair, x: &Array1<f64>) -> Result<(f64, f64)> {
    let x = normalized(x)?;
    let sigma_own = worst_case_sigma(pair.own(), &x)?;
    let sigma_sum = sigma_own.add(&worst_case_sigma(pair.other(), &x)?);
    let q = objective(pair, &x)?;
    Ok((q, relative_residual(&sigma_own, &sigma_sum, q, &x)))
}

/// Classical principal spatial filter: the eigenvector of
/// `(sigma_own, sigma_own + sigma_other)` at the smallest eigenvalue.
///
/// Both inputs must be positive definite. The returned filter has unit
/// 2-norm and its objective equals the smallest generalized eigenvalue.
pub fn csp_filter(
    sigma_own: &SymmetricMatrix,
    sigma_other: &SymmetricMatrix,
) -> Result<SpatialFilter> {
    cholesky(sigma_own).map_err(|_| Error::NotPositiveDefinite("own average covariance"))?;
    cholesky(sigma_other).map_err(|_| Error::NotPositiveDefinite("other average covariance"))?;
    let b = sigma_own.add(sigma_other);
    let pairs = gen_eig_definite(sigma_own, &b)?;
    let weights = normalized(&pairs.vectors.column(0).to_owned())?;
    let lambda = pairs.values[0];
    Ok(SpatialFilter {
        weights,
        objective: lambda,
        eigenvalue: lambda,
        converged: true,
    })
}

/// The conventional initializer for the iterative solvers: the classical
/// filter of the pair's average covariance matrices.
pub fn csp_initializer(pair: &KernelPair) -> Result<Array1<f64>> {
    Ok(csp_filter(pair.own().average(), pair.other().average())?.weights)
}

/// Fixed-point iteration: freeze the worst-case covariances at the current
/// iterate and take the smallest eigenvector of the frozen pencil.
///
/// Stops on a small relative residual. When the iteration oscillates
/// (an iterate repeats an earlier one up to sign) or the budget runs out,
/// the best iterate seen so far (smallest objective) is returned with
/// `converged = false`.
pub fn solve_fixed_point(
    pair: &KernelPair,
    x0: &Array1<f64>,
    settings: &SolveSettings,
) -> Result<(SpatialFilter, SolveTrace)> {
    settings.validate()?;
    let mut x = normalized(x0)?;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut history: Vec<Array1<f64>> = vec![x.clone()];
    let mut best_q = f64::INFINITY;
    let mut best_x = x.clone();
    let mut status = SolveStatus::MaxIter;

    for _ in 0..=settings.max_iter {
        let (a, b) = frozen_pencil(pair, &x)?;
        let q = a.quad_form(&x) / b.quad_form(&x);
        let residual = relative_residual(&a, &b, q, &x);
        if q < best_q {
            best_q = q;
            best_x = x.clone();
        }
        if residual < settings.tol {
            records.push(IterationRecord {
                objective: q,
                residual,
                eigenvalue: q,
                step_length: 0.0,
                backtracks: 0,
                direction: None,
            });
            status = SolveStatus::Converged;
            break;
        }
        if records.len() == settings.max_iter {
            records.push(IterationRecord {
                objective: q,
                residual,
                eigenvalue: q,
                step_length: 0.0,
                backtracks: 0,
                direction: None,
            });
            status = SolveStatus::MaxIter;
            break;
        }

        let pairs = gen_eig_definite(&a, &b)?;
        let lambda = pairs.values[0];
        let next = normalized(&pairs.vectors.column(0).to_owned())?;
        records.push(IterationRecord {
            objective: q,
            residual,
            eigenvalue: lambda,
            step_length: 1.0,
            backtracks: 0,
            direction: Some(DirectionKind::Scf),
        });

        // A revisit of an earlier iterate flags a cycle only when the step
        // out of the current iterate is itself large; shrinking steps mean
        // plain slow convergence and are left to the residual test.
        let dist = |a: &Array1<f64>, b: &Array1<f64>| {
            let d_plus = (a - b).iter().map(|v| v * v).sum::<f64>().sqrt();
            let d_minus = (a + b).iter().map(|v| v * v).sum::<f64>().sqrt();
            d_plus.min(d_minus)
        };
        let step_out = dist(&next, &x);
        let oscillating = step_out >= OSCILLATION_MIN_STEP
            && history[..history.len() - 1]
                .iter()
                .any(|prev| dist(&next, prev) < OSCILLATION_TOL);
        if oscillating {
            status = SolveStatus::OscillationDetected;
            break;
        }
        history.push(next.clone());
        x = next;
    }

    let converged = status == SolveStatus::Converged;
    let (weights, objective) = if converged {
        let q = objective_value(pair, &x)?;
        (x, q)
    } else {
        (best_x, best_q)
    };
    Ok((
        SpatialFilter {
            weights,
            objective,
            eigenvalue: objective,
            converged,
        },
        SolveTrace {
            iterations: records,
            status,
        },
    ))
}

fn frozen_pencil(pair: &KernelPair, x: &Array1<f64>) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    let sigma_own = worst_case_sigma(pair.own(), x)?;
    let sigma_other = worst_case_sigma(pair.other(), x)?;
    let a = sigma_own;
    let b = a.add(&sigma_other);
    // The frozen matrices are positive definite for admissible radii; when
    // a radius is too large, clip the spectra and retry once.
    if cholesky(&b).is_ok() && cholesky(&a).is_ok() {
        return Ok((a, b));
    }
    let n = a.order() as f64;
    let floor_a = 1e-10 * a.trace().abs().max(1.0) / n;
    let repaired_a = pd_repair(&a, floor_a)?;
    let sigma_other_rep = {
        let floor = 1e-10 * b.trace().abs().max(1.0) / n;
        pd_repair(&b.sub(&a), floor)?
    };
    let repaired_b = repaired_a.add(&sigma_other_rep);
    if cholesky(&repaired_b).is_err() || cholesky(&repaired_a).is_err() {
        return Err(Error::NotPositiveDefinite(
            "frozen pencil remained indefinite after repair",
        ));
    }
    Ok((repaired_a, repaired_b))
}

fn objective_value(pair: &KernelPair, x: &Array1<f64>) -> Result<f64> {
    objective(pair, x)
}

/// Self-consistent field iteration with line search on the second-order
/// pencil.
///
/// Each step freezes `A = H_own(x)` and `B = A + H_other(x)`, tests the
/// relative residual at the current iterate, and otherwise moves to the
/// eigenvector of the smallest positive eigenvalue of `(A, B)`. If that
/// move does not decrease the objective, a descent direction is formed
/// from the eigenvector (orienting its sign through the scalar
/// `t = (λ - q) x̃ᵀ B x`, with a steepest-descent fallback when `t`
/// vanishes) and a backtracking line search enforces sufficient decrease.
/// Iterates are renormalized to unit 2-norm after every update; the
/// objective is scale-invariant, so this only conditions the arithmetic.
pub fn solve_scf(
    pair: &KernelPair,
    x0: &Array1<f64>,
    settings: &SolveSettings,
) -> Result<(SpatialFilter, SolveTrace)> {
    settings.validate()?;
    let mut x = normalized(x0)?;
    let mut records: Vec<IterationRecord> = Vec::new();

    for iteration in 0..=settings.max_iter {
        let own = kernel_eval(pair.own(), &x)?;
        let other = kernel_eval(pair.other(), &x)?;
        let a = own.h;
        let b = a.add(&other.h);
        let denom = own.variance + other.variance;
        if denom <= 0.0 {
            // Falls back to the repairing evaluation; failure there is real.
            objective(pair, &x)?;
        }
        let q = own.variance / denom;
        let residual = relative_residual(&a, &b, q, &x);
        if residual < settings.tol {
            records.push(IterationRecord {
                objective: q,
                residual,
                eigenvalue: q,
                step_length: 0.0,
                backtracks: 0,
                direction: None,
            });
            return Ok((
                SpatialFilter {
                    weights: x,
                    objective: q,
                    eigenvalue: q,
                    converged: true,
                },
                SolveTrace {
                    iterations: records,
                    status: SolveStatus::Converged,
                },
            ));
        }
        if iteration == settings.max_iter {
            records.push(IterationRecord {
                objective: q,
                residual,
                eigenvalue: q,
                step_length: 0.0,
                backtracks: 0,
                direction: None,
            });
            break;
        }

        let (lambda, candidate) = smallest_positive_pair(&a, &b)?;
        let q_candidate = objective(pair, &candidate)?;

        if q_candidate < q {
            records.push(IterationRecord {
                objective: q,
                residual,
                eigenvalue: lambda,
                step_length: 1.0,
                backtracks: 0,
                direction: Some(DirectionKind::Scf),
            });
            x = candidate;
            continue;
        }

        // No sign alignment is applied to the eigenvector beforehand; the
        // sign of t resolves the orientation exactly as the update rule
        // prescribes.
        let bx = b.matvec(&x);
        let t = (lambda - q) * candidate.dot(&bx);
        let gradient = objective_gradient(pair, &x)?;
        let (direction, kind) = if t.abs() < settings.tol {
            let g_sq = gradient.dot(&gradient);
            if g_sq == 0.0 {
                return Err(Error::ZeroVector);
            }
            (-&gradient / g_sq, DirectionKind::SteepestDescent)
        } else if t > 0.0 {
            (-&candidate - &x, DirectionKind::ScfFlipped)
        } else {
            (&candidate - &x, DirectionKind::Scf)
        };

        let slope = direction.dot(&gradient);
        let mut step = 1.0;
        let mut backtracks = 0usize;
        let accepted = loop {
            let trial = &x + &(step * &direction);
            // A trial point that cannot be evaluated counts as insufficient
            // decrease and shrinks the step.
            let sufficient = match objective(pair, &trial) {
                Ok(q_trial) => q_trial <= q + settings.mu * step * slope,
                Err(_) => false,
            };
            if sufficient {
                break trial;
            }
            backtracks += 1;
            if backtracks > settings.max_backtracks {
                records.push(IterationRecord {
                    objective: q,
                    residual,
                    eigenvalue: lambda,
                    step_length: step,
                    backtracks,
                    direction: Some(kind),
                });
                return Err(Error::LineSearchFailed {
                    iteration,
                    backtracks,
                    trace: Box::new(SolveTrace {
                        iterations: records,
                        status: SolveStatus::MaxIter,
                    }),
                });
            }
            step *= settings.tau;
        };

        records.push(IterationRecord {
            objective: q,
            residual,
            eigenvalue: lambda,
            step_length: step,
            backtracks,
            direction: Some(kind),
        });
        x = normalized(&accepted)?;
    }

    let q = objective(pair, &x)?;
    let eigenvalue = records
        .iter()
        .rev()
        .find_map(|r| r.direction.map(|_| r.eigenvalue))
        .unwrap_or(q);
    Ok((
        SpatialFilter {
            weights: x,
            objective: q,
            eigenvalue,
            converged: false,
        },
        SolveTrace {
            iterations: records,
            status: SolveStatus::MaxIter,
        },
    ))
}

/// Independent checks of a converged filter.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// Relative stationarity residual of the worst-case pencil at the
    /// filter, using the filter's eigenvalue.
    pub stationarity_residual: f64,
    /// Residual at or below the pass threshold.
    pub residual_ok: bool,
    /// Finite eigenvalues of the second-order pencil at the filter,
    /// ascending.
    pub spectrum: Vec<f64>,
    /// Smallest positive eigenvalue of that spectrum, when one exists.
    pub smallest_positive: Option<f64>,
    /// The filter's eigenvalue coincides with the smallest positive one.
    pub ordering_ok: bool,
    /// Smallest eigenvalue of the second-order form projected onto the
    /// constraint tangent space.
    pub projected_second_order_min: f64,
    /// Projected form is positive semidefinite within slack.
    pub second_order_ok: bool,
    /// Filter rescaled to the pencil normalization, available when the
    /// constraint form is positive at the filter.
    pub pencil_normalized: Option<Array1<f64>>,
}

impl VerificationReport {
    /// All three checks passed.
    pub fn passed(&self) -> bool {
        self.residual_ok && self.ordering_ok && self.second_order_ok
    }
}

/// Verifies a converged filter against the optimality conditions: the
/// first-order stationarity residual, the eigenvalue ordering on the
/// second-order pencil (smallest positive), and positive semidefiniteness
/// of `zᵀ(H_own - λ(H_own + H_other))z` over the tangent space
/// `{z : zᵀ(Σ_own + Σ_other) x = 0}`.
pub fn verify_solution(pair: &KernelPair, filter: &SpatialFilter) -> Result<VerificationReport> {
    let x = normalized(&filter.weights)?;
    let lambda = filter.eigenvalue;
    let n = x.len();

    let sigma_own = worst_case_sigma(pair.own(), &x)?;
    let sigma_other = worst_case_sigma(pair.other(), &x)?;
    let sigma_sum = sigma_own.add(&sigma_other);
    let stationarity_residual = relative_residual(&sigma_own, &sigma_sum, lambda, &x);
    let residual_ok = stationarity_residual <= VERIFY_RESIDUAL_TOL;

    let own = kernel_eval(pair.own(), &x)?;
    let other = kernel_eval(pair.other(), &x)?;
    let h_own = own.h;
    let h_sum = h_own.add(&other.h);

    let spectrum_pairs = pencil_finite_spectrum(&h_own, &h_sum)?;
    let spectrum: Vec<f64> = spectrum_pairs.iter().map(|p| p.0).collect();
    let smallest_positive = spectrum.iter().copied().find(|&v| v > 0.0);
    let ordering_ok = match smallest_positive {
        Some(v) => (lambda - v).abs() <= VERIFY_EIGENVALUE_SLACK * v.abs().max(1.0),
        None => false,
    };

    // Orthonormal basis of the tangent space via a Householder reflector
    // sending the constraint normal to a coordinate axis.
    let normal = normalized(&sigma_sum.matvec(&x))?;
    let basis = householder_complement(&normal);
    let form = h_own.sub(&h_sum.scaled(lambda));
    let projected = SymmetricMatrix::from_upper_fn(n - 1, |i, j| {
        let zi = basis.column(i);
        let zj = basis.column(j).to_owned();
        zi.dot(&form.matvec(&zj))
    });
    let projected_second_order_min = if n > 1 {
        sym_eig(&projected)?.values[0]
    } else {
        0.0
    };
    let second_order_ok = projected_second_order_min >= -VERIFY_SECOND_ORDER_SLACK;

    let constraint_form = h_sum.quad_form(&x);
    let pencil_normalized = if constraint_form > 0.0 {
        Some(&x / constraint_form.sqrt())
    } else {
        None
    };

    Ok(VerificationReport {
        stationarity_residual,
        residual_ok,
        spectrum,
        smallest_positive,
        ordering_ok,
        projected_second_order_min,
        second_order_ok,
        pencil_normalized,
    })
}

/// Columns orthonormal and orthogonal to the given unit vector: the trailing
/// columns of the Householder reflector that maps it onto a coordinate axis.
fn householder_complement(unit: &Array1<f64>) -> Array2<f64> {
    let n = unit.len();
    let sign = if unit[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = unit.clone();
    v[0] += sign; // no cancellation in the leading entry
    let v_sq = v.dot(&v);
    let mut basis = Array2::zeros((n, n.saturating_sub(1)));
    for col in 1..n {
        // Column `col` of Q = I - 2 v vᵀ / (vᵀv).
        for row in 0..n {
            let e = if row == col { 1.0 } else { 0.0 };
            basis[(row, col - 1)] = e - 2.0 * v[row] * v[col] / v_sq;
        }
    }
    basis
}

/// Closed-form minmax filter for Frobenius-ball tolerance sets: solves the
/// shifted pencil
/// `(sigma_own + r_own * p_own, sigma_own + sigma_other + r_own * p_own - r_other * p_other)`
/// at its smallest eigenvalue.
///
/// The shape matrices must be positive definite, as must the shifted
/// numerator, the shifted denominator, and the shrunk other-side matrix
/// `sigma_other - r_other * p_other` (the assumption behind the closed
/// form). The error names whichever assumption failed.
pub fn solve_frobenius_minmax(
    sigma_own: &SymmetricMatrix,
    sigma_other: &SymmetricMatrix,
    p_own: &SymmetricMatrix,
    p_other: &SymmetricMatrix,
    radius_own: f64,
    radius_other: f64,
) -> Result<SpatialFilter> {
    cholesky(p_own).map_err(|_| Error::NotPositiveDefinite("own shape matrix"))?;
    cholesky(p_other).map_err(|_| Error::NotPositiveDefinite("other shape matrix"))?;
    let numerator = sigma_own.add(&p_own.scaled(radius_own));
    cholesky(&numerator)
        .map_err(|_| Error::NotPositiveDefinite("shifted numerator of the pencil"))?;
    let shrunk_other = sigma_other.sub(&p_other.scaled(radius_other));
    cholesky(&shrunk_other)
        .map_err(|_| Error::NotPositiveDefinite("other covariance shrunk by its ball radius"))?;
    let denominator = numerator.add(&shrunk_other);
    cholesky(&denominator).map_err(|_| Error::NotPositiveDefinite("pencil denominator"))?;

    let pairs = gen_eig_definite(&numerator, &denominator)?;
    let weights = normalized(&pairs.vectors.column(0).to_owned())?;
    let lambda = pairs.values[0];
    Ok(SpatialFilter {
        weights,
        objective: lambda,
        eigenvalue: lambda,
        converged: true,
    })
}
