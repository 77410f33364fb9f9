//! Eigenvector-dependent matrices and gradients of the worst-case quotient.
//!
//! For a filter candidate `x`, the worst covariance matrix inside a
//! tolerance model has a closed form: the quadratic forms of `x` against
//! the interpolation matrices pick a coefficient vector on the boundary of
//! the weighted-norm ball, with sign `+` for the condition whose variance
//! is maximized and `-` for the complement. This module evaluates that
//! worst-case covariance `Σ(x)`, its quadratic form `s(x) = xᵀΣ(x)x`, the
//! matrix `H(x) = Σ(x) + Σ̃(x)` equal to half the Hessian of `s`, and the
//! quotient
//!
//! ```text
//!     q(x) = s_own(x) / (s_own(x) + s_other(x))
//! ```
//!
//! together with the gradients `∇s(x) = 2 Σ(x) x` and
//!
//! ```text
//!     ∇q(x) = 2/(xᵀ(Σ_own+Σ_other)x) (Σ_own(x) - q(x)(Σ_own(x)+Σ_other(x))) x.
//! ```
//!
//! Key identities preserved exactly by the assembly below: `H(x)` is
//! symmetric bitwise, `H(x)x = Σ(x)x`, and `Σ̃(x)` is positive
//! semidefinite for the maximizing orientation and negative semidefinite
//! for the minimizing one.
//!
//! Degenerate case: when the weighted norm of the quadratic forms vanishes
//! the worst-case coefficients are undefined; they are set to zero (and
//! `Σ̃` with them), so the kernel degrades continuously to the plain
//! average-covariance matrices instead of aborting a solve on a
//! measure-zero set.

use ndarray::{Array1, Array2};

use crate::covariance::{CovarianceEnsemble, Orientation, ToleranceModel};
use crate::eig::{pd_repair, SymmetricMatrix};
use crate::error::{Error, Result};

/// Scale factor of the degeneracy cutoff for the weighted norm.
const FORMS_NORM_TOL: f64 = 1e-14;

/// Relative eigenvalue floor used when repairing an indefinite worst-case
/// covariance after a nonpositive quotient denominator.
const REPAIR_FLOOR_FACTOR: f64 = 1e-10;

/// The two tolerance models entering one quotient: the numerator condition
/// (maximizing orientation) and its complement (minimizing orientation).
#[derive(Debug, Clone)]
pub struct KernelPair {
    own: ToleranceModel,
    other: ToleranceModel,
}

impl KernelPair {
    /// Pairs two models, checking the channel counts and orientations.
    pub fn new(own: ToleranceModel, other: ToleranceModel) -> Result<Self> {
        if own.order() != other.order() {
            return Err(Error::InvalidConfig(
                "paired models must share the channel count",
            ));
        }
        if own.orientation() != Orientation::Own || other.orientation() != Orientation::Other {
            return Err(Error::InvalidConfig(
                "own model must maximize, other model must minimize",
            ));
        }
        Ok(Self { own, other })
    }

    /// Builds the pair straight from two covariance ensembles with a shared
    /// interpolation count and per-side radii.
    pub fn from_ensembles(
        ce_own: &CovarianceEnsemble,
        ce_other: &CovarianceEnsemble,
        m_requested: usize,
        radius_own: f64,
        radius_other: f64,
    ) -> Result<Self> {
        let own = crate::covariance::build_tolerance_model(
            ce_own,
            m_requested,
            radius_own,
            Orientation::Own,
        )?;
        let other = crate::covariance::build_tolerance_model(
            ce_other,
            m_requested,
            radius_other,
            Orientation::Other,
        )?;
        Self::new(own, other)
    }

    pub fn own(&self) -> &ToleranceModel {
        &self.own
    }

    pub fn other(&self) -> &ToleranceModel {
        &self.other
    }

    /// Channel count shared by both models.
    pub fn order(&self) -> usize {
        self.own.order()
    }
}

/// Everything the solvers need at one evaluation point.
#[derive(Debug, Clone)]
pub struct KernelEval {
    /// Evaluation point.
    pub x: Array1<f64>,
    /// Quadratic forms of `x` against the interpolation matrices.
    pub forms: Array1<f64>,
    /// Worst-case coefficients on the weighted-norm ball boundary.
    pub coefficients: Array1<f64>,
    /// Worst-case covariance `Σ(x)`.
    pub sigma: SymmetricMatrix,
    /// Half the Hessian of the quadratic form: `H(x) = Σ(x) + Σ̃(x)`.
    pub h: SymmetricMatrix,
    /// Worst-case quadratic form `s(x) = xᵀ Σ(x) x`.
    pub variance: f64,
}

fn require_nonzero(x: &Array1<f64>) -> Result<()> {
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// Quadratic forms of `x` against each interpolation matrix.
pub fn interp_forms(model: &ToleranceModel, x: &Array1<f64>) -> Result<Array1<f64>> {
    require_nonzero(x)?;
    Ok(Array1::from_iter(
        model.interp().iter().map(|v| v.quad_form(x)),
    ))
}

fn weighted_norm(model: &ToleranceModel, forms: &Array1<f64>) -> f64 {
    model
        .weights()
        .iter()
        .zip(forms.iter())
        .map(|(&w, &v)| w * v * v)
        .sum::<f64>()
        .sqrt()
}

fn forms_norm_cutoff(model: &ToleranceModel, x: &Array1<f64>) -> f64 {
    let x_sq = x.dot(x);
    FORMS_NORM_TOL * (1.0 + x_sq * model.max_interp_frobenius())
}

/// Coefficients of the worst-case covariance inside the tolerance set:
/// `sign * radius * W v(x) / ||v(x)||_W`, or zero in the degenerate case.
///
/// When nonzero, the inverse-weighted norm of the result equals the radius,
/// i.e., the worst case sits on the ellipsoid boundary.
pub fn worst_case_coefficients(model: &ToleranceModel, x: &Array1<f64>) -> Result<Array1<f64>> {
    require_nonzero(x)?;
    let m = model.interp_count();
    if model.radius() == 0.0 {
        return Ok(Array1::zeros(m));
    }
    let forms = interp_forms(model, x)?;
    let norm = weighted_norm(model, &forms);
    if norm < forms_norm_cutoff(model, x) {
        return Ok(Array1::zeros(m));
    }
    let scale = model.orientation().sign() * model.radius() / norm;
    Ok(Array1::from_iter(
        model
            .weights()
            .iter()
            .zip(forms.iter())
            .map(|(&w, &v)| scale * w * v),
    ))
}

/// Worst-case covariance `Σ(x)`: the average plus the coefficient-weighted
/// interpolation matrices.
pub fn worst_case_sigma(model: &ToleranceModel, x: &Array1<f64>) -> Result<SymmetricMatrix> {
    let coeffs = worst_case_coefficients(model, x)?;
    Ok(assemble_sigma(model, &coeffs))
}

fn assemble_sigma(model: &ToleranceModel, coeffs: &Array1<f64>) -> SymmetricMatrix {
    let mut sigma = model.average().clone();
    for (v, &a) in model.interp().iter().zip(coeffs.iter()) {
        if a != 0.0 {
            sigma = sigma.add(&v.scaled(a));
        }
    }
    sigma
}

/// Full evaluation at `x`: forms, coefficients, `Σ(x)`, `H(x)`, `s(x)`.
pub fn kernel_eval(model: &ToleranceModel, x: &Array1<f64>) -> Result<KernelEval> {
    require_nonzero(x)?;
    let n = model.order();
    let m = model.interp_count();
    let forms = interp_forms(model, x)?;
    let norm = weighted_norm(model, &forms);
    let degenerate = model.radius() == 0.0 || norm < forms_norm_cutoff(model, x);

    let coefficients = if degenerate {
        Array1::zeros(m)
    } else {
        let scale = model.orientation().sign() * model.radius() / norm;
        Array1::from_iter(
            model
                .weights()
                .iter()
                .zip(forms.iter())
                .map(|(&w, &v)| scale * w * v),
        )
    };
    let sigma = assemble_sigma(model, &coefficients);
    let variance = sigma.quad_form(x);

    let h = if degenerate {
        sigma.clone()
    } else {
        // Columns of the form gradient: 2 V_i x.
        let mut grad_forms = Array2::zeros((n, m));
        for (i, v) in model.interp().iter().enumerate() {
            let col = v.matvec(x) * 2.0;
            grad_forms.column_mut(i).assign(&col);
        }
        // Unit direction of the weighted forms, ||unit||_{W^{-1}} = 1.
        let unit = Array1::from_iter(
            model
                .weights()
                .iter()
                .zip(forms.iter())
                .map(|(&w, &v)| w * v / norm),
        );
        let projected: Array1<f64> = grad_forms.dot(&unit);
        // Σ̃ = sign * radius/(2 norm) * (G W Gᵀ - (G u)(G u)ᵀ),
        // assembled on the upper triangle so symmetry is bitwise.
        let weights = model.weights();
        let scale = model.orientation().sign() * model.radius() / (2.0 * norm);
        let tilde = SymmetricMatrix::from_upper_fn(n, |i, j| {
            let mut acc = 0.0;
            for k in 0..m {
                acc += grad_forms[(i, k)] * weights[k] * grad_forms[(j, k)];
            }
            scale * (acc - projected[i] * projected[j])
        });
        sigma.add(&tilde)
    };

    Ok(KernelEval {
        x: x.clone(),
        forms,
        coefficients,
        sigma,
        h,
        variance,
    })
}

/// Gradient of the worst-case quadratic form: `∇s(x) = 2 Σ(x) x`.
pub fn variance_gradient(model: &ToleranceModel, x: &Array1<f64>) -> Result<Array1<f64>> {
    let sigma = worst_case_sigma(model, x)?;
    Ok(sigma.matvec(x) * 2.0)
}

/// Worst-case covariances of both sides together with their quadratic
/// forms, with the denominator repair applied when needed.
struct PairForms {
    sigma_own: SymmetricMatrix,
    sigma_other: SymmetricMatrix,
    s_own: f64,
    s_other: f64,
}

/// Positive definiteness of the worst-case covariances is only checked
/// when the quotient denominator actually fails; the offending matrices
/// are then repaired with a scale-relative eigenvalue floor and the forms
/// recomputed. A denominator that stays nonpositive is an error.
fn pair_forms(pair: &KernelPair, x: &Array1<f64>) -> Result<PairForms> {
    let mut sigma_own = worst_case_sigma(pair.own(), x)?;
    let mut sigma_other = worst_case_sigma(pair.other(), x)?;
    let mut s_own = sigma_own.quad_form(x);
    let mut s_other = sigma_other.quad_form(x);
    if s_own + s_other <= 0.0 {
        let n = pair.order() as f64;
        let floor_own = REPAIR_FLOOR_FACTOR * sigma_own.trace().abs().max(1.0) / n;
        let floor_other = REPAIR_FLOOR_FACTOR * sigma_other.trace().abs().max(1.0) / n;
        sigma_own = pd_repair(&sigma_own, floor_own)?;
        sigma_other = pd_repair(&sigma_other, floor_other)?;
        s_own = sigma_own.quad_form(x);
        s_other = sigma_other.quad_form(x);
        if s_own + s_other <= 0.0 {
            return Err(Error::NonpositiveDenominator);
        }
    }
    Ok(PairForms {
        sigma_own,
        sigma_other,
        s_own,
        s_other,
    })
}

/// The worst-case variance quotient `q(x) = s_own / (s_own + s_other)`.
pub fn objective(pair: &KernelPair, x: &Array1<f64>) -> Result<f64> {
    let f = pair_forms(pair, x)?;
    Ok(f.s_own / (f.s_own + f.s_other))
}

/// Gradient of the quotient.
pub fn objective_gradient(pair: &KernelPair, x: &Array1<f64>) -> Result<Array1<f64>> {
    let f = pair_forms(pair, x)?;
    let denom = f.s_own + f.s_other;
    let q = f.s_own / denom;
    let own_x = f.sigma_own.matvec(x);
    let sum_x = &own_x + &f.sigma_other.matvec(x);
    Ok((own_x - q * sum_x) * (2.0 / denom))
}
