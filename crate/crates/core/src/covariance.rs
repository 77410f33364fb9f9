//! Trial preprocessing, covariance estimation, and tolerance models.
//!
//! A trial is an `n x t` matrix of channel signals. Trials are centered and
//! scaled, turned into per-trial covariance matrices `Y Yᵀ`, and averaged.
//! The variability of the per-trial covariances around the average is then
//! summarized by a principal component analysis of their vectorizations:
//! the leading eigenvectors, reshaped and symmetrized, become interpolation
//! matrices that span an ellipsoid of candidate covariance matrices around
//! the average, with the eigenvalues acting as axis weights and a radius
//! parameter controlling its size.
//!
//! The PCA runs through the Gram (dual) trick: the covariance of the
//! vectorized matrices lives in `n² x n²` but has rank below the trial
//! count, so the eigendecomposition is done on the small `N x N` Gram
//! matrix instead. The covariance of vectorizations is normalized by
//! `1/(N-1)`; any fixed rescaling of the weights is equivalent to rescaling
//! the radius, so the choice is only about reproducibility.

use ndarray::{Array1, Array2};

use crate::eig::{pd_repair, sym_eig, SymmetricMatrix};
use crate::error::{Error, Result};

/// Relative cutoff under which PCA eigenvalues are treated as zero.
const WEIGHT_TOL: f64 = 1e-10;

/// Variability below this multiple of the squared covariance magnitude is
/// indistinguishable from centering round-off and counts as none at all.
const VARIABILITY_FLOOR: f64 = 1e-24;

/// Relative floor used when repairing a non-definite average covariance.
const PD_FLOOR_FACTOR: f64 = 1e-10;

/// One of the two signal conditions being contrasted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Minus,
    Plus,
}

impl Condition {
    /// The complement condition.
    pub fn other(self) -> Self {
        match self {
            Condition::Minus => Condition::Plus,
            Condition::Plus => Condition::Minus,
        }
    }

    /// Lowercase label used in file names and reports.
    pub fn label(self) -> &'static str {
        match self {
            Condition::Minus => "minus",
            Condition::Plus => "plus",
        }
    }
}

/// A labeled collection of `n x t` trial matrices for one condition.
#[derive(Debug, Clone)]
pub struct TrialSet {
    condition: Condition,
    trials: Vec<Array2<f64>>,
    channels: usize,
    samples: usize,
}

impl TrialSet {
    /// Builds a trial set, checking that every trial shares the same shape.
    pub fn new(condition: Condition, trials: Vec<Array2<f64>>) -> Result<Self> {
        let first = trials.first().ok_or(Error::EmptyTrialSet)?;
        let (channels, samples) = (first.nrows(), first.ncols());
        for t in &trials {
            if t.nrows() != channels || t.ncols() != samples {
                return Err(Error::TrialShapeMismatch {
                    expected_rows: channels,
                    expected_cols: samples,
                    found_rows: t.nrows(),
                    found_cols: t.ncols(),
                });
            }
        }
        Ok(Self {
            condition,
            trials,
            channels,
            samples,
        })
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn trials(&self) -> &[Array2<f64>] {
        &self.trials
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    /// Channel count `n`.
    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Samples per trial `t`.
    pub fn samples(&self) -> usize {
        self.samples
    }
}

/// Centers each row of the trial and scales by `1/sqrt(t-1)`.
///
/// Computes `(1/sqrt(t-1)) Y (I - (1/t) 11ᵀ)`, after which every row has
/// zero mean.
pub fn center_scale_trial(trial: &Array2<f64>) -> Result<Array2<f64>> {
    let t = trial.ncols();
    if t < 2 {
        return Err(Error::DegenerateTrial(t));
    }
    let scale = 1.0 / ((t as f64 - 1.0).sqrt());
    let mut out = trial.clone();
    for mut row in out.rows_mut() {
        let mean = row.sum() / t as f64;
        row.mapv_inplace(|v| (v - mean) * scale);
    }
    Ok(out)
}

/// Per-trial covariance matrices and their average for one condition.
#[derive(Debug, Clone)]
pub struct CovarianceEnsemble {
    per_trial: Vec<SymmetricMatrix>,
    average: SymmetricMatrix,
    /// True when the average failed the positive definiteness check and was
    /// repaired by clipping its eigenvalues.
    average_repaired: bool,
}

impl CovarianceEnsemble {
    pub fn per_trial(&self) -> &[SymmetricMatrix] {
        &self.per_trial
    }

    pub fn average(&self) -> &SymmetricMatrix {
        &self.average
    }

    pub fn average_repaired(&self) -> bool {
        self.average_repaired
    }

    /// Number of trials behind the ensemble.
    pub fn len(&self) -> usize {
        self.per_trial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_trial.is_empty()
    }

    /// Channel count.
    pub fn order(&self) -> usize {
        self.average.order()
    }
}

/// Computes the per-trial covariances `Y Yᵀ` and their average.
///
/// Trials are centered and scaled first unless `assume_preprocessed` is
/// set. If the average fails positive definiteness it is repaired with a
/// scale-relative eigenvalue floor and the ensemble is flagged.
pub fn covariance_ensemble(ts: &TrialSet, assume_preprocessed: bool) -> Result<CovarianceEnsemble> {
    let n = ts.channels();
    let count = ts.len() as f64;
    let mut per_trial = Vec::with_capacity(ts.len());
    for trial in ts.trials() {
        let y;
        let data = if assume_preprocessed {
            trial
        } else {
            y = center_scale_trial(trial)?;
            &y
        };
        per_trial.push(SymmetricMatrix::from_upper_fn(n, |i, j| {
            data.row(i).dot(&data.row(j))
        }));
    }
    // Fixed summation order keeps the average deterministic.
    let mut sum = SymmetricMatrix::zeros(n);
    for cov in &per_trial {
        sum = sum.add(cov);
    }
    let mut average = sum.scaled(1.0 / count);

    let pd_floor = PD_FLOOR_FACTOR * average.trace() / n as f64;
    let mut average_repaired = false;
    if pd_floor <= 0.0 {
        return Err(Error::NotPositiveDefinite("average covariance"));
    }
    let min_eig = sym_eig(&average)?.values[0];
    if min_eig <= pd_floor {
        average = pd_repair(&average, pd_floor)?;
        average_repaired = true;
    }
    Ok(CovarianceEnsemble {
        per_trial,
        average,
        average_repaired,
    })
}

/// Sign of the role a tolerance model plays in the quotient: the condition
/// whose variance sits in the numerator takes the worst case as an inner
/// maximum, its complement as an inner minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Numerator condition; worst case maximizes the quadratic form.
    Own,
    /// Complement condition; worst case minimizes the quadratic form.
    Other,
}

impl Orientation {
    /// `+1` for the numerator condition, `-1` for its complement.
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Own => 1.0,
            Orientation::Other => -1.0,
        }
    }
}

/// Ellipsoid of candidate covariance matrices for one condition: the
/// average covariance, interpolation matrices spanning the principal
/// directions of per-trial variability, their weights, a radius, and the
/// orientation of the worst case.
#[derive(Debug, Clone)]
pub struct ToleranceModel {
    average: SymmetricMatrix,
    interp: Vec<SymmetricMatrix>,
    weights: Vec<f64>,
    radius: f64,
    orientation: Orientation,
}

impl ToleranceModel {
    /// Assembles a model from parts, validating the invariants: at least
    /// one interpolation matrix, strictly positive nonincreasing weights,
    /// consistent orders, and a nonnegative radius.
    pub fn new(
        average: SymmetricMatrix,
        interp: Vec<SymmetricMatrix>,
        weights: Vec<f64>,
        radius: f64,
        orientation: Orientation,
    ) -> Result<Self> {
        if interp.is_empty() || interp.len() != weights.len() {
            return Err(Error::InvalidConfig(
                "need at least one interpolation matrix, one weight each",
            ));
        }
        let n = average.order();
        if interp.iter().any(|v| v.order() != n) {
            return Err(Error::InvalidConfig(
                "interpolation matrices must match the average's order",
            ));
        }
        if weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
            return Err(Error::InvalidConfig("weights must be strictly positive"));
        }
        if weights.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidConfig("weights must be nonincreasing"));
        }
        if !(radius >= 0.0) {
            return Err(Error::InvalidConfig("radius must be nonnegative"));
        }
        Ok(Self {
            average,
            interp,
            weights,
            radius,
            orientation,
        })
    }

    pub fn average(&self) -> &SymmetricMatrix {
        &self.average
    }

    pub fn interp(&self) -> &[SymmetricMatrix] {
        &self.interp
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Channel count `n`.
    pub fn order(&self) -> usize {
        self.average.order()
    }

    /// Number of interpolation matrices `m`.
    pub fn interp_count(&self) -> usize {
        self.interp.len()
    }

    /// Largest Frobenius norm among the interpolation matrices; used for
    /// the degeneracy cutoff of the worst-case coefficients.
    pub fn max_interp_frobenius(&self) -> f64 {
        self.interp
            .iter()
            .fold(0.0, |acc, v| acc.max(v.frobenius_norm()))
    }

    /// Same model with the orientation replaced, for reuse of one PCA on
    /// both sides of the quotient.
    pub fn reoriented(&self, orientation: Orientation) -> Self {
        let mut out = self.clone();
        out.orientation = orientation;
        out
    }

    /// Same model with the radius replaced.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidConfig("radius must be nonnegative"));
        }
        let mut out = self.clone();
        out.radius = radius;
        Ok(out)
    }
}

/// Builds a tolerance model by PCA on the vectorized per-trial covariances.
///
/// The vectorized covariances are centered, scaled by `1/sqrt(N-1)`, and
/// collected as the columns of `M`; the eigendecomposition of the small
/// Gram matrix `MᵀM` then yields the same leading eigenpairs as the
/// `n² x n²` covariance `MMᵀ`. An eigenvector `u` with eigenvalue `w` maps
/// to the principal direction `M u`, normalized to unit 2-norm. Directions
/// are reshaped to `n x n` and symmetrized as `(X + Xᵀ)/2` with no
/// renormalization afterwards.
///
/// The retained count is `min(m_requested, #eigenvalues > 1e-10 * w_max)`;
/// if nothing exceeds the cutoff the trials carry no usable variability.
pub fn build_tolerance_model(
    ce: &CovarianceEnsemble,
    m_requested: usize,
    radius: f64,
    orientation: Orientation,
) -> Result<ToleranceModel> {
    if m_requested == 0 {
        return Err(Error::InvalidConfig("m_requested must be at least 1"));
    }
    let count = ce.len();
    if count < 2 {
        return Err(Error::InsufficientVariability);
    }
    let n = ce.order();
    let dim = n * n;

    // Columns of M: centered vectorizations scaled by 1/sqrt(N-1).
    let mut m = Array2::zeros((dim, count));
    for (idx, cov) in ce.per_trial().iter().enumerate() {
        let mut col = m.column_mut(idx);
        // Column-major stacking; the matrices are symmetric so the
        // stacking order has no effect beyond a convention.
        for (k, v) in cov.as_array().t().iter().enumerate() {
            col[k] = *v;
        }
    }
    let mean = m.sum_axis(ndarray::Axis(1)) / count as f64;
    let scale = 1.0 / ((count as f64 - 1.0).sqrt());
    for mut col in m.columns_mut() {
        for (k, v) in col.iter_mut().enumerate() {
            *v = (*v - mean[k]) * scale;
        }
    }

    let gram = SymmetricMatrix::from_upper_fn(count, |i, j| m.column(i).dot(&m.column(j)));
    let pairs = sym_eig(&gram)?;
    let w_max = *pairs.values.last().expect("count >= 2");
    let data_scale = mean.dot(&mean).max(1e-300);
    if w_max <= VARIABILITY_FLOOR * data_scale {
        return Err(Error::InsufficientVariability);
    }
    let cutoff = WEIGHT_TOL * w_max;
    let usable = pairs.values.iter().filter(|&&w| w > cutoff).count();
    if usable == 0 {
        return Err(Error::InsufficientVariability);
    }
    let m_kept = m_requested.min(usable);

    let mut weights = Vec::with_capacity(m_kept);
    let mut interp = Vec::with_capacity(m_kept);
    // Eigenvalues are ascending; walk the top m_kept in descending order.
    for rank in 0..m_kept {
        let idx = count - 1 - rank;
        let w = pairs.values[idx];
        let u = pairs.vectors.column(idx).to_owned();
        let mut direction: Array1<f64> = m.dot(&u);
        let norm = direction.dot(&direction).sqrt();
        direction.mapv_inplace(|v| v / norm);
        crate::eig::fix_vector_sign(&mut direction);
        // Undo the column-major stacking, then symmetrize.
        let mat = Array2::from_shape_fn((n, n), |(r, c)| direction[c * n + r]);
        interp.push(SymmetricMatrix::new(mat)?);
        weights.push(w);
    }

    ToleranceModel::new(ce.average().clone(), interp, weights, radius, orientation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::cholesky;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_trials(rng: &mut ChaCha8Rng, count: usize, n: usize, t: usize) -> Vec<Array2<f64>> {
        (0..count)
            .map(|_| Array2::from_shape_fn((n, t), |_| rng.random::<f64>() * 2.0 - 1.0))
            .collect()
    }

    #[test]
    fn center_scale_zero_mean_row_with_two_samples() {
        let y = array![[1.0, -1.0]];
        let out = center_scale_trial(&y).unwrap();
        assert_eq!(out, array![[1.0, -1.0]]);
    }

    #[test]
    fn center_scale_kills_constant_rows() {
        let y = array![[5.0, 5.0, 5.0]];
        let out = center_scale_trial(&y).unwrap();
        for v in out.iter() {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn center_scale_row_means_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = Array2::from_shape_fn((3, 10), |_| rng.random::<f64>() * 4.0 - 2.0);
        let out = center_scale_trial(&y).unwrap();
        for row in out.rows() {
            assert!((row.sum() / 10.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn center_scale_rejects_single_sample() {
        let y = array![[1.0], [2.0]];
        assert!(matches!(
            center_scale_trial(&y),
            Err(Error::DegenerateTrial(1))
        ));
    }

    #[test]
    fn centering_projector_is_idempotent() {
        // Applying the centering projector twice equals once; only the
        // 1/sqrt(t-1) rescale repeats.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = Array2::from_shape_fn((2, 7), |_| rng.random::<f64>() * 2.0 - 1.0);
        let once = center_scale_trial(&y).unwrap();
        let twice = center_scale_trial(&once).unwrap();
        let rescaled = &once / (6.0f64).sqrt();
        for (a, b) in twice.iter().zip(rescaled.iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn ensemble_single_identity_trial() {
        let ts = TrialSet::new(Condition::Minus, vec![Array2::eye(2)]).unwrap();
        let ce = covariance_ensemble(&ts, true).unwrap();
        assert_eq!(ce.len(), 1);
        assert_eq!(ce.per_trial()[0], SymmetricMatrix::identity(2));
        assert_eq!(ce.average(), &SymmetricMatrix::identity(2));
        assert!(!ce.average_repaired());
    }

    #[test]
    fn ensemble_average_is_entrywise_mean() {
        let t1 = array![[2.0, 0.0], [0.0, 1.0]];
        let t2 = array![[4.0, 0.0], [0.0, 3.0]];
        let ts = TrialSet::new(Condition::Plus, vec![t1, t2]).unwrap();
        let ce = covariance_ensemble(&ts, true).unwrap();
        // Covariances are diag(4,1) and diag(16,9); mean diag(10,5).
        assert!((ce.average().get(0, 0) - 10.0).abs() < 1e-12);
        assert!((ce.average().get(1, 1) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ensemble_of_synthetic_trials_is_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let trials = random_trials(&mut rng, 50, 4, 30);
        let ts = TrialSet::new(Condition::Minus, trials).unwrap();
        let ce = covariance_ensemble(&ts, false).unwrap();
        let min_eig = sym_eig(ce.average()).unwrap().values[0];
        assert!(min_eig > 0.0);
        assert!(cholesky(ce.average()).is_ok());
    }

    #[test]
    fn identical_trials_have_no_variability() {
        let t = array![[1.0, 2.0, 0.5], [0.0, 1.0, -1.0]];
        let ts = TrialSet::new(Condition::Minus, vec![t.clone(), t.clone(), t]).unwrap();
        let ce = covariance_ensemble(&ts, false).unwrap();
        assert!(matches!(
            build_tolerance_model(&ce, 3, 1.0, Orientation::Own),
            Err(Error::InsufficientVariability)
        ));
    }

    #[test]
    fn gram_trick_matches_direct_covariance() {
        // Direct oracle: eigendecompose the explicit n^2 x n^2 covariance of
        // the vectorized per-trial covariances.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let n = 2;
            let count = 3 + (rng.random::<u32>() % 3) as usize;
            let ts =
                TrialSet::new(Condition::Minus, random_trials(&mut rng, count, n, 8)).unwrap();
            let ce = covariance_ensemble(&ts, false).unwrap();
            let model = build_tolerance_model(&ce, 10, 1.0, Orientation::Own).unwrap();

            let dim = n * n;
            let mut vecs: Vec<Array1<f64>> = Vec::new();
            for cov in ce.per_trial() {
                let flat: Array1<f64> = cov.as_array().t().iter().copied().collect();
                vecs.push(flat);
            }
            let mean = vecs.iter().fold(Array1::<f64>::zeros(dim), |acc, v| acc + v)
                / count as f64;
            let mut gamma = Array2::<f64>::zeros((dim, dim));
            for v in &vecs {
                let d = v - &mean;
                for i in 0..dim {
                    for j in 0..dim {
                        gamma[(i, j)] += d[i] * d[j] / (count as f64 - 1.0);
                    }
                }
            }
            let direct = sym_eig(&SymmetricMatrix::new(gamma).unwrap()).unwrap();
            for (rank, (w, v)) in model.weights().iter().zip(model.interp()).enumerate() {
                let direct_w = direct.values[dim - 1 - rank];
                assert!(
                    (w - direct_w).abs() <= 1e-10 * direct_w.max(1.0),
                    "weight mismatch {w} vs {direct_w}"
                );
                // Compare the symmetrized reshaped direction up to sign.
                let du = direct.vectors.column(dim - 1 - rank);
                let dm = Array2::from_shape_fn((n, n), |(r, c)| du[c * n + r]);
                let dsym = SymmetricMatrix::new(dm).unwrap();
                let diff_plus = v.sub(&dsym).frobenius_norm();
                let diff_minus = v.add(&dsym).frobenius_norm();
                assert!(diff_plus.min(diff_minus) <= 1e-8);
            }
        }
    }

    #[test]
    fn truncation_to_usable_rank() {
        // Five distinct trials span at most rank 4 after centering; asking
        // for 10 keeps 4.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ts = TrialSet::new(Condition::Plus, random_trials(&mut rng, 5, 3, 12)).unwrap();
        let ce = covariance_ensemble(&ts, false).unwrap();
        let model = build_tolerance_model(&ce, 10, 0.5, Orientation::Other).unwrap();
        assert_eq!(model.interp_count(), 4);
        let mut sorted = model.weights().to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(sorted, model.weights());
    }

    #[test]
    fn interpolation_matrices_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let ts = TrialSet::new(Condition::Minus, random_trials(&mut rng, 6, 3, 10)).unwrap();
        let ce = covariance_ensemble(&ts, false).unwrap();
        let model = build_tolerance_model(&ce, 4, 1.0, Orientation::Own).unwrap();
        for v in model.interp() {
            let a = v.as_array();
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(a[(i, j)], a[(j, i)]);
                }
            }
        }
    }
}
