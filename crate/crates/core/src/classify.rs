//! Log-variance features, Fisher discriminant training, and scoring.
//!
//! A trial filtered by the two principal spatial filters is summarized by
//! the two log-variances `[log(x₋ᵀYYᵀx₋), log(x₊ᵀYYᵀx₊)]`. A linear
//! classifier `sign(aᵀf - b)` on those features is trained by Fisher's
//! discriminant on the class means and the pooled scatter, and scored by
//! the balanced classification rate (the mean of the per-class
//! accuracies, with a zero decision value counting as incorrect for both
//! classes).

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Relative determinant cutoff under which the pooled scatter counts as
/// singular and is regularized.
const SCATTER_SINGULAR_TOL: f64 = 1e-12;

/// Ridge added to a singular pooled scatter, relative to its mean diagonal.
const SCATTER_RIDGE: f64 = 1e-10;

/// Log-variance feature of one trial: entry 0 under the minus-condition
/// filter, entry 1 under the plus-condition filter.
pub type FeatureVector = [f64; 2];

/// Two-class linear classifier on log-variance features.
#[derive(Debug, Clone)]
pub struct LdaClassifier {
    /// Unit-norm projection.
    pub projection: [f64; 2],
    /// Decision offset.
    pub offset: f64,
    /// True when the pooled scatter needed regularization.
    pub scatter_repaired: bool,
}

impl LdaClassifier {
    /// Decision value `aᵀf - b`; positive assigns the minus condition.
    pub fn decision(&self, feature: &FeatureVector) -> f64 {
        self.projection[0] * feature[0] + self.projection[1] * feature[1] - self.offset
    }
}

/// Extracts the log-variance feature of a trial under the two filters.
///
/// Fails when either filtered variance is nonpositive (the filter is
/// orthogonal to the trial's range).
pub fn log_variance(
    trial: &Array2<f64>,
    filter_minus: &Array1<f64>,
    filter_plus: &Array1<f64>,
) -> Result<FeatureVector> {
    if filter_minus.iter().all(|&v| v == 0.0) || filter_plus.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut feature = [0.0; 2];
    for (slot, filter) in [filter_minus, filter_plus].into_iter().enumerate() {
        let filtered = trial.t().dot(filter);
        let variance = filtered.dot(&filtered);
        if variance <= 0.0 {
            return Err(Error::DegenerateVariance);
        }
        feature[slot] = variance.ln();
    }
    Ok(feature)
}

fn mean(features: &[FeatureVector]) -> [f64; 2] {
    let n = features.len() as f64;
    let mut m = [0.0; 2];
    for f in features {
        m[0] += f[0];
        m[1] += f[1];
    }
    [m[0] / n, m[1] / n]
}

fn scatter(features: &[FeatureVector], center: &[f64; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for f in features {
        let d = [f[0] - center[0], f[1] - center[1]];
        c[0][0] += d[0] * d[0];
        c[0][1] += d[0] * d[1];
        c[1][1] += d[1] * d[1];
    }
    c[1][0] = c[0][1];
    c
}

/// Fisher discriminant fit on the two feature clouds.
///
/// The projection solves `(C₋ + C₊) ã = m₋ - m₊` with the plain
/// (unnormalized) scatter matrices and is scaled to unit norm; the offset
/// is the projected midpoint of the class means. A singular pooled scatter
/// is regularized with a tiny ridge before solving; if it stays singular,
/// or the class means coincide, the fit fails.
pub fn fit_lda(
    features_minus: &[FeatureVector],
    features_plus: &[FeatureVector],
) -> Result<LdaClassifier> {
    if features_minus.len() < 2 || features_plus.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least two feature vectors per class",
        ));
    }
    let m_minus = mean(features_minus);
    let m_plus = mean(features_plus);
    let c_minus = scatter(features_minus, &m_minus);
    let c_plus = scatter(features_plus, &m_plus);
    let mut s = [
        [c_minus[0][0] + c_plus[0][0], c_minus[0][1] + c_plus[0][1]],
        [c_minus[1][0] + c_plus[1][0], c_minus[1][1] + c_plus[1][1]],
    ];

    let scale = 0.5 * (s[0][0] + s[1][1]);
    let mut det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let mut scatter_repaired = false;
    if det.abs() <= SCATTER_SINGULAR_TOL * scale * scale {
        let ridge = SCATTER_RIDGE * scale;
        s[0][0] += ridge;
        s[1][1] += ridge;
        scatter_repaired = true;
        det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        if det.abs() <= f64::MIN_POSITIVE {
            return Err(Error::SingularScatter);
        }
    }

    let rhs = [m_minus[0] - m_plus[0], m_minus[1] - m_plus[1]];
    let raw = [
        (s[1][1] * rhs[0] - s[0][1] * rhs[1]) / det,
        (s[0][0] * rhs[1] - s[1][0] * rhs[0]) / det,
    ];
    let norm = (raw[0] * raw[0] + raw[1] * raw[1]).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::SingularScatter);
    }
    let projection = [raw[0] / norm, raw[1] / norm];
    let offset = 0.5
        * (projection[0] * (m_minus[0] + m_plus[0]) + projection[1] * (m_minus[1] + m_plus[1]));
    Ok(LdaClassifier {
        projection,
        offset,
        scatter_repaired,
    })
}

/// Balanced classification rate: the mean of the per-class accuracies.
///
/// A minus-condition trial counts as correct when the decision value is
/// strictly positive, a plus-condition trial when strictly negative; a
/// decision value of exactly zero is incorrect for both.
pub fn classification_rate(
    classifier: &LdaClassifier,
    features_minus: &[FeatureVector],
    features_plus: &[FeatureVector],
) -> Result<f64> {
    if features_minus.is_empty() || features_plus.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let correct_minus = features_minus
        .iter()
        .filter(|f| classifier.decision(f) > 0.0)
        .count() as f64;
    let correct_plus = features_plus
        .iter()
        .filter(|f| classifier.decision(f) < 0.0)
        .count() as f64;
    Ok(0.5
        * (correct_minus / features_minus.len() as f64
            + correct_plus / features_plus.len() as f64))
}

/// Feature extraction over a batch of trials.
pub fn feature_batch(
    trials: &[Array2<f64>],
    filter_minus: &Array1<f64>,
    filter_plus: &Array1<f64>,
) -> Result<Vec<FeatureVector>> {
    trials
        .iter()
        .map(|t| log_variance(t, filter_minus, filter_plus))
        .collect()
}

/// Runs the standard evaluation: features and a discriminant from the
/// training trials, balanced rate on the testing trials. All trials are
/// expected to be preprocessed consistently by the caller.
pub fn evaluate_filters(
    filter_minus: &Array1<f64>,
    filter_plus: &Array1<f64>,
    train_minus: &[Array2<f64>],
    train_plus: &[Array2<f64>],
    test_minus: &[Array2<f64>],
    test_plus: &[Array2<f64>],
) -> Result<(f64, LdaClassifier)> {
    let train_f_minus = feature_batch(train_minus, filter_minus, filter_plus)?;
    let train_f_plus = feature_batch(train_plus, filter_minus, filter_plus)?;
    let classifier = fit_lda(&train_f_minus, &train_f_plus)?;
    let test_f_minus = feature_batch(test_minus, filter_minus, filter_plus)?;
    let test_f_plus = feature_batch(test_plus, filter_minus, filter_plus)?;
    let rate = classification_rate(&classifier, &test_f_minus, &test_f_plus)?;
    Ok((rate, classifier))
}
