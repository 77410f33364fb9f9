//! Seeded generation of synthetic two-condition trial sets.
//!
//! Trials follow a linear mixing model: each time sample is a rotation of
//! stacked source signals plus nonstationary noise,
//!
//! ```text
//!     column = A [s_disc; s_nondisc] + e.
//! ```
//!
//! The leading sources are discriminative (their variances differ between
//! the two conditions), the rest keep unit variance under both, and the
//! noise variance models artifacts: moderate for training data, much
//! larger for testing data. One mixing matrix is drawn per dataset and
//! shared by both conditions and all trials.
//!
//! Reproducibility: the generator is a ChaCha stream cipher RNG keyed by
//! the dataset seed. Stream 0 draws the mixing matrix; trial `i` of
//! condition index `c` draws from stream `1 + c * trials + i`. Output is
//! therefore bit-identical for a given spec, independent of scheduling.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::covariance::{Condition, TrialSet};
use crate::error::{Error, Result};

/// Configuration of the synthetic generator. Variances are variances, not
/// standard deviations.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    /// Channel count per trial.
    pub channels: usize,
    /// Time samples per trial.
    pub samples: usize,
    /// Variances of the discriminative sources under the minus condition.
    pub disc_variances_minus: Vec<f64>,
    /// Variances of the discriminative sources under the plus condition.
    pub disc_variances_plus: Vec<f64>,
    /// Variance shared by all nondiscriminative sources.
    pub nondisc_variance: f64,
    /// Variance of the additive nonstationary noise.
    pub noise_variance: f64,
    /// Trials generated per condition.
    pub trials_per_condition: usize,
    /// Seed of the trial draws.
    pub seed: u64,
    /// Seed of the mixing matrix. Train and test sets of one experiment
    /// share this (one head geometry) while drawing trials independently.
    pub mixing_seed: u64,
    /// Replace the random rotation by the identity (diagnostics only).
    pub identity_mixing: bool,
}

/// Offset separating the trial streams of a test set from its training
/// counterpart with the same experiment seed.
const TEST_DRAW_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

impl Default for SynthSpec {
    fn default() -> Self {
        Self::train(0)
    }
}

impl SynthSpec {
    /// Standard training configuration: 10 channels, 200 samples, two
    /// discriminative sources with variances (0.2, 1.4) against
    /// (1.8, 0.6), unit nondiscriminative sources, noise variance 2, and
    /// 50 trials per condition.
    pub fn train(seed: u64) -> Self {
        Self {
            channels: 10,
            samples: 200,
            disc_variances_minus: vec![0.2, 1.4],
            disc_variances_plus: vec![1.8, 0.6],
            nondisc_variance: 1.0,
            noise_variance: 2.0,
            trials_per_condition: 50,
            seed,
            mixing_seed: seed,
            identity_mixing: false,
        }
    }

    /// Testing counterpart of [`SynthSpec::train`] for the same experiment
    /// seed: the same mixing matrix, independent trial draws, and noise
    /// variance 30.
    pub fn test(seed: u64) -> Self {
        Self {
            noise_variance: 30.0,
            seed: seed.wrapping_add(TEST_DRAW_OFFSET),
            mixing_seed: seed,
            ..Self::train(seed)
        }
    }

    /// Number of discriminative sources.
    pub fn discriminative_count(&self) -> usize {
        self.disc_variances_minus.len()
    }

    fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.samples == 0 || self.trials_per_condition == 0 {
            return Err(Error::InvalidConfig(
                "channels, samples, and trial count must be positive",
            ));
        }
        if self.disc_variances_minus.len() != self.disc_variances_plus.len() {
            return Err(Error::InvalidConfig(
                "both conditions need the same number of discriminative sources",
            ));
        }
        if self.discriminative_count() > self.channels {
            return Err(Error::InvalidConfig(
                "more discriminative sources than channels",
            ));
        }
        let all_positive = self
            .disc_variances_minus
            .iter()
            .chain(self.disc_variances_plus.iter())
            .chain(std::iter::once(&self.nondisc_variance))
            .all(|&v| v > 0.0);
        if !all_positive {
            return Err(Error::InvalidConfig("source variances must be positive"));
        }
        if self.noise_variance < 0.0 {
            return Err(Error::InvalidConfig("noise variance must be nonnegative"));
        }
        Ok(())
    }
}

/// Draws a rotation matrix (orthogonal, determinant +1) from the
/// orthonormalization of a standard Gaussian matrix.
///
/// Householder QR of the Gaussian sample gives an orthogonal factor; the
/// factor's columns are sign-fixed so the triangular factor has a positive
/// diagonal, and the determinant is corrected to +1 by flipping the last
/// column when needed.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Array2<f64> {
    assert!(n >= 1);
    let mut a = Array2::from_shape_fn((n, n), |_| {
        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
    });
    let mut q: Array2<f64> = Array2::eye(n);
    let mut det_sign = 1.0f64;

    // Householder sweep: A becomes R while the reflections accumulate in Q.
    for k in 0..n {
        let mut v = Array1::zeros(n - k);
        for i in k..n {
            v[i - k] = a[(i, k)];
        }
        let alpha = v.dot(&v).sqrt();
        if alpha == 0.0 {
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let v_sq = v.dot(&v);
        if v_sq == 0.0 {
            continue;
        }
        det_sign = -det_sign; // each reflection flips orientation
        for col in k..n {
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i - k] * a[(i, col)];
            }
            let f = 2.0 * dot / v_sq;
            for i in k..n {
                a[(i, col)] -= f * v[i - k];
            }
        }
        for col in 0..n {
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i - k] * q[(i, col)];
            }
            let f = 2.0 * dot / v_sq;
            for i in k..n {
                q[(i, col)] -= f * v[i - k];
            }
        }
    }
    // q currently holds the transpose of the orthogonal factor.
    let mut q = q.t().to_owned();
    for k in 0..n {
        if a[(k, k)] < 0.0 {
            for i in 0..n {
                q[(i, k)] = -q[(i, k)];
            }
            det_sign = -det_sign;
        }
    }
    if det_sign < 0.0 {
        let last = n - 1;
        for i in 0..n {
            q[(i, last)] = -q[(i, last)];
        }
    }
    q
}

fn trial_stream(spec: &SynthSpec, condition_index: usize, trial_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1 + (condition_index * spec.trials_per_condition + trial_index) as u64);
    rng
}

/// Generates the two trial sets of a dataset. Pure function of the spec,
/// seed included: the same spec yields bit-identical output.
pub fn generate(spec: &SynthSpec) -> Result<(TrialSet, TrialSet)> {
    spec.validate()?;
    let n = spec.channels;
    let mixing = if spec.identity_mixing {
        Array2::eye(n)
    } else {
        let mut master = ChaCha8Rng::seed_from_u64(spec.mixing_seed);
        master.set_stream(0);
        random_rotation(n, &mut master)
    };

    let noise_std = spec.noise_variance.sqrt();
    let mut sets = Vec::with_capacity(2);
    for (condition_index, condition) in [Condition::Minus, Condition::Plus].iter().enumerate() {
        let disc = match condition {
            Condition::Minus => &spec.disc_variances_minus,
            Condition::Plus => &spec.disc_variances_plus,
        };
        let source_dists: Vec<Normal<f64>> = (0..n)
            .map(|i| {
                let variance = if i < disc.len() {
                    disc[i]
                } else {
                    spec.nondisc_variance
                };
                Normal::new(0.0, variance.sqrt()).expect("finite std")
            })
            .collect();
        let noise_dist = Normal::new(0.0, noise_std).expect("finite std");

        let mut trials = Vec::with_capacity(spec.trials_per_condition);
        for trial_index in 0..spec.trials_per_condition {
            let mut rng = trial_stream(spec, condition_index, trial_index);
            let mut trial = Array2::zeros((n, spec.samples));
            let mut sources = Array1::zeros(n);
            for col in 0..spec.samples {
                for (i, dist) in source_dists.iter().enumerate() {
                    sources[i] = dist.sample(&mut rng);
                }
                let mixed = mixing.dot(&sources);
                for row in 0..n {
                    trial[(row, col)] = mixed[row] + noise_dist.sample(&mut rng);
                }
            }
            trials.push(trial);
        }
        sets.push(TrialSet::new(*condition, trials)?);
    }
    let plus = sets.pop().expect("two sets");
    let minus = sets.pop().expect("two sets");
    Ok((minus, plus))
}
