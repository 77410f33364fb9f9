//! Property tests of the structural invariants.

use ndarray::{Array1, Array2};
use proptest::prelude::*;

use mmcsp_core::classify::{feature_batch, fit_lda};
use mmcsp_core::covariance::{center_scale_trial, Orientation, ToleranceModel};
use mmcsp_core::eig::{gen_eig_definite, sym_eig, SymmetricMatrix};
use mmcsp_core::kernel::{kernel_eval, objective, worst_case_sigma, KernelPair};

fn matrix_from(rows: usize, cols: usize, data: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |(i, j)| data[i * cols + j])
}

fn spd_from(n: usize, data: &[f64]) -> SymmetricMatrix {
    let g = matrix_from(n, n, data);
    let gram = g.dot(&g.t()) / n as f64;
    SymmetricMatrix::new(gram + Array2::<f64>::eye(n)).unwrap()
}

fn model_from(
    n: usize,
    m: usize,
    avg_data: &[f64],
    interp_data: &[f64],
    radius: f64,
    orientation: Orientation,
) -> ToleranceModel {
    let average = spd_from(n, avg_data);
    let interp: Vec<SymmetricMatrix> = (0..m)
        .map(|k| {
            let v = SymmetricMatrix::new(matrix_from(n, n, &interp_data[k * n * n..])).unwrap();
            let norm = v.frobenius_norm().max(1e-6);
            v.scaled(1.0 / norm)
        })
        .collect();
    let weights: Vec<f64> = (0..m).map(|k| 1.0 / (k as f64 + 1.0)).collect();
    ToleranceModel::new(average, interp, weights, radius, orientation).unwrap()
}

fn unit_from(data: &[f64]) -> Option<Array1<f64>> {
    let x = Array1::from_vec(data.to_vec());
    let norm = x.dot(&x).sqrt();
    (norm > 1e-6).then(|| &x / norm)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn centering_kills_row_means_and_is_idempotent(
        rows in 1usize..4,
        cols in 2usize..9,
        data in prop::collection::vec(-5.0f64..5.0, 32),
    ) {
        let trial = Array2::from_shape_fn((rows, cols), |(i, j)| data[(i * cols + j) % data.len()]);
        let once = center_scale_trial(&trial).unwrap();
        for row in once.rows() {
            prop_assert!((row.sum() / cols as f64).abs() <= 1e-12);
        }
        // Centering an already-centered matrix only repeats the rescale.
        let twice = center_scale_trial(&once).unwrap();
        let rescaled = &once / ((cols as f64 - 1.0).sqrt());
        for (a, b) in twice.iter().zip(rescaled.iter()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetric_arithmetic_stays_bitwise_symmetric(
        data in prop::collection::vec(-10.0f64..10.0, 16),
        scale in -3.0f64..3.0,
    ) {
        let a = SymmetricMatrix::new(matrix_from(4, 4, &data)).unwrap();
        let b = a.scaled(scale).add(&a);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(b.get(i, j), b.get(j, i));
            }
        }
    }

    #[test]
    fn generalized_eigenvalues_survive_congruence(
        a_data in prop::collection::vec(-2.0f64..2.0, 16),
        b_data in prop::collection::vec(-2.0f64..2.0, 16),
        c_data in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let a = spd_from(4, &a_data);
        let b = spd_from(4, &b_data);
        let c = matrix_from(4, 4, &c_data) + Array2::<f64>::eye(4) * 2.0;
        let ac = SymmetricMatrix::new(c.t().dot(a.as_array()).dot(&c)).unwrap();
        let bc = SymmetricMatrix::new(c.t().dot(b.as_array()).dot(&c)).unwrap();
        let base = gen_eig_definite(&a, &b).unwrap();
        let cong = gen_eig_definite(&ac, &bc).unwrap();
        for (x, y) in base.values.iter().zip(cong.values.iter()) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn second_order_matrix_invariants(
        avg in prop::collection::vec(-2.0f64..2.0, 9),
        interp in prop::collection::vec(-2.0f64..2.0, 27),
        x_data in prop::collection::vec(-1.0f64..1.0, 3),
        radius in 0.0f64..1.0,
        own in any::<bool>(),
    ) {
        let Some(x) = unit_from(&x_data) else { return Ok(()); };
        let orientation = if own { Orientation::Own } else { Orientation::Other };
        let model = model_from(3, 3, &avg, &interp, radius, orientation);
        let eval = kernel_eval(&model, &x).unwrap();

        // Bitwise symmetry.
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(eval.h.get(i, j), eval.h.get(j, i));
            }
        }
        // The second-order matrix fixes x exactly like the worst case.
        let hx = eval.h.matvec(&x);
        let sx = eval.sigma.matvec(&x);
        let diff = (&hx - &sx).iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = sx.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-10 * scale);
        // Signed semidefiniteness of the correction.
        let eigs = sym_eig(&eval.h.sub(&eval.sigma)).unwrap().values;
        match orientation {
            Orientation::Own => prop_assert!(eigs[0] >= -1e-10),
            Orientation::Other => prop_assert!(*eigs.last().unwrap() <= 1e-10),
        }
    }

    #[test]
    fn quotient_is_scale_invariant(
        avg1 in prop::collection::vec(-2.0f64..2.0, 9),
        avg2 in prop::collection::vec(-2.0f64..2.0, 9),
        interp in prop::collection::vec(-2.0f64..2.0, 27),
        x_data in prop::collection::vec(-1.0f64..1.0, 3),
        gamma in prop::sample::select(vec![2.0f64, -1.0, 0.125, 40.0]),
    ) {
        let Some(x) = unit_from(&x_data) else { return Ok(()); };
        let pair = KernelPair::new(
            model_from(3, 3, &avg1, &interp, 0.4, Orientation::Own),
            model_from(3, 3, &avg2, &interp, 0.4, Orientation::Other),
        ).unwrap();
        let q = objective(&pair, &x).unwrap();
        let q_scaled = objective(&pair, &(&x * gamma)).unwrap();
        prop_assert!((q - q_scaled).abs() <= 1e-12);
        let sigma = worst_case_sigma(pair.own(), &x).unwrap();
        let sigma_scaled = worst_case_sigma(pair.own(), &(&x * gamma)).unwrap();
        prop_assert!(sigma.sub(&sigma_scaled).max_abs() <= 1e-12);
    }

    #[test]
    fn positive_filter_scaling_leaves_decisions_unchanged(
        trial_data in prop::collection::vec(-2.0f64..2.0, 60),
        scale_minus in 0.1f64..10.0,
        scale_plus in 0.1f64..10.0,
    ) {
        // Two tiny classes of trials; rescaling either filter by a positive
        // constant shifts the features by a constant, which the refit
        // offset absorbs while the projection is unchanged.
        let trials: Vec<Array2<f64>> = (0..4)
            .map(|k| Array2::from_shape_fn((3, 5), |(i, j)| {
                trial_data[(k * 15 + i * 5 + j) % trial_data.len()] + (k as f64) * 0.1 + 0.01 * (i as f64)
            }))
            .collect();
        let fm = Array1::from_vec(vec![1.0, 0.5, -0.25]);
        let fp = Array1::from_vec(vec![-0.5, 1.0, 0.75]);
        let features = |fmv: &Array1<f64>, fpv: &Array1<f64>| -> Option<(Vec<_>, Vec<_>)> {
            let a = feature_batch(&trials[..2], fmv, fpv).ok()?;
            let b = feature_batch(&trials[2..], fmv, fpv).ok()?;
            Some((a, b))
        };
        let Some((base_minus, base_plus)) = features(&fm, &fp) else { return Ok(()); };
        let Some((scaled_minus, scaled_plus)) = features(&(&fm * scale_minus), &(&fp * scale_plus)) else { return Ok(()); };
        let Ok(base) = fit_lda(&base_minus, &base_plus) else { return Ok(()); };
        let Ok(scaled) = fit_lda(&scaled_minus, &scaled_plus) else { return Ok(()); };
        prop_assert!((base.projection[0] - scaled.projection[0]).abs() <= 1e-9);
        prop_assert!((base.projection[1] - scaled.projection[1]).abs() <= 1e-9);
        for (f_base, f_scaled) in base_minus.iter().chain(base_plus.iter())
            .zip(scaled_minus.iter().chain(scaled_plus.iter()))
        {
            let d_base = base.decision(f_base);
            let d_scaled = scaled.decision(f_scaled);
            prop_assert!((d_base - d_scaled).abs() <= 1e-9 * d_base.abs().max(1.0));
        }
    }
}
