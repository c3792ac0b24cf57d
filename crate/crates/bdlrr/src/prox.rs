//! Proximal operators used by every solver: scalar and elementwise
//! soft-thresholding, singular value thresholding, and row-group shrinkage.
//!
//! All four are pure functions and exact minimizers of their respective
//! objectives:
//!
//! ```text
//! soft_threshold(x, t)       minimizes  t|q|                 + 1/2 (q - x)^2
//! svt(M, t)                  minimizes  t‖P‖_*               + 1/2 ‖P - M‖_F^2
//! weighted_l1_prox(M, W, t)  minimizes  t Σ W_ij |Q_ij|      + 1/2 ‖Q - M‖_F^2
//! row_group_shrink(G, t)     minimizes  t Σ_i ‖E^i‖_2        + 1/2 ‖E - G‖_F^2
//! ```

use crate::error::{Error, Result};
use crate::matrix::{svd_thin, DenseMatrix};

/// Scalar shrinkage: `x - t` above `t`, `x + t` below `-t`, zero in between.
#[inline]
pub fn soft_threshold(x: f64, threshold: f64) -> f64 {
    debug_assert!(threshold >= 0.0);
    if x > threshold {
        x - threshold
    } else if x < -threshold {
        x + threshold
    } else {
        0.0
    }
}

/// Singular value thresholding: soft-threshold every singular value of `m`
/// by `tau` and reconstruct.
pub fn svt(m: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if tau < 0.0 {
        return Err(Error::Validation(format!(
            "svt threshold must be nonnegative, got {tau}"
        )));
    }
    let svd = svd_thin(m)?;
    // U * S_tau(Sigma): scale columns of U, drop the explicit diagonal.
    let shrunk = DenseMatrix::from_fn(svd.u.nrows(), svd.singular_values.len(), |i, j| {
        svd.u[(i, j)] * soft_threshold(svd.singular_values[j], tau)
    });
    Ok(shrunk * svd.v.transpose())
}

/// Elementwise weighted shrinkage: entry `(i, j)` is
/// `soft_threshold(M_ij, tau * W_ij)`.
pub fn weighted_l1_prox(m: &DenseMatrix, weights: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if m.shape() != weights.shape() {
        return Err(Error::dimension(
            "weighted_l1_prox",
            format!("{}x{}", m.nrows(), m.ncols()),
            format!("{}x{}", weights.nrows(), weights.ncols()),
        ));
    }
    if tau < 0.0 || weights.iter().any(|&w| w < 0.0) {
        return Err(Error::Validation(
            "weighted_l1_prox requires tau >= 0 and nonnegative weights".into(),
        ));
    }
    Ok(DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        soft_threshold(m[(i, j)], tau * weights[(i, j)])
    }))
}

/// Row-group shrinkage: row `i` is scaled by `(‖g_i‖ - tau) / ‖g_i‖` when its
/// norm exceeds `tau`, and zeroed otherwise.
pub fn row_group_shrink(gamma: &DenseMatrix, tau: f64) -> DenseMatrix {
    debug_assert!(tau >= 0.0);
    let mut out = DenseMatrix::zeros(gamma.nrows(), gamma.ncols());
    for i in 0..gamma.nrows() {
        let row_norm = gamma.row(i).norm();
        if row_norm > tau {
            let scale = (row_norm - tau) / row_norm;
            for j in 0..gamma.ncols() {
                out[(i, j)] = scale * gamma[(i, j)];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{l21_row_norm, nuclear_norm};
    use nalgebra::DVector;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn soft_threshold_reference_points() {
        assert_eq!(soft_threshold(5.0, 2.0), 3.0);
        assert_eq!(soft_threshold(-1.5, 2.0), 0.0);
        assert_eq!(soft_threshold(-5.0, 2.0), -3.0);
        assert_eq!(soft_threshold(2.0, 2.0), 0.0);
    }

    #[test]
    fn soft_threshold_zero_threshold_is_identity() {
        let mut r = rng(1);
        for _ in 0..100 {
            let x = r.gen::<f64>() * 20.0 - 10.0;
            assert_eq!(soft_threshold(x, 0.0), x);
        }
    }

    // Closed form sign(x) * max(|x| - t, 0) on random inputs.
    #[test]
    fn soft_threshold_matches_closed_form() {
        let mut r = rng(2);
        for _ in 0..200 {
            let x = r.gen::<f64>() * 10.0 - 5.0;
            let t = r.gen::<f64>() * 3.0;
            let expected = x.signum() * (x.abs() - t).max(0.0);
            assert!((soft_threshold(x, t) - expected).abs() < 1e-15);
        }
    }

    // 1-D grid-search oracle for the scalar prox objective.
    fn grid_search_min(m: f64, w: f64, tau: f64) -> f64 {
        let objective = |q: f64| tau * w * q.abs() + 0.5 * (q - m) * (q - m);
        let mut best_q = -10.0f64;
        let mut best = objective(best_q);
        let mut q = -10.0f64;
        while q <= 10.0 {
            let v = objective(q);
            if v < best {
                best = v;
                best_q = q;
            }
            q += 1e-4;
        }
        best_q
    }

    #[test]
    fn weighted_prox_matches_grid_search() {
        let mut r = rng(3);
        for _ in 0..100 {
            let m = r.gen::<f64>() * 8.0 - 4.0;
            let w = r.gen::<f64>() * 2.0;
            let tau = r.gen::<f64>() * 2.0;
            let got = weighted_l1_prox(
                &DenseMatrix::from_element(1, 1, m),
                &DenseMatrix::from_element(1, 1, w),
                tau,
            )
            .unwrap()[(0, 0)];
            let oracle = grid_search_min(m, w, tau);
            assert!(
                (got - oracle).abs() < 2e-4,
                "prox {got} vs grid {oracle} for (m={m}, w={w}, tau={tau})"
            );
        }
    }

    #[test]
    fn weighted_prox_scalar_and_zero_weight_cases() {
        let m = DenseMatrix::from_element(1, 1, 5.0);
        let w = DenseMatrix::from_element(1, 1, 2.0);
        assert_eq!(weighted_l1_prox(&m, &w, 1.0).unwrap()[(0, 0)], 3.0);

        let m = random_matrix(4, 5, &mut rng(4));
        let zero_w = DenseMatrix::zeros(4, 5);
        assert_eq!(weighted_l1_prox(&m, &zero_w, 3.0).unwrap(), m);
    }

    #[test]
    fn weighted_prox_shape_mismatch_errors() {
        let m = DenseMatrix::zeros(2, 2);
        let w = DenseMatrix::zeros(2, 3);
        assert!(weighted_l1_prox(&m, &w, 1.0).is_err());
    }

    // Non-expansiveness per entry.
    #[test]
    fn weighted_prox_is_nonexpansive() {
        let mut r = rng(5);
        let w = random_matrix(6, 6, &mut r).abs();
        let a = random_matrix(6, 6, &mut r);
        let b = random_matrix(6, 6, &mut r);
        let pa = weighted_l1_prox(&a, &w, 0.7).unwrap();
        let pb = weighted_l1_prox(&b, &w, 0.7).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!(
                    (pa[(i, j)] - pb[(i, j)]).abs() <= (a[(i, j)] - b[(i, j)]).abs() + 1e-15
                );
            }
        }
    }

    #[test]
    fn svt_diagonal_case() {
        let m = DenseMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 0.5]));
        let out = svt(&m, 1.0).unwrap();
        let expected = DenseMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0, 0.0]));
        assert!((out - expected).norm() < 1e-10);
    }

    #[test]
    fn svt_zero_threshold_is_identity() {
        let m = random_matrix(5, 4, &mut rng(6));
        let out = svt(&m, 0.0).unwrap();
        assert!((out - &m).norm() < 1e-10);
    }

    // Singular values of the output equal max(sigma_i - tau, 0).
    #[test]
    fn svt_shifts_singular_values() {
        let mut r = rng(7);
        for _ in 0..5 {
            let m = random_matrix(6, 8, &mut r);
            let tau = r.gen::<f64>();
            let sig_in = svd_thin(&m).unwrap().singular_values;
            let sig_out = svd_thin(&svt(&m, tau).unwrap()).unwrap().singular_values;
            for k in 0..sig_in.len() {
                assert!((sig_out[k] - (sig_in[k] - tau).max(0.0)).abs() < 1e-10);
            }
        }
    }

    // Perturbation-optimality oracle on tau * ‖P‖_* + 1/2 ‖P - M‖_F^2.
    #[test]
    fn svt_beats_perturbations() {
        let mut r = rng(8);
        let m = random_matrix(8, 6, &mut r);
        let tau = 0.7;
        let objective = |p: &DenseMatrix| {
            tau * nuclear_norm(p).unwrap() + 0.5 * (p - &m).norm_squared()
        };
        let star = svt(&m, tau).unwrap();
        let f_star = objective(&star);
        assert!(f_star <= objective(&m) + 1e-12);
        for _ in 0..1000 {
            let dir = random_matrix(8, 6, &mut r);
            let scale = 10f64.powf(r.gen::<f64>() * 4.0 - 4.0); // 1e-4 ..= 1
            let step = scale / dir.norm();
            let perturbed = &star + dir * step;
            assert!(f_star <= objective(&perturbed) + 1e-12);
        }
    }

    #[test]
    fn row_shrink_reference_rows() {
        let g = DenseMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let out = row_group_shrink(&g, 2.0);
        assert!((out[(0, 0)] - 1.8).abs() < 1e-12);
        assert!((out[(0, 1)] - 2.4).abs() < 1e-12);

        let small = DenseMatrix::from_row_slice(1, 2, &[0.1, 0.0]);
        assert_eq!(row_group_shrink(&small, 2.0), DenseMatrix::zeros(1, 2));
    }

    // Output row norms are exactly max(‖g_i‖ - tau, 0).
    #[test]
    fn row_shrink_never_grows_rows() {
        let mut r = rng(9);
        let g = random_matrix(6, 10, &mut r);
        let tau = 0.5;
        let out = row_group_shrink(&g, tau);
        for i in 0..6 {
            let before = g.row(i).norm();
            let after = out.row(i).norm();
            assert!(after <= before + 1e-15);
            assert!((after - (before - tau).max(0.0)).abs() < 1e-12);
        }
    }

    // Perturbation-optimality oracle on tau * Σ ‖row‖ + 1/2 ‖E - G‖_F^2,
    // probing random per-row rescalings of the minimizer.
    #[test]
    fn row_shrink_beats_row_scalings() {
        let mut r = rng(10);
        let g = random_matrix(6, 10, &mut r);
        let tau = 0.5;
        let objective = |e: &DenseMatrix| tau * l21_row_norm(e) + 0.5 * (e - &g).norm_squared();
        let star = row_group_shrink(&g, tau);
        let f_star = objective(&star);
        assert!(f_star <= objective(&g) + 1e-12);
        assert!(f_star <= objective(&DenseMatrix::zeros(6, 10)) + 1e-12);
        for _ in 0..1000 {
            let mut cand = star.clone();
            for i in 0..6 {
                let alpha = r.gen::<f64>() * 2.0;
                for j in 0..10 {
                    cand[(i, j)] *= alpha;
                }
            }
            assert!(f_star <= objective(&cand) + 1e-12);
        }
    }
}
