//! Dense-matrix carrier type, thin SVD, and the matrix norms used by the
//! solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Column-major dense real matrix; the universal carrier for data, masks,
/// representations and multipliers.
pub type DenseMatrix = DMatrix<f64>;

/// Thin singular value decomposition `M = U * diag(sigma) * V^T` with
/// `r = min(rows, cols)` retained columns.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `d x r`, orthonormal columns.
    pub u: DenseMatrix,
    /// Nonincreasing, nonnegative.
    pub singular_values: DVector<f64>,
    /// `n x r`, orthonormal columns.
    pub v: DenseMatrix,
}

impl SvdResult {
    /// `U * diag(sigma) * V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let scaled = DenseMatrix::from_fn(self.u.nrows(), self.singular_values.len(), |i, j| {
            self.u[(i, j)] * self.singular_values[j]
        });
        scaled * self.v.transpose()
    }

    /// Number of singular values above `1e-12 * sigma_1`.
    ///
    /// Diagnostic only; thresholding operators always use raw values.
    pub fn numerical_rank(&self) -> usize {
        if self.singular_values.is_empty() {
            return 0;
        }
        let cutoff = 1e-12 * self.singular_values[0];
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }
}

/// Iteration cap for the implicit-shift SVD; generous, reached only on
/// pathological input.
const SVD_MAX_SWEEPS: usize = 10_000;

/// Economy-size SVD with singular values sorted in nonincreasing order.
pub fn svd_thin(m: &DenseMatrix) -> Result<SvdResult> {
    validate_finite("svd_thin input", m)?;
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_SWEEPS)
        .ok_or(Error::NumericalFailure("svd_thin"))?;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    Ok(SvdResult {
        u,
        singular_values: svd.singular_values,
        v: v_t.transpose(),
    })
}

/// Errors if any entry is NaN or infinite.
pub fn validate_finite(context: &'static str, m: &DenseMatrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{context}: non-finite entry present"
        )))
    }
}

/// Max absolute row sum, the operator infinity norm; drives the solvers'
/// convergence checks.
pub fn inf_norm_rowsum(m: &DenseMatrix) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(svd_thin(m)?.singular_values.iter().sum())
}

/// Sum of row Euclidean norms, the group norm that row shrinkage
/// minimizes against.
pub fn l21_row_norm(m: &DenseMatrix) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).norm()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn identity_singular_values_are_ones() {
        let svd = svd_thin(&DenseMatrix::identity(3, 3)).unwrap();
        for s in svd.singular_values.iter() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_matrix_recovers_diagonal() {
        let m = DenseMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 0.5]));
        let svd = svd_thin(&m).unwrap();
        let s: Vec<f64> = svd.singular_values.iter().copied().collect();
        assert!((s[0] - 3.0).abs() < 1e-12);
        assert!((s[1] - 1.0).abs() < 1e-12);
        assert!((s[2] - 0.5).abs() < 1e-12);
    }

    // Reconstruction oracle: U diag(sigma) V^T must reproduce the input.
    #[test]
    fn random_reconstruction() {
        let m = random_matrix(8, 6, 42);
        let svd = svd_thin(&m).unwrap();
        let rel = (svd.reconstruct() - &m).norm() / m.norm();
        assert!(rel < 1e-8, "relative reconstruction error {rel}");
    }

    #[test]
    fn svd_invariants_hold() {
        for seed in 0..5u64 {
            let m = random_matrix(7, 5, seed);
            let svd = svd_thin(&m).unwrap();
            let r = svd.singular_values.len();
            assert_eq!(r, 5);
            let utu = svd.u.transpose() * &svd.u;
            let vtv = svd.v.transpose() * &svd.v;
            assert!((utu - DenseMatrix::identity(r, r)).norm() < 1e-10);
            assert!((vtv - DenseMatrix::identity(r, r)).norm() < 1e-10);
            for k in 1..r {
                assert!(svd.singular_values[k - 1] >= svd.singular_values[k] - 1e-15);
            }
            assert!(svd.singular_values[r - 1] >= 0.0);
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut m = DenseMatrix::zeros(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(svd_thin(&m).is_err());
    }

    #[test]
    fn rowsum_norm_matches_definition() {
        let m = DenseMatrix::from_row_slice(2, 3, &[1.0, -2.0, 3.0, 0.5, 0.5, -0.5]);
        assert_eq!(inf_norm_rowsum(&m), 6.0);
    }

    #[test]
    fn numerical_rank_ignores_noise_level_values() {
        let m = DenseMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1e-14, 0.0]));
        let svd = svd_thin(&m).unwrap();
        assert_eq!(svd.numerical_rank(), 1);
    }
}
