//! Builders for the structure matrices: block mask Y, off-block mask A, the
//! extended mask over test columns, the squared-distance matrix D, the
//! block target R, and the off-block mass diagnostic.
//!
//! Columns are assumed class-sorted: samples of class i occupy one
//! contiguous block of columns.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Ordered class sizes defining the block structure of the training set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    class_sizes: Vec<usize>,
}

impl ClassPartition {
    pub fn new(class_sizes: Vec<usize>) -> Result<Self> {
        if class_sizes.is_empty() {
            return Err(Error::Validation("partition needs at least one class".into()));
        }
        if class_sizes.contains(&0) {
            return Err(Error::Validation("every class size must be >= 1".into()));
        }
        Ok(Self { class_sizes })
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    /// Total number of training samples.
    pub fn total(&self) -> usize {
        self.class_sizes.iter().sum()
    }

    /// Column range of class `c` (0-based class index).
    pub fn class_range(&self, c: usize) -> std::ops::Range<usize> {
        let start: usize = self.class_sizes[..c].iter().sum();
        start..start + self.class_sizes[c]
    }

    /// Class-sorted label list, classes numbered 1..C.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = Vec::with_capacity(self.total());
        for (c, &size) in self.class_sizes.iter().enumerate() {
            labels.extend(std::iter::repeat_n(c + 1, size));
        }
        labels
    }
}

/// Block-diagonal 0/1 mask with an all-ones block per class.
pub fn build_block_mask_y(partition: &ClassPartition) -> DenseMatrix {
    let n = partition.total();
    let mut y = DenseMatrix::zeros(n, n);
    for c in 0..partition.num_classes() {
        let range = partition.class_range(c);
        for i in range.clone() {
            for j in range.clone() {
                y[(i, j)] = 1.0;
            }
        }
    }
    y
}

/// Complement mask `A = 1 1^T - Y`; ones exactly on off-block entries.
pub fn build_offblock_mask_a(partition: &ClassPartition) -> DenseMatrix {
    let y = build_block_mask_y(partition);
    DenseMatrix::from_fn(y.nrows(), y.ncols(), |i, j| 1.0 - y[(i, j)])
}

/// `[A, 1 1^T]`: the off-block mask extended with an all-ones block over the
/// `total - n` test columns.
pub fn extend_mask_atilde(a: &DenseMatrix, total: usize) -> Result<DenseMatrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dimension(
            "extend_mask_atilde",
            format!("square mask, {n}x{n}"),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    if total < n {
        return Err(Error::dimension(
            "extend_mask_atilde",
            format!("total >= {n}"),
            total.to_string(),
        ));
    }
    Ok(DenseMatrix::from_fn(n, total, |i, j| {
        if j < n {
            a[(i, j)]
        } else {
            1.0
        }
    }))
}

/// Squared Euclidean distances between training columns and all columns:
/// `D_ij = ||x_tr_i - x_j||^2`, computed via one cross product and clamped
/// at zero to kill negative rounding artifacts.
pub fn build_distance_d(x_tr: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    if x_tr.nrows() != x.nrows() {
        return Err(Error::dimension(
            "build_distance_d",
            format!("{} rows", x_tr.nrows()),
            format!("{} rows", x.nrows()),
        ));
    }
    let tr_sq: Vec<f64> = (0..x_tr.ncols()).map(|j| x_tr.column(j).norm_squared()).collect();
    let all_sq: Vec<f64> = (0..x.ncols()).map(|j| x.column(j).norm_squared()).collect();
    let cross = x_tr.transpose() * x;
    Ok(DenseMatrix::from_fn(x_tr.ncols(), x.ncols(), |i, j| {
        (tr_sq[i] + all_sq[j] - 2.0 * cross[(i, j)]).max(0.0)
    }))
}

/// `R = [Y, 0] ∘ Z`: the iterate masked to block-diagonal training entries,
/// zero on all test columns.
pub fn block_target_r(y: &DenseMatrix, z: &DenseMatrix) -> Result<DenseMatrix> {
    let n = y.nrows();
    if y.ncols() != n || z.nrows() != n || z.ncols() < n {
        return Err(Error::dimension(
            "block_target_r",
            format!("Y {n}x{n}, Z {n}xN with N >= {n}"),
            format!(
                "Y {}x{}, Z {}x{}",
                y.nrows(),
                y.ncols(),
                z.nrows(),
                z.ncols()
            ),
        ));
    }
    Ok(DenseMatrix::from_fn(n, z.ncols(), |i, j| {
        if j < n {
            y[(i, j)] * z[(i, j)]
        } else {
            0.0
        }
    }))
}

/// Fraction of squared Frobenius mass of a training representation lying
/// outside the class-diagonal blocks. Zero for a perfectly block-diagonal
/// representation, one when all mass is off-block.
pub fn off_block_mass_ratio(z_tr: &DenseMatrix, partition: &ClassPartition) -> Result<f64> {
    let n = partition.total();
    if z_tr.nrows() != n || z_tr.ncols() != n {
        return Err(Error::dimension(
            "off_block_mass_ratio",
            format!("{n}x{n}"),
            format!("{}x{}", z_tr.nrows(), z_tr.ncols()),
        ));
    }
    let total = z_tr.norm_squared();
    if total == 0.0 {
        return Err(Error::UndefinedRatio(
            "off_block_mass_ratio of an all-zero representation",
        ));
    }
    let a = build_offblock_mask_a(partition);
    let off: f64 = z_tr
        .iter()
        .zip(a.iter())
        .map(|(z, m)| z * z * m)
        .sum();
    Ok(off / total)
}
