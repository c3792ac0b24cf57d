//! Ridge classifier on learned representations, plus label utilities.
//!
//! Training solves `min_W ‖L - W Z_tr‖_F² + γ ‖W‖_F²`, whose closed form is
//! `W = L Z_tr^T (Z_tr Z_tr^T + γ I)^{-1}`; prediction takes the row argmax
//! of the score vector `W z`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{load_matrix, save_matrix};
use crate::matrix::{validate_finite, DenseMatrix};
use crate::structure::ClassPartition;

/// Learned classifier with the metadata needed for prediction and
/// out-of-sample solves. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    /// C x n_rep classifier matrix.
    pub w: DenseMatrix,
    pub gamma: f64,
    pub partition: ClassPartition,
    /// Learned training representation, retained for diagnostics.
    pub z_tr: DenseMatrix,
}

/// C x n label matrix: column j is the indicator of `labels[j]`.
/// Labels are 1-based, in `1..=num_classes`.
pub fn one_hot(labels: &[usize], num_classes: usize) -> Result<DenseMatrix> {
    let mut l = DenseMatrix::zeros(num_classes, labels.len());
    for (j, &label) in labels.iter().enumerate() {
        if label == 0 || label > num_classes {
            return Err(Error::Validation(format!(
                "label {label} at position {j} out of range 1..={num_classes}"
            )));
        }
        l[(label - 1, j)] = 1.0;
    }
    Ok(l)
}

/// Closed-form ridge fit. `gamma = 0` is accepted only when the Gram matrix
/// `Z_tr Z_tr^T` is invertible.
pub fn fit_ridge(
    z_tr: &DenseMatrix,
    labels_one_hot: &DenseMatrix,
    gamma: f64,
    partition: &ClassPartition,
) -> Result<TrainedModel> {
    if z_tr.ncols() != labels_one_hot.ncols() {
        return Err(Error::dimension(
            "fit_ridge",
            format!("{} label columns", z_tr.ncols()),
            labels_one_hot.ncols().to_string(),
        ));
    }
    if gamma < 0.0 {
        return Err(Error::Validation(format!("gamma must be >= 0, got {gamma}")));
    }
    validate_finite("fit_ridge representation", z_tr)?;

    let n_rep = z_tr.nrows();
    let gram = z_tr * z_tr.transpose() + DenseMatrix::identity(n_rep, n_rep) * gamma;
    let chol = gram.clone().cholesky().ok_or({
        if gamma == 0.0 {
            Error::SingularGram
        } else {
            Error::NumericalFailure("fit_ridge Cholesky")
        }
    })?;
    // W^T solves (Z Z^T + gamma I) W^T = Z L^T.
    let wt = chol.solve(&(z_tr * labels_one_hot.transpose()));
    let w = wt.transpose();

    Ok(TrainedModel {
        w,
        gamma,
        partition: partition.clone(),
        z_tr: z_tr.clone(),
    })
}

impl TrainedModel {
    pub fn num_classes(&self) -> usize {
        self.w.nrows()
    }

    /// Frobenius residual of the normal equations, relative to the
    /// right-hand side. Small (≤ 1e-10) for any successful fit.
    pub fn normal_equation_residual(&self, labels_one_hot: &DenseMatrix) -> f64 {
        let n_rep = self.z_tr.nrows();
        let gram =
            &self.z_tr * self.z_tr.transpose() + DenseMatrix::identity(n_rep, n_rep) * self.gamma;
        let rhs = labels_one_hot * self.z_tr.transpose();
        (&self.w * gram - &rhs).norm() / rhs.norm().max(1.0)
    }

    /// Labels (1-based) for each column of a representation matrix.
    /// Ties break toward the lowest class index.
    pub fn predict(&self, z_tt: &DenseMatrix) -> Result<Vec<usize>> {
        if z_tt.nrows() != self.w.ncols() {
            return Err(Error::dimension(
                "predict",
                format!("{} representation rows", self.w.ncols()),
                z_tt.nrows().to_string(),
            ));
        }
        let scores = &self.w * z_tt;
        Ok((0..scores.ncols())
            .map(|j| argmax_column(&scores, j) + 1)
            .collect())
    }

    /// Persist as two matrix files (`w.txt`, `z_tr.txt`) plus
    /// `metadata.txt` with `gamma=`, `classes=` and `class_sizes=` lines.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        save_matrix(&dir.join("w.txt"), &self.w)?;
        save_matrix(&dir.join("z_tr.txt"), &self.z_tr)?;
        let meta_path = dir.join("metadata.txt");
        let sizes: Vec<String> = self
            .partition
            .class_sizes()
            .iter()
            .map(|s| s.to_string())
            .collect();
        let contents = format!(
            "gamma={:.16e}\nclasses={}\nclass_sizes={}\n",
            self.gamma,
            self.num_classes(),
            sizes.join(",")
        );
        std::fs::write(&meta_path, contents).map_err(|e| Error::Io {
            path: meta_path.display().to_string(),
            source: e,
        })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let w = load_matrix(&dir.join("w.txt"))?;
        let z_tr = load_matrix(&dir.join("z_tr.txt"))?;
        let meta_path = dir.join("metadata.txt");
        let contents = std::fs::read_to_string(&meta_path).map_err(|e| Error::Io {
            path: meta_path.display().to_string(),
            source: e,
        })?;
        let mut gamma = None;
        let mut classes = None;
        let mut class_sizes = None;
        for (idx, line) in contents.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: idx + 1,
                message: "expected key=value".into(),
            })?;
            match key {
                "gamma" => {
                    gamma = Some(value.parse::<f64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("bad gamma: {e}"),
                    })?)
                }
                "classes" => {
                    classes = Some(value.parse::<usize>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("bad classes: {e}"),
                    })?)
                }
                "class_sizes" => {
                    let sizes = value
                        .split(',')
                        .map(|t| t.trim().parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::Parse {
                            line: idx + 1,
                            message: format!("bad class_sizes: {e}"),
                        })?;
                    class_sizes = Some(sizes);
                }
                _ => {}
            }
        }
        let gamma = gamma.ok_or(Error::Validation("metadata missing gamma=".into()))?;
        let classes = classes.ok_or(Error::Validation("metadata missing classes=".into()))?;
        let sizes = class_sizes.ok_or(Error::Validation("metadata missing class_sizes=".into()))?;
        let partition = ClassPartition::new(sizes)?;
        if partition.num_classes() != classes || w.nrows() != classes {
            return Err(Error::Validation(
                "metadata class count disagrees with stored matrices".into(),
            ));
        }
        Ok(Self { w, gamma, partition, z_tr })
    }
}

fn argmax_column(scores: &DenseMatrix, j: usize) -> usize {
    let mut best = 0;
    for i in 1..scores.nrows() {
        if scores[(i, j)] > scores[(best, j)] {
            best = i;
        }
    }
    best
}
