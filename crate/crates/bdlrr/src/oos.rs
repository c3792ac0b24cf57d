//! Out-of-sample extension: representation of a new instance against the
//! fixed training dictionary, via proximal gradient on the elastic-net
//! problem
//!
//! ```text
//! min_z 1/2 ‖b - X_tr z‖² + β1/2 ‖z‖² + β2 ‖d ∘ z‖₁
//! ```
//!
//! with β1 = λ1/λ3 and β2 = λ2/(2 λ3), and prediction through the trained
//! classifier.

use nalgebra::DVector;

use crate::classifier::TrainedModel;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::prox::soft_threshold;
use crate::solver::SolverConfig;
use crate::structure::build_distance_d;

/// Parameters of the out-of-sample solver.
#[derive(Debug, Clone)]
pub struct OosConfig {
    /// Ridge weight, λ1/λ3.
    pub beta1: f64,
    /// Weighted-L1 weight, λ2/(2 λ3).
    pub beta2: f64,
    pub max_iter: usize,
    /// Stop when the max-abs iterate change drops below this.
    pub step_tol: f64,
}

impl OosConfig {
    pub fn from_solver(config: &SolverConfig) -> Self {
        Self {
            beta1: config.lambda1 / config.lambda3,
            beta2: config.lambda2 / (2.0 * config.lambda3),
            max_iter: 300,
            step_tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let betas_ok = self.beta1 >= 0.0 && self.beta2 >= 0.0;
        if !betas_ok {
            return Err(Error::Validation(format!(
                "beta1/beta2 must be >= 0, got ({}, {})",
                self.beta1, self.beta2
            )));
        }
        let stop_ok = self.step_tol > 0.0 && self.max_iter > 0;
        if !stop_ok {
            return Err(Error::Validation(
                "need step_tol > 0 and max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for OosConfig {
    fn default() -> Self {
        Self::from_solver(&SolverConfig::default())
    }
}

fn check_shapes(
    z: Option<&DVector<f64>>,
    b: &DVector<f64>,
    x_tr: &DenseMatrix,
    d_w: &DVector<f64>,
) -> Result<()> {
    if b.len() != x_tr.nrows() || d_w.len() != x_tr.ncols() {
        return Err(Error::dimension(
            "oos",
            format!("b of length {}, d of length {}", x_tr.nrows(), x_tr.ncols()),
            format!("b of length {}, d of length {}", b.len(), d_w.len()),
        ));
    }
    if let Some(z) = z {
        if z.len() != x_tr.ncols() {
            return Err(Error::dimension(
                "oos",
                format!("z of length {}", x_tr.ncols()),
                z.len().to_string(),
            ));
        }
    }
    if d_w.iter().any(|&v| v < 0.0) {
        return Err(Error::Validation("distance weights must be >= 0".into()));
    }
    Ok(())
}

/// Elastic-net objective value at `z`.
pub fn oos_objective(
    z: &DVector<f64>,
    b: &DVector<f64>,
    x_tr: &DenseMatrix,
    d_w: &DVector<f64>,
    beta1: f64,
    beta2: f64,
) -> Result<f64> {
    check_shapes(Some(z), b, x_tr, d_w)?;
    let residual = b - x_tr * z;
    let weighted_l1: f64 = d_w.iter().zip(z.iter()).map(|(d, z)| d * z.abs()).sum();
    Ok(0.5 * residual.norm_squared() + 0.5 * beta1 * z.norm_squared() + beta2 * weighted_l1)
}

/// Solver outcome with the per-iterate objective trace (index 0 is the
/// starting point).
#[derive(Debug, Clone)]
pub struct OosSolveOutcome {
    pub z: DVector<f64>,
    pub objectives: Vec<f64>,
    pub converged: bool,
}

/// Proximal-gradient iteration from `z = 0` with fixed step `1/η`,
/// `η = ‖X_tr‖_F² + β1`. The objective is nonincreasing across iterates.
pub fn oos_solve_detailed(
    b: &DVector<f64>,
    x_tr: &DenseMatrix,
    d_w: &DVector<f64>,
    config: &OosConfig,
) -> Result<OosSolveOutcome> {
    config.validate()?;
    check_shapes(None, b, x_tr, d_w)?;
    let eta = x_tr.norm_squared() + config.beta1;
    let eta_ok = eta > 0.0;
    if !eta_ok {
        return Err(Error::Validation(
            "step size is zero: X_tr is all-zero and beta1 = 0".into(),
        ));
    }

    let n = x_tr.ncols();
    let mut z = DVector::<f64>::zeros(n);
    let mut objectives =
        vec![oos_objective(&z, b, x_tr, d_w, config.beta1, config.beta2)?];
    let mut converged = false;

    for _ in 0..config.max_iter {
        let grad = x_tr.transpose() * (x_tr * &z - b) + &z * config.beta1;
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("oos gradient"));
        }
        let step = &z - grad / eta;
        let mut change: f64 = 0.0;
        let mut z_next = DVector::<f64>::zeros(n);
        for i in 0..n {
            z_next[i] = soft_threshold(step[i], config.beta2 * d_w[i] / eta);
            change = change.max((z_next[i] - z[i]).abs());
        }
        z = z_next;
        objectives.push(oos_objective(&z, b, x_tr, d_w, config.beta1, config.beta2)?);
        if change <= config.step_tol {
            converged = true;
            break;
        }
    }

    Ok(OosSolveOutcome { z, objectives, converged })
}

/// Representation of a new instance `b` (unit-normalized like the training
/// columns) against `X_tr`.
pub fn oos_solve(
    b: &DVector<f64>,
    x_tr: &DenseMatrix,
    d_w: &DVector<f64>,
    config: &OosConfig,
) -> Result<DVector<f64>> {
    Ok(oos_solve_detailed(b, x_tr, d_w, config)?.z)
}

/// Squared distances from every training column to `b`, the per-entry L1
/// weights of the out-of-sample problem.
pub fn distance_weights(x_tr: &DenseMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
    let b_col = DenseMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let d = build_distance_d(x_tr, &b_col)?;
    Ok(DVector::from_column_slice(d.column(0).as_slice()))
}

/// Label of a new instance: solve for its representation, then classify
/// with the trained model (same tie-break as batch prediction).
pub fn oos_predict(
    b: &DVector<f64>,
    x_tr: &DenseMatrix,
    model: &TrainedModel,
    config: &OosConfig,
) -> Result<usize> {
    let d_w = distance_weights(x_tr, b)?;
    let z = oos_solve(b, x_tr, &d_w, config)?;
    let z_col = DenseMatrix::from_column_slice(z.len(), 1, z.as_slice());
    Ok(model.predict(&z_col)?[0])
}
