//! Reference solvers: robust PCA (`min ‖X0‖_* + λ‖E‖₁ s.t. X = X0 + E`)
//! and low-rank representation (`min ‖Z‖_* + λ‖E‖_21 s.t. X = D Z + E`),
//! both by inexact augmented Lagrange multipliers with the same penalty
//! schedule as the main solver.

use crate::error::{Error, Result};
use crate::matrix::{inf_norm_rowsum, validate_finite, DenseMatrix};
use crate::prox::{row_group_shrink, soft_threshold, svt};
use crate::solver::{ConvergenceHistory, GramShiftSolver, IterationRecord, SolverConfig};

/// Recovered decomposition: `low_rank` is X0 for RPCA and Z for LRR,
/// `sparse` is the noise term E.
#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub low_rank: DenseMatrix,
    pub sparse: DenseMatrix,
    pub history: ConvergenceHistory,
    pub converged: bool,
}

impl BaselineResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

/// The standard balance 1/sqrt(max(d, n)).
pub fn default_rpca_lambda(rows: usize, cols: usize) -> f64 {
    1.0 / (rows.max(cols) as f64).sqrt()
}

/// Penalty schedule of the augmented Lagrangian loop. The default matches
/// the main solver (μ0 = 0.1, ρ = 1.15, μ_max = 1e8). A gentler schedule
/// (smaller ρ, lower cap) trades iterations for dual accuracy; with the
/// fast default the iterates can freeze at feasible but slightly
/// suboptimal points once μ saturates.
#[derive(Debug, Clone, Copy)]
pub struct AlmSchedule {
    pub mu0: f64,
    pub rho: f64,
    pub mu_max: f64,
}

impl Default for AlmSchedule {
    fn default() -> Self {
        let defaults = SolverConfig::default();
        Self {
            mu0: defaults.mu0,
            rho: defaults.rho,
            mu_max: defaults.mu_max,
        }
    }
}

impl AlmSchedule {
    fn validate(&self) -> Result<()> {
        let ok = self.mu0 > 0.0 && self.mu0 < self.mu_max && self.rho > 1.0;
        if !ok {
            return Err(Error::Validation(format!(
                "need 0 < mu0 < mu_max and rho > 1, got ({}, {}, {})",
                self.mu0, self.rho, self.mu_max
            )));
        }
        Ok(())
    }
}

fn validate_baseline_params(lambda: f64, tol: f64, max_iter: usize) -> Result<()> {
    let ok = lambda > 0.0 && tol > 0.0 && max_iter > 0;
    if !ok {
        return Err(Error::Validation(format!(
            "need lambda > 0, tol > 0, max_iter >= 1; got ({lambda}, {tol}, {max_iter})"
        )));
    }
    Ok(())
}

/// Robust PCA by inexact ALM: alternate singular value thresholding of
/// `X - E + C/μ` at `1/μ` with elementwise shrinkage of `X - X0 + C/μ` at
/// `λ/μ`, then multiplier ascent and penalty growth. Converged when the
/// relative Frobenius feasibility residual drops below `tol`.
pub fn rpca_solve(
    x: &DenseMatrix,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BaselineResult> {
    validate_baseline_params(lambda, tol, max_iter)?;
    validate_finite("rpca input", x)?;
    let schedule = AlmSchedule::default();
    let (mut mu, rho, mu_max) = (schedule.mu0, schedule.rho, schedule.mu_max);
    let (d, n) = x.shape();
    let x_norm = x.norm();

    let mut x0 = DenseMatrix::zeros(d, n);
    let mut e = DenseMatrix::zeros(d, n);
    let mut c = DenseMatrix::zeros(d, n);
    let mut history = ConvergenceHistory::default();
    let mut converged = false;

    for iter in 0..max_iter {
        let iteration = iter + 1;
        x0 = svt(&(x - &e + &c / mu), 1.0 / mu)?;
        let m = x - &x0 + &c / mu;
        let threshold = lambda / mu;
        e = m.map(|v| soft_threshold(v, threshold));

        let residual = x - &x0 - &e;
        if residual.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { variable: "E", iteration });
        }
        c += &residual * mu;
        let mu_used = mu;
        mu = (mu * rho).min(mu_max);

        let relative_error = if x_norm > 0.0 { residual.norm() / x_norm } else { 0.0 };
        history.push(IterationRecord {
            iteration,
            relative_error,
            feas_residual: inf_norm_rowsum(&residual),
            pz_residual: 0.0,
            qz_residual: 0.0,
            mu: mu_used,
        });
        if relative_error <= tol {
            converged = true;
            break;
        }
    }

    Ok(BaselineResult { low_rank: x0, sparse: e, history, converged })
}

/// Low-rank representation by ADMM with the auxiliary split `J = Z`:
/// J by singular value thresholding, Z by the shifted normal equations
/// `(I + D^T D) Z = D^T (X - E) + J + (D^T C1 - C2)/μ`, E by row-group
/// shrinkage. Converged when both the reconstruction and `Z = J` residuals
/// drop below `tol` in the max-row-sum norm.
pub fn lrr_solve(
    x: &DenseMatrix,
    dict: &DenseMatrix,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BaselineResult> {
    lrr_solve_scheduled(x, dict, lambda, tol, max_iter, AlmSchedule::default())
}

/// `lrr_solve` with an explicit penalty schedule.
pub fn lrr_solve_scheduled(
    x: &DenseMatrix,
    dict: &DenseMatrix,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    schedule: AlmSchedule,
) -> Result<BaselineResult> {
    validate_baseline_params(lambda, tol, max_iter)?;
    schedule.validate()?;
    validate_finite("lrr input", x)?;
    validate_finite("lrr dictionary", dict)?;
    if dict.nrows() != x.nrows() {
        return Err(Error::dimension(
            "lrr_solve",
            format!("{} dictionary rows", x.nrows()),
            dict.nrows().to_string(),
        ));
    }
    if dict.ncols() == 0 {
        return Err(Error::Validation("dictionary needs at least one column".into()));
    }

    let (mut mu, rho, mu_max) = (schedule.mu0, schedule.rho, schedule.mu_max);
    let d_rows = x.nrows();
    let n_cols = x.ncols();
    let m_atoms = dict.ncols();
    let x_norm = x.norm();
    let gram = GramShiftSolver::new(dict);

    let mut z = DenseMatrix::zeros(m_atoms, n_cols);
    let mut e = DenseMatrix::zeros(d_rows, n_cols);
    let mut c1 = DenseMatrix::zeros(d_rows, n_cols);
    let mut c2 = DenseMatrix::zeros(m_atoms, n_cols);
    let mut history = ConvergenceHistory::default();
    let mut converged = false;

    for iter in 0..max_iter {
        let iteration = iter + 1;
        let j = svt(&(&z + &c2 / mu), 1.0 / mu)?;
        let rhs = dict.transpose() * (x - &e) + &j + (dict.transpose() * &c1 - &c2) / mu;
        z = gram.solve(1.0, &rhs);
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { variable: "Z", iteration });
        }
        let gamma = x - dict * &z + &c1 / mu;
        e = row_group_shrink(&gamma, lambda / mu);

        let residual = x - dict * &z - &e;
        let zj = &z - &j;
        c1 += &residual * mu;
        c2 += &zj * mu;
        let mu_used = mu;
        mu = (mu * rho).min(mu_max);

        let feas = inf_norm_rowsum(&residual);
        let zj_res = inf_norm_rowsum(&zj);
        history.push(IterationRecord {
            iteration,
            relative_error: if x_norm > 0.0 { residual.norm() / x_norm } else { 0.0 },
            feas_residual: feas,
            pz_residual: zj_res,
            qz_residual: 0.0,
            mu: mu_used,
        });
        if feas.max(zj_res) <= tol {
            converged = true;
            break;
        }
    }

    Ok(BaselineResult { low_rank: z, sparse: e, history, converged })
}
