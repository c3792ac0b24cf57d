//! Joint block-diagonal low-rank representation solver.
//!
//! Minimizes
//!
//! ```text
//! ‖P‖_* + λ1/2 ‖Ã ∘ Z‖_F² + λ2 ‖D ∘ Q‖_1 + λ3 ‖E‖_21
//!     s.t.  X = X_tr Z + E,  P = Z,  Q = Z
//! ```
//!
//! by ADMM with closed-form updates for every block. Per iteration: P from
//! the previous Z (the Z step consumes the fresh P), then Z against the
//! block target R rebuilt from the previous iterate, then Q and E against
//! the fresh Z, then multiplier ascent and penalty growth.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matrix::{inf_norm_rowsum, validate_finite, DenseMatrix};
use crate::prox::{row_group_shrink, svt, weighted_l1_prox};
use crate::structure::{block_target_r, build_block_mask_y, build_distance_d, ClassPartition};

/// Hyperparameters and schedule of the ADMM solver.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Weight of the off-block shrinkage term.
    pub lambda1: f64,
    /// Weight of the distance-weighted L1 term.
    pub lambda2: f64,
    /// Weight of the row-group noise term.
    pub lambda3: f64,
    /// Penalty growth factor, > 1.
    pub rho: f64,
    /// Initial penalty.
    pub mu0: f64,
    /// Penalty cap.
    pub mu_max: f64,
    /// Convergence tolerance on the max residual.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda1: 5.0,
            lambda2: 0.5,
            lambda3: 15.0,
            rho: 1.15,
            mu0: 0.1,
            mu_max: 1e8,
            tol: 1e-6,
            max_iter: 500,
        }
    }
}

impl SolverConfig {
    /// λ1 and λ2 may be zero (shutting those terms off reduces the model to
    /// plain low-rank representation); λ3 and the schedule must be positive.
    pub fn validate(&self) -> Result<()> {
        let lambdas_ok =
            self.lambda1 >= 0.0 && self.lambda2 >= 0.0 && self.lambda3 > 0.0;
        if !lambdas_ok {
            return Err(Error::Validation(format!(
                "lambda1/lambda2 must be >= 0 and lambda3 > 0, got ({}, {}, {})",
                self.lambda1, self.lambda2, self.lambda3
            )));
        }
        let rho_ok = self.rho > 1.0;
        if !rho_ok {
            return Err(Error::Validation(format!("rho must be > 1, got {}", self.rho)));
        }
        let mu_ok = self.mu0 > 0.0 && self.mu0 < self.mu_max;
        if !mu_ok {
            return Err(Error::Validation(format!(
                "need 0 < mu0 < mu_max, got mu0 = {}, mu_max = {}",
                self.mu0, self.mu_max
            )));
        }
        let tol_ok = self.tol > 0.0;
        if !tol_ok {
            return Err(Error::Validation(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Validation("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Full ADMM iterate: primal blocks, multipliers, penalty.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// n x N representation.
    pub z: DenseMatrix,
    /// n x N nuclear-norm block.
    pub p: DenseMatrix,
    /// n x N weighted-sparse block.
    pub q: DenseMatrix,
    /// d x N noise block.
    pub e: DenseMatrix,
    /// d x N multiplier of X = X_tr Z + E.
    pub c1: DenseMatrix,
    /// n x N multiplier of P = Z.
    pub c2: DenseMatrix,
    /// n x N multiplier of Q = Z.
    pub c3: DenseMatrix,
    pub mu: f64,
    pub iteration: usize,
}

impl SolverState {
    /// All-zero initialization, as Algorithm-1-style solvers start.
    pub fn zeros(d: usize, n: usize, total: usize, mu0: f64) -> Self {
        Self {
            z: DenseMatrix::zeros(n, total),
            p: DenseMatrix::zeros(n, total),
            q: DenseMatrix::zeros(n, total),
            e: DenseMatrix::zeros(d, total),
            c1: DenseMatrix::zeros(d, total),
            c2: DenseMatrix::zeros(n, total),
            c3: DenseMatrix::zeros(n, total),
            mu: mu0,
            iteration: 0,
        }
    }
}

/// One per-iteration history row.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    /// ‖X - X_tr Z - E‖_F / ‖X‖_F.
    pub relative_error: f64,
    /// Max-row-sum norm of X - X_tr Z - E.
    pub feas_residual: f64,
    /// Max-row-sum norm of P - Z.
    pub pz_residual: f64,
    /// Max-row-sum norm of Q - Z.
    pub qz_residual: f64,
    /// Penalty used for this iteration's updates.
    pub mu: f64,
}

/// Per-iteration residual log, exportable as CSV.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceHistory {
    records: Vec<IterationRecord>,
}

impl ConvergenceHistory {
    pub fn push(&mut self, record: IterationRecord) {
        debug_assert!(record.relative_error >= 0.0);
        self.records.push(record);
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// CSV with 13 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,relative_error,feas_residual,pz_residual,qz_residual,mu\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                r.iteration, r.relative_error, r.feas_residual, r.pz_residual, r.qz_residual, r.mu
            ));
        }
        out
    }
}

/// Residual snapshot of a state against the data.
#[derive(Debug, Clone, Copy)]
pub struct Residuals {
    pub feas: f64,
    pub pz: f64,
    pub qz: f64,
    pub relative_error: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.feas.max(self.pz).max(self.qz)
    }

    pub fn converged(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Cached eigendecomposition of `X_tr^T X_tr`, applied as
/// `[shift I + Gram]^{-1} rhs` for any positive shift.
///
/// The shift varies with μ but the Gram factor does not, so the O(n³)
/// decomposition happens once per solve.
#[derive(Debug, Clone)]
pub struct GramShiftSolver {
    vectors: DenseMatrix,
    values: DVector<f64>,
}

impl GramShiftSolver {
    pub fn new(x_tr: &DenseMatrix) -> Self {
        let gram = x_tr.transpose() * x_tr;
        let eigen = gram.symmetric_eigen();
        Self {
            vectors: eigen.eigenvectors,
            values: eigen.eigenvalues,
        }
    }

    pub fn solve(&self, shift: f64, rhs: &DenseMatrix) -> DenseMatrix {
        let mut projected = self.vectors.transpose() * rhs;
        for i in 0..projected.nrows() {
            // Gram is PSD; eigenvalues clamp at zero against rounding.
            let denom = self.values[i].max(0.0) + shift;
            for j in 0..projected.ncols() {
                projected[(i, j)] /= denom;
            }
        }
        &self.vectors * projected
    }
}

/// Closed-form Z step: solves
/// `[(2 + λ1/μ) I + X_tr^T X_tr] Z = (λ1/μ) R + X_tr^T S1 + S2 + S3`
/// with `S1 = X - E + C1/μ`, `S2 = P + C2/μ`, `S3 = Q + C3/μ`.
#[allow(clippy::too_many_arguments)]
pub fn update_z(
    x: &DenseMatrix,
    x_tr: &DenseMatrix,
    gram: &GramShiftSolver,
    r: &DenseMatrix,
    p: &DenseMatrix,
    q: &DenseMatrix,
    e: &DenseMatrix,
    c1: &DenseMatrix,
    c2: &DenseMatrix,
    c3: &DenseMatrix,
    mu: f64,
    lambda1: f64,
) -> DenseMatrix {
    let s1 = x - e + c1 / mu;
    let s2 = p + c2 / mu;
    let s3 = q + c3 / mu;
    let rhs = r * (lambda1 / mu) + x_tr.transpose() * s1 + s2 + s3;
    gram.solve(2.0 + lambda1 / mu, &rhs)
}

/// Nuclear-norm step: `svt(Z - C2/μ, 1/μ)`.
pub fn update_p(z: &DenseMatrix, c2: &DenseMatrix, mu: f64) -> Result<DenseMatrix> {
    svt(&(z - c2 / mu), 1.0 / mu)
}

/// Weighted-sparse step: entrywise shrinkage of `Z - C3/μ` with thresholds
/// `λ2 D_ij / μ`, applied with the freshly updated Z.
pub fn update_q(
    z_new: &DenseMatrix,
    c3: &DenseMatrix,
    d: &DenseMatrix,
    mu: f64,
    lambda2: f64,
) -> Result<DenseMatrix> {
    weighted_l1_prox(&(z_new - c3 / mu), d, lambda2 / mu)
}

/// Noise step: row-group shrinkage of `Γ = X - X_tr Z + C1/μ` at `λ3/μ`.
pub fn update_e(
    x: &DenseMatrix,
    x_tr: &DenseMatrix,
    z_new: &DenseMatrix,
    c1: &DenseMatrix,
    mu: f64,
    lambda3: f64,
) -> DenseMatrix {
    let gamma = x - x_tr * z_new + c1 / mu;
    row_group_shrink(&gamma, lambda3 / mu)
}

/// Multiplier ascent with the current μ, then penalty growth capped at
/// `mu_max`.
pub fn step_multipliers(
    state: &mut SolverState,
    x: &DenseMatrix,
    x_tr: &DenseMatrix,
    config: &SolverConfig,
) {
    let mu = state.mu;
    state.c1 += (x - x_tr * &state.z - &state.e) * mu;
    state.c2 += (&state.p - &state.z) * mu;
    state.c3 += (&state.q - &state.z) * mu;
    state.mu = (state.mu * config.rho).min(config.mu_max);
}

/// Residuals of the current state; the max-row-sum norm drives the
/// convergence test, the Frobenius ratio is the reported relative error.
pub fn residuals(x: &DenseMatrix, x_tr: &DenseMatrix, state: &SolverState) -> Residuals {
    let feas_matrix = x - x_tr * &state.z - &state.e;
    let x_norm = x.norm();
    Residuals {
        feas: inf_norm_rowsum(&feas_matrix),
        pz: inf_norm_rowsum(&(&state.p - &state.z)),
        qz: inf_norm_rowsum(&(&state.q - &state.z)),
        relative_error: if x_norm > 0.0 {
            feas_matrix.norm() / x_norm
        } else {
            0.0
        },
    }
}

/// Solver output: the learned representation `[Z_tr, Z_tt]`, the noise
/// component, the residual log, and whether the tolerance was reached.
#[derive(Debug, Clone)]
pub struct BdlrrSolution {
    pub z: DenseMatrix,
    pub e: DenseMatrix,
    pub history: ConvergenceHistory,
    /// False when the iteration cap was hit first; the representation is
    /// still usable downstream.
    pub converged: bool,
}

impl BdlrrSolution {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// Split the joint representation into its training and test parts.
    pub fn split_z(&self, n_train: usize) -> (DenseMatrix, DenseMatrix) {
        let z_tr = self.z.columns(0, n_train).into_owned();
        let z_tt = self
            .z
            .columns(n_train, self.z.ncols() - n_train)
            .into_owned();
        (z_tr, z_tt)
    }
}

fn ensure_finite(
    m: &DenseMatrix,
    variable: &'static str,
    iteration: usize,
) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { variable, iteration })
    }
}

/// Runs the full ADMM loop from an all-zero state. `x_tt` may be empty
/// (zero columns) to solve on the training set alone.
///
/// Columns of `x_tr`/`x_tt` are expected unit-normalized and class-sorted
/// per `partition`; the joint matrix `X = [X_tr, X_tt]` is formed
/// internally. Deterministic: identical inputs give bit-identical outputs.
pub fn solve(
    x_tr: &DenseMatrix,
    x_tt: &DenseMatrix,
    partition: &ClassPartition,
    config: &SolverConfig,
) -> Result<BdlrrSolution> {
    config.validate()?;
    validate_finite("solve training data", x_tr)?;
    validate_finite("solve test data", x_tt)?;
    let d = x_tr.nrows();
    let n = x_tr.ncols();
    if x_tt.ncols() > 0 && x_tt.nrows() != d {
        return Err(Error::dimension(
            "solve",
            format!("{d} rows in test data"),
            format!("{}", x_tt.nrows()),
        ));
    }
    if partition.total() != n {
        return Err(Error::dimension(
            "solve",
            format!("partition total {} training columns", partition.total()),
            n.to_string(),
        ));
    }

    let total = n + x_tt.ncols();
    let mut x = DenseMatrix::zeros(d, total);
    x.columns_mut(0, n).copy_from(x_tr);
    if x_tt.ncols() > 0 {
        x.columns_mut(n, x_tt.ncols()).copy_from(x_tt);
    }

    let y_mask = build_block_mask_y(partition);
    let dist = build_distance_d(x_tr, &x)?;
    let gram = GramShiftSolver::new(x_tr);

    let mut state = SolverState::zeros(d, n, total, config.mu0);
    let mut history = ConvergenceHistory::default();
    let mut converged = false;

    for iter in 0..config.max_iter {
        let mu = state.mu;
        let iteration = iter + 1;

        // P from the previous Z; the Z step consumes this fresh P.
        let p_new = update_p(&state.z, &state.c2, mu)?;
        ensure_finite(&p_new, "P", iteration)?;

        let r = block_target_r(&y_mask, &state.z)?;
        let z_new = update_z(
            &x, x_tr, &gram, &r, &p_new, &state.q, &state.e, &state.c1, &state.c2, &state.c3,
            mu, config.lambda1,
        );
        ensure_finite(&z_new, "Z", iteration)?;

        let q_new = update_q(&z_new, &state.c3, &dist, mu, config.lambda2)?;
        ensure_finite(&q_new, "Q", iteration)?;

        let e_new = update_e(&x, x_tr, &z_new, &state.c1, mu, config.lambda3);
        ensure_finite(&e_new, "E", iteration)?;

        state.p = p_new;
        state.z = z_new;
        state.q = q_new;
        state.e = e_new;
        step_multipliers(&mut state, &x, x_tr, config);
        ensure_finite(&state.c1, "C1", iteration)?;
        state.iteration = iteration;

        let res = residuals(&x, x_tr, &state);
        history.push(IterationRecord {
            iteration,
            relative_error: res.relative_error,
            feas_residual: res.feas,
            pz_residual: res.pz,
            qz_residual: res.qz,
            mu,
        });

        if res.converged(config.tol) {
            converged = true;
            break;
        }
    }

    Ok(BdlrrSolution {
        z: state.z,
        e: state.e,
        history,
        converged,
    })
}
