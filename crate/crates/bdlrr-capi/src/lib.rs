//! C ABI for the block-diagonal low-rank representation pipeline.
//!
//! The surface is an opaque model handle plus status codes. Matrices cross
//! the boundary as column-major `double` buffers with explicit dimensions;
//! labels are 1-based `uint32_t`. `bdlrr_train` runs the full pipeline
//! (normalize, joint solve, ridge fit) and can report predictions for the
//! test columns it was given; `bdlrr_predict_oos` classifies one new
//! instance against the trained model. Every function tolerates null
//! pointers and reports `BDLRR_STATUS_NULL_POINTER` instead of crashing.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use nalgebra::DVector;

use bdlrr::classifier::{fit_ridge, one_hot, TrainedModel};
use bdlrr::data::{normalize_columns, PartitionedDataset};
use bdlrr::error::Error;
use bdlrr::matrix::DenseMatrix;
use bdlrr::oos::{oos_predict, OosConfig};
use bdlrr::solver::{solve, SolverConfig};
use bdlrr::structure::off_block_mass_ratio;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdlrrStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter or label was out of range.
    InvalidArgument = 2,
    /// Buffer dimensions are inconsistent.
    DimensionMismatch = 3,
    /// A matrix decomposition failed or an iterate became non-finite.
    NumericalFailure = 4,
    /// Iteration cap reached before the tolerance; the produced model is
    /// still usable.
    NotConverged = 5,
    /// An internal panic was caught; the call had no effect.
    InternalPanic = 6,
}

/// Hyperparameters of the joint solve, the classifier, and the
/// out-of-sample extension.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BdlrrConfig {
    /// Off-block shrinkage weight.
    pub lambda1: f64,
    /// Distance-weighted sparsity weight.
    pub lambda2: f64,
    /// Row-group noise weight.
    pub lambda3: f64,
    /// Ridge regularization of the classifier.
    pub gamma: f64,
    /// Penalty growth factor (> 1).
    pub rho: f64,
    /// Initial penalty.
    pub mu0: f64,
    /// Penalty cap.
    pub mu_max: f64,
    /// Convergence tolerance on the max residual.
    pub tol: f64,
    /// Joint-solve iteration cap.
    pub max_iter: u32,
    /// Out-of-sample iteration cap.
    pub oos_max_iter: u32,
    /// Out-of-sample stop on max-abs iterate change.
    pub oos_step_tol: f64,
}

impl BdlrrConfig {
    fn defaults() -> Self {
        let solver = SolverConfig::default();
        let oos = OosConfig::default();
        Self {
            lambda1: solver.lambda1,
            lambda2: solver.lambda2,
            lambda3: solver.lambda3,
            gamma: 1.0,
            rho: solver.rho,
            mu0: solver.mu0,
            mu_max: solver.mu_max,
            tol: solver.tol,
            max_iter: solver.max_iter as u32,
            oos_max_iter: oos.max_iter as u32,
            oos_step_tol: oos.step_tol,
        }
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda3: self.lambda3,
            rho: self.rho,
            mu0: self.mu0,
            mu_max: self.mu_max,
            tol: self.tol,
            max_iter: self.max_iter as usize,
        }
    }

    fn oos(&self) -> OosConfig {
        OosConfig {
            beta1: self.lambda1 / self.lambda3,
            beta2: self.lambda2 / (2.0 * self.lambda3),
            max_iter: self.oos_max_iter as usize,
            step_tol: self.oos_step_tol,
        }
    }
}

/// Opaque trained model: classifier, normalized training dictionary, and
/// the out-of-sample configuration.
pub struct BdlrrModel {
    model: TrainedModel,
    x_tr: DenseMatrix,
    oos: OosConfig,
    converged: bool,
}

fn status_of(err: &Error) -> BdlrrStatus {
    match err {
        Error::Dimension { .. } => BdlrrStatus::DimensionMismatch,
        Error::NumericalFailure(_) | Error::Divergence { .. } | Error::SingularGram => {
            BdlrrStatus::NumericalFailure
        }
        _ => BdlrrStatus::InvalidArgument,
    }
}

fn catch(body: impl FnOnce() -> BdlrrStatus) -> BdlrrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => BdlrrStatus::InternalPanic,
    }
}

/// Writes the default configuration into `out`.
///
/// # Safety
/// `out` must be null or point to writable storage for one `BdlrrConfig`.
#[no_mangle]
pub unsafe extern "C" fn bdlrr_config_default(out: *mut BdlrrConfig) -> BdlrrStatus {
    if out.is_null() {
        return BdlrrStatus::NullPointer;
    }
    unsafe { out.write(BdlrrConfig::defaults()) };
    BdlrrStatus::Ok
}

/// Trains on column-major buffers: `x_tr` is `d x n`, `labels` holds `n`
/// 1-based class indices, `x_tt` is `d x m` (null allowed when `m` is 0).
/// Training columns may arrive in any label order; they are sorted into
/// contiguous class blocks internally, and every class up to the largest
/// label must appear at least once. On success `*out_model` owns the
/// trained model and, when `out_test_labels` is non-null, the `m`
/// predicted labels of the test columns are written there in input order.
///
/// Returns `BDLRR_STATUS_NOT_CONVERGED` when the iteration cap was reached
/// first; the handle is still produced and usable.
///
/// # Safety
/// Pointers must reference buffers of the stated sizes; `out_model` must
/// be a valid location to store the handle. Free the handle with
/// [`bdlrr_model_free`].
#[no_mangle]
pub unsafe extern "C" fn bdlrr_train(
    config: *const BdlrrConfig,
    x_tr: *const f64,
    d: usize,
    n: usize,
    labels: *const u32,
    x_tt: *const f64,
    m: usize,
    out_test_labels: *mut u32,
    out_model: *mut *mut BdlrrModel,
) -> BdlrrStatus {
    if config.is_null() || x_tr.is_null() || labels.is_null() || out_model.is_null() {
        return BdlrrStatus::NullPointer;
    }
    if x_tt.is_null() && m > 0 {
        return BdlrrStatus::NullPointer;
    }
    if d == 0 || n == 0 {
        return BdlrrStatus::InvalidArgument;
    }
    let config = unsafe { *config };
    let x_tr = unsafe { slice::from_raw_parts(x_tr, d * n) };
    let labels = unsafe { slice::from_raw_parts(labels, n) };
    let x_tt = if m > 0 {
        unsafe { slice::from_raw_parts(x_tt, d * m) }
    } else {
        &[]
    };

    catch(|| {
        let x_tr = DenseMatrix::from_column_slice(d, n, x_tr);
        let x_tt = if m > 0 {
            DenseMatrix::from_column_slice(d, m, x_tt)
        } else {
            DenseMatrix::zeros(d, 0)
        };
        let labels: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
        // Test labels are unknown at this boundary (they get predicted);
        // the dataset carries placeholders of the right length.
        let dataset =
            match PartitionedDataset::from_labeled(&x_tr, &labels, x_tt, vec![1; m]) {
                Ok(ds) => ds,
                Err(e) => return status_of(&e),
            };

        let (x_tr_norm, _) = normalize_columns(&dataset.x_tr);
        let (x_tt_norm, _) = normalize_columns(&dataset.x_tt);
        let solver_config = config.solver();
        let solution =
            match solve(&x_tr_norm, &x_tt_norm, &dataset.partition, &solver_config) {
                Ok(s) => s,
                Err(e) => return status_of(&e),
            };
        let (z_tr, z_tt) = solution.split_z(n);
        let label_matrix =
            match one_hot(&dataset.train_labels, dataset.partition.num_classes()) {
                Ok(l) => l,
                Err(e) => return status_of(&e),
            };
        let model = match fit_ridge(&z_tr, &label_matrix, config.gamma, &dataset.partition) {
            Ok(model) => model,
            Err(e) => return status_of(&e),
        };

        if !out_test_labels.is_null() && m > 0 {
            let predicted = match model.predict(&z_tt) {
                Ok(p) => p,
                Err(e) => return status_of(&e),
            };
            let out = unsafe { slice::from_raw_parts_mut(out_test_labels, m) };
            for (slot, label) in out.iter_mut().zip(&predicted) {
                *slot = *label as u32;
            }
        }

        let converged = solution.converged;
        let handle = Box::new(BdlrrModel {
            model,
            x_tr: x_tr_norm,
            oos: config.oos(),
            converged,
        });
        unsafe { out_model.write(Box::into_raw(handle)) };
        if converged {
            BdlrrStatus::Ok
        } else {
            BdlrrStatus::NotConverged
        }
    })
}

/// Classifies one new instance (`d` entries, any scale; it is normalized
/// internally) and writes the 1-based label into `out_label`.
///
/// # Safety
/// `model` must come from [`bdlrr_train`] and not have been freed;
/// `instance` must hold `d` doubles matching the model's feature
/// dimension.
#[no_mangle]
pub unsafe extern "C" fn bdlrr_predict_oos(
    model: *const BdlrrModel,
    instance: *const f64,
    d: usize,
    out_label: *mut u32,
) -> BdlrrStatus {
    if model.is_null() || instance.is_null() || out_label.is_null() {
        return BdlrrStatus::NullPointer;
    }
    let model = unsafe { &*model };
    if d != model.x_tr.nrows() {
        return BdlrrStatus::DimensionMismatch;
    }
    let instance = unsafe { slice::from_raw_parts(instance, d) };

    catch(|| {
        let mut b = DVector::from_column_slice(instance);
        let norm = b.norm();
        if norm > 0.0 {
            b /= norm;
        }
        match oos_predict(&b, &model.x_tr, &model.model, &model.oos) {
            Ok(label) => {
                unsafe { out_label.write(label as u32) };
                BdlrrStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of classes the model distinguishes; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle from [`bdlrr_train`].
#[no_mangle]
pub unsafe extern "C" fn bdlrr_model_num_classes(model: *const BdlrrModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.model.num_classes()
}

/// Feature dimension the model expects; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle from [`bdlrr_train`].
#[no_mangle]
pub unsafe extern "C" fn bdlrr_model_feature_dim(model: *const BdlrrModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.x_tr.nrows()
}

/// Number of training samples behind the model; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle from [`bdlrr_train`].
#[no_mangle]
pub unsafe extern "C" fn bdlrr_model_train_count(model: *const BdlrrModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.x_tr.ncols()
}

/// Whether the joint solve reached its tolerance (1) or hit the iteration
/// cap (0). Returns 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle from [`bdlrr_train`].
#[no_mangle]
pub unsafe extern "C" fn bdlrr_model_converged(model: *const BdlrrModel) -> i32 {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.converged as i32
}

/// Fraction of the learned training representation's squared mass lying
/// outside the class-diagonal blocks (0 = perfectly block-diagonal).
///
/// # Safety
/// `model` must be null or a live handle from [`bdlrr_train`]; `out_ratio`
/// must be null or point to writable storage for one `double`.
#[no_mangle]
pub unsafe extern "C" fn bdlrr_model_off_block_ratio(
    model: *const BdlrrModel,
    out_ratio: *mut f64,
) -> BdlrrStatus {
    if model.is_null() || out_ratio.is_null() {
        return BdlrrStatus::NullPointer;
    }
    let handle = unsafe { &*model };
    catch(
        || match off_block_mass_ratio(&handle.model.z_tr, &handle.model.partition) {
            Ok(ratio) => {
                unsafe { out_ratio.write(ratio) };
                BdlrrStatus::Ok
            }
            Err(e) => status_of(&e),
        },
    )
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
/// `model` must come from [`bdlrr_train`] and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bdlrr_model_free(model: *mut BdlrrModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Static, nul-terminated description of a status code.
#[no_mangle]
pub extern "C" fn bdlrr_status_message(status: BdlrrStatus) -> *const c_char {
    let message: &CStr = match status {
        BdlrrStatus::Ok => c"ok",
        BdlrrStatus::NullPointer => c"required pointer was null",
        BdlrrStatus::InvalidArgument => c"invalid argument",
        BdlrrStatus::DimensionMismatch => c"dimension mismatch",
        BdlrrStatus::NumericalFailure => c"numerical failure",
        BdlrrStatus::NotConverged => c"iteration cap reached before tolerance",
        BdlrrStatus::InternalPanic => c"internal panic",
    };
    message.as_ptr()
}

/// Static, nul-terminated library version.
#[no_mangle]
pub extern "C" fn bdlrr_version() -> *const c_char {
    c"0.1.0".as_ptr()
}
