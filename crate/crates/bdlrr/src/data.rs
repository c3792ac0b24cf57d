//! Data plumbing: column normalization, synthetic union-of-subspaces
//! generation, class-sorted dataset assembly, experiment repetition and
//! accuracy metrics.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use crate::baselines::lrr_solve;
use crate::classifier::{fit_ridge, one_hot};
use crate::error::{Error, Result};
use crate::matrix::{validate_finite, DenseMatrix};
use crate::solver::{solve, ConvergenceHistory, SolverConfig};
use crate::structure::{off_block_mass_ratio, ClassPartition};

/// Class-sorted dataset with unit-norm columns.
#[derive(Debug, Clone)]
pub struct PartitionedDataset {
    pub x_tr: DenseMatrix,
    pub x_tt: DenseMatrix,
    /// Class-sorted, aligned with the columns of `x_tr`.
    pub train_labels: Vec<usize>,
    pub test_labels: Vec<usize>,
    pub partition: ClassPartition,
    /// `permutation[j]` is the original column index of sorted training
    /// column `j`.
    pub permutation: Vec<usize>,
}

impl PartitionedDataset {
    /// Sorts training columns so class blocks are contiguous; the
    /// permutation maps sorted positions back to the input order. Every
    /// class in `1..=max_label` must be present.
    pub fn from_labeled(
        x_tr: &DenseMatrix,
        train_labels: &[usize],
        x_tt: DenseMatrix,
        test_labels: Vec<usize>,
    ) -> Result<Self> {
        if x_tr.ncols() != train_labels.len() {
            return Err(Error::dimension(
                "dataset assembly",
                format!("{} training labels", x_tr.ncols()),
                train_labels.len().to_string(),
            ));
        }
        if x_tt.ncols() != test_labels.len() {
            return Err(Error::dimension(
                "dataset assembly",
                format!("{} test labels", x_tt.ncols()),
                test_labels.len().to_string(),
            ));
        }
        let num_classes = *train_labels
            .iter()
            .max()
            .ok_or_else(|| Error::Validation("empty training set".into()))?;
        if train_labels.contains(&0) {
            return Err(Error::Validation("labels are numbered from 1".into()));
        }

        let mut permutation: Vec<usize> = (0..train_labels.len()).collect();
        permutation.sort_by_key(|&j| train_labels[j]);
        let sorted_labels: Vec<usize> = permutation.iter().map(|&j| train_labels[j]).collect();

        let mut class_sizes = vec![0usize; num_classes];
        for &label in &sorted_labels {
            class_sizes[label - 1] += 1;
        }
        if class_sizes.contains(&0) {
            return Err(Error::Validation(format!(
                "every class in 1..={num_classes} needs at least one training sample"
            )));
        }
        let partition = ClassPartition::new(class_sizes)?;

        let sorted_x_tr =
            DenseMatrix::from_fn(x_tr.nrows(), x_tr.ncols(), |i, j| x_tr[(i, permutation[j])]);

        Ok(Self {
            x_tr: sorted_x_tr,
            x_tt,
            train_labels: sorted_labels,
            test_labels,
            partition,
            permutation,
        })
    }
}

/// Scales every nonzero column to unit length; zero columns pass through
/// and their indices are reported.
pub fn normalize_columns(m: &DenseMatrix) -> (DenseMatrix, Vec<usize>) {
    let mut out = m.clone();
    let mut zero_columns = Vec::new();
    for j in 0..m.ncols() {
        let norm = m.column(j).norm();
        if norm == 0.0 {
            zero_columns.push(j);
        } else {
            for i in 0..m.nrows() {
                out[(i, j)] /= norm;
            }
        }
    }
    (out, zero_columns)
}

/// Generator parameters for the synthetic union-of-subspaces benchmark.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub classes: usize,
    pub subspace_dim: usize,
    pub ambient_dim: usize,
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    pub noise_std: f64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 || self.n_train_per_class == 0 || self.n_test_per_class == 0 {
            return Err(Error::Validation("all counts must be >= 1".into()));
        }
        if self.subspace_dim == 0 || self.subspace_dim >= self.ambient_dim {
            return Err(Error::Validation(format!(
                "need 0 < subspace_dim < ambient_dim, got {} vs {}",
                self.subspace_dim, self.ambient_dim
            )));
        }
        if self.noise_std < 0.0 {
            return Err(Error::Validation("noise_std must be >= 0".into()));
        }
        Ok(())
    }
}

/// Box-Muller standard normal from the ChaCha stream; u1 is kept in (0, 1].
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    // Column-major fill keeps the draw order independent of storage details.
    let mut m = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = standard_normal(rng);
        }
    }
    m
}

/// Draws, per class, a random orthonormal basis of the requested dimension,
/// standard-normal coefficients, and isotropic Gaussian noise; columns are
/// unit-normalized afterwards. Deterministic for a fixed seed (ChaCha8
/// stream, Box-Muller normals, class-by-class draw order).
pub fn synth_union_of_subspaces(spec: &SynthSpec, seed: u64) -> Result<PartitionedDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.ambient_dim;
    let k = spec.subspace_dim;
    let n_train = spec.classes * spec.n_train_per_class;
    let n_test = spec.classes * spec.n_test_per_class;

    let mut x_tr = DenseMatrix::zeros(d, n_train);
    let mut x_tt = DenseMatrix::zeros(d, n_test);
    for c in 0..spec.classes {
        let basis = normal_matrix(d, k, &mut rng).qr().q();
        let per_class = spec.n_train_per_class + spec.n_test_per_class;
        let coeffs = normal_matrix(k, per_class, &mut rng);
        let mut samples = &basis * coeffs;
        if spec.noise_std > 0.0 {
            samples += normal_matrix(d, per_class, &mut rng) * spec.noise_std;
        } else {
            // Keep the draw order identical across noise settings.
            let _ = normal_matrix(d, per_class, &mut rng);
        }
        for s in 0..spec.n_train_per_class {
            x_tr.set_column(c * spec.n_train_per_class + s, &samples.column(s));
        }
        for s in 0..spec.n_test_per_class {
            x_tt.set_column(
                c * spec.n_test_per_class + s,
                &samples.column(spec.n_train_per_class + s),
            );
        }
    }

    let (x_tr, _) = normalize_columns(&x_tr);
    let (x_tt, _) = normalize_columns(&x_tt);
    validate_finite("synthetic training data", &x_tr)?;
    validate_finite("synthetic test data", &x_tt)?;

    let partition = ClassPartition::new(vec![spec.n_train_per_class; spec.classes])?;
    let train_labels = partition.labels();
    let test_partition = ClassPartition::new(vec![spec.n_test_per_class; spec.classes])?;
    let test_labels = test_partition.labels();
    let permutation = (0..n_train).collect();

    Ok(PartitionedDataset {
        x_tr,
        x_tt,
        train_labels,
        test_labels,
        partition,
        permutation,
    })
}

/// Fraction of exact matches between predicted and true labels.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() || predicted.is_empty() {
        return Err(Error::dimension(
            "accuracy",
            format!("{} nonempty predictions", truth.len()),
            predicted.len().to_string(),
        ));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Which representation feeds the ridge classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepresentationMethod {
    /// The joint block-diagonal solver.
    Bdlrr,
    /// Plain low-rank representation with the training set as dictionary
    /// (λ taken from the solver's λ3).
    Lrr,
}

/// One experiment trial.
#[derive(Debug, Clone, Copy)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub off_block_ratio: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_relative_error: f64,
}

/// Aggregated repeated-trial results.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub trials: Vec<TrialRecord>,
    pub histories: Option<Vec<ConvergenceHistory>>,
}

impl ExperimentReport {
    pub fn mean_accuracy(&self) -> f64 {
        let n = self.trials.len() as f64;
        self.trials.iter().map(|t| t.accuracy).sum::<f64>() / n
    }

    /// Sample standard deviation (n - 1 denominator); zero for a single
    /// trial.
    pub fn std_accuracy(&self) -> f64 {
        let n = self.trials.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean_accuracy();
        let ss: f64 = self
            .trials
            .iter()
            .map(|t| (t.accuracy - mean) * (t.accuracy - mean))
            .sum();
        (ss / (n as f64 - 1.0)).sqrt()
    }

    pub fn mean_off_block_ratio(&self) -> f64 {
        let n = self.trials.len() as f64;
        self.trials.iter().map(|t| t.off_block_ratio).sum::<f64>() / n
    }

    pub fn flagged_nonconverged(&self) -> usize {
        self.trials.iter().filter(|t| !t.converged).count()
    }

    /// Report file body: `key=value` summary lines, then a CSV block with
    /// one row per trial.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mean_accuracy={:.12}", self.mean_accuracy());
        let _ = writeln!(out, "std_accuracy={:.12}", self.std_accuracy());
        let _ = writeln!(out, "trials={}", self.trials.len());
        let _ = writeln!(out, "flagged_nonconverged={}", self.flagged_nonconverged());
        let _ = writeln!(
            out,
            "trial,seed,accuracy,off_block_ratio,converged,iterations,final_relative_error"
        );
        for t in &self.trials {
            let _ = writeln!(
                out,
                "{},{},{:.12},{:.12e},{},{},{:.12e}",
                t.trial,
                t.seed,
                t.accuracy,
                t.off_block_ratio,
                t.converged,
                t.iterations,
                t.final_relative_error
            );
        }
        out
    }
}

fn trial_error(trial: usize, source: Error) -> Error {
    Error::TrialFailed {
        trial,
        source: Box::new(source),
    }
}

/// One end-to-end pass: normalize, solve for the representation, fit the
/// ridge classifier, predict the test labels.
pub fn run_trial(
    dataset: &PartitionedDataset,
    config: &SolverConfig,
    gamma: f64,
    method: RepresentationMethod,
) -> Result<(TrialRecord, ConvergenceHistory)> {
    let (x_tr, _) = normalize_columns(&dataset.x_tr);
    let (x_tt, _) = normalize_columns(&dataset.x_tt);
    let n = x_tr.ncols();

    let (z, converged, history) = match method {
        RepresentationMethod::Bdlrr => {
            let solution = solve(&x_tr, &x_tt, &dataset.partition, config)?;
            (solution.z, solution.converged, solution.history)
        }
        RepresentationMethod::Lrr => {
            let total = n + x_tt.ncols();
            let mut x = DenseMatrix::zeros(x_tr.nrows(), total);
            x.columns_mut(0, n).copy_from(&x_tr);
            x.columns_mut(n, x_tt.ncols()).copy_from(&x_tt);
            let result = lrr_solve(&x, &x_tr, config.lambda3, config.tol, config.max_iter)?;
            (result.low_rank, result.converged, result.history)
        }
    };

    let z_tr = z.columns(0, n).into_owned();
    let z_tt = z.columns(n, z.ncols() - n).into_owned();
    let labels = one_hot(&dataset.train_labels, dataset.partition.num_classes())?;
    let model = fit_ridge(&z_tr, &labels, gamma, &dataset.partition)?;
    let predicted = model.predict(&z_tt)?;
    let acc = accuracy(&predicted, &dataset.test_labels)?;
    let ratio = off_block_mass_ratio(&z_tr, &dataset.partition)?;
    let final_relative_error = history.last().map(|r| r.relative_error).unwrap_or(0.0);

    Ok((
        TrialRecord {
            trial: 0,
            seed: 0,
            accuracy: acc,
            off_block_ratio: ratio,
            converged,
            iterations: history.len(),
            final_relative_error,
        },
        history,
    ))
}

/// Repeats the full pipeline on regenerated data (seed `base_seed + trial`)
/// and aggregates. Non-converged trials are flagged, never dropped; any
/// trial error aborts with the trial index attached.
pub fn run_experiment(
    generator: &SynthSpec,
    config: &SolverConfig,
    gamma: f64,
    repeats: usize,
    base_seed: u64,
    method: RepresentationMethod,
    keep_histories: bool,
) -> Result<ExperimentReport> {
    if repeats == 0 {
        return Err(Error::Validation("repeats must be >= 1".into()));
    }
    let mut trials = Vec::with_capacity(repeats);
    let mut histories = keep_histories.then(Vec::new);
    for trial in 0..repeats {
        let seed = base_seed + trial as u64;
        let dataset =
            synth_union_of_subspaces(generator, seed).map_err(|e| trial_error(trial, e))?;
        let (mut record, history) =
            run_trial(&dataset, config, gamma, method).map_err(|e| trial_error(trial, e))?;
        record.trial = trial;
        record.seed = seed;
        trials.push(record);
        if let Some(h) = histories.as_mut() {
            h.push(history);
        }
    }
    Ok(ExperimentReport { trials, histories })
}
