//! Command-line front end: data synthesis, training, prediction,
//! out-of-sample solving, baselines, and repeated experiments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use bdlrr::baselines::{default_rpca_lambda, lrr_solve, rpca_solve};
use bdlrr::classifier::{fit_ridge, one_hot, TrainedModel};
use bdlrr::data::{
    accuracy, normalize_columns, run_experiment, synth_union_of_subspaces, PartitionedDataset,
    RepresentationMethod, SynthSpec,
};
use bdlrr::error::{Error, Result};
use bdlrr::io::{load_labels, load_matrix, save_labels, save_matrix, write_text};
use bdlrr::oos::{oos_predict, OosConfig};
use bdlrr::solver::{solve, SolverConfig};
use bdlrr::structure::off_block_mass_ratio;

#[derive(Parser)]
#[command(
    name = "bdlrr",
    version,
    about = "Block-diagonal low-rank representation learning",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic union-of-subspaces dataset.
    Synth(SynthArgs),
    /// Learn representations and the ridge classifier end to end.
    Train(TrainArgs),
    /// Classify representation columns with a trained model.
    Predict(PredictArgs),
    /// Represent and classify new instances against a trained model.
    Oos(OosArgs),
    /// Robust PCA decomposition of a matrix file.
    Rpca(RpcaArgs),
    /// Low-rank representation of a matrix file over a dictionary.
    Lrr(LrrArgs),
    /// Repeat the synthetic pipeline and aggregate accuracies.
    Eval(EvalArgs),
}

/// Generator flags shared by `synth` and `eval`.
#[derive(Args)]
struct GeneratorArgs {
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long = "subspace-dim", default_value_t = 10)]
    subspace_dim: usize,
    #[arg(long, default_value_t = 50)]
    ambient: usize,
    /// Training samples per class.
    #[arg(long, default_value_t = 20)]
    train: usize,
    /// Test samples per class.
    #[arg(long, default_value_t = 20)]
    test: usize,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
}

impl GeneratorArgs {
    fn spec(&self) -> SynthSpec {
        SynthSpec {
            classes: self.classes,
            subspace_dim: self.subspace_dim,
            ambient_dim: self.ambient,
            n_train_per_class: self.train,
            n_test_per_class: self.test,
            noise_std: self.noise,
        }
    }

    fn echo(&self, out: &mut String) {
        let _ = writeln!(out, "classes={}", self.classes);
        let _ = writeln!(out, "subspace_dim={}", self.subspace_dim);
        let _ = writeln!(out, "ambient={}", self.ambient);
        let _ = writeln!(out, "train={}", self.train);
        let _ = writeln!(out, "test={}", self.test);
        let _ = writeln!(out, "noise={}", self.noise);
    }
}

/// Solver hyperparameters shared by `train` and `eval`.
#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 5.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 0.5)]
    lambda2: f64,
    #[arg(long, default_value_t = 15.0)]
    lambda3: f64,
    #[arg(long, default_value_t = 1.15)]
    rho: f64,
    #[arg(long, default_value_t = 0.1)]
    mu0: f64,
    #[arg(long = "mu-max", default_value_t = 1e8)]
    mu_max: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda3: self.lambda3,
            rho: self.rho,
            mu0: self.mu0,
            mu_max: self.mu_max,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    fn echo(&self, out: &mut String) {
        let _ = writeln!(out, "lambda1={}", self.lambda1);
        let _ = writeln!(out, "lambda2={}", self.lambda2);
        let _ = writeln!(out, "lambda3={}", self.lambda3);
        let _ = writeln!(out, "rho={}", self.rho);
        let _ = writeln!(out, "mu0={}", self.mu0);
        let _ = writeln!(out, "mu_max={}", self.mu_max);
        let _ = writeln!(out, "tol={}", self.tol);
        let _ = writeln!(out, "max_iter={}", self.max_iter);
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory with x_tr.txt, x_tt.txt, train_labels.txt, test_labels.txt.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Ridge regularization of the classifier.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
}

#[derive(Args)]
struct PredictArgs {
    /// Model directory written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Representation matrix file (n x m), one column per sample.
    #[arg(long)]
    representation: PathBuf,
    /// Output label file, one label per line.
    #[arg(long)]
    out: PathBuf,
    /// Optional true labels; accuracy is printed when given.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct OosArgs {
    /// Model directory written by `train` (needs its x_tr.txt alongside).
    #[arg(long)]
    model: PathBuf,
    /// New instances as a d x m matrix file.
    #[arg(long)]
    instances: PathBuf,
    /// Output label file, one label per line.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 0.5)]
    lambda2: f64,
    #[arg(long, default_value_t = 15.0)]
    lambda3: f64,
    #[arg(long = "max-iter", default_value_t = 300)]
    max_iter: usize,
    #[arg(long = "step-tol", default_value_t = 1e-8)]
    step_tol: f64,
}

#[derive(Args)]
struct RpcaArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to 1/sqrt(max(rows, cols)) of the input.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
}

#[derive(Args)]
struct LrrArgs {
    #[arg(long)]
    input: PathBuf,
    /// Dictionary matrix file; defaults to the input itself.
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Bdlrr,
    Lrr,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long = "base-seed", default_value_t = 7)]
    base_seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Bdlrr)]
    method: MethodArg,
    /// Report file path.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Oos(args) => cmd_oos(args),
        Command::Rpca(args) => cmd_rpca(args),
        Command::Lrr(args) => cmd_lrr(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec = args.generator.spec();
    let dataset = synth_union_of_subspaces(&spec, args.seed)?;
    ensure_dir(&args.out)?;
    save_matrix(&args.out.join("x_tr.txt"), &dataset.x_tr)?;
    save_matrix(&args.out.join("x_tt.txt"), &dataset.x_tt)?;
    save_labels(&args.out.join("train_labels.txt"), &dataset.train_labels)?;
    save_labels(&args.out.join("test_labels.txt"), &dataset.test_labels)?;

    let mut manifest = String::new();
    args.generator.echo(&mut manifest);
    let _ = writeln!(manifest, "seed={}", args.seed);
    write_text(&args.out.join("manifest.txt"), &manifest)?;
    println!(
        "synth: wrote {} training and {} test columns to {}",
        dataset.x_tr.ncols(),
        dataset.x_tt.ncols(),
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let config = args.solver.config();
    let x_tr_raw = load_matrix(&args.data.join("x_tr.txt"))?;
    let x_tt_raw = load_matrix(&args.data.join("x_tt.txt"))?;
    let train_labels = load_labels(&args.data.join("train_labels.txt"))?;
    let test_labels = load_labels(&args.data.join("test_labels.txt"))?;
    let dataset =
        PartitionedDataset::from_labeled(&x_tr_raw, &train_labels, x_tt_raw, test_labels)?;

    let (x_tr, zero_tr) = normalize_columns(&dataset.x_tr);
    let (x_tt, zero_tt) = normalize_columns(&dataset.x_tt);
    for j in zero_tr.iter().chain(zero_tt.iter()) {
        eprintln!("warning: zero column {j} passed through normalization");
    }

    let solution = solve(&x_tr, &x_tt, &dataset.partition, &config)?;
    let n = x_tr.ncols();
    let (z_tr, z_tt) = solution.split_z(n);
    let labels = one_hot(&dataset.train_labels, dataset.partition.num_classes())?;
    let model = fit_ridge(&z_tr, &labels, args.gamma, &dataset.partition)?;
    let predicted = model.predict(&z_tt)?;
    let acc = accuracy(&predicted, &dataset.test_labels)?;
    let ratio = off_block_mass_ratio(&z_tr, &dataset.partition)?;

    ensure_dir(&args.out)?;
    model.save(&args.out)?;
    save_matrix(&args.out.join("x_tr.txt"), &x_tr)?;
    save_matrix(&args.out.join("z_tt.txt"), &z_tt)?;
    save_matrix(&args.out.join("e.txt"), &solution.e)?;
    save_labels(&args.out.join("test_predictions.txt"), &predicted)?;
    write_text(&args.out.join("history.csv"), &solution.history.to_csv())?;

    let mut metrics = String::new();
    let _ = writeln!(metrics, "accuracy={:.12}", acc);
    let _ = writeln!(metrics, "off_block_ratio={:.12e}", ratio);
    let _ = writeln!(metrics, "converged={}", solution.converged);
    let _ = writeln!(metrics, "iterations={}", solution.iterations());
    let _ = writeln!(
        metrics,
        "relative_error={:.12e}",
        solution.history.last().map(|r| r.relative_error).unwrap_or(0.0)
    );
    args.solver.echo(&mut metrics);
    let _ = writeln!(metrics, "gamma={}", args.gamma);
    write_text(&args.out.join("metrics.txt"), &metrics)?;

    println!(
        "train: accuracy {acc:.4}, off-block ratio {ratio:.3e}, {} iterations, converged={}",
        solution.iterations(),
        solution.converged
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = TrainedModel::load(&args.model)?;
    let z_tt = load_matrix(&args.representation)?;
    let predicted = model.predict(&z_tt)?;
    save_labels(&args.out, &predicted)?;
    println!("predict: wrote {} labels to {}", predicted.len(), args.out.display());
    if let Some(labels_path) = args.labels {
        let truth = load_labels(&labels_path)?;
        let acc = accuracy(&predicted, &truth)?;
        println!("predict: accuracy {acc:.4}");
    }
    Ok(())
}

fn cmd_oos(args: OosArgs) -> Result<()> {
    let model = TrainedModel::load(&args.model)?;
    let x_tr = load_matrix(&args.model.join("x_tr.txt"))?;
    let instances_raw = load_matrix(&args.instances)?;
    let (instances, zero_cols) = normalize_columns(&instances_raw);
    for j in &zero_cols {
        eprintln!("warning: zero instance column {j}");
    }
    let config = OosConfig {
        beta1: args.lambda1 / args.lambda3,
        beta2: args.lambda2 / (2.0 * args.lambda3),
        max_iter: args.max_iter,
        step_tol: args.step_tol,
    };

    let mut predicted = Vec::with_capacity(instances.ncols());
    for j in 0..instances.ncols() {
        let b = DVector::from_column_slice(instances.column(j).as_slice());
        predicted.push(oos_predict(&b, &x_tr, &model, &config)?);
    }
    save_labels(&args.out, &predicted)?;
    println!(
        "oos: wrote {} labels to {} (beta1={}, beta2={})",
        predicted.len(),
        args.out.display(),
        config.beta1,
        config.beta2
    );
    Ok(())
}

fn cmd_rpca(args: RpcaArgs) -> Result<()> {
    let x = load_matrix(&args.input)?;
    let lambda = args
        .lambda
        .unwrap_or_else(|| default_rpca_lambda(x.nrows(), x.ncols()));
    let result = rpca_solve(&x, lambda, args.tol, args.max_iter)?;

    ensure_dir(&args.out)?;
    save_matrix(&args.out.join("x0.txt"), &result.low_rank)?;
    save_matrix(&args.out.join("e.txt"), &result.sparse)?;
    write_text(&args.out.join("history.csv"), &result.history.to_csv())?;
    let mut manifest = String::new();
    let _ = writeln!(manifest, "lambda={}", lambda);
    let _ = writeln!(manifest, "tol={}", args.tol);
    let _ = writeln!(manifest, "max_iter={}", args.max_iter);
    let _ = writeln!(manifest, "converged={}", result.converged);
    let _ = writeln!(manifest, "iterations={}", result.iterations());
    write_text(&args.out.join("manifest.txt"), &manifest)?;
    println!(
        "rpca: lambda {lambda:.6}, {} iterations, converged={}",
        result.iterations(),
        result.converged
    );
    Ok(())
}

fn cmd_lrr(args: LrrArgs) -> Result<()> {
    let x = load_matrix(&args.input)?;
    let dict = match &args.dict {
        Some(path) => load_matrix(path)?,
        None => x.clone(),
    };
    let result = lrr_solve(&x, &dict, args.lambda, args.tol, args.max_iter)?;

    ensure_dir(&args.out)?;
    save_matrix(&args.out.join("z.txt"), &result.low_rank)?;
    save_matrix(&args.out.join("e.txt"), &result.sparse)?;
    write_text(&args.out.join("history.csv"), &result.history.to_csv())?;
    let mut manifest = String::new();
    let _ = writeln!(manifest, "lambda={}", args.lambda);
    let _ = writeln!(manifest, "tol={}", args.tol);
    let _ = writeln!(manifest, "max_iter={}", args.max_iter);
    let _ = writeln!(manifest, "dict={}", if args.dict.is_some() { "external" } else { "self" });
    let _ = writeln!(manifest, "converged={}", result.converged);
    let _ = writeln!(manifest, "iterations={}", result.iterations());
    write_text(&args.out.join("manifest.txt"), &manifest)?;
    println!(
        "lrr: lambda {}, {} iterations, converged={}",
        args.lambda,
        result.iterations(),
        result.converged
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let spec = args.generator.spec();
    let config = args.solver.config();
    let method = match args.method {
        MethodArg::Bdlrr => RepresentationMethod::Bdlrr,
        MethodArg::Lrr => RepresentationMethod::Lrr,
    };
    let report = run_experiment(
        &spec,
        &config,
        args.gamma,
        args.repeats,
        args.base_seed,
        method,
        false,
    )?;

    let mut text = report.to_text();
    let _ = writeln!(text, "# configuration");
    let mut echo = String::new();
    args.generator.echo(&mut echo);
    args.solver.echo(&mut echo);
    let _ = writeln!(echo, "gamma={}", args.gamma);
    let _ = writeln!(echo, "repeats={}", args.repeats);
    let _ = writeln!(echo, "base_seed={}", args.base_seed);
    let _ = writeln!(
        echo,
        "method={}",
        match args.method {
            MethodArg::Bdlrr => "bdlrr",
            MethodArg::Lrr => "lrr",
        }
    );
    for line in echo.lines() {
        let _ = writeln!(text, "# {line}");
    }
    write_text(&args.out, &text)?;
    println!(
        "eval: mean accuracy {:.4} +- {:.4} over {} trials ({} non-converged)",
        report.mean_accuracy(),
        report.std_accuracy(),
        report.trials.len(),
        report.flagged_nonconverged()
    );
    Ok(())
}
