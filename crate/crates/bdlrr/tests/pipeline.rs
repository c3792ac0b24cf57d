//! Cross-module pipeline tests on generated data.

use nalgebra::DVector;

use bdlrr::classifier::{fit_ridge, one_hot};
use bdlrr::data::{run_experiment, synth_union_of_subspaces, RepresentationMethod, SynthSpec};
use bdlrr::error::Error;
use bdlrr::oos::{oos_predict, OosConfig};
use bdlrr::solver::{solve, SolverConfig};

fn three_subspace_spec() -> SynthSpec {
    SynthSpec {
        classes: 3,
        subspace_dim: 4,
        ambient_dim: 30,
        n_train_per_class: 15,
        n_test_per_class: 8,
        noise_std: 0.02,
    }
}

#[test]
fn three_subspace_data_converges_within_cap() {
    let dataset = synth_union_of_subspaces(&three_subspace_spec(), 3).unwrap();
    let config = SolverConfig {
        lambda1: 3.0,
        lambda2: 2.5,
        ..SolverConfig::default()
    };
    let solution = solve(&dataset.x_tr, &dataset.x_tt, &dataset.partition, &config).unwrap();
    assert!(solution.converged);
    assert!(solution.iterations() <= 500);
    let last = solution.history.last().unwrap();
    assert!(last.feas_residual.max(last.pz_residual).max(last.qz_residual) <= config.tol);
}

// A training column fed back as a "new" instance must land in its own
// class.
#[test]
fn oos_recovers_training_column_classes() {
    let dataset = synth_union_of_subspaces(&three_subspace_spec(), 5).unwrap();
    let config = SolverConfig {
        lambda1: 3.0,
        lambda2: 2.5,
        ..SolverConfig::default()
    };
    let solution = solve(&dataset.x_tr, &dataset.x_tt, &dataset.partition, &config).unwrap();
    let (z_tr, _) = solution.split_z(dataset.x_tr.ncols());
    let labels = one_hot(&dataset.train_labels, 3).unwrap();
    let model = fit_ridge(&z_tr, &labels, 1.0, &dataset.partition).unwrap();

    let oos_config = OosConfig {
        max_iter: 2000,
        ..OosConfig::from_solver(&config)
    };
    for j in (0..dataset.x_tr.ncols()).step_by(5) {
        let b = DVector::from_column_slice(dataset.x_tr.column(j).as_slice());
        let label = oos_predict(&b, &dataset.x_tr, &model, &oos_config).unwrap();
        assert_eq!(label, dataset.train_labels[j], "training column {j}");
    }
}

#[test]
fn failing_trial_reports_its_index() {
    let bad = SynthSpec {
        subspace_dim: 40, // >= ambient_dim
        ..three_subspace_spec()
    };
    let err = run_experiment(
        &bad,
        &SolverConfig::default(),
        1.0,
        3,
        1,
        RepresentationMethod::Bdlrr,
        false,
    )
    .unwrap_err();
    match err {
        Error::TrialFailed { trial, .. } => assert_eq!(trial, 0),
        other => panic!("expected TrialFailed, got {other:?}"),
    }
}
