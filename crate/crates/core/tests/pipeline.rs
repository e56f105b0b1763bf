use lbra_core::analytic::{self, p_c_in_v};
use lbra_core::montecarlo::{run_trial, trace_trial};
use lbra_core::{
    run_experiment, run_trials, sweep, AnalyticPoint, Axis, DeploymentParams, ExperimentSpec, ModelError, Policy,
    RadioParams, SpectrumPlan,
};

fn spec(lambda_d: f64, window: f64, trials: usize, policy: Policy) -> ExperimentSpec {
    ExperimentSpec {
        deployment: DeploymentParams::new(lambda_d, 1e-4, window, 77).unwrap(),
        radio: RadioParams::default(),
        plan: SpectrumPlan::default(),
        policy,
        trials,
        resolution: 128,
    }
}

#[test]
fn unconstrained_relay_outage_is_capture_failure() {
    let mut s = spec(1e-3, 1000.0, 60, Policy::Npra);
    s.plan = SpectrumPlan::new(1800, 10_000_000, 30, 1).unwrap();
    let out = run_trials(&s).unwrap();
    assert_eq!(out.capture_rate, 1.0 - out.epsilon);
    let expected = 1.0 - p_c_in_v(1e-3, 60, 1e-4, &s.radio);
    assert!((out.epsilon - expected).abs() < 0.03, "{} vs {expected}", out.epsilon);
}

#[test]
fn sweep_rows_match_single_experiments() {
    let template = spec(1e-3, 500.0, 10, Policy::Npra);
    let rows = sweep(Axis::LambdaD, &[1e-3, 2e-3], &template, &Policy::ALL).unwrap();
    for row in &rows {
        let mut s = template.with_policy(row.policy);
        s.deployment.lambda_d = row.value;
        assert_eq!(&run_experiment(&s).unwrap(), row);
    }
}

#[test]
fn gateway_sweep_keeps_device_density() {
    let template = spec(2e-3, 500.0, 8, Policy::Lbra);
    let rows = sweep(Axis::LambdaG, &[1e-4, 3e-4], &template, &[Policy::Lbra]).unwrap();
    for (row, lg) in rows.iter().zip([1e-4, 3e-4]) {
        assert_eq!((row.axis, row.value, row.lambda_d), (Axis::LambdaG, lg, 2e-3));
        assert_eq!(row.no_outage_capacity, 2e-3);
        assert!(row.capacity <= row.no_outage_capacity);
        assert!(row.mean_load > 0.0);
    }
    // more gateways, smaller groups
    assert!(rows[1].mean_load < rows[0].mean_load);
}

#[test]
fn trace_agrees_with_trial() {
    let s = spec(3e-3, 500.0, 1, Policy::Lbra);
    for i in 0..5 {
        let trace = trace_trial(&s, i).unwrap();
        assert_eq!(trace.result, run_trial(&s, i).unwrap());
        assert_eq!(trace.plan.devices_moved(), trace.result.transferred);
        assert_eq!(trace.snapshot.devices.len(), trace.result.n_devices);
    }
}

#[test]
fn policies_share_snapshots() {
    let n = run_trials(&spec(2e-3, 500.0, 12, Policy::Npra)).unwrap();
    let l = run_trials(&spec(2e-3, 500.0, 12, Policy::Lbra)).unwrap();
    let devices = |o: &lbra_core::ExperimentOutcome| o.per_trial.iter().map(|t| t.n_devices).collect::<Vec<_>>();
    assert_eq!(devices(&n), devices(&l));
    assert_eq!(n.mean_transferred, 0.0);
    assert!(l.mean_transferred > 0.0);
}

#[test]
fn analytic_and_simulation_rank_policies_alike() {
    let point = AnalyticPoint {
        radio: RadioParams::default(),
        plan: SpectrumPlan::default(),
        lambda_d: 3e-3,
        lambda_g: 1e-4,
        window: 1000.0,
        samples: 4000,
        seed: 77,
    };
    let a_n = analytic::outage(&point, Policy::Npra).unwrap().epsilon;
    let a_l = analytic::outage(&point, Policy::Lbra).unwrap().epsilon;
    let s_n = run_trials(&spec(3e-3, 1000.0, 40, Policy::Npra)).unwrap().epsilon;
    let s_l = run_trials(&spec(3e-3, 1000.0, 40, Policy::Lbra)).unwrap().epsilon;
    assert_eq!(a_l > a_n, s_l > s_n);
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = spec(1e-3, 500.0, 0, Policy::Npra);
    assert!(matches!(run_trials(&s), Err(ModelError::Parameter { name: "trials", .. })));
    s.trials = 1;
    s.resolution = 10;
    assert!(matches!(run_trials(&s), Err(ModelError::Parameter { name: "resolution", .. })));
    assert!(matches!(RadioParams::new(3.0, 2.0), Err(ModelError::DivergentIntegral { .. })));
}
