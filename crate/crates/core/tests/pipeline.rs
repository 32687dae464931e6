use proptest::prelude::*;

use qais_core::estimator::{qais_estimate, qais_estimate_pmf, MixtureConfig};
use qais_core::statevector::ParamsFile;
use qais_core::target::*;
use qais_core::train::{train_qcbm, TrainConfig};
use qais_core::vegas::{vegas_integrate, VegasConfig};
use qais_core::{AnsatzSpec, GridSpec};

#[test]
fn trained_circuit_drives_an_unbiased_estimate() {
    let spec = GridSpec::unit(vec![2, 2]).unwrap();
    let target = build_target_pmf(&spec, &gauss2(), &TargetOptions { samples_per_cell: 8, ..Default::default() }).unwrap();
    let ansatz = AnsatzSpec::parse("EZ,U3").unwrap();
    let report = train_qcbm(&ansatz, 4, &target, &TrainConfig { max_iterations: 400, seed: 1, ..Default::default() }).unwrap();
    assert!(report.final_kl < report.initial_kl());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.toml");
    let pf = ParamsFile {
        n: 4,
        qubits: vec![2, 2],
        layers: ansatz,
        seed: 1,
        final_kl: report.final_kl,
        params: report.best_params.0.clone(),
    };
    pf.write(&path).unwrap();
    let back = ParamsFile::read(&path).unwrap();
    assert_eq!(back, pf);

    let state = back.state().unwrap();
    let r = qais_estimate(&spec, &gauss2(), &state, 200_000, MixtureConfig::new(0.1).unwrap(), 5).unwrap();
    assert!((r.estimate - 1.0).abs() < 5.0 * r.std, "{} {}", r.estimate, r.std);
}

#[test]
fn qais_and_vegas_agree_on_multipeak() {
    let f = multipeak(3).unwrap();
    let spec = GridSpec::unit(vec![4, 4, 4]).unwrap();
    let q = build_target_pmf(&spec, &f, &TargetOptions { samples_per_cell: 4, ..Default::default() }).unwrap();
    let a = qais_estimate_pmf(&spec, &f, q.probabilities(), 200_000, MixtureConfig::new(0.0).unwrap(), 2).unwrap();
    let cfg = VegasConfig { samples_per_iteration: 100_000, iterations: 8, seed: 2, ..Default::default() };
    let b = vegas_integrate(&f, &cfg).unwrap();
    let sigma = (a.std.powi(2) + b.combined_sigma.powi(2)).sqrt();
    assert!((a.estimate - b.combined).abs() < 4.0 * sigma, "{} {} {sigma}", a.estimate, b.combined);
}

#[test]
fn kinematics_fixture_matches_builtin() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/p11.toml");
    assert_eq!(PentagonKinematics::read(&path).unwrap(), PentagonKinematics::p11());
}

fn grid_strategy() -> impl Strategy<Value = GridSpec> {
    prop::collection::vec((1u32..=4, -2.0f64..2.0, 0.1f64..3.0), 1..=4).prop_map(|axes| {
        let qubits = axes.iter().map(|a| a.0).collect();
        let lower: Vec<f64> = axes.iter().map(|a| a.1).collect();
        let upper = axes.iter().map(|a| a.1 + a.2).collect();
        GridSpec::new(qubits, lower, upper).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_is_exact_for_any_proposal(spec in grid_strategy(), seed in any::<u64>(), shots in 2u64..3000, beta in 0.0f64..0.9) {
        let cells = spec.num_cells() as usize;
        let mut q: Vec<f64> = (0..cells).map(|i| ((i as u64).wrapping_mul(seed | 1) % 7) as f64).collect();
        q[0] += 1.0;
        let z: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= z);
        let f = constant(2.5, spec.lower().iter().copied().zip(spec.upper().iter().copied()).collect());
        let r = qais_estimate_pmf(&spec, &f, &q, shots, MixtureConfig::new(beta).unwrap(), seed).unwrap();
        let exact = 2.5 * spec.domain_volume();
        prop_assert!(((r.estimate - exact) / exact).abs() <= 1e-12);
        prop_assert!(r.states <= cells && r.states as u64 <= shots);
    }

    #[test]
    fn vegas_constant_is_exact(spec in grid_strategy(), seed in any::<u64>()) {
        let domain: Vec<(f64, f64)> = spec.lower().iter().copied().zip(spec.upper().iter().copied()).collect();
        let f = constant(-1.5, domain);
        let cfg = VegasConfig { samples_per_iteration: 2000, iterations: 3, seed, bins: 8, ..Default::default() };
        let r = vegas_integrate(&f, &cfg).unwrap();
        let exact = -1.5 * spec.domain_volume();
        prop_assert!(((r.combined - exact) / exact).abs() <= 1e-12);
    }

    #[test]
    fn estimates_are_seed_deterministic(seed in any::<u64>()) {
        let spec = GridSpec::unit(vec![3, 3]).unwrap();
        let q = build_target_pmf(&spec, &ring(), &TargetOptions::default()).unwrap();
        let mix = MixtureConfig::new(0.0).unwrap();
        let a = qais_estimate_pmf(&spec, &ring(), q.probabilities(), 500, mix, seed).unwrap();
        let b = qais_estimate_pmf(&spec, &ring(), q.probabilities(), 500, mix, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
