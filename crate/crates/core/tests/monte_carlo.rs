use ace_core::simulate::{run_monte_carlo, DgpConfig, EstimatorSpec, McConfig, NoiseSpec};

#[test]
fn gaussian_noise_gives_no_improvement_over_dml() {
    let dgp = DgpConfig {
        noise: NoiseSpec::Gaussian { sigma: 1.0 },
        ..DgpConfig::demand(5000)
    };
    let cfg = McConfig {
        base_seed: 1,
        ..McConfig::new(dgp, vec![EstimatorSpec::Dml, EstimatorSpec::Ace(3)], 20)
    };
    let report = run_monte_carlo(&cfg).unwrap().report;
    let dml = report.row(EstimatorSpec::Dml).unwrap();
    let ace3 = report.row(EstimatorSpec::Ace(3)).unwrap();
    assert!(
        ace3.failures > 0 || ace3.rmse >= 0.8 * dml.rmse,
        "ace3 rmse {} vs dml {}",
        ace3.rmse,
        dml.rmse
    );
}

#[test]
fn demand_scenario_report_is_thread_independent() {
    let cfg = McConfig {
        base_seed: 5,
        ..McConfig::new(
            DgpConfig::demand(1000),
            vec![EstimatorSpec::Ace(1), EstimatorSpec::Ace(5), EstimatorSpec::Dml],
            8,
        )
    };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run_monte_carlo(&cfg)).unwrap();
    let b = four.install(|| run_monte_carlo(&cfg)).unwrap();
    assert_eq!(a, b);
    for row in &a.report.rows {
        assert_eq!(row.replicates, 8);
    }
}
