use degrd_core::experiments::{
    classical_comparison_study, conservation_study, exit_alternative_study, flux_decay_study, read_measurements,
    truncation_study, verdict, ConservationCase, FluxStudyParams,
};

#[test]
fn exit_alternatives_hit_their_designated_status() {
    let report = exit_alternative_study().unwrap();
    assert!(report.pass, "{:#?}", report.measurements);
}

#[test]
fn truncation_differences_decrease() {
    let report = truncation_study(&[2.0, 4.0, 8.0], 16.0, 2.0, 0.01, 1e-4).unwrap();
    assert!(report.pass, "{:#?}", report.measurements);
    assert!(truncation_study(&[2.0, 4.0], 16.0, 2.0, 0.01, 1e-4).is_err());
}

#[test]
fn classical_and_degenerate_logistic_differ_at_the_boundary() {
    for lambda in [1.0, 4.0] {
        let report = classical_comparison_study(lambda, 20.0).unwrap();
        assert!(report.pass, "lambda = {lambda}: {:#?}", report.measurements);
    }
    assert!(classical_comparison_study(-1.0, 1.0).is_err());
}

#[test]
fn flux_slopes_grow_with_s_on_a_coarse_grid() {
    let params = FluxStudyParams { n_collar: 256, n_interior: 32, ..FluxStudyParams::default() };
    let report = flux_decay_study(&[1.0, 2.0], &params).unwrap();
    assert!(report.pass, "{:#?}", report.measurements);
}

#[test]
fn verdicts_survive_a_round_trip_through_disk() {
    let report = conservation_study(&[ConservationCase::IntervalSingle], &[(0.1, 0.01)], 1e-10).unwrap();
    let dir = tempfile::tempdir().unwrap();
    report.write_to(dir.path()).unwrap();
    let back = read_measurements(&dir.path().join("measurements.csv")).unwrap();
    assert_eq!(verdict(&back), report.pass);
    assert!(report.pass);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["name"], "conservation");
}
