use htype_web::{counterexample_summary, kernel_profile_values, structure_report_json};

#[test]
fn kernel_profile_is_interleaved_and_matches_core() {
    let spec = r#"{"type":"abel","r":0.3,"n":1,"m":2}"#;
    let v = kernel_profile_values(spec, 0.8, 2.0, 5).unwrap();
    assert_eq!(v.len(), 15);
    let parsed: htype_core::kernels::KernelSpec = serde_json::from_str(spec).unwrap();
    for row in v.chunks(3) {
        let want = htype_core::kernels::evaluate_radial(&parsed, 0.8, row[0]).unwrap();
        assert_eq!((row[1], row[2]), (want.re, want.im));
    }
    assert_eq!(v[12], 2.0);
    assert!(kernel_profile_values(spec, 0.8, 2.0, 1).is_err());
    assert!(kernel_profile_values(r#"{"type":"abel","r":1.5,"n":1,"m":2}"#, 0.8, 2.0, 5).is_err());
}

#[test]
fn counterexample_vanishes_at_reported_radii() {
    let s = counterexample_summary(2, 3, 1, 1.0, 3.0, 61).unwrap();
    assert!(s.predicted_eigenvalue.abs() < 1e-12);
    assert!(!s.zero_radii.is_empty());
    // m = 3: b_3(x) = sin x / x, zeros at multiples of π/λ
    for (i, x) in s.zero_radii.iter().enumerate() {
        assert!((x * s.lambda - std::f64::consts::PI * (i + 1) as f64).abs() < 1e-10);
    }
    assert_eq!(s.profile.len(), 61);
    assert!((s.profile[0].1 - 1.0).abs() < 1e-12);
}

#[test]
fn structure_report_round_trips() {
    let json = structure_report_json(2, 3).unwrap();
    let report: htype_core::VerificationReport = serde_json::from_str(&json).unwrap();
    assert!(report.passed());
    assert!(structure_report_json(1, 3).is_err());
}
