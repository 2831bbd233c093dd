//! Validation targets not already exercised by the acceptance suite.

use fdp_core::simulation::{run_validation, ValidationTarget};

fn assert_passes(target: ValidationTarget) {
    let report = run_validation(target, None).unwrap();
    for c in &report.checks {
        println!("{}: {} in [{}, {}] passed={}", c.name, c.statistic, c.lower, c.upper, c.passed);
    }
    assert!(report.passed, "{}", report.to_csv());
}

#[test]
fn storey_null_mass() {
    assert_passes(ValidationTarget::StoreyNullMass);
}

#[test]
fn uniformity_test_size() {
    assert_passes(ValidationTarget::UniformityTestSize);
}

#[test]
fn every_target_has_a_valid_default_scenario() {
    for target in ValidationTarget::ALL {
        let scenario = target.default_scenario();
        assert!(scenario.validate().is_ok(), "{}", target.name());
        assert!(!target.description().is_empty());
    }
}
