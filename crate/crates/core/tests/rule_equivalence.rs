//! Each rewrite rule against the simulator: both sides must act identically
//! (up to global phase) on the truncated space, with fresh ancillae starting
//! and ending in 0.

mod support;

use support::{check_rule_case, rule_cases};

#[test]
fn every_rule_from_one_to_thirteen_is_covered() {
    let cases = rule_cases();
    for id in 1..=13 {
        assert!(cases.iter().any(|c| c.rule == id), "rule {id} has no case");
    }
}

#[test]
fn rules_preserve_the_action() {
    let mut failures = vec![];
    for c in rule_cases() {
        let dev = check_rule_case(&c);
        if dev > c.regime.tolerance() {
            failures.push(format!(
                "rule {} on {}: {dev:.3e} ({:?})",
                c.rule, c.gate, c.regime
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn comparison_detects_a_wrong_replacement() {
    use hybc_core::gates::ops;
    use support::{sequence_deviation, Regime};
    let d = sequence_deviation(
        &[ops::cd(0.4, 0.3, "q", "m")],
        &[ops::cd(0.41, 0.3, "q", "m")],
        Regime::LowFock,
    );
    assert!(d > 1e-3, "{d}");
    let d = sequence_deviation(
        &[ops::r(0.7, "m")],
        &[ops::r(0.7, "m"), ops::z("q")],
        Regime::Exact,
    );
    assert!(d > 1.0, "{d}");
    // global phase alone is not a difference
    let d = sequence_deviation(
        &[ops::rz(0.5, "q")],
        &[ops::rz(0.5, "q"), ops::rz(0.0, "q")],
        Regime::Exact,
    );
    assert!(d < 1e-12);
}
