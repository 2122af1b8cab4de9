//! Acceptance suite: every criterion at its stated tolerance on the default
//! configuration (n = 32, tol = 1e-10). Prints one PASS/FAIL line per
//! criterion; each criterion is also its own test.

use std::sync::OnceLock;

use estokes::harness::{run_acceptance, AcceptanceReport, RunConfig};

fn report() -> &'static AcceptanceReport {
    static REPORT: OnceLock<AcceptanceReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let r = run_acceptance(&RunConfig::default()).expect("default acceptance config is valid");
        for c in &r.criteria {
            println!("{}", c.line());
        }
        r
    })
}

fn check(id: u32) {
    let c = report().criterion(id).expect("criterion present");
    println!("{}", c.line());
    assert!(c.passed, "{}", c.line());
}

#[test]
fn summary() {
    let r = report();
    assert_eq!(r.criteria.len(), 9);
    let failed: Vec<u32> = r.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    println!("{} of 9 criteria pass; failing: {failed:?}", 9 - failed.len());
}

#[test]
fn criterion_1_eps_to_infinity_rate() {
    check(1);
}

#[test]
fn criterion_2_eps_to_zero_convergence() {
    check(2);
}

#[test]
fn criterion_3_compatible_trace_coincidence() {
    check(3);
}

#[test]
fn criterion_4_linear_in_delta() {
    check(4);
}

#[test]
fn criterion_5_projection_inequality() {
    check(5);
}

#[test]
fn criterion_6_pressure_gradient_non_convergence() {
    check(6);
}

#[test]
fn criterion_7_discretization_rates() {
    check(7);
}

#[test]
fn criterion_8_structural_identities() {
    check(8);
}

#[test]
fn criterion_9_solver_contract() {
    check(9);
}
