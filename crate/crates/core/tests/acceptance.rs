use siegellab::acceptance::{self, Mode};
use siegellab::numeric::zeta;

#[test]
fn acceptance_suite() {
    let reports = acceptance::run_all(Mode::Full);
    for r in &reports {
        println!("[{}] {:>2} {:<26} {:>7.1}s  {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.seconds, r.detail);
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn corrupted_zeta_fails_the_mean_value_criterion() {
    let (ok, _) = acceptance::mean_value(Mode::Full, zeta(2)).unwrap();
    assert!(ok);
    let (ok, detail) = acceptance::mean_value(Mode::Full, 1.05 * zeta(2)).unwrap();
    assert!(!ok, "{detail}");
}
