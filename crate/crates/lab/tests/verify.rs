use gkdv_core::linearized::apply_l;
use gkdv_core::soliton::q_profile;
use gkdv_core::Field;
use gkdv_lab::{verify_suite, verify_with, VerifyOptions};

/// `L` with the sign of the `5 Q^4` potential flipped.
fn mutated_l(eps: &Field) -> Field {
    let q = q_profile(eps.grid());
    let lq = apply_l(eps);
    let bump: Vec<f64> = q.values().iter().zip(eps.values()).map(|(q, e)| 10.0 * q.powi(4) * e).collect();
    lq.zip_map(&Field::new(eps.grid(), bump).unwrap(), |a, b| a + b).unwrap()
}

#[test]
fn default_battery_passes() {
    let rep = verify_suite();
    assert_eq!((rep.length, rep.n), (100.0, 4096));
    assert!(rep.all_passed(), "{:#?}", rep.checks);
    assert_eq!(rep.checks.len(), 8);
}

#[test]
fn injected_sign_error_is_caught() {
    let opts = VerifyOptions { n: 2048, apply_l: mutated_l, ..VerifyOptions::default() };
    let rep = verify_with(&opts);
    assert!(!rep.check("L_LambdaQ_plus_2Q").unwrap().passed);
    assert!(!rep.check("L_Qy").unwrap().passed);
    assert!(rep.check("elliptic_identity").unwrap().passed);
    assert!(!rep.all_passed());
}

#[test]
fn identity_residuals_shrink_under_refinement() {
    let coarse = verify_with(&VerifyOptions { n: 1024, ..VerifyOptions::default() });
    let mid = verify_with(&VerifyOptions { n: 2048, ..VerifyOptions::default() });
    assert!(mid.all_passed(), "{:#?}", mid.checks);
    let fine = verify_suite();
    for name in ["elliptic_identity", "L_Qy", "L_LambdaQ_plus_2Q"] {
        let (c, f) = (coarse.check(name).unwrap().value, fine.check(name).unwrap().value);
        assert!(f < c, "{name}: {c:e} -> {f:e}");
    }
}

#[test]
fn bad_grid_is_a_recorded_failure() {
    let rep = verify_with(&VerifyOptions { n: 15, ..VerifyOptions::default() });
    assert!(!rep.all_passed());
}
