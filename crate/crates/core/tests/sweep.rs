//! Euler–Lagrange checks over the full α sweep, and the α ↔ -α duality of reports.

use aniso_eq::verify::{duality_deviation, run_check, CheckSettings};
use aniso_eq::KernelParams;

#[test]
fn el1_and_el2_pass_over_sweep() {
    let s = CheckSettings::default();
    for alpha in [0.0, 0.3, -0.3, 0.5, -0.5, 0.7, -0.7, 0.9, -0.9] {
        let p = KernelParams::new(alpha).unwrap();
        for check in ["el1", "el2"] {
            let r = run_check(check, &p, &s).unwrap();
            assert!(r.passed(), "{check} at {alpha}: {:?}", r.criteria);
        }
    }
}

#[test]
fn constant_shifts_by_alpha_under_duality() {
    let s = CheckSettings::default();
    for alpha in [0.3, 0.9] {
        let pos = run_check("el1", &KernelParams::new(alpha).unwrap(), &s).unwrap();
        let neg = run_check("el1", &KernelParams::new(-alpha).unwrap(), &s).unwrap();
        let shift = pos.reference.unwrap() - neg.reference.unwrap();
        assert!((shift - alpha).abs() < 1e-9, "shift {shift} at {alpha}");
        assert!(duality_deviation(&neg, &pos).unwrap() < 1e-9);
    }
}

#[test]
fn duality_holds_for_minprinciple_and_laplacian_at_nine_tenths() {
    let s = CheckSettings::default();
    for check in ["minprinciple", "laplacian"] {
        let pos = run_check(check, &KernelParams::new(0.9).unwrap(), &s).unwrap();
        let neg = run_check(check, &KernelParams::new(-0.9).unwrap(), &s).unwrap();
        assert!(pos.passed() && neg.passed(), "{check}");
        let d = duality_deviation(&neg, &pos).expect("matching reports");
        assert!(d < 1e-6, "{check}: {d}");
    }
}
