//! Special functions and λ-equation solvers against independent oracles.

use std::f64::consts::E;

use hypercount::solvers::{
    bck_fn, core_fn, global_alt_fn, global_fn, solve_bck_r, solve_core_lambda, solve_global_alt,
    solve_global_lambda, solve_global_target, solve_tpo_mean, tpo_mean_fn,
};
use hypercount::special_fn::{f_k, g_k, h_entropy};
use proptest::prelude::*;

/// `e^λ` minus its first `k` Taylor terms, summed directly.
fn f_direct(k: u32, l: f64) -> f64 {
    let mut term = 1.0;
    let mut s = 0.0;
    for i in 0..k {
        if i > 0 {
            term *= l / i as f64;
        }
        s += term;
    }
    l.exp() - s
}

#[test]
fn special_function_values() {
    assert_eq!(f_k(1, 0.0).unwrap(), 0.0);
    assert!((f_k(0, 2.0).unwrap() - 2f64.exp()).abs() < 1e-15);
    assert!((f_k(2, 1.0).unwrap() - (E - 2.0)).abs() < 1e-15);
    assert_eq!(g_k(1, 0.0), 2.0);
    assert_eq!(g_k(2, 0.0), 3.0);
    assert!((g_k(1, 1.0) - (E + 1.0)).abs() < 1e-15);
    assert_eq!(h_entropy(0.0, 100.0).unwrap(), 0.0);
    assert_eq!(h_entropy(1.0, 1.0).unwrap(), -1.0);
    assert!((h_entropy(0.5, 200.0).unwrap() - (0.5 * 100f64.ln() - 0.5)).abs() < 1e-15);
}

#[test]
fn tpo_mean_fixtures() {
    let s = solve_tpo_mean(2, 2.0001).unwrap();
    assert!(s.lambda <= 1e-3);
    let s = solve_tpo_mean(3, 3.5).unwrap();
    assert!(s.residual.abs() <= 1e-12 * 3.5);
    assert!((s.lambda - 1.578_045_704_994_261_8).abs() < 1e-13);

    // Newton on λ f₁(λ) - 3 f₂(λ) from an independent start.
    let mut l: f64 = 3.0;
    for _ in 0..50 {
        let g = l * f_direct(1, l) - 3.0 * f_direct(2, l);
        let dg = f_direct(1, l) + l * l.exp() - 3.0 * f_direct(1, l);
        l -= g / dg;
    }
    let s = solve_tpo_mean(2, 3.0).unwrap();
    assert!(s.residual.abs() <= 3e-12);
    assert!((s.lambda - l).abs() < 1e-11, "{} vs {l}", s.lambda);
}

#[test]
fn core_lambda_fixtures() {
    for eps in [1e-3, 2.5e-3] {
        let t = 1.5 + 4.0 * eps;
        let l = solve_core_lambda(t).unwrap().lambda;
        assert!((l - 4.0 * (t - 1.5)).abs() / l <= 0.1);
    }
    let r = 1e-3;
    let l = solve_core_lambda(1.5 + 3.0 * r).unwrap().lambda;
    assert!((l - 12.0 * r).abs() / (12.0 * r) <= 0.02);
    let s = solve_core_lambda(2.0).unwrap();
    assert!(s.residual.abs() <= 2e-12);
    assert!((s.lambda - 1.310_478_940_206_305_3).abs() < 1e-13);
}

#[test]
fn global_lambda_fixtures() {
    let rn = 1e-4;
    let l = solve_global_target(1.5 + 3.0 * rn).unwrap().lambda;
    assert!((l * l / 12.0 - rn).abs() / rn <= 0.02);

    let s = solve_global_lambda(500_001, 1_000_000).unwrap();
    assert!(s.lambda > 0.0 && s.lambda < 0.01);
    assert!(s.residual.abs() <= 1.5e-12);

    let s = solve_global_lambda(600, 1000).unwrap();
    assert!((s.lambda - 1.128_280_459_359_539_5).abs() < 1e-13);
    assert!((global_alt_fn(s.lambda) - 0.6).abs() <= 1e-10);
    let alt = solve_global_alt(0.6).unwrap();
    assert!((alt.lambda - s.lambda).abs() <= 1e-10);
    assert!(solve_global_lambda(500, 1000).is_err());
}

#[test]
fn bck_fixtures() {
    for (m, n) in [(520u64, 1000u64), (600, 1000), (550, 1000)] {
        let l = solve_global_lambda(m, n).unwrap().lambda;
        let r = solve_bck_r(3, 3.0 * m as f64 / n as f64).unwrap().r;
        assert!((r - (-l).exp()).abs() <= 1e-10);
    }
    let near = solve_bck_r(3, 1.5 + 1e-9).unwrap().r;
    assert!(near > 0.999);
    let s = solve_bck_r(2, 3.0).unwrap();
    assert!(s.fixed_point_residual.abs() <= 1e-13);
    assert!((s.r - (-3.0 * (1.0 - s.r) / (1.0 + s.r)).exp()).abs() <= 1e-13);
}

proptest! {
    #[test]
    fn f_k_recurrence(k in 0u32..7, l in 0.0f64..30.0) {
        let a = f_k(k, l).unwrap();
        let b = f_k(k + 1, l).unwrap();
        let ln_term = k as f64 * l.ln() - (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
        let term = if k == 0 { 1.0 } else { ln_term.exp() };
        prop_assert!((a - b - term).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn tpo_mean_round_trip(k in 1u32..6, l in 1e-3f64..40.0) {
        let c = tpo_mean_fn(k, l);
        let s = solve_tpo_mean(k, c).unwrap();
        prop_assert!(s.residual.abs() <= 1e-12 * c.max(1.0));
        prop_assert!((s.lambda - l).abs() <= 1e-8 * l.max(1.0));
    }

    #[test]
    fn equations_round_trip(l in 1e-3f64..20.0) {
        for (f, solve) in [
            (core_fn as fn(f64) -> f64, solve_core_lambda as fn(f64) -> _),
            (global_fn, solve_global_target),
        ] {
            let t = f(l);
            let s = solve(t).unwrap();
            prop_assert!(s.residual.abs() <= 1e-12 * t.max(1.0));
            prop_assert!((s.lambda - l).abs() <= 1e-7 * l.max(1.0));
        }
        let z = bck_fn(3, l);
        let s = solve_bck_r(3, z).unwrap();
        prop_assert!((s.r - (-l).exp()).abs() <= 1e-9);
    }

    #[test]
    fn global_forms_agree(l in 1e-3f64..10.0) {
        prop_assert!((global_alt_fn(l) - 2.0 * (global_fn(l) - 1.5)).abs() <= 1e-10 * global_fn(l));
    }
}
