//! Exponent functions, optima and count estimates.

use hypercount::asymptotics::{
    bck_count_estimate, core_optimum, difdeg_identity_check, fcore, fcore_derivative, fpre, fpre_series,
    gcore_upper_bound, global_optimum, hessian_check, laplace_closed_form, laplace_lattice_sum,
    main_count_estimate, maximize_from_random_starts, optimum, t_of_nu, CoreParams, PreKernelParams,
};
use hypercount::exact_enum::{census_cores_bruteforce, w_core};
use hypercount::sampler::{lattice_points, GpreWindow};
use num_bigint::BigUint;
use statrs::function::gamma::ln_gamma;

fn mid(n: f64, r: f64) -> f64 {
    n / 2.0 + r * n
}

#[test]
fn fcore_matches_weight_up_to_stirling_terms() {
    let (n, m) = (1000u64, 550u64);
    let nu1 = core_optimum(n as f64, m as f64).unwrap().nu1_star.round();
    let p = CoreParams::new(n as f64, m as f64, nu1).unwrap();
    let w = w_core(n, m, nu1 as u64).unwrap();
    let gap = w.ln_value - ln_gamma(n as f64 + 1.0) - n as f64 * fcore(&p).unwrap();
    // The half-log terms of Stirling's formula for Q₂!, n₂!, ν₁! and m₃!.
    let half = |k: f64| 0.5 * (2.0 * std::f64::consts::PI * k).ln();
    let predicted = half(p.q2()) - half(p.n2()) - half(nu1) - half(p.m3());
    assert!((gap - predicted).abs() <= 0.01, "{gap} vs {predicted}");
}

#[test]
fn fcore_boundary_and_stationarity() {
    let (n, m) = (100.0, 60.0);
    let b = CoreParams::new(n, m, 2.0 * n - 3.0 * m).unwrap();
    assert!(b.is_boundary() && fcore(&b).unwrap().is_finite());
    let c = core_optimum(n, m).unwrap();
    let at = |v: f64| fcore(&CoreParams::new(n, m, v).unwrap()).unwrap();
    let h = 1e-4;
    assert!(((at(c.nu1_star + h) - at(c.nu1_star - h)) / (2.0 * h)).abs() <= 1e-8);
    let p = CoreParams::new(n, m, c.nu1_star).unwrap();
    assert!(fcore_derivative(&p).unwrap().abs() <= 1e-8);
}

#[test]
fn fpre_boundary_value_is_finite() {
    let boundary: Vec<_> = lattice_points(10, 7, GpreWindow::Full)
        .unwrap()
        .into_iter()
        .map(|x| PreKernelParams::new(10.0, 7.0, x.map(|v| v as f64)))
        .filter(|p| p.is_boundary())
        .collect();
    assert!(!boundary.is_empty());
    for p in boundary {
        assert!(fpre(&p).unwrap().is_finite());
    }
}

#[test]
fn fpre_series_residual_is_cubic() {
    for r in [0.02, 0.01, 0.005] {
        let n = 1e6;
        let o = optimum(n, mid(n, r)).unwrap();
        let l = o.lambda_star;
        let ratio = (o.value - fpre_series(n, r, l)).abs() / l.powi(3);
        assert!(ratio <= 0.05, "r = {r}: {ratio}");
    }
}

#[test]
fn optimum_rows_at_small_r() {
    let (n, r) = (1e6, 1e-3);
    let o = optimum(n, mid(n, r)).unwrap();
    let l = o.lambda_star;
    let x = o.x_star;
    assert!((x.nu1 / n - (0.5 - r)).abs() <= 3.0 * r * r);
    assert!((x.k1 / n - l / 2.0).abs() <= 2.0 * l * l);
    assert!((x.q3() / n / (6.0 * r) - 1.0).abs() <= 0.05);
    assert!((x.n3() / n / (2.0 * r) - 1.0).abs() <= 0.05);
    let c = core_optimum(n, mid(n, r)).unwrap();
    assert!((fpre(&x).unwrap() - c.value).abs() <= 1e-9 * c.value.abs());
}

#[test]
fn random_starts_converge_to_optimum() {
    let (n, m) = (1e6, mid(1e6, 0.01));
    let target = optimum(n, m).unwrap().x_star.x_hat();
    let found = maximize_from_random_starts(n, m, 5, 77).unwrap();
    assert_eq!(found.len(), 5);
    for p in found {
        let got = p.x_hat();
        for i in 0..4 {
            assert!((got[i] - target[i]).abs() <= 1e-5, "{got:?} vs {target:?}");
        }
    }
}

#[test]
fn numeric_hessian_matches_analytic() {
    let h = hessian_check(1e6, mid(1e6, 0.01)).unwrap();
    assert!(h.analytic_rel_diff <= 1e-6);
}

#[test]
fn t_function_maximum() {
    let (big_n, big_r) = (1e6, 1e3);
    let go = global_optimum(big_n, big_n / 2.0 + big_r).unwrap();
    let t = |x: f64| t_of_nu(x, big_n, big_r).unwrap().definition;
    let v = go.nu_star;
    let d1 = (t(v + 1e-5) - t(v - 1e-5)) / 2e-5;
    assert!(d1.abs() <= 1e-7, "{d1}");
    let h = 1e-4;
    let d2 = (t(v + h) - 2.0 * t(v) + t(v - h)) / (h * h);
    assert!((-1.3..=-0.7).contains(&d2), "{d2}");
    for i in 1..=20 {
        let x = v * (0.5 + 0.05 * i as f64);
        let tv = t_of_nu(x, big_n, big_r).unwrap();
        assert!((tv.definition - tv.expanded).abs() <= 1e-9 * tv.definition.abs(), "nu = {x}");
    }
}

#[test]
fn main_estimate_approaches_bck() {
    let mut gaps = Vec::new();
    for j in 3..=7 {
        let big_n = 10f64.powi(j);
        let big_m = (big_n / 2.0 + big_n.powf(0.7)).round();
        let main = main_count_estimate(big_n, big_m).unwrap().ln_count;
        let bck = bck_count_estimate(big_n as u64, big_m as u64, 3).unwrap().ln_count;
        gaps.push(((main - bck).exp() - 1.0).abs());
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    let e = bck_count_estimate(1_000_000, 501_000, 3).unwrap();
    assert!(e.ln_count.is_finite());
}

#[test]
fn core_bound_dominates_census() {
    for (n, m) in [(6usize, 4usize), (8, 5)] {
        let total: BigUint = census_cores_bruteforce(n, m).unwrap().values().sum();
        let bound = gcore_upper_bound(n as f64, m as f64).unwrap();
        let observed = hypercount::exact_enum::ln_big(&total);
        assert!(bound.ln_bound >= observed, "({n},{m}): {} < {observed}", bound.ln_bound);
    }
}

#[test]
fn laplace_offset_independence() {
    let a = laplace_lattice_sum(0.5, 1.0, 0.0, 0.0, 0.0, 1e3, 30.0).unwrap();
    let b = laplace_lattice_sum(0.5, 1.0, 0.0, 0.0, 0.37, 1e3, 30.0).unwrap();
    assert!((a / b - 1.0).abs() <= 5e-3);
    let g = laplace_lattice_sum(0.5, 0.0, 0.0, 0.0, 0.0, 1e3, 30.0).unwrap();
    assert!((g - 2.50663).abs() / 2.50663 <= 5e-3);
    assert!((laplace_closed_form(0.5, 1.0) - 0.5f64.exp() * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
}

#[test]
fn difdeg_identity() {
    let ys: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
    assert!(difdeg_identity_check(2, |_| 2.0, |y| 5.0 + y, &ys).unwrap() <= 1e-6);
    assert!(difdeg_identity_check(2, |y| 1.0 + y, |y| 3.0 + 4.0 * y, &ys).unwrap() <= 1e-6);
    assert!(difdeg_identity_check(3, |y| 1.0 + y, |y| 4.0 + 4.0 * y, &ys).unwrap() <= 1e-6);
}
