//! Exact counts, censuses and weights, with values frozen from verified runs.

use hypercount::asymptotics::{CoreParams, PreKernelParams};
use hypercount::exact_enum::{
    census_prekernels_bruteforce, check_decomposition, count_connected_bruteforce, count_connected_exact,
    count_forests, count_forests_bruteforce, count_kernel_configurations,
    count_kernel_configurations_bruteforce, count_total, ln_big, w_core, w_pre,
};
use hypercount::sampler::{lattice_points, GpreWindow};
use hypercount::special_fn::f_k;
use hypercount::validation::DECOMPOSITION_VARIANT;
use num_bigint::BigUint;
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;

fn big(s: &str) -> BigUint {
    s.parse().unwrap()
}

#[test]
fn frozen_connected_counts() {
    assert_eq!(count_connected_exact(3, 1).unwrap(), BigUint::from(1u32));
    assert_eq!(count_connected_exact(4, 1).unwrap(), BigUint::from(0u32));
    assert_eq!(count_connected_exact(4, 2).unwrap(), BigUint::from(6u32));
    assert_eq!(count_connected_exact(20, 14).unwrap(), big("5051562680349216794923634073600"));
    assert_eq!(
        count_connected_exact(30, 20).unwrap(),
        big("4651918703337172895163516851422298283499983820800000")
    );
    assert_eq!(
        count_connected_exact(40, 27).unwrap(),
        big("99871473703192142973974605887644900553972751696201078223841314450964480000000")
    );
}

#[test]
fn total_counts() {
    assert_eq!(count_total(4, 2), BigUint::from(6u32));
    assert_eq!(count_total(5, 0), BigUint::from(1u32));
    assert_eq!(count_total(5, 3), BigUint::from(120u32));
}

#[test]
fn connected_matches_enumeration_at_six() {
    for m in 0..=8 {
        assert_eq!(count_connected_exact(6, m).unwrap(), count_connected_bruteforce(6, m as usize).unwrap());
    }
}

#[test]
fn frozen_censuses() {
    assert_eq!(census_prekernels_bruteforce(3, 1).unwrap().total, BigUint::from(0u32));
    assert_eq!(census_prekernels_bruteforce(4, 3).unwrap().total, BigUint::from(4u32));
    assert_eq!(census_prekernels_bruteforce(5, 4).unwrap().total, BigUint::from(205u32));
    assert_eq!(census_prekernels_bruteforce(6, 4).unwrap().total, BigUint::from(3360u32));
    assert_eq!(census_prekernels_bruteforce(7, 5).unwrap().total, BigUint::from(199_836u32));
}

#[test]
fn decomposition_variant_is_frozen() {
    assert_eq!(DECOMPOSITION_VARIANT, "with binom(N, n)");
    let r = check_decomposition(4, 2).unwrap();
    assert_eq!(r.lhs, BigUint::from(6u32));
    // Excess 0: each core is an isolated cycle, so the pre-kernel sum is 0
    // under both variants.
    assert_eq!(r.rhs_with_binom, r.rhs_without_binom);
    assert_eq!(r.rhs_with_binom, BigUint::from(0u32));
    let r = check_decomposition(5, 4).unwrap();
    assert_eq!(r.lhs, census_prekernels_bruteforce(5, 4).unwrap().total);
    for (n, m) in [(6, 4), (7, 5)] {
        let r = check_decomposition(n, m).unwrap();
        assert!(r.with_binom_holds, "({n},{m})");
        assert!(!r.without_binom_holds, "({n},{m})");
    }
}

#[test]
fn kernel_configuration_counts() {
    let one = count_kernel_configurations(0, 0, 1, &[3], 1, 0).unwrap();
    assert_eq!(one.configurations, BigUint::from(6u32));
    assert_eq!(one.multiplicity, BigUint::from(6u32));
    let two = count_kernel_configurations(0, 0, 2, &[3, 3], 2, 0).unwrap();
    assert_eq!(two.configurations, BigUint::from(720u32));
    let mixed = count_kernel_configurations(1, 0, 1, &[3], 1, 1).unwrap();
    assert_eq!(mixed.configurations, count_kernel_configurations_bruteforce(1, 0, &[3], 1, 1).unwrap());
}

#[test]
fn w_core_against_log_gamma() {
    let (n, m, nu1) = (20u64, 12u64, 8u64);
    let w = w_core(n, m, nu1).unwrap();
    let p = CoreParams::new(n as f64, m as f64, nu1 as f64).unwrap();
    let l = p.lambda().unwrap();
    let (n2, q2, m3) = ((n - nu1) as f64, (3 * m - nu1) as f64, (m - nu1) as f64);
    let lg = |x: f64| ln_gamma(x + 1.0);
    let want = lg(n as f64) + lg(q2) - lg(n2) - lg(nu1 as f64) - lg(m3)
        - nu1 as f64 * 2f64.ln()
        - m3 * 6f64.ln()
        + n2 * f_k(2, l).unwrap().ln()
        - q2 * l.ln();
    assert!(w.ln_value.is_finite() && w.ln_value > 0.0);
    assert!((w.ln_value - want).abs() <= 1e-9, "{} vs {want}", w.ln_value);

    // ν₁ = 2n - 3m: boundary branch.
    let w = w_core(10, 6, 2).unwrap();
    assert!(w.boundary && w.ln_value.is_finite());
    // Edge of J_m.
    assert!(w_core(10, 8, 8).unwrap().ln_value.is_finite());
}

#[test]
fn w_pre_against_exact_rational() {
    let mut checked = 0;
    for x in lattice_points(7, 5, GpreWindow::Full).unwrap() {
        let p = PreKernelParams::new(7.0, 5.0, x.map(|v| v as f64));
        let w = w_pre(&p).unwrap();
        let (num, den) = w.exact_factorial_part.clone().unwrap();
        let mut want = ln_big(&num) - ln_big(&den);
        if !w.boundary {
            want += p.n3() * f_k(3, w.lambda).unwrap().ln() - p.q3() * w.lambda.ln();
        }
        assert!((w.ln_value - want).abs() <= 1e-10, "{x:?}");
        checked += 1;
    }
    assert!(checked > 10);
    let bad = PreKernelParams::new(7.0, 5.0, [1.0, 1.0, 1.0, 0.0]);
    let e = w_pre(&bad).unwrap_err().to_string();
    assert!(e.contains("C2"), "{e}");
}

proptest! {
    #[test]
    fn forests_match_brute_force(big_n in 1usize..7, n in 1usize..7, k in 2usize..4) {
        prop_assume!(n <= big_n);
        prop_assert_eq!(
            count_forests(big_n as u64, n as u64, k as u64).unwrap(),
            count_forests_bruteforce(big_n, n, k).unwrap()
        );
    }

    #[test]
    fn connected_never_exceeds_total(big_n in 1u64..25, m in 0u64..30) {
        prop_assert!(count_connected_exact(big_n, m).unwrap() <= count_total(big_n, m));
    }
}
