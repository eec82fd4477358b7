//! Truncated Poisson law, conditioned-sum probabilities and samplers.

use std::f64::consts::E;

use hypercount::sampler::stream;
use hypercount::solvers::solve_tpo_mean;
use hypercount::tpoisson::{
    sigma_prob_asymptotic, sigma_prob_clt_regime, sigma_prob_exact, sigma_prob_poisson_regime,
    ConditionedSampler, SigmaEvent, TpoSampler, TruncatedPoisson,
};
use proptest::prelude::*;

fn tpo(k: u32, l: f64) -> TruncatedPoisson {
    TruncatedPoisson::new(k, l).unwrap()
}

fn event(n: u64, q: u64, k: u32, l: f64) -> SigmaEvent {
    SigmaEvent {
        n_vars: n,
        target_sum: q,
        dist: tpo(k, l),
    }
}

#[test]
fn pmf_and_mean_values() {
    assert_eq!(tpo(2, 1.0).pmf(1), 0.0);
    assert!((tpo(0, 1.0).pmf(0) - 1.0 / E).abs() < 1e-15);
    let f2 = 0.5f64.exp() - 1.5;
    assert!((tpo(2, 0.5).pmf(2) - 0.125 / f2).abs() < 1e-15);
    assert!((tpo(0, 2.0).mean() - 2.0).abs() < 1e-14);
    assert!((tpo(2, 1e-9).mean() - 2.0).abs() < 1e-8);
    let d = tpo(2, 1.0);
    let want = (E - 1.0) / (E - 2.0);
    let direct: f64 = (2..60).map(|j| j as f64 * d.pmf(j)).sum();
    assert!((d.mean() - want).abs() < 1e-12);
    assert!((direct - want).abs() < 1e-10);
}

#[test]
fn small_sigma_values() {
    let d = tpo(2, 1.0);
    assert!((sigma_prob_exact(&event(1, 3, 2, 1.0)).unwrap() - d.pmf(3)).abs() < 1e-16);
    let d = tpo(2, 0.7);
    assert!((sigma_prob_exact(&event(2, 4, 2, 0.7)).unwrap() - d.pmf(2).powi(2)).abs() < 1e-16);
}

#[test]
fn sigma_matches_monte_carlo() {
    let ev = event(50, 105, 2, 0.3);
    let exact = sigma_prob_exact(&ev).unwrap();
    let s = TpoSampler::new(ev.dist);
    let mut rng = stream(11, 0);
    let trials = 1_000_000;
    let hits = (0..trials)
        .filter(|_| (0..50).map(|_| s.sample(&mut rng)).sum::<u64>() == 105)
        .count();
    let p = hits as f64 / trials as f64;
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((p - exact).abs() <= 3.0 * se, "{p} vs {exact} (se {se})");
}

#[test]
fn asymptotic_regimes() {
    let l = solve_tpo_mean(3, 3.5).unwrap().lambda;
    let ev = event(200, 700, 3, l);
    let exact = sigma_prob_exact(&ev).unwrap();
    assert!((sigma_prob_clt_regime(&ev) / exact - 1.0).abs() <= 0.1);
    assert!((sigma_prob_asymptotic(&ev) / exact - 1.0).abs() <= 0.1);

    let l = solve_tpo_mean(2, 2.05).unwrap().lambda;
    let ev = event(100, 205, 2, l);
    let exact = sigma_prob_exact(&ev).unwrap();
    let poisson = sigma_prob_poisson_regime(&ev);
    assert!((poisson - 0.175_467_369_767_85).abs() < 1e-12);
    assert!((poisson / exact - 1.0).abs() <= 0.15, "{poisson} vs {exact}");

    for k in [2, 3] {
        let ev = event(1, k as u64, k, 0.5);
        for v in [sigma_prob_poisson_regime(&ev), sigma_prob_clt_regime(&ev), sigma_prob_asymptotic(&ev)] {
            assert!(v.is_finite() && v > 0.0);
        }
    }
}

#[test]
fn sampler_moments_and_determinism() {
    let d = tpo(2, 1e-6);
    let mut rng = stream(5, 0);
    let twos = (0..100_000).filter(|_| d.sample(&mut rng) == 2).count();
    assert!(twos >= 99_999);

    let d = tpo(3, 0.8);
    let s = TpoSampler::new(d);
    let n = 1_000_000;
    let mut rng = stream(6, 0);
    let sum: u64 = (0..n).map(|_| s.sample(&mut rng)).sum();
    let mean = sum as f64 / n as f64;
    let se = (d.variance() / n as f64).sqrt();
    assert!((mean - d.mean()).abs() <= 3.0 * se);

    let draw = |seed| {
        let mut rng = stream(seed, 3);
        (0..100).map(|_| s.sample(&mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(draw(9), draw(9));
    assert_ne!(draw(9), draw(10));
}

#[test]
fn conditioned_marginal_matches_law() {
    let l = solve_tpo_mean(3, 100.0 / 30.0).unwrap().lambda;
    let ev = event(30, 100, 3, l);
    let total = sigma_prob_exact(&ev).unwrap();
    let s = ConditionedSampler::new(ev).unwrap();
    let mut rng = stream(12, 0);
    let trials = 100_000;
    let mut counts = [0usize; 12];
    for _ in 0..trials {
        let ys = s.sample(&mut rng);
        assert_eq!(ys.iter().sum::<u64>(), 100);
        counts[(ys[0] as usize).min(11)] += 1;
    }
    for j in 3..9u64 {
        let rest = sigma_prob_exact(&event(29, 100 - j, 3, l)).unwrap();
        let p = ev.dist.pmf(j) * rest / total;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        let obs = counts[j as usize] as f64 / trials as f64;
        assert!((obs - p).abs() <= 3.0 * se + 1e-4, "j = {j}: {obs} vs {p}");
    }
}

fn brute(n: u64, q: u64, d: &TruncatedPoisson) -> f64 {
    if n == 0 {
        return if q == 0 { 1.0 } else { 0.0 };
    }
    (d.k as u64..=q).map(|j| d.pmf(j) * brute(n - 1, q - j, d)).sum()
}

proptest! {
    #[test]
    fn dp_equals_enumeration(k in 0u32..4, l in 0.05f64..4.0, n in 1u64..5, extra in 0u64..8) {
        let q = k as u64 * n + extra;
        let ev = event(n, q, k, l);
        let exact = sigma_prob_exact(&ev).unwrap();
        prop_assert!((exact - brute(n, q, &ev.dist)).abs() <= 1e-14);
    }

    #[test]
    fn conditioned_draws_hit_target(k in 1u32..4, n in 1u64..20, extra in 0u64..30, seed in 0u64..1000) {
        let ev = event(n, k as u64 * n + extra, k, 1.0);
        let s = ConditionedSampler::new(ev).unwrap();
        let ys = s.sample(&mut stream(seed, 0));
        prop_assert_eq!(ys.len() as u64, n);
        prop_assert_eq!(ys.iter().sum::<u64>(), ev.target_sum);
        prop_assert!(ys.iter().all(|&y| y >= k as u64));
    }
}
