//! One-dimensional root finders for the parameter λ of the truncated Poisson
//! mean equation, the core equation, the global equation and the BCK fixed
//! point.
//!
//! Every equation has the form `F(λ) = target` with `F` strictly increasing on
//! `(0, ∞)`. Roots are bracketed by doubling, bisected to an interval of width
//! `1e-13` and then polished with a few guarded Newton steps.

use serde::Serialize;

use crate::special_fn::fk;
use crate::{Error, Result};

/// Largest λ any solver will return.
pub const LAMBDA_CAP: f64 = 700.0;

/// Distance to the boundary value below which λ = 0 is returned.
const BOUNDARY_EPS: f64 = 1e-12;

/// Which equation a [`LambdaSolution`] solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Equation {
    /// `λ f_{k-1}(λ) / f_k(λ) = c`.
    TpoMean(u32),
    /// `λ f_1(λ) g_2(λ) / f_2(2λ) = 3m/n`.
    Core,
    /// `λ (e^{2λ}+e^λ+1) / (f_1(λ) g_1(λ)) = 3M/N`.
    Global,
    /// `(2λ f_1 g_2 - 3 f_2(2λ)) / (f_1 g_1) = 6R/N`.
    GlobalAlt,
    /// `λ / q(e^{-λ}) = ζ` with `q(r) = (1-r)(1-r^{k-1})/(1-r^k)`.
    Bck(u32),
}

/// A root of one of the λ equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaSolution {
    pub lambda: f64,
    /// `F(λ) - target`.
    pub residual: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub equation: Equation,
}

/// Solution of the BCK fixed point `r = exp(-ζ(1-r)(1-r^{k-1})/(1-r^k))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BckSolution {
    pub r: f64,
    /// `r - exp(-ζ q(r))`.
    pub fixed_point_residual: f64,
    /// The same root in λ-form, `r = e^{-λ}`.
    pub lambda: LambdaSolution,
}

/// Mean of `tpo(k, λ)`, `λ f_{k-1}(λ)/f_k(λ)`, with its limit `k` at λ = 0.
pub fn tpo_mean_fn(k: u32, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return k as f64;
    }
    lambda * fk(k as i32 - 1, lambda) / fk(k as i32, lambda)
}

/// `λ f_1(λ) g_2(λ) / f_2(2λ)`, with limit 3/2 at λ = 0.
pub fn core_fn(lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 1.5;
    }
    if lambda < 1.0 {
        lambda * fk(1, lambda) * (lambda.exp() + 2.0) / fk(2, 2.0 * lambda)
    } else {
        let u = (-lambda).exp();
        lambda * (1.0 + u - 2.0 * u * u) / (1.0 - u * u - 2.0 * lambda * u * u)
    }
}

/// `λ (e^{2λ}+e^λ+1) / (e^{2λ}-1)`, with limit 3/2 at λ = 0.
pub fn global_fn(lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 1.5;
    }
    let u = (-lambda).exp();
    lambda * (1.0 + u + u * u) / -(-2.0 * lambda).exp_m1()
}

/// `(2λ f_1 g_2 - 3 f_2(2λ)) / (f_1 g_1)`, the second form of the global
/// equation whose right-hand side is `6R/N`.
pub fn global_alt_fn(lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    if lambda < 1.0 {
        let f1 = fk(1, lambda);
        let e = lambda.exp();
        (2.0 * lambda * f1 * (e + 2.0) - 3.0 * fk(2, 2.0 * lambda)) / (f1 * (e + 1.0))
    } else {
        let u = (-lambda).exp();
        let u2 = u * u;
        (2.0 * lambda * (1.0 + u - 2.0 * u2) - 3.0 * (1.0 - u2 - 2.0 * lambda * u2)) / (1.0 - u2)
    }
}

/// `λ / q(e^{-λ})` with `q(r) = (1-r)(1-r^{k-1})/(1-r^k)`; limit `k/(k-1)` at 0.
pub fn bck_fn(k: u32, lambda: f64) -> f64 {
    let kf = k as f64;
    if lambda == 0.0 {
        return kf / (kf - 1.0);
    }
    let one_minus = |j: f64| -(-j * lambda).exp_m1();
    lambda * one_minus(kf) / (one_minus(1.0) * one_minus(kf - 1.0))
}

/// Inverts the mean of `tpo(k, λ)`: finds λ with `λ f_{k-1}/f_k = c`.
pub fn solve_tpo_mean(k: u32, c: f64) -> Result<LambdaSolution> {
    if k == 0 || k > crate::special_fn::MAX_K {
        return Err(Error::domain(format!("solve_tpo_mean: k = {k} out of range")));
    }
    let kf = k as f64;
    check_target(c, kf, "solve_tpo_mean: c must exceed k")?;
    let deriv = move |l: f64| {
        let c = tpo_mean_fn(k, l);
        let eta = tpo_mean_fn(k - 1, l);
        (c / l) * (1.0 + eta - c)
    };
    solve_increasing(
        |l| tpo_mean_fn(k, l),
        Some(&deriv),
        c,
        kf,
        Equation::TpoMean(k),
    )
}

/// Solves the core equation `λ f_1 g_2 / f_2(2λ) = 3m/n`.
pub fn solve_core_lambda(three_m_over_n: f64) -> Result<LambdaSolution> {
    check_target(three_m_over_n, 1.5, "solve_core_lambda: 3m/n must exceed 3/2")?;
    solve_increasing(core_fn, None, three_m_over_n, 1.5, Equation::Core)
}

/// Solves the global equation for `M` edges on `N` vertices.
pub fn solve_global_lambda(m: u64, n: u64) -> Result<LambdaSolution> {
    if n == 0 || 2 * m <= n {
        return Err(Error::domain(format!(
            "solve_global_lambda: need M > N/2, got M = {m}, N = {n}"
        )));
    }
    solve_global_target(3.0 * m as f64 / n as f64)
}

/// Solves the global equation for a real target `3M/N > 3/2`.
pub fn solve_global_target(three_m_over_n: f64) -> Result<LambdaSolution> {
    check_target(three_m_over_n, 1.5, "global equation: 3M/N must exceed 3/2")?;
    solve_increasing(global_fn, None, three_m_over_n, 1.5, Equation::Global)
}

/// Solves the second form of the global equation, `… = 6R/N`.
pub fn solve_global_alt(six_r_over_n: f64) -> Result<LambdaSolution> {
    check_target(six_r_over_n, 0.0, "global equation: R must be positive")?;
    solve_increasing(global_alt_fn, None, six_r_over_n, 0.0, Equation::GlobalAlt)
}

/// Solves the BCK fixed point for `r`, working in λ-form `r = e^{-λ}`.
pub fn solve_bck_r(k: u32, zeta: f64) -> Result<BckSolution> {
    if k < 2 || k > 64 {
        return Err(Error::domain(format!("solve_bck_r: k = {k} out of range")));
    }
    let kf = k as f64;
    check_target(zeta, kf / (kf - 1.0), "solve_bck_r: zeta must exceed k/(k-1)")?;
    let sol = solve_increasing(|l| bck_fn(k, l), None, zeta, kf / (kf - 1.0), Equation::Bck(k))?;
    let r = (-sol.lambda).exp();
    let q = |r: f64| (1.0 - r) * (1.0 - r.powi(k as i32 - 1)) / (1.0 - r.powi(k as i32));
    let fixed_point_residual = if sol.lambda == 0.0 {
        0.0
    } else {
        r - (-zeta * q(r)).exp()
    };
    Ok(BckSolution {
        r,
        fixed_point_residual,
        lambda: sol,
    })
}

fn check_target(target: f64, boundary: f64, msg: &str) -> Result<()> {
    if !target.is_finite() || target < boundary - BOUNDARY_EPS {
        return Err(Error::domain(format!("{msg} (boundary {boundary}, got {target})")));
    }
    Ok(())
}

fn solve_increasing(
    f: impl Fn(f64) -> f64,
    deriv: Option<&dyn Fn(f64) -> f64>,
    target: f64,
    boundary: f64,
    equation: Equation,
) -> Result<LambdaSolution> {
    if (target - boundary).abs() <= BOUNDARY_EPS {
        return Ok(LambdaSolution {
            lambda: 0.0,
            residual: f(0.0) - target,
            bracket_lo: 0.0,
            bracket_hi: 0.0,
            equation,
        });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > LAMBDA_CAP {
            if f(LAMBDA_CAP) < target {
                return Err(Error::domain(format!(
                    "{equation:?}: target {target} needs lambda above {LAMBDA_CAP}"
                )));
            }
            hi = LAMBDA_CAP;
            break;
        }
    }
    while hi - lo > 1e-13_f64.max(4.0 * f64::EPSILON * hi) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = match deriv {
            Some(d) => d(lambda),
            None => {
                let h = 1e-6 * lambda.max(1e-3);
                (f(lambda + h) - f(lambda - h)) / (2.0 * h)
            }
        };
        if !(d > 0.0) {
            break;
        }
        let next = lambda - (f(lambda) - target) / d;
        if !(next >= lo && next <= hi) || (f(next) - target).abs() > (f(lambda) - target).abs() {
            break;
        }
        lambda = next;
    }
    Ok(LambdaSolution {
        lambda,
        residual: f(lambda) - target,
        bracket_lo: lo.min(lambda),
        bracket_hi: hi.max(lambda),
        equation,
    })
}
