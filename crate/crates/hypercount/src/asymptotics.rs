//! Asymptotic estimators: the exponents `fcore` and `fpre` with analytic
//! derivatives, their maximizers, `t(ν̂)`, the main count estimate, the BCK
//! estimate, the Hessian model at the pre-kernel optimum and the Laplace
//! lattice sum.
//!
//! Parameter structs carry absolute (unscaled) quantities; the exponent
//! functions scale by `n` internally and use `h(x) = x ln(xn) - x`.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::ln_gamma;

use crate::solvers::{
    solve_bck_r, solve_core_lambda, solve_global_target, solve_tpo_mean, tpo_mean_fn,
};
use crate::special_fn::{fk, h};
use crate::{Error, Result};

fn ln3() -> f64 {
    3f64.ln()
}

fn ln6() -> f64 {
    6f64.ln()
}

fn slack(n: f64) -> f64 {
    1e-12 * n.max(1.0)
}

/// `g_k(λ) = e^λ + k`.
fn g(k: f64, lambda: f64) -> f64 {
    lambda.exp() + k
}

/// Parameters of a core with `ν₁` vertices of degree 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreParams {
    pub n: f64,
    pub m: f64,
    pub nu1: f64,
}

impl CoreParams {
    /// Checks `ν₁ ∈ J_m = [max(0, 2n-3m), min(n, m)]`.
    pub fn new(n: f64, m: f64, nu1: f64) -> Result<Self> {
        let (lo, hi) = Self::j_range(n, m);
        let s = slack(n);
        if !(n > 0.0) || !(nu1 >= lo - s && nu1 <= hi + s) {
            return Err(Error::domain(format!(
                "nu1 = {nu1} outside J_m = [{lo}, {hi}] for n = {n}, m = {m}"
            )));
        }
        if n - nu1 <= 0.0 {
            return Err(Error::domain("nu1 = n leaves no vertex of degree at least 2"));
        }
        Ok(Self { n, m, nu1 })
    }

    /// `J_m` as a real interval.
    pub fn j_range(n: f64, m: f64) -> (f64, f64) {
        ((2.0 * n - 3.0 * m).max(0.0), n.min(m))
    }

    pub fn n2(&self) -> f64 {
        self.n - self.nu1
    }
    pub fn m3(&self) -> f64 {
        self.m - self.nu1
    }
    pub fn q2(&self) -> f64 {
        3.0 * self.m - self.nu1
    }
    pub fn c2(&self) -> f64 {
        self.q2() / self.n2()
    }
    /// `ν₁ = 2n - 3m`, where `c₂ = 2` and `λ = 0`.
    pub fn is_boundary(&self) -> bool {
        (self.q2() - 2.0 * self.n2()).abs() <= slack(self.n)
    }
    /// `λ_{ν₁}` solving `λ f₁/f₂ = c₂`.
    pub fn lambda(&self) -> Result<f64> {
        if self.is_boundary() {
            Ok(0.0)
        } else {
            Ok(solve_tpo_mean(2, self.c2())?.lambda)
        }
    }
    /// `η₂ = λ e^λ / f₁(λ)`.
    pub fn eta2(&self) -> Result<f64> {
        Ok(tpo_mean_fn(1, self.lambda()?))
    }
}

/// `fcore(ν̂₁)`; the boundary replaces `n̂₂ ln f₂(λ) - Q̂₂ ln λ` by `-n̂₂ ln 2`.
pub fn fcore(p: &CoreParams) -> Result<f64> {
    let n = p.n;
    let s = |x: f64| x / n;
    let lambda = p.lambda()?;
    let mut v = h(s(p.q2()), n) - h(s(p.n2()), n) - h(s(p.nu1), n) - h(s(p.m3()), n)
        - s(p.nu1) * LN_2
        - s(p.m3()) * ln6();
    v += if p.is_boundary() {
        -s(p.n2()) * LN_2
    } else {
        s(p.n2()) * fk(2, lambda).ln() - s(p.q2()) * lambda.ln()
    };
    Ok(v)
}

/// `d fcore / d ν̂₁`; unbounded at the boundary `ν₁ = 2n - 3m`.
pub fn fcore_derivative(p: &CoreParams) -> Result<f64> {
    if p.is_boundary() {
        return Err(Error::domain("fcore derivative is unbounded at nu1 = 2n - 3m"));
    }
    let lambda = p.lambda()?;
    Ok(-p.q2().ln() + p.n2().ln() - p.nu1.ln() + p.m3().ln() + ln3() + lambda.ln()
        - fk(2, lambda).ln())
}

/// `d² fcore / d ν̂₁²`.
pub fn fcore_second_derivative(p: &CoreParams) -> Result<f64> {
    if p.is_boundary() {
        return Err(Error::domain("fcore derivative is unbounded at nu1 = 2n - 3m"));
    }
    let s = |x: f64| x / p.n;
    let c = p.c2();
    let eta = p.eta2()?;
    Ok(1.0 / s(p.q2()) - 1.0 / s(p.n2()) - 1.0 / s(p.nu1) - 1.0 / s(p.m3())
        - (1.0 - c).powi(2) / (s(p.q2()) * (1.0 + eta - c)))
}

/// The core maximizer: `λ̂` from the core equation and `ν₁* = 3m / g₂(λ̂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreOptimum {
    pub lambda_hat: f64,
    pub nu1_star: f64,
    pub value: f64,
}

pub fn core_optimum(n: f64, m: f64) -> Result<CoreOptimum> {
    if !(m > n / 2.0) {
        return Err(Error::domain(format!("need m > n/2, got n = {n}, m = {m}")));
    }
    let lambda_hat = solve_core_lambda(3.0 * m / n)?.lambda;
    let nu1_star = 3.0 * m / g(2.0, lambda_hat);
    let value = fcore(&CoreParams::new(n, m, nu1_star)?)?;
    Ok(CoreOptimum {
        lambda_hat,
        nu1_star,
        value,
    })
}

/// Pre-kernel parameters `x = (ν₁, k₀, k₁, k₂)` for given `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreKernelParams {
    pub n: f64,
    pub m: f64,
    pub nu1: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

/// A linear quantity `α n + β m + a·x` appearing in `fpre`, with its
/// coefficient in front of `h`.
struct Term {
    coef: f64,
    alpha: f64,
    beta: f64,
    a: [f64; 4],
}

const TERMS: [Term; 12] = [
    // P₃
    Term { coef: 1.0, alpha: 0.0, beta: 3.0, a: [-3.0, 0.0, 0.0, 0.0] },
    // P₂
    Term { coef: 1.0, alpha: 0.0, beta: 0.0, a: [2.0, -2.0, 0.0, 0.0] },
    // Q₃
    Term { coef: 1.0, alpha: 0.0, beta: 3.0, a: [-1.0, -2.0, -2.0, -2.0] },
    // m₂
    Term { coef: 1.0, alpha: 0.0, beta: 0.0, a: [1.0, 0.0, 0.0, 0.0] },
    // k₀, k₁, k₂
    Term { coef: -1.0, alpha: 0.0, beta: 0.0, a: [0.0, 1.0, 0.0, 0.0] },
    Term { coef: -1.0, alpha: 0.0, beta: 0.0, a: [0.0, 0.0, 1.0, 0.0] },
    Term { coef: -1.0, alpha: 0.0, beta: 0.0, a: [0.0, 0.0, 0.0, 1.0] },
    // n₃
    Term { coef: -1.0, alpha: 1.0, beta: 0.0, a: [-1.0, -1.0, -1.0, -1.0] },
    // m₃
    Term { coef: -1.0, alpha: 0.0, beta: 1.0, a: [-1.0, 0.0, 0.0, 0.0] },
    // T₃
    Term { coef: -1.0, alpha: 0.0, beta: 3.0, a: [-3.0, 0.0, -1.0, -2.0] },
    // T₂
    Term { coef: -1.0, alpha: 0.0, beta: 0.0, a: [2.0, -2.0, -1.0, 0.0] },
    // m₂'
    Term { coef: -2.0, alpha: 0.0, beta: 0.0, a: [1.0, -1.0, 0.0, 0.0] },
];

const A_N3: [f64; 4] = [-1.0, -1.0, -1.0, -1.0];
const A_Q3: [f64; 4] = [-1.0, -2.0, -2.0, -2.0];

impl PreKernelParams {
    pub fn new(n: f64, m: f64, x: [f64; 4]) -> Self {
        Self {
            n,
            m,
            nu1: x[0],
            k0: x[1],
            k1: x[2],
            k2: x[3],
        }
    }

    pub fn x(&self) -> [f64; 4] {
        [self.nu1, self.k0, self.k1, self.k2]
    }

    /// `x / n`.
    pub fn x_hat(&self) -> [f64; 4] {
        self.x().map(|v| v / self.n)
    }

    pub fn with_x(&self, x: [f64; 4]) -> Self {
        Self::new(self.n, self.m, x)
    }

    pub fn n2eq(&self) -> f64 {
        self.k0 + self.k1 + self.k2
    }
    pub fn n3(&self) -> f64 {
        self.n - self.nu1 - self.n2eq()
    }
    pub fn m2(&self) -> f64 {
        self.nu1
    }
    pub fn m2p(&self) -> f64 {
        self.nu1 - self.k0
    }
    pub fn p2(&self) -> f64 {
        2.0 * self.m2p()
    }
    pub fn m3(&self) -> f64 {
        self.m - self.nu1
    }
    pub fn p3(&self) -> f64 {
        3.0 * self.m3()
    }
    pub fn q3(&self) -> f64 {
        3.0 * self.m - self.nu1 - 2.0 * self.n2eq()
    }
    pub fn t3(&self) -> f64 {
        self.p3() - self.k1 - 2.0 * self.k2
    }
    pub fn t2(&self) -> f64 {
        self.p2() - self.k1
    }
    pub fn c3(&self) -> f64 {
        self.q3() / self.n3()
    }

    /// Membership in `S_m`; the error names the first violated condition.
    pub fn check_s_m(&self) -> Result<()> {
        let s = -slack(self.n);
        let fail = |c: &str, what: &str| {
            Err(Error::domain(format!("x = {:?} violates {c}: {what}", self.x())))
        };
        if self.x().iter().any(|&v| v < s) {
            return fail("C1", "nu1, k0, k1, k2 >= 0");
        }
        if self.t2() < s {
            return fail("C2", "T2 = 2 nu1 - 2 k0 - k1 >= 0");
        }
        if self.t3() < s {
            return fail("C3", "T3 = 3m - 3 nu1 - k1 - 2 k2 >= 0");
        }
        if self.n3() < s || self.q3() - 3.0 * self.n3() < s {
            return fail("C4", "Q3 >= 3 n3 >= 0");
        }
        if self.n3().abs() <= -s && self.q3().abs() > -s {
            return fail("C5", "Q3 = 0 whenever n3 = 0");
        }
        Ok(())
    }

    /// `Q₃ = 3 n₃`, where `λ(x) = 0`.
    pub fn is_boundary(&self) -> bool {
        (self.q3() - 3.0 * self.n3()).abs() <= slack(self.n)
    }

    /// `λ(x)` solving `λ f₂/f₃ = c₃`.
    pub fn lambda(&self) -> Result<f64> {
        if self.is_boundary() {
            Ok(0.0)
        } else {
            Ok(solve_tpo_mean(3, self.c3())?.lambda)
        }
    }

    fn term_value(&self, t: &Term) -> f64 {
        let x = self.x();
        t.alpha * self.n + t.beta * self.m + (0..4).map(|i| t.a[i] * x[i]).sum::<f64>()
    }
}

/// `fpre(x̂)`, with the boundary term `-n̂₃ ln 6` when `Q₃ = 3n₃`.
pub fn fpre(p: &PreKernelParams) -> Result<f64> {
    p.check_s_m()?;
    let n = p.n;
    let s = |x: f64| x / n;
    let mut v: f64 = TERMS
        .iter()
        .map(|t| t.coef * h(s(p.term_value(t)).max(0.0), n))
        .sum();
    v -= s(p.k2) * LN_2 + s(p.m2p()) * LN_2 + s(p.m3()) * ln6();
    v += if p.is_boundary() {
        -s(p.n3()) * ln6()
    } else {
        let lambda = p.lambda()?;
        s(p.n3()) * fk(3, lambda).ln() - s(p.q3()) * lambda.ln()
    };
    Ok(v)
}

/// Gradient of `fpre` in the scaled coordinates `x̂`.
pub fn fpre_gradient(p: &PreKernelParams) -> Result<[f64; 4]> {
    p.check_s_m()?;
    if p.is_boundary() {
        return Err(Error::domain("fpre gradient is unbounded where Q3 = 3 n3"));
    }
    let lambda = p.lambda()?;
    let (ln_f3, ln_l) = (fk(3, lambda).ln(), lambda.ln());
    let mut grad = [0.0; 4];
    for (i, gi) in grad.iter_mut().enumerate() {
        let mut v: f64 = TERMS
            .iter()
            .filter(|t| t.a[i] != 0.0)
            .map(|t| t.coef * t.a[i] * p.term_value(t).ln())
            .sum();
        // -k₂ ln2 - m₂' ln2 - m₃ ln6
        v -= [0.0, 0.0, 0.0, 1.0][i] * LN_2 + [1.0, -1.0, 0.0, 0.0][i] * LN_2
            + [-1.0, 0.0, 0.0, 0.0][i] * ln6();
        v += A_N3[i] * ln_f3 - A_Q3[i] * ln_l;
        *gi = v;
    }
    Ok(grad)
}

/// The four gradient identities in product form:
/// `exp(∂fpre/∂x̂ᵢ)` written with `T₃, T₂, n₃, Q₃, m₃, λ, f₃`.
pub fn fpre_gradient_product_form(p: &PreKernelParams) -> Result<[f64; 4]> {
    p.check_s_m()?;
    let l = p.lambda()?;
    let f3 = fk(3, l);
    let (t3, t2, n3, q3, m3) = (p.t3(), p.t2(), p.n3(), p.q3(), p.m3());
    Ok([
        4.0 * t3.powi(3) * n3 * p.nu1 * l / (9.0 * m3 * m3 * q3 * t2 * t2 * f3),
        n3 * t2 * t2 * l * l / (2.0 * q3 * q3 * p.k0 * f3),
        t3 * n3 * t2 * l * l / (p.k1 * q3 * q3 * f3),
        t3 * t3 * n3 * l * l / (2.0 * p.k2 * q3 * q3 * f3),
    ])
}

/// Analytic Hessian of `fpre` in the scaled coordinates `x̂`.
pub fn fpre_hessian(p: &PreKernelParams) -> Result<[[f64; 4]; 4]> {
    p.check_s_m()?;
    if p.is_boundary() {
        return Err(Error::domain("fpre Hessian is unbounded where Q3 = 3 n3"));
    }
    let s = |x: f64| x / p.n;
    let mut hm = [[0.0; 4]; 4];
    for t in &TERMS {
        let q = s(p.term_value(t));
        for i in 0..4 {
            for j in 0..4 {
                hm[i][j] += t.coef * t.a[i] * t.a[j] / q;
            }
        }
    }
    let lambda = p.lambda()?;
    let c = p.c3();
    let eta = tpo_mean_fn(2, lambda);
    let d = s(p.q3()) * (1.0 + eta - c);
    for i in 0..4 {
        for j in 0..4 {
            hm[i][j] -= (A_Q3[i] - c * A_N3[i]) * (A_Q3[j] - c * A_N3[j]) / d;
        }
    }
    Ok(hm)
}

/// The pre-kernel maximizer `x*` together with the core optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimumPoint {
    pub lambda_star: f64,
    pub x_star: PreKernelParams,
    /// `ν̂₁* = 3m̂ / g₂(λ*)`.
    pub nu1_star_hat: f64,
    /// `fpre(x̂*)`.
    pub value: f64,
}

/// `x*` from the closed-form optimum with `λ*` solving the core equation.
pub fn optimum(n: f64, m: f64) -> Result<OptimumPoint> {
    let core = core_optimum(n, m)?;
    let l = core.lambda_hat;
    let (f1, g1) = (fk(1, l), g(1.0, l));
    let nu1 = core.nu1_star;
    let (k0, k1, k2) = if l == 0.0 {
        (nu1, 0.0, 0.0)
    } else {
        (
            nu1 * 2.0 * l / (f1 * g1),
            nu1 * 2.0 * l / g1,
            nu1 * l * f1 / (2.0 * g1),
        )
    };
    let x_star = PreKernelParams::new(n, m, [nu1, k0, k1, k2]);
    Ok(OptimumPoint {
        lambda_star: l,
        value: fpre(&x_star)?,
        x_star,
        nu1_star_hat: nu1 / n,
    })
}

fn solve4(a: [[f64; 4]; 4], b: [f64; 4]) -> Option<[f64; 4]> {
    let mut m = [[0.0; 5]; 4];
    for i in 0..4 {
        m[i][..4].copy_from_slice(&a[i]);
        m[i][4] = b[i];
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..4 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..5 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some([0, 1, 2, 3].map(|i| m[i][4] / m[i][i]))
}

fn strictly_interior(p: &PreKernelParams) -> bool {
    p.check_s_m().is_ok()
        && p.x().iter().all(|&v| v > 0.0)
        && p.t2() > 0.0
        && p.t3() > 0.0
        && p.q3() > 3.0 * p.n3()
        && p.n3() > 0.0
}

/// Maximizes `fpre` from `start` by damped Newton steps in `x̂` with a
/// backtracking line search that stays strictly inside `S_m`.
pub fn maximize_fpre(start: &PreKernelParams) -> Result<PreKernelParams> {
    if !strictly_interior(start) {
        return Err(Error::domain("maximize_fpre: start must be interior to S_m"));
    }
    let n = start.n;
    let mut cur = *start;
    let mut val = fpre(&cur)?;
    for _ in 0..500 {
        let grad = fpre_gradient(&cur)?;
        if grad.iter().all(|g| g.abs() < 1e-13) {
            break;
        }
        let hess = fpre_hessian(&cur)?;
        let mut dir = solve4(hess, grad.map(|g| -g)).unwrap_or(grad);
        let mut slope: f64 = (0..4).map(|i| dir[i] * grad[i]).sum();
        if !(slope > 0.0) {
            dir = grad;
            slope = grad.iter().map(|g| g * g).sum();
        }
        let xh = cur.x_hat();
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..80 {
            let cand = cur.with_x([0, 1, 2, 3].map(|i| (xh[i] + t * dir[i]) * n));
            if strictly_interior(&cand) {
                if let Ok(v) = fpre(&cand) {
                    if v >= val + 1e-4 * t * slope || (v >= val && t * slope < 1e-15) {
                        cur = cand;
                        val = v;
                        moved = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(cur)
}

/// Runs [`maximize_fpre`] from `starts` random interior points around `x*`
/// and returns the maximizers found.
pub fn maximize_from_random_starts(n: f64, m: f64, starts: usize, seed: u64) -> Result<Vec<PreKernelParams>> {
    let opt = optimum(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < starts {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::domain("could not draw interior starting points"));
        }
        let x = opt.x_star.x().map(|v| v * rng.random_range(0.8..1.2));
        let p = opt.x_star.with_x(x);
        if strictly_interior(&p) {
            out.push(maximize_fpre(&p)?);
        }
    }
    Ok(out)
}

/// Exact rational model of the leading Hessian terms at the optimum:
/// `H_num ≈ -(1/r²) H₀ - (1/r) T`. Entries are numerators over `den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HessianModel {
    pub h0_num: [[i64; 4]; 4],
    pub h0_den: i64,
    pub t_num: [[i64; 4]; 4],
    pub t_den: i64,
    pub z1: [i64; 4],
}

impl Default for HessianModel {
    fn default() -> Self {
        Self {
            h0_num: [[33, 12, 15, 18], [12, 6, 6, 6], [15, 6, 7, 8], [18, 6, 8, 12]],
            h0_den: 36,
            t_num: [
                [-141, -48, -33, -18],
                [-48, 66, 36, 6],
                [-33, 36, 31, -4],
                [-18, 6, -4, -4],
            ],
            t_den: 90,
            z1: [1, 1, -3, 0],
        }
    }
}

impl HessianModel {
    /// Numerators of `H₀ z₁` (exact).
    pub fn h0_times_z1(&self) -> [i64; 4] {
        [0, 1, 2, 3].map(|i| (0..4).map(|j| self.h0_num[i][j] * self.z1[j]).sum())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..4).all(|i| {
            (0..4).all(|j| self.h0_num[i][j] == self.h0_num[j][i] && self.t_num[i][j] == self.t_num[j][i])
        })
    }

    pub fn h0(&self) -> [[f64; 4]; 4] {
        self.h0_num.map(|r| r.map(|v| v as f64 / self.h0_den as f64))
    }

    pub fn t(&self) -> [[f64; 4]; 4] {
        self.t_num.map(|r| r.map(|v| v as f64 / self.t_den as f64))
    }
}

/// Hessian comparison at `x*` for one `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianCheck {
    pub r: f64,
    pub lambda_star: f64,
    /// Finite-difference Hessian in `x̂`.
    pub numeric: [[f64; 4]; 4],
    /// `‖H_num - H_analytic‖∞ / ‖H_analytic‖∞`.
    pub analytic_rel_diff: f64,
    /// `‖-r² H_num - H₀‖∞`.
    pub leading_error: f64,
    /// `E(r) = ‖-r² H_num - H₀ - r T‖∞` with `r = R/n`.
    pub e_r: f64,
    /// The same with `r` replaced by `s = λ*/12`.
    pub e_s: f64,
}

fn inf_norm(a: &[[f64; 4]; 4]) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Central differences of the analytic gradient (relative step `1e-5`,
/// one Richardson extrapolation), compared with `H₀` and `T`.
pub fn hessian_check(n: f64, m: f64) -> Result<HessianCheck> {
    let opt = optimum(n, m)?;
    let p = opt.x_star;
    let xh = p.x_hat();
    let grad_at = |x: [f64; 4]| fpre_gradient(&p.with_x(x.map(|v| v * n)));
    let mut numeric = [[0.0; 4]; 4];
    for j in 0..4 {
        let step = 1e-5 * xh[j];
        let diff = |hh: f64| -> Result<[f64; 4]> {
            let mut a = xh;
            let mut b = xh;
            a[j] += hh;
            b[j] -= hh;
            let (ga, gb) = (grad_at(a)?, grad_at(b)?);
            Ok([0, 1, 2, 3].map(|i| (ga[i] - gb[i]) / (2.0 * hh)))
        };
        let (d1, d2) = (diff(step)?, diff(step / 2.0)?);
        for i in 0..4 {
            numeric[i][j] = (4.0 * d2[i] - d1[i]) / 3.0;
        }
    }
    for i in 0..4 {
        for j in 0..i {
            let avg = 0.5 * (numeric[i][j] + numeric[j][i]);
            numeric[i][j] = avg;
            numeric[j][i] = avg;
        }
    }
    let analytic = fpre_hessian(&p)?;
    let mut diff = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            diff[i][j] = numeric[i][j] - analytic[i][j];
        }
    }
    let model = HessianModel::default();
    let (h0, t) = (model.h0(), model.t());
    let r = (m - n / 2.0) / n;
    let s = opt.lambda_star / 12.0;
    let err = |rr: f64, with_t: bool| {
        let mut e = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                e[i][j] = -rr * rr * numeric[i][j] - h0[i][j] - if with_t { rr * t[i][j] } else { 0.0 };
            }
        }
        inf_norm(&e)
    };
    Ok(HessianCheck {
        r,
        lambda_star: opt.lambda_star,
        numeric,
        analytic_rel_diff: inf_norm(&diff) / inf_norm(&analytic),
        leading_error: err(r, false),
        e_r: err(r, true),
        e_s: err(s, true),
    })
}

/// Both forms of `t(ν̂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TValue {
    pub definition: f64,
    pub expanded: f64,
    pub lambda_hat: f64,
}

/// `t(ν̂)` for `N` vertices and excess `R`, with `n = ν̂N`, `m = n/2 + R`.
pub fn t_of_nu(nuhat: f64, big_n: f64, big_r: f64) -> Result<TValue> {
    if !(nuhat > 0.0 && nuhat < 1.0) {
        return Err(Error::domain(format!("t(nu): need 0 < nu < 1, got {nuhat}")));
    }
    if !(big_r > 0.0 && big_n > 0.0) {
        return Err(Error::domain("t(nu): need N > 0 and R > 0"));
    }
    let n = nuhat * big_n;
    let m = n / 2.0 + big_r;
    let core = core_optimum(n, m)?;
    let l = core.lambda_hat;
    let forest = -(1.0 - nuhat) / 2.0 * (1.0 - nuhat).ln() + (1.0 - nuhat) / 2.0;
    let definition = forest + nuhat * core.value;
    let rh = big_r / big_n;
    let mh = m / n;
    let expanded = forest
        + 2.0 * rh * big_n.ln()
        + (2.0 * ln3() - LN_2 - 2.0) * rh
        + 2.0 * rh * nuhat.ln()
        + (ln3() - 0.5 * LN_2) * nuhat
        + nuhat * (fk(2, 2.0 * l).ln() - g(1.0, l).ln())
        + (0.5 * nuhat + rh)
            * (2.0 * mh.ln() + 3.0 * g(1.0, l).ln()
                - 2.0 * g(2.0, l).ln()
                - fk(1, l).ln()
                - 3.0 * l.ln());
    Ok(TValue {
        definition,
        expanded,
        lambda_hat: l,
    })
}

/// Solution of the global equation and the resulting `ν̂*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalOptimum {
    pub lambda_star2: f64,
    /// `ν̂* = f₂(2λ**) / (f₁(λ**) g₁(λ**))`.
    pub nu_star: f64,
}

pub fn global_optimum(big_n: f64, big_m: f64) -> Result<GlobalOptimum> {
    if !(big_m > big_n / 2.0) {
        return Err(Error::domain("need M > N/2"));
    }
    let l = solve_global_target(3.0 * big_m / big_n)?.lambda;
    Ok(GlobalOptimum {
        lambda_star2: l,
        nu_star: fk(2, 2.0 * l) / (fk(1, l) * g(1.0, l)),
    })
}

/// `φ(x)` of the main estimate.
pub fn phi(x: f64, big_n: f64, big_r: f64, lambda: f64) -> f64 {
    let rh = big_r / big_n;
    let (f1, g1) = (fk(1, lambda), g(1.0, lambda));
    -(1.0 - x) / 2.0 * (1.0 - x).ln() + (1.0 - x) / 2.0 + 2.0 * rh * big_n.ln()
        - (LN_2 + 2.0) * rh
        - 0.5 * LN_2 * x
        + rh * (g1.ln() - lambda.ln() - f1.ln())
        + 0.5 * x * (f1.ln() + g1.ln() - lambda.ln())
}

/// Log of the main estimate of the number of connected hypergraphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MainEstimate {
    pub lambda_star2: f64,
    pub nu_star: f64,
    pub phi: f64,
    /// `ln √(3/(πN)) + N φ(ν̂*) + N ln N - N`.
    pub ln_count: f64,
    /// The same with `t(ν̂*)` in place of `φ(ν̂*)`.
    pub ln_count_t_form: f64,
}

pub fn main_count_estimate(big_n: f64, big_m: f64) -> Result<MainEstimate> {
    let go = global_optimum(big_n, big_m)?;
    let big_r = big_m - big_n / 2.0;
    let ph = phi(go.nu_star, big_n, big_r, go.lambda_star2);
    let pre = 0.5 * (3.0 / (PI * big_n)).ln() + big_n * big_n.ln() - big_n;
    let t = t_of_nu(go.nu_star, big_n, big_r)?;
    Ok(MainEstimate {
        lambda_star2: go.lambda_star2,
        nu_star: go.nu_star,
        phi: ph,
        ln_count: pre + big_n * ph,
        ln_count_t_form: pre + big_n * t.definition,
    })
}

/// Pieces of the BCK estimate `binom(binom(N,k), M) · R_k(N, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BckEstimate {
    pub r: f64,
    pub zeta: f64,
    pub prefactor: f64,
    pub exponent: f64,
    pub ln_phi: f64,
    pub ln_binom: f64,
    pub ln_count: f64,
}

/// Prefactor and exponent of `R_k` for `k = 3`, as polynomials in `a = 1-r`
/// with `δ = ζ - 3/2`, avoiding the cancellation as `r → 1`.
pub fn bck_k3_prefactor_exponent(a: f64, delta: f64) -> (f64, f64) {
    let zeta = 1.5 + delta;
    let num = -2.0 * delta + a * (3.0 + 4.0 * delta) + a * a * (-2.0 - 2.0 * delta);
    let brace = -6.0 * delta + 12.0 * delta * a + (15.0 - 7.0 * zeta) * a * a
        + (zeta - 6.0) * a.powi(3)
        + a.powi(4);
    let prefactor = num / brace.sqrt();
    let r = 1.0 - a;
    let exponent = zeta * r * (1.0 + 2.0 * r) / (1.0 + r + r * r);
    (prefactor, exponent)
}

/// `ln binom(T, M)` for a huge real `T`.
pub fn ln_binom_real(t: f64, m: u64) -> f64 {
    let s: f64 = (0..m).map(|i| (-(i as f64) / t).ln_1p()).sum();
    m as f64 * t.ln() + s - ln_factorial(m)
}

/// `ln D(N, M, k)` from the BCK connectivity probability.
pub fn bck_count_estimate(big_n: u64, big_m: u64, k: u32) -> Result<BckEstimate> {
    if k < 2 {
        return Err(Error::domain("bck: k must be at least 2"));
    }
    let kf = k as f64;
    let (nf, mf) = (big_n as f64, big_m as f64);
    let zeta = kf * mf / nf;
    let sol = solve_bck_r(k, zeta)?;
    let lambda = sol.lambda.lambda;
    let r = sol.r;
    let a = -(-lambda).exp_m1();
    let one_minus_rk = -(-kf * lambda).exp_m1();
    let ln_phi = if lambda == 0.0 {
        0.0
    } else {
        r / a * (-lambda) + (1.0 - zeta) * a.ln() + zeta / kf * one_minus_rk.ln()
    };
    let (prefactor, exponent) = match k {
        2 => {
            let pf = (1.0 + r - zeta * r) / ((a * a - 2.0 * zeta * r).sqrt());
            (pf, (2.0 * zeta * r + zeta * zeta * r) / (2.0 * (1.0 + r)))
        }
        3 => {
            let delta = (6.0 * mf - 3.0 * nf) / (2.0 * nf);
            bck_k3_prefactor_exponent(a, delta)
        }
        _ => {
            let rk1 = r.powi(k as i32 - 1);
            let num = one_minus_rk - a * zeta * (kf - 1.0) * rk1;
            let den = (one_minus_rk + zeta * (kf - 1.0) * (r - rk1)) * one_minus_rk
                - zeta * kf * r * (1.0 - rk1).powi(2);
            let ex = zeta * (kf - 1.0) * (r - 2.0 * r.powi(k as i32) + rk1) / (2.0 * one_minus_rk);
            (num / den.sqrt(), ex)
        }
    };
    let total_edges = (0..k as u64).fold(1.0, |acc, i| acc * (big_n - i) as f64 / (i + 1) as f64);
    let ln_binom = ln_binom_real(total_edges, big_m);
    Ok(BckEstimate {
        r,
        zeta,
        prefactor,
        exponent,
        ln_phi,
        ln_binom,
        ln_count: ln_binom + prefactor.ln() + exponent + nf * ln_phi,
    })
}

/// Upper bound `ln(α n √m) + ln n! + n fcore(ν̂₁*)` on the number of cores,
/// with the unspecified constant `α = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GcoreBound {
    pub ln_bound: f64,
    pub alpha: f64,
}

pub fn gcore_upper_bound(n: f64, m: f64) -> Result<GcoreBound> {
    let core = core_optimum(n, m)?;
    Ok(GcoreBound {
        ln_bound: (n * m.sqrt()).ln() + ln_gamma(n + 1.0) + n * core.value,
        alpha: 1.0,
    })
}

/// `ln( √3/(πn) · n! · exp(n fpre(x̂*)) )`, the pre-kernel count estimate.
pub fn gpre_estimate_ln(n: f64, m: f64) -> Result<f64> {
    let opt = optimum(n, m)?;
    Ok((3f64.sqrt() / (PI * n)).ln() + ln_gamma(n + 1.0) + n * opt.value)
}

/// `(1/s) Σ exp(-αx² + βx + φx² + ψx)` over `x ∈ (z + ℤ)/s`, `|x| ≤ T`.
#[allow(clippy::too_many_arguments)]
pub fn laplace_lattice_sum(
    alpha: f64,
    beta: f64,
    phi_n: f64,
    psi_n: f64,
    z: f64,
    s_n: f64,
    t_n: f64,
) -> Result<f64> {
    if !(alpha > 0.0) || !(s_n >= 1.0) || !(t_n > 0.0) {
        return Err(Error::domain("laplace sum: need alpha > 0, s >= 1, T > 0"));
    }
    let lo = (-t_n * s_n - z).ceil() as i64;
    let hi = (t_n * s_n - z).floor() as i64;
    let sum: f64 = (lo..=hi)
        .map(|j| {
            let x = (z + j as f64) / s_n;
            ((-alpha + phi_n) * x * x + (beta + psi_n) * x).exp()
        })
        .sum();
    Ok(sum / s_n)
}

/// `exp(β²/(4α)) √(π/α)`.
pub fn laplace_closed_form(alpha: f64, beta: f64) -> f64 {
    (beta * beta / (4.0 * alpha)).exp() * (PI / alpha).sqrt()
}

/// Max over `ys` of `|d/dy[t ln f_k(λ) - T ln λ] - (t' ln f_k(λ) - T' ln λ)|`,
/// with `λ(y)` the root of `λ f_{k-1}/f_k = T/t` and derivatives by central
/// differences with step `1e-5`.
pub fn difdeg_identity_check(
    k: u32,
    t_fn: impl Fn(f64) -> f64,
    big_t_fn: impl Fn(f64) -> f64,
    ys: &[f64],
) -> Result<f64> {
    let hstep = 1e-5;
    let lam = |y: f64| -> Result<f64> { Ok(solve_tpo_mean(k, big_t_fn(y) / t_fn(y))?.lambda) };
    let lhs_fn = |y: f64| -> Result<f64> {
        let l = lam(y)?;
        Ok(t_fn(y) * fk(k as i32, l).ln() - big_t_fn(y) * l.ln())
    };
    let mut worst: f64 = 0.0;
    for &y in ys {
        let lhs = (lhs_fn(y + hstep)? - lhs_fn(y - hstep)?) / (2.0 * hstep);
        let dt = (t_fn(y + hstep) - t_fn(y - hstep)) / (2.0 * hstep);
        let dbt = (big_t_fn(y + hstep) - big_t_fn(y - hstep)) / (2.0 * hstep);
        let l = lam(y)?;
        let rhs = dt * fk(k as i32, l).ln() - dbt * l.ln();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Leading series of the pre-kernel optimum in `λ*`:
/// `[r, ν̂₁, k̂₀, k̂₁, k̂₂, Q̂₃, m̂₃, m̂₂']`.
pub fn optpre_series(l: f64) -> [f64; 8] {
    let l2 = l * l;
    [
        l / 12.0 + l2 / 36.0,
        0.5 - l / 12.0 - l2 / 36.0,
        0.5 - 7.0 * l / 12.0 + 2.0 * l2 / 9.0,
        l / 2.0 - l2 / 3.0,
        l2 / 8.0,
        l / 2.0 + l2 / 12.0,
        l / 6.0 + l2 / 18.0,
        l / 2.0 - l2 / 4.0,
    ]
}

/// The same quantities evaluated at the exact optimum.
pub fn optpre_exact(opt: &OptimumPoint) -> [f64; 8] {
    let p = opt.x_star;
    let s = |v: f64| v / p.n;
    [
        (p.m - p.n / 2.0) / p.n,
        s(p.nu1),
        s(p.k0),
        s(p.k1),
        s(p.k2),
        s(p.q3()),
        s(p.m3()),
        s(p.m2p()),
    ]
}

/// Series of `fpre(x̂*)` through second order in `λ*`.
pub fn fpre_series(n: f64, r: f64, l: f64) -> f64 {
    2.0 * r * n.ln() - 4.0 * r * r.ln()
        + (-2.0 / 3.0 * LN_2 - ln3() / 3.0 + 1.0 / 3.0) * l
        + (-2.0 / 9.0 * LN_2 - ln3() / 9.0 + 7.0 / 36.0) * l * l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fcore_boundary_is_finite() {
        let (n, m) = (100.0, 60.0);
        let p = CoreParams::new(n, m, 2.0 * n - 3.0 * m).unwrap();
        assert!(p.is_boundary());
        assert!(fcore(&p).unwrap().is_finite());
        assert!(CoreParams::new(n, m, 10.0).is_err());
    }

    #[test]
    fn fcore_derivatives_match_differences() {
        let (n, m) = (1000.0, 560.0);
        let p = CoreParams::new(n, m, 420.0).unwrap();
        let f = |nu: f64| fcore(&CoreParams::new(n, m, nu).unwrap()).unwrap();
        let hh = 1e-3;
        let d1 = (f(420.0 + hh) - f(420.0 - hh)) / (2.0 * hh / n);
        assert!((d1 - fcore_derivative(&p).unwrap()).abs() < 1e-6);
        let fd = |nu: f64| fcore_derivative(&CoreParams::new(n, m, nu).unwrap()).unwrap();
        let d2 = (fd(420.0 + hh) - fd(420.0 - hh)) / (2.0 * hh / n);
        assert!((d2 - fcore_second_derivative(&p).unwrap()).abs() < 1e-5 * d2.abs());
    }

    #[test]
    fn core_optimum_is_stationary() {
        let (n, m) = (1000.0, 550.0);
        let o = core_optimum(n, m).unwrap();
        let d = fcore_derivative(&CoreParams::new(n, m, o.nu1_star).unwrap()).unwrap();
        assert!(d.abs() < 1e-8, "{d}");
    }

    #[test]
    fn s_m_errors_name_condition() {
        let p = PreKernelParams::new(20.0, 12.0, [2.0, 2.0, 1.0, 0.0]);
        let e = p.check_s_m().unwrap_err().to_string();
        assert!(e.contains("C2"), "{e}");
        let p = PreKernelParams::new(20.0, 12.0, [-1.0, 0.0, 0.0, 0.0]);
        assert!(p.check_s_m().unwrap_err().to_string().contains("C1"));
    }

    #[test]
    fn gradient_matches_product_form_and_differences() {
        let o = optimum(1e4, 5200.0).unwrap();
        let x = o.x_star.x();
        let p = o.x_star.with_x([x[0] * 0.998, x[1] * 1.001, x[2] * 1.02, x[3] * 0.97]);
        p.check_s_m().unwrap();
        let g = fpre_gradient(&p).unwrap();
        let pf = fpre_gradient_product_form(&p).unwrap();
        for i in 0..4 {
            assert!((g[i] - pf[i].ln()).abs() < 1e-9, "{i}: {} {}", g[i], pf[i].ln());
        }
        let xh = p.x_hat();
        for i in 0..4 {
            let hh = 1e-6 * xh[i];
            let mut a = xh;
            let mut b = xh;
            a[i] += hh;
            b[i] -= hh;
            let fa = fpre(&p.with_x(a.map(|v| v * p.n))).unwrap();
            let fb = fpre(&p.with_x(b.map(|v| v * p.n))).unwrap();
            assert!(((fa - fb) / (2.0 * hh) - g[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn optimum_is_stationary_and_matches_core() {
        for r in [1e-3, 1e-2, 5e-2] {
            let n = 1e6;
            let o = optimum(n, n / 2.0 + r * n).unwrap();
            let g = fpre_gradient(&o.x_star).unwrap();
            assert!(g.iter().all(|v| v.abs() < 1e-6), "{g:?}");
            let c = core_optimum(n, n / 2.0 + r * n).unwrap();
            assert!((o.value - c.value).abs() < 1e-9);
        }
    }

    #[test]
    fn hessian_model_exact() {
        let hm = HessianModel::default();
        assert_eq!(hm.h0_times_z1(), [0; 4]);
        assert!(hm.is_symmetric());
    }

    #[test]
    fn laplace_gaussian() {
        let v = laplace_lattice_sum(0.5, 0.0, 0.0, 0.0, 0.0, 1e3, 30.0).unwrap();
        assert!((v / (2.0 * PI).sqrt() - 1.0).abs() < 5e-3);
    }

    #[test]
    fn bck_limits() {
        let a = 1e-6;
        let l = -(1.0 - a as f64).ln();
        let zeta = crate::solvers::global_fn(l);
        let (pf, ex) = bck_k3_prefactor_exponent(a, zeta - 1.5);
        assert!((pf - 3f64.sqrt()).abs() < 1e-3, "{pf}");
        assert!((ex - 1.5).abs() < 1e-3);
    }
}
