//! The truncated Poisson law `tpo(k, λ)`: `P(Y = j) = λ^j / (j! f_k(λ))` for
//! `j ≥ k`. Exact probabilities for sums of i.i.d. copies, the two asymptotic
//! estimates of those probabilities, and exact (conditioned) samplers.

use rand::Rng;
use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use crate::solvers::tpo_mean_fn;
use crate::special_fn::fk;
use crate::{Error, Result};

/// Tail mass below which the support is truncated.
pub const TAIL_CUTOFF: f64 = 1e-16;

/// Largest DP table (variables × excess values) accepted.
pub const MAX_DP_CELLS: u64 = 100_000_000;

/// Largest stored table for conditioned sampling.
pub const MAX_SAMPLING_CELLS: u64 = 20_000_000;

/// `tpo(k, λ)`. λ = 0 is allowed and denotes the point mass at `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedPoisson {
    pub k: u32,
    pub lambda: f64,
}

impl TruncatedPoisson {
    pub fn new(k: u32, lambda: f64) -> Result<Self> {
        if k > crate::special_fn::MAX_K {
            return Err(Error::domain(format!("tpo: k = {k} out of range")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("tpo: invalid lambda {lambda}")));
        }
        Ok(Self { k, lambda })
    }

    /// `P(Y = j)`.
    pub fn pmf(&self, j: u64) -> f64 {
        if j < self.k as u64 {
            return 0.0;
        }
        if self.lambda == 0.0 {
            return if j == self.k as u64 { 1.0 } else { 0.0 };
        }
        let ln_fk = fk(self.k as i32, self.lambda).ln();
        (j as f64 * self.lambda.ln() - ln_factorial(j) - ln_fk).exp()
    }

    /// `E[Y] = λ f_{k-1}/f_k`.
    pub fn mean(&self) -> f64 {
        tpo_mean_fn(self.k, self.lambda)
    }

    /// `η = λ f_{k-2}/f_{k-1}`, the mean of `tpo(k-1, λ)`.
    pub fn eta(&self) -> f64 {
        if self.k == 0 {
            return self.lambda;
        }
        tpo_mean_fn(self.k - 1, self.lambda)
    }

    /// `Var[Y] = c(1 + η - c)`.
    pub fn variance(&self) -> f64 {
        let c = self.mean();
        c * (1.0 + self.eta() - c)
    }

    /// `E[Y(Y-1)] = λ² f_{k-2}/f_k`.
    pub fn second_factorial_moment(&self) -> f64 {
        if self.lambda == 0.0 {
            let k = self.k as f64;
            return k * (k - 1.0);
        }
        self.lambda * self.lambda * fk(self.k as i32 - 2, self.lambda) / fk(self.k as i32, self.lambda)
    }

    /// Probabilities `P(Y = k + i)` for `i = 0..`, truncated where the
    /// remaining tail falls below [`TAIL_CUTOFF`] or at `max_excess`.
    pub fn excess_table(&self, max_excess: u64) -> Vec<f64> {
        let k = self.k as u64;
        let mut out = Vec::new();
        let mut p = self.pmf(k);
        for i in 0..=max_excess {
            out.push(p);
            let j = k + i;
            let ratio = self.lambda / (j + 1) as f64;
            if ratio < 1.0 {
                let tail = p * ratio / (1.0 - ratio);
                if tail < TAIL_CUTOFF && (j as f64) > self.lambda {
                    break;
                }
            }
            p = if j + 1 > 100 { self.pmf(j + 1) } else { p * ratio };
        }
        out
    }

    /// Probabilities `P(Y = k + i)` for every `i = 0..=max_excess`.
    pub fn excess_pmf(&self, max_excess: u64) -> Vec<f64> {
        let k = self.k as u64;
        let mut out = Vec::with_capacity(max_excess as usize + 1);
        let mut p = self.pmf(k);
        for i in 0..=max_excess {
            out.push(p);
            let j = k + i + 1;
            p = if j > 100 { self.pmf(j) } else { p * self.lambda / j as f64 };
        }
        out
    }

    /// Exact draw by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        TpoSampler::new(*self).sample(rng)
    }
}

/// Inverse-CDF sampler with a cached table.
#[derive(Debug, Clone)]
pub struct TpoSampler {
    k: u64,
    cdf: Vec<f64>,
}

impl TpoSampler {
    pub fn new(dist: TruncatedPoisson) -> Self {
        let table = dist.excess_table(u64::MAX - dist.k as u64);
        let mut acc = 0.0;
        let cdf = table
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            k: dist.k as u64,
            cdf,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cdf.last().unwrap_or(&1.0);
        let u = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u);
        self.k + i.min(self.cdf.len() - 1) as u64
    }
}

/// The event `Y_1 + … + Y_n = Q` for i.i.d. `Y_i ~ dist`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaEvent {
    pub n_vars: u64,
    pub target_sum: u64,
    pub dist: TruncatedPoisson,
}

impl SigmaEvent {
    /// `Q - k n`, or `None` if the target is below the minimum.
    pub fn excess(&self) -> Option<u64> {
        self.target_sum.checked_sub(self.dist.k as u64 * self.n_vars)
    }
}

/// Rows `P_i(e)` of the excess convolution, each stored with a log scale.
struct DpRows {
    rows: Vec<Vec<f64>>,
    log_scale: Vec<f64>,
}

fn convolve_step(prev: &[f64], pmf: &[f64], out: &mut [f64]) {
    for (e, slot) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (x, p) in pmf.iter().enumerate().take(e + 1) {
            s += p * prev[e - x];
        }
        *slot = s;
    }
}

fn rescale(row: &mut [f64]) -> f64 {
    let m = row.iter().cloned().fold(0.0, f64::max);
    if m > 0.0 && (m < 1e-200 || m > 1e200) {
        row.iter_mut().for_each(|v| *v /= m);
        m.ln()
    } else {
        0.0
    }
}

fn dp_rows(ev: &SigmaEvent, keep_rows: bool) -> Result<DpRows> {
    let e_max = ev.excess().unwrap_or(0);
    let limit = if keep_rows { MAX_SAMPLING_CELLS } else { MAX_DP_CELLS };
    let cells = ev.n_vars.saturating_mul(e_max + 1);
    if cells > limit {
        return Err(Error::resource(format!(
            "Sigma DP table needs {cells} cells (limit {limit})"
        )));
    }
    let pmf = ev.dist.excess_pmf(e_max);
    let width = e_max as usize + 1;
    let mut cur = vec![0.0; width];
    cur[0] = 1.0;
    let mut rows = Vec::new();
    let mut log_scale = vec![0.0];
    let mut acc = 0.0;
    if keep_rows {
        rows.push(cur.clone());
    }
    let mut next = vec![0.0; width];
    for _ in 0..ev.n_vars {
        convolve_step(&cur, &pmf, &mut next);
        std::mem::swap(&mut cur, &mut next);
        acc += rescale(&mut cur);
        log_scale.push(acc);
        if keep_rows {
            rows.push(cur.clone());
        }
    }
    if !keep_rows {
        rows.push(cur);
    }
    Ok(DpRows { rows, log_scale })
}

/// Exact `P(Σ Y_i = Q)` by dynamic programming over the excess.
pub fn sigma_prob_exact(ev: &SigmaEvent) -> Result<f64> {
    Ok(sigma_log_prob_exact(ev)?.exp())
}

/// `ln P(Σ Y_i = Q)`; `-∞` when the event is impossible.
pub fn sigma_log_prob_exact(ev: &SigmaEvent) -> Result<f64> {
    let Some(e) = ev.excess() else {
        return Ok(f64::NEG_INFINITY);
    };
    if ev.n_vars == 0 {
        return Ok(if e == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let dp = dp_rows(ev, false)?;
    let last = dp.rows.last().expect("row");
    Ok(last[e as usize].ln() + dp.log_scale[ev.n_vars as usize])
}

/// Estimate `e^{-R} R^R / R!` with `R = Q - k n`, for small excess.
pub fn sigma_prob_poisson_regime(ev: &SigmaEvent) -> f64 {
    match ev.excess() {
        None => 0.0,
        Some(0) => 1.0,
        Some(r) => {
            let rf = r as f64;
            (-rf + rf * rf.ln() - ln_factorial(r)).exp()
        }
    }
}

/// Local limit estimate `1 / sqrt(2π n c(1+η-c))` using the event's λ.
pub fn sigma_prob_clt_regime(ev: &SigmaEvent) -> f64 {
    if ev.excess().is_none() {
        return 0.0;
    }
    let var = ev.dist.variance();
    1.0 / (2.0 * std::f64::consts::PI * ev.n_vars as f64 * var).sqrt()
}

/// Picks the Poisson-regime estimate when `Q - k n ≤ ln n`, else the local
/// limit estimate.
pub fn sigma_prob_asymptotic(ev: &SigmaEvent) -> f64 {
    match ev.excess() {
        None => 0.0,
        Some(r) if (r as f64) <= (ev.n_vars as f64).ln().max(0.0) => sigma_prob_poisson_regime(ev),
        Some(_) => sigma_prob_clt_regime(ev),
    }
}

/// Exact sampler for `(Y_1, …, Y_n)` conditioned on `Σ Y_i = Q`.
pub struct ConditionedSampler {
    ev: SigmaEvent,
    acceptance: f64,
    plain: TpoSampler,
    excess_pmf: Vec<f64>,
    rows: Option<DpRows>,
}

impl ConditionedSampler {
    pub fn new(ev: SigmaEvent) -> Result<Self> {
        let Some(e) = ev.excess() else {
            return Err(Error::domain(format!(
                "conditioned sampling: target {} below minimum {}",
                ev.target_sum,
                ev.dist.k as u64 * ev.n_vars
            )));
        };
        let acceptance = if ev.n_vars.saturating_mul(e + 1) <= MAX_DP_CELLS {
            sigma_prob_exact(&ev)?
        } else {
            0.0
        };
        let excess_pmf = ev.dist.excess_pmf(e);
        let rows = if acceptance >= 1e-3 {
            None
        } else {
            Some(dp_rows(&ev, true)?)
        };
        if let Some(r) = &rows {
            if !(r.rows[ev.n_vars as usize][e as usize] > 0.0) {
                return Err(Error::domain("conditioned sampling: event has probability 0"));
            }
        }
        Ok(Self {
            ev,
            acceptance,
            plain: TpoSampler::new(ev.dist),
            excess_pmf,
            rows,
        })
    }

    /// `P(Σ Y_i = Q)` as computed at construction.
    pub fn acceptance(&self) -> f64 {
        self.acceptance
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let n = self.ev.n_vars as usize;
        match &self.rows {
            None => loop {
                let ys: Vec<u64> = (0..n).map(|_| self.plain.sample(rng)).collect();
                if ys.iter().sum::<u64>() == self.ev.target_sum {
                    return ys;
                }
            },
            Some(dp) => {
                let k = self.ev.dist.k as u64;
                let mut rem = self.ev.excess().expect("checked") as usize;
                let mut out = Vec::with_capacity(n);
                for i in (1..=n).rev() {
                    let row = &dp.rows[i - 1];
                    let weights: Vec<f64> = (0..=rem)
                        .map(|x| self.excess_pmf.get(x).copied().unwrap_or(0.0) * row[rem - x])
                        .collect();
                    let total: f64 = weights.iter().sum();
                    let mut u = rng.random::<f64>() * total;
                    let mut pick = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
                    for (x, w) in weights.iter().enumerate() {
                        if u < *w {
                            pick = x;
                            break;
                        }
                        u -= w;
                    }
                    out.push(k + pick as u64);
                    rem -= pick;
                }
                out
            }
        }
    }
}

/// One conditioned draw; see [`ConditionedSampler`].
pub fn sample_conditioned<R: Rng + ?Sized>(ev: &SigmaEvent, rng: &mut R) -> Result<Vec<u64>> {
    Ok(ConditionedSampler::new(*ev)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::f_k;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pmf_examples() {
        let d = TruncatedPoisson::new(2, 1.0).unwrap();
        assert_eq!(d.pmf(1), 0.0);
        let p = TruncatedPoisson::new(0, 1.0).unwrap().pmf(0);
        assert!((p - (-1f64).exp()).abs() < 1e-15);
        let d = TruncatedPoisson::new(2, 0.5).unwrap();
        assert!((d.pmf(2) - 0.125 / f_k(2, 0.5).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn mean_examples() {
        assert!((TruncatedPoisson::new(0, 2.0).unwrap().mean() - 2.0).abs() < 1e-15);
        assert!((TruncatedPoisson::new(2, 1e-9).unwrap().mean() - 2.0).abs() < 1e-8);
        let d = TruncatedPoisson::new(2, 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((d.mean() - (e - 1.0) / (e - 2.0)).abs() < 1e-12);
        let direct: f64 = (2..60).map(|j| j as f64 * d.pmf(j)).sum();
        assert!((d.mean() - direct).abs() < 1e-10);
    }

    #[test]
    fn small_sigma_examples() {
        let d = TruncatedPoisson::new(2, 1.0).unwrap();
        let ev = SigmaEvent { n_vars: 1, target_sum: 3, dist: d };
        assert!((sigma_prob_exact(&ev).unwrap() - d.pmf(3)).abs() < 1e-15);
        let d = TruncatedPoisson::new(2, 0.7).unwrap();
        let ev = SigmaEvent { n_vars: 2, target_sum: 4, dist: d };
        assert!((sigma_prob_exact(&ev).unwrap() - d.pmf(2).powi(2)).abs() < 1e-15);
        let ev = SigmaEvent { n_vars: 2, target_sum: 3, dist: d };
        assert_eq!(sigma_prob_exact(&ev).unwrap(), 0.0);
    }

    #[test]
    fn unique_sequence_and_symmetric_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = TruncatedPoisson::new(2, 1.0).unwrap();
        let ev = SigmaEvent { n_vars: 3, target_sum: 6, dist: d };
        for _ in 0..10 {
            assert_eq!(sample_conditioned(&ev, &mut rng).unwrap(), vec![2, 2, 2]);
        }
        let ev = SigmaEvent { n_vars: 2, target_sum: 5, dist: d };
        let s = ConditionedSampler::new(ev).unwrap();
        let mut first_two = 0;
        for _ in 0..20000 {
            let y = s.sample(&mut rng);
            assert_eq!(y.iter().sum::<u64>(), 5);
            first_two += (y[0] == 2) as u32;
        }
        assert!((first_two as f64 / 20000.0 - 0.5).abs() < 3.0 * (0.25f64 / 20000.0).sqrt());
    }

    #[test]
    fn impossible_target_is_domain_error() {
        let d = TruncatedPoisson::new(3, 1.0).unwrap();
        let ev = SigmaEvent { n_vars: 3, target_sum: 8, dist: d };
        assert!(matches!(ConditionedSampler::new(ev), Err(Error::Domain(_))));
    }

    #[test]
    fn resource_limit() {
        let d = TruncatedPoisson::new(2, 1.0).unwrap();
        let ev = SigmaEvent { n_vars: 1_000_000, target_sum: 2_000_200, dist: d };
        assert!(matches!(sigma_prob_exact(&ev), Err(Error::Resource(_))));
    }
}
