//! Configuration-model generators for cores, kernels, pre-kernels and the
//! left/right bin model, and the Monte-Carlo estimator of `gpre(n, m)`.
//!
//! Every generator takes an explicit RNG. Estimators derive one ChaCha8
//! stream per parameter point from a single seed, so results do not depend
//! on thread scheduling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use crate::asymptotics::{optimum, CoreParams, PreKernelParams};
use crate::exact_enum::w_pre;
use crate::hypergraph_model::{Kernel, Multigraph};
use crate::tpoisson::{sigma_prob_exact, ConditionedSampler, SigmaEvent, TruncatedPoisson};
use crate::{Error, Result};

/// The seeded stream used by all estimators.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random `k`-subset of `0..n`, in random order.
fn subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<u32> {
    rand::seq::index::sample(rng, n, k).into_iter().map(|i| i as u32).collect()
}

/// A core from the configuration model.
///
/// `d` lists the degrees of the `n - ν₁` vertices of degree at least 2, in
/// increasing label order of those vertices.
pub fn sample_gcore<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    nu1: usize,
    d: &[u64],
    rng: &mut R,
) -> Result<Multigraph> {
    if nu1 > m {
        return Err(Error::domain(format!("nu1 exceeds m ({nu1} > {m})")));
    }
    if nu1 > n || d.len() != n - nu1 {
        return Err(Error::domain(format!(
            "degree sequence has {} entries, expected n - nu1 = {}",
            d.len(),
            n.saturating_sub(nu1)
        )));
    }
    if d.iter().any(|&x| x < 2) {
        return Err(Error::domain("core degrees must be at least 2"));
    }
    let q2 = (3 * m - nu1) as u64;
    if d.iter().sum::<u64>() != q2 {
        return Err(Error::domain(format!("degree sum must equal 3m - nu1 = {q2}")));
    }
    let mut is_v1 = vec![false; n];
    let v1 = subset(n, nu1, rng);
    for &v in &v1 {
        is_v1[v as usize] = true;
    }
    let heavy: Vec<u32> = (0..n as u32).filter(|&v| !is_v1[v as usize]).collect();
    let mut phi = vec![[u32::MAX; 3]; m];
    // Each degree-1 vertex goes to its own edge-bin.
    for (&v, &e) in v1.iter().zip(subset(m, nu1, rng).iter()) {
        phi[e as usize][rng.random_range(0..3)] = v;
    }
    let mut points: Vec<u32> = heavy
        .iter()
        .zip(d)
        .flat_map(|(&v, &k)| std::iter::repeat_n(v, k as usize))
        .collect();
    points.shuffle(rng);
    let mut it = points.into_iter();
    for slot in phi.iter_mut().flatten().filter(|s| **s == u32::MAX) {
        *slot = it.next().expect("point count checked");
    }
    Ok(Multigraph { n, phi })
}

/// Degrees of the vertices of degree at least 2 for a core, drawn from
/// `tpo(2, λ_{ν₁})` conditioned on summing to `3m - ν₁`.
pub fn sample_core_degrees<R: Rng + ?Sized>(n: usize, m: usize, nu1: usize, rng: &mut R) -> Result<Vec<u64>> {
    if nu1 > m {
        return Err(Error::domain(format!("nu1 exceeds m ({nu1} > {m})")));
    }
    let p = CoreParams::new(n as f64, m as f64, nu1 as f64)?;
    let ev = SigmaEvent {
        n_vars: (n - nu1) as u64,
        target_sum: (3 * m - nu1) as u64,
        dist: TruncatedPoisson::new(2, p.lambda()?)?,
    };
    Ok(ConditionedSampler::new(ev)?.sample(rng))
}

/// Number of edges containing a repeated vertex.
pub fn count_loops(mg: &Multigraph) -> usize {
    mg.phi
        .iter()
        .filter(|e| e[0] == e[1] || e[1] == e[2] || e[0] == e[2])
        .count()
}

/// A kernel-configuration: vertex-bins `0..k₁+k₂` have size 2 (the first
/// `k₁` of them are the ones with a point matched into a size-2 edge-bin),
/// the remaining vertex-bins have sizes `d`. Edge-bins `0..m₃` have size 3,
/// the rest size 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelConfiguration {
    pub vertex_bins: Vec<usize>,
    pub edge_bins: Vec<usize>,
    /// `matching[p]` is the edge point matched to vertex point `p`; points
    /// are numbered consecutively bin by bin.
    pub matching: Vec<usize>,
}

fn bin_starts(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len() + 1);
    let mut acc = 0;
    out.push(0);
    for &s in sizes {
        acc += s;
        out.push(acc);
    }
    out
}

fn owner(starts: &[usize], p: usize) -> usize {
    starts.partition_point(|&s| s <= p) - 1
}

impl KernelConfiguration {
    /// `(m₃, m₂')` implied by the edge-bin sizes.
    fn shape(&self) -> (usize, usize) {
        let m3 = self.edge_bins.iter().filter(|&&s| s == 3).count();
        (m3, self.edge_bins.len() - m3)
    }

    /// Rows of the kernel: for each edge-bin, the vertex-bins of its points.
    pub fn rows(&self) -> Vec<Vec<usize>> {
        let vs = bin_starts(&self.vertex_bins);
        let es = bin_starts(&self.edge_bins);
        let mut rows: Vec<Vec<usize>> = self.edge_bins.iter().map(|&s| vec![0; s]).collect();
        for (p, &q) in self.matching.iter().enumerate() {
            let e = owner(&es, q);
            rows[e][q - es[e]] = owner(&vs, p);
        }
        rows
    }

    /// Size-2 edge-bins grouped by how many of their points are matched to
    /// size-2 vertex-bins: `[m₂'(0), m₂'(1), m₂'(2)]`.
    pub fn m2p_counts(&self) -> [usize; 3] {
        let (m3, _) = self.shape();
        let deg2 = self.vertex_bins.iter().take_while(|&&s| s == 2).count();
        let mut out = [0; 3];
        for row in &self.rows()[m3..] {
            out[row.iter().filter(|&&v| v < deg2).count()] += 1;
        }
        out
    }
}

/// Derives `m₂'` from the kernel parameters, checking feasibility.
fn kernel_m2p(k1: usize, k2: usize, d: &[u64], m3: usize) -> Result<usize> {
    let q3: usize = d.iter().sum::<u64>() as usize;
    if d.iter().any(|&x| x < 3) {
        return Err(Error::domain("kernel degrees must be at least 3"));
    }
    let p3 = 3 * m3;
    let Some(t3) = p3.checked_sub(k1 + 2 * k2) else {
        return Err(Error::domain("T3 = P3 - k1 - 2 k2 is negative"));
    };
    let Some(t2) = q3.checked_sub(t3) else {
        return Err(Error::domain("degree sum Q3 is smaller than T3"));
    };
    if (t2 + k1) % 2 != 0 {
        return Err(Error::domain("P2 = T2 + k1 must be even"));
    }
    Ok((t2 + k1) / 2)
}

/// A uniform kernel-configuration with `k₁ + k₂` size-2 vertex-bins, big
/// vertex-bins of sizes `d`, `m₃` size-3 edge-bins and `m₂'` size-2
/// edge-bins, where `m₂'` is determined by the point count.
pub fn sample_kernel_configuration<R: Rng + ?Sized>(
    k1: usize,
    k2: usize,
    d: &[u64],
    m3: usize,
    rng: &mut R,
) -> Result<KernelConfiguration> {
    let m2p = kernel_m2p(k1, k2, d, m3)?;
    let vertex_bins: Vec<usize> = std::iter::repeat_n(2, k1 + k2)
        .chain(d.iter().map(|&x| x as usize))
        .collect();
    let edge_bins: Vec<usize> = std::iter::repeat_n(3, m3).chain(std::iter::repeat_n(2, m2p)).collect();
    let p3 = 3 * m3;
    let total: usize = vertex_bins.iter().sum();
    let mut matching = vec![usize::MAX; total];
    // U: one point of each k₁-bin, D: the other points of size-2 bins.
    let mut u_pts = Vec::with_capacity(k1);
    let mut d_pts = Vec::with_capacity(k1 + 2 * k2);
    for b in 0..k1 + k2 {
        if b < k1 {
            let side = rng.random_range(0..2);
            u_pts.push(2 * b + side);
            d_pts.push(2 * b + 1 - side);
        } else {
            d_pts.extend([2 * b, 2 * b + 1]);
        }
    }
    let mut three_pts: Vec<usize> = (0..p3).collect();
    three_pts.shuffle(rng);
    let mut two_pts: Vec<usize> = (p3..p3 + 2 * m2p).collect();
    two_pts.shuffle(rng);
    for (&p, &q) in d_pts.iter().zip(&three_pts) {
        matching[p] = q;
    }
    for (&p, &q) in u_pts.iter().zip(&two_pts) {
        matching[p] = q;
    }
    let mut rest: Vec<usize> = three_pts[d_pts.len()..]
        .iter()
        .chain(&two_pts[u_pts.len()..])
        .copied()
        .collect();
    rest.shuffle(rng);
    for (p, q) in (2 * (k1 + k2)..total).zip(rest) {
        matching[p] = q;
    }
    Ok(KernelConfiguration {
        vertex_bins,
        edge_bins,
        matching,
    })
}

/// A kernel on vertex set `v` with `m3` 3-edges. Which members of `v` have
/// degree 2, and which of those are `k₁` vertices, is chosen uniformly; the
/// big vertices receive `d` in increasing label order.
pub fn sample_kernel<R: Rng + ?Sized>(
    v: &[u32],
    m3: usize,
    k1: usize,
    k2: usize,
    d: &[u64],
    rng: &mut R,
) -> Result<Kernel> {
    Ok(sample_kernel_with_configuration(v, m3, k1, k2, d, rng)?.0)
}

fn sample_kernel_with_configuration<R: Rng + ?Sized>(
    v: &[u32],
    m3: usize,
    k1: usize,
    k2: usize,
    d: &[u64],
    rng: &mut R,
) -> Result<(Kernel, KernelConfiguration)> {
    if v.len() != k1 + k2 + d.len() {
        return Err(Error::domain(format!(
            "kernel needs k1 + k2 + n3 = {} vertices, got {}",
            k1 + k2 + d.len(),
            v.len()
        )));
    }
    let cfg = sample_kernel_configuration(k1, k2, d, m3, rng)?;
    let mut sorted = v.to_vec();
    sorted.sort_unstable();
    let deg2_pick = subset(v.len(), k1 + k2, rng);
    let mut is_deg2 = vec![false; v.len()];
    for &i in &deg2_pick {
        is_deg2[i as usize] = true;
    }
    // Bin b < k₁+k₂ is the vertex deg2_pick[b]; deg2_pick is in random order,
    // so the first k₁ of them form a uniform k₁-subset.
    let label: Vec<u32> = deg2_pick
        .iter()
        .map(|&i| sorted[i as usize])
        .chain((0..v.len()).filter(|&i| !is_deg2[i]).map(|i| sorted[i]))
        .collect();
    let rows = cfg.rows();
    let edges3 = rows[..m3]
        .iter()
        .map(|r| [label[r[0]], label[r[1]], label[r[2]]])
        .collect();
    let edges2 = rows[m3..].iter().map(|r| [label[r[0]], label[r[1]]]).collect();
    let kernel = Kernel {
        vertices: sorted,
        edges2,
        edges3,
    };
    Ok((kernel, cfg))
}

/// A sampled pre-kernel and the number of loops among the kernel 2-edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrekernelSample {
    pub graph: Multigraph,
    pub kernel_loops: usize,
    /// `[m₂'(0), m₂'(1), m₂'(2)]` of the kernel-configuration.
    pub m2p_counts: [usize; 3],
}

/// Integer pre-kernel parameters `(ν₁, k₀, k₁, k₂)`.
pub type PreKernelPoint = [u64; 4];

fn params(n: usize, m: usize, x: PreKernelPoint) -> PreKernelParams {
    PreKernelParams::new(n as f64, m as f64, x.map(|v| v as f64))
}

/// A pre-kernel from the configuration model: kernel, `k₀` uniform 2-edge
/// splits, then uniform assignment of edge labels, degree-1 vertices and
/// within-edge point orders to the 2-edges.
pub fn sample_prekernel<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    x: PreKernelPoint,
    d: &[u64],
    rng: &mut R,
) -> Result<PrekernelSample> {
    let p = params(n, m, x);
    p.check_s_m()?;
    let [nu1, k0, k1, k2] = x.map(|v| v as usize);
    let n3 = p.n3().round() as usize;
    let m3 = p.m3().round() as usize;
    let m2p = p.m2p().round() as usize;
    if d.len() != n3 {
        return Err(Error::domain(format!("degree sequence has {} entries, expected n3 = {n3}", d.len())));
    }
    if d.iter().sum::<u64>() != p.q3().round() as u64 {
        return Err(Error::domain("degree sum must equal Q3"));
    }
    if m2p == 0 && k0 > 0 {
        return Err(Error::domain("splits requested but the kernel has no 2-edge"));
    }
    // Step 1: V, M₃ and the kernel.
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(rng);
    let v = &perm[..k1 + k2 + n3];
    let v_k0 = &perm[k1 + k2 + n3..k1 + k2 + n3 + k0];
    let v1 = &perm[k1 + k2 + n3 + k0..];
    let (kernel, cfg) = sample_kernel_with_configuration(v, m3, k1, k2, d, rng)?;
    debug_assert_eq!(kernel.edges2.len(), m2p);
    // Step 2: splits.
    let mut two_edges: Vec<[u32; 2]> = kernel.edges2.clone();
    for &w in v_k0 {
        let i = rng.random_range(0..two_edges.len());
        let [a, b] = two_edges[i];
        two_edges[i] = [a, w];
        two_edges.push([w, b]);
    }
    // Step 3: labels, degree-1 vertices and point orders.
    let mut phi = vec![[0u32; 3]; m];
    let mut labels: Vec<usize> = (0..m).collect();
    labels.shuffle(rng);
    for (e, r) in labels[..m3].iter().zip(&kernel.edges3) {
        phi[*e] = *r;
    }
    let mut ones = v1.to_vec();
    ones.shuffle(rng);
    debug_assert_eq!(two_edges.len(), nu1);
    for ((e, [a, b]), u) in labels[m3..].iter().zip(&two_edges).zip(ones) {
        let mut row = [*a, *b, u];
        row.shuffle(rng);
        phi[*e] = row;
    }
    Ok(PrekernelSample {
        graph: Multigraph { n, phi },
        kernel_loops: kernel.loops(),
        m2p_counts: cfg.m2p_counts(),
    })
}

/// The Σ-event for the big-vertex degrees at `x`.
pub fn degree_event(p: &PreKernelParams) -> Result<SigmaEvent> {
    Ok(SigmaEvent {
        n_vars: p.n3().round() as u64,
        target_sum: p.q3().round() as u64,
        dist: TruncatedPoisson::new(3, p.lambda()?)?,
    })
}

/// Which lattice points [`estimate_gpre`] sums over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GpreWindow {
    /// All of `S_m ∩ ℤ⁴`.
    Full,
    /// Points within `half_width · n` of `x*` in each coordinate.
    Box { half_width: f64 },
}

impl GpreWindow {
    /// `Full` for `n ≤ 12`, otherwise a box of relative half-width
    /// `δ₁ = (r/n)^0.4`.
    pub fn default_for(n: usize, m: usize) -> Self {
        if n <= 12 {
            GpreWindow::Full
        } else {
            let r = (m as f64 - n as f64 / 2.0) / n as f64;
            GpreWindow::Box {
                half_width: (r / n as f64).powf(0.4),
            }
        }
    }
}

/// Integer points of `S_m` with nonzero weight in the chosen window.
pub fn lattice_points(n: usize, m: usize, window: GpreWindow) -> Result<Vec<PreKernelPoint>> {
    let (lo, hi): ([i64; 4], [i64; 4]) = match window {
        GpreWindow::Full => ([0; 4], [n as i64; 4]),
        GpreWindow::Box { half_width } => {
            let c = optimum(n as f64, m as f64)?.x_star.x();
            let w = (half_width * n as f64).max(1.0);
            (
                c.map(|v| (v - w).floor().max(0.0) as i64),
                c.map(|v| (v + w).ceil() as i64),
            )
        }
    };
    let mut out = Vec::new();
    for nu1 in lo[0]..=hi[0] {
        for k0 in lo[1]..=hi[1].min(nu1) {
            for k1 in lo[2]..=hi[2] {
                for k2 in lo[3]..=hi[3] {
                    let x = [nu1, k0, k1, k2].map(|v| v as u64);
                    let p = params(n, m, x);
                    if p.check_s_m().is_err() || p.n3() < 0.0 {
                        continue;
                    }
                    // m₂' = 0 admits no split, and no kernel 2-edge means no 2-edge at all.
                    if p.m2p() == 0.0 && k0 > 0 {
                        continue;
                    }
                    out.push(x);
                }
            }
        }
    }
    Ok(out)
}

/// Monte-Carlo contribution of one lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpreTerm {
    pub x: PreKernelPoint,
    /// `ln(n! · w_pre(x) · P(Σ(x)))`.
    pub ln_weight: f64,
    /// Fraction of samples that are simple and connected.
    pub mean: f64,
    pub stderr: f64,
}

/// Estimate of `gpre(n, m)` with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpreEstimate {
    pub n: usize,
    pub m: usize,
    pub trials_per_point: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub ln_estimate: f64,
    pub terms: Vec<GpreTerm>,
}

/// Runs `trials` pre-kernel samples at `x` and returns the fraction that
/// is simple and connected, with its standard error.
pub fn simple_connected_rate(
    n: usize,
    m: usize,
    x: PreKernelPoint,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let p = params(n, m, x);
    let sampler = ConditionedSampler::new(degree_event(&p)?)?;
    let mut hits = 0usize;
    for _ in 0..trials {
        let d = sampler.sample(rng);
        let s = sample_prekernel(n, m, x, &d, rng)?;
        hits += (s.graph.is_simple() && s.graph.is_connected()) as usize;
    }
    let t = trials as f64;
    let mean = hits as f64 / t;
    Ok((mean, (mean * (1.0 - mean) / t).sqrt()))
}

/// `gpre(n, m) ≈ Σₓ n! w_pre(x) P(Σ(x)) P(simple ∧ connected | Σ(x))`,
/// with one independent stream per lattice point.
pub fn estimate_gpre(n: usize, m: usize, trials: usize, seed: u64, window: GpreWindow) -> Result<GpreEstimate> {
    if trials == 0 {
        return Err(Error::domain("estimate_gpre: trials must be positive"));
    }
    let points = lattice_points(n, m, window)?;
    if points.is_empty() {
        return Err(Error::domain(format!("estimate_gpre: empty window for n = {n}, m = {m}")));
    }
    let ln_nfact = ln_factorial(n as u64);
    let terms: Vec<GpreTerm> = points
        .par_iter()
        .enumerate()
        .map(|(i, &x)| -> Result<GpreTerm> {
            let p = params(n, m, x);
            let w = w_pre(&p)?;
            let prob = sigma_prob_exact(&degree_event(&p)?)?;
            let ln_weight = ln_nfact + w.ln_value + prob.ln();
            let mut rng = stream(seed, i as u64);
            let (mean, stderr) = if prob > 0.0 {
                simple_connected_rate(n, m, x, trials, &mut rng)?
            } else {
                (0.0, 0.0)
            };
            Ok(GpreTerm {
                x,
                ln_weight,
                mean,
                stderr,
            })
        })
        .collect::<Result<_>>()?;
    let estimate: f64 = terms
        .iter()
        .filter(|t| t.mean > 0.0)
        .map(|t| t.ln_weight.exp() * t.mean)
        .sum();
    let var: f64 = terms
        .iter()
        .filter(|t| t.stderr > 0.0)
        .map(|t| (t.ln_weight.exp() * t.stderr).powi(2))
        .sum();
    Ok(GpreEstimate {
        n,
        m,
        trials_per_point: trials,
        estimate,
        stderr: var.sqrt(),
        ln_estimate: estimate.ln(),
        terms,
    })
}

/// Integer point of `S_m` nearest to `x*` with `n₃ ≥ 1` and `Q₃ > 3n₃`.
pub fn nearest_lattice_point(n: usize, m: usize) -> Result<PreKernelPoint> {
    let c = optimum(n as f64, m as f64)?.x_star.x();
    let base = c.map(|v| v.round() as i64);
    let mut best: Option<(f64, PreKernelPoint)> = None;
    for delta in 0..81i64 {
        let off = [delta % 3 - 1, (delta / 3) % 3 - 1, (delta / 9) % 3 - 1, delta / 27 - 1];
        let cand: [i64; 4] = [0, 1, 2, 3].map(|i| base[i] + off[i]);
        if cand.iter().any(|&v| v < 0) {
            continue;
        }
        let x = cand.map(|v| v as u64);
        let p = params(n, m, x);
        if p.check_s_m().is_err() || p.n3() < 1.0 || p.is_boundary() || (p.m2p() == 0.0 && x[1] > 0) {
            continue;
        }
        let dist: f64 = (0..4).map(|i| (x[i] as f64 - c[i]).powi(2)).sum();
        if best.is_none_or(|(bd, _)| dist < bd) {
            best = Some((dist, x));
        }
    }
    best.map(|(_, x)| x)
        .ok_or_else(|| Error::domain(format!("no feasible lattice point near x* for n = {n}, m = {m}")))
}

/// Empirical simplicity and connectivity at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendPoint {
    pub n: usize,
    pub m: usize,
    pub x: PreKernelPoint,
    pub trials: usize,
    pub p_simple: f64,
    pub p_connected: f64,
    /// Mean of `m₂'(1)/m₂'`.
    pub m2p_one_fraction: f64,
}

/// Samples pre-kernels at the lattice point nearest to `x*`.
pub fn prekernel_trend_point(n: usize, m: usize, trials: usize, seed: u64) -> Result<TrendPoint> {
    let x = nearest_lattice_point(n, m)?;
    let p = params(n, m, x);
    let sampler = ConditionedSampler::new(degree_event(&p)?)?;
    let mut rng = stream(seed, n as u64);
    let (mut simple, mut connected, mut frac) = (0usize, 0usize, 0.0);
    for _ in 0..trials {
        let d = sampler.sample(&mut rng);
        let s = sample_prekernel(n, m, x, &d, &mut rng)?;
        simple += s.graph.is_simple() as usize;
        connected += s.graph.is_connected() as usize;
        let total: usize = s.m2p_counts.iter().sum();
        if total > 0 {
            frac += s.m2p_counts[1] as f64 / total as f64;
        }
    }
    let t = trials as f64;
    Ok(TrendPoint {
        n,
        m,
        x,
        trials,
        p_simple: simple as f64 / t,
        p_connected: connected as f64 / t,
        m2p_one_fraction: frac / t,
    })
}

/// The left/right bin model: left-bins of sizes `ts`, right-bins of sizes
/// `ts_prime`, `l` left-connectors, `l_prime` right-connectors and
/// `K = Σts - 2L = Σts' - 2L'` across-connectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinModel {
    pub ts: Vec<u32>,
    pub ts_prime: Vec<u32>,
    pub l: u32,
    pub l_prime: u32,
}

impl BinModel {
    pub fn new(ts: Vec<u32>, ts_prime: Vec<u32>, l: u32, l_prime: u32) -> Result<Self> {
        let b = Self { ts, ts_prime, l, l_prime };
        b.across()?;
        Ok(b)
    }

    /// Bins of size 3 on both sides with `K` across-connectors.
    pub fn all_threes(k: u32) -> Result<Self> {
        let mut bins = k.div_ceil(3).max(1);
        while (3 * bins - k) % 2 != 0 {
            bins += 1;
        }
        let l = (3 * bins - k) / 2;
        Self::new(vec![3; bins as usize], vec![3; bins as usize], l, l)
    }

    /// Bins of size 3 on both sides in the proportions of the kernel at the
    /// optimum as `r -> 0`: about `2K/3` bins per side and `L = L' ~ K/2`.
    pub fn at_optimum_proportions(k: u32) -> Result<Self> {
        let mut bins = ((2.0 * k as f64 / 3.0).round() as u32).max(1);
        while 3 * bins < k || (3 * bins - k) % 2 != 0 {
            bins += 1;
        }
        let l = (3 * bins - k) / 2;
        Self::new(vec![3; bins as usize], vec![3; bins as usize], l, l)
    }

    /// `K`, or a domain error if the sides disagree.
    pub fn across(&self) -> Result<u32> {
        let (s, sp): (u32, u32) = (self.ts.iter().sum(), self.ts_prime.iter().sum());
        if self.ts.iter().chain(&self.ts_prime).any(|&t| t == 0) {
            return Err(Error::domain("bin sizes must be positive"));
        }
        if 2 * self.l > s || 2 * self.l_prime > sp {
            return Err(Error::domain("more connector points than bin points"));
        }
        let (k, kp) = (s - 2 * self.l, sp - 2 * self.l_prime);
        if k != kp {
            return Err(Error::domain(format!(
                "parity/feasibility: sum(ts) - 2L = {k} but sum(ts') - 2L' = {kp}"
            )));
        }
        Ok(k)
    }
}

/// One draw of the bin model; `true` if contracting bins gives a connected
/// graph.
pub fn sample_bin_model<R: Rng + ?Sized>(b: &BinModel, rng: &mut R) -> Result<bool> {
    let k = b.across()? as usize;
    let nl = b.ts.len();
    let mut parent: Vec<usize> = (0..nl + b.ts_prime.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let union = |p: &mut Vec<usize>, a: usize, c: usize| {
        let (ra, rc) = (find(p, a), find(p, c));
        p[ra] = rc;
    };
    let points = |sizes: &[u32], offset: usize, rng: &mut R| {
        let mut v: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| std::iter::repeat_n(i + offset, s as usize))
            .collect();
        v.shuffle(rng);
        v
    };
    let left = points(&b.ts, 0, rng);
    let right = points(&b.ts_prime, nl, rng);
    let (l, lp) = (b.l as usize, b.l_prime as usize);
    for c in left[..2 * l].chunks(2) {
        union(&mut parent, c[0], c[1]);
    }
    for c in right[..2 * lp].chunks(2) {
        union(&mut parent, c[0], c[1]);
    }
    for (&a, &c) in left[2 * l..].iter().zip(&right[2 * lp..]).take(k) {
        union(&mut parent, a, c);
    }
    let root = find(&mut parent, 0);
    Ok((0..parent.len()).all(|x| find(&mut parent, x) == root))
}

/// Fraction of connected draws over `trials`.
pub fn bin_model_connectivity(b: &BinModel, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = stream(seed, 0);
    let mut hits = 0usize;
    for _ in 0..trials {
        hits += sample_bin_model(b, &mut rng)? as usize;
    }
    Ok(hits as f64 / trials as f64)
}
