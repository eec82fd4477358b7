//! Exact big-integer counts: rooted forests, total and connected hypergraph
//! counts, brute-force core and pre-kernel censuses, kernel configurations,
//! the decomposition identity and the weights `w_core`, `w_pre`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use crate::asymptotics::{CoreParams, PreKernelParams};
use crate::hypergraph_model::PreKernelClass;
use crate::special_fn::fk;
use crate::{Error, Result};

/// Largest `N` accepted by [`count_connected_exact`].
pub const MAX_CONNECTED_N: u64 = 60;
/// Largest `M` accepted by [`count_connected_exact`].
pub const MAX_CONNECTED_M: u64 = 80;
/// Largest `n` for the brute-force censuses.
pub const MAX_CENSUS_N: usize = 8;

/// `binom(a, b)`, zero when `b < 0` or `b > a`.
pub fn binom(a: u64, b: i64) -> BigUint {
    if b < 0 || b as u64 > a {
        return BigUint::zero();
    }
    let b = (b as u64).min(a - b as u64);
    let mut acc = BigUint::one();
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// `n!`.
pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Rising factorial `a (a+1) ⋯ (a+k-1)`.
pub fn rising(a: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (a + i))
}

/// Natural logarithm of a big integer (`-∞` for zero).
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 60;
    let top: BigUint = x >> shift;
    top.to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Rooted forests on `[N]` of `k`-edges whose roots are `[n]`:
/// `n (N-n)! N^{m'-1} / (m'! (k-1)!^{m'})` with `m' = (N-n)/(k-1)`.
/// Zero when `k-1` does not divide `N-n`; one when `N = n`.
pub fn count_forests(big_n: u64, n: u64, k: u64) -> Result<BigUint> {
    if k < 2 {
        return Err(Error::domain(format!("count_forests: k = {k} < 2")));
    }
    if n > big_n {
        return Err(Error::domain(format!("count_forests: n = {n} > N = {big_n}")));
    }
    if big_n == n {
        return Ok(BigUint::one());
    }
    if n == 0 || (big_n - n) % (k - 1) != 0 {
        return Ok(BigUint::zero());
    }
    let mp = (big_n - n) / (k - 1);
    let num = BigUint::from(n) * factorial(big_n - n) * BigUint::from(big_n).pow((mp - 1) as u32);
    let den = factorial(mp) * factorial(k - 1).pow(mp as u32);
    Ok(num / den)
}

fn k_subsets(n: usize, k: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|s| s.count_ones() as usize == k).collect()
}

/// Brute-force rooted forest count for `N ≤ 7`.
pub fn count_forests_bruteforce(big_n: usize, n: usize, k: usize) -> Result<BigUint> {
    if big_n > 7 {
        return Err(Error::resource(format!("forest brute force needs N ≤ 7, got {big_n}")));
    }
    if k < 2 || n > big_n {
        return Err(Error::domain("count_forests_bruteforce: need k ≥ 2 and n ≤ N"));
    }
    let edges = k_subsets(big_n, k);
    let max_edges = (big_n.saturating_sub(1)) / (k - 1);
    let roots: u32 = (1 << n) - 1;
    let mut count = 0u64;
    let mut chosen = Vec::new();
    fn rec(
        edges: &[u32],
        start: usize,
        left: usize,
        chosen: &mut Vec<u32>,
        big_n: usize,
        roots: u32,
        count: &mut u64,
    ) {
        if is_rooted_forest(big_n, chosen, roots) {
            *count += 1;
        }
        if left == 0 {
            return;
        }
        for i in start..edges.len() {
            chosen.push(edges[i]);
            rec(edges, i + 1, left - 1, chosen, big_n, roots, count);
            chosen.pop();
        }
    }
    rec(&edges, 0, max_edges, &mut chosen, big_n, roots, &mut count);
    Ok(BigUint::from(count))
}

/// Acyclic (each edge joins distinct components) with one root per component.
fn is_rooted_forest(n: usize, edges: &[u32], roots: u32) -> bool {
    let mut comp: Vec<u32> = (0..n).map(|v| 1 << v).collect();
    for &e in edges {
        let mut merged = 0u32;
        let mut v = e;
        while v != 0 {
            let i = v.trailing_zeros() as usize;
            v &= v - 1;
            if merged & comp[i] != 0 {
                return false;
            }
            merged |= comp[i];
        }
        let mut w = merged;
        while w != 0 {
            let i = w.trailing_zeros() as usize;
            w &= w - 1;
            comp[i] = merged;
        }
    }
    comp.iter().all(|c| (c & roots).count_ones() == 1)
}

/// `binom(binom(N,3), M)`.
pub fn count_total(big_n: u64, m: u64) -> BigUint {
    let triples = binom(big_n, 3).to_u64().expect("small");
    binom(triples, m as i64)
}

/// Memoized table of connected counts `C(n, m)` for `n ≤ N`, `m ≤ M`.
#[derive(Debug, Clone)]
pub struct ConnectedTable {
    table: Vec<Vec<BigUint>>,
}

impl ConnectedTable {
    /// Builds the table by the labelled exponential-formula deconvolution,
    /// anchored on the component containing vertex 1.
    pub fn new(big_n: u64, big_m: u64) -> Result<Self> {
        if big_n > MAX_CONNECTED_N || big_m > MAX_CONNECTED_M {
            return Err(Error::resource(format!(
                "connected counts limited to N ≤ {MAX_CONNECTED_N}, M ≤ {MAX_CONNECTED_M}"
            )));
        }
        let (nn, mm) = (big_n as usize, big_m as usize);
        let total: Vec<Vec<BigUint>> = (0..=nn)
            .map(|n| (0..=mm).map(|m| count_total(n as u64, m as u64)).collect())
            .collect();
        let binoms: Vec<Vec<BigUint>> = (0..=nn)
            .map(|a| (0..=nn).map(|b| binom(a as u64, b as i64)).collect())
            .collect();
        let mut c: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); mm + 1]; nn + 1];
        for n in 1..=nn {
            for m in 0..=mm {
                let mut sub = BigUint::zero();
                for n1 in 1..n {
                    let b = &binoms[n - 1][n1 - 1];
                    for m1 in 0..=m {
                        if c[n1][m1].is_zero() || total[n - n1][m - m1].is_zero() {
                            continue;
                        }
                        sub += b * &c[n1][m1] * &total[n - n1][m - m1];
                    }
                }
                c[n][m] = &total[n][m] - sub;
            }
        }
        Ok(Self { table: c })
    }

    /// `C(n, m)`; zero outside the table.
    pub fn get(&self, n: u64, m: u64) -> BigUint {
        self.table
            .get(n as usize)
            .and_then(|row| row.get(m as usize))
            .cloned()
            .unwrap_or_default()
    }
}

/// Number of connected labelled 3-uniform hypergraphs with `N` vertices and
/// `M` edges. For `N ≤ 5` the value is cross-checked against enumeration.
pub fn count_connected_exact(big_n: u64, m: u64) -> Result<BigUint> {
    let v = ConnectedTable::new(big_n, m)?.get(big_n, m);
    if big_n <= 5 {
        let brute = count_connected_bruteforce(big_n as usize, m as usize)?;
        if brute != v {
            return Err(Error::domain(format!(
                "connected count mismatch at ({big_n},{m}): {v} vs {brute}"
            )));
        }
    }
    Ok(v)
}

/// Direct enumeration of connected hypergraphs, for `N ≤ 6`.
pub fn count_connected_bruteforce(big_n: usize, m: usize) -> Result<BigUint> {
    if big_n > 6 {
        return Err(Error::resource("connected brute force needs N ≤ 6"));
    }
    let edges = k_subsets(big_n, 3);
    let full: u32 = if big_n == 0 { 0 } else { (1 << big_n) - 1 };
    let mut count = 0u64;
    for_each_combination(edges.len(), m, &mut |idx| {
        let chosen: Vec<u32> = idx.iter().map(|&i| edges[i]).collect();
        if mask_connected(&chosen, full, big_n) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn mask_connected(edges: &[u32], full: u32, n: usize) -> bool {
    if n <= 1 {
        return true;
    }
    let Some(&first) = edges.first() else {
        return false;
    };
    let mut comp = first;
    loop {
        let next = edges.iter().filter(|&&e| e & comp != 0).fold(comp, |a, &e| a | e);
        if next == comp {
            break;
        }
        comp = next;
    }
    comp == full
}

/// Result of a brute-force pre-kernel census.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrekernelCensus {
    pub n: usize,
    pub m: usize,
    #[serde(serialize_with = "crate::serde_big::dec")]
    pub total: BigUint,
    #[serde(serialize_with = "crate::serde_big::rows")]
    pub rows: BTreeMap<PreKernelClass, BigUint>,
}

impl PrekernelCensus {
    /// CSV with header `n,m,nu1,k0,k1,k2,count`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,m,nu1,k0,k1,k2,count\n");
        for (c, v) in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{},{},{}", self.n, self.m, c.nu1, c.k0, c.k1, c.k2, v);
        }
        s
    }
}

/// Degree counts and structural flags of an edge set on `[n]`, `n ≤ 8`.
struct SmallGraph {
    deg: [u8; 8],
}

impl SmallGraph {
    fn new(edges: &[u32]) -> Self {
        let mut deg = [0u8; 8];
        for &e in edges {
            let mut v = e;
            while v != 0 {
                deg[v.trailing_zeros() as usize] += 1;
                v &= v - 1;
            }
        }
        Self { deg }
    }

    fn heavy(&self, e: u32) -> u32 {
        let mut c = 0;
        let mut v = e;
        while v != 0 {
            c += (self.deg[v.trailing_zeros() as usize] >= 2) as u32;
            v &= v - 1;
        }
        c
    }

    fn is_core(&self, edges: &[u32], n: usize) -> bool {
        self.deg[..n].iter().all(|&d| d > 0) && edges.iter().all(|&e| self.heavy(e) >= 2)
    }

    fn light_mask(&self, n: usize) -> u32 {
        (0..n).filter(|&v| self.deg[v] == 1).fold(0, |a, v| a | 1 << v)
    }
}

fn prekernel_class_small(g: &SmallGraph, edges: &[u32], n: usize) -> PreKernelClass {
    let light = g.light_mask(n);
    let mut twos = [0u8; 8];
    for &e in edges {
        if e & light != 0 {
            let mut v = e;
            while v != 0 {
                twos[v.trailing_zeros() as usize] += 1;
                v &= v - 1;
            }
        }
    }
    let mut c = PreKernelClass { nu1: 0, k0: 0, k1: 0, k2: 0 };
    for v in 0..n {
        match (g.deg[v], twos[v]) {
            (1, _) => c.nu1 += 1,
            (2, 2) => c.k0 += 1,
            (2, 1) => c.k1 += 1,
            (2, 0) => c.k2 += 1,
            _ => {}
        }
    }
    c
}

/// Runs `visit` on every `m`-subset of the triples of `[n]` covering all
/// vertices, in parallel over the first edge.
fn enumerate_covering<T: Send + Default>(
    n: usize,
    m: usize,
    visit: impl Fn(&[u32], &mut T) + Sync,
    merge: impl Fn(T, T) -> T + Sync + Send,
) -> T {
    let edges = k_subsets(n, 3);
    let full: u32 = if n == 0 { 0 } else { (1 << n) - 1 };
    if m == 0 {
        let mut acc = T::default();
        if n == 0 {
            visit(&[], &mut acc);
        }
        return acc;
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<T>(
        edges: &[u32],
        start: usize,
        left: usize,
        covered: u32,
        full: u32,
        chosen: &mut Vec<u32>,
        acc: &mut T,
        visit: &(impl Fn(&[u32], &mut T) + Sync),
    ) {
        if left == 0 {
            if covered == full {
                visit(chosen, acc);
            }
            return;
        }
        if ((full & !covered).count_ones() as usize) > 3 * left {
            return;
        }
        for i in start..edges.len() {
            if edges.len() - i < left {
                break;
            }
            chosen.push(edges[i]);
            rec(edges, i + 1, left - 1, covered | edges[i], full, chosen, acc, visit);
            chosen.pop();
        }
    }
    (0..edges.len())
        .into_par_iter()
        .map(|first| {
            let mut acc = T::default();
            let mut chosen = vec![edges[first]];
            rec(&edges, first + 1, m - 1, edges[first], full, &mut chosen, &mut acc, &visit);
            acc
        })
        .reduce(T::default, &merge)
}

fn merge_maps<K: std::hash::Hash + Eq>(mut a: HashMap<K, u64>, b: HashMap<K, u64>) -> HashMap<K, u64> {
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

/// Exhaustive census of connected pre-kernels on `[n]` with `m` edges,
/// classified by `(ν₁, k₀, k₁, k₂)`.
pub fn census_prekernels_bruteforce(n: usize, m: usize) -> Result<PrekernelCensus> {
    if n > MAX_CENSUS_N {
        return Err(Error::resource(format!("census needs n ≤ {MAX_CENSUS_N}, got {n}")));
    }
    let full: u32 = if n == 0 { 0 } else { (1 << n) - 1 };
    let counts: HashMap<PreKernelClass, u64> = enumerate_covering(
        n,
        m,
        |edges, acc: &mut HashMap<PreKernelClass, u64>| {
            let g = SmallGraph::new(edges);
            // A connected core is an isolated cycle exactly when 2m = n.
            if g.is_core(edges, n) && 2 * m != n && mask_connected(edges, full, n) {
                *acc.entry(prekernel_class_small(&g, edges, n)).or_default() += 1;
            }
        },
        merge_maps,
    );
    let rows: BTreeMap<PreKernelClass, BigUint> =
        counts.into_iter().map(|(k, v)| (k, BigUint::from(v))).collect();
    let total = rows.values().sum();
    Ok(PrekernelCensus { n, m, total, rows })
}

/// Key of a core census row: `ν₁` and the degrees of the other vertices in
/// ascending vertex order.
pub type CoreKey = (u32, Vec<u32>);

/// Exhaustive census of cores (not necessarily connected) on `[n]` with `m`
/// edges, keyed by `(ν₁, d)`.
pub fn census_cores_bruteforce(n: usize, m: usize) -> Result<BTreeMap<CoreKey, BigUint>> {
    if n > MAX_CENSUS_N {
        return Err(Error::resource(format!("census needs n ≤ {MAX_CENSUS_N}, got {n}")));
    }
    let counts: HashMap<CoreKey, u64> = enumerate_covering(
        n,
        m,
        |edges, acc: &mut HashMap<CoreKey, u64>| {
            let g = SmallGraph::new(edges);
            if g.is_core(edges, n) {
                let nu1 = g.deg[..n].iter().filter(|&&d| d == 1).count() as u32;
                let d = g.deg[..n].iter().filter(|&&d| d >= 2).map(|&d| d as u32).collect();
                *acc.entry((nu1, d)).or_default() += 1;
            }
        },
        merge_maps,
    );
    Ok(counts.into_iter().map(|(k, v)| (k, BigUint::from(v))).collect())
}

/// Both sides of the magic-core identity for one `(n, m, ν₁, d)`:
/// `lhs = gcore(n,m,ν₁,d)·m!·6^m·Πdᵢ!` from the census and `rhs` the number
/// of simple configurations found by exhaustive enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagicCoreCheck {
    #[serde(serialize_with = "crate::serde_big::dec")]
    pub lhs: BigUint,
    #[serde(serialize_with = "crate::serde_big::dec")]
    pub rhs: BigUint,
    #[serde(serialize_with = "crate::serde_big::dec")]
    pub total_configurations: BigUint,
}

/// Exhaustively enumerates the core configuration model for one `(ν₁, d)`.
pub fn check_magic_core(n: usize, m: usize, nu1: usize, d: &[u32]) -> Result<MagicCoreCheck> {
    let q2: u32 = d.iter().sum();
    if nu1 > m || nu1 > n || d.len() != n - nu1 || q2 as usize + nu1 != 3 * m || d.iter().any(|&x| x < 2) {
        return Err(Error::domain("check_magic_core: infeasible (n, m, nu1, d)"));
    }
    let total = binom(n as u64, nu1 as i64)
        * binom(m as u64, nu1 as i64)
        * BigUint::from(3u32).pow(nu1 as u32)
        * factorial(nu1 as u64)
        * factorial(q2 as u64);
    if total > BigUint::from(50_000_000_000u64) {
        return Err(Error::resource("check_magic_core: configuration space too large"));
    }
    // With V₁ = {0..ν₁} (by symmetry every choice of V₁ contributes equally),
    // the other vertices get degrees d in ascending order.
    let mut points: Vec<u32> = Vec::new();
    for (i, &di) in d.iter().enumerate() {
        points.extend(std::iter::repeat((nu1 + i) as u32).take(di as usize));
    }
    let mut simple = 0u64;
    for_each_combination(m, nu1, &mut |bins| {
        let choices = 3usize.pow(nu1 as u32);
        for code in 0..choices {
            // phi with u32::MAX marking free points.
            let mut phi = vec![[u32::MAX; 3]; m];
            let mut c = code;
            let pos: Vec<usize> = (0..nu1).map(|_| { let p = c % 3; c /= 3; p }).collect();
            let mut perm: Vec<u32> = (0..nu1 as u32).collect();
            permutations(&mut perm, 0, &mut |p| {
                for (j, &b) in bins.iter().enumerate() {
                    phi[b][pos[j]] = p[j];
                }
                simple += count_simple_completions(&mut phi, &mut points.clone());
                for &b in bins.iter() {
                    phi[b] = [u32::MAX; 3];
                }
            });
        }
    });
    let simple = BigUint::from(simple) * binom(n as u64, nu1 as i64);
    let census = census_cores_bruteforce(n, m)?;
    let g = census.get(&(nu1 as u32, d.to_vec())).cloned().unwrap_or_default();
    let alpha = factorial(m as u64)
        * BigUint::from(6u32).pow(m as u32)
        * d.iter().map(|&x| factorial(x as u64)).product::<BigUint>();
    Ok(MagicCoreCheck {
        lhs: g * alpha,
        rhs: simple,
        total_configurations: total,
    })
}

fn permutations(p: &mut Vec<u32>, k: usize, f: &mut impl FnMut(&[u32])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Counts the ways of filling the free slots of `phi` with a permutation of
/// `points` that yield a simple multigraph. Identical point values are
/// distinct points, so each placement counts with multiplicity.
fn count_simple_completions(phi: &mut [[u32; 3]], points: &mut Vec<u32>) -> u64 {
    let slot = phi
        .iter()
        .enumerate()
        .find_map(|(e, row)| row.iter().position(|&v| v == u32::MAX).map(|i| (e, i)));
    let Some((e, i)) = slot else {
        let mut seen: Vec<[u32; 3]> = phi.iter().map(|r| { let mut r = *r; r.sort_unstable(); r }).collect();
        seen.sort_unstable();
        return seen.windows(2).all(|w| w[0] != w[1]) as u64;
    };
    let mut total = 0;
    let mut tried: Vec<u32> = Vec::new();
    for j in 0..points.len() {
        let v = points[j];
        if phi[e].contains(&v) {
            continue;
        }
        let mult = points.iter().filter(|&&p| p == v).count() as u64;
        if tried.contains(&v) {
            continue;
        }
        tried.push(v);
        phi[e][i] = v;
        points.swap_remove(j);
        total += mult * count_simple_completions(phi, points);
        points.push(v);
        let last = points.len() - 1;
        points.swap(j, last);
        phi[e][i] = u32::MAX;
    }
    total
}

/// Outcome of [`check_decomposition`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    #[serde(serialize_with = "crate::serde_big::dec")]
    pub lhs: BigUint,
    #[serde(serialize_with = "crate::serde_big::dec")]
    pub rhs_with_binom: BigUint,
    #[serde(serialize_with = "crate::serde_big::dec")]
    pub rhs_without_binom: BigUint,
    pub with_binom_holds: bool,
    pub without_binom_holds: bool,
}

/// Compares `C(N, M)` with the core/forest decomposition sum, with and
/// without the `binom(N, n)` factor.
pub fn check_decomposition(big_n: usize, big_m: usize) -> Result<DecompositionReport> {
    if big_n > MAX_CENSUS_N {
        return Err(Error::resource(format!("decomposition check needs N ≤ {MAX_CENSUS_N}")));
    }
    let lhs = ConnectedTable::new(big_n as u64, big_m as u64)?.get(big_n as u64, big_m as u64);
    let mut with = BigUint::zero();
    let mut without = BigUint::zero();
    for n in (0..=big_n).filter(|n| (big_n - n) % 2 == 0) {
        let forest_edges = (big_n - n) / 2;
        let Some(m) = big_m.checked_sub(forest_edges) else {
            continue;
        };
        let cacti = count_forests(big_n as u64, n as u64, 3)?;
        if cacti.is_zero() {
            continue;
        }
        let gpre = census_prekernels_bruteforce(n, m)?.total;
        let term = cacti * gpre;
        with += binom(big_n as u64, n as i64) * &term;
        without += term;
    }
    Ok(DecompositionReport {
        with_binom_holds: with == lhs,
        without_binom_holds: without == lhs,
        lhs,
        rhs_with_binom: with,
        rhs_without_binom: without,
    })
}

/// Kernel-configuration count and per-kernel multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelConfigCount {
    #[serde(serialize_with = "crate::serde_big::dec")]
    pub configurations: BigUint,
    #[serde(serialize_with = "crate::serde_big::dec")]
    pub multiplicity: BigUint,
}

/// `(k₁+k₂+n₃)! P₃! P₂! Q₃! 2^{k₁} / (n₃! k₁! k₂! T₃! T₂!)` and the
/// multiplicity `2^{k₁+k₂} Πdᵢ!`.
pub fn count_kernel_configurations(
    k1: u64,
    k2: u64,
    n3: u64,
    d: &[u64],
    m3: u64,
    m2p: u64,
) -> Result<KernelConfigCount> {
    if d.len() as u64 != n3 || d.iter().any(|&x| x < 3) {
        return Err(Error::domain("kernel configurations: d must list n3 degrees ≥ 3"));
    }
    let (p3, p2, q3) = (3 * m3, 2 * m2p, d.iter().sum::<u64>());
    let (Some(t3), Some(t2)) = (p3.checked_sub(k1 + 2 * k2), p2.checked_sub(k1)) else {
        return Err(Error::domain("kernel configurations: T3 or T2 negative"));
    };
    if t3 + t2 != q3 {
        return Err(Error::domain(format!(
            "kernel configurations: point counts disagree (T3+T2 = {}, Q3 = {q3})",
            t3 + t2
        )));
    }
    let num = factorial(k1 + k2 + n3)
        * factorial(p3)
        * factorial(p2)
        * factorial(q3)
        * BigUint::from(2u32).pow(k1 as u32);
    let den = factorial(n3) * factorial(k1) * factorial(k2) * factorial(t3) * factorial(t2);
    let multiplicity = BigUint::from(2u32).pow((k1 + k2) as u32)
        * d.iter().map(|&x| factorial(x)).product::<BigUint>();
    Ok(KernelConfigCount {
        configurations: num / den,
        multiplicity,
    })
}

/// Counts kernel configurations by exhausting all point bijections and type
/// assignments. Small inputs only.
pub fn count_kernel_configurations_bruteforce(
    k1: usize,
    k2: usize,
    d: &[usize],
    m3: usize,
    m2p: usize,
) -> Result<BigUint> {
    let n3 = d.len();
    let nv = k1 + k2 + n3;
    let points = 3 * m3 + 2 * m2p;
    if points > 9 {
        return Err(Error::resource("kernel brute force limited to 9 points"));
    }
    // Edge point p is in a 3-edge iff p < 3·m3.
    let mut total = 0u64;
    // Type of each vertex: 0 = k1, 1 = k2, 2 = n3 (degrees from d in order).
    let mut types = Vec::new();
    fn assign(types: &mut Vec<u8>, nv: usize, left: [usize; 3], out: &mut Vec<Vec<u8>>) {
        if types.len() == nv {
            out.push(types.clone());
            return;
        }
        for t in 0..3 {
            if left[t] > 0 {
                let mut l = left;
                l[t] -= 1;
                types.push(t as u8);
                assign(types, nv, l, out);
                types.pop();
            }
        }
    }
    let mut all_types = Vec::new();
    assign(&mut types, nv, [k1, k2, n3], &mut all_types);
    for ty in all_types {
        let mut owner: Vec<usize> = Vec::new();
        let mut next_d = d.iter();
        for (v, &t) in ty.iter().enumerate() {
            let deg = if t == 2 { *next_d.next().expect("n3 degrees") } else { 2 };
            owner.extend(std::iter::repeat(v).take(deg));
        }
        if owner.len() != points {
            return Err(Error::domain("kernel brute force: point counts disagree"));
        }
        let mut perm: Vec<u32> = (0..points as u32).collect();
        permutations(&mut perm, 0, &mut |p| {
            // Vertex point i is matched to edge point p[i].
            let mut in_three = vec![0usize; nv];
            for (i, &e) in p.iter().enumerate() {
                if (e as usize) < 3 * m3 {
                    in_three[owner[i]] += 1;
                }
            }
            let ok = ty.iter().enumerate().all(|(v, &t)| match t {
                0 => in_three[v] == 1,
                1 => in_three[v] == 2,
                _ => true,
            });
            total += ok as u64;
        });
    }
    Ok(BigUint::from(total))
}

/// A weight in log form, with the exact factorial part when inputs are small.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightValue {
    pub ln_value: f64,
    pub lambda: f64,
    pub boundary: bool,
    /// Numerator and denominator of the factorial/power part, excluding the
    /// `f(λ)^a / λ^b` factor.
    #[serde(serialize_with = "crate::serde_big::dec_pair_opt")]
    pub exact_factorial_part: Option<(BigUint, BigUint)>,
}

fn lnf(x: f64) -> f64 {
    ln_factorial(x.round() as u64)
}

/// `w_core(n, m, ν₁) = n! Q₂! f₂(λ)^{n₂} / (n₂! ν₁! m₃! 2^{ν₁} 6^{m₃} λ^{Q₂})`,
/// with `f₂(λ)^{n₂}/λ^{Q₂}` replaced by `2^{-n₂}` at `ν₁ = 2n - 3m`.
pub fn w_core(n: u64, m: u64, nu1: u64) -> Result<WeightValue> {
    let p = CoreParams::new(n as f64, m as f64, nu1 as f64)?;
    let (ln2, ln6) = (std::f64::consts::LN_2, 6f64.ln());
    let lambda = p.lambda()?;
    let boundary = p.is_boundary();
    let mut ln_value = lnf(p.n) + lnf(p.q2()) - lnf(p.n2()) - lnf(p.nu1) - lnf(p.m3())
        - p.nu1 * ln2
        - p.m3() * ln6;
    ln_value += if boundary {
        -p.n2() * ln2
    } else {
        p.n2() * fk(2, lambda).ln() - p.q2() * lambda.ln()
    };
    let exact_factorial_part = (n <= 170 && m <= 170).then(|| {
        let (n2, q2, m3) = (n - nu1, 3 * m - nu1, m - nu1);
        let num = factorial(n) * factorial(q2);
        let mut den = factorial(n2)
            * factorial(nu1)
            * factorial(m3)
            * BigUint::from(2u32).pow(nu1 as u32)
            * BigUint::from(6u32).pow(m3 as u32);
        if boundary {
            den *= BigUint::from(2u32).pow(n2 as u32);
        }
        (num, den)
    });
    Ok(WeightValue {
        ln_value,
        lambda,
        boundary,
        exact_factorial_part,
    })
}

/// `w_pre(x)`: the factorial part
/// `P₃! P₂! Q₃! (m₂-1)! / (k₀! k₁! k₂! n₃! m₃! T₃! T₂! (m₂'-1)! m₂'! 2^{k₂} 2^{m₂'} 6^{m₃})`
/// times `f₃(λ)^{n₃}/λ^{Q₃}`, or times `6^{-n₃}` when `Q₃ = 3n₃`.
/// `(m₂-1)!/(m₂'-1)!` is the rising factorial `m₂'^{(k₀)}`.
pub fn w_pre(p: &PreKernelParams) -> Result<WeightValue> {
    p.check_s_m()?;
    let coords = [p.n, p.m, p.nu1, p.k0, p.k1, p.k2];
    if coords.iter().any(|c| c.fract() != 0.0) {
        return Err(Error::domain("w_pre: x must be integral"));
    }
    let lambda = p.lambda()?;
    let boundary = p.is_boundary();
    let (ln2, ln6) = (std::f64::consts::LN_2, 6f64.ln());
    let u = |x: f64| x.round() as u64;
    let rise = rising(u(p.m2p()), u(p.k0));
    let mut ln_value = lnf(p.p3()) + lnf(p.p2()) + lnf(p.q3()) + ln_big(&rise)
        - lnf(p.k0)
        - lnf(p.k1)
        - lnf(p.k2)
        - lnf(p.n3())
        - lnf(p.m3())
        - lnf(p.t3())
        - lnf(p.t2())
        - lnf(p.m2p())
        - p.k2 * ln2
        - p.m2p() * ln2
        - p.m3() * ln6;
    ln_value += if boundary {
        -p.n3() * ln6
    } else {
        p.n3() * fk(3, lambda).ln() - p.q3() * lambda.ln()
    };
    let exact_factorial_part = (p.n <= 170.0 && p.m <= 170.0).then(|| {
        let num = factorial(u(p.p3())) * factorial(u(p.p2())) * factorial(u(p.q3())) * rise.clone();
        let mut den = [p.k0, p.k1, p.k2, p.n3(), p.m3(), p.t3(), p.t2(), p.m2p()]
            .iter()
            .map(|&x| factorial(u(x)))
            .product::<BigUint>()
            * BigUint::from(2u32).pow(u(p.k2 + p.m2p()) as u32)
            * BigUint::from(6u32).pow(u(p.m3()) as u32);
        if boundary {
            den *= BigUint::from(6u32).pow(u(p.n3()) as u32);
        }
        (num, den)
    });
    Ok(WeightValue {
        ln_value,
        lambda,
        boundary,
        exact_factorial_part,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binom(4, 2), b(6));
        assert_eq!(binom(binom(4, 3).to_u64().unwrap(), 2), b(6));
        assert_eq!(binom(10, 3), b(120));
        assert_eq!(binom(3, 4), b(0));
        assert_eq!(binom(3, -1), b(0));
    }

    #[test]
    fn forest_examples() {
        assert_eq!(count_forests(5, 1, 3).unwrap(), b(15));
        assert_eq!(count_forests(4, 1, 2).unwrap(), b(16));
        assert_eq!(count_forests(4, 1, 3).unwrap(), b(0));
        assert_eq!(count_forests(3, 3, 3).unwrap(), b(1));
        assert!(count_forests(3, 1, 1).is_err());
        assert_eq!(count_forests_bruteforce(3, 3, 3).unwrap(), b(1));
        assert_eq!(count_forests_bruteforce(3, 1, 3).unwrap(), b(1));
        assert_eq!(
            count_forests_bruteforce(5, 3, 3).unwrap(),
            count_forests(5, 3, 3).unwrap()
        );
        assert!(matches!(count_forests_bruteforce(8, 1, 3), Err(Error::Resource(_))));
    }

    #[test]
    fn total_and_connected_examples() {
        assert_eq!(count_total(4, 2), b(6));
        assert_eq!(count_total(5, 0), b(1));
        assert_eq!(count_total(5, 3), b(120));
        assert_eq!(count_connected_exact(3, 1).unwrap(), b(1));
        assert_eq!(count_connected_exact(4, 1).unwrap(), b(0));
        assert_eq!(count_connected_exact(4, 2).unwrap(), b(6));
        assert!(matches!(count_connected_exact(61, 3), Err(Error::Resource(_))));
    }

    #[test]
    fn kernel_configuration_examples() {
        let c = count_kernel_configurations(0, 0, 1, &[3], 1, 0).unwrap();
        assert_eq!((c.configurations, c.multiplicity), (b(6), b(6)));
        let c = count_kernel_configurations(0, 0, 2, &[3, 3], 2, 0).unwrap();
        assert_eq!(c.configurations, b(720));
        let c = count_kernel_configurations(1, 0, 1, &[3], 1, 1).unwrap();
        assert_eq!(
            c.configurations,
            count_kernel_configurations_bruteforce(1, 0, &[3], 1, 1).unwrap()
        );
        assert!(count_kernel_configurations(3, 0, 1, &[3], 1, 1).is_err());
    }

    #[test]
    fn small_census_values() {
        assert_eq!(census_prekernels_bruteforce(3, 1).unwrap().total, b(0));
        let c = census_prekernels_bruteforce(4, 3).unwrap();
        assert_eq!(c.to_csv().lines().next(), Some("n,m,nu1,k0,k1,k2,count"));
    }

    #[test]
    fn ln_big_matches_f64() {
        let x = factorial(30);
        assert!((ln_big(&x) - ln_factorial(30)).abs() < 1e-12);
        let y = factorial(400);
        assert!((ln_big(&y) - ln_factorial(400)).abs() < 1e-9);
    }
}
