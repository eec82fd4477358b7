//! Labelled 3-uniform hypergraphs, configuration-model multigraphs and the
//! structural operations on them: connectivity, core peeling, pre-kernel
//! recognition, kernel extraction and its reversal.
//!
//! Vertices are 0-based internally. The text fixture format is 1-based:
//! a first line `n m` followed by `m` lines of three vertex ids.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::{Error, Result};

/// A simple labelled 3-uniform hypergraph on `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<[u32; 3]>,
}

/// A configuration-model multigraph: row `e` of `phi` lists the vertices in
/// the three points of edge `e`. Loops and repeated edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Multigraph {
    pub n: usize,
    pub phi: Vec<[u32; 3]>,
}

/// Result of peeling a hypergraph down to its core.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoreDecomposition {
    pub core_vertices: Vec<u32>,
    pub core_edges: Vec<[u32; 3]>,
    pub forest_edges: Vec<[u32; 3]>,
    /// Roots of the forest part; equal to the core vertices.
    pub roots: Vec<u32>,
}

/// A kernel: 2-edges and 3-edges over a vertex subset. Entries of an edge
/// need not be distinct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Kernel {
    pub vertices: Vec<u32>,
    pub edges2: Vec<[u32; 2]>,
    pub edges3: Vec<[u32; 3]>,
}

/// Degree classification `(ν₁, k₀, k₁, k₂)` of a pre-kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PreKernelClass {
    pub nu1: u32,
    pub k0: u32,
    pub k1: u32,
    pub k2: u32,
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n as u32).collect())
    }
    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            let p = self.0[x as usize];
            self.0[x as usize] = self.0[p as usize];
            x = p;
        }
        x
    }
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra as usize] = rb;
        }
        ra != rb
    }
}

fn connected_rows<'a>(n: usize, rows: impl Iterator<Item = &'a [u32]>) -> bool {
    if n <= 1 {
        return true;
    }
    let mut uf = UnionFind::new(n);
    let mut components = n;
    for row in rows {
        for w in row.windows(2) {
            if uf.union(w[0], w[1]) {
                components -= 1;
            }
        }
    }
    components == 1
}

impl Hypergraph {
    /// Builds a hypergraph, sorting each triple and the edge list.
    pub fn new(n: usize, edges: impl IntoIterator<Item = [u32; 3]>) -> Result<Self> {
        let mut out: Vec<[u32; 3]> = Vec::new();
        for mut e in edges {
            e.sort_unstable();
            if e[0] == e[1] || e[1] == e[2] {
                return Err(Error::domain(format!("edge {e:?} repeats a vertex")));
            }
            if e[2] as usize >= n {
                return Err(Error::domain(format!("edge {e:?} outside [0, {n})")));
            }
            out.push(e);
        }
        out.sort_unstable();
        if out.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("duplicate edge"));
        }
        Ok(Self { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[u32; 3]] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<u32> {
        degrees_of(self.n, &self.edges)
    }

    /// Parses the 1-based fixture format.
    pub fn from_fixture(text: &str) -> Result<Self> {
        let mut nums = text.split_whitespace().map(|t| {
            t.parse::<u64>()
                .map_err(|_| Error::domain(format!("fixture: bad integer {t:?}")))
        });
        let mut next = |what: &str| {
            nums.next()
                .unwrap_or_else(|| Err(Error::domain(format!("fixture: missing {what}"))))
        };
        let n = next("n")? as usize;
        let m = next("m")? as usize;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let mut e = [0u32; 3];
            for slot in &mut e {
                let v = next("vertex")?;
                if v == 0 || v as usize > n {
                    return Err(Error::domain(format!("fixture: vertex {v} outside 1..={n}")));
                }
                *slot = (v - 1) as u32;
            }
            edges.push(e);
        }
        if next("end").is_ok() {
            return Err(Error::domain("fixture: trailing data"));
        }
        Self::new(n, edges)
    }

    /// Writes the 1-based fixture format.
    pub fn to_fixture(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m());
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e[0] + 1, e[1] + 1, e[2] + 1);
        }
        s
    }

    pub fn is_connected(&self) -> bool {
        connected_rows(self.n, self.edges.iter().map(|e| &e[..]))
    }
}

impl Multigraph {
    pub fn m(&self) -> usize {
        self.phi.len()
    }

    pub fn is_connected(&self) -> bool {
        connected_rows(self.n, self.phi.iter().map(|e| &e[..]))
    }

    /// No loops and no two edges on the same vertex multiset.
    pub fn is_simple(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.phi.len());
        self.phi.iter().all(|row| {
            let mut e = *row;
            e.sort_unstable();
            e[0] != e[1] && e[1] != e[2] && seen.insert(e)
        })
    }
}

/// Connectivity of a hypergraph (isolated vertices disconnect it).
pub fn is_connected(g: &Hypergraph) -> bool {
    g.is_connected()
}

/// See [`Multigraph::is_simple`].
pub fn is_simple(mg: &Multigraph) -> bool {
    mg.is_simple()
}

/// Forgets edge and point labels of a simple multigraph.
pub fn multigraph_to_hypergraph(mg: &Multigraph) -> Result<Hypergraph> {
    if !mg.is_simple() {
        return Err(Error::domain("multigraph has a loop or a double edge"));
    }
    Hypergraph::new(mg.n, mg.phi.iter().copied())
}

fn degrees_of(n: usize, edges: &[[u32; 3]]) -> Vec<u32> {
    let mut d = vec![0u32; n];
    for e in edges {
        for &v in e {
            d[v as usize] += 1;
        }
    }
    d
}

fn heavy_count(e: &[u32; 3], deg: &[u32]) -> usize {
    e.iter().filter(|&&v| deg[v as usize] >= 2).count()
}

/// Repeatedly deletes edges with fewer than two vertices of degree ≥ 2.
pub fn peel_core(g: &Hypergraph) -> CoreDecomposition {
    let edges = g.edges();
    let mut deg = g.degrees();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, e) in edges.iter().enumerate() {
        for &v in e {
            incident[v as usize].push(i);
        }
    }
    let mut alive = vec![true; edges.len()];
    let mut queue: VecDeque<usize> = (0..edges.len())
        .filter(|&i| heavy_count(&edges[i], &deg) < 2)
        .collect();
    while let Some(i) = queue.pop_front() {
        if !alive[i] || heavy_count(&edges[i], &deg) >= 2 {
            continue;
        }
        alive[i] = false;
        for &v in &edges[i] {
            deg[v as usize] -= 1;
            if deg[v as usize] == 1 {
                queue.extend(incident[v as usize].iter().filter(|&&j| alive[j]));
            }
        }
    }
    let (core_edges, forest_edges): (Vec<_>, Vec<_>) =
        (0..edges.len()).partition(|&i| alive[i]);
    let core_edges: Vec<[u32; 3]> = core_edges.into_iter().map(|i| edges[i]).collect();
    let forest_edges = forest_edges.into_iter().map(|i| edges[i]).collect();
    let core_vertices: Vec<u32> = (0..g.n() as u32).filter(|&v| deg[v as usize] > 0).collect();
    CoreDecomposition {
        roots: core_vertices.clone(),
        core_vertices,
        core_edges,
        forest_edges,
    }
}

/// Every edge has two vertices of degree ≥ 2 and no vertex is isolated.
pub fn is_core(g: &Hypergraph) -> bool {
    let deg = g.degrees();
    deg.iter().all(|&d| d > 0) && g.edges().iter().all(|e| heavy_count(e, &deg) >= 2)
}

/// Components of `g` as (vertex count, edge count), ignoring isolated vertices.
fn component_sizes(g: &Hypergraph) -> Vec<(usize, usize)> {
    let mut uf = UnionFind::new(g.n());
    for e in g.edges() {
        uf.union(e[0], e[1]);
        uf.union(e[1], e[2]);
    }
    let mut sizes: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for v in 0..g.n() as u32 {
        sizes.entry(uf.find(v)).or_default().0 += 1;
    }
    for e in g.edges() {
        sizes.entry(uf.find(e[0])).or_default().1 += 1;
    }
    sizes.into_values().filter(|&(_, m)| m > 0).collect()
}

/// A core with no isolated-cycle component. A core component is an isolated
/// cycle exactly when it has zero excess (`2m = n`).
pub fn is_prekernel(g: &Hypergraph) -> bool {
    is_core(g) && component_sizes(g).iter().all(|&(n, m)| 2 * m != n)
}

/// Degree classification of a pre-kernel.
pub fn prekernel_class(g: &Hypergraph) -> Result<PreKernelClass> {
    if !is_prekernel(g) {
        return Err(Error::domain("not a pre-kernel"));
    }
    let deg = g.degrees();
    let is_two_edge = |e: &[u32; 3]| e.iter().any(|&v| deg[v as usize] == 1);
    let mut cls = PreKernelClass { nu1: 0, k0: 0, k1: 0, k2: 0 };
    let mut twos = vec![0u32; g.n()];
    for e in g.edges() {
        if is_two_edge(e) {
            for &v in e {
                twos[v as usize] += 1;
            }
        }
    }
    for v in 0..g.n() {
        match (deg[v], twos[v]) {
            (1, _) => cls.nu1 += 1,
            (2, 2) => cls.k0 += 1,
            (2, 1) => cls.k1 += 1,
            (2, 0) => cls.k2 += 1,
            _ => {}
        }
    }
    Ok(cls)
}

/// Drops degree-1 vertices and contracts degree-2 vertices lying in two
/// 2-edges.
pub fn extract_kernel(g: &Hypergraph) -> Result<Kernel> {
    if !is_prekernel(g) {
        return Err(Error::domain("extract_kernel: input is not a pre-kernel"));
    }
    let deg = g.degrees();
    let mut edges3 = Vec::new();
    let mut edges2: Vec<Option<[u32; 2]>> = Vec::new();
    for e in g.edges() {
        let kept: Vec<u32> = e.iter().copied().filter(|&v| deg[v as usize] >= 2).collect();
        match kept.len() {
            3 => edges3.push(*e),
            2 => edges2.push(Some([kept[0], kept[1]])),
            _ => unreachable!("core edge with fewer than two heavy vertices"),
        }
    }
    // Vertices whose two incidences both lie in 2-edges.
    let mut inc2: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, e) in edges2.iter().enumerate() {
        for &v in e.as_ref().expect("fresh") {
            inc2[v as usize].push(i);
        }
    }
    let mut removed = vec![false; g.n()];
    for v in 0..g.n() {
        if deg[v] != 2 || inc2[v].len() != 2 || inc2[v][0] == inc2[v][1] {
            continue;
        }
        let (i, j) = (inc2[v][0], inc2[v][1]);
        let other = |e: [u32; 2]| if e[0] == v as u32 { e[1] } else { e[0] };
        let a = other(edges2[i].expect("live"));
        let b = other(edges2[j].expect("live"));
        edges2[i] = Some([a.min(b), a.max(b)]);
        edges2[j] = None;
        for w in [a, b] {
            for slot in inc2[w as usize].iter_mut() {
                if *slot == j {
                    *slot = i;
                }
            }
        }
        removed[v] = true;
    }
    let vertices = (0..g.n() as u32)
        .filter(|&v| deg[v as usize] >= 2 && !removed[v as usize])
        .collect();
    let mut edges2: Vec<[u32; 2]> = edges2.into_iter().flatten().collect();
    edges2.sort_unstable();
    Ok(Kernel {
        vertices,
        edges2,
        edges3,
    })
}

impl Kernel {
    /// Number of 2-edges that are loops.
    pub fn loops(&self) -> usize {
        self.edges2.iter().filter(|e| e[0] == e[1]).count()
    }

    /// Degree of each kernel vertex (a loop counts twice).
    pub fn degrees(&self) -> BTreeMap<u32, u32> {
        let mut d: BTreeMap<u32, u32> = self.vertices.iter().map(|&v| (v, 0)).collect();
        for &v in self.edges2.iter().flatten().chain(self.edges3.iter().flatten()) {
            *d.entry(v).or_default() += 1;
        }
        d
    }

    /// Rebuilds a pre-kernel on `n` vertices by `k0` splits and one degree-1
    /// vertex per 2-edge. Each loop is split once first, remaining splits go
    /// on the first 2-edge, and new vertices take the smallest free labels in
    /// ascending order.
    pub fn reconstruct_prekernel(&self, n: usize, k0: usize) -> Result<Hypergraph> {
        let loops = self.loops();
        if k0 < loops {
            return Err(Error::domain("fewer splits than kernel loops"));
        }
        if !self.edges3.is_empty() || !self.edges2.is_empty() {
            let needed = self.vertices.len() + k0 + self.edges2.len() + k0;
            if needed != n {
                return Err(Error::domain(format!(
                    "reconstruction needs {needed} vertices, got {n}"
                )));
            }
        }
        let used: HashSet<u32> = self.vertices.iter().copied().collect();
        let mut fresh = (0..n as u32).filter(|v| !used.contains(v));
        let mut take = || fresh.next().ok_or_else(|| Error::domain("ran out of labels"));
        let mut paths: Vec<Vec<u32>> = self.edges2.iter().map(|e| vec![e[0], e[1]]).collect();
        let mut remaining = k0;
        for p in paths.iter_mut().filter(|p| p[0] == p[1]) {
            p.insert(1, take()?);
            remaining -= 1;
        }
        if remaining > 0 {
            let Some(first) = paths.first_mut() else {
                return Err(Error::domain("splits requested but kernel has no 2-edge"));
            };
            for _ in 0..remaining {
                let at = first.len() - 1;
                first.insert(at, take()?);
            }
        }
        let mut edges = self.edges3.clone();
        for p in &paths {
            for w in p.windows(2) {
                edges.push([w[0], w[1], take()?]);
            }
        }
        Hypergraph::new(n, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hg(n: usize, e: &[[u32; 3]]) -> Hypergraph {
        Hypergraph::new(n, e.iter().copied()).unwrap()
    }

    #[test]
    fn connectivity_examples() {
        assert!(hg(3, &[[0, 1, 2]]).is_connected());
        assert!(!hg(4, &[[0, 1, 2]]).is_connected());
        assert!(hg(5, &[[0, 1, 2], [2, 3, 4]]).is_connected());
        assert!(hg(0, &[]).is_connected());
        assert!(hg(1, &[]).is_connected());
        assert!(!hg(2, &[]).is_connected());
    }

    #[test]
    fn simplicity_examples() {
        let loopy = Multigraph { n: 3, phi: vec![[0, 0, 1]] };
        assert!(!loopy.is_simple());
        let double = Multigraph { n: 3, phi: vec![[0, 1, 2], [2, 0, 1]] };
        assert!(!double.is_simple());
        let ok = Multigraph { n: 4, phi: vec![[0, 1, 2], [0, 1, 3]] };
        assert!(ok.is_simple());
        let one = Multigraph { n: 3, phi: vec![[2, 0, 1]] };
        assert_eq!(multigraph_to_hypergraph(&one).unwrap().edges(), &[[0, 1, 2]]);
        let empty = Multigraph { n: 2, phi: vec![] };
        assert_eq!(multigraph_to_hypergraph(&empty).unwrap().m(), 0);
        assert!(multigraph_to_hypergraph(&loopy).is_err());
    }

    #[test]
    fn fixture_round_trip() {
        let g = Hypergraph::from_fixture("5 2\n1 2 3\n3 4 5\n").unwrap();
        assert_eq!(g.edges(), &[[0, 1, 2], [2, 3, 4]]);
        assert_eq!(Hypergraph::from_fixture(&g.to_fixture()).unwrap(), g);
        assert!(Hypergraph::from_fixture("3 1\n1 2 4\n").is_err());
        assert!(Hypergraph::from_fixture("3 2\n1 2 3\n").is_err());
    }

    #[test]
    fn forest_has_empty_core() {
        let g = hg(7, &[[0, 1, 2], [2, 3, 4], [4, 5, 6]]);
        let c = peel_core(&g);
        assert!(c.core_edges.is_empty());
        assert_eq!(c.forest_edges.len(), 3);
    }

    #[test]
    fn cycle_with_pendant_tree() {
        // 2-edge cycle through 0,1,2,3 (degree-1 vertices 4..7), plus a
        // pendant tree hanging from vertex 4.
        let g = hg(
            10,
            &[[0, 1, 4], [1, 2, 5], [2, 3, 6], [0, 3, 7], [4, 8, 9]],
        );
        let c = peel_core(&g);
        assert_eq!(c.core_edges, vec![[0, 1, 4], [0, 3, 7], [1, 2, 5], [2, 3, 6]]);
        assert_eq!(c.forest_edges, vec![[4, 8, 9]]);
        let core = hg(8, &c.core_edges);
        assert!(is_core(&core));
        assert!(!is_prekernel(&core), "isolated cycle");
    }

    #[test]
    fn path_of_two_edges_contracts() {
        // Two 3-edges {0,1,2} and {3,4,5} joined by a path of 2-edges
        // 0 - 6 - 7 - 3 and closed by 1 - 4, 2 - 5 edges.
        let g = hg(
            13,
            &[
                [0, 1, 2],
                [3, 4, 5],
                [0, 6, 8],
                [6, 7, 9],
                [3, 7, 10],
                [1, 4, 11],
                [2, 5, 12],
            ],
        );
        assert!(is_prekernel(&g));
        let cls = prekernel_class(&g).unwrap();
        assert_eq!(cls, PreKernelClass { nu1: 5, k0: 2, k1: 6, k2: 0 });
        let k = extract_kernel(&g).unwrap();
        assert_eq!(k.edges2, vec![[0, 3], [1, 4], [2, 5]]);
        assert_eq!(k.vertices, vec![0, 1, 2, 3, 4, 5]);
        let back = k.reconstruct_prekernel(13, 2).unwrap();
        assert_eq!(prekernel_class(&back).unwrap(), cls);
    }

    #[test]
    fn kernel_fixpoint() {
        let g = hg(4, &[[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]);
        let k = extract_kernel(&g).unwrap();
        assert_eq!(k.edges3, g.edges());
        assert!(k.edges2.is_empty());
        assert_eq!(k.vertices.len(), 4);
    }

    #[test]
    fn empty_graph_is_prekernel() {
        assert!(is_prekernel(&hg(0, &[])));
    }
}
