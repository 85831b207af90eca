//! Labeled simple graphs and the property maps evaluated on them.
//!
//! Vertices are `0..n`. Every property here (edge count, degree sequence,
//! degree distribution, covariate mixing, degree mixing) is a pure function
//! of a [`Graph`].

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{FiberError, Result};

pub type Edge = (usize, usize);

/// Orders an unordered pair as `(min, max)`.
#[inline]
pub fn normalize(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Immutable labeled simple undirected graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph, rejecting self-loops, duplicates and out-of-range ends.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut list: Vec<Edge> = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(FiberError::input(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(FiberError::input(format!("self-loop at vertex {u}")));
            }
            list.push(normalize(u, v));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(FiberError::input(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &list {
            adj[u].push(v);
            adj[v].push(u);
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: list,
            adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }
}

/// Per-vertex degrees `(d_0, ..., d_{n-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeSequence(Vec<usize>);

impl DegreeSequence {
    /// Checks the parity and maximum-degree conditions.
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        let n = degrees.len();
        if let Some(&d) = degrees.iter().find(|&&d| d >= n.max(1)) {
            return Err(FiberError::input(format!(
                "degree {d} impossible on {n} vertices"
            )));
        }
        if degrees.iter().sum::<usize>() % 2 != 0 {
            return Err(FiberError::input("degree sum is odd"));
        }
        Ok(DegreeSequence(degrees))
    }

    /// `d`-regular sequence on `n` vertices.
    pub fn regular(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.0
    }

    pub fn distribution(&self) -> DegreeDistribution {
        let mut counts = vec![0usize; self.n()];
        for &d in &self.0 {
            counts[d] += 1;
        }
        DegreeDistribution { counts }
    }
}

/// `D_k` = number of vertices of degree `k`, for `k = 0..n-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DegreeDistribution {
    counts: Vec<usize>,
}

impl DegreeDistribution {
    /// Accepts a vector indexed by degree. Trailing entries beyond the implied
    /// vertex count must be zero; shorter vectors are padded.
    pub fn from_counts(counts: Vec<usize>) -> Result<Self> {
        let n: usize = counts.iter().sum();
        let max_degree = counts.iter().rposition(|&c| c > 0).unwrap_or(0);
        if n > 0 && max_degree >= n {
            return Err(FiberError::input(format!(
                "degree {max_degree} impossible on {n} vertices"
            )));
        }
        let stubs: usize = counts.iter().enumerate().map(|(k, c)| k * c).sum();
        if !stubs.is_multiple_of(2) {
            return Err(FiberError::input("degree sum is odd"));
        }
        let mut counts = counts;
        counts.resize(n, 0);
        Ok(DegreeDistribution { counts })
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    /// Entry `D_k`; zero beyond the stored range.
    pub fn count(&self, k: usize) -> usize {
        self.counts.get(k).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `sum_k k * D_k`, twice the edge count.
    pub fn stub_total(&self) -> usize {
        self.counts.iter().enumerate().map(|(k, c)| k * c).sum()
    }

    pub fn edge_total(&self) -> usize {
        self.stub_total() / 2
    }

    /// Degree list in ascending order: degree `j` repeated `D_j` times.
    pub fn expand(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| std::iter::repeat_n(k, c))
            .collect()
    }

    pub fn to_sequence(&self) -> DegreeSequence {
        DegreeSequence(self.expand())
    }
}

impl TryFrom<Vec<usize>> for DegreeDistribution {
    type Error = FiberError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::from_counts(v)
    }
}

impl From<DegreeDistribution> for Vec<usize> {
    fn from(d: DegreeDistribution) -> Self {
        d.counts
    }
}

/// Category label per vertex, `0..q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CovariateAssignment {
    labels: Vec<usize>,
    q: usize,
}

impl CovariateAssignment {
    pub fn new(labels: Vec<usize>, q: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&c| c >= q) {
            return Err(FiberError::input(format!(
                "category {bad} out of range for q = {q}"
            )));
        }
        Ok(CovariateAssignment { labels, q })
    }

    /// Uses `q = max label + 1`.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let q = labels.iter().max().map_or(0, |m| m + 1);
        CovariateAssignment { labels, q }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// `M_k` = number of vertices in category `k`.
    pub fn category_counts(&self) -> Vec<usize> {
        let mut m = vec![0; self.q];
        for &c in &self.labels {
            m[c] += 1;
        }
        m
    }
}

/// Symmetric `q x q` matrix of edge counts between covariate categories.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MixingMatrix {
    q: usize,
    entries: Vec<u64>,
}

impl MixingMatrix {
    pub fn zeros(q: usize) -> Self {
        MixingMatrix {
            q,
            entries: vec![0; q * q],
        }
    }

    /// From a dense square matrix; rejects asymmetry.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let q = rows.len();
        let mut mm = Self::zeros(q);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != q {
                return Err(FiberError::input("mixing matrix must be square"));
            }
            for (l, &x) in row.iter().enumerate() {
                if rows[l][k] != x {
                    return Err(FiberError::input(format!(
                        "mixing matrix not symmetric at ({k}, {l})"
                    )));
                }
                mm.entries[k * q + l] = x;
            }
        }
        Ok(mm)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, k: usize, l: usize) -> u64 {
        self.entries[k * self.q + l]
    }

    pub fn set(&mut self, k: usize, l: usize, value: u64) {
        self.entries[k * self.q + l] = value;
        self.entries[l * self.q + k] = value;
    }

    pub(crate) fn increment(&mut self, k: usize, l: usize) {
        let v = self.get(k, l) + 1;
        self.set(k, l, v);
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.q.max(1)).map(|r| r.to_vec()).collect()
    }

    /// Sum over `k <= l`.
    pub fn edge_total(&self) -> u64 {
        (0..self.q)
            .flat_map(|k| (k..self.q).map(move |l| (k, l)))
            .map(|(k, l)| self.get(k, l))
            .sum()
    }

    /// Entry-wise capacity check against category sizes.
    pub fn check_feasible(&self, category_counts: &[usize]) -> Result<()> {
        if category_counts.len() != self.q {
            return Err(FiberError::input(format!(
                "mixing matrix has q = {} but assignment has {} categories",
                self.q,
                category_counts.len()
            )));
        }
        for k in 0..self.q {
            for l in k..self.q {
                let cap = block_capacity(category_counts, k, l);
                if self.get(k, l) > cap {
                    return Err(FiberError::Infeasible(format!(
                        "block ({k}, {l}) wants {} edges but only {cap} pairs exist",
                        self.get(k, l)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Number of vertex pairs with endpoint categories `{k, l}`.
pub fn block_capacity(category_counts: &[usize], k: usize, l: usize) -> u64 {
    let (mk, ml) = (category_counts[k] as u64, category_counts[l] as u64);
    if k == l {
        mk * mk.saturating_sub(1) / 2
    } else {
        mk * ml
    }
}

/// Sparse symmetric matrix of edge counts between degree classes.
///
/// Only entries with `k <= l` and a nonzero count are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DegreeMixingMatrix {
    entries: BTreeMap<(usize, usize), u64>,
}

impl DegreeMixingMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// From `(k, l, count)` triples; repeated pairs accumulate.
    pub fn from_triples(triples: impl IntoIterator<Item = (usize, usize, u64)>) -> Self {
        let mut m = Self::new();
        for (k, l, c) in triples {
            m.add(k, l, c);
        }
        m
    }

    /// From a dense symmetric matrix indexed by degree.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let mut m = Self::new();
        for (k, row) in rows.iter().enumerate() {
            for (l, &x) in row.iter().enumerate() {
                let mirror = rows.get(l).and_then(|r| r.get(k)).copied().unwrap_or(0);
                if mirror != x {
                    return Err(FiberError::input(format!(
                        "degree mixing matrix not symmetric at ({k}, {l})"
                    )));
                }
                if k <= l {
                    m.add(k, l, x);
                }
            }
        }
        Ok(m)
    }

    pub fn get(&self, k: usize, l: usize) -> u64 {
        self.entries.get(&normalize(k, l)).copied().unwrap_or(0)
    }

    pub fn add(&mut self, k: usize, l: usize, count: u64) {
        if count > 0 {
            *self.entries.entry(normalize(k, l)).or_insert(0) += count;
        }
    }

    /// Nonzero entries as `(k, l, count)` with `k <= l`, sorted.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.entries.iter().map(|(&(k, l), &c)| (k, l, c))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.entries.keys().map(|&(_, l)| l).max().unwrap_or(0)
    }

    pub fn edge_total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// `DMM'`: diagonal entries doubled, i.e. stubs in class `k` whose
    /// partner has degree `l`.
    pub fn stub_entry(&self, k: usize, l: usize) -> u64 {
        let v = self.get(k, l);
        if k == l {
            2 * v
        } else {
            v
        }
    }

    /// Degree distribution implied by the matrix on `n` vertices:
    /// `D_j = (sum_i DMM_ij + DMM_jj) / j` for `j >= 1`, `D_0` the remainder.
    pub fn implied_distribution(&self, n: usize) -> Result<DegreeDistribution> {
        let max = self.max_degree();
        let mut stubs = vec![0u64; max + 1];
        for (k, l, c) in self.triples() {
            stubs[k] += c;
            stubs[l] += c;
        }
        if stubs[0] > 0 {
            return Err(FiberError::NotGraphical(
                "edges incident to degree-0 vertices".into(),
            ));
        }
        let mut counts = vec![0usize; max + 1];
        for j in 1..=max {
            if !stubs[j].is_multiple_of(j as u64) {
                return Err(FiberError::NotGraphical(format!(
                    "class {j} stub total {} not divisible by {j}",
                    stubs[j]
                )));
            }
            counts[j] = (stubs[j] / j as u64) as usize;
        }
        let used: usize = counts.iter().sum();
        if used > n {
            return Err(FiberError::NotGraphical(format!(
                "matrix needs {used} non-isolated vertices but n = {n}"
            )));
        }
        counts[0] = n - used;
        if n > 0 && max >= n {
            return Err(FiberError::NotGraphical(format!(
                "degree {max} impossible on {n} vertices"
            )));
        }
        DegreeDistribution::from_counts(counts)
    }
}

pub fn phi_edges(g: &Graph) -> usize {
    g.edges.len()
}

pub fn degree_sequence(g: &Graph) -> DegreeSequence {
    DegreeSequence(g.adj.iter().map(Vec::len).collect())
}

pub fn degree_distribution(g: &Graph) -> DegreeDistribution {
    degree_sequence(g).distribution()
}

pub fn mixing_matrix(g: &Graph, a: &CovariateAssignment) -> Result<MixingMatrix> {
    if a.n() != g.n() {
        return Err(FiberError::input(format!(
            "covariate assignment has {} labels for {} vertices",
            a.n(),
            g.n()
        )));
    }
    let mut mm = MixingMatrix::zeros(a.q());
    for &(u, v) in g.edges() {
        mm.increment(a.label(u), a.label(v));
    }
    Ok(mm)
}

pub fn degree_mixing_matrix(g: &Graph) -> DegreeMixingMatrix {
    let mut m = DegreeMixingMatrix::new();
    for &(u, v) in g.edges() {
        m.add(g.degree(u), g.degree(v), 1);
    }
    m
}

/// Number of neighbors of `v` whose degree is `z`.
pub fn neighbor_degree_counts(g: &Graph, v: usize, z: usize) -> usize {
    g.neighbors(v).iter().filter(|&&u| g.degree(u) == z).count()
}

/// Mutable graph that tracks degrees, the degree distribution and the degree
/// mixing matrix while edges are added one at a time.
#[derive(Clone, Debug)]
pub struct GraphState {
    n: usize,
    adj: Vec<Vec<usize>>,
    dist: Vec<usize>,
    dmm: HashMap<Edge, u64>,
    edge_count: usize,
}

impl GraphState {
    pub fn new(n: usize) -> Self {
        let mut dist = vec![0; n + 1];
        dist[0] = n;
        GraphState {
            n,
            adj: vec![Vec::new(); n],
            dist,
            dmm: HashMap::new(),
            edge_count: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// `D_k` of the current graph.
    pub fn dist_count(&self, k: usize) -> usize {
        self.dist.get(k).copied().unwrap_or(0)
    }

    pub fn stub_total(&self) -> usize {
        2 * self.edge_count
    }

    pub fn dmm(&self, k: usize, l: usize) -> u64 {
        self.dmm.get(&normalize(k, l)).copied().unwrap_or(0)
    }

    /// `DMM'` entry of the current graph.
    pub fn dmm_stub(&self, k: usize, l: usize) -> u64 {
        let v = self.dmm(k, l);
        if k == l {
            2 * v
        } else {
            v
        }
    }

    /// `(z, count)` pairs of neighbor degrees of `v`, sorted by `z`.
    pub fn neighbor_degree_profile(&self, v: usize) -> Vec<(usize, usize)> {
        let mut degs: Vec<usize> = self.adj[v].iter().map(|&u| self.degree(u)).collect();
        degs.sort_unstable();
        let mut out: Vec<(usize, usize)> = Vec::new();
        for d in degs {
            match out.last_mut() {
                Some((z, c)) if *z == d => *c += 1,
                _ => out.push((d, 1)),
            }
        }
        out
    }

    fn dmm_adjust(&mut self, k: usize, l: usize, up: bool) {
        let key = normalize(k, l);
        if up {
            *self.dmm.entry(key).or_insert(0) += 1;
        } else {
            let e = self.dmm.get_mut(&key).expect("dmm entry present");
            *e -= 1;
            if *e == 0 {
                self.dmm.remove(&key);
            }
        }
    }

    fn retally_incident(&mut self, l: usize, j: usize, up: bool) {
        for end in [l, j] {
            let de = self.degree(end);
            for idx in 0..self.adj[end].len() {
                let u = self.adj[end][idx];
                // The (l, j) edge is visited from both ends; count it once.
                if end == j && u == l {
                    continue;
                }
                let du = self.degree(u);
                self.dmm_adjust(de, du, up);
            }
        }
    }

    /// Adds edge `(l, j)`; the caller guarantees it is new and not a loop.
    pub fn add_edge(&mut self, l: usize, j: usize) {
        debug_assert!(l != j && !self.adj[l].contains(&j));
        self.retally_incident(l, j, false);
        for v in [l, j] {
            let d = self.degree(v);
            self.dist[d] -= 1;
            self.dist[d + 1] += 1;
        }
        self.adj[l].push(j);
        self.adj[j].push(l);
        self.edge_count += 1;
        self.retally_incident(l, j, true);
    }

    pub fn to_graph(&self) -> Graph {
        let edges = (0..self.n).flat_map(|u| {
            self.adj[u]
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        });
        Graph::new(self.n, edges).expect("state holds a simple graph")
    }
}
