//! Construction paths: ordered edge lists whose prefixes walk from the empty
//! graph to a graph realizing a target property value, adding one edge per
//! step.

use std::collections::{BTreeSet, HashSet};

use log::debug;

use crate::error::{FiberError, Result};
use crate::graph::{
    block_capacity, normalize, CovariateAssignment, DegreeDistribution, DegreeMixingMatrix,
    Edge, Graph, MixingMatrix,
};
use crate::logspace::choose2;
use crate::property::{PropertyKind, PropertyValue};

#[derive(Clone, Debug)]
pub struct EdgePath {
    n: usize,
    edges: Vec<Edge>,
    target: PropertyValue,
    covariates: Option<CovariateAssignment>,
}

impl EdgePath {
    /// Wraps an arbitrary edge order; use [`verify_path`] to check it.
    pub fn from_parts(
        n: usize,
        edges: Vec<Edge>,
        target: PropertyValue,
        covariates: Option<CovariateAssignment>,
    ) -> Self {
        EdgePath {
            n,
            edges,
            target,
            covariates,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn property_kind(&self) -> PropertyKind {
        self.target.kind()
    }

    pub fn target(&self) -> &PropertyValue {
        &self.target
    }

    pub fn covariates(&self) -> Option<&CovariateAssignment> {
        self.covariates.as_ref()
    }

    /// Graph formed by the first `i` edges.
    pub fn prefix_graph(&self, i: usize) -> Result<Graph> {
        Graph::new(self.n, self.edges[..i].iter().copied())
    }
}

/// Maps a pair index in `0..C(n,2)` to the lexicographically ordered pair.
pub(crate) fn pair_at(n: usize, mut idx: usize) -> Edge {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
        i += 1;
    }
}

/// First `x` pairs in lexicographic order.
pub fn edge_count_path(n: usize, x: usize) -> Result<EdgePath> {
    let cap = choose2(n as u64) as usize;
    if x > cap {
        return Err(FiberError::input(format!(
            "{x} edges requested but only {cap} pairs exist on {n} vertices"
        )));
    }
    let mut edges = Vec::with_capacity(x);
    'outer: for i in 0..n {
        for j in i + 1..n {
            if edges.len() == x {
                break 'outer;
            }
            edges.push((i, j));
        }
    }
    Ok(EdgePath::from_parts(n, edges, PropertyValue::Edges(x), None))
}

/// Havel–Hakimi over a residual-degree vector indexed by vertex.
///
/// Each round takes the vertex with the largest residual (lowest index on
/// ties), zeroes it, and joins it to the vertices holding the next-largest
/// residuals (again lowest index first). Edges come out in that order.
pub fn havel_hakimi_edges(residual: &[usize]) -> Result<Vec<Edge>> {
    let n = residual.len();
    let mut residual = residual.to_vec();
    let max = residual.iter().copied().max().unwrap_or(0);
    if max > 0 && max >= n {
        return Err(FiberError::NotGraphical(format!(
            "residual degree {max} on {n} vertices"
        )));
    }
    if residual.iter().sum::<usize>() % 2 != 0 {
        return Err(FiberError::NotGraphical("odd degree sum".into()));
    }
    let mut buckets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); max + 1];
    for (v, &r) in residual.iter().enumerate() {
        if r > 0 {
            buckets[r].insert(v);
        }
    }
    let mut edges = Vec::with_capacity(residual.iter().sum::<usize>() / 2);
    let mut top = max;
    let mut chosen: Vec<usize> = Vec::new();
    loop {
        while top > 0 && buckets[top].is_empty() {
            top -= 1;
        }
        if top == 0 {
            break;
        }
        let v = buckets[top].pop_first().expect("nonempty bucket");
        let l = residual[v];
        residual[v] = 0;

        chosen.clear();
        'pick: for r in (1..=top).rev() {
            for &w in &buckets[r] {
                if chosen.len() == l {
                    break 'pick;
                }
                chosen.push(w);
            }
        }
        if chosen.len() < l {
            return Err(FiberError::NotGraphical(format!(
                "vertex {v} needs {l} partners but only {} remain",
                chosen.len()
            )));
        }
        for &w in &chosen {
            let r = residual[w];
            buckets[r].remove(&w);
            residual[w] = r - 1;
            if r > 1 {
                buckets[r - 1].insert(w);
            }
            edges.push(normalize(v, w));
        }
    }
    Ok(edges)
}

/// Path to a graph with degree distribution `d`. Vertices are labeled in
/// ascending order of target degree.
pub fn havel_hakimi_path(d: &DegreeDistribution) -> Result<EdgePath> {
    let edges = havel_hakimi_edges(&d.expand())?;
    Ok(EdgePath::from_parts(
        d.n(),
        edges,
        PropertyValue::DegreeDistribution(d.clone()),
        None,
    ))
}

/// Blocks `(k, l)` with `k <= l` in the order `(0,0), (0,1), .., (q-1,q-1)`.
pub(crate) fn block_order(q: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..q).flat_map(move |k| (k..q).map(move |l| (k, l)))
}

/// Path filling the mixing matrix block by block; within a block, pairs are
/// taken in lexicographic order.
pub fn mixing_path(a: &CovariateAssignment, mm: &MixingMatrix) -> Result<EdgePath> {
    let counts = a.category_counts();
    mm.check_feasible(&counts)?;
    let n = a.n();
    let mut edges = Vec::with_capacity(mm.edge_total() as usize);
    for (k, l) in block_order(a.q()) {
        let want = mm.get(k, l) as usize;
        if want == 0 {
            continue;
        }
        let before = edges.len();
        'fill: for u in 0..n {
            for v in u + 1..n {
                let (cu, cv) = (a.label(u), a.label(v));
                if (cu, cv) == (k, l) || (cu, cv) == (l, k) {
                    edges.push((u, v));
                    if edges.len() - before == want {
                        break 'fill;
                    }
                }
            }
        }
        if edges.len() - before < want {
            return Err(FiberError::Infeasible(format!(
                "block ({k}, {l}) wants {want} edges, capacity {}",
                block_capacity(&counts, k, l)
            )));
        }
    }
    Ok(EdgePath::from_parts(
        n,
        edges,
        PropertyValue::Mixing(mm.clone()),
        Some(a.clone()),
    ))
}

/// `Table({0, .., total-1} mod size)`: entry `k` counts residues equal to `k`.
fn residue_table(total: u64, size: usize) -> Vec<usize> {
    let size64 = size as u64;
    let (q, r) = (total / size64, total % size64);
    (0..size64).map(|k| (q + u64::from(k < r)) as usize).collect()
}

/// Contiguous vertex ranges per degree class, following the ascending-degree
/// labeling.
fn class_ranges(d: &DegreeDistribution) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    d.counts()
        .iter()
        .map(|&c| {
            let r = start..start + c;
            start += c;
            r
        })
        .collect()
}

fn check_dmm_capacity(dmm: &DegreeMixingMatrix, d: &DegreeDistribution) -> Result<()> {
    for (k, l, c) in dmm.triples() {
        let cap = if k == l {
            choose2(d.count(k) as u64)
        } else {
            (d.count(k) * d.count(l)) as u64
        };
        if c > cap {
            return Err(FiberError::NotGraphical(format!(
                "DMM[{k},{l}] = {c} exceeds the {cap} available pairs"
            )));
        }
    }
    Ok(())
}

/// Path to a graph with degree mixing matrix `dmm` on `n` vertices.
///
/// Within-class edges are placed first: each class spreads its
/// `2 * DMM[j,j]` stubs cyclically over its vertices and a Havel–Hakimi pass
/// wires them. Cross-class blocks follow in `(j, i)` order with `j < i`; each
/// block's cyclic share table is handed to the class-`j` vertex with the
/// smallest current degree, joined to the class-`i` vertices with the
/// smallest current degrees (lowest index on ties, skipping vertices already
/// adjacent). If that greedy pass ends off-target, a second construction
/// that carries the cyclic offset across blocks is used instead.
pub fn degree_mixing_path(dmm: &DegreeMixingMatrix, n: usize) -> Result<EdgePath> {
    let d = dmm.implied_distribution(n)?;
    check_dmm_capacity(dmm, &d)?;
    let edges = match greedy_min_degree_construction(dmm, &d) {
        Ok(edges) => edges,
        Err(reason) => {
            debug!("min-degree construction failed ({reason}); using cyclic construction");
            cyclic_construction(dmm, &d)?
        }
    };
    Ok(EdgePath::from_parts(
        n,
        edges,
        PropertyValue::DegreeMixing(dmm.clone()),
        None,
    ))
}

fn within_class_edges(
    dmm: &DegreeMixingMatrix,
    d: &DegreeDistribution,
    ranges: &[std::ops::Range<usize>],
    n: usize,
    mut assign: impl FnMut(usize, &[usize]) -> Vec<usize>,
) -> Result<Vec<Edge>> {
    let mut edges = Vec::new();
    for (j, range) in ranges.iter().enumerate().skip(1) {
        let diag = dmm.get(j, j);
        if diag == 0 {
            continue;
        }
        let table = residue_table(2 * diag, d.count(j));
        let table = assign(j, &table);
        let mut residual = vec![0usize; n];
        for (slot, v) in range.clone().enumerate() {
            residual[v] = table[slot];
        }
        edges.extend(havel_hakimi_edges(&residual)?);
    }
    Ok(edges)
}

fn greedy_min_degree_construction(
    dmm: &DegreeMixingMatrix,
    d: &DegreeDistribution,
) -> std::result::Result<Vec<Edge>, String> {
    let n = d.n();
    let ranges = class_ranges(d);
    let mut current = vec![0usize; n];
    let mut edges = within_class_edges(dmm, d, &ranges, n, |j, t| {
        for (slot, v) in ranges[j].clone().enumerate() {
            current[v] += t[slot];
        }
        t.to_vec()
    })
    .map_err(|e| e.to_string())?;
    let mut present: HashSet<Edge> = edges.iter().copied().collect();

    let classes = ranges.len();
    for j in 1..classes {
        for i in j + 1..classes {
            let x = dmm.get(j, i);
            if x == 0 {
                continue;
            }
            let table = residue_table(x, d.count(j));
            for &want in table.iter().filter(|&&t| t > 0) {
                let v = ranges[j]
                    .clone()
                    .min_by_key(|&v| (current[v], v))
                    .expect("class j nonempty");
                let mut candidates: Vec<usize> = ranges[i]
                    .clone()
                    .filter(|&w| !present.contains(&normalize(v, w)))
                    .collect();
                if candidates.len() < want {
                    return Err(format!(
                        "class {j} vertex {v} needs {want} partners in class {i}, {} free",
                        candidates.len()
                    ));
                }
                candidates.sort_by_key(|&w| (current[w], w));
                for &w in &candidates[..want] {
                    current[v] += 1;
                    current[w] += 1;
                    let e = normalize(v, w);
                    present.insert(e);
                    edges.push(e);
                }
            }
        }
    }
    for (j, range) in ranges.iter().enumerate() {
        if let Some(v) = range.clone().find(|&v| current[v] != j) {
            return Err(format!(
                "vertex {v} ends with degree {} instead of {j}",
                current[v]
            ));
        }
    }
    Ok(edges)
}

/// Stubs of each class are dealt round-robin across the class's vertices,
/// continuing the rotation from the within-class block through every
/// partner block, so each vertex receives exactly its degree and every
/// block's shares differ by at most one.
fn cyclic_construction(dmm: &DegreeMixingMatrix, d: &DegreeDistribution) -> Result<Vec<Edge>> {
    let n = d.n();
    let ranges = class_ranges(d);
    let classes = ranges.len();
    // Rotation offset per class after its within-class stubs.
    let mut offset = vec![0usize; classes];
    let mut edges = within_class_edges(dmm, d, &ranges, n, |j, t| {
        offset[j] = (2 * dmm.get(j, j) as usize) % d.count(j);
        t.to_vec()
    })?;

    let deal = |class: usize, count: u64, offset: &mut usize| -> Vec<usize> {
        let size = d.count(class);
        let mut share = vec![0usize; size];
        for s in 0..count as usize {
            share[(*offset + s) % size] += 1;
        }
        *offset = (*offset + count as usize) % size;
        share
    };
    let mut shares: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); classes]; classes];
    for (j, row) in shares.iter_mut().enumerate().skip(1) {
        for (i, cell) in row.iter_mut().enumerate().skip(1) {
            let x = dmm.get(j, i);
            if i != j && x > 0 {
                *cell = deal(j, x, &mut offset[j]);
            }
        }
    }

    for j in 1..classes {
        for i in j + 1..classes {
            if dmm.get(j, i) == 0 {
                continue;
            }
            let mut left: Vec<(usize, usize)> = ranges[j]
                .clone()
                .zip(shares[j][i].iter().copied())
                .collect();
            let mut right: Vec<usize> = shares[i][j].clone();
            left.sort_by_key(|&(v, s)| (std::cmp::Reverse(s), v));
            for (v, need) in left {
                let mut order: Vec<usize> = (0..right.len()).filter(|&s| right[s] > 0).collect();
                if order.len() < need {
                    return Err(FiberError::NotGraphical(format!(
                        "block ({j}, {i}) is not bipartite-realizable"
                    )));
                }
                order.sort_by_key(|&s| (std::cmp::Reverse(right[s]), s));
                for &s in &order[..need] {
                    right[s] -= 1;
                    edges.push(normalize(v, ranges[i].start + s));
                }
            }
        }
    }
    Ok(edges)
}

/// Checks that the path adds a new valid edge at every step, that mixing
/// paths fill blocks in order, and that the final graph realizes the target.
/// The error string describes the first violation.
pub fn verify_path(path: &EdgePath) -> std::result::Result<(), String> {
    let n = path.n();
    let mut seen: HashSet<Edge> = HashSet::with_capacity(path.len());
    let mut last_block = None;
    for (step, &(u, v)) in path.edges().iter().enumerate() {
        let step = step + 1;
        if u >= n || v >= n {
            return Err(format!("step {step}: edge ({u}, {v}) out of range"));
        }
        if u == v {
            return Err(format!("step {step}: self-loop at {u}"));
        }
        if !seen.insert(normalize(u, v)) {
            return Err(format!("step {step}: edge ({u}, {v}) repeated"));
        }
        if let (PropertyKind::Mixing, Some(a)) = (path.property_kind(), path.covariates()) {
            let (cu, cv) = (a.label(u), a.label(v));
            let block = normalize(cu, cv);
            if last_block.is_some_and(|b| b > block) {
                return Err(format!("step {step}: block {block:?} after {last_block:?}"));
            }
            last_block = Some(block);
        }
    }
    let g = path
        .prefix_graph(path.len())
        .map_err(|e| format!("final graph invalid: {e}"))?;
    let realized = PropertyValue::of_graph(path.property_kind(), &g, path.covariates())
        .map_err(|e| e.to_string())?;
    if &realized != path.target() {
        return Err(format!(
            "final value `{}` differs from target `{}`",
            realized.key(),
            path.target().key()
        ));
    }
    Ok(())
}
