//! Random graph models: Barabási–Albert growth, uniform `G(n, m)`, and
//! configuration-model sampling for a fixed degree sequence.
//!
//! All randomness flows through [`RngStream`], a ChaCha8 generator addressed
//! by `(seed, stream)`. The same pair gives the same graph on every platform.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FiberError, Result};
use crate::graph::{normalize, DegreeSequence, Edge, Graph};
use crate::logspace::choose2;
use crate::paths::{havel_hakimi_edges, pair_at};

/// Retries of plain stub matching before the swap-chain fallback.
pub const DEFAULT_CONFIG_RETRIES: usize = 50;

/// Accepted double-edge swaps per edge in the fallback sampler.
const SWAPS_PER_EDGE: usize = 10;

/// A reproducible random stream: ChaCha8 seeded from `seed`, on stream
/// `stream`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, stream: 0 }
    }

    /// Independent stream for work item `index`.
    pub fn substream(&self, index: u64) -> Self {
        RngStream {
            seed: self.seed,
            stream: self.stream.wrapping_add(index).wrapping_add(1),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Preferential attachment from a complete seed graph on `m + 1` vertices;
/// every later vertex joins `m` distinct existing vertices, each picked with
/// probability proportional to its current degree.
pub fn gen_ba<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    if m == 0 || n <= m {
        return Err(FiberError::input(format!(
            "Barabási–Albert needs n > m >= 1, got n = {n}, m = {m}"
        )));
    }
    let seed_size = m + 1;
    let mut edges: Vec<Edge> = Vec::with_capacity(choose2(seed_size as u64) as usize + (n - seed_size) * m);
    // Every edge contributes both endpoints, so a uniform draw from this
    // list is a degree-proportional draw over vertices.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for i in 0..seed_size {
        for j in i + 1..seed_size {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    let mut targets: Vec<usize> = Vec::with_capacity(m);
    for v in seed_size..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    Graph::new(n, edges)
}

/// Uniform simple graph with exactly `m_edges` edges.
pub fn gen_er_gnm<R: Rng + ?Sized>(n: usize, m_edges: usize, rng: &mut R) -> Result<Graph> {
    let cap = choose2(n as u64) as usize;
    if m_edges > cap {
        return Err(FiberError::input(format!(
            "{m_edges} edges requested but only {cap} pairs exist on {n} vertices"
        )));
    }
    let picks = rand::seq::index::sample(rng, cap, m_edges);
    let mut idx = picks.into_vec();
    idx.sort_unstable();
    Graph::new(n, idx.into_iter().map(|i| pair_at(n, i)))
}

fn try_stub_matching<R: Rng + ?Sized>(stubs: &mut [usize], rng: &mut R) -> Option<Vec<Edge>> {
    stubs.shuffle(rng);
    let mut seen = HashSet::with_capacity(stubs.len() / 2);
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0], pair[1]);
        if u == v || !seen.insert(normalize(u, v)) {
            return None;
        }
        edges.push(normalize(u, v));
    }
    Some(edges)
}

/// Degree-preserving double-edge swaps; only swaps that keep the graph simple
/// are accepted. Stops after `target` acceptances or `100 * target` attempts.
fn swap_randomize<R: Rng + ?Sized>(edges: &mut [Edge], target: usize, rng: &mut R) {
    if edges.len() < 2 {
        return;
    }
    let mut present: HashSet<Edge> = edges.iter().copied().collect();
    let mut accepted = 0;
    let max_attempts = target.saturating_mul(100);
    for _ in 0..max_attempts {
        if accepted == target {
            break;
        }
        let i = rng.gen_range(0..edges.len());
        let k = rng.gen_range(0..edges.len());
        if i == k {
            continue;
        }
        let (a, b) = edges[i];
        let (mut c, mut d) = edges[k];
        if rng.gen::<bool>() {
            std::mem::swap(&mut c, &mut d);
        }
        // (a,b),(c,d) -> (a,d),(c,b)
        if a == d || c == b {
            continue;
        }
        let (e1, e2) = (normalize(a, d), normalize(c, b));
        if present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&edges[i]);
        present.remove(&edges[k]);
        present.insert(e1);
        present.insert(e2);
        edges[i] = e1;
        edges[k] = e2;
        accepted += 1;
    }
}

/// Approximately uniform simple graph with degree sequence `d`.
///
/// Stub matching is tried up to `max_retries` times; if every attempt hits a
/// loop or multi-edge, a Havel–Hakimi realization is randomized with
/// `10 * |E|` accepted double-edge swaps. The swap chain is not exactly
/// uniform.
pub fn gen_config_uniform<R: Rng + ?Sized>(
    d: &DegreeSequence,
    rng: &mut R,
    max_retries: usize,
) -> Result<Graph> {
    let n = d.n();
    let mut edges = havel_hakimi_edges(d.degrees())?;
    let mut stubs: Vec<usize> = d
        .degrees()
        .iter()
        .enumerate()
        .flat_map(|(v, &k)| std::iter::repeat_n(v, k))
        .collect();
    for _ in 0..max_retries {
        if let Some(matched) = try_stub_matching(&mut stubs, rng) {
            return Graph::new(n, matched);
        }
    }
    let target = SWAPS_PER_EDGE * edges.len();
    swap_randomize(&mut edges, target, rng);
    Graph::new(n, edges)
}
