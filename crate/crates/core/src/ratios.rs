//! Step ratios `|c(x_i)| / |c(x_{i-1})|` for consecutive prefix graphs of a
//! construction path.
//!
//! Edge-count and covariate-mixing ratios are exact. The degree-distribution
//! ratio uses a configuration-model estimate of the expected degree mixing
//! matrix, and the degree-mixing ratio uses a product-of-binomials estimate of
//! how neighbor degrees are spread inside a class.

use serde::{Deserialize, Serialize};

use crate::error::{FiberError, Result};
use crate::graph::{DegreeDistribution, Edge, GraphState};
use crate::logspace::{choose2, ln_binomial};

/// Normalization of the expected degree-mixing entry.
///
/// `Standard` divides stub products by the total stub count `sum_z z D_z`.
/// `AsPrinted` divides by half of it, which doubles every expectation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NewmanMode {
    #[default]
    Standard,
    AsPrinted,
}

impl NewmanMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            NewmanMode::Standard => "standard",
            NewmanMode::AsPrinted => "as-printed",
        }
    }
}

impl std::str::FromStr for NewmanMode {
    type Err = FiberError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(NewmanMode::Standard),
            "as-printed" => Ok(NewmanMode::AsPrinted),
            other => Err(FiberError::input(format!("unknown Newman mode `{other}`"))),
        }
    }
}

/// One step of a path: `cur` is `prev` plus `edge`. `step` is 1-based.
#[derive(Clone, Copy, Debug)]
pub struct StepContext<'a> {
    pub step: usize,
    pub prev: &'a GraphState,
    pub cur: &'a GraphState,
    pub edge: Edge,
}

impl<'a> StepContext<'a> {
    pub fn new(step: usize, prev: &'a GraphState, cur: &'a GraphState, edge: Edge) -> Self {
        debug_assert_eq!(prev.edge_count() + 1, cur.edge_count());
        debug_assert!(cur.neighbors(edge.0).contains(&edge.1));
        debug_assert!(!prev.neighbors(edge.0).contains(&edge.1));
        StepContext {
            step,
            prev,
            cur,
            edge,
        }
    }
}

/// Walks a path keeping a lagging copy of the graph, so each step sees both
/// prefix graphs.
pub(crate) struct PathWalker {
    prev: GraphState,
    cur: GraphState,
    step: usize,
}

impl PathWalker {
    pub(crate) fn new(n: usize) -> Self {
        PathWalker {
            prev: GraphState::new(n),
            cur: GraphState::new(n),
            step: 0,
        }
    }

    /// Adds `edge`, evaluates `f` on the step, then brings `prev` level.
    pub(crate) fn advance<T>(
        &mut self,
        edge: Edge,
        f: impl FnOnce(&StepContext<'_>) -> Result<T>,
    ) -> Result<T> {
        self.step += 1;
        self.cur.add_edge(edge.0, edge.1);
        let out = f(&StepContext::new(self.step, &self.prev, &self.cur, edge));
        self.prev.add_edge(edge.0, edge.1);
        out
    }
}

/// `(C(n,2) - x_prev) / x_cur`.
pub fn ratio_edges(n: usize, x_prev: usize, x_cur: usize) -> Result<f64> {
    let cap = choose2(n as u64) as usize;
    if x_cur != x_prev + 1 || x_cur > cap {
        return Err(FiberError::input(format!(
            "edge step {x_prev} -> {x_cur} invalid for n = {n}"
        )));
    }
    Ok((cap - x_prev) as f64 / x_cur as f64)
}

fn newman(x: usize, dx: usize, y: usize, dy: usize, stubs: usize, mode: NewmanMode) -> f64 {
    if stubs == 0 {
        return 0.0;
    }
    let norm = match mode {
        NewmanMode::Standard => stubs as f64,
        NewmanMode::AsPrinted => 0.5 * stubs as f64,
    };
    let v = (x * dx) as f64 * (y * dy) as f64 / norm;
    if x == y {
        0.5 * v
    } else {
        v
    }
}

/// Expected number of edges between degree classes `x` and `y` given the
/// distribution; zero when there are no stubs.
pub fn expected_dmm_entry(d: &DegreeDistribution, x: usize, y: usize, mode: NewmanMode) -> f64 {
    newman(x, d.count(x), y, d.count(y), d.stub_total(), mode)
}

fn expected_in_state(g: &GraphState, x: usize, y: usize, mode: NewmanMode) -> f64 {
    newman(x, g.dist_count(x), y, g.dist_count(y), g.stub_total(), mode)
}

/// Pairs available between the classes of degrees `a` and `b`.
fn class_pairs(g: &GraphState, a: usize, b: usize) -> u64 {
    if a == b {
        choose2(g.dist_count(a) as u64)
    } else {
        g.dist_count(a) as u64 * g.dist_count(b) as u64
    }
}

/// Degree-distribution step ratio `(beta(prev) - alpha(prev)) / alpha(cur)`.
pub fn ratio_degdist(ctx: &StepContext<'_>, mode: NewmanMode) -> Result<f64> {
    let (l, j) = ctx.edge;
    let (a, b) = (ctx.prev.degree(l), ctx.prev.degree(j));
    let beta = class_pairs(ctx.prev, a, b) as f64;
    let alpha_prev = expected_in_state(ctx.prev, a, b, mode);
    let (a1, b1) = (ctx.cur.degree(l), ctx.cur.degree(j));
    let alpha_cur = expected_in_state(ctx.cur, a1, b1, mode);
    let numerator = beta - alpha_prev;
    if numerator <= 0.0 {
        return Err(FiberError::estimation(
            ctx.step,
            format!(
                "nonpositive numerator {numerator} (pairs {beta}, expected edges {alpha_prev}) \
                 for degrees ({a}, {b})"
            ),
        ));
    }
    if alpha_cur <= 0.0 {
        return Err(FiberError::estimation(
            ctx.step,
            format!("zero expected edges for degrees ({a1}, {b1})"),
        ));
    }
    Ok(numerator / alpha_cur)
}

/// Covariate-mixing step ratio for the block being filled.
pub fn ratio_mixing(
    category_counts: &[usize],
    prev_entry: u64,
    cur_entry: u64,
    same_category: bool,
    cat_l: usize,
    cat_j: usize,
) -> Result<f64> {
    if cur_entry == 0 || cur_entry != prev_entry + 1 {
        return Err(FiberError::input(format!(
            "mixing step {prev_entry} -> {cur_entry} invalid"
        )));
    }
    let (ml, mj) = (category_counts[cat_l] as u64, category_counts[cat_j] as u64);
    let pairs = if same_category { choose2(ml) } else { ml * mj };
    if pairs < prev_entry {
        return Err(FiberError::input(format!(
            "block entry {prev_entry} exceeds its {pairs} pairs"
        )));
    }
    Ok((pairs - prev_entry) as f64 / cur_entry as f64)
}

fn ln_choose_checked(top: i64, k: i64, step: usize) -> Result<f64> {
    if top < 0 || k < 0 || k > top {
        return Err(FiberError::estimation(
            step,
            format!("binomial C({top}, {k}) undefined"),
        ));
    }
    Ok(ln_binomial(top as u64, k as u64))
}

/// One side of the unequal-degree factor: how vertex `v`'s neighbor-degree
/// profile sits among the stubs of its class. `other_degree` is the degree
/// of the far endpoint, whose class loses `s` stubs.
fn ln_side(g: &GraphState, v: usize, other_degree: usize, s: i64, step: usize) -> Result<f64> {
    let dv = g.degree(v);
    let mut ln = 0.0;
    for (z, count) in g.neighbor_degree_profile(v) {
        let ind = if z == other_degree { s } else { 0 };
        ln += ln_choose_checked(g.dmm_stub(dv, z) as i64 - ind, count as i64 - ind, step)?;
    }
    let class_stubs = (dv * g.dist_count(dv)) as i64;
    ln -= ln_choose_checked(class_stubs - s, dv as i64 - s, step)?;
    Ok(ln)
}

/// `ln beta^(s)` for edge `(l, j)` evaluated in `g`. Degrees, neighbor
/// profiles and `DMM'` are all read from `g`; `s = 1` removes the edge's own
/// stubs from the counts.
pub fn ln_beta_in(g: &GraphState, edge: Edge, s: u8, step: usize) -> Result<f64> {
    let (l, j) = edge;
    let s = i64::from(s);
    let (dl, dj) = (g.degree(l), g.degree(j));
    if dl != dj {
        return Ok(ln_side(g, l, dj, s, step)? + ln_side(g, j, dl, s, step)?);
    }
    let d = dl;
    let mut joint = g.neighbor_degree_profile(l);
    joint.extend(g.neighbor_degree_profile(j));
    joint.sort_unstable();
    let mut ln = 0.0;
    let mut idx = 0;
    while idx < joint.len() {
        let z = joint[idx].0;
        let mut count = 0;
        while idx < joint.len() && joint[idx].0 == z {
            count += joint[idx].1;
            idx += 1;
        }
        let ind = if z == d { s } else { 0 };
        ln += ln_choose_checked(g.dmm_stub(d, z) as i64 - ind, count as i64 - 2 * ind, step)?;
    }
    let class_stubs = (d * g.dist_count(d)) as i64;
    ln -= ln_choose_checked(class_stubs - s, 2 * d as i64 - 2 * s, step)?;
    Ok(ln)
}

/// `beta^(s)` for the step: `s = 0` reads the previous graph, `s = 1` the
/// current one.
pub fn beta_factor(ctx: &StepContext<'_>, s: u8) -> Result<f64> {
    let g = if s == 0 { ctx.prev } else { ctx.cur };
    ln_beta_in(g, ctx.edge, s, ctx.step).map(f64::exp)
}

/// Natural log of the degree-mixing step ratio
/// `[(gamma - alpha) beta0(prev)] / [DMM_cur beta1(cur)]`.
pub fn ln_ratio_degmix(ctx: &StepContext<'_>) -> Result<f64> {
    let (l, j) = ctx.edge;
    let (a, b) = (ctx.prev.degree(l), ctx.prev.degree(j));
    let gamma = class_pairs(ctx.prev, a, b);
    let alpha = ctx.prev.dmm(a, b);
    if gamma <= alpha {
        return Err(FiberError::estimation(
            ctx.step,
            format!("no free pairs between degree classes ({a}, {b})"),
        ));
    }
    let (a1, b1) = (ctx.cur.degree(l), ctx.cur.degree(j));
    let realized = ctx.cur.dmm(a1, b1);
    if realized == 0 {
        return Err(FiberError::estimation(
            ctx.step,
            format!("empty degree mixing entry ({a1}, {b1})"),
        ));
    }
    let beta0 = ln_beta_in(ctx.prev, ctx.edge, 0, ctx.step)?;
    let beta1 = ln_beta_in(ctx.cur, ctx.edge, 1, ctx.step)?;
    Ok(((gamma - alpha) as f64).ln() + beta0 - (realized as f64).ln() - beta1)
}

pub fn ratio_degmix(ctx: &StepContext<'_>) -> Result<f64> {
    ln_ratio_degmix(ctx).map(f64::exp)
}
