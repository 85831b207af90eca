//! Reproduction harness: the edge-count table, the regular-graph comparison
//! and the random-model experiments. Every experiment returns a report that
//! renders to CSV (one row per item) or JSON.
//!
//! Sample `i` of a run with seed `s` draws from substreams of `s` derived from
//! `i` alone, and results are ordered by `i`, so thread scheduling never
//! changes the output.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FiberError, Result};
use crate::fiber::{
    closed_form_edges, count_degdist_fiber, count_degmix_fiber, count_degseq_fiber,
    count_edges_fiber, estimate_distinct_dmm, liebenau_regular_reference, ln_perfect_matchings,
};
use crate::generators::{gen_ba, gen_config_uniform, gen_er_gnm, RngStream, DEFAULT_CONFIG_RETRIES};
use crate::graph::{degree_distribution, degree_mixing_matrix, degree_sequence, phi_edges, DegreeSequence};
use crate::logspace::choose2;
use crate::oracle::{enumerate_fibers, exact_count, ORACLE_MAX_N};
use crate::property::{PropertyKind, PropertyValue};
use crate::ratios::{ratio_edges, NewmanMode};

fn log10(ln: f64) -> f64 {
    ln / std::f64::consts::LN_10
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| FiberError::Io(std::io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| FiberError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Mean and sample standard deviation; `sd` is 0 for fewer than two values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let count = v.len();
        if count == 0 {
            return Stats::default();
        }
        let mean = v.iter().sum::<f64>() / count as f64;
        let sd = if count < 2 {
            0.0
        } else {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        };
        Stats { count, mean, sd }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeTableRow {
    pub x: usize,
    /// `None` for `x = 0`, which has no preceding step.
    pub ln_ratio: Option<f64>,
    pub ln_recursive: f64,
    pub ln_closed_form: f64,
}

pub const EDGE_TABLE_HEADER: [&str; 7] = [
    "x",
    "ln_ratio",
    "ln_count_recursive",
    "ln_count_closed_form",
    "log10_ratio",
    "log10_count_recursive",
    "log10_count_closed_form",
];

/// Rows `x = 0..=x_max` of step ratio, recursive count and closed form.
pub fn table_edges(n: usize, x_max: usize) -> Result<Vec<EdgeTableRow>> {
    let cap = choose2(n as u64) as usize;
    if x_max > cap {
        return Err(FiberError::input(format!(
            "x_max = {x_max} exceeds the {cap} pairs on {n} vertices"
        )));
    }
    let mut ln_recursive = 0.0;
    let mut rows = Vec::with_capacity(x_max + 1);
    for x in 0..=x_max {
        let ln_ratio = if x == 0 {
            None
        } else {
            let r = ratio_edges(n, x - 1, x)?.ln();
            ln_recursive += r;
            Some(r)
        };
        rows.push(EdgeTableRow {
            x,
            ln_ratio,
            ln_recursive,
            ln_closed_form: closed_form_edges(n, x).ln_or_neg_inf(),
        });
    }
    debug_assert_eq!(
        rows.last().map(|r| r.ln_recursive),
        Some(count_edges_fiber(n, x_max)?.ln())
    );
    Ok(rows)
}

pub fn edge_table_csv(rows: &[EdgeTableRow]) -> Result<String> {
    to_csv(
        &EDGE_TABLE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.x.to_string(),
                opt(r.ln_ratio),
                r.ln_recursive.to_string(),
                r.ln_closed_form.to_string(),
                opt(r.ln_ratio.map(log10)),
                log10(r.ln_recursive).to_string(),
                log10(r.ln_closed_form).to_string(),
            ]
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularRow {
    pub n: usize,
    pub d: usize,
    /// Per-sequence recursive estimate.
    pub ln_recursive: Option<f64>,
    pub ln_reference: Option<f64>,
    /// `|recursive - reference| / |reference|`.
    pub rel_diff: Option<f64>,
    /// Exact count where one is known: matchings, complete graphs, or
    /// exhaustive enumeration for small `n`.
    pub ln_exact: Option<f64>,
    pub note: String,
}

pub const REGULAR_HEADER: [&str; 10] = [
    "n",
    "d",
    "ln_recursive",
    "ln_reference",
    "rel_diff",
    "ln_exact",
    "log10_recursive",
    "log10_reference",
    "log10_exact",
    "note",
];

fn exact_regular(n: usize, d: usize) -> Result<Option<f64>> {
    if d + 1 == n {
        return Ok(Some(0.0));
    }
    if n <= ORACLE_MAX_N {
        let table = enumerate_fibers(n, PropertyKind::DegreeSequence, None)?;
        let value = PropertyValue::DegreeSequence(DegreeSequence::regular(n, d)?);
        let c = exact_count(&table, &value);
        return Ok((c > 0).then(|| (c as f64).ln()));
    }
    Ok((d == 1).then(|| ln_perfect_matchings(n)))
}

fn regular_row(n: usize, d: usize, mode: NewmanMode) -> Result<RegularRow> {
    let mut row = RegularRow {
        n,
        d,
        ln_recursive: None,
        ln_reference: None,
        rel_diff: None,
        ln_exact: None,
        note: String::new(),
    };
    if (n * d) % 2 == 1 {
        row.note = "skipped: n*d odd".into();
        return Ok(row);
    }
    if d == 0 || d >= n {
        row.note = "skipped: need 1 <= d <= n-1".into();
        return Ok(row);
    }
    let seq = DegreeSequence::regular(n, d)?;
    match count_degseq_fiber(&seq, mode) {
        Ok(est) => row.ln_recursive = Some(est.ln()),
        Err(e) => row.note = format!("recursive estimate failed: {e}"),
    }
    row.ln_reference = liebenau_regular_reference(n, d)?.ln();
    if let (Some(r), Some(l)) = (row.ln_recursive, row.ln_reference) {
        row.rel_diff = Some((r - l).abs() / l.abs());
    }
    row.ln_exact = exact_regular(n, d)?;
    Ok(row)
}

/// One row per `(n, d)` pair, in input order.
pub fn regular_compare(ns: &[usize], ds: &[usize], mode: NewmanMode) -> Result<Vec<RegularRow>> {
    let pairs: Vec<(usize, usize)> = ns
        .iter()
        .flat_map(|&n| ds.iter().map(move |&d| (n, d)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(n, d)| regular_row(n, d, mode))
        .collect()
}

pub fn regular_csv(rows: &[RegularRow]) -> Result<String> {
    to_csv(
        &REGULAR_HEADER,
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.d.to_string(),
                opt(r.ln_recursive),
                opt(r.ln_reference),
                opt(r.rel_diff),
                opt(r.ln_exact),
                opt(r.ln_recursive.map(log10)),
                opt(r.ln_reference.map(log10)),
                opt(r.ln_exact.map(log10)),
                r.note.clone(),
            ]
        }),
    )
}

/// Shared parameters of the random-model experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExperimentParams {
    pub n: usize,
    /// Edges added per new vertex in the Barabási–Albert model.
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    pub mode: NewmanMode,
    /// Configuration-model draws per distribution in the diversity run.
    pub inner_samples: usize,
}

impl ExperimentParams {
    pub fn new(n: usize, samples: usize, seed: u64) -> Self {
        ExperimentParams {
            n,
            m: 1,
            samples,
            seed,
            mode: NewmanMode::Standard,
            inner_samples: 10,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(FiberError::input("need at least one sample"));
        }
        if self.inner_samples == 0 {
            return Err(FiberError::input("need at least one inner sample"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleFailure {
    pub sample: usize,
    pub reason: String,
}

/// A Barabási–Albert graph and its matched comparison graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedSample {
    pub sample: usize,
    pub edges: usize,
    pub ln_ba: f64,
    pub ln_other: f64,
}

impl PairedSample {
    /// `ln|c(BA)| - ln|c(other)|`.
    pub fn diff(&self) -> f64 {
        self.ln_ba - self.ln_other
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedReport {
    pub experiment: &'static str,
    /// Name of the comparison model.
    pub other: &'static str,
    pub params: ExperimentParams,
    pub records: Vec<PairedSample>,
    pub failures: Vec<SampleFailure>,
    pub ba: Stats,
    pub other_stats: Stats,
    pub diff: Stats,
}

impl PairedReport {
    fn assemble(
        experiment: &'static str,
        other: &'static str,
        params: ExperimentParams,
        results: Vec<Result<PairedSample>>,
    ) -> Self {
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for (sample, r) in results.into_iter().enumerate() {
            match r {
                Ok(rec) => records.push(rec),
                Err(e) => {
                    warn!("{experiment} sample {sample} failed: {e}");
                    failures.push(SampleFailure {
                        sample,
                        reason: e.to_string(),
                    });
                }
            }
        }
        PairedReport {
            experiment,
            other,
            params,
            ba: Stats::of(records.iter().map(|r| r.ln_ba)),
            other_stats: Stats::of(records.iter().map(|r| r.ln_other)),
            diff: Stats::of(records.iter().map(PairedSample::diff)),
            records,
            failures,
        }
    }

    pub fn header(&self) -> Vec<String> {
        let o = self.other;
        [
            "sample".to_string(),
            "edges".into(),
            "ln_ba".into(),
            format!("ln_{o}"),
            "ln_diff".into(),
            "log10_ba".into(),
            format!("log10_{o}"),
            "log10_diff".into(),
        ]
        .into()
    }

    pub fn to_csv(&self) -> Result<String> {
        let header = self.header();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        to_csv(
            &header,
            self.records.iter().map(|r| {
                vec![
                    r.sample.to_string(),
                    r.edges.to_string(),
                    r.ln_ba.to_string(),
                    r.ln_other.to_string(),
                    r.diff().to_string(),
                    log10(r.ln_ba).to_string(),
                    log10(r.ln_other).to_string(),
                    log10(r.diff()).to_string(),
                ]
            }),
        )
    }
}

/// Degree-distribution fibers of Barabási–Albert graphs against
/// uniform random graphs with the same edge count.
pub fn ba_er(params: ExperimentParams) -> Result<PairedReport> {
    params.validate()?;
    let stream = RngStream::new(params.seed);
    let results = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let ba = gen_ba(params.n, params.m, &mut stream.substream(2 * i as u64).rng())?;
            let edges = phi_edges(&ba);
            let er = gen_er_gnm(params.n, edges, &mut stream.substream(2 * i as u64 + 1).rng())?;
            Ok(PairedSample {
                sample: i,
                edges,
                ln_ba: count_degdist_fiber(&degree_distribution(&ba), params.mode)?.ln(),
                ln_other: count_degdist_fiber(&degree_distribution(&er), params.mode)?.ln(),
            })
        })
        .collect();
    Ok(PairedReport::assemble("ba_er", "er", params, results))
}

/// Degree-mixing fibers of Barabási–Albert graphs against configuration-model
/// graphs with the same degree sequence.
pub fn ba_conf(params: ExperimentParams) -> Result<PairedReport> {
    params.validate()?;
    let stream = RngStream::new(params.seed);
    let results = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let ba = gen_ba(params.n, params.m, &mut stream.substream(2 * i as u64).rng())?;
            let conf = gen_config_uniform(
                &degree_sequence(&ba),
                &mut stream.substream(2 * i as u64 + 1).rng(),
                DEFAULT_CONFIG_RETRIES,
            )?;
            Ok(PairedSample {
                sample: i,
                edges: phi_edges(&ba),
                ln_ba: count_degmix_fiber(&degree_mixing_matrix(&ba), params.n)?.ln(),
                ln_other: count_degmix_fiber(&degree_mixing_matrix(&conf), params.n)?.ln(),
            })
        })
        .collect();
    Ok(PairedReport::assemble("ba_conf", "conf", params, results))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiversitySample {
    pub sample: usize,
    pub edges: usize,
    pub ln_distinct: f64,
    pub ln_degdist_fiber: f64,
    pub mean_ln_degmix_fiber: f64,
    pub inner_used: usize,
    pub inner_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiversityReport {
    pub experiment: &'static str,
    pub params: ExperimentParams,
    pub records: Vec<DiversitySample>,
    pub failures: Vec<SampleFailure>,
    pub distinct: Stats,
}

pub const DIVERSITY_HEADER: [&str; 9] = [
    "sample",
    "edges",
    "ln_distinct_dmm",
    "log10_distinct_dmm",
    "ln_degdist_fiber",
    "mean_ln_degmix_fiber",
    "log10_degdist_fiber",
    "inner_used",
    "inner_failures",
];

impl DiversityReport {
    pub fn to_csv(&self) -> Result<String> {
        to_csv(
            &DIVERSITY_HEADER,
            self.records.iter().map(|r| {
                vec![
                    r.sample.to_string(),
                    r.edges.to_string(),
                    r.ln_distinct.to_string(),
                    log10(r.ln_distinct).to_string(),
                    r.ln_degdist_fiber.to_string(),
                    r.mean_ln_degmix_fiber.to_string(),
                    log10(r.ln_degdist_fiber).to_string(),
                    r.inner_used.to_string(),
                    r.inner_failures.to_string(),
                ]
            }),
        )
    }
}

/// Estimated number of distinct degree mixing matrices for the degree
/// distributions of Barabási–Albert graphs.
///
/// The configuration-model draws of sample `i` use seed `seed + i + 1` fed
/// through the same substream scheme.
pub fn diversity(params: ExperimentParams) -> Result<DiversityReport> {
    params.validate()?;
    let stream = RngStream::new(params.seed);
    let results: Vec<Result<DiversitySample>> = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let ba = gen_ba(params.n, params.m, &mut stream.substream(i as u64).rng())?;
            let d = degree_distribution(&ba);
            let inner_seed = params.seed.wrapping_add(i as u64 + 1);
            let est = estimate_distinct_dmm(&d, params.inner_samples, inner_seed, params.mode)?;
            Ok(DiversitySample {
                sample: i,
                edges: phi_edges(&ba),
                ln_distinct: est.log_count.ln_or_neg_inf(),
                ln_degdist_fiber: est.ln_degdist_fiber,
                mean_ln_degmix_fiber: est.mean_ln_degmix_fiber,
                inner_used: est.samples_used,
                inner_failures: est.failures,
            })
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (sample, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                warn!("diversity sample {sample} failed: {e}");
                failures.push(SampleFailure {
                    sample,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(DiversityReport {
        experiment: "diversity",
        params,
        distinct: Stats::of(records.iter().map(|r| r.ln_distinct)),
        records,
        failures,
    })
}
