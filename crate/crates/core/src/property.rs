//! Property kinds and values, with a canonical text encoding used as a map key
//! and as input to the record digest.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FiberError, Result};
use crate::graph::{
    degree_distribution, degree_mixing_matrix, degree_sequence, mixing_matrix, phi_edges,
    CovariateAssignment, DegreeDistribution, DegreeMixingMatrix, DegreeSequence, Graph,
    MixingMatrix,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyKind {
    Edges,
    DegreeSequence,
    DegreeDistribution,
    Mixing,
    DegreeMixing,
}

impl PropertyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PropertyKind::Edges => "edges",
            PropertyKind::DegreeSequence => "degree_sequence",
            PropertyKind::DegreeDistribution => "degree_distribution",
            PropertyKind::Mixing => "mixing",
            PropertyKind::DegreeMixing => "degree_mixing",
        }
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PropertyValue {
    Edges(usize),
    DegreeSequence(DegreeSequence),
    DegreeDistribution(DegreeDistribution),
    Mixing(MixingMatrix),
    DegreeMixing(DegreeMixingMatrix),
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| FiberError::input(format!("bad key component `{t}`")))
        })
        .collect()
}

impl PropertyValue {
    pub fn kind(&self) -> PropertyKind {
        match self {
            PropertyValue::Edges(_) => PropertyKind::Edges,
            PropertyValue::DegreeSequence(_) => PropertyKind::DegreeSequence,
            PropertyValue::DegreeDistribution(_) => PropertyKind::DegreeDistribution,
            PropertyValue::Mixing(_) => PropertyKind::Mixing,
            PropertyValue::DegreeMixing(_) => PropertyKind::DegreeMixing,
        }
    }

    /// Evaluates property `kind` on `g`. Mixing needs a covariate assignment.
    pub fn of_graph(
        kind: PropertyKind,
        g: &Graph,
        covariates: Option<&CovariateAssignment>,
    ) -> Result<Self> {
        Ok(match kind {
            PropertyKind::Edges => PropertyValue::Edges(phi_edges(g)),
            PropertyKind::DegreeSequence => PropertyValue::DegreeSequence(degree_sequence(g)),
            PropertyKind::DegreeDistribution => {
                PropertyValue::DegreeDistribution(degree_distribution(g))
            }
            PropertyKind::Mixing => {
                let a = covariates
                    .ok_or_else(|| FiberError::input("mixing needs a covariate assignment"))?;
                PropertyValue::Mixing(mixing_matrix(g, a)?)
            }
            PropertyKind::DegreeMixing => PropertyValue::DegreeMixing(degree_mixing_matrix(g)),
        })
    }

    /// Canonical text form. Lists are comma separated, matrix rows and
    /// degree-mixing triples are `;` separated.
    pub fn key(&self) -> String {
        match self {
            PropertyValue::Edges(x) => x.to_string(),
            PropertyValue::DegreeSequence(d) => join(d.degrees(), ","),
            PropertyValue::DegreeDistribution(d) => join(d.counts(), ","),
            PropertyValue::Mixing(mm) => join(mm.rows().iter().map(|r| join(r, ",")), ";"),
            PropertyValue::DegreeMixing(m) => {
                join(m.triples().map(|(k, l, c)| format!("{k},{l},{c}")), ";")
            }
        }
    }

    pub fn from_key(kind: PropertyKind, key: &str) -> Result<Self> {
        Ok(match kind {
            PropertyKind::Edges => PropertyValue::Edges(
                key.parse()
                    .map_err(|_| FiberError::input(format!("bad edge count `{key}`")))?,
            ),
            PropertyKind::DegreeSequence => {
                PropertyValue::DegreeSequence(DegreeSequence::new(parse_list(key)?)?)
            }
            PropertyKind::DegreeDistribution => {
                PropertyValue::DegreeDistribution(DegreeDistribution::from_counts(parse_list(key)?)?)
            }
            PropertyKind::Mixing => {
                let rows = key
                    .split(';')
                    .map(parse_list::<u64>)
                    .collect::<Result<Vec<_>>>()?;
                PropertyValue::Mixing(MixingMatrix::from_rows(&rows)?)
            }
            PropertyKind::DegreeMixing => {
                let mut triples = Vec::new();
                for part in key.split(';').filter(|p| !p.is_empty()) {
                    match parse_list::<u64>(part)?.as_slice() {
                        &[k, l, c] => triples.push((k as usize, l as usize, c)),
                        _ => return Err(FiberError::input(format!("bad triple `{part}`"))),
                    }
                }
                PropertyValue::DegreeMixing(DegreeMixingMatrix::from_triples(triples))
            }
        })
    }

    /// Total number of edges any graph with this value has.
    pub fn edge_total(&self) -> usize {
        match self {
            PropertyValue::Edges(x) => *x,
            PropertyValue::DegreeSequence(d) => d.degrees().iter().sum::<usize>() / 2,
            PropertyValue::DegreeDistribution(d) => d.edge_total(),
            PropertyValue::Mixing(mm) => mm.edge_total() as usize,
            PropertyValue::DegreeMixing(m) => m.edge_total() as usize,
        }
    }
}
