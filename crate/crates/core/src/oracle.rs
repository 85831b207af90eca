//! Exact fiber sizes by visiting every labeled simple graph on `n <= 7`
//! vertices (up to `2^21` graphs).

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FiberError, Result};
use crate::graph::{CovariateAssignment, DegreeDistribution, DegreeMixingMatrix, DegreeSequence, MixingMatrix};
use crate::paths::pair_at;
use crate::property::{PropertyKind, PropertyValue};

pub const ORACLE_MAX_N: usize = 7;

/// Graphs handed to one worker at a time.
const CHUNK: u64 = 1 << 14;

/// Exact counts keyed by the canonical property encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberTable {
    pub kind: PropertyKind,
    pub n: usize,
    pub counts: BTreeMap<String, u64>,
}

impl FiberTable {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Property values with a nonempty fiber, with their sizes.
    pub fn entries(&self) -> impl Iterator<Item = Result<(PropertyValue, u64)>> + '_ {
        self.counts
            .iter()
            .map(|(k, &c)| PropertyValue::from_key(self.kind, k).map(|v| (v, c)))
    }
}

/// Small integer fingerprint of a property value, cheap to build per graph.
type RawKey = Vec<u32>;

struct Enumerator<'a> {
    n: usize,
    kind: PropertyKind,
    pairs: Vec<(usize, usize)>,
    covariates: Option<&'a CovariateAssignment>,
}

impl Enumerator<'_> {
    fn raw_key(&self, mask: u64) -> RawKey {
        let n = self.n;
        let mut adj = [0u8; ORACLE_MAX_N];
        let mut bits = mask;
        while bits != 0 {
            let (u, v) = self.pairs[bits.trailing_zeros() as usize];
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
            bits &= bits - 1;
        }
        let deg = |v: usize| adj[v].count_ones();
        match self.kind {
            PropertyKind::Edges => vec![mask.count_ones()],
            PropertyKind::DegreeSequence => (0..n).map(deg).collect(),
            PropertyKind::DegreeDistribution => {
                let mut counts = vec![0u32; n];
                for v in 0..n {
                    counts[deg(v) as usize] += 1;
                }
                counts
            }
            PropertyKind::Mixing => {
                let a = self.covariates.expect("checked before enumeration");
                let q = a.q();
                let mut entries = vec![0u32; q * q];
                let mut bits = mask;
                while bits != 0 {
                    let (u, v) = self.pairs[bits.trailing_zeros() as usize];
                    let (cu, cv) = (a.label(u), a.label(v));
                    entries[cu.min(cv) * q + cu.max(cv)] += 1;
                    bits &= bits - 1;
                }
                entries
            }
            PropertyKind::DegreeMixing => {
                // Dense upper triangle over degrees 0..n.
                let mut entries = vec![0u32; n * n];
                let mut bits = mask;
                while bits != 0 {
                    let (u, v) = self.pairs[bits.trailing_zeros() as usize];
                    let (du, dv) = (deg(u) as usize, deg(v) as usize);
                    entries[du.min(dv) * n + du.max(dv)] += 1;
                    bits &= bits - 1;
                }
                entries
            }
        }
    }

    fn decode(&self, raw: &[u32]) -> Result<PropertyValue> {
        let as_usize = |xs: &[u32]| xs.iter().map(|&x| x as usize).collect::<Vec<_>>();
        Ok(match self.kind {
            PropertyKind::Edges => PropertyValue::Edges(raw[0] as usize),
            PropertyKind::DegreeSequence => {
                PropertyValue::DegreeSequence(DegreeSequence::new(as_usize(raw))?)
            }
            PropertyKind::DegreeDistribution => {
                PropertyValue::DegreeDistribution(DegreeDistribution::from_counts(as_usize(raw))?)
            }
            PropertyKind::Mixing => {
                let q = self.covariates.map_or(0, |a| a.q());
                let mut mm = MixingMatrix::zeros(q);
                for k in 0..q {
                    for l in k..q {
                        mm.set(k, l, u64::from(raw[k * q + l]));
                    }
                }
                PropertyValue::Mixing(mm)
            }
            PropertyKind::DegreeMixing => {
                let n = self.n;
                PropertyValue::DegreeMixing(DegreeMixingMatrix::from_triples(
                    (0..n).flat_map(|k| (k..n).map(move |l| (k, l, u64::from(raw[k * n + l])))),
                ))
            }
        })
    }
}

/// Tallies property `kind` over all `2^C(n,2)` labeled graphs on `n`
/// vertices. Mixing needs a covariate assignment on the same `n` vertices.
pub fn enumerate_fibers(
    n: usize,
    kind: PropertyKind,
    covariates: Option<&CovariateAssignment>,
) -> Result<FiberTable> {
    if n > ORACLE_MAX_N {
        return Err(FiberError::OracleLimit {
            n,
            max: ORACLE_MAX_N,
        });
    }
    if kind == PropertyKind::Mixing {
        match covariates {
            None => return Err(FiberError::input("mixing needs a covariate assignment")),
            Some(a) if a.n() != n => {
                return Err(FiberError::input(format!(
                    "covariates cover {} vertices, expected {n}",
                    a.n()
                )))
            }
            _ => {}
        }
    }
    let slots = n * n.saturating_sub(1) / 2;
    let e = Enumerator {
        n,
        kind,
        pairs: (0..slots).map(|i| pair_at(n, i)).collect(),
        covariates,
    };
    let total: u64 = 1 << slots;
    let chunks = total.div_ceil(CHUNK);
    let raw: HashMap<RawKey, u64> = (0..chunks)
        .into_par_iter()
        .fold(HashMap::new, |mut acc, c| {
            for mask in c * CHUNK..((c + 1) * CHUNK).min(total) {
                *acc.entry(e.raw_key(mask)).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let mut counts = BTreeMap::new();
    for (k, c) in raw {
        counts.insert(e.decode(&k)?.key(), c);
    }
    Ok(FiberTable { kind, n, counts })
}

/// Exact fiber size of `value`; zero when no graph attains it.
pub fn exact_count(table: &FiberTable, value: &PropertyValue) -> u64 {
    debug_assert_eq!(table.kind, value.kind());
    table.counts.get(&value.key()).copied().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logspace::choose2;

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn edge_table_n3() {
        let t = enumerate_fibers(3, PropertyKind::Edges, None).unwrap();
        let expect: BTreeMap<String, u64> =
            [("0", 1), ("1", 3), ("2", 3), ("3", 1)].map(|(k, v)| (k.to_string(), v)).into();
        assert_eq!(t.counts, expect);
        assert_eq!(exact_count(&t, &PropertyValue::Edges(2)), 3);
        assert_eq!(exact_count(&t, &PropertyValue::Edges(4)), 0);
    }

    #[test]
    fn edge_tables_are_binomial() {
        for n in 0..=6 {
            let t = enumerate_fibers(n, PropertyKind::Edges, None).unwrap();
            let cap = choose2(n as u64);
            assert_eq!(t.total(), 1 << cap);
            for x in 0..=cap {
                assert_eq!(exact_count(&t, &PropertyValue::Edges(x as usize)), binomial(cap, x));
            }
        }
    }

    #[test]
    fn small_degree_tables() {
        let t = enumerate_fibers(4, PropertyKind::DegreeSequence, None).unwrap();
        let matching = PropertyValue::DegreeSequence(DegreeSequence::regular(4, 1).unwrap());
        assert_eq!(exact_count(&t, &matching), 3);
        let t = enumerate_fibers(3, PropertyKind::DegreeDistribution, None).unwrap();
        let d = DegreeDistribution::from_counts(vec![1, 2]).unwrap();
        assert_eq!(exact_count(&t, &PropertyValue::DegreeDistribution(d)), 3);
        let t = enumerate_fibers(2, PropertyKind::DegreeDistribution, None).unwrap();
        assert_eq!(t.counts.len(), 2);
        assert!(t.counts.values().all(|&c| c == 1));
        let t = enumerate_fibers(4, PropertyKind::DegreeMixing, None).unwrap();
        let tri = DegreeMixingMatrix::from_triples([(2, 2, 3)]);
        assert_eq!(exact_count(&t, &PropertyValue::DegreeMixing(tri)), 4);
        assert_eq!(t.total(), 64);
    }

    #[test]
    fn distribution_and_sequence_tables_agree() {
        // Every sequence with the same distribution has the same fiber size,
        // and the distribution fiber is the sum over its arrangements.
        let n = 5;
        let seqs = enumerate_fibers(n, PropertyKind::DegreeSequence, None).unwrap();
        let dists = enumerate_fibers(n, PropertyKind::DegreeDistribution, None).unwrap();
        let mut summed: HashMap<String, (u64, u64, usize)> = HashMap::new();
        for item in seqs.entries() {
            let (v, c) = item.unwrap();
            let PropertyValue::DegreeSequence(d) = v else { unreachable!() };
            let key = PropertyValue::DegreeDistribution(d.distribution()).key();
            let slot = summed.entry(key).or_insert((0, c, 0));
            assert_eq!(slot.1, c);
            slot.0 += c;
            slot.2 += 1;
        }
        for (key, (sum, per_seq, arrangements)) in summed {
            let total = dists.counts[&key];
            assert_eq!(total, sum);
            assert_eq!(total % per_seq, 0);
            assert_eq!((total / per_seq) as usize, arrangements);
        }
    }

    #[test]
    fn mixing_table() {
        let a = CovariateAssignment::new(vec![0, 0, 1, 1], 2).unwrap();
        let t = enumerate_fibers(4, PropertyKind::Mixing, Some(&a)).unwrap();
        let mm = MixingMatrix::from_rows(&[vec![0, 2], vec![2, 0]]).unwrap();
        assert_eq!(exact_count(&t, &PropertyValue::Mixing(mm)), 6);
        assert!(enumerate_fibers(4, PropertyKind::Mixing, None).is_err());
    }

    #[test]
    fn size_limit() {
        assert!(matches!(
            enumerate_fibers(8, PropertyKind::Edges, None),
            Err(FiberError::OracleLimit { n: 8, max: 7 })
        ));
    }
}
