use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MeasuredGraph;
use crate::rational::{self, int, ratio, Rational};

const REJECTION_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Cycle { n: usize },
    Path { n: usize },
    Complete { n: usize },
    Star { leaves: usize },
    Hypercube { d: usize },
    /// Uniform `k`-regular graph via the configuration model, conditioned on
    /// being simple and connected.
    RandomRegular { n: usize, k: usize, seed: u64 },
    /// A uniform random recursive tree plus each other edge with probability `p`.
    RandomConnected { n: usize, p: f64, seed: u64 },
    Gnp { n: usize, p: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    Counting,
    /// Counting measure normalized to total mass one.
    Probability,
    /// Independent `p/q` with `p ∈ 1..=12`, `q ∈ 1..=6`.
    Rationals { seed: u64 },
    Explicit {
        #[serde(with = "rational::serde_vec")]
        values: Vec<Rational>,
    },
}

pub fn generate(kind: &GraphKind, measure: &MeasureKind) -> Result<MeasuredGraph> {
    let (n, edges) = edges_of(kind)?;
    let m = match measure {
        MeasureKind::Counting => vec![int(1); n],
        MeasureKind::Probability => vec![ratio(1, n.max(1) as i64); n],
        MeasureKind::Rationals { seed } => random_measure(n, &mut ChaCha8Rng::seed_from_u64(*seed)),
        MeasureKind::Explicit { values } => values.clone(),
    };
    MeasuredGraph::from_edges(n, &edges, m)
}

/// Positive random rationals `p/q`, `p ∈ 1..=12`, `q ∈ 1..=6`.
pub fn random_measure<R: Rng>(n: usize, rng: &mut R) -> Vec<Rational> {
    (0..n)
        .map(|_| ratio(rng.random_range(1..=12), rng.random_range(1..=6)))
        .collect()
}

/// Edge list of a connected random graph: random recursive tree on a
/// shuffled vertex order, plus every other pair with probability `p`.
pub fn random_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let (u, v) = (order[i], order[rng.random_range(0..i)]);
        edges.push((u.min(v), u.max(v)));
    }
    let tree: std::collections::HashSet<(usize, usize)> = edges.iter().copied().collect();
    for u in 0..n {
        for v in u + 1..n {
            if !tree.contains(&(u, v)) && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges.sort_unstable();
    edges
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("edge probability must lie in [0, 1], got {p}")))
    }
}

fn edges_of(kind: &GraphKind) -> Result<(usize, Vec<(usize, usize)>)> {
    Ok(match *kind {
        GraphKind::Cycle { n } => {
            if n < 3 {
                return Err(Error::invalid("a cycle needs at least 3 vertices"));
            }
            (n, (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect())
        }
        GraphKind::Path { n } => (n, (1..n).map(|i| (i - 1, i)).collect()),
        GraphKind::Complete { n } => (n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()),
        GraphKind::Star { leaves } => (leaves + 1, (1..=leaves).map(|v| (0, v)).collect()),
        GraphKind::Hypercube { d } => {
            if d > 20 {
                return Err(Error::invalid("hypercube dimension above 20"));
            }
            let n = 1usize << d;
            let edges = (0..n)
                .flat_map(|u| (0..d).map(move |b| (u, u ^ (1 << b))).filter(|(u, v)| u < v))
                .collect();
            (n, edges)
        }
        GraphKind::RandomRegular { n, k, seed } => (n, random_regular(n, k, seed)?),
        GraphKind::RandomConnected { n, p, seed } => {
            check_probability(p)?;
            (n, random_connected(n, p, &mut ChaCha8Rng::seed_from_u64(seed)))
        }
        GraphKind::Gnp { n, p, seed } => {
            check_probability(p)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            (n, edges)
        }
    })
}

fn random_regular(n: usize, k: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if k >= n || (n * k) % 2 == 1 {
        return Err(Error::invalid(format!("no simple {k}-regular graph on {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    'attempt: for _ in 0..REJECTION_CAP {
        stubs.shuffle(&mut rng);
        let mut edges: Vec<(usize, usize)> = stubs
            .chunks_exact(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                continue 'attempt;
            }
        }
        if edges.iter().any(|(u, v)| u == v) {
            continue;
        }
        let g = MeasuredGraph::from_edges(n, &edges, vec![int(1); n])?;
        if n > 0 && !g.is_connected() {
            continue;
        }
        return Ok(edges);
    }
    Err(Error::invalid(format!(
        "random_regular: no simple connected sample within {REJECTION_CAP} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheeger::{cheeger_vertex, EnumerationConfig};

    #[test]
    fn named_graphs() {
        let c6 = generate(&GraphKind::Cycle { n: 6 }, &MeasureKind::Counting).unwrap();
        assert_eq!(c6.edge_count(), 6);
        assert_eq!(
            cheeger_vertex(&c6, &EnumerationConfig::default()).unwrap().value,
            ratio(2, 3)
        );
        let k4 = generate(&GraphKind::Complete { n: 4 }, &MeasureKind::Counting).unwrap();
        assert_eq!(cheeger_vertex(&k4, &EnumerationConfig::default()).unwrap().value, int(1));
        let q3 = generate(&GraphKind::Hypercube { d: 3 }, &MeasureKind::Probability).unwrap();
        assert_eq!(q3.edge_count(), 12);
        assert_eq!(*q3.total_measure(), int(1));
    }

    #[test]
    fn random_regular_is_connected_regular_and_seeded() {
        let kind = GraphKind::RandomRegular { n: 10, k: 3, seed: 7 };
        let g = generate(&kind, &MeasureKind::Counting).unwrap();
        assert!(g.is_connected());
        assert!((0..10).all(|v| g.valency(v) == 3));
        let again = generate(&kind, &MeasureKind::Counting).unwrap();
        assert_eq!(g, again);
        assert!(generate(&GraphKind::RandomRegular { n: 5, k: 3, seed: 0 }, &MeasureKind::Counting).is_err());
    }

    #[test]
    fn random_connected_is_connected() {
        for seed in 0..20 {
            let g = generate(
                &GraphKind::RandomConnected { n: 9, p: 0.2, seed },
                &MeasureKind::Rationals { seed },
            )
            .unwrap();
            assert!(g.is_connected());
            assert!(g.has_full_support());
        }
    }

    #[test]
    fn kinds_round_trip_through_json() {
        let kind = GraphKind::RandomRegular { n: 10, k: 3, seed: 7 };
        let text = serde_json::to_string(&kind).unwrap();
        assert_eq!(serde_json::from_str::<GraphKind>(&text).unwrap(), kind);
    }
}
