//! Seeded instance generators shared by the integration suites.
#![allow(dead_code)]

use mexp_core::families::{random_connected, random_measure};
use mexp_core::rational::ratio;
use mexp_core::{MeasuredGraph, Rational, ReversibleWalk};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph on `n` vertices with a random positive rational measure.
pub fn connected_graph<R: Rng>(n: usize, rng: &mut R) -> MeasuredGraph {
    let p = rng.random_range(0.0..0.6);
    let edges = random_connected(n, p, rng);
    let m = random_measure(n, rng);
    MeasuredGraph::from_edges(n, &edges, m).unwrap()
}

/// Graph with edges drawn independently; may be disconnected.
pub fn any_graph<R: Rng>(n: usize, rng: &mut R) -> MeasuredGraph {
    let p = rng.random_range(0.0..0.7);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let m = random_measure(n, rng);
    MeasuredGraph::from_edges(n, &edges, m).unwrap()
}

/// Random positive conductances `p/q`, `p ∈ 1..=12`, `q ∈ 1..=6`.
pub fn random_walk<R: Rng>(graph: &MeasuredGraph, rng: &mut R) -> ReversibleWalk {
    ReversibleWalk::from_conductance(graph, |_, _| Some(ratio(rng.random_range(1..=12), rng.random_range(1..=6))))
        .unwrap()
}

/// Either the auxiliary walk or random conductances, by coin flip.
pub fn some_walk<R: Rng>(graph: &MeasuredGraph, rng: &mut R) -> ReversibleWalk {
    if rng.random_bool(0.5) {
        ReversibleWalk::auxiliary(graph).unwrap()
    } else {
        random_walk(graph, rng)
    }
}

/// Nonnegative rationals with small numerators and denominators, some zero.
pub fn nonnegative_function<R: Rng>(n: usize, rng: &mut R) -> Vec<Rational> {
    (0..n)
        .map(|_| ratio(rng.random_range(0..=9), rng.random_range(1..=5)))
        .collect()
}
