use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cheeger::CheegerCertificate;
use crate::cheeger::CheegerFlavor;
use crate::error::{Error, Result};
use crate::graph::{MeasuredGraph, VertexSubset};
use crate::rational::{self, int, Rational};

/// Largest base graph the segment search accepts (states are bitmasks).
const SEGMENT_BASE_CAP: usize = 16;
/// Bound on the total mass in integer units, which sizes the search tables.
const SEGMENT_UNIT_CAP: u64 = 1 << 24;

fn check_probability(graph: &MeasuredGraph) -> Result<()> {
    if !graph.total_measure().is_one() {
        return Err(Error::invalid(format!(
            "expected a probability measure, total is {}",
            graph.total_measure()
        )));
    }
    Ok(())
}

/// `G × {0, …, n}` with the path on the second factor and measure
/// `m(v, i) = 2^{-i} μ(v)`. Vertex `(v, i)` has index `i |V| + v`.
pub fn product_segment(graph: &MeasuredGraph, n: usize) -> Result<MeasuredGraph> {
    check_probability(graph)?;
    let size = graph.n();
    let index = |v: usize, i: usize| i * size + v;
    let mut edges = Vec::new();
    let mut measure = Vec::with_capacity(size * (n + 1));
    let mut labels = Vec::with_capacity(size * (n + 1));
    let mut scale = Rational::one();
    for i in 0..=n {
        for v in 0..size {
            measure.push(graph.m(v) * &scale);
            labels.push(if n == 0 {
                graph.label(v).to_string()
            } else {
                format!("{}@{i}", graph.label(v))
            });
        }
        edges.extend(graph.edges().map(|(u, v)| (index(u, i), index(v, i))));
        if i < n {
            edges.extend((0..size).map(|v| (index(v, i), index(v, i + 1))));
        }
        scale /= int(2);
    }
    MeasuredGraph::with_labels(size * (n + 1), &edges, measure, labels)
}

/// The constant `min(c/18, 1/8)` bounding the Cheeger constant of the
/// infinite product from below, given the base constant `c`.
pub fn segment_lower_bound(base_cheeger: &Rational) -> Rational {
    let scaled = base_cheeger / int(18);
    rational::min(&scaled, &rational::ratio(1, 8)).clone()
}

/// Exact vertex Cheeger constant of `product_segment(graph, n)`.
///
/// A set in the product is a sequence of slices `A_0, …, A_n ⊆ V`, and the
/// boundary in slice `i` is `(N(A_i) ∪ A_{i-1} ∪ A_{i+1}) ∖ A_i`. A dynamic
/// program over slices keeps, for each state `(A_i, (N(A_i) ∪ A_{i-1}) ∖ A_i)`
/// and each total mass, the least boundary mass seen so far. Masses and
/// boundaries are integers after scaling by a common denominator and `2^n`.
pub fn product_segment_cheeger(graph: &MeasuredGraph, n: usize) -> Result<CheegerCertificate> {
    check_probability(graph)?;
    let size = graph.n();
    if size > SEGMENT_BASE_CAP {
        return Err(Error::CapExceeded {
            n: size,
            cap: SEGMENT_BASE_CAP,
        });
    }
    let (scaled, _) = rational::common_scale(graph.measure());
    let units: Vec<u64> = scaled
        .iter()
        .map(|w| w.to_u64().unwrap_or(u64::MAX))
        .collect();
    let base_total: u64 = units.iter().fold(0u64, |a, &w| a.saturating_add(w));
    let total = base_total.saturating_mul((1u64 << (n + 1).min(63)) - 1);
    if n >= 40 || total > SEGMENT_UNIT_CAP {
        return Err(Error::invalid(format!(
            "product segment too large for exact search ({total} mass units)"
        )));
    }
    let search = SegmentSearch::new(graph, &units, n, total);
    let (boundary, mass, slices) = search.run().ok_or(Error::NoFeasibleSubset)?;
    let witness = VertexSubset::from_indices(
        size * (n + 1),
        slices
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| (0..size).filter(move |v| a >> v & 1 == 1).map(move |v| i * size + v)),
    );
    Ok(CheegerCertificate {
        value: Rational::new(BigInt::from(boundary), BigInt::from(mass)),
        witness,
        flavor: CheegerFlavor::VertexMeasured,
    })
}

const INF: u32 = u32::MAX / 2;

struct SegmentSearch {
    size: usize,
    n: usize,
    half: usize,
    /// Base-measure units of each subset of `V`.
    weight: Vec<u32>,
    /// Open neighbourhood `N(A) ∖ A` of each subset.
    neighbourhood: Vec<u32>,
}

/// States of one slice, grouped by `A_i`: for each `A`, the list of `P` with its table.
type Layer = Vec<Vec<(u32, Vec<u32>)>>;

impl SegmentSearch {
    fn new(graph: &MeasuredGraph, units: &[u64], n: usize, total: u64) -> Self {
        let size = graph.n();
        let full = 1usize << size;
        let mut weight = vec![0u32; full];
        let mut neighbourhood = vec![0u32; full];
        let adj: Vec<u32> = (0..size)
            .map(|v| graph.neighbors(v).iter().fold(0u32, |acc, &w| acc | 1 << w))
            .collect();
        for set in 1..full {
            let low = set.trailing_zeros() as usize;
            let rest = set & (set - 1);
            weight[set] = weight[rest] + units[low] as u32;
            neighbourhood[set] = neighbourhood[rest] | adj[low];
        }
        for (set, nb) in neighbourhood.iter_mut().enumerate() {
            *nb &= !(set as u32);
        }
        SegmentSearch {
            size,
            n,
            half: (total / 2) as usize,
            weight,
            neighbourhood,
        }
    }

    fn scale(&self, slice: usize) -> u32 {
        1 << (self.n - slice)
    }

    fn run(&self) -> Option<(u64, u64, Vec<u32>)> {
        let full = 1usize << self.size;
        let mut layers: Vec<Layer> = Vec::with_capacity(self.n + 1);
        let mut first: Layer = vec![Vec::new(); full];
        for (a, group) in first.iter_mut().enumerate() {
            let mass = (self.weight[a] * self.scale(0)) as usize;
            if mass <= self.half {
                let mut table = vec![INF; self.half + 1];
                table[mass] = 0;
                group.push((self.neighbourhood[a], table));
            }
        }
        layers.push(first);
        for slice in 1..=self.n {
            let next = self.step(&layers[slice - 1], slice);
            layers.push(next);
        }

        // Close off the last slice and pick the best ratio, ties to the smaller mass.
        let last = &layers[self.n];
        let mut best_per_mass = vec![INF; self.half + 1];
        for group in last {
            for (p, table) in group {
                let cost = self.weight[*p as usize];
                for (slot, &b) in best_per_mass.iter_mut().zip(table) {
                    *slot = (*slot).min(b.saturating_add(cost));
                }
            }
        }
        let mut best: Option<(u64, u64)> = None;
        for (mass, &b) in best_per_mass.iter().enumerate().skip(1) {
            if b >= INF {
                continue;
            }
            let (b, mass) = (b as u64, mass as u64);
            if best.is_none_or(|(bb, bm)| b * bm < bb * mass) {
                best = Some((b, mass));
            }
        }
        let (boundary, mass) = best?;
        Some((boundary, mass, self.backtrack(&layers, boundary as u32, mass as usize)))
    }

    fn step(&self, prev: &Layer, slice: usize) -> Layer {
        let full = 1usize << self.size;
        let cost_scale = self.scale(slice - 1);
        let mass_scale = self.scale(slice);
        (0..full)
            .into_par_iter()
            .map(|next| {
                let shift = (self.weight[next] * mass_scale) as usize;
                let mut out: HashMap<u32, Vec<u32>> = HashMap::new();
                if shift > self.half {
                    return Vec::new();
                }
                let nb = self.neighbourhood[next];
                for (a, group) in prev.iter().enumerate() {
                    let entering = next as u32 & !(a as u32);
                    let p_next = (nb | a as u32) & !(next as u32);
                    for (p, table) in group {
                        let cost = self.weight[(p | entering) as usize] * cost_scale;
                        let target = out.entry(p_next).or_insert_with(|| vec![INF; self.half + 1]);
                        let (dst, src) = (&mut target[shift..], &table[..=self.half - shift]);
                        for (d, &s) in dst.iter_mut().zip(src) {
                            *d = (*d).min(s.saturating_add(cost));
                        }
                    }
                }
                let mut group: Vec<(u32, Vec<u32>)> = out.into_iter().collect();
                group.sort_unstable_by_key(|(p, _)| *p);
                group
            })
            .collect()
    }

    fn backtrack(&self, layers: &[Layer], boundary: u32, mass: usize) -> Vec<u32> {
        let mut slices = vec![0u32; self.n + 1];
        // Locate the final state.
        let (mut a, mut p, mut value) = layers[self.n]
            .iter()
            .enumerate()
            .flat_map(|(a, g)| g.iter().map(move |(p, t)| (a, *p, t)))
            .find(|(_, p, t)| t[mass].saturating_add(self.weight[*p as usize]) == boundary)
            .map(|(a, p, t)| (a, p, t[mass]))
            .expect("optimum has a final state");
        let mut mass = mass;
        for slice in (1..=self.n).rev() {
            slices[slice] = a as u32;
            let cost_scale = self.scale(slice - 1);
            mass -= (self.weight[a] * self.scale(slice)) as usize;
            let entering = a as u32;
            let (pa, pp, pv) = layers[slice - 1]
                .iter()
                .enumerate()
                .flat_map(|(pa, g)| g.iter().map(move |(pp, t)| (pa, *pp, t)))
                .find(|(pa, pp, t)| {
                    (self.neighbourhood[a] | *pa as u32) & !entering == p
                        && t[mass].saturating_add(self.weight[(pp | (entering & !(*pa as u32))) as usize] * cost_scale)
                            == value
                })
                .map(|(pa, pp, t)| (pa, pp, t[mass]))
                .expect("optimum has a predecessor");
            a = pa;
            p = pp;
            value = pv;
        }
        slices[0] = a as u32;
        slices
    }
}

/// The full-support probability measure
/// `μ'(x) = (1 - μ(A)/n) μ(x)` on `supp μ` and `μ(A)/(n |V ∖ supp μ|)` off it.
pub fn full_support_perturbation(graph: &MeasuredGraph, bad_set: &VertexSubset, n: usize) -> Result<Vec<Rational>> {
    check_probability(graph)?;
    if bad_set.universe() != graph.n() {
        return Err(Error::invalid("subset universe differs from vertex count"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let outside: Vec<usize> = (0..graph.n()).filter(|&v| graph.m(v).is_zero()).collect();
    if outside.is_empty() {
        return Err(Error::invalid("measure already has full support"));
    }
    if let Some(v) = bad_set.iter().find(|&v| graph.m(v).is_zero()) {
        return Err(Error::invalid(format!("vertex {v} of A lies outside the support")));
    }
    let mass = graph.measure_of(bad_set);
    if mass.is_zero() || mass > rational::ratio(1, 2) {
        return Err(Error::invalid(format!("need 0 < μ(A) <= 1/2, got {mass}")));
    }
    let t = &mass / int(n as i64);
    let keep = Rational::one() - &t;
    let spread = &t / int(outside.len() as i64);
    Ok((0..graph.n())
        .map(|v| {
            if graph.m(v).is_zero() {
                spread.clone()
            } else {
                &keep * graph.m(v)
            }
        })
        .collect())
}

/// `μ'(∂A)/μ'(A) <= 2 μ(∂A)/μ(A) + 1/(n - μ(A))`, evaluated exactly.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationCheck {
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    pub holds: bool,
}

pub fn perturbation_ratio_check(graph: &MeasuredGraph, bad_set: &VertexSubset, n: usize) -> Result<PerturbationCheck> {
    let perturbed = full_support_perturbation(graph, bad_set, n)?;
    let boundary = graph.vertex_boundary(bad_set);
    let sum = |m: &[Rational], s: &VertexSubset| -> Rational { s.iter().map(|v| &m[v]).sum() };
    let lhs = sum(&perturbed, &boundary) / sum(&perturbed, bad_set);
    let mass = graph.measure_of(bad_set);
    let rhs = int(2) * graph.measure_of(&boundary) / &mass + (int(n as i64) - &mass).recip();
    Ok(PerturbationCheck {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}
