//! Reversible random walks given by symmetric edge conductances.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::cheeger::{self, EnumerationConfig};
use crate::error::{Error, Result};
use crate::graph::MeasuredGraph;
use crate::rational::{self, Rational};

/// A reversible walk on a graph: conductance `a` on each edge, stationary
/// measure `μ(u) = Σ_v a(u, v)` and kernel `r(u, v) = a(u, v) / μ(u)`.
///
/// The kernel is not materialized; [`ReversibleWalk::kernel`] derives it.
#[derive(Clone, Debug, PartialEq)]
pub struct ReversibleWalk {
    graph: MeasuredGraph,
    /// Aligned with `graph.edges()`.
    conductance: Vec<Rational>,
    /// Per vertex, `(neighbor, conductance)` sorted by neighbor.
    incident: Vec<Vec<(usize, Rational)>>,
    stationary: Vec<Rational>,
}

impl ReversibleWalk {
    /// Builds the walk from a conductance function evaluated on each edge `(u, v)`, `u < v`.
    pub fn from_conductance<F>(graph: &MeasuredGraph, mut a: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Option<Rational>,
    {
        let n = graph.n();
        let mut conductance = Vec::with_capacity(graph.edge_count());
        let mut incident = vec![Vec::new(); n];
        for (u, v) in graph.edges() {
            let w = a(u, v).ok_or_else(|| {
                Error::InvalidConductance(format!("missing conductance on edge ({u}, {v})"))
            })?;
            if w <= Rational::zero() {
                return Err(Error::InvalidConductance(format!(
                    "conductance on edge ({u}, {v}) must be positive, got {w}"
                )));
            }
            incident[u].push((v, w.clone()));
            incident[v].push((u, w.clone()));
            conductance.push(w);
        }
        for row in &mut incident {
            row.sort_by_key(|(w, _)| *w);
        }
        let stationary: Vec<Rational> = incident
            .iter()
            .map(|row| row.iter().map(|(_, a)| a).sum())
            .collect();
        if let Some(u) = stationary.iter().position(Zero::is_zero) {
            return Err(Error::InvalidConductance(format!(
                "vertex {u} is isolated (zero stationary measure)"
            )));
        }
        Ok(ReversibleWalk {
            graph: graph.clone(),
            conductance,
            incident,
            stationary,
        })
    }

    /// Builds the walk from an explicit table of `((u, v), a)` entries.
    pub fn from_table(graph: &MeasuredGraph, table: &[((usize, usize), Rational)]) -> Result<Self> {
        let lookup: std::collections::HashMap<(usize, usize), &Rational> = table
            .iter()
            .map(|((u, v), a)| ((*u.min(v), *u.max(v)), a))
            .collect();
        if lookup.len() != graph.edge_count() || table.len() != lookup.len() {
            return Err(Error::InvalidConductance(
                "conductance table must list each edge exactly once".into(),
            ));
        }
        Self::from_conductance(graph, |u, v| lookup.get(&(u, v)).map(|a| (*a).clone()))
    }

    /// The walk with `a(u, v) = m(u) + m(v)` on every edge.
    pub fn auxiliary(graph: &MeasuredGraph) -> Result<Self> {
        if let Some(v) = (0..graph.n()).find(|&v| graph.m(v).is_zero()) {
            return Err(Error::NotFullSupport(v));
        }
        if !graph.is_connected() {
            return Err(Error::Disconnected("auxiliary_walk"));
        }
        Self::from_conductance(graph, |u, v| Some(graph.m(u) + graph.m(v)))
    }

    pub fn graph(&self) -> &MeasuredGraph {
        &self.graph
    }

    pub fn stationary(&self) -> &[Rational] {
        &self.stationary
    }

    pub fn stationary_total(&self) -> Rational {
        self.stationary.iter().sum()
    }

    /// Each edge `(u, v)`, `u < v`, with its conductance.
    pub fn edge_conductances(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> + '_ {
        self.graph.edges().zip(&self.conductance)
    }

    pub fn incident(&self, u: usize) -> &[(usize, Rational)] {
        &self.incident[u]
    }

    /// `a(u, v)`, zero off edges.
    pub fn conductance(&self, u: usize, v: usize) -> Rational {
        self.incident[u]
            .binary_search_by_key(&v, |(w, _)| *w)
            .map(|i| self.incident[u][i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// `r(u, v) = a(u, v) / μ(u)`.
    pub fn kernel(&self, u: usize, v: usize) -> Rational {
        self.conductance(u, v) / &self.stationary[u]
    }

    /// `a(D)` for a set of edges.
    pub fn area(&self, edges: &[(usize, usize)]) -> Rational {
        edges.iter().map(|&(u, v)| self.conductance(u, v)).sum()
    }

    /// Total conductance `a(E)`.
    pub fn total_area(&self) -> Rational {
        self.conductance.iter().sum()
    }

    /// Exact checks of detailed balance, unit row sums, and kernel support.
    pub fn check_invariants(&self) -> bool {
        let n = self.graph.n();
        (0..n).all(|u| {
            let row: Rational = (0..n).map(|v| self.kernel(u, v)).sum();
            row.is_one()
                && (0..n).all(|v| {
                    let balanced =
                        &self.stationary[u] * self.kernel(u, v) == &self.stationary[v] * self.kernel(v, u);
                    let support = (self.kernel(u, v) > Rational::zero()) == self.graph.has_edge(u, v);
                    balanced && support
                })
        })
    }
}

/// Outcome of checking the four properties of the auxiliary walk.
#[derive(Clone, Debug, Serialize)]
pub struct AuxiliaryWalkReport {
    /// `a(u, v) = m(u) + m(v)` on every edge.
    pub conductance_formula: bool,
    /// `r(u, v) > 0` exactly on edges.
    pub kernel_support: bool,
    /// `s/(K(1+s)) μ(u) <= m(u) <= μ(u)/(1+s)` for every vertex.
    pub measure_comparison: bool,
    /// Conductance Cheeger constant (constraint `m`) is at least `c s / K`.
    pub cheeger_comparison: bool,
    #[serde(rename = "K")]
    pub max_valency: usize,
    #[serde(with = "rational::serde_str")]
    pub s: Rational,
    #[serde(with = "rational::serde_str")]
    pub vertex_cheeger: Rational,
    #[serde(with = "rational::serde_str")]
    pub conductance_cheeger: Rational,
    #[serde(with = "rational::serde_str")]
    pub cheeger_lower_bound: Rational,
}

impl AuxiliaryWalkReport {
    pub fn all_hold(&self) -> bool {
        self.conductance_formula && self.kernel_support && self.measure_comparison && self.cheeger_comparison
    }
}

/// Verifies, in exact arithmetic, that `walk` has the properties the
/// auxiliary walk of a full-support measured graph is guaranteed to have.
pub fn verify_auxiliary_conditions(
    graph: &MeasuredGraph,
    walk: &ReversibleWalk,
    config: &EnumerationConfig,
) -> Result<AuxiliaryWalkReport> {
    if !graph.is_connected() {
        return Err(Error::Disconnected("verify_auxiliary_conditions"));
    }
    let stats = graph.stats();
    let s = stats
        .ratio_bound
        .clone()
        .ok_or_else(|| Error::NotFullSupport(graph.support().len()))?;
    let k = stats.max_valency;
    let k_r = rational::int(k as i64);
    let one = Rational::one();
    let n = graph.n();

    let conductance_formula = walk
        .edge_conductances()
        .all(|((u, v), a)| *a == graph.m(u) + graph.m(v));
    let kernel_support = (0..n).all(|u| {
        (0..n).all(|v| (walk.kernel(u, v) > Rational::zero()) == graph.has_edge(u, v))
    });
    let lower = &s / (&k_r * (&one + &s));
    let upper = &one / (&one + &s);
    let measure_comparison = (0..n).all(|u| {
        let mu = &walk.stationary()[u];
        &lower * mu <= *graph.m(u) && *graph.m(u) <= &upper * mu
    });

    let vertex_cheeger = cheeger::cheeger_vertex(graph, config)?.value;
    let conductance_cheeger = cheeger::cheeger_conductance(walk, graph.measure(), config)?.value;
    let cheeger_lower_bound = &vertex_cheeger * &s / &k_r;
    Ok(AuxiliaryWalkReport {
        conductance_formula,
        kernel_support,
        measure_comparison,
        cheeger_comparison: conductance_cheeger >= cheeger_lower_bound,
        max_valency: k,
        s,
        vertex_cheeger,
        conductance_cheeger,
        cheeger_lower_bound,
    })
}

/// Distribution of the simple random walk (uniform over neighbours) after
/// `steps` steps from `start`.
pub fn heat_kernel_measure(graph: &MeasuredGraph, start: usize, steps: usize) -> Result<Vec<Rational>> {
    graph.check_vertex(start)?;
    if !graph.is_connected() {
        return Err(Error::Disconnected("heat_kernel_measure"));
    }
    let n = graph.n();
    let mut dist = vec![Rational::zero(); n];
    dist[start] = Rational::one();
    for _ in 0..steps {
        let mut next = vec![Rational::zero(); n];
        for (u, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let deg = graph.valency(u);
            if deg == 0 {
                next[u] += p;
                continue;
            }
            let share = p / rational::int(deg as i64);
            for &w in graph.neighbors(u) {
                next[w] += &share;
            }
        }
        dist = next;
    }
    Ok(dist)
}
