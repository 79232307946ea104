//! Measured graphs, vertex subsets, boundaries, and structural statistics.

use std::cmp::Ordering;
use std::collections::VecDeque;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A finite simple undirected graph with a nonnegative rational vertex measure.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasuredGraph {
    adjacency: Vec<Vec<usize>>,
    measure: Vec<Rational>,
    labels: Vec<String>,
    total: Rational,
    connected: bool,
}

impl MeasuredGraph {
    /// Builds a graph on `0..n` from an undirected edge list (each pair once).
    pub fn from_edges(n: usize, edges: &[(usize, usize)], measure: Vec<Rational>) -> Result<Self> {
        let labels = (0..n).map(|v| v.to_string()).collect();
        Self::with_labels(n, edges, measure, labels)
    }

    pub fn with_labels(
        n: usize,
        edges: &[(usize, usize)],
        measure: Vec<Rational>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if measure.len() != n || labels.len() != n {
            return Err(Error::InvalidGraph {
                location: "vertices".into(),
                message: format!(
                    "expected {n} measures and labels, got {} and {}",
                    measure.len(),
                    labels.len()
                ),
            });
        }
        let mut adjacency = vec![Vec::new(); n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            let location = format!("edges[{i}]");
            if u >= n || v >= n {
                return Err(Error::InvalidGraph {
                    location,
                    message: format!("unknown vertex in edge ({u}, {v})"),
                });
            }
            if u == v {
                return Err(Error::InvalidGraph {
                    location,
                    message: format!("self-loop at vertex {u}"),
                });
            }
            if adjacency[u].contains(&v) {
                return Err(Error::InvalidGraph {
                    location,
                    message: format!("duplicate edge ({u}, {v})"),
                });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Self::from_adjacency(adjacency, measure, labels)
    }

    fn from_adjacency(
        adjacency: Vec<Vec<usize>>,
        measure: Vec<Rational>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if let Some(v) = measure.iter().position(|m| !rational::is_nonnegative(m)) {
            return Err(Error::InvalidGraph {
                location: format!("vertices[{v}]"),
                message: "negative measure".into(),
            });
        }
        let total: Rational = measure.iter().sum();
        if total.is_zero() {
            return Err(Error::ZeroTotalMeasure);
        }
        let connected = component_labels(&adjacency).1 <= 1;
        Ok(MeasuredGraph {
            adjacency,
            measure,
            labels,
            total,
            connected,
        })
    }

    /// The same graph carrying a different measure.
    pub fn with_measure(&self, measure: Vec<Rational>) -> Result<Self> {
        if measure.len() != self.n() {
            return Err(Error::invalid(format!(
                "measure has {} entries for {} vertices",
                measure.len(),
                self.n()
            )));
        }
        Self::from_adjacency(self.adjacency.clone(), measure, self.labels.clone())
    }

    /// Full subgraph on `vertices` (in the given order) with the restricted measure.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Self> {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let adjacency = vertices
            .iter()
            .map(|&v| {
                let mut nbrs: Vec<usize> = self.adjacency[v]
                    .iter()
                    .filter_map(|&w| (index[w] != usize::MAX).then_some(index[w]))
                    .collect();
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        let measure = vertices.iter().map(|&v| self.measure[v].clone()).collect();
        let labels = vertices.iter().map(|&v| self.labels[v].clone()).collect();
        Self::from_adjacency(adjacency, measure, labels)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn valency(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn measure(&self) -> &[Rational] {
        &self.measure
    }

    pub fn m(&self, v: usize) -> &Rational {
        &self.measure[v]
    }

    pub fn total_measure(&self) -> &Rational {
        &self.total
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn has_full_support(&self) -> bool {
        self.measure.iter().all(|m| !m.is_zero())
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter().copied().filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn measure_of(&self, set: &VertexSubset) -> Rational {
        set.iter().map(|v| &self.measure[v]).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| !self.measure[v].is_zero()).collect()
    }

    /// Component id per vertex and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        component_labels(&self.adjacency)
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v))
        }
    }

    /// Hop distances from `source`; `None` marks unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Length of a shortest edge path, `None` across components.
    pub fn hop_distance(&self, u: usize, v: usize) -> Result<Option<usize>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.distances_from(u)[v])
    }

    pub fn all_distances(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.n()).map(|v| self.distances_from(v)).collect()
    }

    /// Largest finite hop distance.
    pub fn diameter(&self) -> usize {
        self.all_distances()
            .iter()
            .flat_map(|row| row.iter().flatten().copied())
            .max()
            .unwrap_or(0)
    }

    /// Vertices outside `a` adjacent to some vertex of `a`.
    pub fn vertex_boundary(&self, a: &VertexSubset) -> VertexSubset {
        let mut out = VertexSubset::empty(self.n());
        for u in a.iter() {
            for &w in &self.adjacency[u] {
                if !a.contains(w) {
                    out.insert(w);
                }
            }
        }
        out
    }

    /// Edges with exactly one endpoint in `a`, as `(u, v)` with `u < v`.
    pub fn edge_boundary(&self, a: &VertexSubset) -> Vec<(usize, usize)> {
        self.edges()
            .filter(|&(u, v)| a.contains(u) != a.contains(v))
            .collect()
    }

    /// The annulus `{x : 0 < d(x, a) <= radius}`.
    pub fn r_boundary(&self, a: &VertexSubset, radius: usize) -> Result<VertexSubset> {
        if radius == 0 {
            return Err(Error::invalid("boundary radius must be at least 1"));
        }
        let mut reached = a.clone();
        let mut frontier: Vec<usize> = a.iter().collect();
        for _ in 0..radius {
            let mut next = Vec::new();
            for u in frontier {
                for &w in &self.adjacency[u] {
                    if !reached.contains(w) {
                        reached.insert(w);
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(reached.difference(a))
    }

    pub fn stats(&self) -> GraphStats {
        let max_valency = (0..self.n()).map(|v| self.valency(v)).max().unwrap_or(0);
        let mut ratio_bound = Some(Rational::one());
        for (u, v) in self.edges() {
            let (mu, mv) = (&self.measure[u], &self.measure[v]);
            if mu.is_zero() || mv.is_zero() {
                ratio_bound = None;
                break;
            }
            let edge_ratio = if mu <= mv { mu / mv } else { mv / mu };
            if let Some(s) = &mut ratio_bound {
                if edge_ratio < *s {
                    *s = edge_ratio;
                }
            }
        }
        let max_measure = self.measure.iter().max().cloned().unwrap_or_else(Rational::zero);
        GraphStats {
            max_valency,
            ratio_bound,
            gamma: max_measure / &self.total,
            connected: self.connected,
            full_support: self.has_full_support(),
        }
    }
}

fn component_labels(adjacency: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adjacency.len();
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in &adjacency[u] {
                if label[w] == usize::MAX {
                    label[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Structural statistics of a measured graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphStats {
    /// Maximum valency `K`.
    #[serde(rename = "K")]
    pub max_valency: usize,
    /// Largest `s` with `s m(v) <= m(u) <= m(v)/s` on every edge; absent when
    /// an edge has a zero-measure endpoint.
    #[serde(rename = "s", with = "rational::serde_opt")]
    pub ratio_bound: Option<Rational>,
    /// `max_v m(v) / m(V)`.
    #[serde(with = "rational::serde_str")]
    pub gamma: Rational,
    pub connected: bool,
    #[serde(rename = "fullSupport")]
    pub full_support: bool,
}

/// A set of vertices of a graph on `0..n`, stored as a bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexSubset {
    n: usize,
    words: Vec<u64>,
}

impl VertexSubset {
    pub fn empty(n: usize) -> Self {
        VertexSubset {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn from_indices(n: usize, vertices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for v in vertices {
            s.insert(v);
        }
        s
    }

    /// Bit `i` of `mask` is vertex `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n >= 64 || mask >> n == 0);
        let mut s = Self::empty(n);
        if n > 0 {
            s.words[0] = mask;
        }
        s
    }

    /// The bitset as a single word, when `n <= 64`.
    pub fn to_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.n, "vertex {v} outside 0..{}", self.n);
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        if v < self.n {
            self.words[v / 64] &= !(1 << (v % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.contains(v))
    }

    pub fn complement(&self) -> Self {
        let mut out = Self::full(self.n);
        for (o, w) in out.words.iter_mut().zip(&self.words) {
            *o &= !w;
        }
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (o, w) in out.words.iter_mut().zip(&other.words) {
            *o &= !w;
        }
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (o, w) in out.words.iter_mut().zip(&other.words) {
            *o &= w;
        }
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (o, w) in out.words.iter_mut().zip(&other.words) {
            *o |= w;
        }
        out
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }
}

/// Bitsets compare as binary integers with vertex 0 the least significant bit.
impl Ord for VertexSubset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            self.words
                .iter()
                .rev()
                .cmp(other.words.iter().rev())
        })
    }
}

impl PartialOrd for VertexSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
