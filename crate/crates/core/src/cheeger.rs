//! Exact Cheeger constants by exhaustive subset enumeration.
//!
//! Measures are scaled to a common integer denominator so the inner loop runs
//! on machine integers (`i128`) whenever the totals leave room for the cross
//! multiplications used to compare ratios, and on `BigInt` otherwise. Either
//! way every comparison is exact.
//!
//! Subsets are enumerated in Gray-code order over all vertices but a pivot
//! (the last vertex); each visited set `S` is scored both as `A = S` and as
//! `A = V \ S`, so every subset is seen exactly once. Boundary measures are
//! maintained incrementally per flip.

use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{MeasuredGraph, VertexSubset};
use crate::rational::{self, Rational};
use crate::walk::ReversibleWalk;

pub const DEFAULT_CAP: usize = 22;
/// Masks are single words and one bit is reserved for the pivot split.
const HARD_CAP: usize = 62;
const PARALLEL_MIN_N: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheegerFlavor {
    #[serde(rename = "vertex-measured")]
    VertexMeasured,
    #[serde(rename = "conductance")]
    Conductance,
}

/// An exact Cheeger constant and a subset attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheegerCertificate {
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    #[serde(skip)]
    pub witness: VertexSubset,
    pub flavor: CheegerFlavor,
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerationConfig {
    pub cap: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig { cap: DEFAULT_CAP }
    }
}

impl EnumerationConfig {
    pub fn with_cap(cap: usize) -> Self {
        EnumerationConfig { cap }
    }

    fn check(&self, n: usize) -> Result<()> {
        let cap = self.cap.min(HARD_CAP);
        if n > cap {
            Err(Error::CapExceeded { n, cap })
        } else {
            Ok(())
        }
    }
}

/// `min m(∂^V A) / m(A)` over `0 < m(A) <= m(V)/2`.
pub fn cheeger_vertex(graph: &MeasuredGraph, config: &EnumerationConfig) -> Result<CheegerCertificate> {
    config.check(graph.n())?;
    let best = match Scaled::new(&[graph.measure()]) {
        Scaled::Small(w) => Problem::vertex(graph, &w[0]).solve().map(finish),
        Scaled::Big(w) => Problem::vertex(graph, &w[0]).solve().map(finish),
    };
    let (value, mask) = best.ok_or(Error::NoFeasibleSubset)?;
    Ok(CheegerCertificate {
        value,
        witness: VertexSubset::from_mask(graph.n(), mask),
        flavor: CheegerFlavor::VertexMeasured,
    })
}

/// `min a(∂^E A) / μ(A)` over subsets with `0 < m(A) <= m(V)/2`, where `m` is
/// the constraint measure (it may differ from the stationary measure `μ`).
pub fn cheeger_conductance(
    walk: &ReversibleWalk,
    constraint: &[Rational],
    config: &EnumerationConfig,
) -> Result<CheegerCertificate> {
    let graph = walk.graph();
    config.check(graph.n())?;
    if constraint.len() != graph.n() {
        return Err(Error::invalid("constraint measure length differs from vertex count"));
    }
    if constraint.iter().any(|x| !rational::is_nonnegative(x)) {
        return Err(Error::invalid("constraint measure must be nonnegative"));
    }
    // Conductances and stationary weights share one scale; the constraint has its own.
    let mut objective: Vec<Rational> = walk.edge_conductances().map(|(_, a)| a.clone()).collect();
    objective.extend(walk.stationary().iter().cloned());
    let edges = graph.edge_count();
    let best = match Scaled::new(&[&objective, constraint]) {
        Scaled::Small(w) => {
            let (cond, mu) = w[0].split_at(edges);
            Problem::conductance(graph, cond, mu, &w[1]).solve().map(finish)
        }
        Scaled::Big(w) => {
            let (cond, mu) = w[0].split_at(edges);
            Problem::conductance(graph, cond, mu, &w[1]).solve().map(finish)
        }
    };
    let (value, mask) = best.ok_or(Error::NoFeasibleSubset)?;
    Ok(CheegerCertificate {
        value,
        witness: VertexSubset::from_mask(graph.n(), mask),
        flavor: CheegerFlavor::Conductance,
    })
}

/// One `(alpha, R)` cell of an asymptotic expansion profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileEntry {
    #[serde(with = "rational::serde_str")]
    pub alpha: Rational,
    pub radius: usize,
    /// `min m(∂_R A)/m(A)` over `alpha m(V) <= m(A) <= m(V)/2`; absent when no
    /// subset is feasible for this `alpha`.
    #[serde(with = "rational::serde_opt")]
    pub value: Option<Rational>,
    #[serde(skip)]
    pub witness: Option<VertexSubset>,
}

/// Exact `R`-boundary expansion for each `alpha` and each `R` in `1..=diameter`.
pub fn asymptotic_profile(
    graph: &MeasuredGraph,
    alphas: &[Rational],
    config: &EnumerationConfig,
) -> Result<Vec<ProfileEntry>> {
    if !graph.is_connected() {
        return Err(Error::Disconnected("asymptotic_profile"));
    }
    config.check(graph.n())?;
    let half = rational::ratio(1, 2);
    for a in alphas {
        if *a <= Rational::zero() || *a > half {
            return Err(Error::invalid(format!("alpha {a} outside (0, 1/2]")));
        }
    }
    let diameter = graph.diameter().max(1);
    let n = graph.n();
    let best = match Scaled::new(&[graph.measure()]) {
        Scaled::Small(w) => profile_search(graph, &w[0], alphas, diameter),
        Scaled::Big(w) => profile_search(graph, &w[0], alphas, diameter),
    };
    let mut out = Vec::with_capacity(alphas.len() * diameter);
    for (ai, alpha) in alphas.iter().enumerate() {
        for r in 1..=diameter {
            let cell = &best[ai * diameter + (r - 1)];
            out.push(ProfileEntry {
                alpha: alpha.clone(),
                radius: r,
                value: cell.as_ref().map(|c| c.0.clone()),
                witness: cell.as_ref().map(|c| VertexSubset::from_mask(n, c.1)),
            });
        }
    }
    Ok(out)
}

trait Weight:
    Clone
    + Ord
    + Zero
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
    fn to_big(&self) -> BigInt;
}

impl Weight for i128 {
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Weight for BigInt {
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

enum Scaled {
    Small(Vec<Vec<i128>>),
    Big(Vec<Vec<BigInt>>),
}

impl Scaled {
    /// Scales each group to integers over its own common denominator. Uses
    /// `i128` when every group total stays below 2^62, so the product of any
    /// two partial sums fits.
    fn new(groups: &[&[Rational]]) -> Self {
        let scaled: Vec<Vec<BigInt>> = groups.iter().map(|g| rational::common_scale(g).0).collect();
        let limit = BigInt::from(1u64 << 62);
        let small = scaled.iter().all(|g| g.iter().sum::<BigInt>() < limit);
        if small {
            Scaled::Small(
                scaled
                    .iter()
                    .map(|g| g.iter().map(|x| x.to_i128().unwrap()).collect())
                    .collect(),
            )
        } else {
            Scaled::Big(scaled)
        }
    }
}

fn finish<W: Weight>((num, den, mask): (W, W, u64)) -> (Rational, u64) {
    (Rational::new(num.to_big(), den.to_big()), mask)
}

/// A scored candidate: ratio `num/den` at subset `mask`.
#[derive(Clone)]
struct Candidate<W> {
    num: W,
    den: W,
    mask: u64,
}

impl<W: Weight> Candidate<W> {
    /// Strict improvement: smaller ratio, ties broken toward the smaller mask.
    fn better_than(&self, other: &Candidate<W>) -> bool {
        let lhs = self.num.clone() * other.den.clone();
        let rhs = other.num.clone() * self.den.clone();
        lhs < rhs || (lhs == rhs && self.mask < other.mask)
    }
}

fn pick<W: Weight>(a: Option<Candidate<W>>, b: Option<Candidate<W>>) -> Option<Candidate<W>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.better_than(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

enum Objective<'a, W> {
    /// Numerator is the measure of the vertex boundary.
    VertexBoundary { measure: &'a [W] },
    /// Numerator is the conductance of the edge boundary.
    EdgeCut { conductance: Vec<Vec<(usize, W)>> },
}

struct Problem<'a, W> {
    n: usize,
    adjacency: Vec<Vec<usize>>,
    objective: Objective<'a, W>,
    denominator: &'a [W],
    constraint: &'a [W],
    constraint_total: W,
}

/// Incremental state for one Gray-code walk. `inside` is the current set `S`
/// (never containing the pivot `n - 1`).
struct Walker<'p, 'a, W> {
    p: &'p Problem<'a, W>,
    inside: u64,
    denom_in: W,
    cons_in: W,
    denom_total: W,
    // vertex flavor
    nbrs_in: Vec<u32>,
    boundary_of_s: W,
    boundary_of_complement: W,
    // edge flavor
    cut: W,
}

impl<'a, W: Weight> Problem<'a, W> {
    fn vertex(graph: &MeasuredGraph, measure: &'a [W]) -> Self {
        Problem {
            n: graph.n(),
            adjacency: (0..graph.n()).map(|v| graph.neighbors(v).to_vec()).collect(),
            objective: Objective::VertexBoundary { measure },
            denominator: measure,
            constraint: measure,
            constraint_total: sum(measure),
        }
    }

    fn conductance(graph: &MeasuredGraph, cond: &[W], mu: &'a [W], constraint: &'a [W]) -> Self {
        let n = graph.n();
        let mut table = vec![Vec::new(); n];
        for ((u, v), a) in graph.edges().zip(cond) {
            table[u].push((v, a.clone()));
            table[v].push((u, a.clone()));
        }
        Problem {
            n,
            adjacency: (0..n).map(|v| graph.neighbors(v).to_vec()).collect(),
            objective: Objective::EdgeCut { conductance: table },
            denominator: mu,
            constraint,
            constraint_total: sum(constraint),
        }
    }

    fn feasible(&self, cons: &W) -> bool {
        !cons.is_zero() && cons.clone() + cons.clone() <= self.constraint_total
    }

    fn solve(&self) -> Option<(W, W, u64)> {
        let free = self.n - 1; // vertices other than the pivot
        let prefix_bits = if self.n >= PARALLEL_MIN_N { free.min(8) } else { 0 };
        let low_bits = free - prefix_bits;
        let run = |prefix: u64| self.walk_chunk(prefix << low_bits, low_bits);
        let best = if prefix_bits == 0 {
            run(0)
        } else {
            (0..1u64 << prefix_bits)
                .into_par_iter()
                .map(run)
                .reduce(|| None, pick)
        };
        best.map(|c| (c.num, c.den, c.mask))
    }

    fn walk_chunk(&self, start: u64, low_bits: usize) -> Option<Candidate<W>> {
        let mut w = Walker::new(self, start);
        let mut best = w.score();
        for i in 1u64..(1u64 << low_bits) {
            w.flip(i.trailing_zeros() as usize);
            best = pick(best, w.score());
        }
        best
    }
}

fn sum<W: Weight>(xs: &[W]) -> W {
    xs.iter().fold(W::zero(), |mut acc, x| {
        acc += x;
        acc
    })
}

impl<'p, 'a, W: Weight> Walker<'p, 'a, W> {
    fn new(p: &'p Problem<'a, W>, start: u64) -> Self {
        let mut w = Walker {
            p,
            inside: 0,
            denom_in: W::zero(),
            cons_in: W::zero(),
            denom_total: sum(p.denominator),
            nbrs_in: vec![0; p.n],
            boundary_of_s: W::zero(),
            boundary_of_complement: W::zero(),
            cut: W::zero(),
        };
        for v in 0..p.n {
            if start >> v & 1 == 1 {
                w.flip(v);
            }
        }
        w
    }

    fn flip(&mut self, v: usize) {
        let p = self.p;
        let entering = self.inside >> v & 1 == 0;
        if entering {
            self.inside |= 1 << v;
            self.denom_in += &p.denominator[v];
            self.cons_in += &p.constraint[v];
        } else {
            self.inside &= !(1 << v);
            self.denom_in -= &p.denominator[v];
            self.cons_in -= &p.constraint[v];
        }
        match &p.objective {
            Objective::VertexBoundary { measure } => {
                let deg = p.adjacency[v].len() as u32;
                if entering {
                    // v leaves the complement side.
                    if self.nbrs_in[v] > 0 {
                        self.boundary_of_s -= &measure[v];
                    }
                    if self.nbrs_in[v] < deg {
                        self.boundary_of_complement += &measure[v];
                    }
                    for &w in &p.adjacency[v] {
                        let in_s = self.inside >> w & 1 == 1;
                        self.nbrs_in[w] += 1;
                        let c = self.nbrs_in[w];
                        let dw = p.adjacency[w].len() as u32;
                        if !in_s && c == 1 {
                            self.boundary_of_s += &measure[w];
                        }
                        if in_s && c == dw {
                            self.boundary_of_complement -= &measure[w];
                        }
                    }
                } else {
                    if self.nbrs_in[v] < deg {
                        self.boundary_of_complement -= &measure[v];
                    }
                    if self.nbrs_in[v] > 0 {
                        self.boundary_of_s += &measure[v];
                    }
                    for &w in &p.adjacency[v] {
                        let in_s = self.inside >> w & 1 == 1;
                        let dw = p.adjacency[w].len() as u32;
                        if in_s && self.nbrs_in[w] == dw {
                            self.boundary_of_complement += &measure[w];
                        }
                        self.nbrs_in[w] -= 1;
                        if !in_s && self.nbrs_in[w] == 0 {
                            self.boundary_of_s -= &measure[w];
                        }
                    }
                }
            }
            Objective::EdgeCut { conductance } => {
                // cut(S ± v) = cut(S) ± (a(v, V) - 2 a(v, S \ v)) with a(v, V) = μ(v).
                let mut to_s = W::zero();
                for (w, a) in &conductance[v] {
                    if self.inside >> w & 1 == 1 {
                        to_s += a;
                    }
                }
                let twice = to_s.clone() + to_s;
                if entering {
                    self.cut += &p.denominator[v];
                    self.cut -= &twice;
                } else {
                    self.cut -= &p.denominator[v];
                    self.cut += &twice;
                }
            }
        }
    }

    fn score(&self) -> Option<Candidate<W>> {
        let p = self.p;
        let full: u64 = if p.n == 64 { u64::MAX } else { (1u64 << p.n) - 1 };
        let (num_s, num_c) = match &p.objective {
            Objective::VertexBoundary { .. } => {
                (self.boundary_of_s.clone(), self.boundary_of_complement.clone())
            }
            Objective::EdgeCut { .. } => (self.cut.clone(), self.cut.clone()),
        };
        let mut best = None;
        if p.feasible(&self.cons_in) && !self.denom_in.is_zero() {
            best = Some(Candidate {
                num: num_s,
                den: self.denom_in.clone(),
                mask: self.inside,
            });
        }
        let cons_c = p.constraint_total.clone() - self.cons_in.clone();
        let den_c = self.denom_total.clone() - self.denom_in.clone();
        if p.feasible(&cons_c) && !den_c.is_zero() {
            best = pick(
                best,
                Some(Candidate {
                    num: num_c,
                    den: den_c,
                    mask: full & !self.inside,
                }),
            );
        }
        best
    }
}

type ProfileCell = Option<(Rational, u64)>;

/// Scans every subset once; for each, grows the `R`-neighbourhood radius by radius.
fn profile_search<W: Weight>(
    graph: &MeasuredGraph,
    measure: &[W],
    alphas: &[Rational],
    diameter: usize,
) -> Vec<ProfileCell> {
    let n = graph.n();
    let total = sum(measure);
    let nbr_mask: Vec<u64> = (0..n)
        .map(|v| graph.neighbors(v).iter().fold(0u64, |acc, &w| acc | 1 << w))
        .collect();
    // alpha = p/q  =>  alpha * total <= m(A)  <=>  p * total <= q * m(A)
    let thresholds: Vec<(BigInt, BigInt)> = alphas
        .iter()
        .map(|a| (a.numer() * total.to_big(), a.denom().clone()))
        .collect();
    let mass = |mask: u64| -> W {
        let mut acc = W::zero();
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            acc += &measure[v];
            rest &= rest - 1;
        }
        acc
    };
    let cells = alphas.len() * diameter;
    let scan = |chunk: u64, bits: usize| -> Vec<Option<Candidate<W>>> {
        let mut best: Vec<Option<Candidate<W>>> = vec![None; cells];
        for low in 0..(1u64 << bits) {
            let a = chunk << bits | low;
            let ma = mass(a);
            if ma.is_zero() || ma.clone() + ma.clone() > total {
                continue;
            }
            let ma_big = ma.to_big();
            let ok: Vec<bool> = thresholds
                .iter()
                .map(|(lhs, q)| *lhs <= q * &ma_big)
                .collect();
            if !ok.iter().any(|&b| b) {
                continue;
            }
            let mut ball = a;
            for r in 1..=diameter {
                let mut next = ball;
                let mut rest = ball;
                while rest != 0 {
                    let v = rest.trailing_zeros() as usize;
                    next |= nbr_mask[v];
                    rest &= rest - 1;
                }
                ball = next;
                let cand = Candidate {
                    num: mass(ball & !a),
                    den: ma.clone(),
                    mask: a,
                };
                for (ai, &feasible) in ok.iter().enumerate() {
                    if feasible {
                        let cell = &mut best[ai * diameter + (r - 1)];
                        *cell = pick(cell.take(), Some(cand.clone()));
                    }
                }
            }
        }
        best
    };
    let high = n.saturating_sub(12).min(10);
    let low = n - high;
    let merged = (0..1u64 << high)
        .into_par_iter()
        .map(|chunk| scan(chunk, low))
        .reduce(
            || vec![None; cells],
            |a, b| a.into_iter().zip(b).map(|(x, y)| pick(x, y)).collect(),
        );
    merged
        .into_iter()
        .map(|c| c.map(|c| (Rational::new(c.num.to_big(), c.den.to_big()), c.mask)))
        .collect()
}
