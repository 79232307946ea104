//! Verifiers for the inequalities relating Cheeger constants, spectral gaps
//! and distances. Each returns both sides of every inequality it checks.
//!
//! Tolerance policy: when both sides are exact rationals the comparison is
//! exact. Otherwise `lhs <= rhs` is accepted when `lhs <= rhs + 1e-8`, which
//! only absorbs eigensolver rounding in an inequality that may be tight.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::cheeger::{self, EnumerationConfig};
use crate::error::{Error, Result};
use crate::graph::{MeasuredGraph, VertexSubset};
use crate::poincare;
use crate::rational::{self, int, Rational};
use crate::spectral::{self, SpectralConfig};
use crate::walk::ReversibleWalk;

pub const SLACK: f64 = 1e-8;

/// A number that is either exact or a binary64 approximation.
#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    Exact(Rational),
    Float(f64),
}

impl Quantity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(r) => rational::to_f64(r),
            Quantity::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Quantity::Exact(r) => Some(r),
            Quantity::Float(_) => None,
        }
    }
}

impl From<Rational> for Quantity {
    fn from(r: Rational) -> Self {
        Quantity::Exact(r)
    }
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::Float(x)
    }
}

impl From<usize> for Quantity {
    fn from(k: usize) -> Self {
        Quantity::Exact(int(k as i64))
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Quantity::Exact(r) => s.serialize_str(&rational::format(r)),
            Quantity::Float(x) => s.serialize_f64(*x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "=")]
    Equal,
}

/// One inequality `lhs <= rhs` (or identity `lhs = rhs`).
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub label: String,
    pub relation: Relation,
    pub lhs: Quantity,
    pub rhs: Quantity,
    /// `rhs - lhs`; exact when both sides are.
    pub slack: Quantity,
    pub holds: bool,
}

impl Check {
    pub fn at_most(label: &str, lhs: Quantity, rhs: Quantity) -> Self {
        let (slack, holds) = match (&lhs, &rhs) {
            (Quantity::Exact(a), Quantity::Exact(b)) => (Quantity::Exact(b - a), a <= b),
            _ => {
                let (a, b) = (lhs.to_f64(), rhs.to_f64());
                (Quantity::Float(b - a), a <= b + SLACK)
            }
        };
        Check {
            label: label.to_string(),
            relation: Relation::AtMost,
            lhs,
            rhs,
            slack,
            holds,
        }
    }

    pub fn equal(label: &str, lhs: Quantity, rhs: Quantity, tolerance: f64) -> Self {
        let (slack, holds) = match (&lhs, &rhs) {
            (Quantity::Exact(a), Quantity::Exact(b)) => (Quantity::Exact(b - a), a == b),
            _ => {
                let d = rhs.to_f64() - lhs.to_f64();
                (Quantity::Float(d), d.abs() <= tolerance)
            }
        };
        Check {
            label: label.to_string(),
            relation: Relation::Equal,
            lhs,
            rhs,
            slack,
            holds,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub holds: bool,
    /// Every input the checks were assembled from.
    #[serde(rename = "inputsDigest")]
    pub inputs: BTreeMap<&'static str, Quantity>,
}

impl InequalityReport {
    fn new(name: &'static str, checks: Vec<Check>, inputs: Vec<(&'static str, Quantity)>) -> Self {
        InequalityReport {
            name,
            holds: checks.iter().all(|c| c.holds),
            checks,
            inputs: inputs.into_iter().collect(),
        }
    }

    pub fn check(&self, label: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.label == label)
    }
}

/// Shared knobs for all verifiers.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyConfig {
    pub enumeration: EnumerationConfig,
    pub spectral: SpectralConfig,
}

fn delta_gap(walk: &ReversibleWalk, config: &VerifyConfig) -> Result<f64> {
    if !walk.graph().is_connected() {
        return Err(Error::Disconnected("spectral gap"));
    }
    spectral::delta_operator(walk)
        .spectrum(&config.spectral)?
        .gap
        .ok_or_else(|| Error::invalid("operator has no positive eigenvalue"))
}

fn lambda_gap(graph: &MeasuredGraph, config: &VerifyConfig) -> Result<f64> {
    spectral::lambda_operator(graph)?
        .spectrum(&config.spectral)?
        .gap
        .ok_or_else(|| Error::invalid("operator has no positive eigenvalue"))
}

/// `K` and `s` of a connected full-support graph.
fn shape(graph: &MeasuredGraph) -> Result<(usize, Rational)> {
    if let Some(v) = (0..graph.n()).find(|&v| graph.m(v).is_zero()) {
        return Err(Error::NotFullSupport(v));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected("measured verifier"));
    }
    let stats = graph.stats();
    let s = stats.ratio_bound.expect("full support implies a ratio bound");
    Ok((stats.max_valency, s))
}

/// `c²/2 <= λ <= 2c` for the conductance Cheeger constant `c` (constraint
/// `μ`) and the gap `λ` of the random-walk Laplacian.
pub fn verify_cheeger_sandwich(walk: &ReversibleWalk, config: &VerifyConfig) -> Result<InequalityReport> {
    let c = cheeger::cheeger_conductance(walk, walk.stationary(), &config.enumeration)?.value;
    let lambda = delta_gap(walk, config)?;
    let lower = &c * &c / int(2);
    let upper = &c * int(2);
    Ok(InequalityReport::new(
        "cheeger-sandwich",
        vec![
            Check::at_most("lower", lower.into(), lambda.into()),
            Check::at_most("upper", lambda.into(), upper.into()),
        ],
        vec![("c", c.into()), ("lambda", lambda.into())],
    ))
}

/// `c_m²/2 <= λ` where `c_m` is the conductance Cheeger constant with an
/// arbitrary constraint measure `m` on the vertices.
pub fn verify_cheeger_lower_bound(
    walk: &ReversibleWalk,
    constraint: &[Rational],
    config: &VerifyConfig,
) -> Result<InequalityReport> {
    let c = cheeger::cheeger_conductance(walk, constraint, &config.enumeration)?.value;
    let lambda = delta_gap(walk, config)?;
    let lower = &c * &c / int(2);
    Ok(InequalityReport::new(
        "cheeger-lower-bound",
        vec![Check::at_most("lower", lower.into(), lambda.into())],
        vec![("c", c.into()), ("lambda", lambda.into())],
    ))
}

/// `c²s³(1+s)/(2K³) <= λ <= 2(1+s)Kc/s` for the vertex Cheeger constant `c`
/// and the gap `λ` of the measured Laplacian.
pub fn verify_measured_sandwich(graph: &MeasuredGraph, config: &VerifyConfig) -> Result<InequalityReport> {
    let (k, s) = shape(graph)?;
    let c = cheeger::cheeger_vertex(graph, &config.enumeration)?.value;
    let lambda = lambda_gap(graph, config)?;
    let kr = int(k as i64);
    let one_s = Rational::one() + &s;
    let lower = &c * &c * rational::pow(&s, 3) * &one_s / (int(2) * rational::pow(&kr, 3));
    let upper = int(2) * &one_s * &kr * &c / &s;
    Ok(InequalityReport::new(
        "measured-sandwich",
        vec![
            Check::at_most("lower", lower.into(), lambda.into()),
            Check::at_most("upper", lambda.into(), upper.into()),
        ],
        vec![("c", c.into()), ("lambda", lambda.into()), ("K", k.into()), ("s", s.into())],
    ))
}

/// `s(1+s)/K · λ' <= λ <= K²(1+s)/s² · λ'` between the measured gap `λ` and
/// the gap `λ'` of the auxiliary walk.
pub fn verify_gap_controls(graph: &MeasuredGraph, config: &VerifyConfig) -> Result<InequalityReport> {
    let (k, s) = shape(graph)?;
    let lambda = lambda_gap(graph, config)?;
    let lambda_prime = delta_gap(&ReversibleWalk::auxiliary(graph)?, config)?;
    let kr = int(k as i64);
    let one_s = Rational::one() + &s;
    let low_factor = rational::to_f64(&(&s * &one_s / &kr));
    let high_factor = rational::to_f64(&(&kr * &kr * &one_s / (&s * &s)));
    Ok(InequalityReport::new(
        "gap-controls",
        vec![
            Check::at_most("lower", (low_factor * lambda_prime).into(), lambda.into()),
            Check::at_most("upper", lambda.into(), (high_factor * lambda_prime).into()),
        ],
        vec![
            ("lambda", lambda.into()),
            ("lambdaPrime", lambda_prime.into()),
            ("K", k.into()),
            ("s", s.into()),
        ],
    ))
}

/// `λρ² <= (1/μ(A) + 1/μ(B)) (a(E) - a(E_A) - a(E_B))` with `ρ = d(A, B)`
/// and `E_A`, `E_B` the edges inside `A` and inside `B`.
pub fn distance_gap_bound(
    walk: &ReversibleWalk,
    a: &VertexSubset,
    b: &VertexSubset,
    config: &VerifyConfig,
) -> Result<InequalityReport> {
    let graph = walk.graph();
    if a.universe() != graph.n() || b.universe() != graph.n() {
        return Err(Error::invalid("subset universe differs from vertex count"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("A and B must be nonempty"));
    }
    if !a.is_disjoint(b) {
        return Err(Error::invalid("A and B must be disjoint"));
    }
    let lambda = delta_gap(walk, config)?;
    let rho = set_distance(graph, a, b);
    let mu = |set: &VertexSubset| -> Rational { set.iter().map(|v| &walk.stationary()[v]).sum() };
    let inside = |set: &VertexSubset| -> Rational {
        walk.edge_conductances()
            .filter(|((u, v), _)| set.contains(*u) && set.contains(*v))
            .map(|(_, w)| w)
            .sum()
    };
    let (mu_a, mu_b) = (mu(a), mu(b));
    let area = walk.total_area() - inside(a) - inside(b);
    let rhs = (mu_a.recip() + mu_b.recip()) * &area;
    let lhs = lambda * (rho * rho) as f64;
    Ok(InequalityReport::new(
        "distance-bound",
        vec![Check::at_most("bound", lhs.into(), rhs.into())],
        vec![
            ("lambda", lambda.into()),
            ("rho", rho.into()),
            ("muA", mu_a.into()),
            ("muB", mu_b.into()),
            ("area", area.into()),
        ],
    ))
}

/// Hop distance between two nonempty sets of a connected graph.
fn set_distance(graph: &MeasuredGraph, a: &VertexSubset, b: &VertexSubset) -> usize {
    a.iter()
        .flat_map(|u| {
            let d = graph.distances_from(u);
            b.iter().filter_map(move |v| d[v]).collect::<Vec<_>>()
        })
        .min()
        .unwrap_or(usize::MAX)
}

/// `sλ/(2(1+s)K) <= c` for the vertex Cheeger constant and the measured gap.
pub fn verify_poincare_to_cheeger_measured(
    graph: &MeasuredGraph,
    config: &VerifyConfig,
) -> Result<InequalityReport> {
    let (k, s) = shape(graph)?;
    let c = cheeger::cheeger_vertex(graph, &config.enumeration)?.value;
    let lambda = lambda_gap(graph, config)?;
    let factor = rational::to_f64(&(&s / (int(2) * (Rational::one() + &s) * int(k as i64))));
    Ok(InequalityReport::new(
        "poincare-to-cheeger",
        vec![Check::at_most("lower", (factor * lambda).into(), c.clone().into())],
        vec![("c", c.into()), ("lambda", lambda.into()), ("K", k.into()), ("s", s.into())],
    ))
}

/// Level-set decomposition of the edge energy of a nonnegative function.
pub fn verify_coarea(walk: &ReversibleWalk, f: &[Rational]) -> Result<InequalityReport> {
    let report = spectral::coarea_check(walk, f)?;
    Ok(InequalityReport::new(
        "coarea",
        vec![Check::equal("identity", report.direct.into(), report.level_sum.into(), 0.0)],
        vec![("n", walk.graph().n().into())],
    ))
}

/// `c_p <= E_p(f)/P_p(f)` for the best function found by the multi-start
/// search, where `c_p` comes from the conductance Cheeger constant. The
/// search result bounds the optimal constant from above, so a violation
/// here refutes the Lp-Poincare inequality.
pub fn verify_lp_poincare(
    walk: &ReversibleWalk,
    p: f64,
    restarts: usize,
    seed: u64,
    config: &VerifyConfig,
) -> Result<InequalityReport> {
    let c = cheeger::cheeger_conductance(walk, walk.stationary(), &config.enumeration)?.value;
    let cp = poincare::cp_formula(rational::to_f64(&c), p);
    let estimate = poincare::optimal_lp_constant(walk, p, restarts, seed)?;
    Ok(InequalityReport::new(
        "lp-poincare",
        vec![Check::at_most("lower", cp.into(), estimate.estimate.into())],
        vec![
            ("c", c.into()),
            ("p", p.into()),
            ("estimate", estimate.estimate.into()),
            ("restarts", restarts.into()),
            ("seed", Quantity::Exact(int(seed as i64))),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::rational::ratio;

    fn cfg() -> VerifyConfig {
        VerifyConfig::default()
    }

    fn exact(q: &Quantity) -> Rational {
        q.as_exact().expect("exact quantity").clone()
    }

    #[test]
    fn cheeger_sandwich_c6() {
        let walk = ReversibleWalk::auxiliary(&cycle(6)).unwrap();
        let r = verify_cheeger_sandwich(&walk, &cfg()).unwrap();
        assert!(r.holds);
        assert_eq!(exact(&r.inputs["c"]), ratio(1, 3));
        assert!((r.inputs["lambda"].to_f64() - 0.5).abs() < 1e-9);
        assert_eq!(exact(&r.check("lower").unwrap().lhs), ratio(1, 18));
        assert_eq!(exact(&r.check("upper").unwrap().rhs), ratio(2, 3));
    }

    #[test]
    fn cheeger_sandwich_k2_is_tight_above() {
        let walk = ReversibleWalk::auxiliary(&complete(2)).unwrap();
        let r = verify_cheeger_sandwich(&walk, &cfg()).unwrap();
        assert!(r.holds);
        assert!(r.check("upper").unwrap().slack.to_f64().abs() < 1e-9);
    }

    #[test]
    fn measured_sandwich_examples() {
        let r = verify_measured_sandwich(&cycle(6), &cfg()).unwrap();
        assert!(r.holds);
        assert_eq!(exact(&r.check("lower").unwrap().lhs), ratio(1, 18));
        assert_eq!(exact(&r.check("upper").unwrap().rhs), ratio(16, 3));
        let k2 = verify_measured_sandwich(&complete(2), &cfg()).unwrap();
        assert!(k2.holds);
        assert!((k2.inputs["lambda"].to_f64() - 4.0).abs() < 1e-9);
        assert_eq!(exact(&k2.check("upper").unwrap().rhs), int(4));
    }

    #[test]
    fn gap_controls_examples() {
        let k2 = verify_gap_controls(&complete(2), &cfg()).unwrap();
        assert!(k2.holds);
        assert!((k2.inputs["lambdaPrime"].to_f64() - 2.0).abs() < 1e-9);
        for c in &k2.checks {
            assert!(c.slack.to_f64().abs() < 1e-9);
        }
        assert!(verify_gap_controls(&cycle(7), &cfg()).unwrap().holds);
        assert!(verify_gap_controls(&complete(5), &cfg()).unwrap().holds);
    }

    #[test]
    fn distance_bound_examples() {
        let walk = ReversibleWalk::auxiliary(&cycle(6)).unwrap();
        let a = VertexSubset::from_indices(6, [0]);
        let b = VertexSubset::from_indices(6, [3]);
        let r = distance_gap_bound(&walk, &a, &b, &cfg()).unwrap();
        assert!(r.holds);
        assert!((r.checks[0].lhs.to_f64() - 4.5).abs() < 1e-9);
        assert_eq!(exact(&r.checks[0].rhs), int(6));

        let k2 = ReversibleWalk::auxiliary(&complete(2)).unwrap();
        let a = VertexSubset::from_indices(2, [0]);
        let r = distance_gap_bound(&k2, &a, &a.complement(), &cfg()).unwrap();
        assert!(r.holds);
        assert!(r.checks[0].slack.to_f64().abs() < 1e-9);

        assert!(distance_gap_bound(&walk, &a_of(6, &[0, 1]), &a_of(6, &[1]), &cfg()).is_err());
        assert!(distance_gap_bound(&walk, &VertexSubset::empty(6), &b, &cfg()).is_err());
    }

    fn a_of(n: usize, v: &[usize]) -> VertexSubset {
        VertexSubset::from_indices(n, v.iter().copied())
    }

    #[test]
    fn poincare_to_cheeger_examples() {
        let r = verify_poincare_to_cheeger_measured(&cycle(6), &cfg()).unwrap();
        assert!(r.holds);
        assert_eq!(exact(&r.checks[0].rhs), ratio(2, 3));
        let k2 = verify_poincare_to_cheeger_measured(&complete(2), &cfg()).unwrap();
        assert!(k2.holds);
        assert!(k2.checks[0].slack.to_f64().abs() < 1e-9);
    }

    #[test]
    fn exact_sides_compare_without_slack() {
        let c = Check::at_most("x", ratio(1, 3).into(), (ratio(1, 3) - ratio(1, 1_000_000_000_000)).into());
        assert!(!c.holds);
        let f = Check::at_most("x", 1.0.into(), 1.0.into());
        assert!(f.holds);
    }

    #[test]
    fn reports_serialize_rationals_as_strings() {
        let walk = ReversibleWalk::auxiliary(&cycle(6)).unwrap();
        let r = verify_cheeger_sandwich(&walk, &cfg()).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["inputsDigest"]["c"], "1/3");
        assert_eq!(json["checks"][0]["relation"], "<=");
    }

    #[test]
    fn coarea_and_lp_verifiers() {
        let walk = ReversibleWalk::auxiliary(&star(3)).unwrap();
        let f = vec![int(0), ratio(1, 2), int(2), ratio(1, 2)];
        assert!(verify_coarea(&walk, &f).unwrap().holds);
        assert!(verify_lp_poincare(&walk, 1.5, 8, 0, &cfg()).unwrap().holds);
    }
}
