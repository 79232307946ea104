//! Lp-Poincare energies, the explicit constants `c_p` and `κ`, and a
//! multi-start search for the optimal Poincare constant.
//!
//! Energies use the ordered-pair convention on both sides: a sum over
//! adjacent `u ~ v` counts `(u, v)` and `(v, u)`, and the pair form runs over
//! all ordered pairs `(u, v) ∈ V × V`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::MeasuredGraph;
use crate::rational;
use crate::walk::ReversibleWalk;

/// Smoothing width for `|x|` inside the optimizer when `p < 2`.
pub const SMOOTHING: f64 = 1e-9;
pub const DEFAULT_RESTARTS: usize = 64;
const MAX_ITERATIONS: usize = 4000;
const GRADIENT_TOLERANCE: f64 = 1e-8;

/// Edge weights and vertex weights defining one Poincare inequality:
/// `Σ_{u~v} |f(u)-f(v)|^p a(u,v) >= c Σ_{u,v} |f(u)-f(v)|^p w(u)w(v)/w(V)`.
#[derive(Clone, Debug)]
pub struct PoincareForm {
    edges: Vec<(usize, usize, f64)>,
    weights: Vec<f64>,
    total: f64,
}

impl PoincareForm {
    /// Conductance on edges, stationary measure in the pair form.
    pub fn from_walk(walk: &ReversibleWalk) -> Self {
        let weights: Vec<f64> = walk.stationary().iter().map(rational::to_f64).collect();
        Self::new(
            walk.edge_conductances()
                .map(|((u, v), a)| (u, v, rational::to_f64(a)))
                .collect(),
            weights,
        )
    }

    /// `m(u) + m(v)` on edges, `m` in the pair form.
    pub fn measured(graph: &MeasuredGraph) -> Self {
        let m: Vec<f64> = graph.measure().iter().map(rational::to_f64).collect();
        let edges = graph.edges().map(|(u, v)| (u, v, m[u] + m[v])).collect();
        Self::new(edges, m)
    }

    fn new(edges: Vec<(usize, usize, f64)>, weights: Vec<f64>) -> Self {
        let total = weights.iter().sum();
        PoincareForm {
            edges,
            weights,
            total,
        }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// `Σ_{edges} |f(u)-f(v)|^p a(u,v)`, each edge once.
    pub fn edge_energy(&self, f: &[f64], p: f64) -> f64 {
        self.edges
            .iter()
            .map(|&(u, v, a)| (f[u] - f[v]).abs().powf(p) * a)
            .sum()
    }

    /// `Σ_{u~v} |f(u)-f(v)|^p a(u,v)` over ordered adjacent pairs.
    pub fn ordered_energy(&self, f: &[f64], p: f64) -> f64 {
        let mut acc = 0.0;
        for &(u, v, a) in &self.edges {
            acc += (f[u] - f[v]).abs().powf(p) * a;
            acc += (f[v] - f[u]).abs().powf(p) * a;
        }
        acc
    }

    /// `Σ_{u,v} |f(u)-f(v)|^p w(u)w(v)/w(V)` over ordered pairs.
    pub fn pair_form(&self, f: &[f64], p: f64) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for u in 0..n {
            for v in 0..n {
                acc += (f[u] - f[v]).abs().powf(p) * self.weights[u] * self.weights[v];
            }
        }
        acc / self.total
    }

    /// Vector-valued energies with `‖x‖_p^p = Σ_j |x_j|^p`; `f[j]` is coordinate `j`.
    pub fn vector_energies(&self, f: &[Vec<f64>], p: f64) -> (f64, f64) {
        f.iter().fold((0.0, 0.0), |(e, q), coord| {
            (e + self.ordered_energy(coord, p), q + self.pair_form(coord, p))
        })
    }

    pub fn ratio(&self, f: &[f64], p: f64) -> Result<f64> {
        check_exponent(p)?;
        if f.len() != self.n() {
            return Err(Error::invalid("function length differs from vertex count"));
        }
        let denom = self.pair_form(f, p);
        if denom == 0.0 {
            return Err(Error::invalid("ratio undefined for a constant function"));
        }
        Ok(self.ordered_energy(f, p) / denom)
    }

    /// Smoothed ratio and its gradient.
    fn smoothed(&self, f: &[f64], p: f64, grad: &mut [f64]) -> f64 {
        let n = self.n();
        let eps2 = if p < 2.0 { SMOOTHING * SMOOTHING } else { 0.0 };
        // φ(x) = (x² + ε²)^{p/2}, φ'(x) = p x (x² + ε²)^{p/2 - 1}
        let phi = |x: f64| (x * x + eps2).powf(p / 2.0);
        let dphi = |x: f64| {
            let s = x * x + eps2;
            if s == 0.0 {
                0.0
            } else {
                p * x * s.powf(p / 2.0 - 1.0)
            }
        };
        let mut ge = vec![0.0; n];
        let mut gp = vec![0.0; n];
        let mut energy = 0.0;
        for &(u, v, a) in &self.edges {
            let d = f[u] - f[v];
            energy += 2.0 * phi(d) * a;
            let g = 2.0 * dphi(d) * a;
            ge[u] += g;
            ge[v] -= g;
        }
        let mut pair = 0.0;
        for u in 0..n {
            for v in u + 1..n {
                let d = f[u] - f[v];
                let w = self.weights[u] * self.weights[v] / self.total;
                pair += 2.0 * phi(d) * w;
                let g = 2.0 * dphi(d) * w;
                gp[u] += g;
                gp[v] -= g;
            }
        }
        let r = energy / pair;
        for i in 0..n {
            grad[i] = (ge[i] - r * gp[i]) / pair;
        }
        r
    }

    /// Removes the weighted mean and scales to unit weighted norm.
    fn normalize(&self, f: &mut [f64]) -> bool {
        let mean = f.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>() / self.total;
        for x in f.iter_mut() {
            *x -= mean;
        }
        let norm = f
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * x * w)
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return false;
        }
        for x in f.iter_mut() {
            *x /= norm;
        }
        true
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("exponent p must be >= 1, got {p}")))
    }
}

/// `Σ_{u~v}|f(u)-f(v)|^p a(u,v) / Σ_{u,v}|f(u)-f(v)|^p μ(u)μ(v)/μ(V)`.
pub fn lp_energy_ratio(walk: &ReversibleWalk, f: &[f64], p: f64) -> Result<f64> {
    PoincareForm::from_walk(walk).ratio(f, p)
}

/// Both sides of the measured Lp-Poincare inequality.
#[derive(Clone, Debug, Serialize)]
pub struct MeasuredLpCheck {
    /// `Σ_{u~v} |f(u)-f(v)|^p (m(u)+m(v))`.
    pub lhs: f64,
    /// `Σ_{u,v} |f(u)-f(v)|^p m(u)m(v)/m(V)`.
    #[serde(rename = "rhsPerUnit")]
    pub rhs_per_unit: f64,
    pub ratio: f64,
}

pub fn measured_lp_check(graph: &MeasuredGraph, f: &[f64], p: f64) -> Result<MeasuredLpCheck> {
    if let Some(v) = graph.measure().iter().position(num_traits::Zero::is_zero) {
        return Err(Error::NotFullSupport(v));
    }
    let form = PoincareForm::measured(graph);
    let ratio = form.ratio(f, p)?;
    Ok(MeasuredLpCheck {
        lhs: form.ordered_energy(f, p),
        rhs_per_unit: form.pair_form(f, p),
        ratio,
    })
}

/// The Lp-Poincare constant obtained from a conductance Cheeger constant `c`:
/// `c²/2` for `1 <= p < 2`, and
/// `(4c² / (p² 2^{1+2/p}))^{p/2} / 2^{p+1}` for `p >= 2`.
pub fn cp_formula(c: f64, p: f64) -> f64 {
    if p < 2.0 {
        c * c / 2.0
    } else {
        let base = 4.0 * c * c / (p * p * 2f64.powf(1.0 + 2.0 / p));
        base.powf(p / 2.0) / 2f64.powf(p + 1.0)
    }
}

/// `ρ₊(1)^p K (1+s) / (s c_p)` with `c_p = cp_formula(c, p)`.
pub fn kappa_constant(max_valency: usize, s: f64, c: f64, p: f64, rho_plus_at_one: f64) -> f64 {
    kappa_with(max_valency, s, cp_formula(c, p), p, rho_plus_at_one)
}

/// Poincare constant for `Σ_{u~v}|Δf|^p (m(u)+m(v)) >= c_p Σ_{u,v}|Δf|^p m(u)m(v)/m(V)`
/// on a graph with valency `<= K`, measure ratio `>= s` and vertex Cheeger
/// constant `>= c`: the auxiliary walk has conductance Cheeger constant at
/// least `cs/K`, and its pair form dominates the `m` pair form by `s(1+s)/K`.
pub fn measured_cp(max_valency: usize, s: f64, c: f64, p: f64) -> f64 {
    let k = max_valency as f64;
    cp_formula(c * s / k, p) * s * (1.0 + s) / k
}

/// `κ` built from [`measured_cp`].
pub fn kappa_measured(max_valency: usize, s: f64, c: f64, p: f64, rho_plus_at_one: f64) -> f64 {
    kappa_with(max_valency, s, measured_cp(max_valency, s, c, p), p, rho_plus_at_one)
}

fn kappa_with(max_valency: usize, s: f64, cp: f64, p: f64, rho_plus_at_one: f64) -> f64 {
    rho_plus_at_one.powf(p) * max_valency as f64 * (1.0 + s) / (s * cp)
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareEstimate {
    pub p: f64,
    /// Unsmoothed ratio at `minimizer`.
    pub estimate: f64,
    pub minimizer: Vec<f64>,
    pub restarts: usize,
    /// Whether the best restart reached gradient norm below 1e-8.
    pub converged: bool,
    pub iterations: usize,
    pub seed: u64,
}

/// Multi-start projected gradient descent on the energy ratio. Every returned
/// estimate is the ratio of an actual function, hence an upper bound on the
/// optimal constant.
pub fn optimal_lp_constant(walk: &ReversibleWalk, p: f64, restarts: usize, seed: u64) -> Result<PoincareEstimate> {
    check_exponent(p)?;
    if !walk.graph().is_connected() {
        return Err(Error::Disconnected("optimal_lp_constant"));
    }
    if walk.graph().n() < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    optimal_for_form(&PoincareForm::from_walk(walk), p, restarts, seed)
}

pub fn optimal_for_form(form: &PoincareForm, p: f64, restarts: usize, seed: u64) -> Result<PoincareEstimate> {
    let restarts = restarts.max(1);
    let runs: Vec<(f64, Vec<f64>, bool, usize)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            descend(form, p, &mut rng)
        })
        .collect();
    let (best, (estimate, minimizer, converged, iterations)) = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.0.total_cmp(&b.0).then(i.cmp(j)))
        .expect("at least one restart");
    let _ = best;
    Ok(PoincareEstimate {
        p,
        estimate,
        minimizer,
        restarts,
        converged,
        iterations,
        seed,
    })
}

fn descend(form: &PoincareForm, p: f64, rng: &mut ChaCha8Rng) -> (f64, Vec<f64>, bool, usize) {
    let n = form.n();
    let mut f: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    while !form.normalize(&mut f) {
        f = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    }
    let mut grad = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];
    let mut value = form.smoothed(&f, p, &mut grad);
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while step > 1e-16 {
            let mut trial: Vec<f64> = f.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
            if form.normalize(&mut trial) {
                let trial_value = form.smoothed(&trial, p, &mut trial_grad);
                if trial_value <= value - 1e-4 * step * gnorm2 {
                    f = trial;
                    value = trial_value;
                    std::mem::swap(&mut grad, &mut trial_grad);
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step *= 2.0;
    }
    let exact = form.ratio(&f, p).unwrap_or(value);
    (exact, f, converged, iterations)
}

/// Both sides of `Σ_{u,v} |f(u)-f(v)|² w(u)w(v)/w(V) = 2 Σ_u |f(u)|² w(u)`
/// for a `w`-mean-zero `f` (vector-valued: summed over coordinates).
pub fn mean_zero_identity(weights: &[f64], f: &[Vec<f64>]) -> (f64, f64) {
    let form = PoincareForm::new(Vec::new(), weights.to_vec());
    let pair: f64 = f.iter().map(|coord| form.pair_form(coord, 2.0)).sum();
    let norm: f64 = f
        .iter()
        .map(|coord| 2.0 * coord.iter().zip(weights).map(|(x, w)| x * x * w).sum::<f64>())
        .sum();
    (pair, norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::rational::int;
    use crate::spectral::{delta_operator, lambda_operator, SpectralConfig};

    fn walk_const(g: &MeasuredGraph, a: i64) -> ReversibleWalk {
        ReversibleWalk::from_conductance(g, |_, _| Some(int(a))).unwrap()
    }

    #[test]
    fn ordered_energy_is_twice_edge_energy() {
        let walk = ReversibleWalk::auxiliary(&star(4)).unwrap();
        let form = PoincareForm::from_walk(&walk);
        let f = [0.3, -1.2, 2.0, 0.0, 0.7];
        for p in [1.0, 1.5, 2.0, 3.0] {
            let e = form.edge_energy(&f, p);
            assert!((form.ordered_energy(&f, p) - 2.0 * e).abs() < 1e-12);
        }
    }

    #[test]
    fn p2_ratio_at_gap_vector_is_gap() {
        let walk = ReversibleWalk::auxiliary(&cycle(7)).unwrap();
        let spec = delta_operator(&walk).spectrum(&SpectralConfig::default()).unwrap();
        let r = lp_energy_ratio(&walk, spec.gap_vector().unwrap(), 2.0).unwrap();
        assert!((r - spec.gap.unwrap()).abs() < 1e-8);
    }

    #[test]
    fn two_point_ratio_is_two() {
        for a in [1, 3] {
            let walk = walk_const(&complete(2), a);
            assert!((lp_energy_ratio(&walk, &[0.5, -0.5], 2.0).unwrap() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ratio_is_affine_invariant() {
        let walk = ReversibleWalk::auxiliary(&cycle(5)).unwrap();
        let f = [1.0, 0.2, -0.3, 0.9, 4.0];
        let g: Vec<f64> = f.iter().map(|x| -2.5 * x + 7.0).collect();
        for p in [1.0, 2.0, 3.5] {
            let a = lp_energy_ratio(&walk, &f, p).unwrap();
            let b = lp_energy_ratio(&walk, &g, p).unwrap();
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
        assert!(lp_energy_ratio(&walk, &[1.0; 5], 2.0).is_err());
        assert!(lp_energy_ratio(&walk, &f, 0.5).is_err());
    }

    #[test]
    fn cp_formula_values() {
        assert_eq!(cp_formula(1.0, 1.5), 0.5);
        assert!((cp_formula(1.0, 2.0) - 1.0 / 32.0).abs() < 1e-15);
        assert!((cp_formula(1.0, 4.0) - 2.44140625e-4).abs() < 1e-15);
    }

    #[test]
    fn kappa_values() {
        assert!((kappa_constant(2, 0.5, 1.0, 1.0, 1.0) - 12.0).abs() < 1e-12);
        assert_eq!(kappa_constant(2, 0.5, 1.0, 1.0, 0.0), 0.0);
        let k1 = kappa_constant(3, 0.25, 0.4, 1.0, 1.0);
        let k2 = kappa_constant(3, 0.25, 0.4, 1.0, 2.0);
        assert!((k2 - 2.0 * k1).abs() < 1e-9 * k1);
    }

    #[test]
    fn measured_check_examples() {
        let c6 = cycle(6);
        let f = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        let check = measured_lp_check(&c6, &f, 2.0).unwrap();
        assert!((check.lhs - 32.0).abs() < 1e-12);
        assert!((check.rhs_per_unit - 12.0).abs() < 1e-12);
        assert!((check.ratio - 8.0 / 3.0).abs() < 1e-12);
        let shifted: Vec<f64> = f.iter().map(|x| x + 3.0).collect();
        let again = measured_lp_check(&c6, &shifted, 2.0).unwrap();
        assert_eq!(again.ratio, check.ratio);

        let spec = lambda_operator(&c6).unwrap().spectrum(&SpectralConfig::default()).unwrap();
        let at_gap = measured_lp_check(&c6, spec.gap_vector().unwrap(), 2.0).unwrap();
        assert!((at_gap.ratio - spec.gap.unwrap()).abs() < 1e-8);
        assert!(check.ratio >= spec.gap.unwrap());
    }

    #[test]
    fn optimizer_finds_p2_gap() {
        let walk = ReversibleWalk::auxiliary(&cycle(6)).unwrap();
        let est = optimal_lp_constant(&walk, 2.0, 16, 3).unwrap();
        assert!((est.estimate - 0.5).abs() < 1e-6, "{est:?}");
        let again = optimal_lp_constant(&walk, 2.0, 16, 3).unwrap();
        assert_eq!(est.estimate.to_bits(), again.estimate.to_bits());
        let r = lp_energy_ratio(&walk, &est.minimizer, 2.0).unwrap();
        assert!((r - est.estimate).abs() < 1e-12);
    }

    #[test]
    fn optimizer_on_two_points_is_exact() {
        let walk = walk_const(&complete(2), 5);
        for p in [1.0, 2.0, 3.0] {
            let est = optimal_lp_constant(&walk, p, 4, 0).unwrap();
            assert!((est.estimate - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_zero_identity_two_points() {
        let (pair, norm) = mean_zero_identity(&[2.0, 2.0], &[vec![1.0, -1.0]]);
        assert_eq!(pair, 8.0);
        assert_eq!(norm, 8.0);
    }
}
