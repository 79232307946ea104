//! Graph Laplacians as symmetric pencils `(stiffness, mass)`.
//!
//! The random-walk Laplacian `Δ = I - r` on `ℓ²(V; μ)` is represented by the
//! pencil `L_a f = λ D_μ f`, where `L_a` is the conductance Laplacian
//! (diagonal `μ(u)`, off-diagonal `-a(u, v)`). The measured Laplacian `Λ` on
//! `ℓ²(V; m)` uses the conductance `a(u, v) = m(u) + m(v)` with mass `m`.
//! Both are reduced to an ordinary symmetric problem by the conjugation
//! `M = D^{-1/2} L D^{-1/2}`.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::MeasuredGraph;
use crate::linalg::{self, Matrix};
use crate::rational::{self, Rational};
use crate::walk::ReversibleWalk;

pub const ZERO_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Delta,
    Lambda,
}

#[derive(Clone, Debug)]
pub struct SelfAdjointOperator {
    pub kind: OperatorKind,
    pub stiffness: Matrix,
    pub mass: Vec<f64>,
    /// Component id per vertex of the underlying graph.
    pub components: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralConfig {
    pub zero_tolerance: f64,
    pub off_diagonal_tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            zero_tolerance: ZERO_TOLERANCE,
            off_diagonal_tolerance: linalg::OFF_DIAGONAL_TOLERANCE,
            max_sweeps: linalg::MAX_SWEEPS,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// Generalized eigenvectors (`L f = λ D f`), normalized to unit mass norm.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// Smallest eigenvalue above the zero tolerance.
    pub gap: Option<f64>,
    #[serde(rename = "zeroMultiplicity")]
    pub zero_multiplicity: usize,
}

fn laplacian<'a>(n: usize, weights: impl Iterator<Item = ((usize, usize), &'a Rational)>) -> Matrix {
    let mut l = Matrix::zeros(n);
    let mut diag = vec![Rational::zero(); n];
    for ((u, v), a) in weights {
        let x = rational::to_f64(a);
        l[(u, v)] = -x;
        l[(v, u)] = -x;
        diag[u] += a;
        diag[v] += a;
    }
    for (u, d) in diag.iter().enumerate() {
        l[(u, u)] = rational::to_f64(d);
    }
    l
}

/// The random-walk Laplacian `(Δf)(v) = f(v) - Σ_u r(v, u) f(u)`.
pub fn delta_operator(walk: &ReversibleWalk) -> SelfAdjointOperator {
    let graph = walk.graph();
    SelfAdjointOperator {
        kind: OperatorKind::Delta,
        stiffness: laplacian(graph.n(), walk.edge_conductances()),
        mass: walk.stationary().iter().map(rational::to_f64).collect(),
        components: graph.components().0,
    }
}

/// The measured Laplacian with quadratic form `Σ_{edges} |f(u) - f(v)|² (m(u) + m(v))`
/// against the mass `m`.
pub fn lambda_operator(graph: &MeasuredGraph) -> Result<SelfAdjointOperator> {
    if let Some(v) = (0..graph.n()).find(|&v| graph.m(v).is_zero()) {
        return Err(Error::NotFullSupport(v));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected("lambda_operator"));
    }
    let weights: Vec<((usize, usize), Rational)> = graph
        .edges()
        .map(|(u, v)| ((u, v), graph.m(u) + graph.m(v)))
        .collect();
    Ok(SelfAdjointOperator {
        kind: OperatorKind::Lambda,
        stiffness: laplacian(graph.n(), weights.iter().map(|(e, a)| (*e, a))),
        mass: graph.measure().iter().map(rational::to_f64).collect(),
        components: graph.components().0,
    })
}

impl SelfAdjointOperator {
    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn component_count(&self) -> usize {
        self.components.iter().copied().max().map_or(0, |c| c + 1)
    }

    /// `fᵀ L f`.
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        self.stiffness.mul_vec(f).iter().zip(f).map(|(a, b)| a * b).sum()
    }

    /// `fᵀ D f`.
    pub fn mass_norm_sq(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.mass).map(|(x, m)| x * x * m).sum()
    }

    /// The operator applied to `f`: `D^{-1} L f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.stiffness
            .mul_vec(f)
            .iter()
            .zip(&self.mass)
            .map(|(x, m)| x / m)
            .collect()
    }

    /// `(fᵀ L f) / (fᵀ D f)`.
    pub fn rayleigh(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.n() {
            return Err(Error::invalid("vector length differs from vertex count"));
        }
        let denom = self.mass_norm_sq(f);
        if denom <= 0.0 {
            return Err(Error::invalid("Rayleigh quotient of the zero vector"));
        }
        Ok(self.quadratic_form(f) / denom)
    }

    /// Full spectrum of the pencil.
    pub fn spectrum(&self, config: &SpectralConfig) -> Result<SpectralResult> {
        let n = self.n();
        let inv_sqrt: Vec<f64> = self.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let mut sym = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                sym[(i, j)] = inv_sqrt[i] * self.stiffness[(i, j)] * inv_sqrt[j];
            }
        }
        let eig = linalg::jacobi_eigen(&sym, config.off_diagonal_tolerance, config.max_sweeps)?;
        let eigenvectors = eig
            .vectors
            .iter()
            .map(|y| y.iter().zip(&inv_sqrt).map(|(a, b)| a * b).collect())
            .collect();
        let zero_multiplicity = eig
            .values
            .iter()
            .filter(|&&x| x < config.zero_tolerance)
            .count();
        let gap = eig
            .values
            .iter()
            .copied()
            .find(|&x| x >= config.zero_tolerance);
        Ok(SpectralResult {
            eigenvalues: eig.values,
            eigenvectors,
            gap,
            zero_multiplicity,
        })
    }
}

impl SpectralResult {
    /// Eigenvector belonging to the gap eigenvalue.
    pub fn gap_vector(&self) -> Option<&[f64]> {
        let k = self.zero_multiplicity;
        self.gap.map(|_| self.eigenvectors[k].as_slice())
    }
}

/// Both sides of the level-set decomposition of the edge energy `B_f`.
#[derive(Clone, Debug, Serialize)]
pub struct CoareaReport {
    /// `Σ_e |f(e⁺)² − f(e⁻)²| a(e)`.
    #[serde(with = "rational::serde_str")]
    pub direct: Rational,
    /// `Σ_i a(∂^E L_i) (β_i² − β_{i−1}²)` over the level sets `L_i = {f ≥ β_i}`.
    #[serde(with = "rational::serde_str")]
    pub level_sum: Rational,
    pub equal: bool,
}

pub fn coarea_check(walk: &ReversibleWalk, f: &[Rational]) -> Result<CoareaReport> {
    let graph = walk.graph();
    if f.len() != graph.n() {
        return Err(Error::invalid("function length differs from vertex count"));
    }
    if let Some(v) = f.iter().position(|x| !rational::is_nonnegative(x)) {
        return Err(Error::invalid(format!("f must be nonnegative; f({v}) = {}", f[v])));
    }
    let direct: Rational = walk
        .edge_conductances()
        .map(|((u, v), a)| {
            let d = &f[u] * &f[u] - &f[v] * &f[v];
            if d < Rational::zero() {
                -d * a
            } else {
                d * a
            }
        })
        .sum();

    let mut levels: Vec<&Rational> = f.iter().collect();
    levels.sort();
    levels.dedup();
    let mut level_sum = Rational::zero();
    for pair in levels.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let cut: Rational = walk
            .edge_conductances()
            .filter(|((u, v), _)| (f[*u] >= *hi) != (f[*v] >= *hi))
            .map(|(_, a)| a)
            .sum();
        level_sum += cut * (hi * hi - lo * lo);
    }
    let equal = direct == level_sum;
    Ok(CoareaReport {
        direct,
        level_sum,
        equal,
    })
}
