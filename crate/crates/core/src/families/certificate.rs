use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cheeger::{cheeger_vertex, EnumerationConfig};
use crate::error::{Error, Result};
use crate::graph::MeasuredGraph;
use crate::poincare::{kappa_constant, kappa_measured};
use crate::rational::{self, int, Rational};
use crate::spectral::{lambda_operator, SpectralConfig};

use super::report::GraphFamily;

/// Relative safety margin applied to the spectral lower bound on `c`.
const SPECTRAL_MARGIN: f64 = 1e-9;
/// Float allowance when testing the Lipschitz hypothesis of a test map.
const LIPSCHITZ_SLACK: f64 = 1e-12;

/// A nondecreasing function on `[0, ∞)` given by breakpoints, interpolated
/// linearly and extended past the last breakpoint with the last slope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoTable {
    points: Vec<(f64, f64)>,
}

impl RhoTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("rho table needs at least one point"));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite() || *t < 0.0 || *v < 0.0) {
            return Err(Error::invalid("rho table entries must be finite and nonnegative"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0 || w[1].1 < w[0].1) {
            return Err(Error::invalid("rho table must be strictly increasing in t and nondecreasing in value"));
        }
        Ok(RhoTable { points })
    }

    /// `ρ(t) = t`.
    pub fn identity() -> Self {
        RhoTable {
            points: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        let i = pts.partition_point(|(x, _)| *x <= t);
        let (a, b) = if i < pts.len() {
            (pts[i - 1], pts[i])
        } else if pts.len() >= 2 {
            (pts[pts.len() - 2], pts[pts.len() - 1])
        } else {
            return pts[0].1;
        };
        a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
    }
}

/// A map `V → R^k`; `coordinates[j][x]` is coordinate `j` of the image of `x`.
#[derive(Clone, Debug, Serialize)]
pub struct TestMap {
    pub name: String,
    pub coordinates: Vec<Vec<f64>>,
}

impl TestMap {
    fn distance_p(&self, x: usize, y: usize, p: f64) -> f64 {
        self.coordinates
            .iter()
            .map(|c| (c[x] - c[y]).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Maps expected to satisfy `‖f(x) - f(y)‖_p <= ρ(d(x, y))` when `ρ` grows at
/// least linearly: scaled distance functions from a few base points, and
/// random vector maps whose coordinates are scaled minima of shifted
/// distance functions.
pub fn default_test_maps(graph: &MeasuredGraph, p: f64, rho: &RhoTable, count: usize, seed: u64) -> Vec<TestMap> {
    let n = graph.n();
    let dist = graph.all_distances();
    let d = |x: usize, y: usize| dist[x][y].unwrap_or(usize::MAX) as f64;
    let diameter = graph.diameter() as f64;
    let unit = rho.eval(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut maps = Vec::with_capacity(count);
    for i in 0..count {
        if i < 2 {
            let base = if i == 0 { 0 } else { rng.random_range(0..n) };
            maps.push(TestMap {
                name: format!("distance-from-{base}"),
                coordinates: vec![(0..n).map(|x| unit * d(x, base)).collect()],
            });
            continue;
        }
        let k = rng.random_range(1..=4usize);
        let coord_scale = unit * (k as f64).powf(-1.0 / p);
        let coordinates = (0..k)
            .map(|_| {
                let anchors: Vec<(usize, f64)> = (0..rng.random_range(1..=3))
                    .map(|_| (rng.random_range(0..n), rng.random_range(0.0..=diameter.max(1.0))))
                    .collect();
                let u: f64 = rng.random_range(0.0..=1.0);
                (0..n)
                    .map(|x| {
                        let g = anchors
                            .iter()
                            .map(|&(b, o)| d(x, b) + o)
                            .fold(f64::INFINITY, f64::min);
                        coord_scale * u * g
                    })
                    .collect()
            })
            .collect();
        maps.push(TestMap {
            name: format!("random-{i}"),
            coordinates,
        });
    }
    maps
}

/// A symmetric measure on ordered pairs, stored sparsely.
#[derive(Clone, Debug, Default)]
pub struct PairMeasure {
    pub entries: BTreeMap<(usize, usize), Rational>,
}

impl PairMeasure {
    pub fn get(&self, x: usize, y: usize) -> Rational {
        self.entries.get(&(x, y)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.entries.values().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries
            .iter()
            .all(|(&(x, y), w)| self.entries.get(&(y, x)) == Some(w))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RejectedMap {
    pub name: String,
    pub x: usize,
    pub y: usize,
    /// `‖f(x) - f(y)‖_p`.
    pub lhs: f64,
    /// `ρ(d(x, y))`.
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateRow {
    pub index: usize,
    pub n: usize,
    #[serde(with = "rational::serde_str")]
    pub gamma: Rational,
    /// `log_K(1/(8γ))`; pairs at distance `<= r` are excluded.
    pub r: f64,
    /// Why the member was skipped, if it was.
    pub skipped: Option<String>,
    /// Lower bound on the vertex Cheeger constant used for `κ`.
    #[serde(with = "rational::serde_str")]
    pub cheeger: Rational,
    #[serde(rename = "cheegerExact")]
    pub cheeger_exact: bool,
    #[serde(rename = "diagonalPairs")]
    pub diagonal_pairs: usize,
    /// `μ_n` mass of pairs at distance `> r`, with `μ_n(x, y) = m(x) m(y)`.
    #[serde(rename = "offDiagonalMass", with = "rational::serde_str")]
    pub off_diagonal_mass: Rational,
    pub symmetric: bool,
    pub probability: bool,
    #[serde(rename = "offDiagonalSupport")]
    pub off_diagonal_support: bool,
    #[serde(rename = "massCondition")]
    pub mass_condition: bool,
    pub accepted: usize,
    pub rejected: Vec<RejectedMap>,
    #[serde(rename = "maxTestedEnergy")]
    pub max_tested_energy: f64,
    #[serde(rename = "energyBoundHolds")]
    pub energy_bound_holds: bool,
    /// The normalized pair measure `ν_n`.
    #[serde(skip)]
    pub nu: PairMeasure,
}

impl CertificateRow {
    pub fn holds(&self) -> bool {
        self.skipped.is_some()
            || (self.symmetric
                && self.probability
                && self.off_diagonal_support
                && self.mass_condition
                && self.energy_bound_holds)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralisedCertificate {
    pub p: f64,
    #[serde(rename = "K")]
    pub max_valency: usize,
    #[serde(with = "rational::serde_str")]
    pub s: Rational,
    #[serde(with = "rational::serde_str")]
    pub c: Rational,
    #[serde(rename = "rhoAtOne")]
    pub rho_at_one: f64,
    /// Energy constant for measured graphs, from the auxiliary-walk Poincare inequality.
    pub kappa: f64,
    /// `ρ(1)^p K(1+s)/(s c_p)` with `c_p` evaluated at the vertex Cheeger constant.
    #[serde(rename = "kappaReference")]
    pub kappa_reference: f64,
    #[serde(rename = "energyBound")]
    pub energy_bound: f64,
    pub rows: Vec<CertificateRow>,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CertificateConfig {
    pub enumeration: EnumerationConfig,
    pub spectral: SpectralConfig,
}

/// Builds the pair measures of the generalised-expander certificate for a
/// family that is its own exhaustion, and tests the energy bound `8κ`
/// against the supplied maps (one list per member).
pub fn generalised_certificate(
    family: &GraphFamily,
    p: f64,
    rho: &RhoTable,
    test_maps: &[Vec<TestMap>],
    config: &CertificateConfig,
) -> Result<GeneralisedCertificate> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("exponent p must be >= 1, got {p}")));
    }
    if test_maps.len() != family.len() {
        return Err(Error::invalid("need one list of test maps per member"));
    }
    let k = family.max_valency();
    if k < 2 {
        return Err(Error::invalid("valency bound K must be at least 2"));
    }
    let members: Vec<MeasuredGraph> = family
        .members()
        .iter()
        .map(|g| {
            if !g.is_connected() {
                return Err(Error::Disconnected("generalised_certificate"));
            }
            if let Some(v) = (0..g.n()).find(|&v| g.m(v).is_zero()) {
                return Err(Error::NotFullSupport(v));
            }
            let total = g.total_measure().clone();
            g.with_measure(g.measure().iter().map(|x| x / &total).collect())
        })
        .collect::<Result<_>>()?;
    let s = members
        .iter()
        .map(|g| g.stats().ratio_bound.expect("full support"))
        .min()
        .expect("nonempty family");
    let bounds = members
        .par_iter()
        .map(|g| cheeger_lower_bound(g, config))
        .collect::<Result<Vec<_>>>()?;
    let c = bounds.iter().map(|(c, _)| c.clone()).min().expect("nonempty family");

    let (sf, cf) = (rational::to_f64(&s), rational::to_f64(&c));
    let rho_at_one = rho.eval(1.0);
    let kappa = kappa_measured(k, sf, cf, p, rho_at_one);
    let energy_bound = 8.0 * kappa;
    let rows: Vec<CertificateRow> = members
        .par_iter()
        .zip(bounds.into_par_iter())
        .zip(test_maps.par_iter())
        .enumerate()
        .map(|(index, ((g, cheeger), maps))| certify_member(index, g, cheeger, k, p, rho, maps, energy_bound))
        .collect::<Result<_>>()?;
    Ok(GeneralisedCertificate {
        p,
        max_valency: k,
        holds: rows.iter().all(CertificateRow::holds),
        kappa_reference: kappa_constant(k, sf, cf, p, rho_at_one),
        s,
        c,
        rho_at_one,
        kappa,
        energy_bound,
        rows,
    })
}

/// Exact vertex Cheeger constant when within the cap, otherwise the bound
/// `c >= sλ/(2(1+s)K)` from the measured gap, shrunk by a relative margin.
fn cheeger_lower_bound(g: &MeasuredGraph, config: &CertificateConfig) -> Result<(Rational, bool)> {
    match cheeger_vertex(g, &config.enumeration) {
        Ok(cert) => Ok((cert.value, true)),
        Err(Error::CapExceeded { .. }) => {
            let stats = g.stats();
            let s = rational::to_f64(&stats.ratio_bound.expect("full support"));
            let lambda = lambda_operator(g)?
                .spectrum(&config.spectral)?
                .gap
                .ok_or_else(|| Error::invalid("measured operator has no positive eigenvalue"))?;
            let bound = s * lambda / (2.0 * (1.0 + s) * stats.max_valency as f64) * (1.0 - SPECTRAL_MARGIN);
            let bound = rational::from_f64(bound.max(0.0)).unwrap_or_else(Rational::zero);
            Ok((bound, false))
        }
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn certify_member(
    index: usize,
    g: &MeasuredGraph,
    (cheeger, cheeger_exact): (Rational, bool),
    k: usize,
    p: f64,
    rho: &RhoTable,
    maps: &[TestMap],
    energy_bound: f64,
) -> Result<CertificateRow> {
    let n = g.n();
    let gamma = g.stats().gamma;
    let limit = (int(8) * &gamma).recip();
    let r = (1.0 / (8.0 * rational::to_f64(&gamma))).ln() / (k as f64).ln();
    let mut row = CertificateRow {
        index,
        n,
        gamma,
        r,
        skipped: None,
        cheeger,
        cheeger_exact,
        diagonal_pairs: 0,
        off_diagonal_mass: Rational::zero(),
        symmetric: false,
        probability: false,
        off_diagonal_support: false,
        mass_condition: false,
        accepted: 0,
        rejected: Vec::new(),
        max_tested_energy: 0.0,
        energy_bound_holds: false,
        nu: PairMeasure::default(),
    };
    if limit <= Rational::one() {
        row.skipped = Some("r_n <= 0: maximal atom too heavy".into());
        return Ok(row);
    }
    // d <= r  ⟺  K^d <= 1/(8γ), decided exactly.
    let kr = int(k as i64);
    let mut powers = vec![Rational::one()];
    let within = |d: usize, powers: &mut Vec<Rational>| {
        while powers.len() <= d {
            let next = powers.last().unwrap() * &kr;
            powers.push(next);
        }
        powers[d] <= limit
    };
    let dist = g.all_distances();
    let mut far = BTreeMap::new();
    for (x, from_x) in dist.iter().enumerate() {
        for (y, d) in from_x.iter().enumerate() {
            let d = d.expect("connected");
            if within(d, &mut powers) {
                row.diagonal_pairs += 1;
            } else {
                far.insert((x, y), g.m(x) * g.m(y));
            }
        }
    }
    let off: Rational = far.values().sum();
    row.mass_condition = off >= Rational::new(1.into(), 8.into());
    if off.is_zero() {
        row.skipped = Some("no pairs beyond distance r_n".into());
        row.off_diagonal_mass = off;
        return Ok(row);
    }
    let nu = PairMeasure {
        entries: far.into_iter().map(|(key, w)| (key, w / &off)).collect(),
    };
    row.off_diagonal_mass = off;
    row.symmetric = nu.is_symmetric();
    row.probability = nu.total().is_one();
    row.off_diagonal_support = nu
        .entries
        .keys()
        .all(|&(x, y)| !within(dist[x][y].unwrap(), &mut powers));

    let weights: Vec<((usize, usize), f64)> = nu
        .entries
        .iter()
        .map(|(&key, w)| (key, rational::to_f64(w)))
        .collect();
    for map in maps {
        if map.coordinates.iter().any(|c| c.len() != n) {
            return Err(Error::invalid(format!("test map {} has the wrong length", map.name)));
        }
        if let Some(reject) = lipschitz_violation(map, &dist, p, rho) {
            row.rejected.push(reject);
            continue;
        }
        row.accepted += 1;
        let energy: f64 = weights
            .iter()
            .map(|&((x, y), w)| map.distance_p(x, y, p).powf(p) * w)
            .sum();
        row.max_tested_energy = row.max_tested_energy.max(energy);
    }
    row.energy_bound_holds = row.max_tested_energy <= energy_bound;
    row.nu = nu;
    Ok(row)
}

fn lipschitz_violation(map: &TestMap, dist: &[Vec<Option<usize>>], p: f64, rho: &RhoTable) -> Option<RejectedMap> {
    for (x, from_x) in dist.iter().enumerate() {
        for (y, d) in from_x.iter().enumerate().skip(x + 1) {
            let lhs = map.distance_p(x, y, p);
            let rhs = rho.eval(d.expect("connected") as f64);
            if lhs > rhs * (1.0 + LIPSCHITZ_SLACK) + LIPSCHITZ_SLACK {
                return Some(RejectedMap {
                    name: map.name.clone(),
                    x,
                    y,
                    lhs,
                    rhs,
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::generate::{generate, GraphKind, MeasureKind};
    use crate::families::report::Provenance;
    use crate::rational::ratio;

    fn family_of(kinds: &[GraphKind]) -> GraphFamily {
        let members = kinds
            .iter()
            .map(|k| generate(k, &MeasureKind::Probability).unwrap())
            .collect();
        GraphFamily::new(members, Provenance::default()).unwrap()
    }

    fn maps_for(family: &GraphFamily, p: f64, rho: &RhoTable) -> Vec<Vec<TestMap>> {
        family
            .members()
            .iter()
            .enumerate()
            .map(|(i, g)| default_test_maps(g, p, rho, 12, i as u64))
            .collect()
    }

    #[test]
    fn rho_interpolation() {
        let rho = RhoTable::new(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]).unwrap();
        assert_eq!(rho.eval(0.5), 1.0);
        assert_eq!(rho.eval(2.0), 2.5);
        assert_eq!(rho.eval(5.0), 4.0);
        assert_eq!(RhoTable::identity().eval(7.0), 7.0);
        assert!(RhoTable::new(vec![(0.0, 1.0), (1.0, 0.5)]).is_err());
    }

    #[test]
    fn cycle_of_64_has_cutoff_three() {
        let family = family_of(&[GraphKind::Cycle { n: 64 }]);
        let rho = RhoTable::identity();
        let cert = generalised_certificate(&family, 2.0, &rho, &maps_for(&family, 2.0, &rho), &Default::default())
            .unwrap();
        let row = &cert.rows[0];
        assert!((row.r - 3.0).abs() < 1e-12);
        assert_eq!(row.gamma, ratio(1, 64));
        // Each vertex has 7 vertices within distance 3.
        assert_eq!(row.diagonal_pairs, 64 * 7);
        assert!(row.nu.entries.keys().all(|&(x, y)| {
            let d = (x as i64 - y as i64).rem_euclid(64).min((y as i64 - x as i64).rem_euclid(64));
            d > 3
        }));
        assert!(row.symmetric && row.probability && row.mass_condition);
        assert!(cert.holds, "{cert:?}");
    }

    #[test]
    fn heavy_atoms_are_skipped() {
        let family = family_of(&[GraphKind::Cycle { n: 6 }, GraphKind::Cycle { n: 40 }]);
        let rho = RhoTable::identity();
        let cert = generalised_certificate(&family, 1.0, &rho, &maps_for(&family, 1.0, &rho), &Default::default())
            .unwrap();
        assert!(cert.rows[0].skipped.is_some());
        assert!(cert.rows[1].skipped.is_none());
        assert!(cert.rows[1].accepted > 0);
        assert!(cert.holds);
    }

    #[test]
    fn violating_maps_are_rejected() {
        let family = family_of(&[GraphKind::Cycle { n: 40 }]);
        let rho = RhoTable::identity();
        let steep = TestMap {
            name: "steep".into(),
            coordinates: vec![(0..40).map(|x| 2.0 * x as f64).collect()],
        };
        let cert = generalised_certificate(&family, 1.0, &rho, &[vec![steep]], &Default::default()).unwrap();
        let rejected = &cert.rows[0].rejected[0];
        assert_eq!((rejected.x, rejected.y), (0, 1));
        assert_eq!(cert.rows[0].accepted, 0);
    }

    #[test]
    fn spectral_bound_replaces_enumeration_beyond_cap() {
        let family = family_of(&[GraphKind::RandomRegular { n: 32, k: 3, seed: 2 }]);
        let rho = RhoTable::identity();
        let cert = generalised_certificate(&family, 2.0, &rho, &maps_for(&family, 2.0, &rho), &Default::default())
            .unwrap();
        assert!(!cert.rows[0].cheeger_exact);
        assert!(cert.c > Rational::zero());
        assert!(cert.holds);
    }
}
