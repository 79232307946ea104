use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cheeger::{cheeger_vertex, EnumerationConfig};
use crate::error::{Error, Result};
use crate::graph::MeasuredGraph;
use crate::rational::{self, Rational};
use crate::spectral::{lambda_operator, SpectralConfig};

/// How a family was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub generator: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct GraphFamily {
    members: Vec<MeasuredGraph>,
    pub provenance: Provenance,
}

impl GraphFamily {
    pub fn new(members: Vec<MeasuredGraph>, provenance: Provenance) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("a family needs at least one member"));
        }
        Ok(GraphFamily { members, provenance })
    }

    pub fn members(&self) -> &[MeasuredGraph] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Largest valency over all members.
    pub fn max_valency(&self) -> usize {
        self.members.iter().map(|g| g.stats().max_valency).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyRow {
    pub index: usize,
    pub n: usize,
    /// Exact vertex Cheeger constant; absent when the member exceeds the cap.
    #[serde(rename = "c", with = "rational::serde_opt")]
    pub cheeger: Option<Rational>,
    /// Measured spectral gap; absent without full support or connectivity.
    #[serde(rename = "lambda")]
    pub gap: Option<f64>,
    #[serde(rename = "K")]
    pub max_valency: usize,
    #[serde(rename = "s", with = "rational::serde_opt")]
    pub ratio_bound: Option<Rational>,
    #[serde(with = "rational::serde_str")]
    pub gamma: Rational,
    #[serde(rename = "capExceeded")]
    pub cap_exceeded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GhostlyTrend {
    #[serde(with = "rational::serde_vec")]
    pub gammas: Vec<Rational>,
    /// "consistent" when `γ_n` is nonincreasing over the second half of the
    /// family and ends below where it started, otherwise "inconsistent".
    pub verdict: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpanderVerdict {
    #[serde(rename = "minC", with = "rational::serde_opt")]
    pub min_cheeger: Option<Rational>,
    #[serde(with = "rational::serde_str")]
    pub threshold: Rational,
    /// `min c_n >= threshold` over the members that were computed.
    pub holds: bool,
    /// Some member exceeded the enumeration cap.
    pub partial: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub rows: Vec<FamilyRow>,
    #[serde(rename = "uniformValency")]
    pub uniform_valency: usize,
    #[serde(rename = "boundedRatio", with = "rational::serde_opt")]
    pub bounded_ratio: Option<Rational>,
    #[serde(rename = "ghostlyTrend")]
    pub ghostly: GhostlyTrend,
    #[serde(rename = "expanderVerdict")]
    pub expander: ExpanderVerdict,
    pub provenance: Provenance,
}

/// Finite-prefix summary of a family. Members are processed in parallel and
/// rows are reported in index order.
pub fn family_report(
    family: &GraphFamily,
    threshold: &Rational,
    enumeration: &EnumerationConfig,
) -> Result<FamilyReport> {
    if *threshold <= Rational::zero() {
        return Err(Error::invalid("expansion threshold must be positive"));
    }
    let rows = family
        .members()
        .par_iter()
        .enumerate()
        .map(|(index, g)| row(index, g, enumeration))
        .collect::<Result<Vec<_>>>()?;

    let gammas: Vec<Rational> = rows.iter().map(|r| r.gamma.clone()).collect();
    let tail = &gammas[gammas.len() / 2..];
    let consistent =
        tail.windows(2).all(|w| w[1] <= w[0]) && gammas.last() < gammas.first();
    let bounded_ratio = rows
        .iter()
        .map(|r| r.ratio_bound.clone())
        .collect::<Option<Vec<_>>>()
        .and_then(|v| v.into_iter().min());
    let min_cheeger = rows.iter().filter_map(|r| r.cheeger.clone()).min();
    let partial = rows.iter().any(|r| r.cap_exceeded);
    Ok(FamilyReport {
        uniform_valency: rows.iter().map(|r| r.max_valency).max().unwrap_or(0),
        bounded_ratio,
        ghostly: GhostlyTrend {
            gammas,
            verdict: if consistent { "consistent" } else { "inconsistent" },
        },
        expander: ExpanderVerdict {
            holds: min_cheeger.as_ref().is_some_and(|c| c >= threshold),
            min_cheeger,
            threshold: threshold.clone(),
            partial,
        },
        rows,
        provenance: family.provenance.clone(),
    })
}

fn row(index: usize, g: &MeasuredGraph, enumeration: &EnumerationConfig) -> Result<FamilyRow> {
    let stats = g.stats();
    let (cheeger, cap_exceeded) = match cheeger_vertex(g, enumeration) {
        Ok(cert) => (Some(cert.value), false),
        Err(Error::CapExceeded { .. }) => (None, true),
        Err(e) => return Err(e),
    };
    let gap = if stats.full_support && stats.connected && g.n() > 1 {
        lambda_operator(g)?.spectrum(&SpectralConfig::default())?.gap
    } else {
        None
    };
    debug_assert!(stats.gamma <= Rational::one());
    Ok(FamilyRow {
        index,
        n: g.n(),
        cheeger,
        gap,
        max_valency: stats.max_valency,
        ratio_bound: stats.ratio_bound,
        gamma: stats.gamma,
        cap_exceeded,
    })
}
