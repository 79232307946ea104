//! One adapter per subcommand; all numerics live in `mexp-core`.

use std::path::Path;

use mexp_core::cheeger::{asymptotic_profile, cheeger_conductance, cheeger_vertex};
use mexp_core::families::{
    default_test_maps, family_report, generalised_certificate, generate, CertificateConfig, GraphFamily,
    GraphKind, MeasureKind, Provenance, RhoTable,
};
use mexp_core::io::{graph_to_json, read_graph, GraphDocument};
use mexp_core::poincare::optimal_lp_constant;
use mexp_core::rational::{self, Rational};
use mexp_core::spectral::{delta_operator, lambda_operator, SpectralConfig};
use mexp_core::theorems::{self, InequalityReport, VerifyConfig};
use mexp_core::{EnumerationConfig, MeasuredGraph, ReversibleWalk, VertexSubset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{Cli, Command, Common, Constraint, Flavor, Kind, Measure, Operator, Outcome, Theorem};

type Result<T> = std::result::Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn enumeration(common: &Common) -> EnumerationConfig {
    EnumerationConfig::with_cap(common.cap)
}

fn spectral(common: &Common) -> SpectralConfig {
    SpectralConfig {
        zero_tolerance: common.tolerance,
        ..SpectralConfig::default()
    }
}

fn verify_config(common: &Common) -> VerifyConfig {
    VerifyConfig {
        enumeration: enumeration(common),
        spectral: spectral(common),
    }
}

fn load(common: &Common) -> Result<(GraphDocument, Value)> {
    let path = common.input.as_ref().ok_or("--input <file> is required")?;
    let doc = read_graph(path).map_err(err)?;
    let inputs = describe(path, &doc.graph);
    Ok((doc, inputs))
}

fn describe(path: &Path, g: &MeasuredGraph) -> Value {
    json!({
        "file": path.display().to_string(),
        "vertices": g.n(),
        "edges": g.edge_count(),
        "totalMeasure": rational::format(g.total_measure()),
    })
}

/// The document's conductance table if present, else the auxiliary walk.
fn walk_of(doc: &GraphDocument) -> Result<ReversibleWalk> {
    match &doc.conductance {
        Some(table) => ReversibleWalk::from_table(&doc.graph, table),
        None => ReversibleWalk::auxiliary(&doc.graph),
    }
    .map_err(err)
}

fn labels(g: &MeasuredGraph, set: &VertexSubset) -> Vec<String> {
    set.iter().map(|v| g.label(v).to_string()).collect()
}

fn subset(g: &MeasuredGraph, ids: &[String]) -> Result<VertexSubset> {
    let mut set = VertexSubset::empty(g.n());
    for id in ids {
        let v = (0..g.n())
            .find(|&v| g.label(v) == id.trim())
            .ok_or_else(|| format!("unknown vertex id {id:?}"))?;
        set.insert(v);
    }
    Ok(set)
}

fn rationals(values: &[String]) -> Result<Vec<Rational>> {
    values.iter().map(|s| rational::parse(s).map_err(err)).collect()
}

fn to_value<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize")
}

fn report(inputs: Value, results: Value) -> Outcome {
    Outcome {
        results,
        inputs,
        violation: false,
        raw: false,
    }
}

fn inequality(inputs: Value, r: InequalityReport) -> Outcome {
    Outcome {
        violation: !r.holds,
        results: to_value(&r),
        inputs,
        raw: false,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let common = &cli.common;
    match &cli.command {
        Command::Cheeger {
            flavor,
            constraint,
            alpha,
        } => {
            let (doc, inputs) = load(common)?;
            let g = &doc.graph;
            if !alpha.is_empty() {
                let alphas = rationals(alpha)?;
                let profile = asymptotic_profile(g, &alphas, &enumeration(common)).map_err(err)?;
                let cells: Vec<Value> = profile
                    .iter()
                    .map(|e| {
                        let mut cell = to_value(e);
                        cell["witness"] = json!(e.witness.as_ref().map(|w| labels(g, w)));
                        cell
                    })
                    .collect();
                return Ok(report(inputs, json!({ "profile": cells })));
            }
            let cert = match flavor {
                Flavor::Vertex => cheeger_vertex(g, &enumeration(common)),
                Flavor::Conductance => {
                    let walk = walk_of(&doc)?;
                    let m = match constraint {
                        Constraint::Stationary => walk.stationary().to_vec(),
                        Constraint::Measure => g.measure().to_vec(),
                    };
                    cheeger_conductance(&walk, &m, &enumeration(common))
                }
            }
            .map_err(err)?;
            let mut results = to_value(&cert);
            results["witness"] = json!(labels(g, &cert.witness));
            Ok(report(inputs, results))
        }
        Command::Spectrum { operator } => {
            let (doc, inputs) = load(common)?;
            let op = match operator {
                Operator::Delta => delta_operator(&walk_of(&doc)?),
                Operator::Lambda => lambda_operator(&doc.graph).map_err(err)?,
            };
            let spec = op.spectrum(&spectral(common)).map_err(err)?;
            let mut results = to_value(&spec);
            results["operator"] = to_value(&op.kind);
            Ok(report(inputs, results))
        }
        Command::Poincare { p, restarts } => {
            let (doc, inputs) = load(common)?;
            let est = optimal_lp_constant(&walk_of(&doc)?, *p, *restarts, common.seed).map_err(err)?;
            Ok(report(inputs, to_value(&est)))
        }
        Command::Verify {
            theorem,
            p,
            restarts,
            set_a,
            set_b,
            function,
        } => {
            let (doc, inputs) = load(common)?;
            let g = &doc.graph;
            let vc = verify_config(common);
            let r = match theorem {
                Theorem::CheegerSandwich => theorems::verify_cheeger_sandwich(&walk_of(&doc)?, &vc),
                Theorem::MeasuredSandwich => theorems::verify_measured_sandwich(g, &vc),
                Theorem::GapControls => theorems::verify_gap_controls(g, &vc),
                Theorem::PoincareToCheeger => theorems::verify_poincare_to_cheeger_measured(g, &vc),
                Theorem::LpPoincare => theorems::verify_lp_poincare(&walk_of(&doc)?, *p, *restarts, common.seed, &vc),
                Theorem::Coarea => {
                    let f = function_or_random(g.n(), function, common.seed)?;
                    theorems::verify_coarea(&walk_of(&doc)?, &f)
                }
                Theorem::DistanceBound => {
                    let (a, b) = distance_sets(g, set_a, set_b)?;
                    theorems::distance_gap_bound(&walk_of(&doc)?, &a, &b, &vc)
                }
            }
            .map_err(err)?;
            Ok(inequality(inputs, r))
        }
        Command::Coarea { function } => {
            let (doc, inputs) = load(common)?;
            let f = function_or_random(doc.graph.n(), function, common.seed)?;
            let r = mexp_core::spectral::coarea_check(&walk_of(&doc)?, &f).map_err(err)?;
            Ok(Outcome {
                violation: !r.equal,
                results: json!({
                    "function": f.iter().map(rational::format).collect::<Vec<_>>(),
                    "report": to_value(&r),
                }),
                inputs,
                raw: false,
            })
        }
        Command::Family { dir, threshold } => {
            let (family, inputs) = load_family(dir)?;
            let threshold = rational::parse(threshold).map_err(err)?;
            let r = family_report(&family, &threshold, &enumeration(common)).map_err(err)?;
            Ok(report(inputs, to_value(&r)))
        }
        Command::Certify { dir, p, rho, maps } => {
            let (family, inputs) = load_family(dir)?;
            let rho = match rho {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                    let points: Vec<(f64, f64)> =
                        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                    RhoTable::new(points).map_err(err)?
                }
                None => RhoTable::identity(),
            };
            let test_maps: Vec<_> = family
                .members()
                .iter()
                .enumerate()
                .map(|(i, g)| default_test_maps(g, *p, &rho, *maps, common.seed.wrapping_add(i as u64)))
                .collect();
            let config = CertificateConfig {
                enumeration: enumeration(common),
                spectral: spectral(common),
            };
            let cert = generalised_certificate(&family, *p, &rho, &test_maps, &config).map_err(err)?;
            Ok(Outcome {
                violation: !cert.holds,
                results: to_value(&cert),
                inputs,
                raw: false,
            })
        }
        Command::Generate {
            kind,
            params,
            measure,
            edge_probability,
            values,
        } => {
            let kind = graph_kind(*kind, params, *edge_probability, common.seed)?;
            let measure = match measure {
                Measure::Counting => MeasureKind::Counting,
                Measure::Probability => MeasureKind::Probability,
                Measure::Rationals => MeasureKind::Rationals { seed: common.seed },
                Measure::Explicit => MeasureKind::Explicit {
                    values: rationals(values)?,
                },
            };
            let g = generate(&kind, &measure).map_err(err)?;
            Ok(Outcome {
                results: graph_to_json(&g, None),
                inputs: Value::Null,
                violation: false,
                raw: true,
            })
        }
    }
}

fn function_or_random(n: usize, values: &[String], seed: u64) -> Result<Vec<Rational>> {
    if values.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..n)
            .map(|_| rational::ratio(rng.random_range(0..=9), rng.random_range(1..=5)))
            .collect());
    }
    let f = rationals(values)?;
    if f.len() != n {
        return Err(format!("--function needs {n} values, got {}", f.len()));
    }
    Ok(f)
}

/// The given sets, or by default the first vertex and the vertices farthest from it.
fn distance_sets(g: &MeasuredGraph, a: &[String], b: &[String]) -> Result<(VertexSubset, VertexSubset)> {
    match (a.is_empty(), b.is_empty()) {
        (false, false) => Ok((subset(g, a)?, subset(g, b)?)),
        (true, true) => {
            if g.n() < 2 {
                return Err("distance-bound needs at least two vertices".into());
            }
            let d = g.distances_from(0);
            let far = d.iter().flatten().max().copied().unwrap_or(0);
            let b = VertexSubset::from_indices(g.n(), (0..g.n()).filter(|&v| d[v] == Some(far) && v != 0));
            Ok((VertexSubset::from_indices(g.n(), [0]), b))
        }
        _ => Err("give both --set-a and --set-b, or neither".into()),
    }
}

fn graph_kind(kind: Kind, params: &[usize], p: f64, seed: u64) -> Result<GraphKind> {
    let need = |k: usize| -> Result<()> {
        if params.len() == k {
            Ok(())
        } else {
            Err(format!("{kind:?} takes {k} size parameter(s), got {}", params.len()))
        }
    };
    Ok(match kind {
        Kind::Cycle => {
            need(1)?;
            GraphKind::Cycle { n: params[0] }
        }
        Kind::Path => {
            need(1)?;
            GraphKind::Path { n: params[0] }
        }
        Kind::Complete => {
            need(1)?;
            GraphKind::Complete { n: params[0] }
        }
        Kind::Star => {
            need(1)?;
            GraphKind::Star { leaves: params[0] }
        }
        Kind::Hypercube => {
            need(1)?;
            GraphKind::Hypercube { d: params[0] }
        }
        Kind::RandomRegular => {
            need(2)?;
            GraphKind::RandomRegular {
                n: params[0],
                k: params[1],
                seed,
            }
        }
        Kind::RandomConnected => {
            need(1)?;
            GraphKind::RandomConnected { n: params[0], p, seed }
        }
        Kind::Gnp => {
            need(1)?;
            GraphKind::Gnp { n: params[0], p, seed }
        }
    })
}

/// Every `*.json` file of `dir`, sorted by file name.
fn load_family(dir: &Path) -> Result<(GraphFamily, Value)> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(format!("{}: no .json graph documents", dir.display()));
    }
    let mut members = Vec::with_capacity(paths.len());
    let mut inputs = Vec::with_capacity(paths.len());
    for path in &paths {
        let doc = read_graph(path).map_err(|e| format!("{}: {e}", path.display()))?;
        inputs.push(describe(path, &doc.graph));
        members.push(doc.graph);
    }
    let provenance = Provenance {
        generator: "directory".into(),
        parameters: json!({"dir": dir.display().to_string()}),
        seed: None,
    };
    Ok((GraphFamily::new(members, provenance).map_err(err)?, Value::Array(inputs)))
}
