//! JSON graph documents.
//!
//! ```json
//! {"vertices": [{"id": 0, "m": "1/2"}, {"id": "b", "m": "3"}],
//!  "edges": [[0, "b"]],
//!  "conductance": [[0, "b", "2"]]}
//! ```
//!
//! Vertex ids may be strings or integers and are mapped to dense indices in
//! document order. Edges are listed once per unordered pair.

use std::collections::HashMap;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::MeasuredGraph;
use crate::rational::{self, Rational};

/// A parsed graph document: the graph plus the optional conductance table.
#[derive(Clone, Debug)]
pub struct GraphDocument {
    pub graph: MeasuredGraph,
    pub conductance: Option<Vec<((usize, usize), Rational)>>,
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn label_of(value: &Value, location: &str) -> Result<String> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string()),
        _ => Err(parse_err(location, "vertex id must be a string or an integer")),
    }
}

fn rational_of(value: &Value, location: &str) -> Result<Rational> {
    match value {
        Value::String(s) => rational::parse(s).map_err(|e| match e {
            Error::Parse { message, .. } => parse_err(location, message),
            other => other,
        }),
        Value::Number(n) if n.is_i64() || n.is_u64() => rational::parse(&n.to_string()),
        _ => Err(parse_err(location, "expected a rational string \"p/q\"")),
    }
}

pub fn parse_graph(text: &str) -> Result<GraphDocument> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        parse_err(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| parse_err("document", "expected a JSON object"))?;

    let vertices = obj
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("vertices", "missing or not an array"))?;
    let mut labels = Vec::with_capacity(vertices.len());
    let mut measure = Vec::with_capacity(vertices.len());
    let mut index = HashMap::new();
    for (i, v) in vertices.iter().enumerate() {
        let loc = format!("vertices[{i}]");
        let id = v
            .get("id")
            .ok_or_else(|| parse_err(&loc, "missing \"id\""))?;
        let label = label_of(id, &loc)?;
        let m = v
            .get("m")
            .ok_or_else(|| parse_err(&loc, "missing \"m\""))?;
        let m = rational_of(m, &format!("{loc}.m"))?;
        if index.insert(label.clone(), i).is_some() {
            return Err(Error::InvalidGraph {
                location: loc,
                message: format!("duplicate vertex id {label:?}"),
            });
        }
        if !rational::is_nonnegative(&m) {
            return Err(Error::InvalidGraph {
                location: loc,
                message: "negative measure".into(),
            });
        }
        labels.push(label);
        measure.push(m);
    }

    let lookup = |value: &Value, loc: &str| -> Result<usize> {
        let label = label_of(value, loc)?;
        index.get(&label).copied().ok_or_else(|| Error::InvalidGraph {
            location: loc.to_string(),
            message: format!("unknown vertex {label:?}"),
        })
    };

    let edges_json = obj
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("edges", "missing or not an array"))?;
    let mut edges = Vec::with_capacity(edges_json.len());
    for (i, e) in edges_json.iter().enumerate() {
        let loc = format!("edges[{i}]");
        let pair = e
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| parse_err(&loc, "edge must be a two-element array"))?;
        edges.push((lookup(&pair[0], &loc)?, lookup(&pair[1], &loc)?));
    }
    let graph = MeasuredGraph::with_labels(labels.len(), &edges, measure, labels)?;

    let conductance = match obj.get("conductance") {
        None | Some(Value::Null) => None,
        Some(Value::Array(rows)) => {
            let mut table: HashMap<(usize, usize), Rational> = HashMap::new();
            for (i, row) in rows.iter().enumerate() {
                let loc = format!("conductance[{i}]");
                let row = row
                    .as_array()
                    .filter(|r| r.len() == 3)
                    .ok_or_else(|| parse_err(&loc, "entry must be [u, v, \"p/q\"]"))?;
                let u = lookup(&row[0], &loc)?;
                let v = lookup(&row[1], &loc)?;
                let a = rational_of(&row[2], &format!("{loc}[2]"))?;
                if !graph.has_edge(u, v) {
                    return Err(Error::InvalidConductance(format!(
                        "{loc}: ({}, {}) is not an edge",
                        graph.label(u),
                        graph.label(v)
                    )));
                }
                let key = (u.min(v), u.max(v));
                if let Some(prev) = table.insert(key, a.clone()) {
                    if prev != a {
                        return Err(Error::InvalidConductance(format!(
                            "{loc}: asymmetric conductance on ({}, {})",
                            graph.label(u),
                            graph.label(v)
                        )));
                    }
                }
            }
            let mut out = Vec::with_capacity(table.len());
            for e in graph.edges() {
                let a = table.remove(&e).ok_or_else(|| {
                    Error::InvalidConductance(format!(
                        "missing conductance on edge ({}, {})",
                        graph.label(e.0),
                        graph.label(e.1)
                    ))
                })?;
                out.push((e, a));
            }
            Some(out)
        }
        Some(_) => return Err(parse_err("conductance", "expected an array")),
    };

    Ok(GraphDocument { graph, conductance })
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<GraphDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_graph(&text)
}

/// Serializes a graph (and optional conductance) in the document schema.
pub fn graph_to_json(
    graph: &MeasuredGraph,
    conductance: Option<&[((usize, usize), Rational)]>,
) -> Value {
    let id = |v: usize| -> Value {
        let label = graph.label(v);
        match label.parse::<i64>() {
            Ok(n) if n.to_string() == label => json!(n),
            _ => json!(label),
        }
    };
    let vertices: Vec<Value> = (0..graph.n())
        .map(|v| json!({"id": id(v), "m": rational::format(graph.m(v))}))
        .collect();
    let edges: Vec<Value> = graph.edges().map(|(u, v)| json!([id(u), id(v)])).collect();
    let mut doc = json!({"vertices": vertices, "edges": edges});
    if let Some(table) = conductance {
        doc["conductance"] = table
            .iter()
            .map(|&((u, v), ref a)| json!([id(u), id(v), rational::format(a)]))
            .collect();
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn minimal_document() {
        let doc = parse_graph(r#"{"vertices":[{"id":0,"m":"1"},{"id":1,"m":"1"}],"edges":[[0,1]]}"#)
            .unwrap();
        assert_eq!(doc.graph.n(), 2);
        assert_eq!(doc.graph.edge_count(), 1);
        assert_eq!(doc.graph.measure(), &[int(1), int(1)]);
        assert!(doc.conductance.is_none());
    }

    #[test]
    fn unknown_vertex_is_reported() {
        let err = parse_graph(r#"{"vertices":[{"id":0,"m":"1"},{"id":1,"m":"1"}],"edges":[[0,5]]}"#)
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown vertex"), "{msg}");
        assert!(msg.contains("edges[0]"), "{msg}");
    }

    #[test]
    fn zero_total_measure_is_rejected() {
        let err = parse_graph(r#"{"vertices":[{"id":0,"m":"0"},{"id":1,"m":"0/3"}],"edges":[[0,1]]}"#)
            .unwrap_err();
        assert_eq!(err.to_string(), "total measure must be positive");
    }

    #[test]
    fn negative_measure_and_bad_json_are_rejected() {
        assert!(parse_graph(r#"{"vertices":[{"id":0,"m":"-1"}],"edges":[]}"#).is_err());
        let err = parse_graph("{\"vertices\": [").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn duplicate_and_loop_edges_are_rejected() {
        let base = r#"{"vertices":[{"id":"a","m":"1"},{"id":"b","m":"1"}],"edges":"#;
        assert!(parse_graph(&format!("{base}[[\"a\",\"b\"],[\"b\",\"a\"]]}}")).is_err());
        assert!(parse_graph(&format!("{base}[[\"a\",\"a\"]]}}")).is_err());
    }

    #[test]
    fn conductance_table_round_trips() {
        let text = r#"{"vertices":[{"id":"x","m":"1/2"},{"id":"y","m":"3"},{"id":"z","m":"1"}],
            "edges":[["x","y"],["y","z"]],
            "conductance":[["y","x","2/3"],["y","z","5"]]}"#;
        let doc = parse_graph(text).unwrap();
        let table = doc.conductance.clone().unwrap();
        assert_eq!(table, vec![((0, 1), ratio(2, 3)), ((1, 2), int(5))]);
        assert_eq!(doc.graph.m(0), &ratio(1, 2));

        let again = parse_graph(&graph_to_json(&doc.graph, Some(&table)).to_string()).unwrap();
        assert_eq!(again.graph, doc.graph);
        assert_eq!(again.conductance, Some(table));
    }

    #[test]
    fn conductance_must_cover_edges_symmetrically() {
        let head = r#"{"vertices":[{"id":0,"m":"1"},{"id":1,"m":"1"},{"id":2,"m":"1"}],"edges":[[0,1],[1,2]],"conductance":"#;
        assert!(parse_graph(&format!("{head}[[0,1,\"1\"]]}}")).is_err());
        assert!(parse_graph(&format!("{head}[[0,1,\"1\"],[1,0,\"2\"],[1,2,\"1\"]]}}")).is_err());
        assert!(parse_graph(&format!("{head}[[0,2,\"1\"],[0,1,\"1\"],[1,2,\"1\"]]}}")).is_err());
    }
}
