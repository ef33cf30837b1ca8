use super::{EdgeKind, GraphEdge, GraphNode, InterfaceGraph};
use crate::abstraction::RegionId;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;

#[derive(Serialize, Deserialize)]
struct JsonNode {
    id: usize,
    regions: Vec<u32>,
    initial: bool,
    error: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    from: usize,
    #[serde(rename = "fn")]
    function: String,
    to: usize,
    kind: String,
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    nodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
}

pub fn graph_to_json(g: &InterfaceGraph) -> String {
    let doc = JsonGraph {
        nodes: g
            .nodes
            .iter()
            .map(|n| JsonNode {
                id: n.id,
                regions: n.regions.iter().map(|r| r.0).collect(),
                initial: n.initial,
                error: n.error,
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| JsonEdge {
                from: e.from,
                function: e.function.clone(),
                to: e.to,
                kind: match e.kind {
                    EdgeKind::Good => "good".into(),
                    EdgeKind::Error => "error".into(),
                },
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph serialises");
    s.push('\n');
    s
}

pub fn graph_from_json(text: &str) -> Result<InterfaceGraph, String> {
    let doc: JsonGraph = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let nodes: Vec<GraphNode> = doc
        .nodes
        .into_iter()
        .map(|n| GraphNode {
            id: n.id,
            regions: n.regions.into_iter().map(RegionId).collect(),
            initial: n.initial,
            error: n.error,
        })
        .collect();
    for (i, n) in nodes.iter().enumerate() {
        if n.id != i {
            return Err(format!("node ids must be 0..n in order, found {} at position {i}", n.id));
        }
    }
    if nodes.iter().filter(|n| n.error).count() != 1 {
        return Err("graph must have exactly one error node".into());
    }
    let mut edges = Vec::new();
    for e in doc.edges {
        let kind = match e.kind.as_str() {
            "good" => EdgeKind::Good,
            "error" => EdgeKind::Error,
            other => return Err(format!("unknown edge kind `{other}`")),
        };
        if e.from >= nodes.len() || e.to >= nodes.len() {
            return Err(format!("edge {} -> {} refers to a missing node", e.from, e.to));
        }
        if nodes[e.to].error != (kind == EdgeKind::Error) {
            return Err(format!("{} edge {} -> {} has the wrong kind for its target", e.kind, e.from, e.to));
        }
        edges.push(GraphEdge { from: e.from, function: e.function, to: e.to, kind });
    }
    Ok(InterfaceGraph { nodes, edges, region_labels: BTreeMap::new() })
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_name(g: &InterfaceGraph, id: usize) -> String {
    if g.nodes[id].error {
        "ERROR".into()
    } else {
        format!("n{id}")
    }
}

pub fn graph_to_dot(g: &InterfaceGraph) -> String {
    let mut out = String::new();
    out.push_str("digraph interface {\n  rankdir=LR;\n");
    for n in &g.nodes {
        if n.error {
            out.push_str("  ERROR [shape=box, label=\"ERROR\"];\n");
            continue;
        }
        let label: Vec<String> = n
            .regions
            .iter()
            .map(|r| match g.region_labels.get(r) {
                Some(l) => escape(&format!("{r}: {l}")),
                None => r.to_string(),
            })
            .collect();
        let shape = if n.initial { "doublecircle" } else { "ellipse" };
        writeln!(out, "  n{} [shape={shape}, label=\"n{}\\n{}\"];", n.id, n.id, label.join("\\n")).unwrap();
    }
    for e in &g.edges {
        let style = match e.kind {
            EdgeKind::Good => "",
            EdgeKind::Error => ", style=dashed",
        };
        writeln!(
            out,
            "  {} -> {} [label=\"{}\"{style}];",
            node_name(g, e.from),
            node_name(g, e.to),
            escape(&e.function)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
