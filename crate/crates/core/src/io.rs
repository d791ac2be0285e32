//! JSON serialization of diagrams, one document per diagram and JSON-lines
//! for collections.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::{Angle, Symbol};
use crate::diagram::{Diagram, DiagramError, NodeId, NodeKind};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed diagram document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("node {id}: unknown kind {kind:?}")]
    UnknownKind { id: u32, kind: String },
    #[error("node {id}: bad symbol key {key:?}")]
    BadSymbol { id: u32, key: String },
    #[error("duplicate node id {0}")]
    DuplicateNode(u32),
    #[error("edge [{0}, {1}] references an unknown node")]
    DanglingEdge(u32, u32),
    #[error("edge [{0}, {1}] is a self-loop or repeated")]
    BadEdge(u32, u32),
    #[error("invalid diagram: {0}")]
    Invalid(#[from] DiagramError),
    #[error("line {line}: {source}")]
    Line { line: usize, source: Box<IoError> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct Document {
    version: u32,
    nodes: Vec<NodeDoc>,
    edges: Vec<[u32; 2]>,
    inputs: Vec<u32>,
    outputs: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: u32,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quarter_turns: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symbols: Option<BTreeMap<String, i32>>,
}

fn kind_name(k: NodeKind) -> &'static str {
    match k {
        NodeKind::Z => "Z",
        NodeKind::X => "X",
        NodeKind::Hadamard => "H",
        NodeKind::Input => "IN",
        NodeKind::Output => "OUT",
    }
}

fn to_document(d: &Diagram) -> Document {
    let nodes = d
        .nodes()
        .map(|(id, n)| {
            let spider = n.kind.is_spider();
            let symbols = (spider && !n.phase.symbols().is_empty())
                .then(|| n.phase.symbols().iter().map(|(s, c)| (s.0.to_string(), *c)).collect());
            NodeDoc {
                id: id.0,
                kind: kind_name(n.kind).to_string(),
                quarter_turns: spider.then(|| n.phase.quarter_turns() as i64),
                symbols,
            }
        })
        .collect();
    Document {
        version: FORMAT_VERSION,
        nodes,
        edges: d.edges().into_iter().map(|e| [e.ends().0 .0, e.ends().1 .0]).collect(),
        inputs: d.inputs().iter().map(|n| n.0).collect(),
        outputs: d.outputs().iter().map(|n| n.0).collect(),
    }
}

fn from_document(doc: Document) -> Result<Diagram, IoError> {
    if doc.version != FORMAT_VERSION {
        return Err(IoError::Version(doc.version));
    }
    let mut d = Diagram::new();
    for n in doc.nodes {
        let kind = match n.kind.as_str() {
            "Z" => NodeKind::Z,
            "X" => NodeKind::X,
            "H" => NodeKind::Hadamard,
            "IN" => NodeKind::Input,
            "OUT" => NodeKind::Output,
            _ => return Err(IoError::UnknownKind { id: n.id, kind: n.kind }),
        };
        let mut symbols = Vec::new();
        for (key, coef) in n.symbols.unwrap_or_default() {
            let s: u32 = key.parse().map_err(|_| IoError::BadSymbol { id: n.id, key: key.clone() })?;
            symbols.push((Symbol(s), coef));
        }
        let phase = Angle::from_parts(n.quarter_turns.unwrap_or(0), symbols);
        if !kind.is_spider() && !phase.is_zero() {
            return Err(DiagramError::PhaseOnNonSpider(NodeId(n.id)).into());
        }
        if d.contains(NodeId(n.id)) {
            return Err(IoError::DuplicateNode(n.id));
        }
        d.insert_node(NodeId(n.id), kind, phase);
    }
    for [a, b] in doc.edges {
        let (na, nb) = (NodeId(a), NodeId(b));
        if !d.contains(na) || !d.contains(nb) {
            return Err(IoError::DanglingEdge(a, b));
        }
        if a == b || d.connected(na, nb) {
            return Err(IoError::BadEdge(a, b));
        }
        d.add_edge(na, nb);
    }
    let ids = |v: Vec<u32>| v.into_iter().map(NodeId).collect();
    d.set_boundary_order(ids(doc.inputs), ids(doc.outputs))?;
    d.validate()?;
    Ok(d)
}

pub fn to_json(d: &Diagram) -> String {
    serde_json::to_string(&to_document(d)).expect("diagram documents always serialize")
}

pub fn from_json(text: &str) -> Result<Diagram, IoError> {
    from_document(serde_json::from_str(text)?)
}

pub fn write_jsonl<W: Write>(mut w: W, diagrams: &[Diagram]) -> std::io::Result<()> {
    for d in diagrams {
        writeln!(w, "{}", to_json(d))?;
    }
    Ok(())
}

/// Reads a JSON-lines collection, skipping blank lines.
pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<Diagram>, IoError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(from_json(&line).map_err(|e| IoError::Line { line: i + 1, source: Box::new(e) })?);
    }
    Ok(out)
}

/// Reads either a single JSON document or a JSON-lines collection.
pub fn read_diagrams(text: &str) -> Result<Vec<Diagram>, IoError> {
    let trimmed = text.trim();
    if trimmed.lines().count() > 1 {
        if let Ok(d) = from_json(trimmed) {
            return Ok(vec![d]);
        }
        return read_jsonl(text.as_bytes());
    }
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    Ok(vec![from_json(trimmed)?])
}
