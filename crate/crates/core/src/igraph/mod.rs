//! Interface graphs: abstract function summaries, the worklist
//! construction, client simulation and test-suite generation.

mod export;

pub use export::{graph_from_json, graph_to_dot, graph_to_json};

use crate::abstraction::{Abstraction, RegionSet};
use crate::engine::{EngineError, SymbolicLibrary};
use crate::model::FunctionId;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub id: usize,
    pub regions: RegionSet,
    pub initial: bool,
    pub error: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Good,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GraphEdge {
    pub from: usize,
    pub function: String,
    pub to: usize,
    pub kind: EdgeKind,
}

/// Automaton over function names separating call sequences that may drive
/// the library into its error set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    /// Human-readable region descriptions, used for DOT labels.
    pub region_labels: BTreeMap<crate::abstraction::RegionId, String>,
}

impl InterfaceGraph {
    pub fn error_node(&self) -> usize {
        self.nodes.iter().find(|n| n.error).map(|n| n.id).expect("graph without error node")
    }

    pub fn initial_nodes(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.initial).map(|n| n.id).collect()
    }

    pub fn non_error_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| !n.error).count()
    }

    fn edge(&self, from: usize, function: &str, kind: EdgeKind) -> Option<&GraphEdge> {
        self.edges.iter().find(|e| e.from == from && e.function == function && e.kind == kind)
    }

    /// Function names appearing on edges.
    pub fn functions(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|e| e.function.as_str()).collect()
    }
}

/// Global regions reachable when `f` runs to return from the global states
/// of `x`. States with no enabled rule are return states; the error set
/// halts execution, so its states return immediately.
pub fn post_abstract(
    sym: &SymbolicLibrary,
    f: FunctionId,
    a: &Abstraction,
    x: &RegionSet,
) -> Result<RegionSet, EngineError> {
    let fs = sym.function(f);
    let start = a.concretize(x).with_space(&fs.space).intersect(&fs.entry);
    let mut frontier = start;
    let mut returns = fs.space.empty();
    let mut seen: HashSet<crate::symstate::ValuationKey> = HashSet::new();
    let bound = fs.space.size();
    let mut steps: u128 = 0;
    while !frontier.is_empty() {
        if !seen.insert(frontier.key()) || steps > bound {
            return Err(EngineError::NonTermination {
                function: fs.name.clone(),
                detail: format!(
                    "execution from {} never empties after {steps} steps",
                    a.concretize(x).describe_limited(4)
                ),
            });
        }
        returns = returns.union(&frontier.minus(fs.trans.enabled()));
        frontier = fs.trans.image(&frontier);
        steps += 1;
    }
    Ok(a.abs_over(&returns.project(&sym.globals)))
}

/// Worklist construction of the interface graph over `functions`.
///
/// Every region inside the initial set becomes an initial node. When the
/// summary of a call meets the error regions an error edge is emitted, and
/// the remaining regions (if any) form the target of a good edge.
pub fn build_interface(
    sym: &SymbolicLibrary,
    a: &Abstraction,
    functions: &[FunctionId],
) -> Result<InterfaceGraph, EngineError> {
    let error_regions = a.abs_under(&sym.error);
    let mut nodes: Vec<GraphNode> = Vec::new();
    let mut index: HashMap<RegionSet, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for id in a.abs_under(&sym.init) {
        let regions: RegionSet = [id].into_iter().collect();
        let n = nodes.len();
        nodes.push(GraphNode { id: n, regions: regions.clone(), initial: true, error: false });
        index.insert(regions, n);
        queue.push_back(n);
    }
    let error = nodes.len();
    nodes.push(GraphNode { id: error, regions: error_regions.clone(), initial: false, error: true });
    let mut edges = Vec::new();
    while let Some(curr) = queue.pop_front() {
        for &f in functions {
            let name = &sym.function(f).name;
            let next = post_abstract(sym, f, a, &nodes[curr].regions).map_err(|e| match e {
                EngineError::NonTermination { function, detail } => EngineError::NonTermination {
                    function,
                    detail: format!("called from interface node {curr}: {detail}"),
                },
                other => other,
            })?;
            if next.iter().any(|r| error_regions.contains(r)) {
                edges.push(GraphEdge { from: curr, function: name.clone(), to: error, kind: EdgeKind::Error });
            }
            let good: RegionSet = next.difference(&error_regions).copied().collect();
            if good.is_empty() {
                continue;
            }
            let to = match index.get(&good) {
                Some(&n) => n,
                None => {
                    let n = nodes.len();
                    nodes.push(GraphNode { id: n, regions: good.clone(), initial: false, error: false });
                    index.insert(good, n);
                    queue.push_back(n);
                    n
                }
            };
            edges.push(GraphEdge { from: curr, function: name.clone(), to, kind: EdgeKind::Good });
        }
    }
    let region_labels = a.regions().iter().map(|r| (r.id, r.extent.describe_limited(8))).collect();
    Ok(InterfaceGraph { nodes, edges, region_labels })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    /// 1-based index of the first call that may reach the error set.
    ErrorAt(usize),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Safe => write!(f, "LEGAL"),
            Verdict::ErrorAt(k) => write!(f, "ILLEGAL at step {k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown function `{0}`")]
pub struct UnknownFunction(pub String);

fn step(g: &InterfaceGraph, current: &BTreeSet<usize>, f: &str) -> (bool, BTreeSet<usize>) {
    let mut error = false;
    let mut next = BTreeSet::new();
    for &n in current {
        error |= g.edge(n, f, EdgeKind::Error).is_some();
        if let Some(e) = g.edge(n, f, EdgeKind::Good) {
            next.insert(e.to);
        }
    }
    (error, next)
}

/// Walks `seq` from every initial node at once and reports the first call
/// at which some walk takes an error edge.
pub fn simulate_client(g: &InterfaceGraph, seq: &[String], known: &[String]) -> Result<Verdict, UnknownFunction> {
    if let Some(bad) = seq.iter().find(|f| !known.contains(f)) {
        return Err(UnknownFunction(bad.clone()));
    }
    let mut current: BTreeSet<usize> = g.initial_nodes().into_iter().collect();
    for (k, f) in seq.iter().enumerate() {
        let (error, next) = step(g, &current, f);
        if error {
            return Ok(Verdict::ErrorAt(k + 1));
        }
        current = next;
    }
    Ok(Verdict::Safe)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub sequence: Vec<String>,
    pub verdict: Verdict,
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.verdict {
            Verdict::Safe => "LEGAL",
            Verdict::ErrorAt(_) => "ILLEGAL",
        };
        write!(f, "{label}: {}", self.sequence.join(" "))
    }
}

/// Breadth-first test generation up to `depth` calls.
///
/// At each length one witness sequence is kept per distinct set of
/// current nodes; each witness is extended by every function. Extensions
/// that take an error edge are emitted as illegal and not extended further,
/// so every proper prefix of an illegal sequence is legal.
pub fn gen_tests(g: &InterfaceGraph, functions: &[String], depth: usize) -> Vec<TestCase> {
    assert!(depth >= 1, "depth must be at least 1");
    let mut out = Vec::new();
    let start: BTreeSet<usize> = g.initial_nodes().into_iter().collect();
    let mut level: Vec<(BTreeSet<usize>, Vec<String>)> = vec![(start, Vec::new())];
    for len in 0..depth {
        let mut seen: HashSet<BTreeSet<usize>> = HashSet::new();
        let mut next_level = Vec::new();
        for (current, seq) in &level {
            for f in functions {
                let (error, next) = step(g, current, f);
                let mut s = seq.clone();
                s.push(f.clone());
                let verdict = if error { Verdict::ErrorAt(len + 1) } else { Verdict::Safe };
                out.push(TestCase { sequence: s.clone(), verdict });
                if !error && !next.is_empty() && seen.insert(next.clone()) {
                    next_level.push((next, s));
                }
            }
        }
        level = next_level;
    }
    out
}
