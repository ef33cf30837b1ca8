//! Explicit-state semantics used as ground truth for the symbolic engine.
//!
//! Nothing here touches decision diagrams: states are plain vectors and
//! sets are ordinary hash sets, so the checks are independent of the
//! symbolic implementation.

use crate::igraph::{simulate_client, InterfaceGraph, Verdict};
use crate::model::{FunctionId, LibraryModule, VarId};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};

/// Values of the library globals, in declaration order.
pub type GlobalState = Vec<i64>;

pub const DEFAULT_STATE_CAP: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("explicit exploration exceeded the state cap of {0}")]
    StateCap(usize),
    #[error("`{function}` may not terminate: {detail}")]
    NonTermination { function: String, detail: String },
}

/// Concrete interpreter for one function over its scoped variables.
struct Interp<'a> {
    lib: &'a LibraryModule,
    pos: Vec<Option<usize>>,
}

impl<'a> Interp<'a> {
    fn new(lib: &'a LibraryModule, f: FunctionId) -> Self {
        let vars = lib.scoped_vars(f);
        let mut pos = vec![None; lib.vars.len()];
        for (i, v) in vars.iter().enumerate() {
            pos[v.0] = Some(i);
        }
        Interp { lib, pos }
    }

    fn value(&self, state: &[i64], v: VarId) -> i64 {
        state[self.pos[v.0].expect("variable out of scope")]
    }

    fn halted(&self, state: &[i64]) -> bool {
        self.lib.error.eval(&|v| self.value(state, v))
    }

    fn successors(&self, f: FunctionId, state: &[i64]) -> Vec<Vec<i64>> {
        if self.halted(state) {
            return Vec::new();
        }
        let env = |v: VarId| self.value(state, v);
        let mut out = Vec::new();
        for rule in &self.lib.function(f).rules {
            if let Some(updates) = rule.fire(self.lib, &env) {
                let mut next = state.to_vec();
                for (v, x) in updates {
                    next[self.pos[v.0].unwrap()] = x;
                }
                out.push(next);
            }
        }
        out
    }
}

/// Every scoped state reached from `entries` that has no enabled rule.
///
/// Fails if some entry can run forever or if more than `cap` states are
/// visited.
fn run(
    lib: &LibraryModule,
    f: FunctionId,
    entries: impl IntoIterator<Item = Vec<i64>>,
    cap: usize,
) -> Result<BTreeSet<Vec<i64>>, OracleError> {
    const ACTIVE: u8 = 1;
    const DONE: u8 = 2;
    let interp = Interp::new(lib, f);
    let mut color: HashMap<Vec<i64>, u8> = HashMap::new();
    let mut returns = BTreeSet::new();
    for entry in entries {
        if color.contains_key(&entry) {
            continue;
        }
        // iterative depth-first search; the stack holds (state, successors, next index)
        let mut stack: Vec<(Vec<i64>, Vec<Vec<i64>>, usize)> = Vec::new();
        let succ = interp.successors(f, &entry);
        color.insert(entry.clone(), ACTIVE);
        stack.push((entry, succ, 0));
        while let Some((state, succ, next)) = stack.last_mut() {
            if *next == succ.len() {
                if succ.is_empty() {
                    returns.insert(state.clone());
                }
                color.insert(state.clone(), DONE);
                stack.pop();
                continue;
            }
            let child = succ[*next].clone();
            *next += 1;
            match color.get(&child) {
                Some(&ACTIVE) => {
                    return Err(OracleError::NonTermination {
                        function: lib.function(f).name.clone(),
                        detail: format!("state {child:?} lies on a cycle"),
                    })
                }
                Some(_) => continue,
                None => {
                    if color.len() >= cap {
                        return Err(OracleError::StateCap(cap));
                    }
                    let s = interp.successors(f, &child);
                    color.insert(child.clone(), ACTIVE);
                    stack.push((child, s, 0));
                }
            }
        }
    }
    Ok(returns)
}

fn product(domains: &[(i64, i64)], cap: usize) -> Result<Vec<Vec<i64>>, OracleError> {
    let total = domains
        .iter()
        .try_fold(1usize, |acc, (lo, hi)| acc.checked_mul((hi - lo + 1) as usize))
        .filter(|t| *t <= cap)
        .ok_or(OracleError::StateCap(cap))?;
    let mut out = Vec::with_capacity(total);
    let mut current: Vec<i64> = domains.iter().map(|d| d.0).collect();
    if domains.is_empty() {
        return Ok(vec![current]);
    }
    loop {
        out.push(current.clone());
        let mut i = domains.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if current[i] < domains[i].1 {
                current[i] += 1;
                break;
            }
            current[i] = domains[i].0;
        }
    }
}

/// Scoped entry states of `f` over the global state `g`: inputs take every
/// value, locals start at their lowest value.
pub fn entry_states(
    lib: &LibraryModule,
    f: FunctionId,
    g: &GlobalState,
    cap: usize,
) -> Result<Vec<Vec<i64>>, OracleError> {
    let func = lib.function(f);
    let inputs: Vec<(i64, i64)> = func.inputs.iter().map(|&v| (lib.var(v).lo, lib.var(v).hi)).collect();
    let locals: Vec<i64> = func.locals.iter().map(|&v| lib.var(v).lo).collect();
    Ok(product(&inputs, cap)?
        .into_iter()
        .map(|ins| {
            let mut s = g.clone();
            s.extend(ins);
            s.extend(&locals);
            s
        })
        .collect())
}

/// Runs `f` to completion from every global state in `g` and returns the
/// global parts of the return states.
pub fn concrete_call(
    lib: &LibraryModule,
    f: FunctionId,
    g: &BTreeSet<GlobalState>,
    cap: usize,
) -> Result<BTreeSet<GlobalState>, OracleError> {
    let mut entries = Vec::new();
    for s in g {
        entries.extend(entry_states(lib, f, s, cap)?);
    }
    let n = lib.globals.len();
    Ok(run(lib, f, entries, cap)?
        .into_iter()
        .map(|mut s| {
            s.truncate(n);
            s
        })
        .collect())
}

/// Return states (over all scoped variables) of `f` started in `entry`.
pub fn execute(
    lib: &LibraryModule,
    f: FunctionId,
    entry: Vec<i64>,
    cap: usize,
) -> Result<BTreeSet<Vec<i64>>, OracleError> {
    run(lib, f, [entry], cap)
}

pub fn initial_states(lib: &LibraryModule, cap: usize) -> Result<BTreeSet<GlobalState>, OracleError> {
    let domains: Vec<(i64, i64)> = lib.globals.iter().map(|&v| (lib.var(v).lo, lib.var(v).hi)).collect();
    let globals = &lib.globals;
    Ok(product(&domains, cap)?
        .into_iter()
        .filter(|s| lib.init.eval(&|v| s[globals.iter().position(|g| *g == v).unwrap()]))
        .collect())
}

pub fn is_error(lib: &LibraryModule, g: &GlobalState) -> bool {
    lib.error.eval(&|v| g[lib.globals.iter().position(|x| *x == v).unwrap()])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub sequence: Vec<String>,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    /// Sequences that concretely reach the error set but the graph accepts.
    pub safe_violations: Vec<Violation>,
    /// Sequences that never reach the error set but the graph rejects.
    pub permissive_violations: Vec<Violation>,
    pub sequences_checked: usize,
}

impl Report {
    pub fn is_clean(&self) -> bool {
        self.safe_violations.is_empty() && self.permissive_violations.is_empty()
    }
}

/// Compares the graph against concrete execution on every sequence over
/// `functions` of length 1 to `depth`.
pub fn check_interface(
    lib: &LibraryModule,
    g: &InterfaceGraph,
    functions: &[FunctionId],
    depth: usize,
    cap: usize,
) -> Result<Report, OracleError> {
    let names: Vec<String> = functions.iter().map(|f| lib.function(*f).name.clone()).collect();
    let init = initial_states(lib, cap)?;
    let mut memo: HashMap<(FunctionId, BTreeSet<GlobalState>), BTreeSet<GlobalState>> = HashMap::new();
    let mut report = Report::default();
    let mut prefix = Vec::new();
    visit(lib, g, functions, &names, depth, cap, &init, false, &mut prefix, &mut memo, &mut report)?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn visit(
    lib: &LibraryModule,
    g: &InterfaceGraph,
    functions: &[FunctionId],
    names: &[String],
    depth: usize,
    cap: usize,
    states: &BTreeSet<GlobalState>,
    reached_error: bool,
    prefix: &mut Vec<String>,
    memo: &mut HashMap<(FunctionId, BTreeSet<GlobalState>), BTreeSet<GlobalState>>,
    report: &mut Report,
) -> Result<(), OracleError> {
    if prefix.len() == depth {
        return Ok(());
    }
    for (&f, name) in functions.iter().zip(names) {
        let key = (f, states.clone());
        let next = match memo.get(&key) {
            Some(n) => n.clone(),
            None => {
                let n = concrete_call(lib, f, states, cap)?;
                memo.insert(key, n.clone());
                n
            }
        };
        let error = reached_error || next.iter().any(|s| is_error(lib, s));
        prefix.push(name.clone());
        let got = simulate_client(g, prefix, names).expect("names come from the library");
        report.sequences_checked += 1;
        let flagged = matches!(got, Verdict::ErrorAt(_));
        let expected = if error { "ILLEGAL" } else { "LEGAL" };
        if error != flagged {
            let v = Violation { sequence: prefix.clone(), expected: expected.into(), got: got.to_string() };
            if error {
                report.safe_violations.push(v);
            } else {
                report.permissive_violations.push(v);
            }
        }
        visit(lib, g, functions, names, depth, cap, &next, error, prefix, memo, report)?;
        prefix.pop();
    }
    Ok(())
}
