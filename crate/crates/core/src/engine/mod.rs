//! Abstraction refinement over a library: the initial partition, per-rule
//! may/must approximations, per-function refinement and the driver that
//! folds it over a function list.

mod absref;
mod approx;

pub use absref::{absref, choose_variable, RefinementContext, RefinementEvent};
pub use approx::{
    partition_rules, pre_may_approx, pre_may_one, pre_must_approx, pre_must_one, trans_may_approx, trans_must_approx,
    AbstractRelation, RulePartition,
};

use crate::abstraction::Abstraction;
use crate::igraph::{build_interface, InterfaceGraph};
use crate::model::{FunctionId, LibraryModule};
use crate::symstate::{StateSpace, SymContext, TransitionRelation, ValuationSet};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("refinement stuck in `{function}`: {detail}")]
    RefinementStuck { function: String, detail: String },
    #[error("`{function}` may not terminate: {detail}")]
    NonTermination { function: String, detail: String },
}

/// Symbolic view of one function: its state space, transition relation
/// and entry states.
#[derive(Debug, Clone)]
pub struct FunctionSym {
    pub id: FunctionId,
    pub name: String,
    pub space: Arc<StateSpace>,
    pub trans: TransitionRelation,
    /// Entry states: locals at their initial value, inputs unconstrained.
    pub entry: ValuationSet,
}

/// A library together with the symbolic sets every algorithm needs.
#[derive(Debug, Clone)]
pub struct SymbolicLibrary {
    pub lib: LibraryModule,
    pub ctx: Arc<SymContext>,
    pub globals: Arc<StateSpace>,
    pub init: ValuationSet,
    pub error: ValuationSet,
    functions: Vec<FunctionSym>,
}

impl SymbolicLibrary {
    pub fn new(lib: LibraryModule) -> Self {
        let ctx = SymContext::new(&lib);
        let globals = ctx.global_space(&lib);
        let init = globals.from_predicate(&lib.init);
        let error = globals.from_predicate(&lib.error);
        let functions = lib
            .function_ids()
            .map(|id| {
                let space = ctx.function_space(&lib, id);
                let trans = TransitionRelation::new(&lib, id, &space, &error);
                let entry = space.from_predicate(&lib.function(id).entry_predicate(&lib));
                FunctionSym { id, name: lib.function(id).name.clone(), space, trans, entry }
            })
            .collect();
        SymbolicLibrary { lib, ctx, globals, init, error, functions }
    }

    pub fn function(&self, id: FunctionId) -> &FunctionSym {
        &self.functions[id.0]
    }

    pub fn functions(&self) -> &[FunctionSym] {
        &self.functions
    }

    /// Looks up functions by name, keeping the given order.
    pub fn resolve(&self, names: &[String]) -> Result<Vec<FunctionId>, String> {
        names.iter().map(|n| self.lib.function_id(n).ok_or_else(|| format!("unknown function `{n}`"))).collect()
    }
}

/// Options shared by the refinement driver.
#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    /// Group rules whose guards meet the same regions before computing
    /// must transitions.
    pub rule_partition: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { rule_partition: true }
    }
}

/// Regions `E`, `I ∖ E` and the rest of the global space, dropping empty ones.
pub fn initial_abstraction(sym: &SymbolicLibrary) -> Abstraction {
    let e = sym.error.clone();
    let i = sym.init.minus(&e);
    let rest = e.union(&i).complement();
    Abstraction::from_parts(&sym.globals, vec![e, i, rest])
}

/// Result of a refinement run.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub abstraction: Abstraction,
    pub graph: InterfaceGraph,
    /// Functions the abstraction was refined for, in order.
    pub functions: Vec<FunctionId>,
    pub trace: Vec<RefinementEvent>,
}

/// Refines `start` (or the initial abstraction) for each function in turn,
/// then builds the interface graph over the same functions.
pub fn explore(
    sym: &SymbolicLibrary,
    functions: &[FunctionId],
    start: Option<Abstraction>,
    opts: EngineOptions,
) -> Result<Exploration, EngineError> {
    let mut abs = start.unwrap_or_else(|| initial_abstraction(sym));
    let mut trace = Vec::new();
    for &f in functions {
        let (next, events) = absref(sym, &abs, f, opts)?;
        abs = next;
        trace.extend(events);
    }
    let graph = build_interface(sym, &abs, functions)?;
    Ok(Exploration { abstraction: abs, graph, functions: functions.to_vec(), trace })
}

/// Adds `new` functions to a previous run: refines only for them, then
/// rebuilds the graph over all included functions.
pub fn explore_incremental(
    sym: &SymbolicLibrary,
    prev: &Exploration,
    new: &[FunctionId],
    opts: EngineOptions,
) -> Result<Exploration, EngineError> {
    if let Some(f) = new.iter().find(|f| prev.functions.contains(f)) {
        panic!("function `{}` is already part of the interface", sym.function(*f).name);
    }
    if new.is_empty() {
        return Ok(prev.clone());
    }
    let mut abs = prev.abstraction.clone();
    let mut trace = prev.trace.clone();
    for &f in new {
        let (next, events) = absref(sym, &abs, f, opts)?;
        abs = next;
        trace.extend(events);
    }
    let mut all = prev.functions.clone();
    all.extend_from_slice(new);
    let graph = build_interface(sym, &abs, &all)?;
    Ok(Exploration { abstraction: abs, graph, functions: all, trace })
}
