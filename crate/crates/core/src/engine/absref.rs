use super::{
    partition_rules, pre_must_approx, EngineError, EngineOptions, FunctionSym, RulePartition, SymbolicLibrary,
};
use crate::abstraction::Abstraction;
use crate::model::{FunctionId, VarId};
use crate::symstate::ValuationSet;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefinementEvent {
    /// The local abstraction of `function` was split on every value of `var`.
    LocalSplit { function: String, var: String },
    /// The global abstraction was made precise for the entry states of
    /// `function` that must reach the error set.
    GlobalSplit { function: String, before: usize, after: usize },
}

impl fmt::Display for RefinementEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefinementEvent::LocalSplit { function, var } => write!(f, "{function}: split local abstraction on {var}"),
            RefinementEvent::GlobalSplit { function, before, after } => {
                write!(f, "{function}: global regions {before} -> {after}")
            }
        }
    }
}

/// Working state of one refinement run.
#[derive(Debug, Clone)]
pub struct RefinementContext {
    pub v_abs: BTreeSet<VarId>,
    pub local: Abstraction,
    pub global: Abstraction,
    pub trace: Vec<RefinementEvent>,
}

/// Picks the variable to split the local abstraction on when `s_new` is not
/// yet covered by the must predecessors.
///
/// Preference order: supporting variables of `s_new` outside `v_abs`, then
/// supporting variables the local abstraction does not yet separate, then
/// any variable of the function space it does not separate. Within a tier
/// the smallest domain wins, then declaration order.
pub fn choose_variable(ctx: &RefinementContext, s_new: &ValuationSet) -> Option<VarId> {
    let space = ctx.local.space();
    let size = |v: &VarId| space.domain(*v).count();
    let best = |cands: Vec<VarId>| cands.into_iter().min_by_key(|v| (size(v), *v));
    let support = s_new.support();
    let fresh: Vec<VarId> = support.iter().copied().filter(|v| !ctx.v_abs.contains(v) && size(v) > 1).collect();
    if let Some(v) = best(fresh) {
        return Some(v);
    }
    let unsplit: Vec<VarId> = support.iter().copied().filter(|v| !ctx.local.is_fully_split(*v)).collect();
    if let Some(v) = best(unsplit) {
        return Some(v);
    }
    best(space.vars().iter().copied().filter(|v| !ctx.local.is_fully_split(*v)).collect())
}

fn blocks(f: &FunctionSym, a: &Abstraction, opts: EngineOptions) -> RulePartition {
    if opts.rule_partition {
        partition_rules(f, a)
    } else {
        RulePartition::singletons(f.trans.len())
    }
}

/// Refines the global abstraction `global` for function `f` until it
/// separates the entry states from which a call to `f` must reach the
/// error set.
pub fn absref(
    sym: &SymbolicLibrary,
    global: &Abstraction,
    f: FunctionId,
    opts: EngineOptions,
) -> Result<(Abstraction, Vec<RefinementEvent>), EngineError> {
    let fs = sym.function(f);
    let local = global.lift(&fs.space);
    let mut ctx = RefinementContext { v_abs: local.support(), local, global: global.clone(), trace: Vec::new() };
    let error = sym.error.with_space(&fs.space);
    loop {
        let target = ctx.local.abs_under(&error);
        let partition = blocks(fs, &ctx.local, opts);
        let s_m = pre_must_approx(fs, &ctx.local, &partition, &target);
        let must = ctx.local.concretize(&s_m);
        let s_new = fs.trans.pre_one(&must).minus(&must);
        if s_new.is_empty() {
            let at_entry = must.intersect(&fs.entry).project(&sym.globals);
            let before = ctx.global.len();
            let refined = ctx.global.split_by_set(&at_entry);
            if refined.len() != before {
                ctx.trace.push(RefinementEvent::GlobalSplit {
                    function: fs.name.clone(),
                    before,
                    after: refined.len(),
                });
            }
            return Ok((refined, ctx.trace));
        }
        let Some(v) = choose_variable(&ctx, &s_new) else {
            return Err(EngineError::RefinementStuck {
                function: fs.name.clone(),
                detail: format!("no variable left to split; uncovered states: {}", s_new.describe_limited(4)),
            });
        };
        ctx.v_abs.insert(v);
        ctx.local = ctx.local.split_by_variable(v);
        ctx.trace
            .push(RefinementEvent::LocalSplit { function: fs.name.clone(), var: fs.space.var_name(v).to_string() });
    }
}
