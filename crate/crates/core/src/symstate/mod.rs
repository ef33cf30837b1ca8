//! Symbolic sets of valuations over declared variables, rule images and
//! pre-images, and concrete fixpoint reachability.
//!
//! All sets of one library live in a shared [`SymContext`]. A
//! [`StateSpace`] selects a subset of the library's variables (the globals,
//! or everything visible inside one function); a set over a space never
//! constrains variables outside it, so lifting a global set into a function
//! space is free and projecting back is existential quantification.

pub(crate) mod mdd;
mod relation;

pub use relation::{post_k, pre_star, RuleRelation, TransitionRelation};

use crate::model::{CmpOp, FunctionId, LibraryModule, Predicate, Term, VarId};
use mdd::{Mdd, NodeId, FALSE, TRUE};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, Mutex, MutexGuard};

#[derive(Debug, Clone)]
pub(crate) struct VarInfo {
    pub name: String,
    pub lo: i64,
    pub size: u32,
}

/// Owner of the decision-diagram store for one library.
#[derive(Debug)]
pub struct SymContext {
    vars: Vec<VarInfo>,
    mdd: Mutex<Mdd>,
}

impl SymContext {
    pub fn new(lib: &LibraryModule) -> Arc<Self> {
        let vars: Vec<VarInfo> =
            lib.vars.iter().map(|d| VarInfo { name: d.qualified_name(), lo: d.lo, size: d.domain_size() }).collect();
        let sizes: Vec<u32> = vars.iter().map(|v| v.size).collect();
        Arc::new(SymContext { vars, mdd: Mutex::new(Mdd::new(&sizes)) })
    }

    pub(crate) fn lock(&self) -> MutexGuard<'_, Mdd> {
        self.mdd.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub(crate) fn var(&self, v: VarId) -> &VarInfo {
        &self.vars[v.0]
    }

    pub fn space(self: &Arc<Self>, name: impl Into<String>, vars: Vec<VarId>) -> Arc<StateSpace> {
        let mut sorted = vars.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, vars, "state-space variables must be in declaration order");
        Arc::new(StateSpace { ctx: Arc::clone(self), name: name.into(), vars })
    }

    pub fn global_space(self: &Arc<Self>, lib: &LibraryModule) -> Arc<StateSpace> {
        self.space("globals", lib.globals.clone())
    }

    pub fn function_space(self: &Arc<Self>, lib: &LibraryModule, f: FunctionId) -> Arc<StateSpace> {
        self.space(lib.function(f).name.clone(), lib.scoped_vars(f))
    }

    pub fn node_count(&self) -> usize {
        self.lock().node_count()
    }
}

/// An ordered variable list; its size is the product of the domain sizes.
pub struct StateSpace {
    ctx: Arc<SymContext>,
    name: String,
    vars: Vec<VarId>,
}

impl fmt::Debug for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateSpace").field("name", &self.name).field("vars", &self.vars).finish()
    }
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) && self.vars == other.vars
    }
}

impl StateSpace {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn context(&self) -> &Arc<SymContext> {
        &self.ctx
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.vars.binary_search(&v).is_ok()
    }

    pub fn domain(&self, v: VarId) -> std::ops::RangeInclusive<i64> {
        let info = self.ctx.var(v);
        info.lo..=info.lo + info.size as i64 - 1
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.ctx.var(v).name
    }

    pub(crate) fn current_levels(&self) -> Vec<u32> {
        self.vars.iter().map(|v| 2 * v.0 as u32).collect()
    }

    /// Number of total valuations.
    pub fn size(&self) -> u128 {
        self.vars.iter().map(|&v| self.ctx.var(v).size as u128).product()
    }

    pub fn empty(self: &Arc<Self>) -> ValuationSet {
        ValuationSet { space: Arc::clone(self), node: FALSE }
    }

    pub fn full(self: &Arc<Self>) -> ValuationSet {
        ValuationSet { space: Arc::clone(self), node: TRUE }
    }

    pub(crate) fn wrap(self: &Arc<Self>, node: NodeId) -> ValuationSet {
        ValuationSet { space: Arc::clone(self), node }
    }

    /// `v = value`; empty when the value is outside the domain.
    pub fn var_equals(self: &Arc<Self>, v: VarId, value: i64) -> ValuationSet {
        assert!(self.contains_var(v), "variable outside the state space");
        let info = self.ctx.var(v).clone();
        let offset = value - info.lo;
        if offset < 0 || offset >= info.size as i64 {
            return self.empty();
        }
        let node = self.ctx.lock().literal(2 * v.0 as u32, offset as u32);
        self.wrap(node)
    }

    pub fn from_predicate(self: &Arc<Self>, p: &Predicate) -> ValuationSet {
        let mut mdd = self.ctx.lock();
        let node = compile_predicate(&self.ctx, &mut mdd, self, p);
        drop(mdd);
        self.wrap(node)
    }

    /// The set containing exactly one valuation, given in space order.
    pub fn singleton(self: &Arc<Self>, values: &[i64]) -> ValuationSet {
        assert_eq!(values.len(), self.vars.len());
        let mut acc = self.full();
        for (&v, &x) in self.vars.iter().zip(values) {
            acc = acc.intersect(&self.var_equals(v, x));
        }
        acc
    }
}

fn compile_predicate(ctx: &SymContext, mdd: &mut Mdd, space: &StateSpace, p: &Predicate) -> NodeId {
    match p {
        Predicate::Bool(true) => TRUE,
        Predicate::Bool(false) => FALSE,
        Predicate::And(a, b) => {
            let a = compile_predicate(ctx, mdd, space, a);
            let b = compile_predicate(ctx, mdd, space, b);
            mdd.and(a, b)
        }
        Predicate::Or(a, b) => {
            let a = compile_predicate(ctx, mdd, space, a);
            let b = compile_predicate(ctx, mdd, space, b);
            mdd.or(a, b)
        }
        Predicate::Not(a) => {
            let a = compile_predicate(ctx, mdd, space, a);
            mdd.not(a)
        }
        Predicate::Cmp(lhs, op, rhs) => compile_atom(ctx, mdd, space, lhs, *op, rhs),
    }
}

fn compile_atom(ctx: &SymContext, mdd: &mut Mdd, space: &StateSpace, lhs: &Term, op: CmpOp, rhs: &Term) -> NodeId {
    let mut vars = lhs.vars();
    vars.extend(rhs.vars());
    vars.sort();
    vars.dedup();
    for v in &vars {
        assert!(space.contains_var(*v), "predicate mentions `{}` outside space `{}`", ctx.var(*v).name, space.name);
    }
    let levels: Vec<u32> = vars.iter().map(|v| 2 * v.0 as u32).collect();
    let los: Vec<i64> = vars.iter().map(|v| ctx.var(*v).lo).collect();
    mdd.build_table(&levels, &mut |vals| {
        let env = |v: VarId| {
            let k = vars.binary_search(&v).unwrap();
            los[k] + vals[k] as i64
        };
        op.holds(lhs.eval(&env), rhs.eval(&env))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ValuationKey(NodeId);

/// A set of total valuations of a [`StateSpace`].
///
/// Sets are canonical: two sets over the same space are equal exactly when
/// they contain the same valuations.
#[derive(Clone)]
pub struct ValuationSet {
    space: Arc<StateSpace>,
    node: NodeId,
}

impl PartialEq for ValuationSet {
    fn eq(&self, other: &Self) -> bool {
        self.check_space(other);
        self.node == other.node
    }
}

impl Eq for ValuationSet {}

impl fmt::Debug for ValuationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ValuationSet[{}]({})", self.space.name, self.describe())
    }
}

impl ValuationSet {
    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub(crate) fn node(&self) -> NodeId {
        self.node
    }

    /// Hashable identity; equal keys mean equal sets within one space.
    pub fn key(&self) -> ValuationKey {
        ValuationKey(self.node)
    }

    fn check_space(&self, other: &ValuationSet) {
        assert!(
            *self.space == *other.space,
            "sets over different state spaces (`{}` vs `{}`)",
            self.space.name,
            other.space.name
        );
    }

    fn binary(&self, other: &ValuationSet, op: fn(&mut Mdd, NodeId, NodeId) -> NodeId) -> ValuationSet {
        self.check_space(other);
        let node = op(&mut self.space.ctx.lock(), self.node, other.node);
        self.space.wrap(node)
    }

    pub fn union(&self, other: &ValuationSet) -> ValuationSet {
        self.binary(other, Mdd::or)
    }

    pub fn intersect(&self, other: &ValuationSet) -> ValuationSet {
        self.binary(other, Mdd::and)
    }

    pub fn minus(&self, other: &ValuationSet) -> ValuationSet {
        self.binary(other, Mdd::diff)
    }

    pub fn complement(&self) -> ValuationSet {
        let node = self.space.ctx.lock().not(self.node);
        self.space.wrap(node)
    }

    pub fn is_empty(&self) -> bool {
        self.node == FALSE
    }

    pub fn is_full(&self) -> bool {
        self.node == TRUE
    }

    pub fn is_subset(&self, other: &ValuationSet) -> bool {
        self.minus(other).is_empty()
    }

    pub fn intersects(&self, other: &ValuationSet) -> bool {
        !self.intersect(other).is_empty()
    }

    /// Membership of a valuation given in space order.
    pub fn contains(&self, values: &[i64]) -> bool {
        assert_eq!(values.len(), self.space.vars.len());
        let ctx = &self.space.ctx;
        let offsets: Vec<Option<u32>> = self
            .space
            .vars
            .iter()
            .zip(values)
            .map(|(&v, &x)| {
                let info = ctx.var(v);
                let off = x - info.lo;
                (0..info.size as i64).contains(&off).then_some(off as u32)
            })
            .collect();
        if offsets.iter().any(Option::is_none) {
            return false;
        }
        let vars = &self.space.vars;
        let mdd = ctx.lock();
        mdd.eval(self.node, &|level| {
            let var = VarId((level / 2) as usize);
            let k = vars.binary_search(&var).expect("set mentions a foreign variable");
            offsets[k].unwrap()
        })
    }

    pub fn cardinality(&self) -> u128 {
        let levels = self.space.current_levels();
        self.space.ctx.lock().count(self.node, &levels)
    }

    /// Variables whose value can flip membership.
    pub fn support(&self) -> BTreeSet<VarId> {
        self.space.ctx.lock().support_levels(self.node).into_iter().map(|l| VarId((l / 2) as usize)).collect()
    }

    /// Reinterprets the set over `space`, which must contain every
    /// variable the set depends on.
    pub fn with_space(&self, space: &Arc<StateSpace>) -> ValuationSet {
        assert!(Arc::ptr_eq(&self.space.ctx, &space.ctx), "foreign context");
        for v in self.support() {
            assert!(space.contains_var(v), "`{}` is not in space `{}`", space.var_name(v), space.name);
        }
        space.wrap(self.node)
    }

    /// Existentially quantifies every variable outside `target` and
    /// returns the result over `target`.
    pub fn project(&self, target: &Arc<StateSpace>) -> ValuationSet {
        let hidden: Vec<u32> =
            self.space.vars.iter().filter(|v| !target.contains_var(**v)).map(|v| 2 * v.0 as u32).collect();
        let mut mdd = self.space.ctx.lock();
        let q = mdd.quant_set(hidden);
        let node = mdd.exists(self.node, q);
        drop(mdd);
        target.wrap(node)
    }

    pub fn exists_vars(&self, vars: &[VarId]) -> ValuationSet {
        let mut mdd = self.space.ctx.lock();
        let q = mdd.quant_set(vars.iter().map(|v| 2 * v.0 as u32));
        let node = mdd.exists(self.node, q);
        drop(mdd);
        self.space.wrap(node)
    }

    /// Every valuation, in lexicographic space order. Only for small sets.
    pub fn valuations(&self) -> Vec<Vec<i64>> {
        let vars = &self.space.vars;
        let infos: Vec<VarInfo> = vars.iter().map(|v| self.space.ctx.var(*v).clone()).collect();
        let mdd = self.space.ctx.lock();
        let mut out = Vec::new();
        let mut current = vec![0i64; vars.len()];
        fn rec(
            mdd: &Mdd,
            node: NodeId,
            idx: usize,
            vars: &[VarId],
            infos: &[VarInfo],
            current: &mut Vec<i64>,
            out: &mut Vec<Vec<i64>>,
        ) {
            if node == FALSE {
                return;
            }
            if idx == vars.len() {
                out.push(current.clone());
                return;
            }
            let level = 2 * vars[idx].0 as u32;
            for off in 0..infos[idx].size {
                let child = if !mdd.is_terminal(node) && mdd.level(node) == level {
                    mdd.children(node)[off as usize]
                } else {
                    node
                };
                current[idx] = infos[idx].lo + off as i64;
                rec(mdd, child, idx + 1, vars, infos, current, out);
            }
        }
        rec(&mdd, self.node, 0, vars, &infos, &mut current, &mut out);
        out
    }

    /// Disjunction of interval cubes, e.g. `err=0 & 1<=top<=2 | ...`.
    pub fn describe(&self) -> String {
        self.describe_limited(16)
    }

    pub fn describe_limited(&self, limit: usize) -> String {
        if self.is_empty() {
            return "false".into();
        }
        if self.is_full() {
            return "true".into();
        }
        let (cubes, truncated) = self.space.ctx.lock().cubes(self.node, limit);
        let mut parts: Vec<String> = cubes
            .iter()
            .map(|cube| {
                let lits: Vec<String> = cube
                    .iter()
                    .map(|(level, offs)| {
                        let info = self.space.ctx.var(VarId((*level / 2) as usize));
                        describe_values(&info.name, info.lo, offs)
                    })
                    .collect();
                lits.join(" & ")
            })
            .collect();
        if truncated {
            parts.push("...".into());
        }
        parts.join(" | ")
    }

    /// Cube list over space variables: each cube maps a qualified variable
    /// name to its admitted values. Used for persistence.
    pub fn to_cubes(&self) -> Vec<Vec<(String, Vec<i64>)>> {
        let (cubes, _) = self.space.ctx.lock().cubes(self.node, usize::MAX);
        cubes
            .into_iter()
            .map(|cube| {
                cube.into_iter()
                    .map(|(level, offs)| {
                        let info = self.space.ctx.var(VarId((level / 2) as usize));
                        (info.name.clone(), offs.iter().map(|&o| info.lo + o as i64).collect())
                    })
                    .collect()
            })
            .collect()
    }

    /// Inverse of [`ValuationSet::to_cubes`].
    pub fn from_cubes(space: &Arc<StateSpace>, cubes: &[Vec<(String, Vec<i64>)>]) -> Option<ValuationSet> {
        let mut acc = space.empty();
        for cube in cubes {
            let mut c = space.full();
            for (name, values) in cube {
                let var = *space.vars.iter().find(|v| space.var_name(**v) == name)?;
                let lit = values.iter().fold(space.empty(), |s, &x| s.union(&space.var_equals(var, x)));
                c = c.intersect(&lit);
            }
            acc = acc.union(&c);
        }
        Some(acc)
    }
}

fn describe_values(name: &str, lo: i64, offs: &[u32]) -> String {
    let vals: Vec<i64> = offs.iter().map(|&o| lo + o as i64).collect();
    if vals.len() == 1 {
        return format!("{name}={}", vals[0]);
    }
    let contiguous = vals.windows(2).all(|w| w[1] == w[0] + 1);
    if contiguous {
        format!("{}<={name}<={}", vals[0], vals[vals.len() - 1])
    } else {
        let list: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
        format!("{name} in {{{}}}", list.join(","))
    }
}

/// Variables whose value change can flip membership in `x`.
pub fn support(x: &ValuationSet) -> BTreeSet<VarId> {
    x.support()
}

/// Existential projection of a function-space set onto the globals.
pub fn project_to_globals(x: &ValuationSet, globals: &Arc<StateSpace>) -> ValuationSet {
    x.project(globals)
}
