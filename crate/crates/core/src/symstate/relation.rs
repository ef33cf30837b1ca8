use super::mdd::{Mdd, NodeId, QuantId, FALSE};
use super::{compile_predicate, StateSpace, ValuationSet};
use crate::model::{FunctionId, LibraryModule, VarId};
use std::sync::Arc;

/// The relation of one guarded-update rule.
///
/// Only written variables carry a primed level; everything else keeps its
/// value implicitly, so images never build frame identities.
#[derive(Debug, Clone)]
pub struct RuleRelation {
    /// States where the rule can fire: guard holds, the state is not
    /// halted, and every update lands inside its target's domain.
    pub enabled: ValuationSet,
    node: NodeId,
    /// Current levels of the written variables.
    written_current: QuantId,
    /// Primed levels of the written variables.
    written_primed: QuantId,
}

/// Per-rule transition relation of one function.
///
/// Halted states (the library error set) have no successors: a library
/// that reached its error set has stopped, which makes that set a sink.
#[derive(Debug, Clone)]
pub struct TransitionRelation {
    space: Arc<StateSpace>,
    rules: Vec<RuleRelation>,
    enabled: ValuationSet,
}

impl TransitionRelation {
    pub fn new(lib: &LibraryModule, f: FunctionId, space: &Arc<StateSpace>, halted: &ValuationSet) -> Self {
        let func = lib.function(f);
        let ctx = Arc::clone(space.context());
        let halted = halted.with_space(space);
        let mut mdd = ctx.lock();
        let running = mdd.not(halted.node());
        let mut rules = Vec::with_capacity(func.rules.len());
        let mut any_enabled = FALSE;
        for rule in &func.rules {
            let guard = compile_predicate(&ctx, &mut mdd, space, &rule.guard);
            let mut rel = mdd.and(guard, running);
            for u in &rule.updates {
                let mut sources = u.value.vars();
                sources.sort();
                let src_levels: Vec<u32> = sources.iter().map(|v| 2 * v.0 as u32).collect();
                let src_los: Vec<i64> = sources.iter().map(|v| ctx.var(*v).lo).collect();
                let target = ctx.var(u.target).clone();
                let node = mdd.build_assignment(&src_levels, 2 * u.target.0 as u32 + 1, &mut |vals| {
                    let env = |v: VarId| {
                        let k = sources.binary_search(&v).unwrap();
                        src_los[k] + vals[k] as i64
                    };
                    let off = u.value.eval(&env) - target.lo;
                    (0..target.size as i64).contains(&off).then_some(off as u32)
                });
                rel = mdd.and(rel, node);
            }
            let written: Vec<u32> = rule.updates.iter().map(|u| 2 * u.target.0 as u32).collect();
            let written_current = mdd.quant_set(written.iter().copied());
            let written_primed = mdd.quant_set(written.iter().map(|l| l + 1));
            let en = mdd.exists(rel, written_primed);
            any_enabled = mdd.or(any_enabled, en);
            rules.push(RuleRelation { enabled: space.wrap(en), node: rel, written_current, written_primed });
        }
        drop(mdd);
        TransitionRelation { space: Arc::clone(space), rules, enabled: space.wrap(any_enabled) }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[RuleRelation] {
        &self.rules
    }

    /// States in which some rule can fire.
    pub fn enabled(&self) -> &ValuationSet {
        &self.enabled
    }

    fn check(&self, x: &ValuationSet) {
        assert!(
            **x.space() == *self.space,
            "set over `{}` used with relation over `{}`",
            x.space().name(),
            self.space.name()
        );
    }

    fn image_node(mdd: &mut Mdd, rule: &RuleRelation, x: NodeId) -> NodeId {
        let next = mdd.and_exists(x, rule.node, rule.written_current);
        mdd.unprime(next)
    }

    fn pre_node(mdd: &mut Mdd, rule: &RuleRelation, y: NodeId) -> NodeId {
        let shifted = mdd.prime(y, rule.written_current);
        mdd.and_exists(rule.node, shifted, rule.written_primed)
    }

    /// Successors of `x` under rule `i`.
    pub fn rule_image(&self, i: usize, x: &ValuationSet) -> ValuationSet {
        self.image_of(&[i], x)
    }

    /// States with a rule-`i` successor in `y`.
    pub fn rule_pre(&self, i: usize, y: &ValuationSet) -> ValuationSet {
        self.pre_of(&[i], y)
    }

    /// Image under the union of the listed rules.
    pub fn image_of(&self, rules: &[usize], x: &ValuationSet) -> ValuationSet {
        self.check(x);
        let mut mdd = self.space.context().lock();
        let mut acc = FALSE;
        for &i in rules {
            let img = Self::image_node(&mut mdd, &self.rules[i], x.node());
            acc = mdd.or(acc, img);
        }
        drop(mdd);
        self.space.wrap(acc)
    }

    pub fn pre_of(&self, rules: &[usize], y: &ValuationSet) -> ValuationSet {
        self.check(y);
        let mut mdd = self.space.context().lock();
        let mut acc = FALSE;
        for &i in rules {
            let p = Self::pre_node(&mut mdd, &self.rules[i], y.node());
            acc = mdd.or(acc, p);
        }
        drop(mdd);
        self.space.wrap(acc)
    }

    /// One-step image under the whole relation.
    pub fn image(&self, x: &ValuationSet) -> ValuationSet {
        self.image_of(&self.all_rules(), x)
    }

    /// `{x | Trans(x) ∩ y ≠ ∅}`.
    pub fn pre_one(&self, y: &ValuationSet) -> ValuationSet {
        self.pre_of(&self.all_rules(), y)
    }

    fn all_rules(&self) -> Vec<usize> {
        (0..self.rules.len()).collect()
    }

    /// Union of the enabled sets of the listed rules.
    pub fn enabled_of(&self, rules: &[usize]) -> ValuationSet {
        rules.iter().fold(self.space.empty(), |acc, &i| acc.union(&self.rules[i].enabled))
    }
}

/// Least fixpoint of `Y ∪ pre_one(X)`: the states that reach `y` in zero or
/// more steps.
pub fn pre_star(rel: &TransitionRelation, y: &ValuationSet) -> ValuationSet {
    let cap = rel.space().size();
    let mut reached = y.clone();
    let mut frontier = y.clone();
    let mut rounds: u128 = 0;
    while !frontier.is_empty() {
        let new = rel.pre_one(&frontier).minus(&reached);
        reached = reached.union(&new);
        frontier = new;
        rounds += 1;
        assert!(rounds <= cap + 1, "backward reachability failed to stabilise");
    }
    reached
}

/// The exact `k`-step image of `x`.
pub fn post_k(rel: &TransitionRelation, x: &ValuationSet, k: usize) -> ValuationSet {
    assert!(k >= 1, "post_k needs k >= 1");
    let mut current = x.clone();
    for _ in 0..k {
        if current.is_empty() {
            break;
        }
        current = rel.image(&current);
    }
    current
}
