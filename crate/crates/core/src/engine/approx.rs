use super::FunctionSym;
use crate::abstraction::{Abstraction, RegionId, RegionSet};
use std::collections::BTreeMap;

/// Grouping of a function's rule indices into blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulePartition {
    pub blocks: Vec<Vec<usize>>,
}

impl RulePartition {
    /// One block per rule.
    pub fn singletons(rules: usize) -> Self {
        RulePartition { blocks: (0..rules).map(|i| vec![i]).collect() }
    }

    /// All rules in one block.
    pub fn merged(rules: usize) -> Self {
        let blocks = if rules == 0 { Vec::new() } else { vec![(0..rules).collect()] };
        RulePartition { blocks }
    }
}

/// Rules `i` and `j` share a block iff their guards meet the same regions.
/// Blocks are ordered by their least member.
pub fn partition_rules(f: &FunctionSym, a: &Abstraction) -> RulePartition {
    let mut blocks: Vec<(RegionSet, Vec<usize>)> = Vec::new();
    for (i, rule) in f.trans.rules().iter().enumerate() {
        let over = a.abs_over(&rule.enabled);
        match blocks.iter_mut().find(|(key, _)| *key == over) {
            Some((_, members)) => members.push(i),
            None => blocks.push((over, vec![i])),
        }
    }
    RulePartition { blocks: blocks.into_iter().map(|(_, m)| m).collect() }
}

/// Abstract transitions as a successor map; regions without outgoing
/// transitions are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbstractRelation {
    pub succ: BTreeMap<RegionId, RegionSet>,
}

impl AbstractRelation {
    fn add(&mut self, from: RegionId, to: RegionSet) {
        if !to.is_empty() {
            self.succ.entry(from).or_default().extend(to);
        }
    }

    pub fn contains(&self, from: RegionId, to: RegionId) -> bool {
        self.succ.get(&from).is_some_and(|s| s.contains(&to))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.values().map(|s| s.len()).sum()
    }

    /// `{r | succ(r) ∩ x ≠ ∅}`.
    pub fn pre_one(&self, x: &RegionSet) -> RegionSet {
        self.succ.iter().filter(|(_, to)| to.iter().any(|r| x.contains(r))).map(|(from, _)| *from).collect()
    }

    /// Least fixpoint of `Y = x ∪ pre_one(Y)`.
    pub fn pre_star(&self, x: &RegionSet) -> RegionSet {
        let mut reached = x.clone();
        loop {
            let more = self.pre_one(&reached);
            let before = reached.len();
            reached.extend(more);
            if reached.len() == before {
                return reached;
            }
        }
    }
}

/// May transitions: `r1 → r2` when some state of `r1` enabling the block
/// has a block successor in `r2`.
pub fn trans_may_approx(f: &FunctionSym, a: &Abstraction, blocks: &RulePartition) -> AbstractRelation {
    let mut rel = AbstractRelation::default();
    for block in &blocks.blocks {
        let guard = f.trans.enabled_of(block);
        for r1 in a.abs_over(&guard) {
            let image = f.trans.image_of(block, &a.region(r1).extent);
            rel.add(r1, a.abs_over(&image));
        }
    }
    rel
}

/// Must transitions: `r1 → r2` when every state of `r1` has a block
/// successor in `r2`. Such an `r1` lies inside the block guard.
pub fn trans_must_approx(f: &FunctionSym, a: &Abstraction, blocks: &RulePartition) -> AbstractRelation {
    let mut rel = AbstractRelation::default();
    for block in &blocks.blocks {
        let guard = f.trans.enabled_of(block);
        let sources = a.abs_under(&guard);
        if sources.is_empty() {
            continue;
        }
        for r1 in &sources {
            let image = f.trans.image_of(block, &a.region(*r1).extent);
            let mut targets = RegionSet::new();
            for r2 in a.abs_over(&image) {
                let pre = f.trans.pre_of(block, &a.region(r2).extent);
                if a.region(*r1).extent.is_subset(&pre) {
                    targets.insert(r2);
                }
            }
            rel.add(*r1, targets);
        }
    }
    rel
}

pub fn pre_may_one(f: &FunctionSym, a: &Abstraction, blocks: &RulePartition, x: &RegionSet) -> RegionSet {
    trans_may_approx(f, a, blocks).pre_one(x)
}

pub fn pre_must_one(f: &FunctionSym, a: &Abstraction, blocks: &RulePartition, x: &RegionSet) -> RegionSet {
    trans_must_approx(f, a, blocks).pre_one(x)
}

/// Regions that may reach `x`.
pub fn pre_may_approx(f: &FunctionSym, a: &Abstraction, blocks: &RulePartition, x: &RegionSet) -> RegionSet {
    trans_may_approx(f, a, blocks).pre_star(x)
}

/// Regions all of whose states reach `x`.
pub fn pre_must_approx(f: &FunctionSym, a: &Abstraction, blocks: &RulePartition, x: &RegionSet) -> RegionSet {
    trans_must_approx(f, a, blocks).pre_star(x)
}
