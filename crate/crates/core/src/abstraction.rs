//! Finite partitions of a state space into regions, with over- and
//! under-approximation of sets and the two refinement primitives.

use crate::model::VarId;
use crate::symstate::{StateSpace, ValuationSet};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionId(pub u32);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

pub type RegionSet = BTreeSet<RegionId>;

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: RegionId,
    /// The region this one was split from.
    pub parent: Option<RegionId>,
    pub extent: ValuationSet,
}

/// A partition of a state space into non-empty, pairwise-disjoint regions.
#[derive(Debug, Clone)]
pub struct Abstraction {
    space: Arc<StateSpace>,
    regions: Vec<Region>,
    index: HashMap<RegionId, usize>,
    next_id: u32,
}

impl PartialEq for Abstraction {
    fn eq(&self, other: &Self) -> bool {
        self.regions.len() == other.regions.len()
            && self.regions.iter().zip(&other.regions).all(|(a, b)| a.id == b.id && a.extent == b.extent)
    }
}

impl Abstraction {
    /// Builds a partition from the non-empty members of `parts`, which
    /// must be pairwise disjoint and cover the space.
    pub fn from_parts(space: &Arc<StateSpace>, parts: Vec<ValuationSet>) -> Self {
        let mut regions = Vec::new();
        let mut cover = space.empty();
        for extent in parts {
            if extent.is_empty() {
                continue;
            }
            assert!(!cover.intersects(&extent), "overlapping regions");
            cover = cover.union(&extent);
            regions.push(Region { id: RegionId(regions.len() as u32), parent: None, extent });
        }
        assert!(cover.is_full(), "regions do not cover the state space");
        let next_id = regions.len() as u32;
        Self::assemble(space, regions, next_id)
    }

    /// Rebuilds an abstraction from stored regions (ids preserved).
    pub fn from_regions(space: &Arc<StateSpace>, regions: Vec<Region>, next_id: u32) -> Self {
        Self::assemble(space, regions, next_id)
    }

    fn assemble(space: &Arc<StateSpace>, regions: Vec<Region>, next_id: u32) -> Self {
        let index = regions.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
        Abstraction { space: Arc::clone(space), regions, index, next_id }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    pub fn ids(&self) -> RegionSet {
        self.regions.iter().map(|r| r.id).collect()
    }

    pub fn region(&self, id: RegionId) -> &Region {
        &self.regions[self.index[&id]]
    }

    pub fn contains_region(&self, id: RegionId) -> bool {
        self.index.contains_key(&id)
    }

    /// Union of the extents of `u`.
    pub fn concretize(&self, u: &RegionSet) -> ValuationSet {
        u.iter().fold(self.space.empty(), |acc, id| acc.union(&self.region(*id).extent))
    }

    /// Regions that meet `t`.
    pub fn abs_over(&self, t: &ValuationSet) -> RegionSet {
        self.regions.iter().filter(|r| r.extent.intersects(t)).map(|r| r.id).collect()
    }

    /// Regions contained in `t`.
    pub fn abs_under(&self, t: &ValuationSet) -> RegionSet {
        self.regions.iter().filter(|r| r.extent.is_subset(t)).map(|r| r.id).collect()
    }

    pub fn is_precise(&self, t: &ValuationSet) -> bool {
        self.regions.iter().all(|r| !r.extent.intersects(t) || r.extent.is_subset(t))
    }

    fn replace(&self, split: impl Fn(&Region) -> Vec<ValuationSet>) -> Abstraction {
        let mut next_id = self.next_id;
        let mut regions = Vec::with_capacity(self.regions.len());
        for r in &self.regions {
            let parts: Vec<ValuationSet> = split(r).into_iter().filter(|p| !p.is_empty()).collect();
            if parts.len() <= 1 {
                regions.push(r.clone());
                continue;
            }
            for extent in parts {
                regions.push(Region { id: RegionId(next_id), parent: Some(r.id), extent });
                next_id += 1;
            }
        }
        Self::assemble(&self.space, regions, next_id)
    }

    /// Splits every region that straddles `c` into its parts inside and
    /// outside `c`.
    pub fn split_by_set(&self, c: &ValuationSet) -> Abstraction {
        self.replace(|r| vec![r.extent.intersect(c), r.extent.minus(c)])
    }

    /// Splits every region by the value of `v`.
    pub fn split_by_variable(&self, v: VarId) -> Abstraction {
        let values: Vec<ValuationSet> = self.space.domain(v).map(|c| self.space.var_equals(v, c)).collect();
        self.replace(|r| values.iter().map(|x| r.extent.intersect(x)).collect())
    }

    /// True when `v` is constant on every region.
    pub fn is_fully_split(&self, v: VarId) -> bool {
        let values: Vec<ValuationSet> = self.space.domain(v).map(|c| self.space.var_equals(v, c)).collect();
        self.regions.iter().all(|r| values.iter().filter(|x| r.extent.intersects(x)).count() <= 1)
    }

    /// The same partition viewed over a larger space (same ids).
    pub fn lift(&self, space: &Arc<StateSpace>) -> Abstraction {
        let regions = self
            .regions
            .iter()
            .map(|r| Region { id: r.id, parent: r.parent, extent: r.extent.with_space(space) })
            .collect();
        Self::assemble(space, regions, self.next_id)
    }

    /// Union of the supports of every region.
    pub fn support(&self) -> BTreeSet<VarId> {
        self.regions.iter().flat_map(|r| r.extent.support()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::engine::{initial_abstraction, SymbolicLibrary};
    use crate::model::parse_library;

    fn intstack() -> SymbolicLibrary {
        SymbolicLibrary::new(parse_library(&bundled::intstack()).unwrap())
    }

    fn eq(sym: &SymbolicLibrary, space: &Arc<StateSpace>, name: &str, value: i64) -> ValuationSet {
        space.var_equals(sym.lib.var_by_qualified_name(name).unwrap(), value)
    }

    fn ids(v: &[u32]) -> RegionSet {
        v.iter().map(|&i| RegionId(i)).collect()
    }

    fn assert_partition(a: &Abstraction) {
        let mut cover = a.space().empty();
        for r in a.regions() {
            assert!(!r.extent.is_empty());
            assert!(!cover.intersects(&r.extent));
            cover = cover.union(&r.extent);
        }
        assert!(cover.is_full());
    }

    #[test]
    fn concretize_and_approximations() {
        let sym = intstack();
        let a = initial_abstraction(&sym);
        let g = &sym.globals;
        let ok = eq(&sym, g, "err", 0);
        let top0 = ok.intersect(&eq(&sym, g, "top", 0));
        assert_eq!(a.concretize(&ids(&[1])), top0);
        assert!(a.concretize(&a.ids()).is_full());
        assert!(a.concretize(&RegionSet::new()).is_empty());

        assert_eq!(a.abs_over(&top0), ids(&[1]));
        assert!(a.abs_over(&g.empty()).is_empty());
        let low = ok.intersect(&eq(&sym, g, "top", 2).complement());
        assert_eq!(a.abs_over(&low), ids(&[1, 2]));

        assert_eq!(a.abs_under(&eq(&sym, g, "err", 1)), ids(&[0]));
        assert_eq!(a.abs_under(&low), ids(&[1]));
        assert_eq!(a.abs_under(&g.full()), a.ids());

        assert!(a.is_precise(&eq(&sym, g, "err", 1)));
        assert!(!a.is_precise(&ok.intersect(&eq(&sym, g, "top", 1))));
        assert!(a.is_precise(&g.empty()));
    }

    #[test]
    fn split_by_set_examples() {
        let sym = intstack();
        let a = initial_abstraction(&sym);
        let g = &sym.globals;
        let c = eq(&sym, g, "err", 0).intersect(&eq(&sym, g, "top", 2));
        let b = a.split_by_set(&c);
        assert_partition(&b);
        assert_eq!(b.len(), 4);
        assert_eq!(b.region(RegionId(0)), a.region(RegionId(0)));
        assert_eq!(b.region(RegionId(1)), a.region(RegionId(1)));
        assert!(!b.contains_region(RegionId(2)));
        assert_eq!(b.region(RegionId(3)).extent, c);
        assert_eq!(b.region(RegionId(3)).parent, Some(RegionId(2)));
        assert_eq!(b.region(RegionId(4)).extent, eq(&sym, g, "err", 0).intersect(&eq(&sym, g, "top", 1)));
        assert!(b.is_precise(&c));

        assert_eq!(a.split_by_set(&g.empty()), a);
        assert_eq!(a.split_by_set(&g.full()), a);
        let top0 = eq(&sym, g, "err", 0).intersect(&eq(&sym, g, "top", 0));
        assert_eq!(a.split_by_set(&top0), a);
    }

    #[test]
    fn split_by_variable_examples() {
        let sym = intstack();
        let pop = sym.function(sym.lib.function_id("pop").unwrap());
        let local = initial_abstraction(&sym).lift(&pop.space);
        let s = sym.lib.var_by_qualified_name("pop.s").unwrap();
        assert!(!local.is_fully_split(s));
        let split = local.split_by_variable(s);
        assert_partition(&split);
        assert_eq!(split.len(), 6);
        assert!(split.is_fully_split(s));
        for v in 0..2 {
            assert!(split.is_precise(&pop.space.var_equals(s, v)));
        }
        let err = sym.lib.err_var();
        assert_eq!(local.split_by_variable(err), local);

        let lib = parse_library(
            "module m:\n  var one : [2..2]\n  var x : [0..1]\n  init: err = 0 & x = 0\n  error: err = 1\nendmodule\n",
        )
        .unwrap();
        let sym = SymbolicLibrary::new(lib);
        let a = initial_abstraction(&sym);
        assert_eq!(a.split_by_variable(sym.lib.var_by_qualified_name("one").unwrap()), a);
    }

    #[test]
    fn lift_keeps_ids_and_support() {
        let sym = intstack();
        let a = initial_abstraction(&sym);
        let push = sym.function(sym.lib.function_id("push").unwrap());
        let lifted = a.lift(&push.space);
        assert_eq!(lifted.ids(), a.ids());
        assert_eq!(lifted.support(), a.support());
        assert_eq!(a.support().len(), 2);
    }
}
