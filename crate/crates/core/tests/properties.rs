//! Property tests over randomly generated libraries.

mod common;

use common::{load, random_abstraction, random_library, random_regions, random_set, rng};
use ifsynth::abstraction::Abstraction;
use ifsynth::engine::{
    explore, partition_rules, pre_may_approx, pre_must_approx, EngineError, EngineOptions, RulePartition,
    SymbolicLibrary,
};
use ifsynth::igraph::build_interface;
use ifsynth::model::{parse_library, FunctionId, LibraryModule};
use ifsynth::oracle::{check_interface, DEFAULT_STATE_CAP};
use ifsynth::symstate::{post_k, pre_star, support, StateSpace, ValuationSet};
use proptest::prelude::*;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

fn model(seed: u64, terminating: bool) -> SymbolicLibrary {
    load(&random_library(&mut rng(seed), terminating))
}

/// Explicit successors of a scoped state of `f`, halting in the error set.
fn successors(lib: &LibraryModule, f: FunctionId, vars: &[ifsynth::model::VarId], state: &[i64]) -> Vec<Vec<i64>> {
    let env = |v| state[vars.iter().position(|x| *x == v).unwrap()];
    if lib.error.eval(&env) {
        return Vec::new();
    }
    lib.function(f)
        .rules
        .iter()
        .filter_map(|r| r.fire(lib, &env))
        .map(|updates| {
            let mut next = state.to_vec();
            for (v, x) in updates {
                next[vars.iter().position(|y| *y == v).unwrap()] = x;
            }
            next
        })
        .collect()
}

/// Backward breadth-first search over the explicit state graph.
fn explicit_pre_star(sym: &SymbolicLibrary, f: FunctionId, y: &ValuationSet) -> ValuationSet {
    let space = &sym.function(f).space;
    let vars = sym.lib.scoped_vars(f);
    let states = space.full().valuations();
    let mut preds: HashMap<Vec<i64>, Vec<Vec<i64>>> = HashMap::new();
    for s in &states {
        for t in successors(&sym.lib, f, &vars, s) {
            preds.entry(t).or_default().push(s.clone());
        }
    }
    let mut seen: BTreeSet<Vec<i64>> = y.valuations().into_iter().collect();
    let mut queue: VecDeque<Vec<i64>> = seen.iter().cloned().collect();
    while let Some(t) = queue.pop_front() {
        for p in preds.get(&t).into_iter().flatten() {
            if seen.insert(p.clone()) {
                queue.push_back(p.clone());
            }
        }
    }
    seen.iter().fold(space.empty(), |acc, v| acc.union(&space.singleton(v)))
}

fn check_partition(a: &Abstraction) -> Result<(), TestCaseError> {
    let mut cover = a.space().empty();
    for r in a.regions() {
        prop_assert!(!r.extent.is_empty());
        prop_assert!(!cover.intersects(&r.extent));
        cover = cover.union(&r.extent);
    }
    prop_assert!(cover.is_full());
    Ok(())
}

fn space_of(sym: &SymbolicLibrary, f: FunctionId) -> &Arc<StateSpace> {
    &sym.function(f).space
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn printed_models_reparse(seed in any::<u64>()) {
        let src = random_library(&mut rng(seed), seed % 2 == 0);
        let lib = parse_library(&src).unwrap();
        prop_assert_eq!(parse_library(&lib.to_string()).unwrap(), lib);
    }

    #[test]
    fn error_states_are_sinks(seed in any::<u64>()) {
        let sym = model(seed, false);
        for f in sym.lib.function_ids() {
            let fs = sym.function(f);
            let halted = sym.error.with_space(&fs.space);
            let vars = sym.lib.scoped_vars(f);
            for x in halted.valuations() {
                let next = successors(&sym.lib, f, &vars, &x);
                prop_assert!(next.iter().all(|y| halted.contains(y)));
            }
            prop_assert!(fs.trans.image(&halted).is_subset(&halted));
        }
    }

    #[test]
    fn predecessors_are_monotone(seed in any::<u64>()) {
        let sym = model(seed, false);
        let mut r = rng(seed ^ 1);
        for f in sym.lib.function_ids() {
            let fs = sym.function(f);
            let small = random_set(&mut r, &fs.space);
            let big = small.union(&random_set(&mut r, &fs.space));
            prop_assert!(fs.trans.pre_one(&small).is_subset(&fs.trans.pre_one(&big)));
            prop_assert!(pre_star(&fs.trans, &small).is_subset(&pre_star(&fs.trans, &big)));
        }
    }

    #[test]
    fn pre_star_unrolls(seed in any::<u64>()) {
        let sym = model(seed, false);
        let mut r = rng(seed ^ 2);
        for f in sym.lib.function_ids() {
            let fs = sym.function(f);
            let y = random_set(&mut r, &fs.space);
            let unrolled = y.union(&pre_star(&fs.trans, &fs.trans.pre_one(&y)));
            prop_assert_eq!(pre_star(&fs.trans, &y), unrolled);
        }
    }

    #[test]
    fn post_k_composes(seed in any::<u64>(), k in 1usize..5) {
        let sym = model(seed, false);
        let mut r = rng(seed ^ 3);
        for f in sym.lib.function_ids() {
            let fs = sym.function(f);
            let x = random_set(&mut r, &fs.space);
            let step = post_k(&fs.trans, &post_k(&fs.trans, &x, k), 1);
            prop_assert_eq!(post_k(&fs.trans, &x, k + 1), step);
        }
    }

    #[test]
    fn rule_images_and_predecessors_are_adjoint(seed in any::<u64>()) {
        let sym = model(seed, false);
        for f in sym.lib.function_ids() {
            let fs = sym.function(f);
            let states = fs.space.full().valuations();
            for i in 0..fs.trans.len() {
                for x in &states {
                    let sx = fs.space.singleton(x);
                    let image = fs.trans.rule_image(i, &sx);
                    for y in &states {
                        let sy = fs.space.singleton(y);
                        prop_assert_eq!(fs.trans.rule_pre(i, &sy).contains(x), image.contains(y));
                    }
                }
            }
        }
    }

    #[test]
    fn support_of_union(seed in any::<u64>()) {
        let sym = model(seed, false);
        let mut r = rng(seed ^ 4);
        let f = FunctionId(0);
        let space = space_of(&sym, f);
        let x = random_set(&mut r, space);
        let y = random_set(&mut r, space);
        let both: BTreeSet<_> = support(&x).union(&support(&y)).copied().collect();
        prop_assert!(support(&x.union(&y)).is_subset(&both));
        // support is exactly the set of variables whose change can flip membership
        for v in space.vars() {
            let flips = x.valuations().iter().any(|s| {
                let i = space.vars().iter().position(|w| w == v).unwrap();
                space.domain(*v).any(|c| {
                    let mut t = s.clone();
                    t[i] = c;
                    !x.contains(&t)
                })
            });
            prop_assert_eq!(flips, support(&x).contains(v));
        }
    }

    #[test]
    fn pre_star_matches_explicit_search(seed in any::<u64>()) {
        let sym = model(seed, false);
        let mut r = rng(seed ^ 5);
        for f in sym.lib.function_ids() {
            let fs = sym.function(f);
            let y = random_set(&mut r, &fs.space);
            prop_assert_eq!(pre_star(&fs.trans, &y), explicit_pre_star(&sym, f, &y));
            let err = sym.error.with_space(&fs.space);
            prop_assert_eq!(pre_star(&fs.trans, &err), explicit_pre_star(&sym, f, &err));
        }
    }

    #[test]
    fn refinement_keeps_a_partition(seed in any::<u64>()) {
        let sym = model(seed, false);
        let mut r = rng(seed ^ 6);
        let space = space_of(&sym, FunctionId(0));
        let a = random_abstraction(&mut r, space, 5);
        check_partition(&a)?;
        let c = random_set(&mut r, space);
        let b = a.split_by_set(&c);
        check_partition(&b)?;
        prop_assert!(b.len() <= 2 * a.len());
        prop_assert!(b.is_precise(&c));
        for v in space.vars() {
            let d = a.split_by_variable(*v);
            check_partition(&d)?;
            prop_assert!(d.len() <= a.len() * space.domain(*v).count());
            prop_assert!(d.is_fully_split(*v));
            for refined in [&b, &d] {
                for region in refined.regions() {
                    let parents = a.regions().iter().filter(|p| region.extent.is_subset(&p.extent)).count();
                    prop_assert_eq!(parents, 1);
                }
            }
        }
    }

    #[test]
    fn approximations_bracket_the_set(seed in any::<u64>()) {
        let sym = model(seed, false);
        let mut r = rng(seed ^ 7);
        let space = space_of(&sym, FunctionId(0));
        let a = random_abstraction(&mut r, space, 6);
        let t = random_set(&mut r, space);
        prop_assert!(a.concretize(&a.abs_under(&t)).is_subset(&t));
        prop_assert!(t.is_subset(&a.concretize(&a.abs_over(&t))));
        prop_assert!(a.abs_under(&t).is_subset(&a.abs_over(&t)));
        prop_assert_eq!(a.is_precise(&t), a.abs_under(&t) == a.abs_over(&t));
    }

    #[test]
    fn approximate_predecessors_bracket_reachability(seed in any::<u64>()) {
        let sym = model(seed, false);
        let mut r = rng(seed ^ 8);
        for f in sym.lib.function_ids() {
            let fs = sym.function(f);
            for _ in 0..3 {
                let a = random_abstraction(&mut r, &fs.space, 6);
                let x = random_regions(&mut r, &a);
                let exact = pre_star(&fs.trans, &a.concretize(&x));
                for blocks in [RulePartition::singletons(fs.trans.len()), partition_rules(fs, &a), RulePartition::merged(fs.trans.len())] {
                    let must = a.concretize(&pre_must_approx(fs, &a, &blocks, &x));
                    let may = a.concretize(&pre_may_approx(fs, &a, &blocks, &x));
                    prop_assert!(must.is_subset(&exact));
                    prop_assert!(exact.is_subset(&may));
                }
            }
        }
    }

    #[test]
    fn coarser_blocks_keep_must_edges(seed in any::<u64>()) {
        let sym = model(seed, false);
        let mut r = rng(seed ^ 9);
        for f in sym.lib.function_ids() {
            let fs = sym.function(f);
            let a = random_abstraction(&mut r, &fs.space, 6);
            let x = random_regions(&mut r, &a);
            let fine = pre_must_approx(fs, &a, &RulePartition::singletons(fs.trans.len()), &x);
            let grouped = pre_must_approx(fs, &a, &partition_rules(fs, &a), &x);
            prop_assert!(fine.is_subset(&grouped));
        }
    }

    #[test]
    fn explored_interfaces_are_safe(seed in any::<u64>()) {
        let sym = model(seed, true);
        let fs: Vec<FunctionId> = sym.lib.function_ids().collect();
        match explore(&sym, &fs, None, EngineOptions::default()) {
            Ok(run) => {
                let report = check_interface(&sym.lib, &run.graph, &fs, 3, DEFAULT_STATE_CAP).unwrap();
                prop_assert!(report.safe_violations.is_empty(), "{:?}", report.safe_violations);
                // rebuilding from the same abstraction gives the same graph
                prop_assert_eq!(build_interface(&sym, &run.abstraction, &fs).unwrap(), run.graph);
            }
            Err(EngineError::RefinementStuck { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
