//! Shared fixtures: small hand-written libraries and a seeded generator of
//! random ones.

#![allow(dead_code)]

use ifsynth::abstraction::{Abstraction, RegionSet};
use ifsynth::engine::SymbolicLibrary;
use ifsynth::model::parse_library;
use ifsynth::symstate::{StateSpace, ValuationSet};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write;
use std::sync::Arc;

/// Two rules that both clear `indata`, one of which also clears `hd`.
/// The error set is empty.
pub const HD: &str = "\
module hd:
  var hd : bool
  var indata : [0..1]
  init: err = 0
  error: false
  function step() {
    hd = 1 ==> indata' = 0 & hd' = 0;
    hd = 0 ==> indata' = 0;
  }
endmodule
";

pub fn load(src: &str) -> SymbolicLibrary {
    SymbolicLibrary::new(parse_library(src).unwrap_or_else(|e| panic!("{e}\n{src}")))
}

pub fn models_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Source of a random library with at most four variables in any function
/// scope (counting `err`), domains of at most four values and at most six
/// rules per function.
///
/// When `terminating` is set every rule is guarded by `s = 0` and moves to
/// `s = 1`, so each call performs at most one step.
pub fn random_library(rng: &mut impl Rng, terminating: bool) -> String {
    let globals = rng.gen_range(1..=2);
    let mut vars: Vec<(String, i64)> = vec![("err".into(), 1)];
    let mut out = String::new();
    writeln!(out, "module rnd:").unwrap();
    for g in 0..globals {
        let hi = rng.gen_range(1..=3);
        writeln!(out, "  var g{g} : [0..{hi}]").unwrap();
        vars.push((format!("g{g}"), hi));
    }
    writeln!(out, "  init: err = 0 & g0 = 0").unwrap();
    writeln!(out, "  error: err = 1").unwrap();
    let functions = rng.gen_range(1..=2);
    for f in 0..functions {
        let mut scope = vars.clone();
        // the location counter is one more variable when it takes two values
        let room = 4 - scope.len() - usize::from(terminating);
        let params = if room > 0 { rng.gen_range(0..=room.min(1)) } else { 0 };
        let mut header = Vec::new();
        for p in 0..params {
            let hi = rng.gen_range(1..=3);
            header.push(format!("p{p}: [0..{hi}]"));
            scope.push((format!("p{p}"), hi));
        }
        writeln!(out, "  function f{f}({}) {{", header.join(", ")).unwrap();
        let rules = rng.gen_range(1..=6);
        for _ in 0..rules {
            let mut guard = Vec::new();
            if terminating {
                guard.push("s = 0".to_string());
            }
            for _ in 0..rng.gen_range(0..=2) {
                let (name, hi) = scope.choose(rng).unwrap();
                let op = ["=", "!=", "<", ">=", "<="].choose(rng).unwrap();
                guard.push(format!("{name} {op} {}", rng.gen_range(0..=*hi)));
            }
            if guard.is_empty() {
                guard.push("true".into());
            }
            let mut updates = Vec::new();
            let mut targets: Vec<&(String, i64)> = scope.iter().filter(|(n, _)| !n.starts_with('p')).collect();
            targets.shuffle(rng);
            for (name, hi) in targets.into_iter().take(rng.gen_range(1..=2)) {
                let value = match rng.gen_range(0..4) {
                    _ if name == "err" => "1".into(),
                    0 => format!("{}", rng.gen_range(0..=*hi)),
                    1 => format!("{name} + 1"),
                    2 => format!("{name} - 1"),
                    _ => scope.choose(rng).unwrap().0.clone(),
                };
                updates.push(format!("{name}' = {value}"));
            }
            if terminating {
                updates.push("s' = 1".into());
            }
            writeln!(out, "    {} ==> {};", guard.join(" & "), updates.join(" & ")).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    writeln!(out, "endmodule").unwrap();
    out
}

/// A random partition of `space` into at most `max_parts` regions.
pub fn random_abstraction(rng: &mut impl Rng, space: &Arc<StateSpace>, max_parts: usize) -> Abstraction {
    let k = rng.gen_range(1..=max_parts);
    let mut parts = vec![space.empty(); k];
    for v in space.full().valuations() {
        let i = rng.gen_range(0..k);
        parts[i] = parts[i].union(&space.singleton(&v));
    }
    Abstraction::from_parts(space, parts)
}

pub fn random_regions(rng: &mut impl Rng, a: &Abstraction) -> RegionSet {
    a.ids().into_iter().filter(|_| rng.gen_bool(0.4)).collect()
}

pub fn random_set(rng: &mut impl Rng, space: &Arc<StateSpace>) -> ValuationSet {
    let p = rng.gen_range(0.0..1.0);
    space
        .full()
        .valuations()
        .iter()
        .filter(|_| rng.gen_bool(p))
        .fold(space.empty(), |acc, v| acc.union(&space.singleton(v)))
}
