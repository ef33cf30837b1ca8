use super::*;
use crate::bundled;

fn intstack() -> LibraryModule {
    parse_library(&bundled::intstack()).unwrap()
}

fn names(lib: &LibraryModule, vars: &[VarId]) -> Vec<String> {
    vars.iter().map(|v| lib.var(*v).qualified_name()).collect()
}

#[test]
fn intstack_parses() {
    let lib = intstack();
    assert_eq!(lib.functions.len(), 2);
    let pop = lib.function(lib.function_id("pop").unwrap());
    let first = &pop.rules[0];
    assert_eq!(lib.display_predicate(&first.guard).to_string(), "s = 0 & top = 0");
    assert_eq!(first.updates.len(), 1);
    assert_eq!(lib.var(first.updates[0].target).name, "err");
}

#[test]
fn empty_library_parses() {
    let lib = parse_library("module empty:\n  init: err = 0\n  error: err = 1\nendmodule\n").unwrap();
    assert!(lib.functions.is_empty());
    assert_eq!(lib.globals.len(), 1);
}

#[test]
fn fibonacci_parses() {
    let lib = parse_library(&bundled::fibonacci(7)).unwrap();
    let fib = lib.function_id("fib").unwrap();
    let scoped = names(&lib, &lib.scoped_vars(fib));
    for v in ["top", "v", "nextpc", "a0", "fib.n", "fib.res", "fib.tmp1", "fib.tmp2", "fib.s"] {
        assert!(scoped.contains(&v.to_string()), "{v} missing from {scoped:?}");
    }
    assert_eq!(lib.var(lib.function(fib).inputs[0]).hi, 7);
}

#[test]
fn scoped_vars_order() {
    let lib = intstack();
    let pop = lib.function_id("pop").unwrap();
    assert_eq!(names(&lib, &lib.scoped_vars(pop)), ["err", "top", "el0", "el1", "pop.s"]);
    let push = lib.function_id("push").unwrap();
    assert_eq!(names(&lib, &lib.scoped_vars(push)), ["err", "top", "el0", "el1", "push.sd", "push.s"]);
}

#[test]
fn round_trip_bundled() {
    for (name, src) in bundled::all() {
        let lib = parse_library(&src).unwrap();
        let again = parse_library(&lib.to_string()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(lib, again, "{name}");
    }
}

#[test]
fn syntax_errors_carry_position() {
    let err = parse_library("module m:\n  var x : [0..3\n  init: err = 0\n  error: err = 1\nendmodule\n").unwrap_err();
    match err {
        ModelError::Syntax { line, .. } => assert_eq!(line, 3),
        other => panic!("expected a syntax error, got {other}"),
    }
    assert!(matches!(parse_library(""), Err(ModelError::Syntax { .. })));
}

#[test]
fn semantic_errors() {
    let cases = [
        // undeclared variable
        "module m:\n  init: err = 0\n  error: err = 1\n  function f() {\n    s = 0 & y = 1 ==> s' = 1;\n  }\nendmodule\n",
        // another function's local
        "module m:\n  init: err = 0\n  error: err = 1\n  function f(a: [0..1]) {\n    s = 0 ==> s' = 1;\n  }\n  function g() {\n    s = 0 & a = 1 ==> s' = 1;\n  }\nendmodule\n",
        // duplicate global
        "module m:\n  var x : [0..1]\n  var x : [0..2]\n  init: err = 0\n  error: err = 1\nendmodule\n",
        // empty domain
        "module m:\n  var x : [3..1]\n  init: err = 0\n  error: err = 1\nendmodule\n",
        // initial set meets the error set
        "module m:\n  init: true\n  error: err = 1\nendmodule\n",
        // unsatisfiable initial set
        "module m:\n  init: err = 0 & err = 1\n  error: err = 1\nendmodule\n",
    ];
    for src in cases {
        assert!(matches!(parse_library(src), Err(ModelError::Semantic(_))), "accepted:\n{src}");
    }
}

#[test]
fn rule_fires_only_inside_domains() {
    let lib = intstack();
    let push = lib.function(lib.function_id("push").unwrap());
    let scoped = lib.scoped_vars(lib.function_id("push").unwrap());
    let state = [0i64, 1, 2, 0, 3, 0]; // err top el0 el1 sd s
    let env = |v: VarId| state[scoped.iter().position(|x| *x == v).unwrap()];
    let fired: Vec<_> = push.rules.iter().filter_map(|r| r.fire(&lib, &env)).collect();
    assert_eq!(fired.len(), 1);
    let mut got: Vec<(String, i64)> = fired[0].iter().map(|(v, x)| (lib.var(*v).name.clone(), *x)).collect();
    got.sort();
    assert_eq!(got, [("el1".to_string(), 3), ("s".to_string(), 1), ("top".to_string(), 2)]);
}

#[test]
fn rules_reference_scoped_vars_only() {
    for (name, src) in bundled::all() {
        let lib = parse_library(&src).unwrap();
        for f in lib.function_ids() {
            let scoped = lib.scoped_vars(f);
            for r in &lib.function(f).rules {
                let mut used = r.guard.vars();
                for u in &r.updates {
                    used.push(u.target);
                    used.extend(u.value.vars());
                }
                assert!(used.iter().all(|v| scoped.contains(v)), "{name}");
            }
        }
    }
}
