//! Generators for the example libraries shipped under `models/`.

use std::fmt::Write;

/// Bounded integer stack of capacity 2 holding values in `[0..3]`.
pub fn intstack() -> String {
    "\
// Integer stack of capacity 2. push on a full stack and pop on an empty
// stack both set err.
module intstack:
  var top : [0..2]
  var el0, el1 : [0..3]
  init: err = 0 & top = 0
  error: err = 1
  function push(sd: [0..3]) {
    s = 0 & top = 2 ==> err' = 1;
    s = 0 & top = 0 ==> el0' = sd & top' = top + 1 & s' = 1;
    s = 0 & top = 1 ==> el1' = sd & top' = top + 1 & s' = 1;
  }
  function pop() {
    s = 0 & top = 0 ==> err' = 1;
    s = 0 & top > 0 ==> top' = top - 1 & s' = 1;
  }
endmodule
"
    .to_string()
}

/// Cursor over a stream made of a `2^h`-cell header and a `2^d`-cell data
/// section. Writing while the cursor is in the header is an error.
pub fn datastream(h: u32, d: u32) -> String {
    assert!(h <= d && d <= 16, "header must not be longer than the data section");
    let header = 1i64 << h;
    let data = 1i64 << d;
    let mut out = String::new();
    writeln!(out, "// Data stream with a {header}-cell header and {data} data cells.").unwrap();
    writeln!(out, "module datastream_h{h}_d{d}:").unwrap();
    writeln!(out, "  var ptr : [0..{}]", data - 1).unwrap();
    writeln!(out, "  var isHeader : bool").unwrap();
    writeln!(out, "  init: err = 0 & isHeader = 0").unwrap();
    writeln!(out, "  error: err = 1").unwrap();
    out.push_str("  function FirstHeader() {\n    s = 0 ==> ptr' = 0 & isHeader' = 1 & s' = 1;\n  }\n");
    out.push_str("  function FirstData() {\n    s = 0 ==> ptr' = 0 & isHeader' = 0 & s' = 1;\n  }\n");
    out.push_str("  function Next() {\n");
    for (flag, len) in [(1, header), (0, data)] {
        writeln!(out, "    s = 0 & isHeader = {flag} & ptr < {} ==> ptr' = ptr + 1 & s' = 1;", len - 1).unwrap();
        writeln!(out, "    s = 0 & isHeader = {flag} & ptr >= {} ==> ptr' = 0 & s' = 1;", len - 1).unwrap();
    }
    out.push_str("  }\n");
    out.push_str(
        "  function Write() {\n    s = 0 & isHeader = 1 ==> err' = 1;\n    s = 0 & isHeader = 0 ==> s' = 1;\n  }\n",
    );
    out.push_str("endmodule\n");
    out
}

/// Array of `2^k` bits with a cursor; `modify` needs a fresh `next`/`prev`
/// since the last `access` or `modify`.
pub fn bitarray(k: u32) -> String {
    assert!(k <= 16);
    let last = (1i64 << k) - 1;
    let mut out = String::new();
    writeln!(out, "// Bit array of {} cells.", last + 1).unwrap();
    writeln!(out, "module bitarray_k{k}:").unwrap();
    writeln!(out, "  var ptr : [0..{last}]").unwrap();
    writeln!(out, "  var valid : bool").unwrap();
    writeln!(out, "  init: err = 0 & valid = 0").unwrap();
    writeln!(out, "  error: err = 1").unwrap();
    writeln!(out, "  function next() {{").unwrap();
    writeln!(out, "    s = 0 & ptr < {last} ==> ptr' = ptr + 1 & valid' = 1 & s' = 1;").unwrap();
    writeln!(out, "    s = 0 & ptr = {last} ==> ptr' = 0 & valid' = 1 & s' = 1;").unwrap();
    writeln!(out, "  }}").unwrap();
    writeln!(out, "  function prev() {{").unwrap();
    writeln!(out, "    s = 0 & ptr > 0 ==> ptr' = ptr - 1 & valid' = 1 & s' = 1;").unwrap();
    writeln!(out, "    s = 0 & ptr = 0 ==> ptr' = {last} & valid' = 1 & s' = 1;").unwrap();
    writeln!(out, "  }}").unwrap();
    out.push_str("  function access() {\n    s = 0 ==> valid' = 0 & s' = 1;\n  }\n");
    out.push_str("  function modify() {\n    s = 0 & valid = 0 ==> err' = 1;\n    s = 0 & valid = 1 ==> valid' = 0 & s' = 1;\n  }\n");
    out.push_str("endmodule\n");
    out
}

/// Stack capacity needed by `fib` for arguments up to `max_n`: every call
/// with `n >= 3` pushes a three-cell frame.
pub fn fibonacci_capacity(max_n: i64) -> i64 {
    3 * (max_n - 2).max(1)
}

/// Recursive Fibonacci over an explicit activation stack.
///
/// Frames hold the return location, the caller's `n` and the caller's
/// `tmp1`. The push sequence runs at location 15 and the pop sequence at
/// location 17; both continue at `nextpc`. The outermost call records the
/// stack height in `base` and returns once the stack is back there, so
/// frames pushed by an earlier client are never popped. Recursive calls
/// enter at location 1. A frame push on a full stack has no enabled rule
/// and the call stops there.
pub fn fibonacci(max_n: i64) -> String {
    assert!(max_n >= 3);
    let cap = fibonacci_capacity(max_n);
    let mut out = String::new();
    writeln!(out, "// Fibonacci with an explicit activation stack; fib(n) for n <= {max_n}.").unwrap();
    writeln!(out, "module fibonacci:").unwrap();
    writeln!(out, "  var top : [0..{cap}]").unwrap();
    writeln!(out, "  var v : [0..31]").unwrap();
    writeln!(out, "  var nextpc : [0..31]").unwrap();
    let cells: Vec<String> = (0..cap).map(|k| format!("a{k}")).collect();
    writeln!(out, "  var {} : [0..31]", cells.join(", ")).unwrap();
    writeln!(out, "  init: err = 0 & top = 0").unwrap();
    writeln!(out, "  error: err = 1").unwrap();

    writeln!(out, "  function push() {{").unwrap();
    writeln!(out, "    s = 0 & top = {cap} ==> err' = 1;").unwrap();
    for k in 0..cap {
        writeln!(out, "    s = 0 & top = {k} ==> a{k}' = v & top' = {} & s' = 1;", k + 1).unwrap();
    }
    writeln!(out, "  }}").unwrap();
    writeln!(out, "  function pop() {{").unwrap();
    writeln!(out, "    s = 0 & top = 0 ==> err' = 1;").unwrap();
    for k in 1..=cap {
        writeln!(out, "    s = 0 & top = {k} ==> v' = a{} & top' = {} & s' = 1;", k - 1, k - 1).unwrap();
    }
    writeln!(out, "  }}").unwrap();

    writeln!(out, "  function fib(n: [0..{max_n}]) {{").unwrap();
    writeln!(out, "    local var res, tmp1, tmp2 : [0..31]").unwrap();
    writeln!(out, "    local var base : [0..{cap}]").unwrap();
    for rule in [
        "s = 0 ==> base' = top & s' = 1",
        "s = 1 & n < 3 ==> res' = 1 & s' = 11",
        "s = 1 & n >= 3 ==> s' = 2",
        // first recursive call: save 5, n, tmp1
        "s = 2 ==> nextpc' = 3 & s' = 15 & v' = 5",
        "s = 3 ==> nextpc' = 20 & s' = 15 & v' = n",
        "s = 20 ==> nextpc' = 4 & s' = 15 & v' = tmp1",
        "s = 4 ==> n' = n - 1 & s' = 1",
        "s = 5 ==> s' = 6 & tmp1' = res",
        // second recursive call: save 9, n, tmp1
        "s = 6 ==> nextpc' = 7 & s' = 15 & v' = 9",
        "s = 7 ==> nextpc' = 21 & s' = 15 & v' = n",
        "s = 21 ==> nextpc' = 8 & s' = 15 & v' = tmp1",
        "s = 8 ==> n' = n - 2 & s' = 1",
        "s = 9 ==> s' = 10 & tmp2' = res",
        "s = 10 ==> s' = 11 & res' = tmp1 + tmp2",
        // return: done at the caller's height, otherwise restore tmp1 and
        // n and jump to the saved location
        "s = 11 & top = base ==> s' = 13",
        "s = 11 & top > base ==> nextpc' = 22 & s' = 17",
        "s = 22 ==> tmp1' = v & nextpc' = 12 & s' = 17",
        "s = 12 ==> n' = v & nextpc' = 14 & s' = 17",
        "s = 14 & (v = 5 | v = 9) ==> s' = v",
    ] {
        writeln!(out, "    {rule};").unwrap();
    }
    for k in 0..cap {
        writeln!(out, "    s = 15 & top = {k} ==> a{k}' = v & top' = {} & s' = nextpc;", k + 1).unwrap();
    }
    for k in 1..=cap {
        writeln!(out, "    s = 17 & top = {k} ==> v' = a{} & top' = {} & s' = nextpc;", k - 1, k - 1).unwrap();
    }
    writeln!(out, "  }}").unwrap();
    out.push_str("endmodule\n");
    out
}

/// Every shipped model as (file name, source).
pub fn all() -> Vec<(String, String)> {
    vec![
        ("intstack.gu".into(), intstack()),
        ("datastream_h2_d4.gu".into(), datastream(2, 4)),
        ("datastream_h2_d6.gu".into(), datastream(2, 6)),
        ("datastream_h3_d6.gu".into(), datastream(3, 6)),
        ("bitarray_k4.gu".into(), bitarray(4)),
        ("bitarray_k6.gu".into(), bitarray(6)),
        ("fibonacci.gu".into(), fibonacci(7)),
    ]
}
