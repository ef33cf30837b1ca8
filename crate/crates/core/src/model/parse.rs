use super::*;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

// longest first
const SYMBOLS: &[&str] = &[
    "==>", "..", "!=", "<=", ">=", "=", "<", ">", "+", "-", "&", "|", "!", "(", ")", "[", "]", "{", "}", ":", ";", ",",
    "'",
];

fn lex(text: &str) -> Result<Vec<Spanned>, ModelError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    'outer: while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Spanned { tok: Tok::Ident(word), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            let digits: String = chars[start..i].iter().collect();
            let value = digits.parse::<i64>().map_err(|_| ModelError::Syntax {
                line: tl,
                col: tc,
                expected: "integer literal".into(),
                found: digits.clone(),
            })?;
            out.push(Spanned { tok: Tok::Int(value), line: tl, col: tc });
            continue;
        }
        for sym in SYMBOLS {
            let n = sym.len();
            if i + n <= chars.len() && chars[i..i + n].iter().copied().eq(sym.chars()) {
                advance(&mut i, &mut line, &mut col, n, &chars);
                out.push(Spanned { tok: Tok::Sym(sym), line: tl, col: tc });
                continue 'outer;
            }
        }
        return Err(ModelError::Syntax { line, col, expected: "token".into(), found: format!("`{c}`") });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Untyped expression; predicates and terms share one grammar and are
/// separated during name resolution.
#[derive(Debug, Clone)]
enum Expr {
    Int(i64),
    Bool(bool),
    Ident(String, usize, usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Cmp(Box<Expr>, CmpOp, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

#[derive(Debug)]
struct RawDecl {
    names: Vec<(String, usize, usize)>,
    lo: i64,
    hi: i64,
}

#[derive(Debug)]
struct RawRule {
    guard: Expr,
    updates: Vec<(String, usize, usize, Expr)>,
}

#[derive(Debug)]
struct RawFunction {
    name: String,
    line: usize,
    params: Vec<RawDecl>,
    locals: Vec<RawDecl>,
    rules: Vec<RawRule>,
}

#[derive(Debug)]
struct RawLibrary {
    name: String,
    decls: Vec<RawDecl>,
    init: Expr,
    error: Option<Expr>,
    funcs: Vec<RawFunction>,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ModelError> {
        let t = &self.toks[self.pos];
        Err(ModelError::Syntax { line: t.line, col: t.col, expected: expected.to_string(), found: t.tok.to_string() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ModelError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ModelError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ModelError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok((s, line, col))
            }
            _ => self.error("identifier"),
        }
    }

    fn int(&mut self) -> Result<i64, ModelError> {
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            _ => self.error("integer"),
        }
    }

    fn range(&mut self) -> Result<(i64, i64), ModelError> {
        if self.is_kw("bool") {
            self.bump();
            return Ok((0, 1));
        }
        self.expect_sym("[")?;
        let lo = self.int()?;
        self.expect_sym("..")?;
        let hi = self.int()?;
        self.expect_sym("]")?;
        Ok((lo, hi))
    }

    fn decl(&mut self) -> Result<RawDecl, ModelError> {
        self.expect_kw("var")?;
        let mut names = vec![self.ident()?];
        while self.is_sym(",") {
            self.bump();
            names.push(self.ident()?);
        }
        self.expect_sym(":")?;
        let (lo, hi) = self.range()?;
        Ok(RawDecl { names, lo, hi })
    }

    fn library(&mut self) -> Result<RawLibrary, ModelError> {
        self.expect_kw("module")?;
        let (name, _, _) = self.ident()?;
        self.expect_sym(":")?;
        let mut decls = Vec::new();
        while self.is_kw("var") {
            decls.push(self.decl()?);
        }
        self.expect_kw("init")?;
        self.expect_sym(":")?;
        let init = self.expr()?;
        let error = if self.is_kw("error") {
            self.bump();
            self.expect_sym(":")?;
            Some(self.expr()?)
        } else {
            None
        };
        let mut funcs = Vec::new();
        while self.is_kw("function") {
            funcs.push(self.function()?);
        }
        self.expect_kw("endmodule")?;
        if *self.peek() != Tok::Eof {
            return self.error("end of input");
        }
        Ok(RawLibrary { name, decls, init, error, funcs })
    }

    fn function(&mut self) -> Result<RawFunction, ModelError> {
        let (line, _) = self.here();
        self.expect_kw("function")?;
        let (name, _, _) = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let id = self.ident()?;
                self.expect_sym(":")?;
                let (lo, hi) = self.range()?;
                params.push(RawDecl { names: vec![id], lo, hi });
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("{")?;
        let mut locals = Vec::new();
        while self.is_kw("local") {
            self.bump();
            locals.push(self.decl()?);
        }
        let mut rules = Vec::new();
        while !self.is_sym("}") {
            rules.push(self.rule()?);
        }
        if rules.is_empty() {
            return self.error("guarded-update rule");
        }
        self.expect_sym("}")?;
        Ok(RawFunction { name, line, params, locals, rules })
    }

    fn rule(&mut self) -> Result<RawRule, ModelError> {
        let guard = self.expr()?;
        self.expect_sym("==>")?;
        let mut updates = vec![self.update()?];
        while self.is_sym("&") {
            self.bump();
            updates.push(self.update()?);
        }
        self.expect_sym(";")?;
        Ok(RawRule { guard, updates })
    }

    fn update(&mut self) -> Result<(String, usize, usize, Expr), ModelError> {
        let (name, line, col) = self.ident()?;
        self.expect_sym("'")?;
        self.expect_sym("=")?;
        let value = self.sum()?;
        Ok((name, line, col, value))
    }

    fn expr(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.conj()?;
        while self.is_sym("|") {
            self.bump();
            let rhs = self.conj()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.negation()?;
        while self.is_sym("&") {
            self.bump();
            let rhs = self.negation()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Expr, ModelError> {
        if self.is_sym("!") {
            self.bump();
            let inner = self.negation()?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ModelError> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.sum()?;
        Ok(Expr::Cmp(Box::new(lhs), op, Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.primary()?;
        loop {
            if self.is_sym("+") {
                self.bump();
                let rhs = self.primary()?;
                lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.is_sym("-") {
                self.bump();
                let rhs = self.primary()?;
                lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, ModelError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::Bool(s == "true"))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                // an identifier followed by `'` starts the next update, not a term
                if matches!(self.peek_at(1), Tok::Sym("'")) {
                    return self.error("term");
                }
                self.bump();
                Ok(Expr::Ident(s, line, col))
            }
            Tok::Sym("(") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            _ => self.error("term or predicate"),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "module" | "var" | "bool" | "init" | "error" | "function" | "local" | "endmodule" | "true" | "false")
}

fn semantic<T>(msg: impl Into<String>) -> Result<T, ModelError> {
    Err(ModelError::Semantic(msg.into()))
}

/// Name-resolution environment for one scope.
struct Names<'a> {
    globals: &'a BTreeMap<String, VarId>,
    locals: Option<&'a BTreeMap<String, VarId>>,
    function: Option<&'a str>,
    /// qualified names of other functions' variables, for diagnostics
    foreign: &'a BTreeMap<String, Vec<String>>,
}

impl Names<'_> {
    fn lookup(&self, name: &str, line: usize, col: usize) -> Result<VarId, ModelError> {
        if let Some(v) = self.locals.and_then(|l| l.get(name)) {
            return Ok(*v);
        }
        if let Some(v) = self.globals.get(name) {
            return Ok(*v);
        }
        let scope = self
            .function
            .map(|f| format!(" in function `{f}`"))
            .unwrap_or_else(|| " (only globals are visible here)".into());
        match self.foreign.get(name) {
            Some(owners) => semantic(format!(
                "variable `{name}` at {line}:{col} is out of scope{scope}; it belongs to {}",
                owners.join(", ")
            )),
            None => semantic(format!("undeclared variable `{name}` at {line}:{col}{scope}")),
        }
    }

    fn term(&self, e: &Expr) -> Result<Term, ModelError> {
        Ok(match e {
            Expr::Int(v) => Term::Const(*v),
            Expr::Ident(n, l, c) => Term::Var(self.lookup(n, *l, *c)?),
            Expr::Add(a, b) => Term::Add(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            Expr::Sub(a, b) => Term::Sub(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            _ => return semantic("expected an integer term, found a predicate"),
        })
    }

    fn predicate(&self, e: &Expr) -> Result<Predicate, ModelError> {
        Ok(match e {
            Expr::Bool(b) => Predicate::Bool(*b),
            // boolean sugar: `b` is `b = 1`, `!b` is `b = 0`
            Expr::Ident(n, l, c) => Predicate::eq_const(self.lookup(n, *l, *c)?, 1),
            Expr::Not(inner) => match inner.as_ref() {
                Expr::Ident(n, l, c) => Predicate::eq_const(self.lookup(n, *l, *c)?, 0),
                other => Predicate::Not(Box::new(self.predicate(other)?)),
            },
            Expr::Cmp(a, op, b) => Predicate::Cmp(self.term(a)?, *op, self.term(b)?),
            Expr::And(a, b) => Predicate::And(Box::new(self.predicate(a)?), Box::new(self.predicate(b)?)),
            Expr::Or(a, b) => Predicate::Or(Box::new(self.predicate(a)?), Box::new(self.predicate(b)?)),
            Expr::Int(_) | Expr::Add(..) | Expr::Sub(..) => {
                return semantic("expected a predicate, found an integer term")
            }
        })
    }
}

/// Largest literal the location counter is compared with or assigned.
fn max_location(rules: &[RawRule]) -> i64 {
    fn scan(e: &Expr, best: &mut i64) {
        match e {
            Expr::Cmp(a, _, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Ident(n, ..), Expr::Int(v)) | (Expr::Int(v), Expr::Ident(n, ..)) if n == "s" => {
                    *best = (*best).max(*v)
                }
                _ => {}
            },
            Expr::And(a, b) | Expr::Or(a, b) => {
                scan(a, best);
                scan(b, best);
            }
            Expr::Not(a) => scan(a, best),
            _ => {}
        }
    }
    let mut best = 0;
    for r in rules {
        scan(&r.guard, &mut best);
        for (name, _, _, value) in &r.updates {
            if let (true, Expr::Int(v)) = (name == "s", value) {
                best = best.max(*v);
            }
        }
    }
    best
}

fn check_range(name: &str, lo: i64, hi: i64) -> Result<(), ModelError> {
    if lo < 0 || hi < lo {
        return semantic(format!("variable `{name}` has invalid domain [{lo}..{hi}]"));
    }
    if hi - lo >= u32::MAX as i64 {
        return semantic(format!("variable `{name}` has a domain too large to encode"));
    }
    Ok(())
}

/// Parses a library from its guarded-update source text and checks every
/// well-formedness condition, including satisfiability of the initial set
/// and its disjointness from the error set.
pub fn parse_library(text: &str) -> Result<LibraryModule, ModelError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let RawLibrary { name, decls, init, error, funcs } = p.library()?;

    let mut vars = vec![VarDecl { name: "err".into(), lo: 0, hi: 1, scope: Scope::Global }];
    let mut global_names = BTreeMap::new();
    global_names.insert("err".to_string(), VarId(0));
    for d in &decls {
        check_range(&d.names[0].0, d.lo, d.hi)?;
        for (n, line, col) in &d.names {
            if global_names.contains_key(n) {
                return semantic(format!("duplicate global `{n}` at {line}:{col}"));
            }
            global_names.insert(n.clone(), VarId(vars.len()));
            vars.push(VarDecl { name: n.clone(), lo: d.lo, hi: d.hi, scope: Scope::Global });
        }
    }
    let globals: Vec<VarId> = (0..vars.len()).map(VarId).collect();

    let mut foreign: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for f in &funcs {
        for d in f.params.iter().chain(f.locals.iter()) {
            for (n, _, _) in &d.names {
                foreign.entry(n.clone()).or_default().push(format!("`{}`", f.name));
            }
        }
    }

    let mut functions: Vec<FunctionModel> = Vec::new();
    let mut scopes = Vec::new();
    for f in &funcs {
        if functions.iter().any(|g| g.name == f.name) {
            return semantic(format!("duplicate function `{}` at line {}", f.name, f.line));
        }
        let mut local_names = BTreeMap::new();
        let mut declare = |vars: &mut Vec<VarDecl>, n: &str, lo: i64, hi: i64, scope: Scope| {
            if n == "s" || n == "err" {
                return semantic(format!("`{n}` is reserved (function `{}`)", f.name));
            }
            if global_names.contains_key(n) || local_names.contains_key(n) {
                return semantic(format!("`{n}` in function `{}` clashes with an existing name", f.name));
            }
            check_range(n, lo, hi)?;
            local_names.insert(n.to_string(), VarId(vars.len()));
            vars.push(VarDecl { name: n.to_string(), lo, hi, scope });
            Ok(VarId(vars.len() - 1))
        };
        let mut inputs = Vec::new();
        for d in &f.params {
            for (n, _, _) in &d.names {
                inputs.push(declare(&mut vars, n, d.lo, d.hi, Scope::Input(f.name.clone()))?);
            }
        }
        let mut locals = Vec::new();
        for d in &f.locals {
            for (n, _, _) in &d.names {
                locals.push(declare(&mut vars, n, d.lo, d.hi, Scope::Local(f.name.clone()))?);
            }
        }
        let location = VarId(vars.len());
        vars.push(VarDecl { name: "s".into(), lo: 0, hi: max_location(&f.rules), scope: Scope::Local(f.name.clone()) });
        local_names.insert("s".into(), location);
        locals.push(location);
        scopes.push(local_names);
        functions.push(FunctionModel { name: f.name.clone(), inputs, locals, location, rules: Vec::new() });
    }

    for (idx, f) in funcs.iter().enumerate() {
        let names =
            Names { globals: &global_names, locals: Some(&scopes[idx]), function: Some(&f.name), foreign: &foreign };
        let mut rules = Vec::with_capacity(f.rules.len());
        for raw in &f.rules {
            let guard = names.predicate(&raw.guard)?;
            let mut updates: Vec<Update> = Vec::new();
            for (target, line, col, value) in &raw.updates {
                let target_id = names.lookup(target, *line, *col)?;
                if updates.iter().any(|u| u.target == target_id) {
                    return semantic(format!("variable `{target}` updated twice in one rule at {line}:{col}"));
                }
                let value = names.term(value)?;
                if target_id == VarId(0) && value != Term::Const(1) {
                    return semantic(format!(
                        "rule at {line}:{col} in `{}` assigns err' something other than 1; the error set must be a sink",
                        f.name
                    ));
                }
                updates.push(Update { target: target_id, value });
            }
            rules.push(GuardedRule { guard, updates });
        }
        functions[idx].rules = rules;
    }

    let global_scope = Names { globals: &global_names, locals: None, function: None, foreign: &foreign };
    let init = global_scope.predicate(&init)?;
    let error = match error {
        Some(e) => global_scope.predicate(&e)?,
        None => Predicate::eq_const(VarId(0), 1),
    };

    let lib = LibraryModule { name, vars, globals, functions, init, error };
    check_initial_set(&lib)?;
    Ok(lib)
}

fn check_initial_set(lib: &LibraryModule) -> Result<(), ModelError> {
    let ctx = crate::symstate::SymContext::new(lib);
    let space = ctx.global_space(lib);
    let init = space.from_predicate(&lib.init);
    if init.is_empty() {
        return semantic("the initial predicate is unsatisfiable");
    }
    let error = space.from_predicate(&lib.error);
    if !init.intersect(&error).is_empty() {
        return semantic("the initial set intersects the error set");
    }
    Ok(())
}
