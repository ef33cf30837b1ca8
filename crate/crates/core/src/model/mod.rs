//! Libraries of functions written as guarded-update rules over
//! bounded-integer variables, and the text format they are read from.

mod parse;
mod print;

pub use parse::parse_library;

use serde::{Deserialize, Serialize};
use std::fmt;

/// Index of a variable in [`LibraryModule::vars`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// Index of a function in [`LibraryModule::functions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunctionId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scope {
    Global,
    Local(String),
    Input(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub scope: Scope,
}

impl VarDecl {
    pub fn domain_size(&self) -> u32 {
        (self.hi - self.lo + 1) as u32
    }

    pub fn in_domain(&self, value: i64) -> bool {
        self.lo <= value && value <= self.hi
    }

    /// `f.v` for function-owned variables, the bare name for globals.
    pub fn qualified_name(&self) -> String {
        match &self.scope {
            Scope::Global => self.name.clone(),
            Scope::Local(f) | Scope::Input(f) => format!("{f}.{}", self.name),
        }
    }

    pub fn is_global(&self) -> bool {
        matches!(self.scope, Scope::Global)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(i64),
    Var(VarId),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
}

impl Term {
    pub fn eval(&self, env: &dyn Fn(VarId) -> i64) -> i64 {
        match self {
            Term::Const(c) => *c,
            Term::Var(v) => env(*v),
            Term::Add(a, b) => a.eval(env) + b.eval(env),
            Term::Sub(a, b) => a.eval(env) - b.eval(env),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<VarId>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Term::Add(a, b) | Term::Sub(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    Bool(bool),
    Cmp(Term, CmpOp, Term),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn eval(&self, env: &dyn Fn(VarId) -> i64) -> bool {
        match self {
            Predicate::Bool(b) => *b,
            Predicate::Cmp(a, op, b) => op.holds(a.eval(env), b.eval(env)),
            Predicate::And(a, b) => a.eval(env) && b.eval(env),
            Predicate::Or(a, b) => a.eval(env) || b.eval(env),
            Predicate::Not(a) => !a.eval(env),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<VarId>) {
        match self {
            Predicate::Bool(_) => {}
            Predicate::Cmp(a, _, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Predicate::Not(a) => a.collect_vars(out),
        }
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out
    }

    pub fn and(self, other: Predicate) -> Predicate {
        Predicate::And(Box::new(self), Box::new(other))
    }

    pub fn eq_const(var: VarId, value: i64) -> Predicate {
        Predicate::Cmp(Term::Var(var), CmpOp::Eq, Term::Const(value))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Update {
    pub target: VarId,
    pub value: Term,
}

/// One conditional transition: when `guard` holds, every target is
/// assigned its term (evaluated in the source state) and all other
/// variables keep their value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedRule {
    pub guard: Predicate,
    pub updates: Vec<Update>,
}

impl GuardedRule {
    /// Applies the rule to a concrete state. Returns `None` if the guard is
    /// false or an update leaves its target's domain.
    pub fn fire(&self, lib: &LibraryModule, env: &dyn Fn(VarId) -> i64) -> Option<Vec<(VarId, i64)>> {
        if !self.guard.eval(env) {
            return None;
        }
        let mut out = Vec::with_capacity(self.updates.len());
        for u in &self.updates {
            let value = u.value.eval(env);
            if !lib.var(u.target).in_domain(value) {
                return None;
            }
            out.push((u.target, value));
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionModel {
    pub name: String,
    pub inputs: Vec<VarId>,
    /// Declared locals followed by the location counter.
    pub locals: Vec<VarId>,
    pub location: VarId,
    pub rules: Vec<GuardedRule>,
}

impl FunctionModel {
    /// Predicate describing the entry states: location and non-input
    /// locals at zero, inputs unconstrained.
    pub fn entry_predicate(&self, lib: &LibraryModule) -> Predicate {
        self.locals
            .iter()
            .map(|&v| Predicate::eq_const(v, lib.var(v).lo.max(0)))
            .reduce(Predicate::and)
            .unwrap_or(Predicate::Bool(true))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LibraryModule {
    pub name: String,
    /// All variables: globals first, then each function's inputs and locals.
    pub vars: Vec<VarDecl>,
    pub globals: Vec<VarId>,
    pub functions: Vec<FunctionModel>,
    pub init: Predicate,
    pub error: Predicate,
}

impl LibraryModule {
    pub fn var(&self, id: VarId) -> &VarDecl {
        &self.vars[id.0]
    }

    /// The reserved `err` variable, always the first global.
    pub fn err_var(&self) -> VarId {
        self.globals[0]
    }

    pub fn function(&self, id: FunctionId) -> &FunctionModel {
        &self.functions[id.0]
    }

    pub fn function_id(&self, name: &str) -> Option<FunctionId> {
        self.functions.iter().position(|f| f.name == name).map(FunctionId)
    }

    pub fn function_ids(&self) -> impl Iterator<Item = FunctionId> {
        (0..self.functions.len()).map(FunctionId)
    }

    /// Variables visible inside `f`: globals, then inputs, then locals.
    pub fn scoped_vars(&self, f: FunctionId) -> Vec<VarId> {
        let func = self.function(f);
        self.globals.iter().chain(func.inputs.iter()).chain(func.locals.iter()).copied().collect()
    }

    pub fn scoped_var_decls(&self, f: FunctionId) -> Vec<&VarDecl> {
        self.scoped_vars(f).into_iter().map(|v| self.var(v)).collect()
    }

    pub fn var_by_qualified_name(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.qualified_name() == name).map(VarId)
    }

    pub fn display_term<'a>(&'a self, t: &'a Term) -> impl fmt::Display + 'a {
        print::TermDisplay { lib: self, term: t, qualified: false }
    }

    pub fn display_predicate<'a>(&'a self, p: &'a Predicate) -> impl fmt::Display + 'a {
        print::PredDisplay { lib: self, pred: p, qualified: false }
    }
}

impl fmt::Display for LibraryModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_library(self, f)
    }
}

/// Errors raised while reading a library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("syntax error at {line}:{col}: expected {expected}, found {found}")]
    Syntax { line: usize, col: usize, expected: String, found: String },
    #[error("semantic error: {0}")]
    Semantic(String),
}

#[cfg(test)]
mod tests;
