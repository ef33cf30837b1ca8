use super::*;

pub(super) struct TermDisplay<'a> {
    pub lib: &'a LibraryModule,
    pub term: &'a Term,
    pub qualified: bool,
}

impl TermDisplay<'_> {
    fn name(&self, v: VarId) -> String {
        let d = self.lib.var(v);
        if self.qualified {
            d.qualified_name()
        } else {
            d.name.clone()
        }
    }

    fn write(&self, t: &Term, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        match t {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{}", self.name(*v)),
            Term::Add(a, b) | Term::Sub(a, b) => {
                let op = if matches!(t, Term::Add(..)) { "+" } else { "-" };
                if nested {
                    write!(f, "(")?;
                }
                self.write(a, f, false)?;
                write!(f, " {op} ")?;
                self.write(b, f, true)?;
                if nested {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.term, f, false)
    }
}

pub(super) struct PredDisplay<'a> {
    pub lib: &'a LibraryModule,
    pub pred: &'a Predicate,
    pub qualified: bool,
}

impl PredDisplay<'_> {
    fn write(&self, p: &Predicate, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |t| TermDisplay { lib: self.lib, term: t, qualified: self.qualified };
        match p {
            Predicate::Bool(b) => write!(f, "{b}"),
            Predicate::Cmp(a, op, b) => write!(f, "{} {} {}", term(a), op.symbol(), term(b)),
            Predicate::And(a, b) => {
                self.write_operand(a, f, true)?;
                write!(f, " & ")?;
                self.write_operand(b, f, false)
            }
            Predicate::Or(a, b) => {
                self.write_operand(a, f, true)?;
                write!(f, " | ")?;
                self.write_operand(b, f, false)
            }
            Predicate::Not(a) => {
                write!(f, "!(")?;
                self.write(a, f)?;
                write!(f, ")")
            }
        }
    }

    // left operands of the same connective print bare; everything else
    // compound is parenthesised so reparsing preserves the tree shape
    fn write_operand(&self, p: &Predicate, f: &mut fmt::Formatter<'_>, left: bool) -> fmt::Result {
        let same = match (self.pred_kind(p), left) {
            (Some(k), true) => Some(k) == self.parent_kind(),
            _ => false,
        };
        let bare = matches!(p, Predicate::Bool(_) | Predicate::Cmp(..) | Predicate::Not(_)) || same;
        if bare {
            PredDisplay { lib: self.lib, pred: p, qualified: self.qualified }.write(p, f)
        } else {
            write!(f, "(")?;
            PredDisplay { lib: self.lib, pred: p, qualified: self.qualified }.write(p, f)?;
            write!(f, ")")
        }
    }

    fn pred_kind(&self, p: &Predicate) -> Option<u8> {
        match p {
            Predicate::And(..) => Some(0),
            Predicate::Or(..) => Some(1),
            _ => None,
        }
    }

    fn parent_kind(&self) -> Option<u8> {
        self.pred_kind(self.pred)
    }
}

impl fmt::Display for PredDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.pred, f)
    }
}

fn range(d: &VarDecl) -> String {
    format!("[{}..{}]", d.lo, d.hi)
}

pub(super) fn write_library(lib: &LibraryModule, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let pred = |p| PredDisplay { lib, pred: p, qualified: false };
    let term = |t| TermDisplay { lib, term: t, qualified: false };
    writeln!(f, "module {}:", lib.name)?;
    for &g in lib.globals.iter().skip(1) {
        let d = lib.var(g);
        writeln!(f, "  var {} : {}", d.name, range(d))?;
    }
    writeln!(f, "  init: {}", pred(&lib.init))?;
    writeln!(f, "  error: {}", pred(&lib.error))?;
    for func in &lib.functions {
        let params: Vec<String> =
            func.inputs.iter().map(|&v| format!("{}: {}", lib.var(v).name, range(lib.var(v)))).collect();
        writeln!(f, "  function {}({}) {{", func.name, params.join(", "))?;
        for &v in &func.locals {
            if v != func.location {
                let d = lib.var(v);
                writeln!(f, "    local var {} : {}", d.name, range(d))?;
            }
        }
        for rule in &func.rules {
            let updates: Vec<String> =
                rule.updates.iter().map(|u| format!("{}' = {}", lib.var(u.target).name, term(&u.value))).collect();
            writeln!(f, "    {} ==> {};", pred(&rule.guard), updates.join(" & "))?;
        }
        writeln!(f, "  }}")?;
    }
    writeln!(f, "endmodule")
}
