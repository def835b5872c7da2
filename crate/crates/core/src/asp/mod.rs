//! Stratified logic programs: model, printer, parser, evaluator, proofs.
//!
//! Programs use the usual ASP surface syntax restricted to normal rules:
//!
//! ```text
//! % scale_exponent: 1
//! label(X, absent) :- thal(X, 3), maximum_heart_rate_achieved(X, V_1), V_1 > 710, not ab2(X, true).
//! ab2(X, true) :- chest_pain(X, 4), major_vessels(X, V_1), V_1 != 0, not ab1(X, true).
//! ```
//!
//! Numeric attribute values and thresholds are fixed-point integers scaled
//! by `10^scale_exponent`.

mod eval;
mod parse;
mod proof;
mod translate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use eval::{evaluate, Model};
pub use parse::{parse_facts, parse_program};
pub use proof::{prove, prove_in_model, Check, Condition, ProofStatus, ProofTree, RuleTrace};
pub use translate::{instance_to_facts, translate, Encoding, LABEL_PREDICATE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AspError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsafe rule `{rule}`: variable {variable} does not occur in a positive body atom")]
    Unsafe { rule: String, variable: String },
    #[error("program is not stratified: predicate `{0}` depends negatively on itself")]
    NotStratified(String),
    #[error("value {value} of `{attribute}` is not exact at {digits} decimal digit(s)")]
    Scale { attribute: String, value: String, digits: u32 },
    #[error("attribute `{0}` is missing; preprocess the instance first")]
    MissingValue(String),
    #[error("unknown goal predicate `{0}`")]
    UnknownGoal(String),
}

pub type Result<T> = std::result::Result<T, AspError>;

/// A ground term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Const {
    Int(i64),
    Sym(String),
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Int(n) => write!(f, "{n}"),
            Const::Sym(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(Const),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn sym(name: impl Into<String>) -> Term {
        Term::Const(Const::Sym(name.into()))
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Const::Int(n))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom { predicate: predicate.into(), args }
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    pub fn to_ground(&self) -> Option<GroundAtom> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom { predicate: self.predicate.clone(), args })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(ToString::to_string).collect();
            write!(f, "({})", args.join(", "))?;
        }
        Ok(())
    }
}

/// A variable-free atom, printed compactly (`age(patient1,45)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<Const>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<Const>) -> GroundAtom {
        GroundAtom { predicate: predicate.into(), args }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(ToString::to_string).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Le,
    Gt,
    Lt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
        }
    }

    /// Equality compares any constants; ordering only integers.
    pub fn apply(self, lhs: &Const, rhs: &Const) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            _ => match (lhs, rhs) {
                (Const::Int(a), Const::Int(b)) => match self {
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Lt => a < b,
                    CmpOp::Ge => a >= b,
                    CmpOp::Eq | CmpOp::Ne => unreachable!(),
                },
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Comparison {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// Body items keep their written order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyItem {
    Pos(Atom),
    Neg(Atom),
    Cmp(Comparison),
}

impl fmt::Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Pos(a) => write!(f, "{a}"),
            BodyItem::Neg(a) => write!(f, "not {a}"),
            BodyItem::Cmp(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AspRule {
    pub head: Atom,
    pub body: Vec<BodyItem>,
}

impl AspRule {
    pub fn new(head: Atom, body: Vec<BodyItem>) -> AspRule {
        AspRule { head, body }
    }

    pub fn pos_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Pos(a) => Some(a),
            _ => None,
        })
    }

    pub fn neg_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Neg(a) => Some(a),
            _ => None,
        })
    }

    pub fn comparisons(&self) -> impl Iterator<Item = &Comparison> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Cmp(c) => Some(c),
            _ => None,
        })
    }

    /// Every variable occurs in some positive body atom.
    pub fn check_safety(&self) -> Result<()> {
        let bound: BTreeSet<&str> = self.pos_body().flat_map(Atom::variables).collect();
        let cmp_vars = self.comparisons().flat_map(|c| [&c.lhs, &c.rhs]).filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        });
        let used = self.head.variables().chain(self.neg_body().flat_map(Atom::variables)).chain(cmp_vars);
        for v in used {
            if !bound.contains(v) {
                return Err(AspError::Unsafe { rule: self.to_string(), variable: v.to_string() });
            }
        }
        Ok(())
    }
}

impl fmt::Display for AspRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            let items: Vec<String> = self.body.iter().map(ToString::to_string).collect();
            write!(f, " :- {}", items.join(", "))?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AspProgram {
    pub rules: Vec<AspRule>,
    pub scale_exponent: u32,
}

impl AspProgram {
    pub fn new(rules: Vec<AspRule>, scale_exponent: u32) -> AspProgram {
        AspProgram { rules, scale_exponent }
    }

    /// Predicates appearing in some rule head.
    pub fn defined_predicates(&self) -> BTreeSet<&str> {
        self.rules.iter().map(|r| r.head.predicate.as_str()).collect()
    }

    /// Body predicates never defined by a rule, i.e. those supplied as facts.
    pub fn input_predicates(&self) -> BTreeSet<&str> {
        let defined = self.defined_predicates();
        self.rules
            .iter()
            .flat_map(|r| r.pos_body().chain(r.neg_body()))
            .map(|a| a.predicate.as_str())
            .filter(|p| !defined.contains(p))
            .collect()
    }

    /// Safety and stratification.
    pub fn validate(&self) -> Result<()> {
        for rule in &self.rules {
            rule.check_safety()?;
        }
        self.strata().map(|_| ())
    }

    /// Rule indices grouped by stratum, lowest first. A predicate's stratum
    /// is at least that of every predicate it depends on, and strictly
    /// greater for negative dependencies.
    pub fn strata(&self) -> Result<Vec<Vec<usize>>> {
        let mut level: BTreeMap<&str, usize> = BTreeMap::new();
        for rule in &self.rules {
            level.insert(&rule.head.predicate, 0);
            for a in rule.pos_body().chain(rule.neg_body()) {
                level.entry(&a.predicate).or_insert(0);
            }
        }
        let bound = level.len();
        loop {
            let mut changed = false;
            for rule in &self.rules {
                let head = rule.head.predicate.as_str();
                let mut need = level[head];
                for a in rule.pos_body() {
                    need = need.max(level[a.predicate.as_str()]);
                }
                for a in rule.neg_body() {
                    need = need.max(level[a.predicate.as_str()] + 1);
                }
                if need > level[head] {
                    if need > bound {
                        return Err(AspError::NotStratified(head.to_string()));
                    }
                    level.insert(head, need);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let top = level.values().copied().max().unwrap_or(0);
        let mut strata = vec![Vec::new(); top + 1];
        for (i, rule) in self.rules.iter().enumerate() {
            strata[level[rule.head.predicate.as_str()]].push(i);
        }
        strata.retain(|s| !s.is_empty());
        Ok(strata)
    }
}

pub const SCALE_COMMENT: &str = "% scale_exponent: ";

/// One rule per line after a scale comment line.
pub fn print_program(p: &AspProgram) -> String {
    let mut out = format!("{SCALE_COMMENT}{}\n", p.scale_exponent);
    for rule in &p.rules {
        out.push_str(&rule.to_string());
        out.push('\n');
    }
    out
}

impl fmt::Display for AspProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_program(self))
    }
}

/// Ground facts describing one instance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactSet {
    pub id: String,
    pub facts: Vec<GroundAtom>,
}

impl fmt::Display for FactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{fact}.")?;
        }
        Ok(())
    }
}
