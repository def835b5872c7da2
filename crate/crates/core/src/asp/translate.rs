use std::collections::{BTreeMap, BTreeSet};

use super::{AspError, AspProgram, AspRule, Atom, BodyItem, CmpOp, Comparison, Const, FactSet, GroundAtom, Result, Term};
use crate::dataset::{AttributeKind, Dataset, Instance, Value};
use crate::decimal::Decimal;
use crate::induction::{Head, Literal, Op, Rule, Ruleset};

pub const LABEL_PREDICATE: &str = "label";
const INSTANCE_VAR: &str = "X";

/// How attribute values map to program constants.
///
/// Numeric values become integers scaled by `10^scale`. Category strings
/// become lower-case symbols (or integers, when they are written as one);
/// the original strings are kept for explanations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    scale: u32,
    label: String,
    numeric: BTreeSet<String>,
    forward: BTreeMap<(String, String), Const>,
    backward: BTreeMap<(String, Const), String>,
}

/// Canonical constant for a category string, before collision handling.
pub(crate) fn symbolize(raw: &str) -> Const {
    if let Ok(n) = raw.parse::<i64>() {
        if n.to_string() == raw {
            return Const::Int(n);
        }
    }
    let mut s: String = raw
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_lowercase()) {
        s.insert_str(0, "c_");
    }
    if s == "not" {
        s.push('_');
    }
    Const::Sym(s)
}

impl Encoding {
    /// Builds the symbol table from every categorical value in `ds`.
    pub fn new(ds: &Dataset, scale: u32) -> Encoding {
        let mut enc = Encoding {
            scale,
            label: ds.label_name().to_string(),
            numeric: BTreeSet::new(),
            forward: BTreeMap::new(),
            backward: BTreeMap::new(),
        };
        for (col, attr) in ds.columns().iter().enumerate() {
            match attr.kind {
                AttributeKind::Numeric => {
                    enc.numeric.insert(attr.name.clone());
                }
                AttributeKind::Categorical => {
                    let mut values: BTreeSet<&str> = ds
                        .instances()
                        .iter()
                        .filter_map(|i| match &i.values[col] {
                            Value::Cat(s) => Some(s.as_str()),
                            _ => None,
                        })
                        .collect();
                    if col == ds.label_index() {
                        values.insert(ds.positive_class());
                        values.insert(ds.negative_class());
                    }
                    for v in values {
                        enc.register(&attr.name, v);
                    }
                }
            }
        }
        enc
    }

    /// [`Encoding::new`] at the smallest exact scale, at least 1.
    pub fn for_dataset(ds: &Dataset) -> Encoding {
        Encoding::new(ds, ds.decimal_digits(1))
    }

    fn register(&mut self, attr: &str, raw: &str) {
        let base = symbolize(raw);
        let mut candidate = base.clone();
        let mut n = 2;
        while self.backward.contains_key(&(attr.to_string(), candidate.clone())) {
            candidate = match &base {
                Const::Sym(s) => Const::Sym(format!("{s}_{n}")),
                Const::Int(i) => Const::Sym(format!("c_{i}_{n}")),
            };
            n += 1;
        }
        self.forward.insert((attr.to_string(), raw.to_string()), candidate.clone());
        self.backward.insert((attr.to_string(), candidate), raw.to_string());
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn label_attribute(&self) -> &str {
        &self.label
    }

    pub fn is_numeric(&self, attr: &str) -> bool {
        self.numeric.contains(attr)
    }

    pub fn category(&self, attr: &str, raw: &str) -> Const {
        self.forward.get(&(attr.to_string(), raw.to_string())).cloned().unwrap_or_else(|| symbolize(raw))
    }

    pub fn class(&self, class: &str) -> Const {
        self.category(&self.label, class)
    }

    pub fn number(&self, attr: &str, value: &Decimal) -> Result<i64> {
        value.to_scaled(self.scale).ok_or_else(|| AspError::Scale {
            attribute: attr.to_string(),
            value: value.to_string(),
            digits: self.scale,
        })
    }

    pub fn value(&self, attr: &str, value: &Value) -> Result<Const> {
        match value {
            Value::Num(d) => self.number(attr, d).map(Const::Int),
            Value::Cat(s) => Ok(self.category(attr, s)),
            Value::Missing => Err(AspError::MissingValue(attr.to_string())),
        }
    }

    /// The original category string behind a constant.
    pub fn raw(&self, attr: &str, c: &Const) -> String {
        self.backward.get(&(attr.to_string(), c.clone())).cloned().unwrap_or_else(|| c.to_string())
    }

    /// Human-readable form of a constant: unscaled decimals for numeric
    /// attributes, the quoted original category otherwise.
    pub fn describe(&self, attr: &str, c: &Const) -> String {
        match c {
            Const::Int(n) if self.is_numeric(attr) => Decimal::from_scaled(*n, self.scale).to_string(),
            _ => format!("'{}'", self.raw(attr, c)),
        }
    }
}

fn literal_items(lit: &Literal, index: usize, enc: &Encoding) -> Result<Vec<BodyItem>> {
    let attr = lit.attribute.as_str();
    let x = Term::var(INSTANCE_VAR);
    let value = match &lit.value {
        Value::Num(d) => Const::Int(enc.number(attr, d)?),
        Value::Cat(s) => enc.category(attr, s),
        Value::Missing => return Err(AspError::MissingValue(attr.to_string())),
    };
    if lit.op == Op::Eq && matches!(lit.value, Value::Cat(_)) {
        return Ok(vec![BodyItem::Pos(Atom::new(attr, vec![x, Term::Const(value)]))]);
    }
    let var = Term::var(format!("V_{attr}_{index}"));
    let op = match lit.op {
        Op::Eq => CmpOp::Eq,
        Op::Neq => CmpOp::Ne,
        Op::Le => CmpOp::Le,
        Op::Gt => CmpOp::Gt,
    };
    Ok(vec![
        BodyItem::Pos(Atom::new(attr, vec![x, var.clone()])),
        BodyItem::Cmp(Comparison { lhs: var, op, rhs: Term::Const(value) }),
    ])
}

fn translate_rule(rule: &Rule, head: Atom, enc: &Encoding) -> Result<AspRule> {
    let mut body = Vec::new();
    for (i, lit) in rule.body.iter().enumerate() {
        body.extend(literal_items(lit, i, enc)?);
    }
    for ab in &rule.exceptions {
        body.push(BodyItem::Neg(Atom::new(ab.to_string(), vec![Term::var(INSTANCE_VAR), Term::sym("true")])));
    }
    Ok(AspRule { head, body })
}

/// Class rules first, in learned order, then abnormality rules by id.
pub fn translate(rs: &Ruleset, enc: &Encoding) -> Result<AspProgram> {
    let mut rules = Vec::new();
    let class_head = Atom::new(LABEL_PREDICATE, vec![Term::var(INSTANCE_VAR), Term::Const(enc.class(&rs.target_class))]);
    for rule in &rs.rules {
        rules.push(translate_rule(rule, class_head.clone(), enc)?);
    }
    for (ab, ab_rules) in &rs.ab_rules {
        for rule in ab_rules {
            debug_assert_eq!(rule.head, Head::Ab(*ab));
            let head = Atom::new(ab.to_string(), vec![Term::var(INSTANCE_VAR), Term::sym("true")]);
            rules.push(translate_rule(rule, head, enc)?);
        }
    }
    Ok(AspProgram { rules, scale_exponent: enc.scale() })
}

/// One fact per non-label attribute of `x`.
pub fn instance_to_facts(schema: &Dataset, x: &Instance, id: &str, enc: &Encoding) -> Result<FactSet> {
    let subject = Const::Sym(id.to_string());
    let mut facts = Vec::new();
    for (col, attr) in schema.features() {
        let value = enc.value(&attr.name, &x.values[col])?;
        facts.push(GroundAtom::new(attr.name.clone(), vec![subject.clone(), value]));
    }
    Ok(FactSet { id: id.to_string(), facts })
}
