//! Default rules with exceptions, learned by greedy literal selection and
//! recursive exception induction.
//!
//! A learned [`Ruleset`] predicts its target class for an instance iff some
//! class rule fires: every body literal holds and none of the rule's
//! abnormality predicates holds. An abnormality predicate `abK` holds iff
//! any of its own rules fires, recursively.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::dataset::{Dataset, Instance, Value};
use crate::decimal::Decimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Eq,
    Neq,
    Le,
    Gt,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Eq => "=",
            Op::Neq => "!=",
            Op::Le => "<=",
            Op::Gt => ">",
        })
    }
}

/// `attribute op value`, bound to a column of the training schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub column: usize,
    pub attribute: String,
    pub op: Op,
    pub value: Value,
}

impl Literal {
    pub fn new(column: usize, attribute: impl Into<String>, op: Op, value: Value) -> Self {
        Literal { column, attribute: attribute.into(), op, value }
    }

    /// Mixed numeric/categorical comparisons are false, except `neq`.
    pub fn holds(&self, inst: &Instance) -> bool {
        let observed = &inst.values[self.column];
        match self.op {
            Op::Eq => same_value(observed, &self.value),
            Op::Neq => !same_value(observed, &self.value),
            Op::Le => matches!((observed, &self.value), (Value::Num(a), Value::Num(b)) if a <= b),
            Op::Gt => matches!((observed, &self.value), (Value::Num(a), Value::Num(b)) if a > b),
        }
    }
}

fn same_value(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Num(x), Value::Num(y)) => x == y,
        (Value::Cat(x), Value::Cat(y)) => x == y,
        _ => false,
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.attribute, self.op, self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbId(pub u32);

impl fmt::Display for AbId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ab{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Head {
    Class,
    Ab(AbId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: Head,
    pub body: Vec<Literal>,
    pub exceptions: Vec<AbId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerParams {
    /// Minimum precision a class rule needs to survive pruning.
    pub ratio: f64,
    pub max_rule_literals: usize,
    pub max_exception_depth: usize,
    /// Stop covering once this fraction of the positives is left uncovered.
    pub tail_fraction: f64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams { ratio: 0.5, max_rule_literals: 10, max_exception_depth: 5, tail_fraction: 0.0 }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(format!("ratio {} must lie in (0, 1]", self.ratio));
        }
        if self.max_rule_literals < 1 || self.max_exception_depth < 1 {
            return Err("rule literal and exception depth caps must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.tail_fraction) {
            return Err(format!("tail fraction {} must lie in [0, 1)", self.tail_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ruleset {
    pub target_class: String,
    pub default_class: String,
    pub rules: Vec<Rule>,
    pub ab_rules: BTreeMap<AbId, Vec<Rule>>,
    pub next_ab_index: u32,
}

impl Ruleset {
    pub fn new(target_class: impl Into<String>, default_class: impl Into<String>) -> Self {
        Ruleset {
            target_class: target_class.into(),
            default_class: default_class.into(),
            rules: Vec::new(),
            ab_rules: BTreeMap::new(),
            next_ab_index: 1,
        }
    }

    fn fresh_ab(&mut self) -> AbId {
        let id = AbId(self.next_ab_index);
        self.next_ab_index += 1;
        id
    }

    /// Body holds and no exception holds.
    pub fn fires(&self, rule: &Rule, inst: &Instance) -> bool {
        rule.body.iter().all(|l| l.holds(inst)) && !rule.exceptions.iter().any(|&ab| self.ab_holds(ab, inst))
    }

    pub fn ab_holds(&self, ab: AbId, inst: &Instance) -> bool {
        self.ab_rules.get(&ab).is_some_and(|rules| rules.iter().any(|r| self.fires(r, inst)))
    }

    /// Index of the first class rule that fires.
    pub fn first_firing(&self, inst: &Instance) -> Option<usize> {
        self.rules.iter().position(|r| self.fires(r, inst))
    }

    /// The exception reference graph has no cycle.
    pub fn is_stratified(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn visit(rs: &Ruleset, ab: AbId, marks: &mut BTreeMap<AbId, Mark>) -> bool {
            match marks.get(&ab) {
                Some(Mark::Done) => return true,
                Some(Mark::Active) => return false,
                None => {}
            }
            marks.insert(ab, Mark::Active);
            let ok = rs
                .ab_rules
                .get(&ab)
                .into_iter()
                .flatten()
                .flat_map(|r| &r.exceptions)
                .all(|&next| visit(rs, next, marks));
            marks.insert(ab, Mark::Done);
            ok
        }
        let mut marks = BTreeMap::new();
        self.rules
            .iter()
            .flat_map(|r| &r.exceptions)
            .chain(self.ab_rules.keys())
            .all(|&ab| visit(self, ab, &mut marks))
    }

    /// Exception references resolve to abnormality rules in this set.
    pub fn references_resolve(&self) -> bool {
        self.rules
            .iter()
            .chain(self.ab_rules.values().flatten())
            .flat_map(|r| &r.exceptions)
            .all(|ab| self.ab_rules.contains_key(ab))
    }

    fn reachable_abs(&self) -> BTreeSet<AbId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<AbId> = self.rules.iter().flat_map(|r| r.exceptions.iter().copied()).collect();
        while let Some(ab) = stack.pop() {
            if seen.insert(ab) {
                if let Some(rules) = self.ab_rules.get(&ab) {
                    stack.extend(rules.iter().flat_map(|r| r.exceptions.iter().copied()));
                }
            }
        }
        seen
    }
}

impl fmt::Display for Ruleset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let write_rule = |f: &mut fmt::Formatter<'_>, head: String, r: &Rule| {
            let mut items: Vec<String> = r.body.iter().map(ToString::to_string).collect();
            items.extend(r.exceptions.iter().map(|ab| format!("not {ab}")));
            writeln!(f, "{head} :- {}", items.join(", "))
        };
        for r in &self.rules {
            write_rule(f, self.target_class.clone(), r)?;
        }
        for (ab, rules) in &self.ab_rules {
            for r in rules {
                write_rule(f, ab.to_string(), r)?;
            }
        }
        Ok(())
    }
}

/// Binary entropy of a (p, n) count pair, in bits.
fn entropy(p: usize, n: usize) -> f64 {
    let total = (p + n) as f64;
    [p, n]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let q = c as f64 / total;
            -q * q.log2()
        })
        .sum()
}

/// Information gain of splitting (pos, neg) into covered / uncovered parts.
///
/// Literals covering no positive example, or oriented towards the negatives
/// (`tp + tn < fp + fn`), score `None`.
pub fn literal_gain(tp: usize, fp: usize, pos: usize, neg: usize) -> Option<f64> {
    let (fn_, tn) = (pos - tp, neg - fp);
    if tp == 0 || tp + tn < fp + fn_ {
        return None;
    }
    let total = (pos + neg) as f64;
    let covered = (tp + fp) as f64;
    let uncovered = (fn_ + tn) as f64;
    Some(entropy(pos, neg) - covered / total * entropy(tp, fp) - uncovered / total * entropy(fn_, tn))
}

const MIN_GAIN: f64 = 1e-12;

/// The literal (not in `used`) with the highest information gain.
///
/// Candidates are `eq`/`neq` against each observed categorical value and
/// `le`/`gt` against each observed numeric value. Ties go to the earliest
/// candidate in (schema column, op, ascending value) order.
pub fn best_literal(
    schema: &Dataset,
    pos: &[&Instance],
    neg: &[&Instance],
    used: &[Literal],
) -> Option<(Literal, f64)> {
    let (np, nn) = (pos.len(), neg.len());
    let mut best: Option<(Literal, f64)> = None;
    let mut consider = |lit: Literal, tp: usize, fp: usize| {
        if let Some(g) = literal_gain(tp, fp, np, nn) {
            if g > MIN_GAIN && best.as_ref().is_none_or(|(_, b)| g > *b) && !used.contains(&lit) {
                best = Some((lit, g));
            }
        }
    };

    for (col, attr) in schema.features() {
        // value -> (positive count, negative count), ascending value order
        let mut cats: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        let mut nums: BTreeMap<Decimal, (usize, usize)> = BTreeMap::new();
        for (group, is_pos) in [(pos, true), (neg, false)] {
            for inst in group {
                let slot = match &inst.values[col] {
                    Value::Cat(s) => cats.entry(s.as_str()).or_default(),
                    Value::Num(d) => nums.entry(*d).or_default(),
                    Value::Missing => continue,
                };
                if is_pos {
                    slot.0 += 1;
                } else {
                    slot.1 += 1;
                }
            }
        }
        let name = &attr.name;
        for (&v, &(p, n)) in &cats {
            consider(Literal::new(col, name, Op::Eq, Value::Cat(v.into())), p, n);
        }
        // Missing or numeric cells also satisfy `neq`.
        for (&v, &(p, n)) in &cats {
            consider(Literal::new(col, name, Op::Neq, Value::Cat(v.into())), np - p, nn - n);
        }
        let mut cum = (0, 0);
        let mut le = Vec::with_capacity(nums.len());
        for (&v, &(p, n)) in &nums {
            cum = (cum.0 + p, cum.1 + n);
            le.push((v, cum));
        }
        for &(v, (p, n)) in &le {
            consider(Literal::new(col, name, Op::Le, Value::Num(v)), p, n);
        }
        let num_total = cum;
        for &(v, (p, n)) in &le {
            consider(Literal::new(col, name, Op::Gt, Value::Num(v)), num_total.0 - p, num_total.1 - n);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Class,
    Exception,
}

struct Learner<'a> {
    schema: &'a Dataset,
    params: &'a LearnerParams,
}

impl Learner<'_> {
    fn learn_rule(&self, pos: &[&Instance], neg: &[&Instance], depth: usize, rs: &mut Ruleset) -> Rule {
        let mut body: Vec<Literal> = Vec::new();
        let mut pos_cov: Vec<&Instance> = pos.to_vec();
        let mut neg_cov: Vec<&Instance> = neg.to_vec();
        while !neg_cov.is_empty() && body.len() < self.params.max_rule_literals {
            let Some((lit, _)) = best_literal(self.schema, &pos_cov, &neg_cov, &body) else {
                break;
            };
            pos_cov.retain(|i| lit.holds(i));
            neg_cov.retain(|i| lit.holds(i));
            body.push(lit);
        }
        let mut exceptions = Vec::new();
        if !body.is_empty() && !neg_cov.is_empty() && depth < self.params.max_exception_depth {
            // Roles swap: the wrongly covered negatives become positives.
            exceptions = self
                .cover(&neg_cov, &pos_cov, depth + 1, Role::Exception, 0.0, rs)
                .0
                .into_iter()
                .map(|r| match r.head {
                    Head::Ab(id) => id,
                    Head::Class => unreachable!("exception rules carry ab heads"),
                })
                .collect();
        }
        Rule { head: Head::Class, body, exceptions }
    }

    /// Sequential covering. Returns the accepted rules and the positives
    /// left uncovered. Exception rules are registered in `rs` under fresh
    /// ids as they are accepted.
    fn cover<'i>(
        &self,
        pos: &[&'i Instance],
        neg: &[&Instance],
        depth: usize,
        role: Role,
        tail_fraction: f64,
        rs: &mut Ruleset,
    ) -> (Vec<Rule>, Vec<&'i Instance>) {
        let tail = (tail_fraction * pos.len() as f64).floor() as usize;
        let mut remaining: Vec<&Instance> = pos.to_vec();
        let mut accepted = Vec::new();
        while !remaining.is_empty() && remaining.len() > tail {
            let checkpoint = rs.next_ab_index;
            let mut rule = self.learn_rule(&remaining, neg, depth, rs);
            let uncovered: Vec<&Instance> = remaining.iter().copied().filter(|i| !rs.fires(&rule, i)).collect();
            if rule.body.is_empty() || uncovered.len() == remaining.len() {
                // Drop the rule together with any exceptions learned for it.
                rs.ab_rules.retain(|id, _| id.0 < checkpoint);
                rs.next_ab_index = checkpoint;
                break;
            }
            remaining = uncovered;
            if role == Role::Exception {
                let id = rs.fresh_ab();
                rule.head = Head::Ab(id);
                rs.ab_rules.insert(id, vec![rule.clone()]);
            }
            accepted.push(rule);
        }
        (accepted, remaining)
    }
}

/// Learns one rule for `pos` against `neg`; exceptions found on the way are
/// registered in `rs`.
pub fn learn_rule(
    schema: &Dataset,
    pos: &[&Instance],
    neg: &[&Instance],
    params: &LearnerParams,
    depth: usize,
    rs: &mut Ruleset,
) -> Rule {
    Learner { schema, params }.learn_rule(pos, neg, depth, rs)
}

/// Sequential covering without pruning. Returns the rules and the ids of
/// the positives left uncovered.
pub fn learn_unpruned(train: &Dataset, target: &str, params: &LearnerParams) -> (Ruleset, Vec<usize>) {
    let default = if target == train.positive_class() { train.negative_class() } else { train.positive_class() };
    let mut rs = Ruleset::new(target, default);
    let (pos, neg): (Vec<&Instance>, Vec<&Instance>) =
        train.instances().iter().partition(|i| train.label_of(i) == Some(target));
    if pos.is_empty() {
        return (rs, Vec::new());
    }
    let learner = Learner { schema: train, params };
    let (rules, residual) = learner.cover(&pos, &neg, 0, Role::Class, params.tail_fraction, &mut rs);
    rs.rules = rules;
    (rs, residual.iter().map(|i| i.id).collect())
}

/// Learns and prunes a ruleset predicting `target`.
pub fn learn(train: &Dataset, target: &str, params: &LearnerParams) -> Ruleset {
    let (rs, _) = learn_unpruned(train, target, params);
    prune(&rs, train, params)
}

/// Drops class rules whose training precision is below `params.ratio`,
/// then any abnormality rules no longer reachable.
pub fn prune(rs: &Ruleset, train: &Dataset, params: &LearnerParams) -> Ruleset {
    let mut out = rs.clone();
    out.rules.retain(|rule| {
        let (mut tp, mut fp) = (0usize, 0usize);
        for inst in train.instances() {
            if rs.fires(rule, inst) {
                if train.label_of(inst) == Some(rs.target_class.as_str()) {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        (tp as f64) >= params.ratio * (tp + fp) as f64
    });
    let live = out.reachable_abs();
    out.ab_rules.retain(|id, _| live.contains(id));
    debug_assert!(out.is_stratified());
    out
}

/// Label assigned by the ruleset.
pub fn predict_native<'a>(rs: &'a Ruleset, x: &Instance) -> &'a str {
    if rs.first_firing(x).is_some() {
        &rs.target_class
    } else {
        &rs.default_class
    }
}
