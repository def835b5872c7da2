use super::eval::{body_holds, compare, instantiate, positive_matches, resolve, unify, Subst};
use super::{evaluate, AspError, AspProgram, AspRule, Atom, BodyItem, CmpOp, Comparison, Const, GroundAtom, Model, Result, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofStatus {
    Holds,
    Fails,
}

impl ProofStatus {
    fn from_bool(b: bool) -> Self {
        if b {
            ProofStatus::Holds
        } else {
            ProofStatus::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == ProofStatus::Holds
    }
}

/// Outcome of testing one attribute value against a required value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub attribute: String,
    /// `None` when the instance has no value for the attribute.
    pub observed: Option<Const>,
    pub op: CmpOp,
    pub expected: Const,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Check(Check),
    /// A positive atom that only binds variables, or a non-attribute atom.
    Fact { atom: Atom, holds: bool },
    /// A comparison not tied to a single attribute.
    Compare { comparison: Comparison, holds: bool },
    /// `not a`: holds iff `a` fails. `subtree` is absent when `a` could not
    /// be grounded because an earlier atom failed.
    Negated { atom: Atom, subtree: Option<ProofTree>, holds: bool },
    /// A positive atom defined by rules.
    Derived { atom: Atom, subtree: Option<ProofTree>, holds: bool },
}

impl Condition {
    pub fn holds(&self) -> bool {
        match self {
            Condition::Check(c) => c.holds,
            Condition::Fact { holds, .. }
            | Condition::Compare { holds, .. }
            | Condition::Negated { holds, .. }
            | Condition::Derived { holds, .. } => *holds,
        }
    }
}

/// How one rule for the goal fared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTrace {
    pub rule_index: usize,
    pub status: ProofStatus,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTree {
    pub goal: GroundAtom,
    pub status: ProofStatus,
    pub rules: Vec<RuleTrace>,
}

impl ProofTree {
    /// The first rule whose trace holds.
    pub fn first_holding_rule(&self) -> Option<usize> {
        self.rules.iter().find(|r| r.status.holds()).map(|r| r.rule_index)
    }
}

struct Prover<'a> {
    program: &'a AspProgram,
    model: &'a Model,
    stack: Vec<GroundAtom>,
}

impl Prover<'_> {
    fn is_defined(&self, predicate: &str) -> bool {
        self.program.rules.iter().any(|r| r.head.predicate == predicate)
    }

    fn prove(&mut self, goal: &GroundAtom) -> ProofTree {
        let status = ProofStatus::from_bool(self.model.contains(goal));
        if self.stack.contains(goal) {
            return ProofTree { goal: goal.clone(), status, rules: Vec::new() };
        }
        self.stack.push(goal.clone());
        let mut rules = Vec::new();
        for (i, rule) in self.program.rules.iter().enumerate() {
            if let Some(seed) = unify(&rule.head, &goal.args, &Subst::new()).filter(|_| rule.head.predicate == goal.predicate) {
                rules.push(self.trace(i, rule, seed));
            }
        }
        self.stack.pop();
        ProofTree { goal: goal.clone(), status, rules }
    }

    /// Binds positive atoms left to right, skipping atoms with no match.
    fn partial_binding(&self, rule: &AspRule, mut subst: Subst) -> Subst {
        for atom in rule.pos_body() {
            if let Some(s) = self.model.tuples(&atom.predicate).find_map(|t| unify(atom, t, &subst)) {
                subst = s;
            }
        }
        subst
    }

    fn trace(&mut self, index: usize, rule: &AspRule, seed: Subst) -> RuleTrace {
        let full = positive_matches(rule, self.model, seed.clone()).into_iter().find(|s| body_holds(rule, self.model, s));
        let holds = full.is_some();
        let subst = full.unwrap_or_else(|| self.partial_binding(rule, seed));
        let conditions = rule.body.iter().map(|item| self.condition(rule, item, &subst)).collect::<Vec<_>>();
        debug_assert!(!holds || conditions.iter().all(Condition::holds));
        RuleTrace { rule_index: index, status: ProofStatus::from_bool(holds), conditions }
    }

    fn partially(atom: &Atom, subst: &Subst) -> Atom {
        let args = atom
            .args
            .iter()
            .map(|t| resolve(t, subst).map(Term::Const).unwrap_or_else(|| t.clone()))
            .collect();
        Atom::new(atom.predicate.clone(), args)
    }

    /// Value of a binary attribute atom for the given subject.
    fn observed(&self, predicate: &str, subject: &Const) -> Option<Const> {
        self.model.tuples(predicate).find(|t| t.len() == 2 && &t[0] == subject).map(|t| t[1].clone())
    }

    fn condition(&mut self, rule: &AspRule, item: &BodyItem, subst: &Subst) -> Condition {
        match item {
            BodyItem::Pos(atom) => {
                let ground = instantiate(atom, subst);
                let holds = ground.as_ref().is_some_and(|g| self.model.contains(g));
                if self.is_defined(&atom.predicate) {
                    let subtree = ground.map(|g| self.prove(&g));
                    return Condition::Derived { atom: Self::partially(atom, subst), subtree, holds };
                }
                if let [subject, Term::Const(expected)] = atom.args.as_slice() {
                    if let Some(subject) = resolve(subject, subst) {
                        return Condition::Check(Check {
                            attribute: atom.predicate.clone(),
                            observed: self.observed(&atom.predicate, &subject),
                            op: CmpOp::Eq,
                            expected: expected.clone(),
                            holds,
                        });
                    }
                }
                Condition::Fact { atom: Self::partially(atom, subst), holds }
            }
            BodyItem::Neg(atom) => {
                let ground = instantiate(atom, subst);
                let holds = ground.as_ref().is_some_and(|g| !self.model.contains(g));
                let subtree = ground.map(|g| self.prove(&g));
                Condition::Negated { atom: Self::partially(atom, subst), subtree, holds }
            }
            BodyItem::Cmp(c) => {
                let holds = compare(c, subst) == Some(true);
                let binder = match (&c.lhs, &c.rhs) {
                    (Term::Var(v), Term::Const(expected)) => rule
                        .pos_body()
                        .find(|a| a.args.len() == 2 && a.args[1] == Term::Var(v.clone()))
                        .map(|a| (a.predicate.clone(), expected.clone())),
                    _ => None,
                };
                match binder {
                    Some((attribute, expected)) => Condition::Check(Check {
                        attribute,
                        observed: resolve(&c.lhs, subst),
                        op: c.op,
                        expected,
                        holds,
                    }),
                    None => Condition::Compare { comparison: c.clone(), holds },
                }
            }
        }
    }
}

/// Explains why `goal` holds or fails in the answer set of `p` over
/// `facts`. The returned status always agrees with [`evaluate`].
pub fn prove(p: &AspProgram, facts: &[GroundAtom], goal: &GroundAtom) -> Result<ProofTree> {
    let model = evaluate(p, facts)?;
    let known = p.rules.iter().any(|r| r.head.predicate == goal.predicate)
        || p.input_predicates().contains(goal.predicate.as_str())
        || model.has_predicate(&goal.predicate);
    if !known {
        return Err(AspError::UnknownGoal(goal.predicate.clone()));
    }
    Ok(prove_in_model(p, &model, goal))
}

/// [`prove`] against an already computed model.
pub fn prove_in_model(p: &AspProgram, model: &Model, goal: &GroundAtom) -> ProofTree {
    Prover { program: p, model, stack: Vec::new() }.prove(goal)
}
