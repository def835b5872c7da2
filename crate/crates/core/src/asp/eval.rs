use std::collections::{BTreeMap, BTreeSet};

use super::{AspError, AspProgram, AspRule, Atom, Comparison, Const, GroundAtom, Result, Term};

pub(crate) type Subst = BTreeMap<String, Const>;

/// The answer set of a stratified program plus its facts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    by_predicate: BTreeMap<String, BTreeSet<Vec<Const>>>,
}

impl Model {
    pub fn from_atoms<'a>(atoms: impl IntoIterator<Item = &'a GroundAtom>) -> Model {
        let mut m = Model::default();
        for a in atoms {
            m.insert(a.clone());
        }
        m
    }

    pub fn insert(&mut self, atom: GroundAtom) -> bool {
        self.by_predicate.entry(atom.predicate).or_default().insert(atom.args)
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.by_predicate.get(&atom.predicate).is_some_and(|s| s.contains(&atom.args))
    }

    pub fn len(&self) -> usize {
        self.by_predicate.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All atoms in (predicate, arguments) order.
    pub fn atoms(&self) -> impl Iterator<Item = GroundAtom> + '_ {
        self.by_predicate
            .iter()
            .flat_map(|(p, set)| set.iter().map(move |args| GroundAtom { predicate: p.clone(), args: args.clone() }))
    }

    pub fn tuples(&self, predicate: &str) -> impl Iterator<Item = &Vec<Const>> {
        self.by_predicate.get(predicate).into_iter().flatten()
    }

    pub fn has_predicate(&self, predicate: &str) -> bool {
        self.by_predicate.contains_key(predicate)
    }

    /// Atoms that were not among the input facts.
    pub fn derived<'a>(&'a self, facts: &'a [GroundAtom]) -> impl Iterator<Item = GroundAtom> + 'a {
        let input: BTreeSet<&GroundAtom> = facts.iter().collect();
        self.atoms().filter(move |a| !input.contains(a))
    }
}

pub(crate) fn resolve(term: &Term, subst: &Subst) -> Option<Const> {
    match term {
        Term::Const(c) => Some(c.clone()),
        Term::Var(v) => subst.get(v).cloned(),
    }
}

pub(crate) fn instantiate(atom: &Atom, subst: &Subst) -> Option<GroundAtom> {
    let args = atom.args.iter().map(|t| resolve(t, subst)).collect::<Option<Vec<_>>>()?;
    Some(GroundAtom { predicate: atom.predicate.clone(), args })
}

/// Extends `subst` so that `atom` matches `tuple`.
pub(crate) fn unify(atom: &Atom, tuple: &[Const], subst: &Subst) -> Option<Subst> {
    if atom.args.len() != tuple.len() {
        return None;
    }
    let mut out = subst.clone();
    for (term, value) in atom.args.iter().zip(tuple) {
        match term {
            Term::Const(c) if c != value => return None,
            Term::Const(_) => {}
            Term::Var(v) => match out.get(v) {
                Some(bound) if bound != value => return None,
                Some(_) => {}
                None => {
                    out.insert(v.clone(), value.clone());
                }
            },
        }
    }
    Some(out)
}

pub(crate) fn compare(c: &Comparison, subst: &Subst) -> Option<bool> {
    Some(c.op.apply(&resolve(&c.lhs, subst)?, &resolve(&c.rhs, subst)?))
}

/// Substitutions grounding every positive body atom against `model`.
pub(crate) fn positive_matches(rule: &AspRule, model: &Model, seed: Subst) -> Vec<Subst> {
    let mut frontier = vec![seed];
    for atom in rule.pos_body() {
        let mut next = Vec::new();
        for subst in &frontier {
            for tuple in model.tuples(&atom.predicate) {
                if let Some(s) = unify(atom, tuple, subst) {
                    next.push(s);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    frontier
}

/// Comparisons hold and negated atoms are absent under `subst`.
pub(crate) fn body_holds(rule: &AspRule, model: &Model, subst: &Subst) -> bool {
    rule.comparisons().all(|c| compare(c, subst) == Some(true))
        && rule.neg_body().all(|a| instantiate(a, subst).is_some_and(|g| !model.contains(&g)))
}

/// Computes the unique answer set of a stratified program over `facts`,
/// stratum by stratum, each to a fixpoint.
pub fn evaluate(p: &AspProgram, facts: &[GroundAtom]) -> Result<Model> {
    p.validate()?;
    let mut model = Model::from_atoms(facts);
    for stratum in p.strata()? {
        loop {
            let mut fresh = Vec::new();
            for &i in &stratum {
                let rule = &p.rules[i];
                for subst in positive_matches(rule, &model, Subst::new()) {
                    if body_holds(rule, &model, &subst) {
                        let head = instantiate(&rule.head, &subst)
                            .ok_or_else(|| AspError::Unsafe { rule: rule.to_string(), variable: "head".into() })?;
                        if !model.contains(&head) {
                            fresh.push(head);
                        }
                    }
                }
            }
            let mut changed = false;
            for atom in fresh {
                changed |= model.insert(atom);
            }
            if !changed {
                break;
            }
        }
    }
    Ok(model)
}
