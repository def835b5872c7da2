//! Confidence-gated combination of a classifier with a rule program, plus
//! proof-tree explanations.
//!
//! Predictions whose classifier confidence is strictly above `tau` are kept.
//! Everything else is decided by the program: the target class if the
//! `label` atom is derived, the negative class otherwise.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asp::{
    evaluate, instance_to_facts, prove_in_model, translate, AspError, AspProgram, Check, CmpOp, Condition,
    Const, Encoding, GroundAtom, ProofTree, Term, LABEL_PREDICATE,
};
use crate::classifiers::TrainedModel;
use crate::dataset::{Dataset, Instance};
use crate::induction::Ruleset;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HybridError {
    #[error("program refers to `{0}`, which is not an attribute of the instance schema")]
    SchemaMismatch(String),
    #[error("confidence threshold must lie in (0, 1), got {0}")]
    InvalidTau(f64),
    #[error(transparent)]
    Asp(#[from] AspError),
}

pub type Result<T> = std::result::Result<T, HybridError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub tau: f64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig { tau: 0.6 }
    }
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau > 0.0 && self.tau < 1.0 {
            Ok(())
        } else {
            Err(HybridError::InvalidTau(self.tau))
        }
    }
}

/// A translated program together with the encoding needed to feed it
/// instances and to render its constants.
#[derive(Debug, Clone)]
pub struct RuleProgram {
    pub program: AspProgram,
    pub encoding: Encoding,
}

impl RuleProgram {
    pub fn from_ruleset(rs: &Ruleset, encoding: Encoding) -> Result<RuleProgram> {
        Ok(RuleProgram { program: translate(rs, &encoding)?, encoding })
    }

    /// The class named in `label` rule heads, if any.
    pub fn target(&self) -> Option<&Const> {
        self.program
            .rules
            .iter()
            .find(|r| r.head.predicate == LABEL_PREDICATE)
            .and_then(|r| match r.head.args.get(1) {
                Some(Term::Const(c)) => Some(c),
                _ => None,
            })
    }

    /// Every predicate the program reads must be an attribute of `schema`.
    pub fn check_schema(&self, schema: &Dataset) -> Result<()> {
        for pred in self.program.input_predicates() {
            if !schema.features().any(|(_, a)| a.name == pred) {
                return Err(HybridError::SchemaMismatch(pred.to_string()));
            }
        }
        Ok(())
    }

    /// Attributes in order of first reference.
    fn referenced_attributes(&self) -> Vec<&str> {
        let inputs = self.program.input_predicates();
        let mut out: Vec<&str> = Vec::new();
        for rule in &self.program.rules {
            for atom in rule.pos_body() {
                let p = atom.predicate.as_str();
                if inputs.contains(p) && !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    fn class_name(&self, c: &Const) -> String {
        self.encoding.raw(self.encoding.label_attribute(), c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Ml,
    AspRule,
    AspDefault,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Ml => "ml",
            Source::AspRule => "asp_rule",
            Source::AspDefault => "asp_default",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub instance: usize,
    pub label: String,
    pub ml_label: String,
    pub ml_confidence: f64,
    /// What the program alone predicts, whichever path was taken.
    pub asp_label: String,
    pub source: Source,
    pub corrected: bool,
    /// Index of the first class rule that fired, in program order.
    pub fired_rule: Option<usize>,
}

fn goal_for(rp: &RuleProgram, x: &Instance) -> Option<GroundAtom> {
    rp.target()
        .map(|t| GroundAtom::new(LABEL_PREDICATE, vec![Const::Sym(instance_symbol(x)), t.clone()]))
}

pub fn instance_symbol(x: &Instance) -> String {
    format!("i{}", x.id)
}

/// Proof of the target `label` atom for `x`, or `None` for a program
/// without class rules.
fn proof_for(rp: &RuleProgram, schema: &Dataset, x: &Instance) -> Result<Option<ProofTree>> {
    let Some(goal) = goal_for(rp, x) else {
        return Ok(None);
    };
    let facts = instance_to_facts(schema, x, &goal.args[0].to_string(), &rp.encoding)?;
    let model = evaluate(&rp.program, &facts.facts)?;
    Ok(Some(prove_in_model(&rp.program, &model, &goal)))
}

/// What the program alone predicts for `x`, and the rule credited for it.
pub fn asp_predict(rp: &RuleProgram, schema: &Dataset, x: &Instance) -> Result<(String, Option<usize>)> {
    rp.check_schema(schema)?;
    let tree = proof_for(rp, schema, x)?;
    match (tree, rp.target()) {
        (Some(t), Some(target)) if t.status.holds() => Ok((rp.class_name(target), t.first_holding_rule())),
        _ => Ok((schema.negative_class().to_string(), None)),
    }
}

pub fn hybrid_predict(
    model: &TrainedModel,
    rp: &RuleProgram,
    schema: &Dataset,
    x: &Instance,
    cfg: &HybridConfig,
) -> Result<Prediction> {
    cfg.validate()?;
    let proba = model.predict_proba(x);
    let ml_label = model.label_for(&proba).to_string();
    let ml_confidence = proba.confidence();
    let (asp_label, fired_rule) = asp_predict(rp, schema, x)?;
    let source = if ml_confidence > cfg.tau {
        Source::Ml
    } else if fired_rule.is_some() {
        Source::AspRule
    } else {
        Source::AspDefault
    };
    let label = if source == Source::Ml { ml_label.clone() } else { asp_label.clone() };
    Ok(Prediction {
        instance: x.id,
        corrected: label != ml_label,
        label,
        ml_label,
        ml_confidence,
        asp_label,
        source,
        fired_rule,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofPoint {
    /// 0 for class rules, +1 per level of exception nesting.
    pub depth: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub instance: String,
    /// Attribute and rendered value, for attributes the program reads.
    pub features: Vec<(String, String)>,
    pub points: Vec<ProofPoint>,
    pub label: String,
    pub source: Source,
    pub corrected: bool,
}

impl Explanation {
    pub fn feature_line(&self) -> String {
        let items: Vec<String> = self.features.iter().map(|(k, v)| format!("'{k}': {v}")).collect();
        format!("{{{}}}", items.join(", "))
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Instance: {}", self.instance)?;
        writeln!(f, "Extracted Features: {}", self.feature_line())?;
        writeln!(f, "Key Proof Tree Points:")?;
        let mut n = 0;
        for p in &self.points {
            if p.depth == 0 {
                n += 1;
                writeln!(f, "  {n}. {}", p.text)?;
            } else {
                writeln!(f, "  {}- {}", "   ".repeat(p.depth), p.text)?;
            }
        }
        let tag = if self.corrected { ", corrected" } else { "" };
        writeln!(f, "Final Label: {} (source: {}{tag})", self.label, self.source)
    }
}

fn relation(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "equal",
        CmpOp::Ne => "not equal",
        CmpOp::Le => "be less than or equal to",
        CmpOp::Gt => "be greater than",
        CmpOp::Lt => "be less than",
        CmpOp::Ge => "be greater than or equal to",
    }
}

fn holds_text(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "does not hold"
    }
}

struct Renderer<'a> {
    rp: &'a RuleProgram,
    points: Vec<ProofPoint>,
}

impl Renderer<'_> {
    fn check(&self, c: &Check) -> String {
        let enc = &self.rp.encoding;
        let observed = match &c.observed {
            Some(v) => enc.describe(&c.attribute, v),
            None => "missing".to_string(),
        };
        format!(
            "the value of {} is {} which should {} {} {}",
            c.attribute,
            observed,
            relation(c.op),
            enc.describe(&c.attribute, &c.expected),
            holds_text(c.holds)
        )
    }

    fn head_text(&self, tree: &ProofTree) -> String {
        if tree.goal.predicate == LABEL_PREDICATE {
            format!("label(X,'{}')", self.rp.class_name(&tree.goal.args[1]))
        } else {
            let rest: Vec<String> = tree.goal.args[1..].iter().map(Const::to_string).collect();
            format!("{}(X,{})", tree.goal.predicate, rest.join(","))
        }
    }

    /// One line per rule for the goal. A failing rule lists its failing
    /// conditions, a holding rule all of its conditions. Exceptions add
    /// nested lines for the abnormality goal.
    fn tree(&mut self, tree: &ProofTree, depth: usize) {
        let head = self.head_text(tree);
        if tree.rules.is_empty() {
            self.points.push(ProofPoint { depth, text: format!("{head} {} because no rule for it applies", holds_text(tree.status.holds())) });
            return;
        }
        for trace in &tree.rules {
            let holds = trace.status.holds();
            let shown: Vec<&Condition> = trace
                .conditions
                .iter()
                .filter(|c| c.holds() == holds)
                .filter(|c| !matches!(c, Condition::Fact { holds: true, .. }))
                .collect();
            let mut clauses = Vec::new();
            let mut nested = Vec::new();
            for c in shown {
                match c {
                    Condition::Check(ch) => clauses.push(self.check(ch)),
                    Condition::Fact { atom, .. } => {
                        let attr = &atom.predicate;
                        clauses.push(format!("the value of {attr} is missing"));
                    }
                    Condition::Compare { comparison, holds } => {
                        clauses.push(format!("{comparison} {}", holds_text(*holds)))
                    }
                    Condition::Negated { atom, subtree, holds } => {
                        let verb = if *holds { "does not apply" } else { "applies" };
                        clauses.push(format!("the exception {} {verb}", atom.predicate));
                        nested.extend(subtree.iter());
                    }
                    Condition::Derived { atom, subtree, holds } => {
                        clauses.push(format!("{atom} {}", holds_text(*holds)));
                        nested.extend(subtree.iter());
                    }
                }
            }
            self.points.push(ProofPoint {
                depth,
                text: format!("{head} {} because {}", holds_text(holds), clauses.join(" and ")),
            });
            for sub in nested {
                self.tree(sub, depth + 1);
            }
        }
    }
}

/// Renders the proof of the target `label` atom for `x`. Works for every
/// prediction, not just corrected ones.
pub fn explain(rp: &RuleProgram, schema: &Dataset, x: &Instance, pred: &Prediction) -> Result<Explanation> {
    rp.check_schema(schema)?;
    let attrs = rp.referenced_attributes();
    let features = attrs
        .iter()
        .filter_map(|a| schema.column_index(a).map(|col| (a.to_string(), x.values[col].to_string())))
        .collect();
    let mut renderer = Renderer { rp, points: Vec::new() };
    match proof_for(rp, schema, x)? {
        Some(tree) => renderer.tree(&tree, 0),
        None => renderer.points.push(ProofPoint {
            depth: 0,
            text: format!("no rule applies; the default label '{}' is used", schema.negative_class()),
        }),
    }
    Ok(Explanation {
        instance: instance_symbol(x),
        features,
        points: renderer.points,
        label: pred.label.clone(),
        source: pred.source,
        corrected: pred.corrected,
    })
}

/// Counts, per class rule, the predictions where that rule overrode a wrong
/// classifier label with the true one. Sorted by count, then rule index.
pub fn rule_importance(predictions: &[Prediction], truths: &[&str]) -> Vec<(usize, usize)> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (p, truth) in predictions.iter().zip(truths) {
        if p.source == Source::AspRule && p.label == *truth && p.ml_label != *truth {
            if let Some(r) = p.fired_rule {
                *counts.entry(r).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(usize, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Rule text for each class rule, as printed in the program.
pub fn class_rule_text(rp: &RuleProgram, index: usize) -> Option<String> {
    rp.program.rules.get(index).filter(|r| r.head.predicate == LABEL_PREDICATE).map(|r| r.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::parse_program;
    use crate::classifiers::{fit, ClassifierKind};
    use crate::dataset::{load_csv_str, SchemaSpec};

    fn heart() -> Dataset {
        let spec = SchemaSpec::parse(
            "major_vessels,categorical\nchest_pain,categorical\nage,numeric\nlabel,categorical\nlabel=label,positive=absent\n",
        )
        .unwrap();
        load_csv_str(
            "major_vessels,chest_pain,age,label\n0,3,50.0,absent\n0,2,45.0,absent\n2,4,60.0,present\n1,4,70.0,present\n0,4,67.0,absent\n",
            &spec,
        )
        .unwrap()
    }

    fn program(ds: &Dataset, text: &str) -> RuleProgram {
        RuleProgram { program: parse_program(text).unwrap(), encoding: Encoding::new(ds, 1) }
    }

    const RULES: &str = "% scale_exponent: 1\n\
        label(X, absent) :- major_vessels(X, 0).\n\
        label(X, absent) :- chest_pain(X, V_chest_pain_0), V_chest_pain_0 != 4, age(X, V_age_1), V_age_1 > 660.\n";

    #[test]
    fn golden_failure_lines() {
        let ds = heart();
        let rp = program(&ds, RULES);
        let x = &ds.instances()[2];
        let pred = Prediction {
            instance: 2,
            label: "present".into(),
            ml_label: "present".into(),
            ml_confidence: 0.55,
            asp_label: "present".into(),
            source: Source::AspDefault,
            corrected: false,
            fired_rule: None,
        };
        let e = explain(&rp, &ds, x, &pred).unwrap();
        assert_eq!(e.feature_line(), "{'major_vessels': '2', 'chest_pain': '4', 'age': 60.0}");
        let lines: Vec<&str> = e.points.iter().map(|p| p.text.as_str()).collect();
        assert_eq!(
            lines,
            vec![
                "label(X,'absent') does not hold because the value of major_vessels is '2' which should equal '0' does not hold",
                "label(X,'absent') does not hold because the value of chest_pain is '4' which should not equal '4' does not hold and the value of age is 60.0 which should be greater than 66.0 does not hold",
            ]
        );
        for p in &e.points {
            assert!(e.features.iter().any(|(k, _)| p.text.contains(k.as_str())));
        }
    }

    #[test]
    fn exceptions_nest() {
        let ds = heart();
        let rp = program(
            &ds,
            "% scale_exponent: 1\n\
             label(X, absent) :- chest_pain(X, V_chest_pain_0), V_chest_pain_0 != 2, not ab1(X, true).\n\
             ab1(X, true) :- major_vessels(X, 2).\n",
        );
        let x = &ds.instances()[0];
        let (label, fired) = asp_predict(&rp, &ds, x).unwrap();
        assert_eq!((label.as_str(), fired), ("absent", Some(0)));
        let pred = Prediction {
            instance: 0,
            label: label.clone(),
            ml_label: "present".into(),
            ml_confidence: 0.5,
            asp_label: label,
            source: Source::AspRule,
            corrected: true,
            fired_rule: fired,
        };
        let e = explain(&rp, &ds, x, &pred).unwrap();
        assert_eq!(e.points.len(), 2);
        assert_eq!(
            e.points[0].text,
            "label(X,'absent') holds because the value of chest_pain is '3' which should not equal '2' holds and the exception ab1 does not apply"
        );
        assert_eq!(e.points[1].depth, 1);
        assert_eq!(
            e.points[1].text,
            "ab1(X,true) does not hold because the value of major_vessels is '0' which should equal '2' does not hold"
        );
        let text = e.to_string();
        assert!(text.contains("Final Label: absent (source: asp_rule, corrected)"));

        let blocked = &ds.instances()[2];
        let (label, fired) = asp_predict(&rp, &ds, blocked).unwrap();
        assert_eq!((label.as_str(), fired), ("present", None));
    }

    #[test]
    fn empty_program_explains_default() {
        let ds = heart();
        let rp = program(&ds, "% scale_exponent: 1\n");
        let x = &ds.instances()[0];
        let (label, _) = asp_predict(&rp, &ds, x).unwrap();
        assert_eq!(label, "present");
        let pred = Prediction {
            instance: 0,
            label: label.clone(),
            ml_label: label.clone(),
            ml_confidence: 0.5,
            asp_label: label,
            source: Source::AspDefault,
            corrected: false,
            fired_rule: None,
        };
        let e = explain(&rp, &ds, x, &pred).unwrap();
        assert_eq!(e.points.len(), 1);
        assert!(e.points[0].text.starts_with("no rule applies"));
        assert!(e.features.is_empty());
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let ds = heart();
        let rp = program(&ds, "label(X, absent) :- thal(X, 3).\n");
        assert_eq!(asp_predict(&rp, &ds, &ds.instances()[0]).unwrap_err(), HybridError::SchemaMismatch("thal".into()));
    }

    #[test]
    fn gate_is_strict() {
        let ds = heart();
        let rp = program(&ds, RULES);
        let model = fit(&ClassifierKind::Knn { k: 5 }, &ds, 0).unwrap();
        // k = 5 over 5 rows: every instance gets confidence 3/5.
        for x in ds.instances() {
            let at = hybrid_predict(&model, &rp, &ds, x, &HybridConfig { tau: 0.6 }).unwrap();
            assert_eq!(at.ml_confidence, 0.6);
            assert_ne!(at.source, Source::Ml);
            let below = hybrid_predict(&model, &rp, &ds, x, &HybridConfig { tau: 0.59 }).unwrap();
            assert_eq!(below.source, Source::Ml);
            assert_eq!(below.label, below.ml_label);
            assert!(!below.corrected);
        }
        assert!(HybridConfig { tau: 1.0 }.validate().is_err());
    }

    fn pred(source: Source, label: &str, ml: &str, rule: Option<usize>) -> Prediction {
        Prediction {
            instance: 0,
            label: label.into(),
            ml_label: ml.into(),
            ml_confidence: 0.5,
            asp_label: label.into(),
            source,
            corrected: label != ml,
            fired_rule: rule,
        }
    }

    #[test]
    fn importance_counts_only_true_corrections() {
        let preds = vec![
            pred(Source::AspRule, "a", "b", Some(1)),
            pred(Source::AspRule, "a", "b", Some(0)),
            pred(Source::AspRule, "a", "b", Some(1)),
            pred(Source::AspRule, "a", "b", Some(0)),
            pred(Source::AspRule, "a", "b", Some(2)),
            pred(Source::Ml, "a", "a", None),
        ];
        let truths = ["a", "a", "a", "b", "a", "a"];
        assert_eq!(rule_importance(&preds, &truths), vec![(1, 2), (0, 1), (2, 1)]);
        assert!(rule_importance(&preds[5..], &truths[5..]).is_empty());
    }

    #[test]
    fn class_rule_lookup() {
        let ds = heart();
        let rp = program(&ds, RULES);
        assert_eq!(class_rule_text(&rp, 0).unwrap(), "label(X, absent) :- major_vessels(X, 0).");
        assert!(class_rule_text(&rp, 5).is_none());
    }
}
