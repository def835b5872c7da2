//! Repeated stratified-split experiments, metrics and significance tests.

mod stats;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Number, Value as Json};
use thiserror::Error;

use crate::asp::{print_program, Encoding};
use crate::classifiers::{fit, ClassifierError, ClassifierKind};
use crate::dataset::{stratified_split, Dataset, DatasetError};
use crate::hybrid::{asp_predict, class_rule_text, hybrid_predict, rule_importance, HybridConfig, HybridError, Prediction, RuleProgram};
use crate::induction::{learn, LearnerParams};

pub use stats::{ln_gamma, paired_t_test, regularized_incomplete_beta, student_t_two_tailed, TTest};

pub const SIGNIFICANCE: f64 = 0.05;
pub const TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("paired samples differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("a paired t-test needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("an experiment needs at least 2 runs, got {0}")]
    TooFewRuns(usize),
    #[error("invalid learner parameters: {0}")]
    Learner(String),
    #[error("run with seed {seed}: {source}")]
    Run { seed: u64, source: Box<EvalError> },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Hybrid(#[from] HybridError),
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, predicted_positive: bool, actually_positive: bool) {
        match (predicted_positive, actually_positive) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    /// Tallies predicted labels against true labels for `positive`.
    pub fn from_labels<'a>(predicted: impl IntoIterator<Item = &'a str>, truth: impl IntoIterator<Item = &'a str>, positive: &str) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (p, t) in predicted.into_iter().zip(truth) {
            cm.record(p == positive, t == positive);
        }
        cm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 4] = ["accuracy", "precision", "recall", "f1"];

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "accuracy" => Some(self.accuracy),
            "precision" => Some(self.precision),
            "recall" => Some(self.recall),
            "f1" => Some(self.f1),
            _ => None,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Each metric is one integer division, so it is the correctly rounded
/// value of the exact ratio. F1 uses `2tp / (2tp + fp + fn)`, which equals
/// the harmonic mean of precision and recall.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    Ok(Metrics {
        accuracy: ratio(cm.tp + cm.tn, total),
        precision: ratio(cm.tp, cm.tp + cm.fp),
        recall: ratio(cm.tp, cm.tp + cm.fn_),
        f1: ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemResult {
    pub matrix: ConfusionMatrix,
    pub metrics: Metrics,
}

impl SystemResult {
    fn new(matrix: ConfusionMatrix) -> Result<Self> {
        Ok(SystemResult { metrics: metrics(&matrix)?, matrix })
    }
}

/// The three compared systems, in report order.
pub const SYSTEMS: [&str; 3] = ["ml", "asp", "hybrid"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub ml: SystemResult,
    pub asp: SystemResult,
    pub hybrid: SystemResult,
    pub rules: usize,
    pub corrections: usize,
}

impl RunResult {
    pub fn system(&self, name: &str) -> Option<&SystemResult> {
        match name {
            "ml" => Some(&self.ml),
            "asp" => Some(&self.asp),
            "hybrid" => Some(&self.hybrid),
            _ => None,
        }
    }
}

/// Everything one run produced, kept for explanations and program export.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub result: RunResult,
    pub program: RuleProgram,
    pub test: Dataset,
    pub predictions: Vec<Prediction>,
    /// (rule text, correction count), ranked.
    pub importance: Vec<(String, usize)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset_id: String,
    pub classifier: ClassifierKind,
    pub learner: LearnerParams,
    pub hybrid: HybridConfig,
    pub runs: usize,
    pub base_seed: u64,
    /// Fixed-point digits for numeric constants; `None` picks the smallest
    /// exact scale, at least 1.
    pub scale_digits: Option<u32>,
}

impl ExperimentConfig {
    pub fn new(dataset_id: impl Into<String>, classifier: ClassifierKind) -> Self {
        ExperimentConfig {
            dataset_id: dataset_id.into(),
            classifier,
            learner: LearnerParams::default(),
            hybrid: HybridConfig::default(),
            runs: 10,
            base_seed: 0,
            scale_digits: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if xs.len() > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        Summary { mean, sd }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub dataset: String,
    pub classifier: ClassifierKind,
    pub learner: LearnerParams,
    pub hybrid: HybridConfig,
    pub base_seed: u64,
    pub runs: Vec<RunResult>,
    /// system → metric → summary.
    pub aggregates: BTreeMap<&'static str, BTreeMap<&'static str, Summary>>,
    /// Accuracy, classifier vs hybrid.
    pub ttest: TTest,
    /// F1, classifier vs hybrid.
    pub ttest_f1: TTest,
    /// (rule text, corrections) summed over runs, ranked.
    pub rule_importance: Vec<(String, usize)>,
    /// (seed, program text); filled only when the accuracy test is
    /// significant.
    pub programs: Vec<(u64, String)>,
}

impl ExperimentReport {
    pub fn significant(&self) -> bool {
        self.ttest.significant(SIGNIFICANCE)
    }

    pub fn mean(&self, system: &str, metric: &str) -> Option<f64> {
        let system = SYSTEMS.iter().find(|s| **s == system)?;
        let metric = Metrics::NAMES.iter().find(|m| **m == metric)?;
        self.aggregates.get(system)?.get(metric).map(|s| s.mean)
    }

    /// Report JSON with stable key order and 6-decimal numbers.
    pub fn to_json(&self) -> Json {
        let runs: Vec<Json> = self
            .runs
            .iter()
            .map(|r| {
                let mut o = Map::new();
                o.insert("seed".into(), json!(r.seed));
                for s in SYSTEMS {
                    let sys = r.system(s).expect("known system");
                    let m = &sys.matrix;
                    let mut metrics = Map::new();
                    for name in Metrics::NAMES {
                        metrics.insert(name.into(), fixed6(sys.metrics.get(name).expect("known metric")));
                    }
                    o.insert(
                        s.into(),
                        json!({"matrix": {"tp": m.tp, "fp": m.fp, "fn": m.fn_, "tn": m.tn}, "metrics": Json::Object(metrics)}),
                    );
                }
                o.insert("rules".into(), json!(r.rules));
                o.insert("corrections".into(), json!(r.corrections));
                Json::Object(o)
            })
            .collect();
        let mut aggregates = Map::new();
        for system in SYSTEMS {
            let by_metric = &self.aggregates[system];
            let mut o = Map::new();
            for name in Metrics::NAMES {
                let s = by_metric[name];
                o.insert(name.into(), json!({"mean": fixed6(s.mean), "sd": fixed6(s.sd)}));
            }
            aggregates.insert(system.into(), Json::Object(o));
        }
        let mut top = Map::new();
        top.insert("dataset".into(), json!(self.dataset));
        top.insert("classifier".into(), json!(self.classifier.short_name()));
        top.insert("params".into(), self.params_json());
        top.insert("runs".into(), Json::Array(runs));
        top.insert("aggregates".into(), Json::Object(aggregates));
        top.insert("ttest".into(), ttest_json(&self.ttest));
        top.insert("ttest_f1".into(), ttest_json(&self.ttest_f1));
        top.insert(
            "rule_importance".into(),
            Json::Array(self.rule_importance.iter().map(|(rule, n)| json!({"rule": rule, "corrections": n})).collect()),
        );
        top.insert(
            "programs".into(),
            Json::Array(self.programs.iter().map(|(seed, text)| json!({"seed": seed, "program": text})).collect()),
        );
        Json::Object(top)
    }

    fn params_json(&self) -> Json {
        let clf = match &self.classifier {
            ClassifierKind::Knn { k } => json!({"k": k}),
            ClassifierKind::RandomForest { trees, max_depth } => json!({"trees": trees, "max_depth": max_depth}),
            ClassifierKind::Mlp { hidden, epochs, learning_rate } => {
                json!({"hidden": hidden, "epochs": epochs, "learning_rate": fixed6(*learning_rate)})
            }
            ClassifierKind::LinearSvm { epochs, regularization } => {
                json!({"epochs": epochs, "regularization": fixed6(*regularization)})
            }
        };
        let l = &self.learner;
        json!({
            "classifier": clf,
            "learner": {
                "ratio": fixed6(l.ratio),
                "max_rule_literals": l.max_rule_literals,
                "max_exception_depth": l.max_exception_depth,
                "tail_fraction": fixed6(l.tail_fraction),
            },
            "tau": fixed6(self.hybrid.tau),
            "n_runs": self.runs.len(),
            "base_seed": self.base_seed,
            "test_fraction": fixed6(TEST_FRACTION),
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A JSON number printed with exactly six decimals. Non-finite values
/// become the strings `inf`, `-inf` or `nan`.
pub fn fixed6(x: f64) -> Json {
    if x.is_finite() {
        let text = format!("{x:.6}");
        Json::Number(text.parse::<Number>().expect("decimal literal parses"))
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn ttest_json(t: &TTest) -> Json {
    match t {
        TTest::NotApplicable => json!("n/a"),
        TTest::Computed { t, p } => json!({"t": fixed6(*t), "p": fixed6(*p), "significant": *p < SIGNIFICANCE}),
    }
}

/// One seed: split, fit, learn, translate, predict.
pub fn run_once(ds: &Dataset, cfg: &ExperimentConfig, seed: u64) -> Result<RunArtifacts> {
    let (train, test) = stratified_split(ds, TEST_FRACTION, seed)?;
    let model = fit(&cfg.classifier, &train, seed)?;
    let rules = learn(&train, ds.positive_class(), &cfg.learner);
    let scale = cfg.scale_digits.unwrap_or_else(|| ds.decimal_digits(1));
    let program = RuleProgram::from_ruleset(&rules, Encoding::new(ds, scale))?;

    let mut predictions = Vec::with_capacity(test.len());
    let mut asp_labels = Vec::with_capacity(test.len());
    for x in test.instances() {
        predictions.push(hybrid_predict(&model, &program, &test, x, &cfg.hybrid)?);
        asp_labels.push(asp_predict(&program, &test, x)?.0);
    }
    let truth: Vec<&str> = test.instances().iter().map(|x| test.label_of(x).unwrap_or_default()).collect();
    let positive = ds.positive_class();
    let ml = ConfusionMatrix::from_labels(predictions.iter().map(|p| p.ml_label.as_str()), truth.iter().copied(), positive);
    let asp = ConfusionMatrix::from_labels(asp_labels.iter().map(String::as_str), truth.iter().copied(), positive);
    let hybrid = ConfusionMatrix::from_labels(predictions.iter().map(|p| p.label.as_str()), truth.iter().copied(), positive);
    let importance: Vec<(String, usize)> = rule_importance(&predictions, &truth)
        .into_iter()
        .filter_map(|(i, n)| class_rule_text(&program, i).map(|t| (t, n)))
        .collect();
    Ok(RunArtifacts {
        result: RunResult {
            seed,
            ml: SystemResult::new(ml)?,
            asp: SystemResult::new(asp)?,
            hybrid: SystemResult::new(hybrid)?,
            rules: rules.rules.len(),
            corrections: importance.iter().map(|(_, n)| n).sum(),
        },
        program,
        test,
        predictions,
        importance,
    })
}

/// Runs seeds `base_seed .. base_seed + runs` in parallel and reduces the
/// results in seed order. Any failing seed fails the whole experiment.
pub fn run_experiments(ds: &Dataset, cfg: &ExperimentConfig) -> Result<(ExperimentReport, Vec<RunArtifacts>)> {
    if cfg.runs < 2 {
        return Err(EvalError::TooFewRuns(cfg.runs));
    }
    cfg.learner.validate().map_err(EvalError::Learner)?;
    cfg.classifier.validate()?;
    cfg.hybrid.validate()?;
    let artifacts = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.base_seed + i;
            run_once(ds, cfg, seed).map_err(|e| EvalError::Run { seed, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let runs: Vec<RunResult> = artifacts.iter().map(|a| a.result.clone()).collect();

    let series = |system: &str, metric: &str| -> Vec<f64> {
        runs.iter().map(|r| r.system(system).and_then(|s| s.metrics.get(metric)).expect("known series")).collect()
    };
    let mut aggregates = BTreeMap::new();
    for system in SYSTEMS {
        let by_metric = Metrics::NAMES.iter().map(|&m| (m, Summary::of(&series(system, m)))).collect();
        aggregates.insert(system, by_metric);
    }
    let ttest = paired_t_test(&series("ml", "accuracy"), &series("hybrid", "accuracy"))?;
    let ttest_f1 = paired_t_test(&series("ml", "f1"), &series("hybrid", "f1"))?;

    let mut totals: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (order, (rule, n)) in artifacts.iter().flat_map(|a| &a.importance).enumerate() {
        let e = totals.entry(rule.clone()).or_insert((0, order));
        e.0 += n;
    }
    let mut rule_importance: Vec<(String, usize, usize)> = totals.into_iter().map(|(r, (n, o))| (r, n, o)).collect();
    rule_importance.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));

    let significant = ttest.significant(SIGNIFICANCE);
    let programs = if significant {
        artifacts.iter().map(|a| (a.result.seed, print_program(&a.program.program))).collect()
    } else {
        Vec::new()
    };
    let report = ExperimentReport {
        dataset: cfg.dataset_id.clone(),
        classifier: cfg.classifier.clone(),
        learner: cfg.learner.clone(),
        hybrid: cfg.hybrid,
        base_seed: cfg.base_seed,
        runs,
        aggregates,
        ttest,
        ttest_f1,
        rule_importance: rule_importance.into_iter().map(|(r, n, _)| (r, n)).collect(),
        programs,
    };
    Ok((report, artifacts))
}
