//! Black-box baselines with a shared fit / predict_proba / predict contract.
//!
//! All models see the same feature encoding: categorical attributes one-hot,
//! numeric attributes min-max scaled to `[0, 1]`, both fitted on the
//! training split.

mod forest;
mod knn;
pub mod mlp;
mod svm;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeKind, Dataset, Instance, Value};

pub use forest::RandomForest;
pub use knn::Knn;
pub use mlp::Mlp;
pub use svm::LinearSvm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifierError {
    #[error("training data contains a single class ({0}); cannot fit a classifier")]
    DegenerateTraining(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, ClassifierError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn { k: usize },
    /// `max_depth: None` grows trees until leaves are pure.
    RandomForest { trees: usize, max_depth: Option<usize> },
    Mlp { hidden: Vec<usize>, epochs: usize, learning_rate: f64 },
    LinearSvm { epochs: usize, regularization: f64 },
}

impl ClassifierKind {
    pub fn knn() -> Self {
        ClassifierKind::Knn { k: 5 }
    }

    pub fn random_forest() -> Self {
        ClassifierKind::RandomForest { trees: 100, max_depth: None }
    }

    pub fn mlp() -> Self {
        ClassifierKind::Mlp { hidden: vec![16], epochs: 200, learning_rate: 0.01 }
    }

    pub fn linear_svm() -> Self {
        ClassifierKind::LinearSvm { epochs: 100, regularization: 1e-4 }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            ClassifierKind::Knn { .. } => "knn",
            ClassifierKind::RandomForest { .. } => "rf",
            ClassifierKind::Mlp { .. } => "mlp",
            ClassifierKind::LinearSvm { .. } => "linear_svm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ClassifierError::InvalidParams(m.to_string()));
        match self {
            ClassifierKind::Knn { k } if *k < 1 => bad("k must be at least 1"),
            ClassifierKind::RandomForest { trees, .. } if *trees < 1 => bad("trees must be at least 1"),
            ClassifierKind::RandomForest { max_depth: Some(0), .. } => bad("max_depth must be at least 1"),
            ClassifierKind::Mlp { epochs, .. } | ClassifierKind::LinearSvm { epochs, .. } if *epochs < 1 => {
                bad("epochs must be at least 1")
            }
            ClassifierKind::Mlp { hidden, .. } if hidden.contains(&0) => bad("hidden layers need at least 1 unit"),
            ClassifierKind::Mlp { learning_rate, .. } if !(*learning_rate > 0.0) => bad("learning rate must be positive"),
            ClassifierKind::LinearSvm { regularization, .. } if !(*regularization > 0.0) => {
                bad("regularization must be positive")
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierKind::Knn { k } => write!(f, "knn(k={k})"),
            ClassifierKind::RandomForest { trees, max_depth } => match max_depth {
                Some(d) => write!(f, "rf(trees={trees}, max_depth={d})"),
                None => write!(f, "rf(trees={trees})"),
            },
            ClassifierKind::Mlp { hidden, epochs, learning_rate } => {
                write!(f, "mlp(hidden={hidden:?}, epochs={epochs}, lr={learning_rate})")
            }
            ClassifierKind::LinearSvm { epochs, regularization } => {
                write!(f, "linear_svm(epochs={epochs}, lambda={regularization})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ColumnMap {
    Numeric { column: usize, min: f64, max: f64 },
    OneHot { column: usize, categories: Vec<String> },
}

/// One-hot + min-max encoding fitted on a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTransform {
    maps: Vec<ColumnMap>,
    width: usize,
}

impl FeatureTransform {
    pub fn fit(train: &Dataset) -> FeatureTransform {
        let mut maps = Vec::new();
        for (column, attr) in train.features() {
            let mut nums = Vec::new();
            let mut cats = BTreeSet::new();
            for inst in train.instances() {
                match &inst.values[column] {
                    Value::Num(d) => nums.push(d.to_f64()),
                    Value::Cat(s) => {
                        cats.insert(s.clone());
                    }
                    Value::Missing => {}
                }
            }
            maps.push(match attr.kind {
                AttributeKind::Numeric => {
                    let min = nums.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = nums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    ColumnMap::Numeric { column, min: if min.is_finite() { min } else { 0.0 }, max: if max.is_finite() { max } else { 0.0 } }
                }
                AttributeKind::Categorical => {
                    ColumnMap::OneHot { column, categories: cats.into_iter().collect() }
                }
            });
        }
        let width = maps
            .iter()
            .map(|m| match m {
                ColumnMap::Numeric { .. } => 1,
                ColumnMap::OneHot { categories, .. } => categories.len(),
            })
            .sum();
        FeatureTransform { maps, width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Unseen categories encode as all zeros; missing numerics as 0.
    pub fn transform(&self, inst: &Instance) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width);
        for map in &self.maps {
            match map {
                ColumnMap::Numeric { column, min, max } => {
                    let v = match &inst.values[*column] {
                        Value::Num(d) => d.to_f64(),
                        _ => *min,
                    };
                    let span = max - min;
                    out.push(if span > 0.0 { (v - min) / span } else { 0.0 });
                }
                ColumnMap::OneHot { column, categories } => {
                    let hit = match &inst.values[*column] {
                        Value::Cat(s) => categories.binary_search(s).ok(),
                        _ => None,
                    };
                    out.extend((0..categories.len()).map(|i| if Some(i) == hit { 1.0 } else { 0.0 }));
                }
            }
        }
        out
    }
}

/// Class probabilities for the dataset's positive and negative class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proba {
    pub positive: f64,
    pub negative: f64,
}

impl Proba {
    pub fn from_positive(p: f64) -> Proba {
        let p = p.clamp(0.0, 1.0);
        Proba { positive: p, negative: 1.0 - p }
    }

    pub fn confidence(&self) -> f64 {
        self.positive.max(self.negative)
    }

    /// Exact ties go to the negative class.
    pub fn predicts_positive(&self) -> bool {
        self.positive > self.negative
    }
}

#[derive(Debug, Clone)]
enum Fitted {
    Knn(Knn),
    Forest(RandomForest),
    Mlp(Mlp),
    Svm(LinearSvm),
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    kind: ClassifierKind,
    transform: FeatureTransform,
    positive: String,
    negative: String,
    fitted: Fitted,
}

/// Fits `kind` on `train`; deterministic in (`kind`, `train`, `seed`).
pub fn fit(kind: &ClassifierKind, train: &Dataset, seed: u64) -> Result<TrainedModel> {
    kind.validate()?;
    let classes: BTreeSet<&str> = train.instances().iter().filter_map(|i| train.label_of(i)).collect();
    if classes.len() < 2 {
        return Err(ClassifierError::DegenerateTraining(classes.into_iter().next().unwrap_or("none").to_string()));
    }
    let transform = FeatureTransform::fit(train);
    let xs: Vec<Vec<f64>> = train.instances().iter().map(|i| transform.transform(i)).collect();
    let ys: Vec<bool> = train.instances().iter().map(|i| train.is_positive(i)).collect();
    let fitted = match kind {
        ClassifierKind::Knn { k } => Fitted::Knn(Knn::fit(*k, xs, ys)),
        ClassifierKind::RandomForest { trees, max_depth } => {
            Fitted::Forest(RandomForest::fit(&xs, &ys, *trees, *max_depth, seed))
        }
        ClassifierKind::Mlp { hidden, epochs, learning_rate } => {
            Fitted::Mlp(Mlp::fit(&xs, &ys, hidden, *epochs, *learning_rate, seed))
        }
        ClassifierKind::LinearSvm { epochs, regularization } => {
            Fitted::Svm(LinearSvm::fit(&xs, &ys, *epochs, *regularization, seed))
        }
    };
    Ok(TrainedModel {
        kind: kind.clone(),
        transform,
        positive: train.positive_class().to_string(),
        negative: train.negative_class().to_string(),
        fitted,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> &ClassifierKind {
        &self.kind
    }

    pub fn predict_proba(&self, x: &Instance) -> Proba {
        let features = self.transform.transform(x);
        match &self.fitted {
            Fitted::Knn(m) => m.proba(&features),
            Fitted::Forest(m) => m.proba(&features),
            Fitted::Mlp(m) => Proba::from_positive(m.output(&features)),
            Fitted::Svm(m) => Proba::from_positive(m.proba_positive(&features)),
        }
    }

    pub fn predict(&self, x: &Instance) -> &str {
        self.label_for(&self.predict_proba(x))
    }

    pub fn label_for(&self, p: &Proba) -> &str {
        if p.predicts_positive() {
            &self.positive
        } else {
            &self.negative
        }
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
