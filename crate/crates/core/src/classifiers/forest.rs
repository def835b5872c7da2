use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Proba;

#[derive(Debug, Clone)]
enum Node {
    Leaf(bool),
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

impl Node {
    fn predict(&self, x: &[f64]) -> bool {
        match self {
            Node::Leaf(c) => *c,
            Node::Split { feature, threshold, left, right } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [bool],
    max_features: usize,
    max_depth: Option<usize>,
}

impl Grower<'_> {
    fn majority(&self, rows: &[usize]) -> bool {
        let pos = rows.iter().filter(|&&i| self.ys[i]).count();
        2 * pos > rows.len()
    }

    /// Best (feature, threshold, impurity) over a random feature subset.
    fn best_split(&self, rows: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let width = self.xs[rows[0]].len();
        let all: Vec<usize> = (0..width).collect();
        let candidates: Vec<usize> = all.choose_multiple(rng, self.max_features.min(width)).copied().collect();
        let total_pos = rows.iter().filter(|&&i| self.ys[i]).count();
        let n = rows.len();
        let mut best: Option<(f64, usize, f64)> = None;
        for f in candidates {
            let mut sorted: Vec<(f64, bool)> = rows.iter().map(|&i| (self.xs[i][f], self.ys[i])).collect();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for j in 0..n - 1 {
                left_pos += sorted[j].1 as usize;
                if sorted[j].0 == sorted[j + 1].0 {
                    continue;
                }
                let nl = j + 1;
                let score = (nl as f64 * gini(left_pos, nl) + (n - nl) as f64 * gini(total_pos - left_pos, n - nl)) / n as f64;
                if best.is_none_or(|(s, _, _)| score < s - 1e-12) {
                    best = Some((score, f, (sorted[j].0 + sorted[j + 1].0) / 2.0));
                }
            }
        }
        let (score, f, t) = best?;
        (score < gini(total_pos, n) - 1e-12).then_some((f, t))
    }

    fn grow(&self, rows: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> Node {
        let pos = rows.iter().filter(|&&i| self.ys[i]).count();
        if pos == 0 || pos == rows.len() || self.max_depth.is_some_and(|d| depth >= d) {
            return Node::Leaf(self.majority(rows));
        }
        match self.best_split(rows, rng) {
            None => Node::Leaf(self.majority(rows)),
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.xs[i][feature] <= threshold);
                Node::Split {
                    feature,
                    threshold,
                    left: Box::new(self.grow(&l, depth + 1, rng)),
                    right: Box::new(self.grow(&r, depth + 1, rng)),
                }
            }
        }
    }
}

/// Bagged CART trees with Gini splits over `sqrt(width)` random features.
/// The positive probability is the fraction of trees voting positive.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<Node>,
}

impl RandomForest {
    pub fn fit(xs: &[Vec<f64>], ys: &[bool], trees: usize, max_depth: Option<usize>, seed: u64) -> RandomForest {
        let width = xs.first().map_or(0, Vec::len);
        let grower = Grower { xs, ys, max_features: ((width as f64).sqrt().round() as usize).max(1), max_depth };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = xs.len();
        let trees = (0..trees)
            .map(|_| {
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                if width == 0 {
                    Node::Leaf(grower.majority(&rows))
                } else {
                    grower.grow(&rows, 0, &mut rng)
                }
            })
            .collect();
        RandomForest { trees }
    }

    pub fn proba(&self, x: &[f64]) -> Proba {
        let votes = self.trees.iter().filter(|t| t.predict(x)).count();
        Proba::from_positive(votes as f64 / self.trees.len() as f64)
    }
}
