use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sigmoid;

/// Linear SVM trained with Pegasos (hinge loss plus L2). The bias is a
/// weight on a constant feature. Probabilities are `sigmoid(margin)`.
#[derive(Debug, Clone)]
pub struct LinearSvm {
    weights: Vec<f64>,
}

impl LinearSvm {
    pub fn fit(xs: &[Vec<f64>], ys: &[bool], epochs: usize, lambda: f64, seed: u64) -> LinearSvm {
        let width = xs.first().map_or(0, Vec::len) + 1;
        let mut w = vec![0.0; width];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = xs.len();
        let mut t = 0usize;
        for _ in 0..epochs * n {
            t += 1;
            let i = rng.random_range(0..n);
            let y = if ys[i] { 1.0 } else { -1.0 };
            let eta = 1.0 / (lambda * t as f64);
            let margin = y * dot(&w, &xs[i]);
            for wj in w.iter_mut() {
                *wj *= 1.0 - eta * lambda;
            }
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(xs[i].iter().chain([1.0].iter())) {
                    *wj += eta * y * xj;
                }
            }
        }
        LinearSvm { weights: w }
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x)
    }

    pub fn proba_positive(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

/// `w · [x, 1]`.
fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x.iter().chain([1.0].iter())).map(|(a, b)| a * b).sum()
}
