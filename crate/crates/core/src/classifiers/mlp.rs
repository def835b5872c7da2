//! Feed-forward network with sigmoid units and a single sigmoid output,
//! trained by per-sample SGD on binary cross-entropy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sigmoid;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `weights[j][i]`: input `i` to unit `j`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// Xavier-uniform initialisation.
    pub fn init(inputs: usize, hidden: &[usize], seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
                Layer {
                    weights: (0..w[1]).map(|_| (0..w[0]).map(|_| rng.random_range(-bound..=bound)).collect()).collect(),
                    bias: vec![0.0; w[1]],
                }
            })
            .collect();
        Mlp { layers }
    }

    pub fn fit(xs: &[Vec<f64>], ys: &[bool], hidden: &[usize], epochs: usize, lr: f64, seed: u64) -> Mlp {
        let width = xs.first().map_or(0, Vec::len);
        let mut net = Mlp::init(width, hidden, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let (_, grads) = net.loss_and_gradient(&xs[i], ys[i]);
                net.step(&grads, lr);
            }
        }
        net
    }

    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        for layer in &self.layers {
            let input = acts.last().unwrap();
            let out = layer
                .weights
                .iter()
                .zip(&layer.bias)
                .map(|(w, b)| sigmoid(w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>() + b))
                .collect();
            acts.push(out);
        }
        acts
    }

    /// Probability of the positive class.
    pub fn output(&self, x: &[f64]) -> f64 {
        self.activations(x).last().unwrap()[0]
    }

    /// Cross-entropy loss for one sample and its gradient, shaped like the
    /// network's layers.
    pub fn loss_and_gradient(&self, x: &[f64], y: bool) -> (f64, Vec<Layer>) {
        let acts = self.activations(x);
        let out = acts.last().unwrap()[0].clamp(1e-15, 1.0 - 1e-15);
        let t = if y { 1.0 } else { 0.0 };
        let loss = -(t * out.ln() + (1.0 - t) * (1.0 - out).ln());
        // Sigmoid output with cross-entropy: dL/dz = a - t.
        let mut delta = vec![acts.last().unwrap()[0] - t];
        let mut grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let input = &acts[l];
            grads.push(Layer {
                weights: delta.iter().map(|d| input.iter().map(|a| d * a).collect()).collect(),
                bias: delta.clone(),
            });
            if l > 0 {
                let layer = &self.layers[l];
                delta = (0..input.len())
                    .map(|i| {
                        let back: f64 = layer.weights.iter().zip(&delta).map(|(w, d)| w[i] * d).sum();
                        back * input[i] * (1.0 - input[i])
                    })
                    .collect();
            }
        }
        grads.reverse();
        (loss, grads)
    }

    fn step(&mut self, grads: &[Layer], lr: f64) {
        for (layer, g) in self.layers.iter_mut().zip(grads) {
            for (w, gw) in layer.weights.iter_mut().zip(&g.weights) {
                for (a, b) in w.iter_mut().zip(gw) {
                    *a -= lr * b;
                }
            }
            for (b, gb) in layer.bias.iter_mut().zip(&g.bias) {
                *b -= lr * gb;
            }
        }
    }
}
