use super::Proba;

/// k-nearest neighbours under Euclidean distance. Distance ties are broken
/// by training index, so results do not depend on sort stability.
#[derive(Debug, Clone)]
pub struct Knn {
    k: usize,
    xs: Vec<Vec<f64>>,
    ys: Vec<bool>,
}

impl Knn {
    pub fn fit(k: usize, xs: Vec<Vec<f64>>, ys: Vec<bool>) -> Knn {
        Knn { k, xs, ys }
    }

    pub fn proba(&self, x: &[f64]) -> Proba {
        let mut dists: Vec<(f64, usize)> = self
            .xs
            .iter()
            .enumerate()
            .map(|(i, t)| (t.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(dists.len());
        let pos = dists[..k].iter().filter(|(_, i)| self.ys[*i]).count();
        Proba::from_positive(pos as f64 / k as f64)
    }
}
