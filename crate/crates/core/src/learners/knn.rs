use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::corpus::EntailmentLabel;

/// k-nearest neighbours with squared Euclidean distance.
///
/// Neighbours are ordered by (distance, training index). A tie in vote
/// counts goes to the class of the nearest neighbour among the tied classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    dim: usize,
    points: Vec<f64>,
    labels: Vec<EntailmentLabel>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Knn {
    pub fn fit(train: &Dataset, k: usize) -> Self {
        Knn {
            k: k.max(1),
            dim: train.dim(),
            points: train.raw().to_vec(),
            labels: train.labels().to_vec(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices of the `k` nearest training points, nearest first.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let mut dists: Vec<(f64, usize)> = self
            .points
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(i, p)| (sq_dist(p, x), i))
            .collect();
        let k = self.k.min(dists.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dists.len() {
            dists.select_nth_unstable_by(k - 1, cmp);
            dists.truncate(k);
        }
        dists.sort_unstable_by(cmp);
        dists.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict(&self, x: &[f64]) -> EntailmentLabel {
        let nn = self.neighbors(x);
        let mut counts = [0usize; 3];
        for &i in &nn {
            counts[self.labels[i].index()] += 1;
        }
        let best = *counts.iter().max().unwrap();
        nn.iter()
            .map(|&i| self.labels[i])
            .find(|l| counts[l.index()] == best)
            .expect("at least one neighbour")
    }
}
