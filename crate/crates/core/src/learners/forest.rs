//! Random forest of CART trees split on Gini impurity.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::corpus::EntailmentLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub trees: usize,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    /// Features considered per split; `None` means `floor(sqrt(D))`.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 100,
            min_samples_split: 2,
            bootstrap: true,
            max_features: None,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        /// Class fractions in label order.
        dist: [f64; 3],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

fn gini(counts: &[usize; 3], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    data: &'a Dataset,
    params: &'a ForestParams,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    features: Vec<usize>,
    scratch: Vec<(f64, usize)>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; 3] {
        let mut c = [0; 3];
        for &i in idx {
            c[self.data.labels()[i].index()] += 1;
        }
        c
    }

    fn leaf(&mut self, counts: [usize; 3], n: usize) -> usize {
        let n = n.max(1) as f64;
        self.nodes.push(Node::Leaf {
            dist: counts.map(|c| c as f64 / n),
        });
        self.nodes.len() - 1
    }

    fn find_split(&mut self, idx: &[usize], parent_counts: &[usize; 3]) -> Option<BestSplit> {
        let labels = self.data.labels();
        let n = idx.len();
        self.features.shuffle(&mut self.rng);
        let mut best: Option<BestSplit> = None;
        let mut informative = 0;
        for fi in 0..self.features.len() {
            if informative >= self.mtry {
                break;
            }
            let f = self.features[fi];
            self.scratch.clear();
            self.scratch
                .extend(idx.iter().map(|&i| (self.data.row(i)[f], i)));
            self.scratch
                .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if self.scratch[0].0 == self.scratch[n - 1].0 {
                continue;
            }
            informative += 1;
            let mut left = [0usize; 3];
            for pos in 0..n - 1 {
                let (v, i) = self.scratch[pos];
                left[labels[i].index()] += 1;
                let next = self.scratch[pos + 1].0;
                if next <= v {
                    continue;
                }
                let nl = pos + 1;
                let nr = n - nl;
                let right = [
                    parent_counts[0] - left[0],
                    parent_counts[1] - left[1],
                    parent_counts[2] - left[2],
                ];
                let imp = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
                if best.as_ref().is_none_or(|b| imp < b.impurity) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next || !threshold.is_finite() {
                        threshold = v;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        impurity: imp,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let n = idx.len();
        let counts = self.counts(idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_cap = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || n < self.params.min_samples_split || depth_cap {
            return self.leaf(counts, n);
        }
        let Some(split) = self.find_split(idx, &counts) else {
            return self.leaf(counts, n);
        };
        let data = self.data;
        let mut mid = 0;
        for j in 0..n {
            if data.row(idx[j])[split.feature] <= split.threshold {
                idx.swap(mid, j);
                mid += 1;
            }
        }
        if mid == 0 || mid == n {
            return self.leaf(counts, n);
        }
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { dist: [0.0; 3] });
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[slot] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        slot
    }
}

impl DecisionTree {
    /// Grows one tree over the rows listed in `sample` (duplicates allowed).
    pub fn fit(data: &Dataset, sample: Vec<usize>, params: &ForestParams, rng: ChaCha8Rng) -> Self {
        let d = data.dim();
        let mtry = params
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
            .clamp(1, d);
        let mut b = Builder {
            data,
            params,
            mtry,
            rng,
            nodes: Vec::new(),
            features: (0..d).collect(),
            scratch: Vec::with_capacity(sample.len()),
        };
        let mut sample = sample;
        b.grow(&mut sample, 0);
        DecisionTree { nodes: b.nodes }
    }

    pub fn distribution(&self, x: &[f64]) -> [f64; 3] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { dist } => return *dist,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

fn argmax_first(dist: &[f64; 3]) -> EntailmentLabel {
    let mut best = 0;
    for i in 1..3 {
        if dist[i] > dist[best] {
            best = i;
        }
    }
    EntailmentLabel::ALL[best]
}

/// Bagged trees; prediction is the arg-max of the averaged leaf class
/// fractions, ties to the earliest label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `t` draws from the ChaCha8 stream `t` of `seed`, so the result
    /// does not depend on thread scheduling.
    pub fn fit(data: &Dataset, params: &ForestParams, seed: u64) -> Self {
        let n = data.len();
        let trees = (0..params.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let sample: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(data, sample, params, rng)
            })
            .collect();
        RandomForest { trees }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn predict(&self, x: &[f64]) -> EntailmentLabel {
        let mut acc = [0.0; 3];
        for t in &self.trees {
            let d = t.distribution(x);
            for k in 0..3 {
                acc[k] += d[k];
            }
        }
        argmax_first(&acc)
    }
}
