//! Sentence vectors built from word vectors.
//!
//! [`represent_thresholded`] accumulates word vectors element by element,
//! admitting element `i` of a word vector `x` only when it differs from the
//! running sentence value by at least `alpha = mean(x) + std(x)`. The first
//! in-vocabulary word is taken whole. [`represent_plain`] is the ordinary
//! element-wise mean.

use serde::{Deserialize, Serialize};

use crate::embedstore::EmbeddingStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Thresholded,
    PlainMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub values: Vec<f64>,
    pub in_vocab_count: usize,
    pub strategy: Strategy,
}

impl SentenceVector {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

/// Gate statistics of a single word vector. `std` is the population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdStats {
    pub mean: f64,
    pub std: f64,
    pub alpha: f64,
}

impl ThresholdStats {
    pub fn of(x: &[f64]) -> Self {
        let k = x.len() as f64;
        let mean = x.iter().sum::<f64>() / k;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
        let std = var.sqrt();
        ThresholdStats {
            mean,
            std,
            alpha: mean + std,
        }
    }
}

pub fn represent_thresholded<S: AsRef<str>>(tokens: &[S], store: &EmbeddingStore) -> SentenceVector {
    let mut acc = vec![0.0; store.dimension()];
    let mut in_vocab = 0;
    for x in tokens.iter().filter_map(|t| store.lookup(t.as_ref())) {
        if in_vocab == 0 {
            acc.copy_from_slice(x);
        } else {
            let alpha = ThresholdStats::of(x).alpha;
            for (s, &v) in acc.iter_mut().zip(x) {
                if (*s - v).abs() >= alpha {
                    *s += v;
                }
            }
        }
        in_vocab += 1;
    }
    SentenceVector {
        values: acc,
        in_vocab_count: in_vocab,
        strategy: Strategy::Thresholded,
    }
}

pub fn represent_plain<S: AsRef<str>>(tokens: &[S], store: &EmbeddingStore) -> SentenceVector {
    let mut acc = vec![0.0; store.dimension()];
    let mut in_vocab = 0;
    for x in tokens.iter().filter_map(|t| store.lookup(t.as_ref())) {
        for (s, v) in acc.iter_mut().zip(x) {
            *s += v;
        }
        in_vocab += 1;
    }
    if in_vocab > 0 {
        let n = in_vocab as f64;
        acc.iter_mut().for_each(|s| *s /= n);
    }
    SentenceVector {
        values: acc,
        in_vocab_count: in_vocab,
        strategy: Strategy::PlainMean,
    }
}

pub fn represent<S: AsRef<str>>(tokens: &[S], store: &EmbeddingStore, strategy: Strategy) -> SentenceVector {
    match strategy {
        Strategy::Thresholded => represent_thresholded(tokens, store),
        Strategy::PlainMean => represent_plain(tokens, store),
    }
}
