use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::corpus::EntailmentLabel;

/// Gaussian naive Bayes.
///
/// Per-class variances are floored at `smoothing * max_j Var(X_j)` (with
/// `smoothing` itself as the floor when every feature is constant).
/// Equal posteriors resolve to the earliest class in label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    classes: Vec<ClassStats>,
    var_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassStats {
    label: EntailmentLabel,
    log_prior: f64,
    mean: Vec<f64>,
    var: Vec<f64>,
}

fn mean_var<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, dim: usize) -> (Vec<f64>, Vec<f64>, usize) {
    let mut mean = vec![0.0; dim];
    let mut n = 0usize;
    for r in rows.clone() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
        n += 1;
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; dim];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n as f64);
    (mean, var, n)
}

impl GaussianNb {
    pub fn fit(train: &Dataset, smoothing: f64) -> Self {
        let dim = train.dim();
        let (_, all_var, total) = mean_var(train.rows(), dim);
        let max_var = all_var.iter().cloned().fold(0.0, f64::max);
        let var_floor = if max_var > 0.0 { smoothing * max_var } else { smoothing };
        let classes = train
            .classes()
            .into_iter()
            .map(|label| {
                let rows = train
                    .rows()
                    .zip(train.labels())
                    .filter(move |(_, l)| **l == label)
                    .map(|(r, _)| r);
                let (mean, var, n) = mean_var(rows, dim);
                ClassStats {
                    label,
                    log_prior: (n as f64 / total as f64).ln(),
                    mean,
                    var: var.into_iter().map(|v| v.max(var_floor)).collect(),
                }
            })
            .collect();
        GaussianNb { classes, var_floor }
    }

    /// Unnormalized log posterior per fitted class, in label order.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<(EntailmentLabel, f64)> {
        const LN_2PI: f64 = 1.837_877_066_409_345_5;
        self.classes
            .iter()
            .map(|c| {
                let ll: f64 = x
                    .iter()
                    .zip(&c.mean)
                    .zip(&c.var)
                    .map(|((v, m), s)| -0.5 * (LN_2PI + s.ln()) - (v - m) * (v - m) / (2.0 * s))
                    .sum();
                (c.label, c.log_prior + ll)
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> EntailmentLabel {
        let mut best: Option<(EntailmentLabel, f64)> = None;
        for (label, score) in self.joint_log_likelihood(x) {
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((label, score));
            }
        }
        best.expect("model has classes").0
    }

    pub fn var_floor(&self) -> f64 {
        self.var_floor
    }
}
