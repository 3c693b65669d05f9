//! RBF-kernel support vector machine trained with SMO.
//!
//! The binary solver uses maximal-violating-pair selection with second-order
//! information for the second index, and stops once the dual optimality gap
//! `m(a) - M(a)` drops below `tol`. Multiclass is one-vs-rest; prediction
//! takes the class with the largest decision value.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::corpus::EntailmentLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    /// `None` selects `1 / (D * Var(X))`.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter_factor: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_iter_factor: 10,
        }
    }
}

const TAU: f64 = 1e-12;

/// Cached Gram matrices above this many entries are not materialized.
const MAX_GRAM_ENTRIES: usize = 150_000_000;

/// `1 / (D * Var(X))` over every entry of the matrix; 1.0 when the variance is zero.
pub fn scale_gamma(data: &Dataset) -> f64 {
    let x = data.raw();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (data.dim() as f64 * var)
    } else {
        1.0
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

/// Kernel rows over the training set; a full `f32` Gram matrix when it
/// fits, otherwise rows recomputed on demand.
pub struct Gram<'a> {
    data: &'a Dataset,
    gamma: f64,
    full: Option<Vec<f32>>,
}

impl<'a> Gram<'a> {
    pub fn new(data: &'a Dataset, gamma: f64) -> Self {
        let n = data.len();
        let full = (n * n <= MAX_GRAM_ENTRIES).then(|| {
            let mut m = vec![0f32; n * n];
            m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                let xi = data.row(i);
                for (j, out) in row.iter_mut().enumerate() {
                    *out = rbf(xi, data.row(j), gamma) as f32;
                }
            });
            m
        });
        Gram { data, gamma, full }
    }

    fn row_into(&self, i: usize, buf: &mut Vec<f32>) {
        buf.clear();
        match &self.full {
            Some(m) => {
                let n = self.data.len();
                buf.extend_from_slice(&m[i * n..(i + 1) * n]);
            }
            None => {
                let xi = self.data.row(i);
                buf.extend(self.data.rows().map(|xj| rbf(xi, xj, self.gamma) as f32));
            }
        }
    }
}

/// Result of one binary SMO run.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final `m(a) - M(a)`.
    pub gap: f64,
}

/// Solves the C-SVC dual for labels `y` in {-1, +1}.
pub fn solve_binary(gram: &Gram<'_>, y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut qi = Vec::with_capacity(n);
    let mut qj = Vec::with_capacity(n);
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;
    while iterations < max_iter {
        // first index: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if in_up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            converged = true;
            gap = 0.0;
            break;
        }
        gram.row_into(i, &mut qi);

        // second index: best second-order gain in I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let v = y[t] * grad[t];
            gmax2 = gmax2.max(v);
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                // K_ii = K_tt = 1 for the RBF kernel
                let quad = 2.0 - 2.0 * qi[t] as f64;
                let quad = if quad > 0.0 { quad } else { TAU };
                let obj = -(grad_diff * grad_diff) / quad;
                if obj <= best_obj {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        gap = gmax + gmax2;
        if gap < tol || j == usize::MAX {
            converged = true;
            break;
        }
        gram.row_into(j, &mut qj);

        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let kij = qi[j] as f64;
        let quad = (2.0 - 2.0 * kij).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let dai = (alpha[i] - ai_old) * y[i];
        let daj = (alpha[j] - aj_old) * y[j];
        for t in 0..n {
            // Q_ti = y_t y_i K_ti
            grad[t] += y[t] * (qi[t] as f64 * dai + qj[t] as f64 * daj);
        }
        iterations += 1;
    }
    if !converged {
        warn!("SMO stopped at the iteration cap ({max_iter}) with gap {gap:.3e}");
    }

    // rho: mean of y*grad over free variables, else midpoint of the feasible interval
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    SmoSolution {
        alpha,
        rho,
        iterations,
        converged,
        gap,
    }
}

/// One binary machine: `f(x) = sum coef_i K(sv_i, x) - rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub positive: EntailmentLabel,
    support: Vec<f64>,
    coef: Vec<f64>,
    rho: f64,
}

impl BinarySvm {
    fn from_solution(positive: EntailmentLabel, data: &Dataset, y: &[f64], sol: &SmoSolution) -> Self {
        let mut support = Vec::new();
        let mut coef = Vec::new();
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                support.extend_from_slice(data.row(i));
                coef.push(a * y[i]);
            }
        }
        BinarySvm {
            positive,
            support,
            coef,
            rho: sol.rho,
        }
    }

    pub fn decision(&self, x: &[f64], gamma: f64) -> f64 {
        let d = x.len();
        self.support
            .chunks_exact(d)
            .zip(&self.coef)
            .map(|(sv, c)| c * rbf(sv, x, gamma))
            .sum::<f64>()
            - self.rho
    }

    pub fn support_count(&self) -> usize {
        self.coef.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmRbf {
    gamma: f64,
    machines: Vec<BinarySvm>,
}

impl SvmRbf {
    pub fn fit(data: &Dataset, params: &SvmParams) -> Result<Self> {
        let classes = data.classes();
        if classes.len() < 2 {
            return Err(Error::Data("SVM needs at least two classes".into()));
        }
        let gamma = params.gamma.unwrap_or_else(|| scale_gamma(data));
        let gram = Gram::new(data, gamma);
        let max_iter = params.max_iter_factor.saturating_mul(data.len()).max(1);
        let machines = classes
            .par_iter()
            .map(|&cls| {
                let y: Vec<f64> = data
                    .labels()
                    .iter()
                    .map(|&l| if l == cls { 1.0 } else { -1.0 })
                    .collect();
                let sol = solve_binary(&gram, &y, params.c, params.tol, max_iter);
                BinarySvm::from_solution(cls, data, &y, &sol)
            })
            .collect();
        Ok(SvmRbf { gamma, machines })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn machines(&self) -> &[BinarySvm] {
        &self.machines
    }

    pub fn decision_values(&self, x: &[f64]) -> Vec<(EntailmentLabel, f64)> {
        self.machines
            .iter()
            .map(|m| (m.positive, m.decision(x, self.gamma)))
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> EntailmentLabel {
        let mut best: Option<(EntailmentLabel, f64)> = None;
        for (label, v) in self.decision_values(x) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((label, v));
            }
        }
        best.expect("at least two machines").0
    }
}

/// Largest KKT violation of a solution, recomputed from the kernel:
/// `y_i f(x_i) >= 1` at `a_i = 0`, `<= 1` at `a_i = C`, `= 1` otherwise.
pub fn max_kkt_violation(data: &Dataset, y: &[f64], sol: &SmoSolution, c: f64, gamma: f64) -> f64 {
    let n = y.len();
    (0..n)
        .map(|i| {
            let f: f64 = (0..n)
                .filter(|&j| sol.alpha[j] > 0.0)
                .map(|j| sol.alpha[j] * y[j] * rbf(data.row(j), data.row(i), gamma))
                .sum::<f64>()
                - sol.rho;
            let m = y[i] * f - 1.0;
            if sol.alpha[i] <= 0.0 {
                (-m).max(0.0)
            } else if sol.alpha[i] >= c {
                m.max(0.0)
            } else {
                m.abs()
            }
        })
        .fold(0.0, f64::max)
}
