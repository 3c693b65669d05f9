use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::forest::ForestParams;
use super::svm::SvmParams;
use crate::error::{Error, Result};

/// Learner hyperparameters.
///
/// The config file is plain `key = value` lines; `#` starts a comment and
/// blank lines are ignored. Every key below is optional, unknown keys are
/// rejected.
///
/// ```text
/// knn_k = 5
/// knn_standardize = true
/// rf_trees = 100
/// rf_min_samples_split = 2
/// rf_bootstrap = true
/// rf_max_features = 0        # 0 = floor(sqrt(D))
/// rf_max_depth = 0           # 0 = unlimited
/// svm_c = 1.0
/// svm_gamma = 0              # 0 = 1 / (D * Var(X))
/// svm_tol = 0.001
/// svm_max_iter_factor = 10   # iteration cap = factor * N
/// svm_standardize = true
/// nb_var_smoothing = 1e-9
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub knn_k: usize,
    pub knn_standardize: bool,
    pub rf_trees: usize,
    pub rf_min_samples_split: usize,
    pub rf_bootstrap: bool,
    pub rf_max_features: usize,
    pub rf_max_depth: usize,
    pub svm_c: f64,
    pub svm_gamma: f64,
    pub svm_tol: f64,
    pub svm_max_iter_factor: usize,
    pub svm_standardize: bool,
    pub nb_var_smoothing: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            knn_k: 5,
            knn_standardize: true,
            rf_trees: 100,
            rf_min_samples_split: 2,
            rf_bootstrap: true,
            rf_max_features: 0,
            rf_max_depth: 0,
            svm_c: 1.0,
            svm_gamma: 0.0,
            svm_tol: 1e-3,
            svm_max_iter_factor: 10,
            svm_standardize: true,
            nb_var_smoothing: 1e-9,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: invalid value {value:?} for {key}")))
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.knn_k < 1 {
            return bad("knn_k must be >= 1");
        }
        if self.rf_trees < 1 {
            return bad("rf_trees must be >= 1");
        }
        if self.rf_min_samples_split < 2 {
            return bad("rf_min_samples_split must be >= 2");
        }
        if !(self.svm_c > 0.0 && self.svm_c.is_finite()) {
            return bad("svm_c must be > 0");
        }
        if !(self.svm_tol > 0.0 && self.svm_tol.is_finite()) {
            return bad("svm_tol must be > 0");
        }
        if !(self.svm_gamma >= 0.0 && self.svm_gamma.is_finite()) {
            return bad("svm_gamma must be >= 0 (0 selects the default)");
        }
        if self.svm_max_iter_factor < 1 {
            return bad("svm_max_iter_factor must be >= 1");
        }
        if !(self.nb_var_smoothing >= 0.0 && self.nb_var_smoothing.is_finite()) {
            return bad("nb_var_smoothing must be >= 0");
        }
        Ok(())
    }

    pub fn parse(content: &str) -> Result<Self> {
        let mut hp = Hyperparams::default();
        for (i, raw) in content.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let (key, value) = text
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "knn_k" => hp.knn_k = parse_value(key, value, line)?,
                "knn_standardize" => hp.knn_standardize = parse_value(key, value, line)?,
                "rf_trees" => hp.rf_trees = parse_value(key, value, line)?,
                "rf_min_samples_split" => hp.rf_min_samples_split = parse_value(key, value, line)?,
                "rf_bootstrap" => hp.rf_bootstrap = parse_value(key, value, line)?,
                "rf_max_features" => hp.rf_max_features = parse_value(key, value, line)?,
                "rf_max_depth" => hp.rf_max_depth = parse_value(key, value, line)?,
                "svm_c" => hp.svm_c = parse_value(key, value, line)?,
                "svm_gamma" => hp.svm_gamma = parse_value(key, value, line)?,
                "svm_tol" => hp.svm_tol = parse_value(key, value, line)?,
                "svm_max_iter_factor" => hp.svm_max_iter_factor = parse_value(key, value, line)?,
                "svm_standardize" => hp.svm_standardize = parse_value(key, value, line)?,
                "nb_var_smoothing" => hp.nb_var_smoothing = parse_value(key, value, line)?,
                other => return Err(Error::Config(format!("line {line}: unknown key {other:?}"))),
            }
        }
        hp.validate()?;
        Ok(hp)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub(crate) fn forest_params(&self) -> ForestParams {
        ForestParams {
            trees: self.rf_trees,
            min_samples_split: self.rf_min_samples_split,
            bootstrap: self.rf_bootstrap,
            max_features: (self.rf_max_features > 0).then_some(self.rf_max_features),
            max_depth: (self.rf_max_depth > 0).then_some(self.rf_max_depth),
        }
    }

    pub(crate) fn svm_params(&self) -> SvmParams {
        SvmParams {
            c: self.svm_c,
            gamma: (self.svm_gamma > 0.0).then_some(self.svm_gamma),
            tol: self.svm_tol,
            max_iter_factor: self.svm_max_iter_factor,
        }
    }
}
