//! From-scratch classifiers (k-NN, Gaussian naive Bayes, random forest,
//! RBF-kernel SVM) and the plurality-vote ensemble over them.

mod config;
pub mod forest;
pub mod knn;
pub mod naive_bayes;
pub mod svm;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::EntailmentLabel;
use crate::error::{Error, Result};

pub use config::Hyperparams;
pub use forest::RandomForest;
pub use knn::Knn;
pub use naive_bayes::GaussianNb;
pub use svm::SvmRbf;

/// Row-major N x D feature matrix with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<EntailmentLabel>,
    dim: usize,
    schema: Vec<String>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<EntailmentLabel>, schema: Vec<String>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Data("dataset has no rows".into()));
        }
        if labels.len() != n {
            return Err(Error::Data(format!("{n} rows but {} labels", labels.len())));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::Data("dataset has no features".into()));
        }
        if !schema.is_empty() && schema.len() != dim {
            return Err(Error::Data(format!("schema has {} names for {dim} features", schema.len())));
        }
        let mut features = Vec::with_capacity(n * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("row {i}, feature {j} is not finite")));
            }
            features.extend(row);
        }
        Ok(Dataset {
            features,
            labels,
            dim,
            schema,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + Clone {
        self.features.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> &[EntailmentLabel] {
        &self.labels
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub(crate) fn raw(&self) -> &[f64] {
        &self.features
    }

    /// Labels that occur at least once, in canonical order.
    pub fn classes(&self) -> Vec<EntailmentLabel> {
        EntailmentLabel::ALL
            .into_iter()
            .filter(|l| self.labels.contains(l))
            .collect()
    }

    fn map_rows(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Dataset {
        Dataset {
            features: self.rows().flat_map(f).collect(),
            labels: self.labels.clone(),
            dim: self.dim,
            schema: self.schema.clone(),
        }
    }
}

/// Per-feature standardization fitted on the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Constant features get a unit scale so they map to 0.
    pub fn fit(data: &Dataset) -> Self {
        let n = data.len() as f64;
        let d = data.dim();
        let mut mean = vec![0.0; d];
        for row in data.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in data.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LearnerKind {
    SvmRbf,
    Knn,
    RandomForest,
    GaussianNb,
}

impl LearnerKind {
    /// Ensemble member order, which is also the vote tie-break precedence.
    pub const ENSEMBLE_ORDER: [LearnerKind; 4] = [
        LearnerKind::SvmRbf,
        LearnerKind::Knn,
        LearnerKind::RandomForest,
        LearnerKind::GaussianNb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::SvmRbf => "svm_rbf",
            LearnerKind::Knn => "knn",
            LearnerKind::RandomForest => "random_forest",
            LearnerKind::GaussianNb => "naive_bayes",
        }
    }

    /// Seed offset from the master seed; the corpus split uses offset 0.
    pub fn seed_offset(self) -> u64 {
        match self {
            LearnerKind::RandomForest => 1,
            LearnerKind::SvmRbf => 2,
            LearnerKind::Knn => 3,
            LearnerKind::GaussianNb => 4,
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ENSEMBLE_ORDER
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown learner {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Knn(Knn),
    GaussianNb(GaussianNb),
    RandomForest(RandomForest),
    SvmRbf(SvmRbf),
    /// Fitted on single-class data: always predicts that class.
    Constant(EntailmentLabel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: LearnerKind,
    pub dim: usize,
    pub scaler: Option<Standardizer>,
    pub params: ModelParams,
}

fn uses_scaler(kind: LearnerKind, hp: &Hyperparams) -> bool {
    match kind {
        LearnerKind::Knn => hp.knn_standardize,
        LearnerKind::SvmRbf => hp.svm_standardize,
        LearnerKind::RandomForest | LearnerKind::GaussianNb => false,
    }
}

pub fn fit(kind: LearnerKind, hp: &Hyperparams, train: &Dataset, seed: u64) -> Result<TrainedModel> {
    hp.validate()?;
    let classes = train.classes();
    if classes.len() == 1 {
        warn!("{kind}: training data has a single class ({}); model is constant", classes[0]);
        return Ok(TrainedModel {
            kind,
            dim: train.dim(),
            scaler: None,
            params: ModelParams::Constant(classes[0]),
        });
    }
    let scaler = uses_scaler(kind, hp).then(|| Standardizer::fit(train));
    let scaled;
    let data = match &scaler {
        Some(s) => {
            scaled = train.map_rows(|r| s.transform(r));
            &scaled
        }
        None => train,
    };
    let params = match kind {
        LearnerKind::Knn => ModelParams::Knn(Knn::fit(data, hp.knn_k)),
        LearnerKind::GaussianNb => ModelParams::GaussianNb(GaussianNb::fit(data, hp.nb_var_smoothing)),
        LearnerKind::RandomForest => ModelParams::RandomForest(RandomForest::fit(data, &hp.forest_params(), seed)),
        LearnerKind::SvmRbf => ModelParams::SvmRbf(SvmRbf::fit(data, &hp.svm_params())?),
    };
    Ok(TrainedModel {
        kind,
        dim: train.dim(),
        scaler,
        params,
    })
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64]) -> Result<EntailmentLabel> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: x.len(),
            });
        }
        let scaled;
        let x = match &self.scaler {
            Some(s) => {
                scaled = s.transform(x);
                &scaled[..]
            }
            None => x,
        };
        Ok(match &self.params {
            ModelParams::Knn(m) => m.predict(x),
            ModelParams::GaussianNb(m) => m.predict(x),
            ModelParams::RandomForest(m) => m.predict(x),
            ModelParams::SvmRbf(m) => m.predict(x),
            ModelParams::Constant(l) => *l,
        })
    }
}

pub fn predict(model: &TrainedModel, x: &[f64]) -> Result<EntailmentLabel> {
    model.predict(x)
}

/// Plurality vote; ties go to the earliest voter whose label is among the tied ones.
pub fn plurality_vote(votes: &[EntailmentLabel]) -> Option<EntailmentLabel> {
    let mut counts = [0usize; 3];
    for v in votes {
        counts[v.index()] += 1;
    }
    let best = *counts.iter().max()?;
    votes.iter().copied().find(|v| counts[v.index()] == best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    members: Vec<TrainedModel>,
}

impl EnsembleModel {
    pub fn new(members: Vec<TrainedModel>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::Config("an ensemble needs at least two members".into()));
        }
        let dim = members[0].dim;
        if members.iter().any(|m| m.dim != dim) {
            return Err(Error::Config("ensemble members disagree on feature dimension".into()));
        }
        Ok(EnsembleModel { members })
    }

    pub fn members(&self) -> &[TrainedModel] {
        &self.members
    }

    pub fn member_votes(&self, x: &[f64]) -> Result<Vec<EntailmentLabel>> {
        self.members.iter().map(|m| m.predict(x)).collect()
    }

    pub fn predict(&self, x: &[f64]) -> Result<EntailmentLabel> {
        let votes = self.member_votes(x)?;
        Ok(plurality_vote(&votes).expect("ensemble has members"))
    }
}

pub fn ensemble_predict(ensemble: &EnsembleModel, x: &[f64]) -> Result<EntailmentLabel> {
    ensemble.predict(x)
}

pub const MODEL_MAGIC: &str = "ENTK1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SavedModel {
    Single(TrainedModel),
    Ensemble(EnsembleModel),
}

/// Writes `ENTK1\n` followed by a JSON body.
pub fn save_model<W: Write>(mut out: W, model: &SavedModel) -> Result<()> {
    let ser = |e: serde_json::Error| Error::Model(e.to_string());
    writeln!(out, "{MODEL_MAGIC}").map_err(|e| Error::Model(e.to_string()))?;
    serde_json::to_writer(&mut out, model).map_err(ser)?;
    writeln!(out).map_err(|e| Error::Model(e.to_string()))?;
    Ok(())
}

pub fn load_model<R: BufRead>(mut input: R) -> Result<SavedModel> {
    let mut magic = String::new();
    input
        .read_line(&mut magic)
        .map_err(|e| Error::Model(e.to_string()))?;
    if magic.trim_end() != MODEL_MAGIC {
        return Err(Error::Model(format!(
            "bad magic header {:?}, expected {MODEL_MAGIC:?}",
            magic.trim_end()
        )));
    }
    serde_json::from_reader(input).map_err(|e| Error::Model(e.to_string()))
}
