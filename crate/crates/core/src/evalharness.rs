//! End-to-end experiments: split, featurize, train the four learners and the
//! ensemble, score the held-out partition.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{load_corpus, split_corpus, ColumnMap, EntailmentLabel, LabeledPair};
use crate::embedstore::EmbeddingStore;
use crate::error::{Error, Result, StageExt};
use crate::features::{assemble, FeatureSet, Stores};
use crate::learners::{fit, plurality_vote, Dataset, EnsembleModel, Hyperparams, LearnerKind};
use crate::textprep::{preprocess, PrepConfig, TokenList};

/// Rows are true labels, columns predicted labels, both in canonical order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_predictions(truth: &[EntailmentLabel], predicted: &[EntailmentLabel]) -> Self {
        let mut m = ConfusionMatrix::default();
        for (t, p) in truth.iter().zip(predicted) {
            m.counts[t.index()][p.index()] += 1;
        }
        m
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, truth: EntailmentLabel) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn column_sum(&self, predicted: EntailmentLabel) -> u64 {
        self.counts.iter().map(|r| r[predicted.index()]).sum()
    }
}

/// Diagonal over total.
pub fn accuracy(m: &ConfusionMatrix) -> Result<f64> {
    let total = m.total();
    if total == 0 {
        return Err(Error::Data("accuracy of an empty confusion matrix".into()));
    }
    Ok(m.trace() as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerResult {
    pub learner: String,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreInfo {
    pub name: String,
    pub dimension: usize,
    pub words_loaded: usize,
    /// Fraction of corpus token occurrences found in the store.
    pub token_coverage: f64,
    /// Fraction of distinct corpus tokens found in the store.
    pub type_coverage: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timing {
    pub preprocess: Duration,
    pub features: Duration,
    pub training: Duration,
    pub prediction: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: FeatureSet,
    pub seed: u64,
    pub train_ratio: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub feature_dimension: usize,
    pub word_embeddings: StoreInfo,
    pub sts_embeddings: Option<StoreInfo>,
    pub hyperparams: Hyperparams,
    /// SVM, KNN, RF, NB, then the ensemble.
    pub results: Vec<LearnerResult>,
    /// Wall-clock timings; kept out of the JSON so reruns are byte-identical.
    #[serde(skip)]
    pub timing: Timing,
}

impl ExperimentReport {
    pub fn result(&self, learner: &str) -> Option<&LearnerResult> {
        self.results.iter().find(|r| r.learner == learner)
    }

    pub fn ensemble(&self) -> &LearnerResult {
        self.results.last().expect("report has results")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Experiment {}  seed {}  train/test {}/{} (ratio {})",
            self.config, self.seed, self.train_size, self.test_size, self.train_ratio);
        let _ = writeln!(s, "Feature dimension {}", self.feature_dimension);
        let store_line = |label: &str, st: &StoreInfo| {
            format!(
                "{label}: {} (dim {}, {} words, token coverage {:.2}%, type coverage {:.2}%)",
                st.name, st.dimension, st.words_loaded,
                100.0 * st.token_coverage, 100.0 * st.type_coverage
            )
        };
        let _ = writeln!(s, "{}", store_line("Word embeddings", &self.word_embeddings));
        if let Some(st) = &self.sts_embeddings {
            let _ = writeln!(s, "{}", store_line("STS embeddings", st));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14} {:<12} {:>8}", "Algorithm", "Features", "Accuracy");
        for r in &self.results {
            let _ = writeln!(s, "{:<14} {:<12} {:>8.4}", r.learner, self.config.as_str(), r.accuracy);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "Confusion matrix (ensemble; rows true, columns predicted)");
        let names = ["Neutral", "Entail", "Contradict"];
        let _ = writeln!(s, "{:<12}{:>10}{:>10}{:>12}", "", names[0], names[1], names[2]);
        for (i, row) in self.ensemble().confusion.counts.iter().enumerate() {
            let _ = writeln!(s, "{:<12}{:>10}{:>10}{:>12}", names[i], row[0], row[1], row[2]);
        }
        let t = &self.timing;
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "Timing: preprocess {:.2}s, features {:.2}s, training {:.2}s, prediction {:.2}s",
            t.preprocess.as_secs_f64(), t.features.as_secs_f64(),
            t.training.as_secs_f64(), t.prediction.as_secs_f64()
        );
        s
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub train_ratio: f64,
    pub hyperparams: Hyperparams,
    pub prep: PrepConfig,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            train_ratio: 0.75,
            hyperparams: Hyperparams::default(),
            prep: PrepConfig::builtin(),
        }
    }
}

/// Token and type coverage of `tokens` in `store`.
pub fn coverage<'a>(tokens: impl IntoIterator<Item = &'a TokenList>, store: &EmbeddingStore) -> (f64, f64) {
    let mut total = 0usize;
    let mut found = 0usize;
    let mut types = BTreeSet::new();
    for list in tokens {
        for t in list.iter() {
            total += 1;
            if store.contains(t) {
                found += 1;
            }
            types.insert(t.as_str());
        }
    }
    let type_found = types.iter().filter(|t| store.contains(t)).count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (ratio(found, total), ratio(type_found, types.len()))
}

fn store_info(store: &EmbeddingStore, tokens: &[&TokenList]) -> StoreInfo {
    let (token_coverage, type_coverage) = coverage(tokens.iter().copied(), store);
    StoreInfo {
        name: store.name().to_string(),
        dimension: store.dimension(),
        words_loaded: store.len(),
        token_coverage,
        type_coverage,
    }
}

struct Prepared {
    label: EntailmentLabel,
    text: TokenList,
    hyp: TokenList,
}

fn prepare(pairs: &[LabeledPair], prep: &PrepConfig) -> Vec<Prepared> {
    pairs
        .par_iter()
        .map(|p| Prepared {
            label: p.label,
            text: preprocess(&p.text, prep),
            hyp: preprocess(&p.hypothesis, prep),
        })
        .collect()
}

fn featurize(items: &[Prepared], set: FeatureSet, stores: Stores<'_>) -> Result<Dataset> {
    let rows: Vec<Vec<f64>> = items
        .par_iter()
        .map(|p| assemble(&p.text, &p.hyp, set, stores).map(|f| f.values))
        .collect::<Result<_>>()?;
    let dim = stores.word.map(EmbeddingStore::dimension).unwrap_or(0);
    Dataset::new(rows, items.iter().map(|p| p.label).collect(), set.schema(dim))
}

/// Runs one configuration over an in-memory corpus. All randomness derives
/// from `seed`: the split uses it directly, each learner `seed + offset`.
pub fn run_experiment(
    pairs: &[LabeledPair],
    set: FeatureSet,
    stores: Stores<'_>,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    run_experiment_with_model(pairs, set, stores, seed, opts).map(|(r, _)| r)
}

/// Same as [`run_experiment`], also handing back the trained ensemble.
pub fn run_experiment_with_model(
    pairs: &[LabeledPair],
    set: FeatureSet,
    stores: Stores<'_>,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<(ExperimentReport, EnsembleModel)> {
    let word = stores
        .word
        .ok_or_else(|| Error::Config("a word embedding store is required".into()))
        .stage("features")?;
    if set.is_handcrafted() && stores.sts.is_none() {
        return Err(Error::Config(format!("feature set {set} needs an STS store")).in_stage("features"));
    }
    opts.hyperparams.validate().stage("training")?;

    let t0 = Instant::now();
    let split = split_corpus(pairs, opts.train_ratio, seed).stage("split")?;
    let train = prepare(&split.train, &opts.prep);
    let test = prepare(&split.test, &opts.prep);
    if test.is_empty() {
        return Err(Error::Split("test partition is empty".into()).in_stage("split"));
    }
    let preprocess_time = t0.elapsed();

    let all_tokens: Vec<&TokenList> = train.iter().chain(&test).flat_map(|p| [&p.text, &p.hyp]).collect();
    let word_info = store_info(word, &all_tokens);
    let sts_info = if set.is_handcrafted() {
        stores.sts.map(|s| store_info(s, &all_tokens))
    } else {
        None
    };

    let t1 = Instant::now();
    let train_ds = featurize(&train, set, stores).stage("features")?;
    let test_ds = featurize(&test, set, stores).stage("features")?;
    let features_time = t1.elapsed();
    info!("{set}: {} train / {} test rows, {} features", train_ds.len(), test_ds.len(), train_ds.dim());

    let t2 = Instant::now();
    let mut members = Vec::new();
    for kind in LearnerKind::ENSEMBLE_ORDER {
        let started = Instant::now();
        let model = fit(kind, &opts.hyperparams, &train_ds, seed.wrapping_add(kind.seed_offset()))
            .stage("training")?;
        info!("{set}: trained {kind} in {:.2}s", started.elapsed().as_secs_f64());
        members.push(model);
    }
    let ensemble = EnsembleModel::new(members).stage("training")?;
    let training_time = t2.elapsed();

    let t3 = Instant::now();
    let votes: Vec<Vec<EntailmentLabel>> = test_ds
        .rows()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|x| ensemble.member_votes(x))
        .collect::<Result<_>>()
        .stage("prediction")?;
    let truth = test_ds.labels();
    let mut results = Vec::new();
    for (m, kind) in LearnerKind::ENSEMBLE_ORDER.into_iter().enumerate() {
        let predicted: Vec<_> = votes.iter().map(|v| v[m]).collect();
        let confusion = ConfusionMatrix::from_predictions(truth, &predicted);
        results.push(LearnerResult {
            learner: kind.as_str().to_string(),
            accuracy: accuracy(&confusion)?,
            confusion,
        });
    }
    let predicted: Vec<_> = votes
        .iter()
        .map(|v| plurality_vote(v).expect("four votes"))
        .collect();
    let confusion = ConfusionMatrix::from_predictions(truth, &predicted);
    results.push(LearnerResult {
        learner: "ensemble".into(),
        accuracy: accuracy(&confusion)?,
        confusion,
    });
    let prediction_time = t3.elapsed();

    let report = ExperimentReport {
        config: set,
        seed,
        train_ratio: opts.train_ratio,
        train_size: train_ds.len(),
        test_size: test_ds.len(),
        feature_dimension: train_ds.dim(),
        word_embeddings: word_info,
        sts_embeddings: sts_info,
        hyperparams: opts.hyperparams.clone(),
        results,
        timing: Timing {
            preprocess: preprocess_time,
            features: features_time,
            training: training_time,
            prediction: prediction_time,
        },
    };
    Ok((report, ensemble))
}

/// Loads the corpus from disk, then runs [`run_experiment`].
pub fn run_experiment_from_path(
    corpus: impl AsRef<Path>,
    columns: &ColumnMap,
    set: FeatureSet,
    stores: Stores<'_>,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let pairs = load_corpus(corpus, columns).stage("load corpus")?;
    run_experiment(&pairs, set, stores, seed, opts)
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let path = path.as_ref();
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Side-by-side accuracy table for several reports (one column per config).
pub fn summary_table(reports: &[ExperimentReport]) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<14}", "Algorithm");
    for r in reports {
        let _ = write!(s, " {:>12}", r.config.as_str());
    }
    let _ = writeln!(s);
    if let Some(first) = reports.first() {
        for (i, row) in first.results.iter().enumerate() {
            let _ = write!(s, "{:<14}", row.learner);
            for r in reports {
                let _ = write!(s, " {:>12.4}", r.results[i].accuracy);
            }
            let _ = writeln!(s);
        }
    }
    s
}
