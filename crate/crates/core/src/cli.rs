//! Command-line front end. `entailkit <subcommand> --help` lists the flags.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::corpus::{label_counts, load_corpus, ColumnMap, EntailmentLabel, LabeledPair};
use crate::embedstore::{load_embeddings, read_vocab_filter, EmbeddingFormat, EmbeddingStore, VocabFilter};
use crate::error::{Error, Result};
use crate::evalharness::{run_experiment_with_model, summary_table, write_atomic, ExperimentOptions, ExperimentReport};
use crate::features::{assemble, format_sig9, write_csv, FeatureSet, Stores};
use crate::learners::{save_model, Hyperparams, SavedModel};
use crate::semrep::{represent, Strategy};
use crate::textprep::{preprocess, PrepConfig};

#[derive(Debug, Parser)]
#[command(name = "entailkit", version, about = "Textual entailment with threshold-based sentence vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and preprocess a corpus, print statistics, optionally write its vocabulary.
    Prepare {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        prep: PrepArgs,
        /// Write the sorted preprocessed vocabulary, one token per line.
        #[arg(long)]
        vocab_out: Option<PathBuf>,
    },
    /// Print the sentence vector of one sentence.
    Repr {
        #[arg(long)]
        sentence: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::Thr)]
        strategy: StrategyArg,
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        #[command(flatten)]
        prep: PrepArgs,
    },
    /// Dump the feature matrix of a whole corpus as CSV.
    Features {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        #[command(flatten)]
        prep: PrepArgs,
        #[arg(long, value_parser = parse_feature_set)]
        set: FeatureSet,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the four learners and the ensemble, evaluate on the held-out split.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
    /// emdv-thr, emdv-plain, hand-thr, hand-plain or all.
    #[arg(long, default_value = "emdv-thr", value_parser = parse_config)]
    pub config: ConfigChoice,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.75, value_parser = parse_ratio)]
    pub train_ratio: f64,
    /// `key = value` hyperparameter file.
    #[arg(long)]
    pub learner_config: Option<PathBuf>,
    /// Output directory for report.txt and report.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the trained ensemble as ensemble.entk.
    #[arg(long)]
    pub save_model: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Tab-separated corpus with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "pair_ID")]
    pub col_id: String,
    #[arg(long, default_value = "sentence_A")]
    pub col_text: String,
    #[arg(long, default_value = "sentence_B")]
    pub col_hyp: String,
    #[arg(long, default_value = "entailment_judgment")]
    pub col_label: String,
}

impl CorpusArgs {
    pub fn columns(&self) -> ColumnMap {
        ColumnMap {
            id: self.col_id.clone(),
            text: self.col_text.clone(),
            hypothesis: self.col_hyp.clone(),
            label: self.col_label.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EmbeddingArgs {
    /// Word embeddings used for sentence vectors.
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long, default_value = "bin", value_parser = parse_format)]
    pub embeddings_format: EmbeddingFormat,
    /// Embeddings for the STS feature; defaults to --embeddings.
    #[arg(long)]
    pub sts_embeddings: Option<PathBuf>,
    #[arg(long, default_value = "txt", value_parser = parse_format)]
    pub sts_format: EmbeddingFormat,
    /// Only load words listed in this file (one per line).
    #[arg(long)]
    pub vocab_filter: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PrepArgs {
    /// Stopword list replacing the built-in one.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Tab-separated `form<TAB>lemma` table replacing the built-in one.
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
}

impl PrepArgs {
    pub fn load(&self) -> Result<PrepConfig> {
        PrepConfig::from_files(self.stopwords.as_deref(), self.lemmas.as_deref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Thr,
    Plain,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Thr => Strategy::Thresholded,
            StrategyArg::Plain => Strategy::PlainMean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigChoice {
    One(FeatureSet),
    All,
}

impl ConfigChoice {
    pub fn sets(self) -> Vec<FeatureSet> {
        match self {
            ConfigChoice::One(s) => vec![s],
            ConfigChoice::All => FeatureSet::ALL.to_vec(),
        }
    }
}

fn parse_feature_set(s: &str) -> std::result::Result<FeatureSet, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_config(s: &str) -> std::result::Result<ConfigChoice, String> {
    if s == "all" {
        Ok(ConfigChoice::All)
    } else {
        parse_feature_set(s).map(ConfigChoice::One)
    }
}

fn parse_format(s: &str) -> std::result::Result<EmbeddingFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_ratio(s: &str) -> std::result::Result<f64, String> {
    let r: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err(format!("train ratio must lie strictly between 0 and 1, got {r}"))
    }
}

/// Resolved settings of an `experiment` run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sets: Vec<FeatureSet>,
    pub seed: u64,
    pub options: ExperimentOptions,
    pub out_dir: PathBuf,
    pub save_model: bool,
}

impl RunConfig {
    pub fn from_args(args: &ExperimentArgs) -> Result<Self> {
        let hyperparams = match &args.learner_config {
            Some(p) => Hyperparams::from_file(p)?,
            None => Hyperparams::default(),
        };
        Ok(RunConfig {
            sets: args.config.sets(),
            seed: args.seed,
            options: ExperimentOptions {
                train_ratio: args.train_ratio,
                hyperparams,
                prep: args.prep.load()?,
            },
            out_dir: args.out.clone(),
            save_model: args.save_model,
        })
    }

    /// Where the reports of `set` go: the output directory itself for a
    /// single configuration, a subdirectory per configuration otherwise.
    pub fn report_dir(&self, set: FeatureSet) -> PathBuf {
        if self.sets.len() == 1 {
            self.out_dir.clone()
        } else {
            self.out_dir.join(set.as_str())
        }
    }
}

pub fn parse_args<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Caps the global rayon pool at `ENTAILKIT_THREADS` when that is set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("ENTAILKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("ENTAILKIT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

struct LoadedStores {
    word: EmbeddingStore,
    sts: Option<EmbeddingStore>,
}

impl LoadedStores {
    fn load(args: &EmbeddingArgs, need_sts: bool) -> Result<Self> {
        let filter: Option<VocabFilter> = args.vocab_filter.as_deref().map(read_vocab_filter).transpose()?;
        let started = Instant::now();
        let word = load_embeddings(&args.embeddings, args.embeddings_format, filter.as_ref())
            .map_err(|e| e.in_stage("load embeddings"))?;
        info!("loaded {} word vectors (dim {}) in {:.1}s", word.len(), word.dimension(), started.elapsed().as_secs_f64());
        let sts = match (&args.sts_embeddings, need_sts) {
            (Some(p), true) => Some(
                load_embeddings(p, args.sts_format, filter.as_ref())
                    .map_err(|e| e.in_stage("load sts embeddings"))?,
            ),
            _ => None,
        };
        Ok(LoadedStores { word, sts })
    }

    fn stores(&self) -> Stores<'_> {
        Stores::new(&self.word, self.sts.as_ref().unwrap_or(&self.word))
    }
}

fn load_pairs(args: &CorpusArgs) -> Result<Vec<LabeledPair>> {
    load_corpus(&args.data, &args.columns()).map_err(|e| e.in_stage("load corpus"))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes)
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

/// Executes a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Prepare { corpus, prep, vocab_out } => prepare(&corpus, &prep, vocab_out.as_deref(), out),
        Command::Repr {
            sentence,
            strategy,
            embeddings,
            prep,
        } => {
            let prep = prep.load()?;
            let stores = LoadedStores::load(&embeddings, false)?;
            let tokens = preprocess(&sentence, &prep);
            let v = represent(&tokens, &stores.word, strategy.into());
            let head: Vec<String> = v.values.iter().take(8).map(|x| format_sig9(*x)).collect();
            writeln!(out, "tokens: {}", tokens.join()).map_err(stdout_err)?;
            writeln!(out, "in_vocab_count: {}", v.in_vocab_count).map_err(stdout_err)?;
            writeln!(out, "dimension: {}", v.dimension()).map_err(stdout_err)?;
            writeln!(out, "values[0..{}]: {}", head.len(), head.join(" ")).map_err(stdout_err)?;
            Ok(())
        }
        Command::Features {
            corpus,
            embeddings,
            prep,
            set,
            out: path,
        } => {
            let prep = prep.load()?;
            let pairs = load_pairs(&corpus)?;
            let stores = LoadedStores::load(&embeddings, set.is_handcrafted())?;
            let rows = features_for(&pairs, set, stores.stores(), &prep)?;
            let schema = set.schema(stores.word.dimension());
            let mut buf = Vec::new();
            write_csv(&mut buf, &schema, &rows).map_err(stdout_err)?;
            match path {
                Some(p) => write_output(&p, &buf),
                None => out.write_all(&buf).map_err(stdout_err),
            }
        }
        Command::Experiment(args) => {
            let cfg = RunConfig::from_args(&args)?;
            experiment(&args, &cfg, out).map(|_| ())
        }
    }
}

fn features_for(
    pairs: &[LabeledPair],
    set: FeatureSet,
    stores: Stores<'_>,
    prep: &PrepConfig,
) -> Result<Vec<(crate::features::FeatureVector, EntailmentLabel)>> {
    use rayon::prelude::*;
    pairs
        .par_iter()
        .map(|p| {
            let t = preprocess(&p.text, prep);
            let h = preprocess(&p.hypothesis, prep);
            assemble(&t, &h, set, stores)
                .map(|f| (f, p.label))
                .map_err(|e| Error::Data(format!("pair {}: {e}", p.id)))
        })
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("features"))
}

fn prepare(corpus: &CorpusArgs, prep: &PrepArgs, vocab_out: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let started = Instant::now();
    let prep = prep.load()?;
    let pairs = load_pairs(corpus)?;
    let load_time = started.elapsed();
    let counts = label_counts(&pairs);
    let mut vocab = std::collections::BTreeSet::new();
    let mut tokens = 0usize;
    let mut empty = 0usize;
    for p in &pairs {
        for s in [&p.text, &p.hypothesis] {
            let t = preprocess(s, &prep);
            tokens += t.len();
            if t.is_empty() {
                empty += 1;
            }
            vocab.extend(t.into_inner());
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "pairs: {}", pairs.len());
    for l in EntailmentLabel::ALL {
        let _ = writeln!(s, "  {:<14} {}", l.as_str(), counts[l.index()]);
    }
    let sentences = 2 * pairs.len();
    let _ = writeln!(s, "tokens after preprocessing: {tokens} ({:.2} per sentence)", tokens as f64 / sentences.max(1) as f64);
    let _ = writeln!(s, "sentences with no tokens: {empty}");
    let _ = writeln!(s, "vocabulary: {}", vocab.len());
    let _ = writeln!(s, "load time: {:.3}s", load_time.as_secs_f64());
    out.write_all(s.as_bytes()).map_err(stdout_err)?;
    if let Some(path) = vocab_out {
        let mut body = String::new();
        for w in &vocab {
            body.push_str(w);
            body.push('\n');
        }
        write_output(path, body.as_bytes())?;
    }
    Ok(())
}

/// Runs every configured feature set, writing reports under the output directory.
pub fn experiment(args: &ExperimentArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<ExperimentReport>> {
    let pairs = load_pairs(&args.corpus)?;
    let need_sts = cfg.sets.iter().any(|s| s.is_handcrafted());
    let stores = LoadedStores::load(&args.embeddings, need_sts)?;
    let mut reports = Vec::new();
    for &set in &cfg.sets {
        let (report, model) = run_experiment_with_model(&pairs, set, stores.stores(), cfg.seed, &cfg.options)?;
        let dir = cfg.report_dir(set);
        write_output(&dir.join("report.json"), report.to_json().as_bytes())?;
        let text = report.to_text();
        write_output(&dir.join("report.txt"), text.as_bytes())?;
        if cfg.save_model {
            let mut buf = Vec::new();
            save_model(&mut buf, &SavedModel::Ensemble(model))?;
            write_output(&dir.join("ensemble.entk"), &buf)?;
        }
        out.write_all(text.as_bytes()).map_err(stdout_err)?;
        writeln!(out).map_err(stdout_err)?;
        reports.push(report);
    }
    if reports.len() > 1 {
        let table = summary_table(&reports);
        write_output(&cfg.out_dir.join("summary.txt"), table.as_bytes())?;
        out.write_all(table.as_bytes()).map_err(stdout_err)?;
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cli = parse_args(["entailkit", "experiment", "--data", "d.tsv", "--embeddings", "e.bin", "--out", "o"]).unwrap();
        let Command::Experiment(a) = cli.command else { panic!() };
        assert_eq!(a.seed, 42);
        assert_eq!(a.train_ratio, 0.75);
        assert_eq!(a.config, ConfigChoice::One(FeatureSet::EmdvThr));
        assert_eq!(a.embeddings.embeddings_format, EmbeddingFormat::Binary);
        assert_eq!(a.corpus.columns(), ColumnMap::default());
    }

    #[test]
    fn rejects_bad_ratio_and_config() {
        for bad in ["0", "1", "1.5", "-0.2", "x"] {
            let r = parse_args(["entailkit", "experiment", "--data", "d", "--embeddings", "e", "--out", "o", "--train-ratio", bad]);
            assert!(r.is_err(), "{bad}");
        }
        assert!(parse_args(["entailkit", "experiment", "--data", "d", "--embeddings", "e", "--out", "o", "--config", "emdv"]).is_err());
    }

    #[test]
    fn all_configs_get_subdirectories() {
        let cli = parse_args(["entailkit", "experiment", "--data", "d", "--embeddings", "e", "--out", "o", "--config", "all"]).unwrap();
        let Command::Experiment(a) = cli.command else { panic!() };
        let cfg = RunConfig::from_args(&a).unwrap();
        assert_eq!(cfg.sets.len(), 4);
        assert_eq!(cfg.report_dir(FeatureSet::HandPlain), Path::new("o/hand-plain"));
    }
}
