//! Pair features: the element-wise difference vector of the two sentence
//! vectors, its mean absolute value, Jaccard overlap, bag-of-words cosine and
//! an embedding-sum cosine (STS).

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{EntailmentLabel, LabeledPair};
use crate::embedstore::EmbeddingStore;
use crate::error::{Error, Result};
use crate::semrep::{represent, SentenceVector, Strategy};
use crate::textprep::{preprocess, PrepConfig, TokenList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    #[serde(rename = "emdv-thr")]
    EmdvThr,
    #[serde(rename = "emdv-plain")]
    EmdvPlain,
    #[serde(rename = "hand-thr")]
    HandThr,
    #[serde(rename = "hand-plain")]
    HandPlain,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 4] = [
        FeatureSet::EmdvThr,
        FeatureSet::EmdvPlain,
        FeatureSet::HandThr,
        FeatureSet::HandPlain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::EmdvThr => "emdv-thr",
            FeatureSet::EmdvPlain => "emdv-plain",
            FeatureSet::HandThr => "hand-thr",
            FeatureSet::HandPlain => "hand-plain",
        }
    }

    pub fn strategy(self) -> Strategy {
        match self {
            FeatureSet::EmdvThr | FeatureSet::HandThr => Strategy::Thresholded,
            FeatureSet::EmdvPlain | FeatureSet::HandPlain => Strategy::PlainMean,
        }
    }

    pub fn is_handcrafted(self) -> bool {
        matches!(self, FeatureSet::HandThr | FeatureSet::HandPlain)
    }

    /// Feature names for a word store of dimension `dim`.
    pub fn schema(self, dim: usize) -> Vec<String> {
        if self.is_handcrafted() {
            HAND_SCHEMA.iter().map(|s| s.to_string()).collect()
        } else {
            (0..dim).map(|i| format!("emdv_{i}")).collect()
        }
    }
}

pub const HAND_SCHEMA: [&str; 4] = ["avg_emdv", "bow", "jac", "sts"];

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSet::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown feature set {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema: Vec<String>,
}

/// The word store drives the sentence vectors; the STS store (which may be
/// the same store) drives the STS cosine.
#[derive(Debug, Clone, Copy)]
pub struct Stores<'a> {
    pub word: Option<&'a EmbeddingStore>,
    pub sts: Option<&'a EmbeddingStore>,
}

impl<'a> Stores<'a> {
    pub fn new(word: &'a EmbeddingStore, sts: &'a EmbeddingStore) -> Self {
        Stores {
            word: Some(word),
            sts: Some(sts),
        }
    }

    /// Uses one store for both roles.
    pub fn single(store: &'a EmbeddingStore) -> Self {
        Self::new(store, store)
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// Signed element-wise difference `t - h`.
pub fn emdv(t: &SentenceVector, h: &SentenceVector) -> Result<Vec<f64>> {
    check_dims(&t.values, &h.values)?;
    Ok(t.values.iter().zip(&h.values).map(|(a, b)| a - b).collect())
}

/// Mean absolute element-wise difference.
pub fn avg_emdv(t: &SentenceVector, h: &SentenceVector) -> Result<f64> {
    check_dims(&t.values, &h.values)?;
    if t.values.is_empty() {
        return Err(Error::Data("cannot average an empty vector".into()));
    }
    let sum: f64 = t.values.iter().zip(&h.values).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / t.values.len() as f64)
}

/// Unique-token intersection over union; 0 when both lists are empty.
pub fn jaccard<S: AsRef<str>>(t: &[S], h: &[S]) -> f64 {
    let a: HashSet<&str> = t.iter().map(AsRef::as_ref).collect();
    let b: HashSet<&str> = h.iter().map(AsRef::as_ref).collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Cosine similarity with the zero-vector convention `cos = 0`, clamped to [-1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Per-pair term-frequency vectors over the sorted union vocabulary.
pub fn bow_vectors<S: AsRef<str>>(t: &[S], h: &[S]) -> (Vec<String>, Vec<f64>, Vec<f64>) {
    let mut counts: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for w in t {
        counts.entry(w.as_ref()).or_default().0 += 1.0;
    }
    for w in h {
        counts.entry(w.as_ref()).or_default().1 += 1.0;
    }
    let vocab = counts.keys().map(|k| k.to_string()).collect();
    let (a, b) = counts.values().copied().unzip();
    (vocab, a, b)
}

pub fn bow_cosine<S: AsRef<str>>(t: &[S], h: &[S]) -> f64 {
    let (_, a, b) = bow_vectors(t, h);
    cosine(&a, &b)
}

fn summed<S: AsRef<str>>(tokens: &[S], store: &EmbeddingStore) -> Vec<f64> {
    let mut acc = vec![0.0; store.dimension()];
    for x in tokens.iter().filter_map(|t| store.lookup(t.as_ref())) {
        for (s, v) in acc.iter_mut().zip(x) {
            *s += v;
        }
    }
    acc
}

/// Cosine of the summed word vectors of each sentence.
pub fn sts<S: AsRef<str>>(t: &[S], h: &[S], store: &EmbeddingStore) -> f64 {
    cosine(&summed(t, store), &summed(h, store))
}

/// Computes the feature vector of one preprocessed pair.
pub fn assemble(t: &TokenList, h: &TokenList, set: FeatureSet, stores: Stores<'_>) -> Result<FeatureVector> {
    let word = stores
        .word
        .ok_or_else(|| Error::Config("a word embedding store is required".into()))?;
    let strategy = set.strategy();
    let vt = represent(t, word, strategy);
    let vh = represent(h, word, strategy);
    let values = if set.is_handcrafted() {
        let sts_store = stores
            .sts
            .ok_or_else(|| Error::Config(format!("feature set {set} needs an STS embedding store")))?;
        vec![
            avg_emdv(&vt, &vh)?,
            bow_cosine(t, h),
            jaccard(t, h),
            sts(t, h, sts_store),
        ]
    } else {
        emdv(&vt, &vh)?
    };
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!(
            "feature {} of set {set} is not finite",
            set.schema(word.dimension())[bad]
        )));
    }
    Ok(FeatureVector {
        values,
        schema: set.schema(word.dimension()),
    })
}

pub fn assemble_pair(
    pair: &LabeledPair,
    set: FeatureSet,
    stores: Stores<'_>,
    prep: &PrepConfig,
) -> Result<FeatureVector> {
    let t = preprocess(&pair.text, prep);
    let h = preprocess(&pair.hypothesis, prep);
    assemble(&t, &h, set, stores)
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros trimmed.
pub fn format_sig9(v: f64) -> String {
    const P: i32 = 9;
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes a feature dump: header = schema + `label`, one row per pair.
pub fn write_csv<W: Write>(
    mut out: W,
    schema: &[String],
    rows: &[(FeatureVector, EntailmentLabel)],
) -> std::io::Result<()> {
    writeln!(out, "{},label", schema.join(","))?;
    for (fv, label) in rows {
        let mut line = String::new();
        for v in &fv.values {
            line.push_str(&format_sig9(*v));
            line.push(',');
        }
        line.push_str(label.as_str());
        writeln!(out, "{line}")?;
    }
    Ok(())
}
