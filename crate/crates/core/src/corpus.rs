//! Loading and splitting of tab-separated entailment corpora (SICK layout).

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gold relation between a text and a hypothesis.
///
/// The declaration order is the canonical label order used by confusion
/// matrices and by every deterministic tie rule in the learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntailmentLabel {
    Neutral,
    Entailment,
    Contradiction,
}

impl EntailmentLabel {
    pub const ALL: [EntailmentLabel; 3] = [
        EntailmentLabel::Neutral,
        EntailmentLabel::Entailment,
        EntailmentLabel::Contradiction,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntailmentLabel::Neutral => "NEUTRAL",
            EntailmentLabel::Entailment => "ENTAILMENT",
            EntailmentLabel::Contradiction => "CONTRADICTION",
        }
    }
}

impl fmt::Display for EntailmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntailmentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Label(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPair {
    pub id: String,
    pub text: String,
    pub hypothesis: String,
    pub label: EntailmentLabel,
}

/// Header names of the four columns the loader needs. Other columns are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub id: String,
    pub text: String,
    pub hypothesis: String,
    pub label: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            id: "pair_ID".into(),
            text: "sentence_A".into(),
            hypothesis: "sentence_B".into(),
            label: "entailment_judgment".into(),
        }
    }
}

/// Loads a corpus from a UTF-8 TSV file with a header row.
///
/// Row numbers in errors are 1-based file line numbers (the header is line 1).
pub fn load_corpus(path: impl AsRef<Path>, columns: &ColumnMap) -> Result<Vec<LabeledPair>> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&content, columns).map_err(|e| match e {
        Error::Corpus { message, .. } => Error::Corpus {
            path: path.to_path_buf(),
            message,
        },
        Error::CorpusRow { row, message, .. } => Error::CorpusRow {
            path: path.to_path_buf(),
            row,
            message,
        },
        other => other,
    })
}

/// Parses corpus content already in memory. Errors carry an empty path.
pub fn parse_corpus(content: &str, columns: &ColumnMap) -> Result<Vec<LabeledPair>> {
    let corpus_err = |message: String| Error::Corpus {
        path: Default::default(),
        message,
    };
    let row_err = |row: usize, message: String| Error::CorpusRow {
        path: Default::default(),
        row,
        message,
    };

    let mut lines = content.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
            None => return Err(corpus_err("file is empty".into())),
        }
    };
    let header: Vec<&str> = header
        .trim_start_matches('\u{feff}')
        .split('\t')
        .map(str::trim)
        .collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Config(format!("corpus header has no column named {name:?}")))
    };
    let id_col = find(&columns.id)?;
    let text_col = find(&columns.text)?;
    let hyp_col = find(&columns.hypothesis)?;
    let label_col = find(&columns.label)?;
    let needed = id_col.max(text_col).max(hyp_col).max(label_col) + 1;

    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in lines {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        if fields.len() < needed {
            return Err(row_err(
                row,
                format!("expected at least {needed} fields, found {}", fields.len()),
            ));
        }
        let id = fields[id_col].trim().to_string();
        let text = fields[text_col].trim().to_string();
        let hypothesis = fields[hyp_col].trim().to_string();
        if text.is_empty() || hypothesis.is_empty() {
            return Err(row_err(row, "text and hypothesis must be non-empty".into()));
        }
        let label = fields[label_col]
            .parse::<EntailmentLabel>()
            .map_err(|e| row_err(row, e.to_string()))?;
        if !seen.insert(id.clone()) {
            return Err(row_err(row, format!("duplicate pair id {id:?}")));
        }
        pairs.push(LabeledPair {
            id,
            text,
            hypothesis,
            label,
        });
    }
    if pairs.is_empty() {
        return Err(corpus_err("no data rows".into()));
    }
    Ok(pairs)
}

/// Per-class counts in canonical label order.
pub fn label_counts<'a>(pairs: impl IntoIterator<Item = &'a LabeledPair>) -> [usize; 3] {
    let mut counts = [0; 3];
    for p in pairs {
        counts[p.label.index()] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitCorpus {
    pub train: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
    pub seed: u64,
}

/// Size of the training prefix: `ratio * n` rounded half up.
pub fn train_size(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64) + 0.5).floor() as usize
}

/// Uniformly shuffles `pairs` with a ChaCha8 stream seeded by `seed` and cuts
/// the first `train_size(n, ratio)` items off as the training partition.
pub fn split_corpus(pairs: &[LabeledPair], ratio: f64, seed: u64) -> Result<SplitCorpus> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Split(format!("ratio {ratio} is outside (0, 1)")));
    }
    if pairs.len() < 2 {
        return Err(Error::Split(format!(
            "need at least 2 pairs, got {}",
            pairs.len()
        )));
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let cut = train_size(pairs.len(), ratio);
    let (train, test) = order.split_at(cut);
    Ok(SplitCorpus {
        train: train.iter().map(|&i| pairs[i].clone()).collect(),
        test: test.iter().map(|&i| pairs[i].clone()).collect(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "pair_ID\tsentence_A\tsentence_B\trelatedness_score\tentailment_judgment\n";

    fn pairs(n: usize) -> Vec<LabeledPair> {
        (0..n)
            .map(|i| LabeledPair {
                id: i.to_string(),
                text: format!("text {i}"),
                hypothesis: format!("hyp {i}"),
                label: EntailmentLabel::ALL[i % 3],
            })
            .collect()
    }

    #[test]
    fn label_parsing_is_case_insensitive() {
        assert_eq!("ENTAILMENT".parse::<EntailmentLabel>().unwrap(), EntailmentLabel::Entailment);
        assert_eq!("neutral".parse::<EntailmentLabel>().unwrap(), EntailmentLabel::Neutral);
        assert_eq!(
            "Contradiction".parse::<EntailmentLabel>().unwrap(),
            EntailmentLabel::Contradiction
        );
        assert!("unknown".parse::<EntailmentLabel>().is_err());
    }

    #[test]
    fn one_row_file() {
        let content = format!("{HEADER}1\tTwo dogs are fighting.\tTwo dogs are wrestling and hugging.\t4.5\tNEUTRAL\n");
        let got = parse_corpus(&content, &ColumnMap::default()).unwrap();
        assert_eq!(
            got,
            vec![LabeledPair {
                id: "1".into(),
                text: "Two dogs are fighting.".into(),
                hypothesis: "Two dogs are wrestling and hugging.".into(),
                label: EntailmentLabel::Neutral,
            }]
        );
    }

    #[test]
    fn bad_label_reports_row() {
        let content = format!("{HEADER}1\ta\tb\t1\tNEUTRAL\n2\tc\td\t1\tunknown\n");
        match parse_corpus(&content, &ColumnMap::default()) {
            Err(Error::CorpusRow { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_named() {
        let content = "pair_ID\tsentence_A\tsentence_B\n1\ta\tb\n";
        let err = parse_corpus(content, &ColumnMap::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("entailment_judgment"));
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(parse_corpus("", &ColumnMap::default()).is_err());
        assert!(parse_corpus(HEADER, &ColumnMap::default()).is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let content = format!("{HEADER}1\ta\tb\t1\tNEUTRAL\n1\tc\td\t1\tNEUTRAL\n");
        assert!(parse_corpus(&content, &ColumnMap::default()).is_err());
    }

    #[test]
    fn custom_columns() {
        let content = "id\tpremise\thypothesis\tgold\nx\ta b\tc\tcontradiction\n";
        let cols = ColumnMap {
            id: "id".into(),
            text: "premise".into(),
            hypothesis: "hypothesis".into(),
            label: "gold".into(),
        };
        let got = parse_corpus(content, &cols).unwrap();
        assert_eq!(got[0].label, EntailmentLabel::Contradiction);
        assert_eq!(got[0].text, "a b");
    }

    #[test]
    fn split_sizes() {
        let s = split_corpus(&pairs(9840), 0.75, 42).unwrap();
        assert_eq!(s.train.len(), 7380);
        assert_eq!(s.test.len(), 2460);
        let s = split_corpus(&pairs(2), 0.5, 7).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (1, 1));
    }

    #[test]
    fn split_rounds_half_up() {
        assert_eq!(train_size(2, 0.75), 2);
        assert_eq!(train_size(10, 0.25), 3);
        assert_eq!(train_size(3, 0.5), 2);
    }

    #[test]
    fn split_rejects_bad_input() {
        assert!(split_corpus(&pairs(10), 1.5, 1).is_err());
        assert!(split_corpus(&pairs(10), 0.0, 1).is_err());
        assert!(split_corpus(&pairs(10), 1.0, 1).is_err());
        assert!(split_corpus(&pairs(1), 0.5, 1).is_err());
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let data = pairs(200);
        let a = split_corpus(&data, 0.75, 42).unwrap();
        let b = split_corpus(&data, 0.75, 42).unwrap();
        assert_eq!(a, b);
        let c = split_corpus(&data, 0.75, 43).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn split_is_a_partition() {
        let data = pairs(101);
        let s = split_corpus(&data, 0.75, 9).unwrap();
        let mut ids: Vec<_> = s.train.iter().chain(&s.test).map(|p| p.id.clone()).collect();
        ids.sort();
        let mut want: Vec<_> = data.iter().map(|p| p.id.clone()).collect();
        want.sort();
        assert_eq!(ids, want);
        assert_eq!(label_counts(&data).iter().sum::<usize>(), 101);
    }
}
