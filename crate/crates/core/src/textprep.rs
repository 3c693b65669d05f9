//! Sentence preprocessing: lowercase, strip punctuation, tokenize, drop
//! stopwords (never negations), lemmatize.

use std::collections::{HashMap, HashSet};
use std::ops::Deref;
use std::path::Path;

use crate::error::{Error, Result};

const BUILTIN_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const BUILTIN_LEMMAS: &str = include_str!("../data/lemmas.tsv");

/// Words that are never treated as stopwords.
pub const NEGATIONS: [&str; 6] = ["no", "not", "nor", "never", "n't", "cannot"];

const NEGATION_CLITIC: &str = "n't";

fn is_negation(word: &str) -> bool {
    NEGATIONS.contains(&word)
}

/// Ordered lowercase tokens of one preprocessed sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenList(tokens)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for TokenList {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenList(iter.into_iter().map(Into::into).collect())
    }
}

/// Stopword list and lemma table used by [`preprocess`].
#[derive(Debug, Clone)]
pub struct PrepConfig {
    stopwords: HashSet<String>,
    lemmas: HashMap<String, String>,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PrepConfig {
    /// The shipped English stopword list and lemma table.
    pub fn builtin() -> Self {
        let stopwords = parse_stopwords(BUILTIN_STOPWORDS);
        let lemmas = parse_lemmas(BUILTIN_LEMMAS).expect("built-in lemma table is well formed");
        Self::new(stopwords, lemmas)
    }

    /// Builds a config from raw resources.
    ///
    /// Negation words are removed from the stopword set. The lemma table is
    /// closed under lookup (chains `a -> b -> c` collapse to `a -> c`) and
    /// entries that would turn a kept word into a stopword, or into a
    /// non-alphanumeric string, are dropped, so that preprocessing is
    /// idempotent. `n't -> not` is always present unless overridden.
    pub fn new(
        stopwords: impl IntoIterator<Item = String>,
        lemmas: impl IntoIterator<Item = (String, String)>,
    ) -> Self {
        let stopwords: HashSet<String> = stopwords
            .into_iter()
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty() && !is_negation(w))
            .collect();

        let mut raw: HashMap<String, String> = lemmas
            .into_iter()
            .map(|(s, l)| (s.trim().to_lowercase(), l.trim().to_lowercase()))
            .filter(|(s, l)| !s.is_empty() && !l.is_empty() && l.chars().all(char::is_alphanumeric))
            .collect();
        raw.entry(NEGATION_CLITIC.to_string())
            .or_insert_with(|| "not".to_string());

        let mut lemmas = HashMap::with_capacity(raw.len());
        for (surface, first) in &raw {
            let mut target = first;
            let mut hops = 0;
            while let Some(next) = raw.get(target) {
                if next == target || hops > raw.len() {
                    break;
                }
                target = next;
                hops += 1;
            }
            if hops > raw.len() || raw.get(target).is_some_and(|n| n != target) {
                continue;
            }
            let target_is_stop = stopwords.contains(target.as_str()) && !is_negation(target);
            if target_is_stop && !stopwords.contains(surface.as_str()) {
                continue;
            }
            if surface != target {
                lemmas.insert(surface.clone(), target.clone());
            }
        }
        PrepConfig { stopwords, lemmas }
    }

    /// Loads optional resource overrides; `None` falls back to the built-in resource.
    pub fn from_files(stopwords: Option<&Path>, lemmas: Option<&Path>) -> Result<Self> {
        let stop = match stopwords {
            Some(p) => parse_stopwords(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
            None => parse_stopwords(BUILTIN_STOPWORDS),
        };
        let lem = match lemmas {
            Some(p) => parse_lemmas(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => parse_lemmas(BUILTIN_LEMMAS)?,
        };
        Ok(Self::new(stop, lem))
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    pub fn stopword_count(&self) -> usize {
        self.stopwords.len()
    }

    pub fn lemma_count(&self) -> usize {
        self.lemmas.len()
    }

    /// Table lookup with identity fallback.
    pub fn lemmatize<'a>(&'a self, token: &'a str) -> &'a str {
        self.lemmas.get(token).map(String::as_str).unwrap_or(token)
    }
}

fn parse_stopwords(content: &str) -> Vec<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_lemmas(content: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(l), None) => out.push((s.to_string(), l.to_string())),
            _ => {
                return Err(Error::Config(format!(
                    "lemma table line {}: expected \"surface<TAB>lemma\"",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Lemmatize one token with the built-in table.
pub fn lemmatize(token: &str) -> String {
    thread_local! {
        static BUILTIN: PrepConfig = PrepConfig::builtin();
    }
    BUILTIN.with(|c| c.lemmatize(token).to_string())
}

/// Replaces every non-alphanumeric, non-whitespace character with a space.
/// A trailing `n't` clitic is split off as its own token (`don't` -> `do n't`,
/// `can't` -> `can n't`, `won't` -> `will n't`).
fn strip_punctuation(lower: &str) -> String {
    let chars: Vec<char> = lower
        .chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .collect();
    let mut out = String::with_capacity(lower.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\''
            && i >= 1
            && chars[i - 1] == 'n'
            && chars.get(i + 1) == Some(&'t')
            && chars.get(i + 2).is_none_or(|c| !c.is_alphanumeric())
        {
            out.pop();
            let word_start = out
                .rfind(|c: char| !c.is_alphanumeric())
                .map(|p| p + out[p..].chars().next().map_or(1, char::len_utf8))
                .unwrap_or(0);
            let stem = match &out[word_start..] {
                "ca" => Some("can"),
                "wo" => Some("will"),
                "sha" => Some("shall"),
                _ => None,
            };
            if let Some(stem) = stem {
                out.truncate(word_start);
                out.push_str(stem);
            }
            out.push(' ');
            out.push_str(NEGATION_CLITIC);
            out.push(' ');
            i += 2;
            continue;
        }
        if c.is_alphanumeric() || c.is_whitespace() {
            out.push(c);
        } else {
            out.push(' ');
        }
        i += 1;
    }
    out
}

/// Runs the fixed pipeline: lowercase, strip punctuation, whitespace
/// tokenize, remove stopwords, lemmatize.
pub fn preprocess(sentence: &str, config: &PrepConfig) -> TokenList {
    let lower = sentence.to_lowercase();
    let stripped = strip_punctuation(&lower);
    stripped
        .split_whitespace()
        .filter(|t| is_negation(t) || !config.is_stopword(t))
        .map(|t| config.lemmatize(t).to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(v: &[&str]) -> TokenList {
        v.iter().copied().collect()
    }

    #[test]
    fn dog_fight_sentences() {
        let cfg = PrepConfig::builtin();
        assert_eq!(preprocess("Two dogs are fighting.", &cfg), toks(&["two", "dog", "fight"]));
        assert_eq!(
            preprocess("There is no dog wrestling and hugging.", &cfg),
            toks(&["no", "dog", "wrestle", "hug"])
        );
    }

    #[test]
    fn without_lemmas_only_stopwords_and_punctuation_go() {
        let cfg = PrepConfig::new(parse_stopwords(BUILTIN_STOPWORDS), Vec::new());
        assert_eq!(
            preprocess("Two dogs are fighting.", &cfg),
            toks(&["two", "dogs", "fighting"])
        );
        assert_eq!(
            preprocess("There is no dog wrestling and hugging.", &cfg),
            toks(&["no", "dog", "wrestling", "hugging"])
        );
    }

    #[test]
    fn empty_and_degenerate() {
        let cfg = PrepConfig::builtin();
        assert!(preprocess("", &cfg).is_empty());
        assert!(preprocess("  ... !!! ", &cfg).is_empty());
        assert!(preprocess("the a an", &cfg).is_empty());
    }

    #[test]
    fn lemma_lookup() {
        assert_eq!(lemmatize("dogs"), "dog");
        assert_eq!(lemmatize("dog"), "dog");
        assert_eq!(lemmatize("was"), "be");
        assert_eq!(lemmatize("n't"), "not");
        assert_eq!(lemmatize("qwertyuiop"), "qwertyuiop");
    }

    #[test]
    fn hyphens_split_and_clitics() {
        let cfg = PrepConfig::builtin();
        assert_eq!(
            preprocess("A man in a black-jacket", &cfg),
            toks(&["man", "black", "jacket"])
        );
        assert_eq!(preprocess("The dog doesn't run", &cfg), toks(&["dog", "not", "run"]));
        assert_eq!(preprocess("He can't swim", &cfg), toks(&["not", "swim"]));
        assert_eq!(preprocess("It won’t stop", &cfg), toks(&["not", "stop"]));
        assert_eq!(preprocess("The man's hat", &cfg), toks(&["man", "hat"]));
        assert_eq!(preprocess("do n't", &cfg), toks(&["not"]));
        assert_eq!(preprocess("nobody cannot never", &cfg), toks(&["nobody", "cannot", "never"]));
    }

    #[test]
    fn negations_survive_custom_stopwords() {
        let cfg = PrepConfig::new(
            ["no", "not", "the"].map(String::from),
            Vec::<(String, String)>::new(),
        );
        assert_eq!(preprocess("No, not the dog", &cfg), toks(&["no", "not", "dog"]));
    }

    #[test]
    fn lemma_table_is_closed() {
        let cfg = PrepConfig::new(
            ["be"].map(String::from),
            [("a", "b"), ("b", "c"), ("x", "be"), ("is", "be"), ("p", "q-r"), ("l1", "l2"), ("l2", "l1")]
                .map(|(a, b)| (a.to_string(), b.to_string())),
        );
        assert_eq!(cfg.lemmatize("a"), "c");
        assert_eq!(cfg.lemmatize("b"), "c");
        // kept word would become a stopword
        assert_eq!(cfg.lemmatize("x"), "x");
        assert_eq!(cfg.lemmatize("p"), "p");
        assert_eq!(cfg.lemmatize("l1"), "l1");
    }

    #[test]
    fn bad_lemma_file_line() {
        assert!(parse_lemmas("a\tb\nbroken\n").is_err());
        assert!(parse_lemmas("a\tb\tc\n").is_err());
    }

    fn sentence() -> impl Strategy<Value = String> {
        let words = prop::sample::select(vec![
            "Two", "dogs", "are", "fighting", "no", "NOT", "never", "nor", "don't", "isn't", "can't",
            "black-jacket", "the", "was", "running", "people", "children", "is", "a", "man's",
            "Café", "42", "!", ",", "...", "hugging", "wolves", "lives",
        ]);
        prop::collection::vec(words, 0..12).prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn idempotent(s in sentence()) {
            let cfg = PrepConfig::builtin();
            let once = preprocess(&s, &cfg);
            let twice = preprocess(&once.join(), &cfg);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn idempotent_on_arbitrary_text(s in "\\PC{0,40}") {
            let cfg = PrepConfig::builtin();
            let once = preprocess(&s, &cfg);
            prop_assert_eq!(preprocess(&once.join(), &cfg), once);
        }

        #[test]
        fn tokens_are_clean(s in "\\PC{0,40}") {
            let cfg = PrepConfig::builtin();
            for t in preprocess(&s, &cfg).iter() {
                prop_assert!(!t.is_empty());
                prop_assert!(t.chars().all(char::is_alphanumeric), "{:?}", t);
                prop_assert_eq!(t.to_lowercase(), t.to_string());
                prop_assert!(!cfg.is_stopword(t));
            }
        }

        #[test]
        fn negations_preserved(s in sentence(), neg in prop::sample::select(vec!["no", "not", "never", "nor", "n't"])) {
            let cfg = PrepConfig::builtin();
            let text = format!("{s} {neg} {s}");
            let out = preprocess(&text, &cfg);
            let want = cfg.lemmatize(neg);
            prop_assert!(out.iter().any(|t| t == want));
        }
    }
}
