//! word2vec embedding files (binary and text) behind an exact-match lookup.
//!
//! Keys are case-folded to lowercase at load; when folding makes two entries
//! collide, the one read last wins. Vectors are widened to `f64`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Binary,
    Text,
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bin" | "binary" | "binary-w2v" => Ok(EmbeddingFormat::Binary),
            "txt" | "text" | "text-w2v" => Ok(EmbeddingFormat::Text),
            other => Err(Error::Config(format!("unknown embedding format {other:?}"))),
        }
    }
}

impl fmt::Display for EmbeddingFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingFormat::Binary => "bin",
            EmbeddingFormat::Text => "txt",
        })
    }
}

/// Read-only word -> vector map with a fixed dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    /// Whether the slot was filled by an already-lowercase key.
    lowercase_origin: Vec<bool>,
    name: String,
}

impl EmbeddingStore {
    /// Builds a store from in-memory entries. Keys are case-folded: an
    /// already-lowercase key takes the slot over case variants, otherwise the
    /// first variant seen is kept. Exact repeats keep the last vector.
    pub fn from_entries<I, S>(name: impl Into<String>, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut store = EmbeddingStore::empty(name, dim)?;
        for (i, (word, vector)) in entries.into_iter().enumerate() {
            if vector.len() != dim {
                return Err(Error::EmbeddingRow {
                    line: i + 1,
                    message: format!("expected {dim} values, found {}", vector.len()),
                });
            }
            store.insert(word.as_ref(), &vector);
        }
        Ok(store)
    }

    fn empty(name: impl Into<String>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Embedding("dimension must be positive".into()));
        }
        Ok(EmbeddingStore {
            dim,
            index: HashMap::new(),
            data: Vec::new(),
            lowercase_origin: Vec::new(),
            name: name.into(),
        })
    }

    fn insert(&mut self, word: &str, vector: &[f64]) {
        let key = word.to_lowercase();
        let is_lower = key == word;
        match self.index.get(&key) {
            Some(&slot) => {
                let overwrite = match (is_lower, self.lowercase_origin[slot]) {
                    (true, true) => {
                        warn!("embedding key {key:?} appears more than once; keeping the last vector");
                        true
                    }
                    (true, false) => true,
                    (false, _) => false,
                };
                if overwrite {
                    self.data[slot * self.dim..(slot + 1) * self.dim].copy_from_slice(vector);
                    self.lowercase_origin[slot] = true;
                }
            }
            None => {
                self.index.insert(key, self.lowercase_origin.len());
                self.lowercase_origin.push(is_lower);
                self.data.extend_from_slice(vector);
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Exact-match lookup. Absence is `None`, never a default vector.
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        let slot = match self.index.get(word) {
            Some(&s) => s,
            None => *self.index.get(&word.to_lowercase())?,
        };
        Some(&self.data[slot * self.dim..(slot + 1) * self.dim])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup(word).is_some()
    }

    /// Words in lexicographic order.
    pub fn words(&self) -> Vec<&str> {
        let mut w: Vec<&str> = self.index.keys().map(String::as_str).collect();
        w.sort_unstable();
        w
    }

    /// Writes text-w2v: header `count dim`, then `word v1 .. vK` per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for word in self.words() {
            write!(out, "{word}")?;
            for v in self.lookup(word).unwrap() {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Writes binary-w2v with little-endian `f32` payloads and a newline after each vector.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for word in self.words() {
            out.write_all(word.as_bytes())?;
            out.write_all(b" ")?;
            for v in self.lookup(word).unwrap() {
                out.write_all(&(*v as f32).to_le_bytes())?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Optional restriction of which words get loaded (compared after case folding).
pub type VocabFilter = HashSet<String>;

/// Reads a vocabulary filter file: one word per line.
pub fn read_vocab_filter(path: impl AsRef<Path>) -> Result<VocabFilter> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(content
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

pub fn load_embeddings(
    path: impl AsRef<Path>,
    format: EmbeddingFormat,
    filter: Option<&VocabFilter>,
) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::with_capacity(1 << 20, file);
    let name = path.display().to_string();
    match format {
        EmbeddingFormat::Binary => read_binary(reader, name, filter),
        EmbeddingFormat::Text => read_text(reader, name, filter),
    }
}

struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: BufRead> CountingReader<R> {
    fn read_until_byte(&mut self, delim: u8, buf: &mut Vec<u8>) -> std::io::Result<usize> {
        let n = self.inner.read_until(delim, buf)?;
        self.offset += n as u64;
        Ok(n)
    }

    fn read_exact_counted(&mut self, buf: &mut [u8]) -> std::io::Result<()> {
        self.inner.read_exact(buf)?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn peek(&mut self) -> std::io::Result<Option<u8>> {
        Ok(self.inner.fill_buf()?.first().copied())
    }

    fn skip(&mut self, n: usize) {
        self.inner.consume(n);
        self.offset += n as u64;
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let count = it.next()?.parse().ok()?;
    let dim = it.next()?.parse().ok()?;
    it.next().is_none().then_some((count, dim))
}

/// Parses binary-w2v from any buffered reader.
pub fn read_binary<R: BufRead>(
    reader: R,
    name: impl Into<String>,
    filter: Option<&VocabFilter>,
) -> Result<EmbeddingStore> {
    let mut r = CountingReader {
        inner: reader,
        offset: 0,
    };
    let truncated = |offset: u64, message: &str| Error::EmbeddingTruncated {
        offset,
        message: message.to_string(),
    };
    let io_err = |e: std::io::Error, offset| truncated(offset, &e.to_string());

    let mut line = Vec::new();
    r.read_until_byte(b'\n', &mut line).map_err(|e| io_err(e, 0))?;
    if line.last() != Some(&b'\n') {
        return Err(truncated(r.offset, "missing header line"));
    }
    let header = std::str::from_utf8(&line)
        .ok()
        .and_then(parse_header)
        .ok_or_else(|| Error::EmbeddingRow {
            line: 1,
            message: "header must be \"vocab_size dim\"".into(),
        })?;
    let (count, dim) = header;
    let mut store = EmbeddingStore::empty(name, dim)?;

    let mut word = Vec::new();
    let mut payload = vec![0u8; dim * 4];
    let mut vector = vec![0f64; dim];
    for entry in 0..count {
        // word2vec writers may put a newline (or stray spaces) before each word.
        while let Some(b) = r.peek().map_err(|e| io_err(e, r.offset))? {
            if b == b'\n' || b == b' ' || b == b'\r' {
                r.skip(1);
            } else {
                break;
            }
        }
        word.clear();
        let start = r.offset;
        r.read_until_byte(b' ', &mut word)
            .map_err(|e| io_err(e, r.offset))?;
        if word.pop() != Some(b' ') {
            return Err(truncated(
                r.offset,
                &format!("entry {} of {count}: word not terminated by a space (started at byte {start})", entry + 1),
            ));
        }
        r.read_exact_counted(&mut payload).map_err(|_| {
            truncated(
                r.offset,
                &format!("entry {} of {count}: expected {} payload bytes", entry + 1, dim * 4),
            )
        })?;
        let w = String::from_utf8_lossy(&word);
        let keep = filter.is_none_or(|f| f.contains(&w.to_lowercase()));
        if keep {
            for (v, chunk) in vector.iter_mut().zip(payload.chunks_exact(4)) {
                *v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64;
            }
            store.insert(&w, &vector);
        }
    }
    Ok(store)
}

/// Parses text-w2v. The header line is optional; without one the dimension
/// is taken from the first row.
pub fn read_text<R: BufRead>(
    reader: R,
    name: impl Into<String>,
    filter: Option<&VocabFilter>,
) -> Result<EmbeddingStore> {
    let name = name.into();
    let mut store: Option<EmbeddingStore> = None;
    let mut declared_count = None;
    let mut vector = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::EmbeddingRow {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if lineno == 1 {
            if let Some((count, dim)) = parse_header(line) {
                store = Some(EmbeddingStore::empty(name.clone(), dim)?);
                declared_count = Some(count);
                continue;
            }
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let word = fields.next().unwrap_or_default();
        vector.clear();
        for f in fields {
            let v: f64 = f.parse().map_err(|_| Error::EmbeddingRow {
                line: lineno,
                message: format!("cannot parse {f:?} as a number"),
            })?;
            vector.push(v);
        }
        let s = match &mut store {
            Some(s) => s,
            None => store.insert(EmbeddingStore::empty(name.clone(), vector.len()).map_err(|_| {
                Error::EmbeddingRow {
                    line: lineno,
                    message: "row has no vector values".into(),
                }
            })?),
        };
        if vector.len() != s.dim {
            return Err(Error::EmbeddingRow {
                line: lineno,
                message: format!("expected {} values, found {}", s.dim, vector.len()),
            });
        }
        if filter.is_none_or(|f| f.contains(&word.to_lowercase())) {
            s.insert(word, &vector);
        }
    }
    let store = store.ok_or_else(|| Error::Embedding("file is empty".into()))?;
    if let Some(count) = declared_count {
        if filter.is_none() && count != store.len() {
            warn!(
                "{}: header declares {count} words, loaded {} distinct keys",
                store.name,
                store.len()
            );
        }
    }
    Ok(store)
}

/// Reads any `Read` source fully into a store; handy for in-memory fixtures.
pub fn read_from<R: Read>(
    reader: R,
    format: EmbeddingFormat,
    filter: Option<&VocabFilter>,
) -> Result<EmbeddingStore> {
    let r = BufReader::new(reader);
    match format {
        EmbeddingFormat::Binary => read_binary(r, "<memory>", filter),
        EmbeddingFormat::Text => read_text(r, "<memory>", filter),
    }
}
