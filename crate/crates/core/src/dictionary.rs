//! Document-frequency ordered dictionaries.
//!
//! File format (UTF-8):
//!
//! ```text
//! #lexicorp-dict v1 threshold=<t> config=<hash> corpus=<id>
//! word<TAB>doc_count<TAB>corpus_count
//! ```
//!
//! Entries are written in canonical order: `doc_count` descending, then
//! `corpus_count` descending, then word ascending.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::pipeline::TokenList;
use crate::{Error, Result};

const MAGIC: &str = "#lexicorp-dict v1";

/// Default cut-off for the core dictionary: words in at most this many documents are dropped.
pub const DEFAULT_PRUNE_THRESHOLD: u64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DictEntry {
    pub word: String,
    pub doc_count: u64,
    pub corpus_count: u64,
}

impl DictEntry {
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        other
            .doc_count
            .cmp(&self.doc_count)
            .then_with(|| other.corpus_count.cmp(&self.corpus_count))
            .then_with(|| self.word.cmp(&other.word))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub corpus: String,
    pub config_hash: String,
    /// 0 means unpruned.
    pub threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dictionary {
    entries: Vec<DictEntry>,
    pub provenance: Provenance,
}

/// Per-word `(doc_count, corpus_count)` accumulator; merging is commutative.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counts(HashMap<String, (u64, u64)>);

impl Counts {
    pub fn add_document(&mut self, tokens: &TokenList) {
        let mut seen: HashSet<&str> = HashSet::with_capacity(tokens.len());
        for tok in tokens {
            let first = seen.insert(tok.as_str());
            match self.0.get_mut(tok.as_str()) {
                Some(c) => {
                    c.0 += first as u64;
                    c.1 += 1;
                }
                None => {
                    self.0.insert(tok.clone(), (1, 1));
                }
            }
        }
    }

    pub fn merge(mut self, other: Counts) -> Counts {
        let (mut big, small) = if self.0.len() >= other.0.len() {
            (std::mem::take(&mut self.0), other.0)
        } else {
            (other.0, std::mem::take(&mut self.0))
        };
        for (w, (d, c)) in small {
            let e = big.entry(w).or_insert((0, 0));
            e.0 += d;
            e.1 += c;
        }
        Counts(big)
    }

    pub fn into_dictionary(self, provenance: Provenance) -> Dictionary {
        let entries = self
            .0
            .into_iter()
            .map(|(word, (doc_count, corpus_count))| DictEntry { word, doc_count, corpus_count })
            .collect();
        Dictionary::from_entries(entries, provenance)
    }
}

impl Dictionary {
    /// Sorts `entries` into canonical order. Words are assumed unique.
    pub fn from_entries(mut entries: Vec<DictEntry>, provenance: Provenance) -> Self {
        entries.sort_by(DictEntry::canonical_cmp);
        Dictionary { entries, provenance }
    }

    pub fn build<'a, I>(token_lists: I, provenance: Provenance) -> Self
    where
        I: IntoIterator<Item = &'a TokenList>,
    {
        Self::build_seq(token_lists, provenance)
    }

    pub fn build_seq<'a, I>(token_lists: I, provenance: Provenance) -> Self
    where
        I: IntoIterator<Item = &'a TokenList>,
    {
        let mut counts = Counts::default();
        for list in token_lists {
            counts.add_document(list);
        }
        counts.into_dictionary(provenance)
    }

    /// Parallel partial aggregation when the `parallel` feature is on.
    pub fn build_all(token_lists: &[TokenList], provenance: Provenance) -> Self {
        #[cfg(feature = "parallel")]
        {
            Self::build_par(token_lists, provenance)
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self::build_seq(token_lists, provenance)
        }
    }

    #[cfg(feature = "parallel")]
    pub fn build_par(token_lists: &[TokenList], provenance: Provenance) -> Self {
        use rayon::prelude::*;
        token_lists
            .par_iter()
            .fold(Counts::default, |mut acc, list| {
                acc.add_document(list);
                acc
            })
            .reduce(Counts::default, Counts::merge)
            .into_dictionary(provenance)
    }

    /// Sums counts word by word and re-sorts; provenance is taken from `self`.
    pub fn merge(&self, other: &Dictionary) -> Dictionary {
        let mut map: HashMap<&str, (u64, u64)> = HashMap::new();
        for e in self.entries.iter().chain(&other.entries) {
            let c = map.entry(e.word.as_str()).or_insert((0, 0));
            c.0 += e.doc_count;
            c.1 += e.corpus_count;
        }
        let entries = map
            .into_iter()
            .map(|(w, (d, c))| DictEntry { word: w.to_string(), doc_count: d, corpus_count: c })
            .collect();
        Dictionary::from_entries(entries, self.provenance.clone())
    }

    pub fn entries(&self) -> &[DictEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&DictEntry> {
        self.entries.iter().find(|e| e.word == word)
    }

    /// 1-based rank of every word in canonical order.
    pub fn ranks(&self) -> HashMap<&str, usize> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.word.as_str(), i + 1))
            .collect()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.word.as_str())
    }

    /// Keeps entries with `doc_count > threshold`.
    pub fn prune(&self, threshold: u64) -> Dictionary {
        let entries = self
            .entries
            .iter()
            .filter(|e| e.doc_count > threshold)
            .cloned()
            .collect();
        Dictionary {
            entries,
            provenance: Provenance {
                threshold: self.provenance.threshold.max(threshold),
                ..self.provenance.clone()
            },
        }
    }

    pub fn total_corpus_count(&self) -> u64 {
        self.entries.iter().map(|e| e.corpus_count).sum()
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let p = &self.provenance;
        writeln!(
            out,
            "{MAGIC} threshold={} config={} corpus={}",
            p.threshold,
            field(&p.config_hash),
            field(&p.corpus)
        )?;
        for e in &self.entries {
            writeln!(out, "{}\t{}\t{}", e.word, e.doc_count, e.corpus_count)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::new();
        self.write(&mut v).expect("writing to a Vec cannot fail");
        v
    }

    pub fn read<R: BufRead>(input: R) -> Result<Dictionary> {
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(l) => l?,
            None => return Err(malformed(1, "missing header")),
        };
        let provenance = parse_header(header.trim_start_matches('\u{feff}'))?;
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let entry = parse_entry(&cols).map_err(|r| malformed(line_no, &r))?;
            if !seen.insert(entry.word.clone()) {
                return Err(malformed(line_no, &format!("duplicate word {:?}", entry.word)));
            }
            entries.push(entry);
        }
        Ok(Dictionary::from_entries(entries, provenance))
    }

    /// Reads a dictionary without the native header: `word,doc_count,corpus_count`
    /// rows separated by tab or comma, with an optional header row.
    /// A missing third column is taken as equal to the document count.
    pub fn read_delimited<R: BufRead>(mut input: R) -> Result<Dictionary> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let text = text.trim_start_matches('\u{feff}');
        let first = text.lines().next().unwrap_or("");
        let delimiter = if first.contains('\t') { b'\t' } else { b',' };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .delimiter(delimiter)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, row) in reader.records().enumerate() {
            let line = i + 1;
            let row = row.map_err(|e| malformed(line, &e.to_string()))?;
            let cols: Vec<&str> = row.iter().collect();
            if cols.iter().all(|c| c.trim().is_empty()) {
                continue;
            }
            match parse_entry(&cols) {
                Ok(e) => {
                    if seen.insert(e.word.clone()) {
                        entries.push(e);
                    }
                }
                Err(_) if i == 0 => continue,
                Err(r) => return Err(malformed(line, &r)),
            }
        }
        Ok(Dictionary::from_entries(entries, Provenance::default()))
    }

    /// Native files by header, anything else through [`Dictionary::read_delimited`].
    pub fn read_any(bytes: &[u8]) -> Result<Dictionary> {
        let body = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
        if body.starts_with(MAGIC.as_bytes()) {
            Dictionary::read(body)
        } else {
            Dictionary::read_delimited(body)
        }
    }
}

fn field(s: &str) -> &str {
    if s.is_empty() {
        "-"
    } else {
        s
    }
}

fn malformed(line: usize, reason: &str) -> Error {
    Error::MalformedDictionary { line, reason: reason.to_string() }
}

fn parse_header(line: &str) -> Result<Provenance> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| malformed(1, "expected '#lexicorp-dict v1' header"))?;
    let mut p = Provenance::default();
    for kv in rest.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| malformed(1, &format!("bad header field {kv:?}")))?;
        let v = if v == "-" { "" } else { v };
        match k {
            "threshold" => {
                p.threshold = v
                    .parse()
                    .map_err(|_| malformed(1, &format!("bad threshold {v:?}")))?
            }
            "config" => p.config_hash = v.to_string(),
            "corpus" => p.corpus = v.to_string(),
            _ => {}
        }
    }
    Ok(p)
}

fn parse_entry(cols: &[&str]) -> std::result::Result<DictEntry, String> {
    if cols.len() < 2 || cols.len() > 3 {
        return Err(format!("expected 3 columns, found {}", cols.len()));
    }
    let word = cols[0].trim().to_string();
    if word.is_empty() {
        return Err("empty word".into());
    }
    let num = |s: &str, what: &str| -> std::result::Result<u64, String> {
        s.trim()
            .replace(',', "")
            .parse()
            .map_err(|_| format!("{what} is not a non-negative integer: {s:?}"))
    };
    let doc_count = num(cols[1], "doc_count")?;
    let corpus_count = match cols.get(2) {
        Some(c) => num(c, "corpus_count")?,
        None => doc_count,
    };
    if doc_count == 0 || corpus_count < doc_count {
        return Err(format!(
            "counts violate corpus_count >= doc_count >= 1: {doc_count}, {corpus_count}"
        ));
    }
    Ok(DictEntry { word, doc_count, corpus_count })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortDocument {
    pub index: usize,
    pub unique_words: usize,
}

/// Documents with fewer than `k` distinct words present in `dict`.
pub fn min_unique_words_check(lists: &[TokenList], dict: &Dictionary, k: usize) -> Vec<ShortDocument> {
    let vocab: HashSet<&str> = dict.words().collect();
    lists
        .iter()
        .enumerate()
        .filter_map(|(index, list)| {
            let unique: HashSet<&str> =
                list.iter().map(String::as_str).filter(|w| vocab.contains(w)).collect();
            (unique.len() < k).then_some(ShortDocument { index, unique_words: unique.len() })
        })
        .collect()
}
