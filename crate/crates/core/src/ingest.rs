//! Record ingestion: tab-delimited exports in, cleaned documents out.
//!
//! The cleaning sequence is parse, drop records without abstract or
//! category, split section headings glued to the next word
//! (`ConclusionHigher`), then keep abstracts whose word count lies in an
//! inclusive length window.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::{Error, Result};

pub const DEFAULT_MIN_LEN: usize = 30;
pub const DEFAULT_MAX_LEN: usize = 500;
pub const MAX_CATEGORIES: usize = 6;

/// Column tags of the canonical corpus file, in record order.
pub const CANONICAL_TAGS: [&str; 7] = ["AU", "TI", "AB", "WC", "SC", "Z9", "TC"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawRecord {
    pub authors: Vec<String>,
    pub title: String,
    pub abstract_text: String,
    pub categories: Vec<String>,
    pub research_areas: Vec<String>,
    pub total_times_cited: u64,
    pub times_cited_core: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub record: RawRecord,
    pub word_count: usize,
}

impl Document {
    pub fn new(record: RawRecord) -> Self {
        let word_count = word_count(&record.abstract_text);
        Document { record, word_count }
    }
}

/// Zero-based column of each record field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldIndices {
    pub authors: usize,
    pub title: usize,
    pub abstract_text: usize,
    pub categories: usize,
    pub research_areas: usize,
    pub total_times_cited: usize,
    pub times_cited_core: usize,
}

impl FieldIndices {
    fn max(&self) -> usize {
        [
            self.authors,
            self.title,
            self.abstract_text,
            self.categories,
            self.research_areas,
            self.total_times_cited,
            self.times_cited_core,
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnMap {
    /// First line is a header; fields are located by these tags, in record order.
    Header([String; 7]),
    /// No header; fixed indices and an exact column count per row.
    Fixed { indices: FieldIndices, n_columns: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordFormat {
    pub columns: ColumnMap,
    pub list_separator: char,
}

impl Default for RecordFormat {
    fn default() -> Self {
        RecordFormat {
            columns: ColumnMap::Header(CANONICAL_TAGS.map(String::from)),
            list_separator: ';',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub records: Vec<RawRecord>,
    pub ledger: Vec<LedgerEntry>,
}

/// Parses one record per line. Rows that cannot be read are skipped and
/// recorded in the ledger with their 1-based line number.
pub fn parse_records<R: BufRead>(mut input: R, format: &RecordFormat) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    let mut layout: Option<(FieldIndices, usize)> = match &format.columns {
        ColumnMap::Fixed { indices, n_columns } => {
            if indices.max() >= *n_columns {
                return Err(Error::RecordFormat(format!(
                    "column index {} out of range for {n_columns} columns",
                    indices.max()
                )));
            }
            Some((*indices, *n_columns))
        }
        ColumnMap::Header(_) => None,
    };

    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let mut bytes = buf.as_slice();
        if line_no == 1 {
            bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
        }
        while let Some((b'\n' | b'\r', rest)) = bytes.split_last() {
            bytes = rest;
        }
        let Ok(line) = std::str::from_utf8(bytes) else {
            out.ledger.push(LedgerEntry { line: line_no, reason: "invalid UTF-8".into() });
            continue;
        };
        if line.trim().is_empty() {
            continue;
        }

        let Some((idx, n_columns)) = layout else {
            let ColumnMap::Header(tags) = &format.columns else { unreachable!() };
            layout = Some(header_layout(line, tags)?);
            continue;
        };

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != n_columns {
            out.ledger.push(LedgerEntry {
                line: line_no,
                reason: format!("expected {n_columns} columns, found {}", cols.len()),
            });
            continue;
        }
        match record_from_columns(&cols, &idx, format.list_separator) {
            Ok(r) => out.records.push(r),
            Err(reason) => out.ledger.push(LedgerEntry { line: line_no, reason }),
        }
    }
    Ok(out)
}

fn header_layout(line: &str, tags: &[String; 7]) -> Result<(FieldIndices, usize)> {
    let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
    let find = |tag: &str| {
        cols.iter()
            .position(|c| *c == tag)
            .ok_or_else(|| Error::RecordFormat(format!("header has no {tag:?} column")))
    };
    let indices = FieldIndices {
        authors: find(&tags[0])?,
        title: find(&tags[1])?,
        abstract_text: find(&tags[2])?,
        categories: find(&tags[3])?,
        research_areas: find(&tags[4])?,
        total_times_cited: find(&tags[5])?,
        times_cited_core: find(&tags[6])?,
    };
    Ok((indices, cols.len()))
}

fn record_from_columns(
    cols: &[&str],
    idx: &FieldIndices,
    sep: char,
) -> std::result::Result<RawRecord, String> {
    let list = |i: usize| -> Vec<String> {
        cols[i]
            .split(sep)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    };
    let count = |i: usize, name: &str| -> std::result::Result<u64, String> {
        let v = cols[i].trim();
        if v.is_empty() {
            return Ok(0);
        }
        v.parse().map_err(|_| format!("{name} is not a non-negative integer: {v:?}"))
    };
    Ok(RawRecord {
        authors: list(idx.authors),
        title: cols[idx.title].trim().to_string(),
        abstract_text: cols[idx.abstract_text].trim().to_string(),
        categories: list(idx.categories),
        research_areas: list(idx.research_areas),
        total_times_cited: count(idx.total_times_cited, "total times cited")?,
        times_cited_core: count(idx.times_cited_core, "times cited in core collection")?,
    })
}

fn clean_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Writes records as the canonical seven-column corpus file, with header.
pub fn write_corpus<'a, W, I>(mut out: W, records: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a RawRecord>,
{
    writeln!(out, "{}", CANONICAL_TAGS.join("\t"))?;
    for r in records {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            clean_field(&r.authors.join("; ")),
            clean_field(&r.title),
            clean_field(&r.abstract_text),
            clean_field(&r.categories.join("; ")),
            clean_field(&r.research_areas.join("; ")),
            r.total_times_cited,
            r.times_cited_core,
        )?;
    }
    Ok(())
}

/// Keeps records that have an abstract and at least one category.
pub fn filter_invalid(records: Vec<RawRecord>) -> Vec<RawRecord> {
    records
        .into_iter()
        .filter(|r| !r.abstract_text.trim().is_empty() && !r.categories.is_empty())
        .collect()
}

/// Splits section headings glued to the following capitalised word.
#[derive(Debug, Clone)]
pub struct HeadingSplitter {
    by_first: HashMap<char, Vec<String>>,
}

impl HeadingSplitter {
    pub fn new<S: AsRef<str>>(headings: &[S]) -> Self {
        let mut by_first: HashMap<char, Vec<String>> = HashMap::new();
        for h in headings {
            let h = h.as_ref();
            if let Some(c) = h.chars().next() {
                by_first.entry(c).or_default().push(h.to_string());
            }
        }
        for list in by_first.values_mut() {
            list.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            list.dedup();
        }
        HeadingSplitter { by_first }
    }

    /// Returns the corrected text and the number of splits made.
    pub fn split(&self, text: &str) -> (String, usize) {
        let mut out = String::with_capacity(text.len() + 8);
        let mut splits = 0;
        let mut prev: Option<char> = None;
        let mut i = 0;
        while i < text.len() {
            let rest = &text[i..];
            let c = rest.chars().next().expect("non-empty remainder");
            let at_boundary = prev.is_none_or(|p| !p.is_alphanumeric());
            if at_boundary {
                if let Some(h) = self.match_at(rest) {
                    out.push_str(h);
                    out.push(' ');
                    splits += 1;
                    i += h.len();
                    prev = Some(' ');
                    continue;
                }
            }
            out.push(c);
            prev = Some(c);
            i += c.len_utf8();
        }
        (out, splits)
    }

    fn match_at(&self, rest: &str) -> Option<&str> {
        let first = rest.chars().next()?;
        self.by_first.get(&first)?.iter().map(String::as_str).find(|h| {
            rest.starts_with(h)
                && rest[h.len()..].chars().next().is_some_and(char::is_uppercase)
        })
    }
}

pub fn split_concatenated_headings(text: &str, splitter: &HeadingSplitter) -> (String, usize) {
    splitter.split(text)
}

/// Number of maximal non-whitespace runs.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Keeps documents with `min <= word_count <= max`.
pub fn filter_by_length(docs: Vec<Document>, min: usize, max: usize) -> Vec<Document> {
    docs.into_iter()
        .filter(|d| (min..=max).contains(&d.word_count))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LengthHistogram {
    pub counts: BTreeMap<usize, usize>,
    pub mean: Option<f64>,
}

impl LengthHistogram {
    pub fn from_lengths<I: IntoIterator<Item = usize>>(lengths: I) -> Self {
        let mut counts = BTreeMap::new();
        let (mut n, mut total) = (0usize, 0u128);
        for len in lengths {
            *counts.entry(len).or_insert(0) += 1;
            n += 1;
            total += len as u128;
        }
        let mean = (n > 0).then(|| total as f64 / n as f64);
        LengthHistogram { counts, mean }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

pub fn length_histogram(docs: &[Document]) -> LengthHistogram {
    LengthHistogram::from_lengths(docs.iter().map(|d| d.word_count))
}

/// `length,before,after` rows for the two distributions.
pub fn length_csv(before: &LengthHistogram, after: &LengthHistogram) -> String {
    let mut keys: Vec<usize> = before.counts.keys().chain(after.counts.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut s = String::from("length,before,after\n");
    for k in keys {
        let b = before.counts.get(&k).copied().unwrap_or(0);
        let a = after.counts.get(&k).copied().unwrap_or(0);
        let _ = writeln!(s, "{k},{b},{a}");
    }
    s
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub n_parsed: usize,
    pub n_malformed: usize,
    pub n_after_field_filter: usize,
    pub n_headings_split: usize,
    pub n_too_short: usize,
    pub n_too_long: usize,
    pub n_after_length_filter: usize,
    pub n_category_warnings: usize,
}

impl IngestReport {
    const KEYS: [&'static str; 8] = [
        "n_parsed",
        "n_malformed",
        "n_after_field_filter",
        "n_headings_split",
        "n_too_short",
        "n_too_long",
        "n_after_length_filter",
        "n_category_warnings",
    ];

    fn values(&self) -> [usize; 8] {
        [
            self.n_parsed,
            self.n_malformed,
            self.n_after_field_filter,
            self.n_headings_split,
            self.n_too_short,
            self.n_too_long,
            self.n_after_length_filter,
            self.n_category_warnings,
        ]
    }

    pub fn to_kv(&self) -> String {
        Self::KEYS
            .iter()
            .zip(self.values())
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut r = IngestReport::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::RecordFormat(format!("bad report line {line:?}")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::RecordFormat(format!("bad report value {line:?}")))?;
            let slot = match k.trim() {
                "n_parsed" => &mut r.n_parsed,
                "n_malformed" => &mut r.n_malformed,
                "n_after_field_filter" => &mut r.n_after_field_filter,
                "n_headings_split" => &mut r.n_headings_split,
                "n_too_short" => &mut r.n_too_short,
                "n_too_long" => &mut r.n_too_long,
                "n_after_length_filter" => &mut r.n_after_length_filter,
                "n_category_warnings" => &mut r.n_category_warnings,
                other => return Err(Error::RecordFormat(format!("unknown report key {other:?}"))),
            };
            *slot = v;
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthBounds {
    pub min: usize,
    pub max: usize,
}

impl Default for LengthBounds {
    fn default() -> Self {
        LengthBounds { min: DEFAULT_MIN_LEN, max: DEFAULT_MAX_LEN }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub documents: Vec<Document>,
    pub report: IngestReport,
    pub ledger: Vec<LedgerEntry>,
    pub lengths_before: LengthHistogram,
    pub lengths_after: LengthHistogram,
}

/// Runs the full cleaning sequence over a parsed export.
pub fn clean(parsed: ParseOutcome, splitter: &HeadingSplitter, bounds: LengthBounds) -> Result<IngestOutcome> {
    if bounds.min > bounds.max {
        return Err(Error::InvalidParameter(format!(
            "length bounds {}..{} are inverted",
            bounds.min, bounds.max
        )));
    }
    let mut report = IngestReport {
        n_parsed: parsed.records.len(),
        n_malformed: parsed.ledger.len(),
        ..Default::default()
    };
    let valid = filter_invalid(parsed.records);
    report.n_after_field_filter = valid.len();

    let split = split_all(valid, splitter);
    report.n_headings_split = split.iter().map(|(_, n)| n).sum();
    let docs: Vec<Document> = split.into_iter().map(|(d, _)| d).collect();
    report.n_category_warnings =
        docs.iter().filter(|d| d.record.categories.len() > MAX_CATEGORIES).count();

    let lengths_before = length_histogram(&docs);
    report.n_too_short = docs.iter().filter(|d| d.word_count < bounds.min).count();
    report.n_too_long = docs.iter().filter(|d| d.word_count > bounds.max).count();
    let documents = filter_by_length(docs, bounds.min, bounds.max);
    report.n_after_length_filter = documents.len();
    let lengths_after = length_histogram(&documents);

    Ok(IngestOutcome {
        documents,
        report,
        ledger: parsed.ledger,
        lengths_before,
        lengths_after,
    })
}

fn split_one(mut r: RawRecord, splitter: &HeadingSplitter) -> (Document, usize) {
    let (text, n) = splitter.split(&r.abstract_text);
    r.abstract_text = text;
    (Document::new(r), n)
}

fn split_all(records: Vec<RawRecord>, splitter: &HeadingSplitter) -> Vec<(Document, usize)> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        records.into_par_iter().map(|r| split_one(r, splitter)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        records.into_iter().map(|r| split_one(r, splitter)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PipelineConfig;

    fn splitter() -> HeadingSplitter {
        HeadingSplitter::new(&PipelineConfig::default().expanded_headings())
    }

    fn parse(text: &str) -> ParseOutcome {
        parse_records(text.as_bytes(), &RecordFormat::default()).unwrap()
    }

    const HEADER: &str = "AU\tTI\tAB\tWC\tSC\tZ9\tTC\n";

    #[test]
    fn header_and_two_rows() {
        let text = format!(
            "{HEADER}A, B; C, D\tT1\tSome text\tPhysics; Optics\tPhysics\t3\t2\n\tT2\tMore\tBiology\tLife\t0\t0\n"
        );
        let out = parse(&text);
        assert_eq!(out.records.len(), 2);
        assert!(out.ledger.is_empty());
        assert_eq!(out.records[0].authors, vec!["A, B", "C, D"]);
        assert_eq!(out.records[0].categories, vec!["Physics", "Optics"]);
        assert_eq!(out.records[0].total_times_cited, 3);
        assert!(out.records[1].authors.is_empty());
    }

    #[test]
    fn wrong_column_count_goes_to_ledger() {
        let text = format!("{HEADER}a\tb\tc\td\te\n");
        let out = parse(&text);
        assert!(out.records.is_empty());
        assert_eq!(out.ledger.len(), 1);
        assert_eq!(out.ledger[0].line, 2);
    }

    #[test]
    fn bad_citation_count_goes_to_ledger() {
        let text = format!("{HEADER}a\tb\tc\td\te\tmany\t0\n");
        let out = parse(&text);
        assert!(out.records.is_empty());
        assert_eq!(out.ledger[0].line, 2);
    }

    #[test]
    fn header_columns_are_located_by_tag() {
        let text = "PT\tTI\tAU\tAB\tSC\tWC\tTC\tZ9\nJ\tTitle\tX, Y\tBody\tArea\tCat\t1\t5\n";
        let out = parse(text);
        let r = &out.records[0];
        assert_eq!(r.title, "Title");
        assert_eq!(r.categories, vec!["Cat"]);
        assert_eq!(r.research_areas, vec!["Area"]);
        assert_eq!((r.total_times_cited, r.times_cited_core), (5, 1));
    }

    #[test]
    fn missing_header_tag_is_fatal() {
        let err = parse_records("AU\tTI\n".as_bytes(), &RecordFormat::default());
        assert!(err.is_err());
    }

    #[test]
    fn fixed_column_layout() {
        let format = RecordFormat {
            columns: ColumnMap::Fixed {
                indices: FieldIndices {
                    authors: 0,
                    title: 1,
                    abstract_text: 2,
                    categories: 3,
                    research_areas: 4,
                    total_times_cited: 5,
                    times_cited_core: 6,
                },
                n_columns: 7,
            },
            list_separator: '|',
        };
        let out = parse_records("a|b\tt\tab\tc1|c2\tr\t1\t1\n".as_bytes(), &format).unwrap();
        assert_eq!(out.records[0].authors, vec!["a", "b"]);
        assert_eq!(out.records[0].categories, vec!["c1", "c2"]);
    }

    #[test]
    fn crlf_and_bom_are_tolerated() {
        let text = format!("\u{feff}{}", "AU\tTI\tAB\tWC\tSC\tZ9\tTC\r\nA\tT\tX\tC\tR\t1\t1\r\n");
        let out = parse(&text);
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].times_cited_core, 1);
    }

    #[test]
    fn invalid_records_are_removed() {
        let good = RawRecord {
            abstract_text: "text".into(),
            categories: vec!["Physics".into()],
            ..Default::default()
        };
        let no_abstract = RawRecord { abstract_text: String::new(), ..good.clone() };
        let no_category = RawRecord { categories: vec![], ..good.clone() };
        let out = filter_invalid(vec![no_abstract, good.clone(), no_category]);
        assert_eq!(out, vec![good]);
    }

    #[test]
    fn heading_splits() {
        let s = splitter();
        assert_eq!(s.split("ConclusionHigher"), ("Conclusion Higher".to_string(), 1));
        assert_eq!(s.split("ConclusionsRT"), ("Conclusions RT".to_string(), 1));
        assert_eq!(s.split("conclusionhigher"), ("conclusionhigher".to_string(), 0));
        assert_eq!(
            s.split("ResultsMethodsThe data. AimsTo test."),
            ("Results Methods The data. Aims To test.".to_string(), 3)
        );
        // heading must start a word
        assert_eq!(s.split("PreResultsX").1, 0);
        assert_eq!(
            s.split("Implications for health and nursing policyNurses"),
            ("Implications for health and nursing policy Nurses".to_string(), 1)
        );
    }

    #[test]
    fn heading_split_is_idempotent() {
        let s = splitter();
        let (once, _) = s.split("BackgroundWe studied. ConclusionsRT works. ObjectiveTo know.");
        let (twice, n) = s.split(&once);
        assert_eq!(once, twice);
        assert_eq!(n, 0);
    }

    #[test]
    fn word_counts() {
        assert_eq!(word_count("Tau Reduction Diminishes"), 3);
        assert_eq!(word_count("z-score  test"), 2);
        assert_eq!(word_count(""), 0);
    }

    fn doc_with_len(n: usize) -> Document {
        Document::new(RawRecord {
            abstract_text: vec!["w"; n].join(" "),
            categories: vec!["C".into()],
            ..Default::default()
        })
    }

    #[test]
    fn length_bounds_are_inclusive() {
        let docs: Vec<Document> = [29, 30, 500, 501].into_iter().map(doc_with_len).collect();
        let kept: Vec<usize> = filter_by_length(docs, 30, 500).iter().map(|d| d.word_count).collect();
        assert_eq!(kept, vec![30, 500]);
    }

    #[test]
    fn histogram_and_mean() {
        let h = length_histogram(&[doc_with_len(3), doc_with_len(3), doc_with_len(5)]);
        assert_eq!(h.counts, BTreeMap::from([(3, 2), (5, 1)]));
        assert!((h.mean.unwrap() - 11.0 / 3.0).abs() < 1e-12);
        let empty = length_histogram(&[]);
        assert!(empty.counts.is_empty());
        assert_eq!(empty.mean, None);
    }

    #[test]
    fn report_kv_round_trip() {
        let r = IngestReport {
            n_parsed: 5,
            n_malformed: 1,
            n_after_field_filter: 4,
            n_headings_split: 2,
            n_too_short: 1,
            n_too_long: 0,
            n_after_length_filter: 3,
            n_category_warnings: 0,
        };
        assert_eq!(IngestReport::from_kv(&r.to_kv()).unwrap(), r);
    }

    #[test]
    fn clean_counts_add_up() {
        let long = vec!["word"; 40].join(" ");
        let text = format!(
            "{HEADER}A\tT\tConclusionHigher {long}\tC\tR\t0\t0\nA\tT\t\tC\tR\t0\t0\nA\tT\tshort text\tC\tR\t0\t0\n"
        );
        let out = clean(parse(&text), &splitter(), LengthBounds::default()).unwrap();
        let r = &out.report;
        assert_eq!((r.n_parsed, r.n_after_field_filter, r.n_after_length_filter), (3, 2, 1));
        assert_eq!(r.n_headings_split, 1);
        assert_eq!(r.n_after_length_filter + r.n_too_short + r.n_too_long, r.n_after_field_filter);
        assert!(out.documents[0].record.abstract_text.starts_with("Conclusion Higher"));
        assert_eq!(out.documents[0].word_count, 42);
    }
}
