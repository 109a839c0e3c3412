//! Comparison of a dictionary against an external headword list.
//!
//! Headwords are stemmed and merged, then coverage, fragment and rank
//! analyses run over the words the two lists share.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Read;

use crate::dictionary::Dictionary;
use crate::pipeline::stem_token;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalEntry {
    pub headword: String,
    pub sfi: Option<f64>,
    pub u: Option<f64>,
    pub d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExternalWordList {
    pub entries: Vec<ExternalEntry>,
}

impl ExternalWordList {
    /// Reads `headword,sfi[,u,d]` CSV. A first row whose second column is not
    /// numeric is taken as a header. A one-column file yields a list without SFI.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut entries = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let line = i + 1;
            let bad = |reason: String| Error::MalformedWordList { line, reason };
            let row = row.map_err(|e| bad(e.to_string()))?;
            let cols: Vec<&str> = row.iter().collect();
            if cols.iter().all(|c| c.is_empty()) {
                continue;
            }
            let headword = cols[0].trim_start_matches('\u{feff}');
            if i == 0 && is_header(&cols) {
                continue;
            }
            if headword.is_empty() {
                return Err(bad("empty headword".into()));
            }
            let num = |idx: usize, name: &str, lo: f64, hi: f64| -> Result<Option<f64>> {
                match cols.get(idx).filter(|s| !s.is_empty()) {
                    None => Ok(None),
                    Some(s) => {
                        let v: f64 = s
                            .parse()
                            .map_err(|_| bad(format!("{name} is not a number: {s:?}")))?;
                        if !(lo..=hi).contains(&v) {
                            return Err(bad(format!("{name} = {v} outside [{lo}, {hi}]")));
                        }
                        Ok(Some(v))
                    }
                }
            };
            entries.push(ExternalEntry {
                headword: headword.to_string(),
                sfi: num(1, "SFI", 0.0, 100.0)?,
                u: num(2, "U", 0.0, f64::INFINITY)?,
                d: num(3, "D", 0.0, 1.0)?,
            });
        }
        Ok(ExternalWordList { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn is_header(cols: &[&str]) -> bool {
    match cols.get(1) {
        Some(c) => c.parse::<f64>().is_err(),
        None => {
            let h = cols[0].to_ascii_lowercase();
            h == "headword" || h == "word"
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StemmedEntry {
    pub stem: String,
    /// Mean SFI of the merged headwords that carry one.
    pub sfi_avg: Option<f64>,
    pub source_headwords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StemmedWordList {
    pub entries: Vec<StemmedEntry>,
}

impl StemmedWordList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when every stem has an SFI.
    pub fn has_sfi(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|e| e.sfi_avg.is_some())
    }

    /// Stems by SFI descending; ties and missing SFIs keep list order.
    pub fn by_sfi(&self) -> Vec<&StemmedEntry> {
        let mut v: Vec<&StemmedEntry> = self.entries.iter().collect();
        v.sort_by(|a, b| {
            let a = a.sfi_avg.unwrap_or(f64::NEG_INFINITY);
            let b = b.sfi_avg.unwrap_or(f64::NEG_INFINITY);
            b.total_cmp(&a)
        });
        v
    }
}

/// Stems each headword and merges headwords sharing a stem, in first-occurrence order.
pub fn stem_merge(list: &ExternalWordList) -> StemmedWordList {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<(String, Vec<String>, Vec<f64>)> = Vec::new();
    for e in &list.entries {
        let stem = stem_token(&e.headword.to_lowercase());
        let i = *index.entry(stem.clone()).or_insert_with(|| {
            groups.push((stem, Vec::new(), Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(e.headword.clone());
        if let Some(s) = e.sfi {
            groups[i].2.push(s);
        }
    }
    let entries = groups
        .into_iter()
        .map(|(stem, source_headwords, sfis)| StemmedEntry {
            stem,
            sfi_avg: (!sfis.is_empty()).then(|| sfis.iter().sum::<f64>() / sfis.len() as f64),
            source_headwords,
        })
        .collect();
    StemmedWordList { entries }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub count: usize,
    /// Fraction of the list found in the dictionary.
    pub pct: f64,
    /// In list order.
    pub common: Vec<String>,
    pub missing: Vec<String>,
}

pub fn coverage(dict: &Dictionary, list: &StemmedWordList) -> Result<Coverage> {
    if list.is_empty() {
        return Err(Error::EmptyWordList);
    }
    let vocab: HashSet<&str> = dict.words().collect();
    let (common, missing): (Vec<String>, Vec<String>) = list
        .entries
        .iter()
        .map(|e| e.stem.clone())
        .partition(|s| vocab.contains(s.as_str()));
    Ok(Coverage {
        count: common.len(),
        pct: common.len() as f64 / list.len() as f64,
        common,
        missing,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentRow {
    /// Requested fragment size.
    pub k: usize,
    /// Size actually searched after clamping to the dictionary length.
    pub k_used: usize,
    /// Share of the dictionary covered by the fragment.
    pub fragment_pct: f64,
    pub found: usize,
    /// Share of the list found in the fragment.
    pub found_pct: f64,
    /// List stems first found in this fragment, in dictionary order.
    pub newly_added: Vec<String>,
}

impl FragmentRow {
    pub fn clamped(&self) -> bool {
        self.k_used < self.k
    }
}

/// Coverage of the list by each top-`k` prefix of the dictionary.
pub fn fragment_coverage(dict: &Dictionary, list: &StemmedWordList, ks: &[usize]) -> Vec<FragmentRow> {
    let stems: HashSet<&str> = list.entries.iter().map(|e| e.stem.as_str()).collect();
    // 1-based dictionary ranks of list stems, ascending.
    let hits: Vec<(usize, &str)> = dict
        .words()
        .enumerate()
        .filter(|(_, w)| stems.contains(w))
        .map(|(i, w)| (i + 1, w))
        .collect();
    let mut prev = 0;
    ks.iter()
        .map(|&k| {
            let k_used = k.min(dict.len());
            let found = hits.partition_point(|&(r, _)| r <= k_used);
            let newly_added = if found > prev {
                hits[prev..found].iter().map(|&(_, w)| w.to_string()).collect()
            } else {
                Vec::new()
            };
            prev = found;
            FragmentRow {
                k,
                k_used,
                fragment_pct: ratio(k_used, dict.len()),
                found,
                found_pct: ratio(found, list.len()),
                newly_added,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LastPositionRow {
    pub m: usize,
    /// Largest dictionary rank among the top-`m` common stems; 0 when none.
    pub max_rank: usize,
    pub pct_of_dict: f64,
}

/// For the top-`m` list stems (by SFI, restricted to stems in the
/// dictionary), the largest dictionary rank any of them holds.
pub fn last_position(dict: &Dictionary, list: &StemmedWordList, ms: &[usize]) -> Vec<LastPositionRow> {
    let ranks = dict.ranks();
    let ordered: Vec<usize> = list
        .by_sfi()
        .into_iter()
        .filter_map(|e| ranks.get(e.stem.as_str()).copied())
        .collect();
    let mut prefix_max = Vec::with_capacity(ordered.len());
    let mut acc = 0;
    for r in ordered {
        acc = acc.max(r);
        prefix_max.push(acc);
    }
    ms.iter()
        .map(|&m| {
            let max_rank = match m.min(prefix_max.len()) {
                0 => 0,
                n => prefix_max[n - 1],
            };
            LastPositionRow { m, max_rank, pct_of_dict: ratio(max_rank, dict.len()) }
        })
        .collect()
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn check_same_words(a: &[&str], b: &[&str]) -> Result<()> {
    let sa: HashSet<&str> = a.iter().copied().collect();
    if a.len() != b.len() || sa.len() != a.len() || !b.iter().all(|w| sa.contains(w)) {
        return Err(Error::MismatchedOrderings);
    }
    Ok(())
}

/// `sum_i n_i / N_t` where `n_i` is the overlap of the i-th width-sized
/// slices of the two orderings. The last slice may be shorter.
pub fn interval_overlap(a: &[&str], b: &[&str], width: usize) -> Result<f64> {
    if width < 1 {
        return Err(Error::InvalidParameter("interval width must be at least 1".into()));
    }
    check_same_words(a, b)?;
    if a.is_empty() {
        return Err(Error::EmptyWordList);
    }
    let shared: usize = a
        .chunks(width)
        .zip(b.chunks(width))
        .map(|(ca, cb)| {
            let s: HashSet<&str> = ca.iter().copied().collect();
            cb.iter().filter(|w| s.contains(*w)).count()
        })
        .sum();
    Ok(shared as f64 / a.len() as f64)
}

fn set_overlap(a: &[&str], b: &[&str]) -> usize {
    let s: HashSet<&str> = a.iter().copied().collect();
    b.iter().filter(|w| s.contains(*w)).count()
}

/// Words shared by the first `n` of each ordering; `n` is clamped to the length.
pub fn top_n_overlap(a: &[&str], b: &[&str], n: usize) -> usize {
    set_overlap(&a[..n.min(a.len())], &b[..n.min(b.len())])
}

pub fn bottom_n_overlap(a: &[&str], b: &[&str], n: usize) -> usize {
    set_overlap(&a[a.len() - n.min(a.len())..], &b[b.len() - n.min(b.len())..])
}

/// Words at the same 1-based position in both orderings.
pub fn same_rank_words(a: &[&str], b: &[&str]) -> Vec<(String, usize)> {
    a.iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (x, y))| x == y)
        .map(|(i, (x, _))| (x.to_string(), i + 1))
        .collect()
}

/// Average (fractional) ranks, 1-based.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

fn pearson_xy(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn need_pairs(pairs: &[(f64, f64)]) -> Result<()> {
    if pairs.len() < 2 {
        return Err(Error::TooFewPairs { needed: 2, got: pairs.len() });
    }
    Ok(())
}

fn unzip(pairs: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    pairs.iter().copied().unzip()
}

/// Spearman's coefficient as the Pearson correlation of fractional ranks.
pub fn spearman(pairs: &[(f64, f64)]) -> Result<f64> {
    need_pairs(pairs)?;
    let (x, y) = unzip(pairs);
    pearson_xy(&fractional_ranks(&x), &fractional_ranks(&y)).ok_or(Error::ZeroRankVariance)
}

pub fn pearson(pairs: &[(f64, f64)]) -> Result<f64> {
    need_pairs(pairs)?;
    let (x, y) = unzip(pairs);
    pearson_xy(&x, &y).ok_or(Error::ZeroVariance)
}

/// Pearson on natural logs of both coordinates.
pub fn pearson_log(pairs: &[(f64, f64)]) -> Result<f64> {
    need_pairs(pairs)?;
    if let Some(i) = pairs.iter().position(|&(a, b)| !(a > 0.0 && b > 0.0)) {
        return Err(Error::NonPositiveLog { item: format!("pair {i}") });
    }
    let logged: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| (a.ln(), b.ln())).collect();
    pearson(&logged)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correlations {
    pub src: f64,
    pub pcc: f64,
    pub pcc_log: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    /// Interval widths; `None` means 5, 10, 15, ... up to `N_t`, then `N_t`.
    pub widths: Option<Vec<usize>>,
    /// Sizes for top/bottom overlaps.
    pub tops: Vec<usize>,
    /// Fragment sizes; `None` means 1,000, 5,000, 10,000, ..., 80,000 and the dictionary size.
    pub fragments: Option<Vec<usize>>,
    /// List prefix sizes for last positions; `None` means 100, 200, ..., 800 and `N_t`.
    pub last_positions: Option<Vec<usize>>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            widths: None,
            tops: vec![10, 20, 50, 100, 200],
            fragments: None,
            last_positions: None,
        }
    }
}

pub fn default_widths(n_t: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (5..=n_t).step_by(5).collect();
    if v.last() != Some(&n_t) && n_t > 0 {
        v.push(n_t);
    }
    v
}

pub fn default_fragments(dict_len: usize) -> Vec<usize> {
    let mut v = vec![1_000];
    v.extend((5_000..=80_000).step_by(5_000));
    v.retain(|&k| k < dict_len);
    v.push(dict_len);
    v
}

pub fn default_last_positions(n_t: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (100..=800).step_by(100).filter(|&m| m < n_t).collect();
    v.push(n_t);
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub list_size: usize,
    pub dict_size: usize,
    pub coverage: Coverage,
    pub fragments: Vec<FragmentRow>,
    pub last_positions: Vec<LastPositionRow>,
    pub interval_overlaps: Vec<(usize, f64)>,
    pub top_overlaps: Vec<(usize, usize)>,
    pub bottom_overlaps: Vec<(usize, usize)>,
    /// `None` when the list has no SFI values.
    pub correlations: Option<Correlations>,
    pub same_rank_words: Vec<(String, usize)>,
    /// Common words in dictionary order.
    pub dict_order: Vec<String>,
    /// Common words in list (SFI) order.
    pub list_order: Vec<String>,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    pub fn n_common(&self) -> usize {
        self.coverage.count
    }
}

/// Runs every analysis over the words common to `dict` and `list`.
pub fn compare(dict: &Dictionary, list: &StemmedWordList, opts: &CompareOptions) -> Result<ComparisonReport> {
    let cov = coverage(dict, list)?;
    let n_t = cov.count;
    let mut notes = Vec::new();

    let common: HashSet<&str> = cov.common.iter().map(String::as_str).collect();
    let dict_order: Vec<&str> = dict.words().filter(|w| common.contains(w)).collect();
    let by_sfi = list.by_sfi();
    let list_order: Vec<&str> = by_sfi
        .iter()
        .map(|e| e.stem.as_str())
        .filter(|w| common.contains(w))
        .collect();

    let fragment_ks = opts.fragments.clone().unwrap_or_else(|| default_fragments(dict.len()));
    let fragments = fragment_coverage(dict, list, &fragment_ks);
    for row in fragments.iter().filter(|r| r.clamped()) {
        notes.push(format!("fragment {} clamped to dictionary size {}", row.k, row.k_used));
    }

    let ms = opts.last_positions.clone().unwrap_or_else(|| default_last_positions(n_t));
    let last_positions = last_position(dict, list, &ms);
    if !cov.missing.is_empty() {
        notes.push(format!(
            "{} list stems absent from the dictionary are ignored in rank analyses",
            cov.missing.len()
        ));
    }

    let mut interval_overlaps = Vec::new();
    if n_t > 0 {
        let widths = opts.widths.clone().unwrap_or_else(|| default_widths(n_t));
        for w in widths {
            interval_overlaps.push((w, interval_overlap(&dict_order, &list_order, w)?));
        }
    }
    let top_overlaps = opts
        .tops
        .iter()
        .map(|&n| (n, top_n_overlap(&dict_order, &list_order, n)))
        .collect();
    let bottom_overlaps = opts
        .tops
        .iter()
        .map(|&n| (n, bottom_n_overlap(&dict_order, &list_order, n)))
        .collect();

    let correlations = if list.has_sfi() && n_t >= 2 {
        let sfi: HashMap<&str, f64> =
            list.entries.iter().map(|e| (e.stem.as_str(), e.sfi_avg.unwrap_or(0.0))).collect();
        let pairs: Vec<(f64, f64)> = dict_order
            .iter()
            .map(|w| (dict.get(w).map_or(0, |e| e.doc_count) as f64, sfi[w]))
            .collect();
        let src = spearman(&pairs)?;
        let pcc = pearson(&pairs)?;
        if let Some(i) = pairs.iter().position(|&(a, b)| !(a > 0.0 && b > 0.0)) {
            return Err(Error::NonPositiveLog { item: format!("word {:?}", dict_order[i]) });
        }
        let pcc_log = pearson_log(&pairs)?;
        Some(Correlations { src, pcc, pcc_log })
    } else {
        notes.push(if list.has_sfi() {
            format!("correlations skipped: {n_t} common words, need at least 2")
        } else {
            "correlations skipped: word list has no SFI column".into()
        });
        None
    };

    Ok(ComparisonReport {
        list_size: list.len(),
        dict_size: dict.len(),
        same_rank_words: same_rank_words(&dict_order, &list_order),
        dict_order: dict_order.iter().map(|s| s.to_string()).collect(),
        list_order: list_order.iter().map(|s| s.to_string()).collect(),
        coverage: cov,
        fragments,
        last_positions,
        interval_overlaps,
        top_overlaps,
        bottom_overlaps,
        correlations,
        notes,
    })
}

/// Percentage with one decimal, e.g. `0.9955` -> `99.6`.
pub fn pct1(fraction: f64) -> String {
    format!("{:.1}", fraction * 100.0)
}

impl ComparisonReport {
    pub fn coverage_tsv(&self) -> String {
        let mut s = String::from("list_size\tcommon\tcoverage_pct\tmissing\n");
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}",
            self.list_size,
            self.coverage.count,
            pct1(self.coverage.pct),
            self.coverage.missing.join(",")
        );
        s
    }

    pub fn fragments_tsv(&self) -> String {
        let mut s = String::from("k\tk_used\tfragment_pct\tfound\tfound_pct\tnewly_added\n");
        for r in &self.fragments {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.k,
                r.k_used,
                pct1(r.fragment_pct),
                r.found,
                pct1(r.found_pct),
                r.newly_added.join(",")
            );
        }
        s
    }

    pub fn last_positions_tsv(&self) -> String {
        let mut s = String::from("m\tmax_rank\tpct_of_dict\n");
        for r in &self.last_positions {
            let _ = writeln!(s, "{}\t{}\t{}", r.m, r.max_rank, pct1(r.pct_of_dict));
        }
        s
    }

    pub fn intervals_tsv(&self) -> String {
        let mut s = String::from("width\tintervals\tfraction\n");
        for &(w, f) in &self.interval_overlaps {
            let _ = writeln!(s, "{w}\t{}\t{f:.6}", self.n_common().div_ceil(w));
        }
        s
    }

    pub fn overlaps_tsv(&self) -> String {
        let mut s = String::from("n\ttop\tbottom\n");
        for (&(n, t), &(_, b)) in self.top_overlaps.iter().zip(&self.bottom_overlaps) {
            let _ = writeln!(s, "{n}\t{t}\t{b}");
        }
        s
    }

    pub fn correlations_tsv(&self) -> String {
        let mut s = String::from("measure\tvalue\n");
        if let Some(c) = &self.correlations {
            let _ = writeln!(s, "src\t{:.6}\npcc\t{:.6}\npcc_log\t{:.6}", c.src, c.pcc, c.pcc_log);
        }
        s
    }

    pub fn same_rank_tsv(&self) -> String {
        let mut s = String::from("word\tposition\n");
        for (w, p) in &self.same_rank_words {
            let _ = writeln!(s, "{w}\t{p}");
        }
        s
    }
}
