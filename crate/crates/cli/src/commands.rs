use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use lexicorp::compare::{self, CompareOptions, ExternalWordList};
use lexicorp::dictionary::{min_unique_words_check, Dictionary, Provenance};
use lexicorp::ingest::{self, HeadingSplitter, IngestOutcome, LengthBounds, RawRecord, RecordFormat};
use lexicorp::stats::{self, SyntheticSpec};
use lexicorp::{Error, Pipeline, PipelineConfig, TokenList};
use serde_json::json;

use crate::manifest::{sidecar, FileDigest, RunManifest};
use crate::{ConfigArg, FitArgs, LengthArgs};

pub const CONFIG_ENV: &str = "LEXICORP_CONFIG_DIR";

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Compute(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Compute(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Compute(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParameter(_) => Failure::Usage(msg),
            Error::Io(_)
            | Error::RecordFormat(_)
            | Error::Config(_)
            | Error::MalformedDictionary { .. }
            | Error::MalformedWordList { .. }
            | Error::EmptyWordList => Failure::Input(msg),
            _ => Failure::Compute(msg),
        }
    }
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad lower bound {a:?}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad upper bound {b:?}"))?;
    if !(a <= b) {
        return Err(format!("lower bound {a} exceeds upper bound {b}"));
    }
    Ok((a, b))
}

/// Tracks inputs, outputs and warnings of one command for its manifest.
struct Run {
    manifest: RunManifest,
}

impl Run {
    fn new(command: &str) -> Self {
        Run { manifest: RunManifest::new(command) }
    }

    fn read(&mut self, path: &Path) -> Result<Vec<u8>, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        self.manifest.inputs.push(FileDigest::of(path, &bytes));
        Ok(bytes)
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), Failure> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)
                .map_err(|e| Failure::Input(format!("cannot create {}: {e}", parent.display())))?;
        }
        fs::write(path, bytes).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.outputs.push(FileDigest::of(path, bytes));
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.manifest.warnings.push(msg);
    }

    fn finish(mut self, path: &Path) -> Result<(), Failure> {
        let text = self.manifest.finalize();
        fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
    }
}

fn load_config(arg: &ConfigArg) -> Result<PipelineConfig, Failure> {
    let dir = arg
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    match dir {
        Some(d) => PipelineConfig::load_dir(&d).map_err(Failure::from),
        None => Ok(PipelineConfig::default()),
    }
}

fn ledger_tsv(entries: &[(String, String)]) -> String {
    let mut s = String::from("where\treason\n");
    for (w, r) in entries {
        s.push_str(&format!("{w}\t{r}\n"));
    }
    s
}

fn run_ingest(run: &mut Run, bytes: &[u8], cfg: &PipelineConfig, lengths: &LengthArgs) -> Result<IngestOutcome, Failure> {
    let parsed = ingest::parse_records(bytes, &RecordFormat::default())?;
    let splitter = HeadingSplitter::new(&cfg.expanded_headings());
    let outcome = ingest::clean(parsed, &splitter, LengthBounds { min: lengths.min_len, max: lengths.max_len })?;
    if !outcome.ledger.is_empty() {
        run.warn(format!("{} malformed rows skipped", outcome.ledger.len()));
    }
    if outcome.report.n_category_warnings > 0 {
        run.warn(format!(
            "{} records list more than {} categories",
            outcome.report.n_category_warnings,
            ingest::MAX_CATEGORIES
        ));
    }
    Ok(outcome)
}

fn write_ingest(run: &mut Run, out: &Path, outcome: &IngestOutcome) -> Result<(), Failure> {
    let mut corpus = Vec::new();
    ingest::write_corpus(&mut corpus, outcome.documents.iter().map(|d| &d.record))?;
    run.write(out, &corpus)?;
    run.write(&sidecar(out, "report.txt"), outcome.report.to_kv().as_bytes())?;
    let ledger: Vec<(String, String)> = outcome
        .ledger
        .iter()
        .map(|e| (format!("line {}", e.line), e.reason.clone()))
        .collect();
    run.write(&sidecar(out, "ledger.tsv"), ledger_tsv(&ledger).as_bytes())?;
    let lengths = ingest::length_csv(&outcome.lengths_before, &outcome.lengths_after);
    run.write(&sidecar(out, "lengths.csv"), lengths.as_bytes())?;
    Ok(())
}

pub fn ingest(input: &Path, out: &Path, config: &ConfigArg, lengths: &LengthArgs) -> Result<(), Failure> {
    let mut run = Run::new("ingest");
    let cfg = load_config(config)?;
    run.manifest.config_hash = Some(cfg.hash());
    let bytes = run.read(input)?;
    let outcome = run_ingest(&mut run, &bytes, &cfg, lengths)?;
    write_ingest(&mut run, out, &outcome)?;
    println!(
        "{} of {} records kept; corpus written to {}",
        outcome.report.n_after_length_filter,
        outcome.report.n_parsed,
        out.display()
    );
    run.finish(&sidecar(out, "manifest.json"))
}

struct Built {
    dict: Dictionary,
    lists: Vec<TokenList>,
}

fn build_dictionary(run: &mut Run, records: &[RawRecord], pipeline: &Pipeline, corpus_id: String) -> Built {
    let texts: Vec<&str> = records.iter().map(|r| r.abstract_text.as_str()).collect();
    let lists = pipeline.process_all(&texts);
    let empty = lexicorp::pipeline::empty_documents(&lists);
    if !empty.is_empty() {
        run.warn(format!("{} documents have no tokens after processing", empty.len()));
    }
    let provenance = Provenance { corpus: corpus_id, config_hash: pipeline.config_hash().to_string(), threshold: 0 };
    let dict = Dictionary::build_all(&lists, provenance);
    Built { dict, lists }
}

fn empty_ledger(lists: &[TokenList]) -> Vec<(String, String)> {
    lexicorp::pipeline::empty_documents(lists)
        .into_iter()
        .map(|i| (format!("document {}", i + 1), "no tokens after processing".to_string()))
        .collect()
}

pub fn build(corpus: &Path, out: &Path, config: &ConfigArg) -> Result<(), Failure> {
    let mut run = Run::new("build");
    let cfg = load_config(config)?;
    let pipeline = Pipeline::new(cfg)?;
    run.manifest.config_hash = Some(pipeline.config_hash().to_string());
    let bytes = run.read(corpus)?;
    let parsed = ingest::parse_records(bytes.as_slice(), &RecordFormat::default())?;
    let mut ledger: Vec<(String, String)> =
        parsed.ledger.iter().map(|e| (format!("line {}", e.line), e.reason.clone())).collect();
    if !parsed.ledger.is_empty() {
        run.warn(format!("{} malformed corpus rows skipped", parsed.ledger.len()));
    }
    let built = build_dictionary(&mut run, &parsed.records, &pipeline, lexicorp::short_digest(&bytes));
    ledger.extend(empty_ledger(&built.lists));
    run.write(out, &built.dict.to_bytes())?;
    run.write(&sidecar(out, "ledger.tsv"), ledger_tsv(&ledger).as_bytes())?;
    println!("{} words from {} documents written to {}", built.dict.len(), built.lists.len(), out.display());
    run.finish(&sidecar(out, "manifest.json"))
}

fn read_dictionary(run: &mut Run, path: &Path) -> Result<Dictionary, Failure> {
    let bytes = run.read(path)?;
    Dictionary::read_any(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn prune(dict: &Path, out: &Path, threshold: u64) -> Result<(), Failure> {
    let mut run = Run::new("prune");
    let d = read_dictionary(&mut run, dict)?;
    run.manifest.config_hash = Some(d.provenance.config_hash.clone()).filter(|h| !h.is_empty());
    let pruned = d.prune(threshold);
    run.write(out, &pruned.to_bytes())?;
    println!("{} of {} words kept (doc_count > {threshold})", pruned.len(), d.len());
    run.finish(&sidecar(out, "manifest.json"))
}

fn fmt_range(r: (f64, f64)) -> String {
    format!("{}:{}", r.0, r.1)
}

/// Writes the distribution CSVs and fit summary into `dir`.
fn write_stats(run: &mut Run, dict: &Dictionary, dir: &Path, fit: &FitArgs) -> Result<(), Failure> {
    let hist = stats::histogram(dict);
    let cum = stats::cumulative(&hist);
    let curve = stats::tail(&hist);
    let mut summary = format!("words={}\n", hist.total);
    let fitted = match stats::fit_pareto(&curve, fit.range) {
        Ok(f) => {
            summary.push_str(&format!(
                "status=ok\nalpha={}\nbeta={}\nmse={}\nrange={}\nx_m={}\npoints={}\niterations={}\n",
                f.alpha,
                f.beta,
                f.mse,
                fmt_range(f.fit_range),
                f.x_m,
                f.n_points,
                f.iterations
            ));
            Some(f)
        }
        Err(e @ Error::InsufficientTailData { .. }) => {
            run.warn(format!("power-law fit skipped: {e}"));
            summary.push_str(&format!("status=unavailable\nreason={e}\n"));
            if let Some(r) = fit.range {
                summary.push_str(&format!("range={}\n", fmt_range(r)));
            }
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let Ok(slope) = stats::loglog_slope(&curve, fit.range) {
        summary.push_str(&format!("loglog_slope={slope}\n"));
    }
    run.write(&dir.join("histogram.csv"), stats::histogram_csv(&hist).as_bytes())?;
    run.write(&dir.join("cumulative.csv"), stats::cumulative_csv(&cum).as_bytes())?;
    run.write(&dir.join("tail.csv"), stats::tail_csv(&curve, fitted.as_ref()).as_bytes())?;
    run.write(&dir.join("loglog.csv"), stats::loglog_csv(&curve).as_bytes())?;
    run.write(&dir.join("fit.txt"), summary.as_bytes())?;
    if let Some(f) = &fitted {
        println!("alpha={:.4} beta={:.1} mse={:.3}", f.alpha, f.beta, f.mse);
    }
    Ok(())
}

pub fn stats(dict: &Path, out: &Path, fit: &FitArgs) -> Result<(), Failure> {
    let mut run = Run::new("stats");
    let d = read_dictionary(&mut run, dict)?;
    write_stats(&mut run, &d, out, fit)?;
    run.finish(&out.join("manifest.json"))
}

pub fn compare(dict: &Path, wordlist: &Path, out: &Path, opts: CompareOptions) -> Result<(), Failure> {
    let mut run = Run::new("compare");
    let d = read_dictionary(&mut run, dict)?;
    let list_bytes = run.read(wordlist)?;
    let list = ExternalWordList::read_csv(list_bytes.as_slice())
        .map_err(|e| Failure::Input(format!("{}: {e}", wordlist.display())))?;
    let stemmed = compare::stem_merge(&list);
    let report = compare::compare(&d, &stemmed, &opts)?;
    for note in &report.notes {
        run.warn(note.clone());
    }

    let mut stems = String::from("stem\tsfi_avg\theadwords\n");
    for e in &stemmed.entries {
        let sfi = e.sfi_avg.map(|v| v.to_string()).unwrap_or_default();
        stems.push_str(&format!("{}\t{}\t{}\n", e.stem, sfi, e.source_headwords.join(",")));
    }
    let mut orderings = String::from("position\tdictionary\tword_list\n");
    for (i, (a, b)) in report.dict_order.iter().zip(&report.list_order).enumerate() {
        orderings.push_str(&format!("{}\t{a}\t{b}\n", i + 1));
    }

    let corr = report.correlations.as_ref();
    let summary = json!({
        "headwords": list.len(),
        "stems": report.list_size,
        "dictionary_words": report.dict_size,
        "common_words": report.coverage.count,
        "coverage_pct": (report.coverage.pct * 1000.0).round() / 10.0,
        "missing": report.coverage.missing,
        "src": corr.map(|c| c.src),
        "pcc": corr.map(|c| c.pcc),
        "pcc_log": corr.map(|c| c.pcc_log),
        "interval_overlaps": report.interval_overlaps.iter().map(|&(w, f)| json!({"width": w, "fraction": f})).collect::<Vec<_>>(),
        "top_overlaps": report.top_overlaps.iter().map(|&(n, c)| json!({"n": n, "common": c})).collect::<Vec<_>>(),
        "bottom_overlaps": report.bottom_overlaps.iter().map(|&(n, c)| json!({"n": n, "common": c})).collect::<Vec<_>>(),
        "same_rank_words": report.same_rank_words.iter().map(|(w, p)| json!({"word": w, "position": p})).collect::<Vec<_>>(),
        "notes": report.notes,
    });
    let mut summary_text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    summary_text.push('\n');

    run.write(&out.join("stems.tsv"), stems.as_bytes())?;
    run.write(&out.join("coverage.tsv"), report.coverage_tsv().as_bytes())?;
    run.write(&out.join("fragments.tsv"), report.fragments_tsv().as_bytes())?;
    run.write(&out.join("last_positions.tsv"), report.last_positions_tsv().as_bytes())?;
    run.write(&out.join("intervals.tsv"), report.intervals_tsv().as_bytes())?;
    run.write(&out.join("overlaps.tsv"), report.overlaps_tsv().as_bytes())?;
    run.write(&out.join("correlations.tsv"), report.correlations_tsv().as_bytes())?;
    run.write(&out.join("same_rank.tsv"), report.same_rank_tsv().as_bytes())?;
    run.write(&out.join("orderings.tsv"), orderings.as_bytes())?;
    run.write(&out.join("summary.json"), summary_text.as_bytes())?;
    println!(
        "{} of {} stems found ({}%)",
        report.coverage.count,
        report.list_size,
        compare::pct1(report.coverage.pct)
    );
    run.finish(&out.join("manifest.json"))
}

pub fn gen(out: &Path, spec: &SyntheticSpec) -> Result<(), Failure> {
    let mut run = Run::new("gen");
    run.manifest.seed = Some(spec.seed);
    let docs = stats::gen_synthetic_corpus(spec)?;
    let records: Vec<RawRecord> = docs
        .enumerate()
        .map(|(i, doc)| RawRecord {
            authors: vec!["Synthetic".into()],
            title: format!("Synthetic document {}", i + 1),
            abstract_text: doc.tokens().join(" "),
            categories: vec!["Synthetic".into()],
            research_areas: vec!["Synthetic".into()],
            total_times_cited: 0,
            times_cited_core: 0,
        })
        .collect();
    let mut bytes = Vec::new();
    ingest::write_corpus(&mut bytes, &records)?;
    run.write(out, &bytes)?;
    println!("{} synthetic documents written to {}", records.len(), out.display());
    run.finish(&sidecar(out, "manifest.json"))
}

pub fn dump_config(out: &Path, config: &ConfigArg) -> Result<(), Failure> {
    let mut run = Run::new("dump-config");
    let cfg = load_config(config)?;
    run.manifest.config_hash = Some(cfg.hash());
    use lexicorp::config::{HEADINGS_FILE, PREFIXES_FILE, STOP_WORDS_FILE, SUBSTITUTIONS_FILE};
    run.write(&out.join(PREFIXES_FILE), cfg.prefixes_text().as_bytes())?;
    run.write(&out.join(SUBSTITUTIONS_FILE), cfg.substitutions_text().as_bytes())?;
    run.write(&out.join(STOP_WORDS_FILE), cfg.stop_words_text().as_bytes())?;
    run.write(&out.join(HEADINGS_FILE), cfg.headings_text().as_bytes())?;
    println!(
        "{} prefixes, {} substitutions, {} stop words, {} headings written to {}",
        cfg.prefixes.len(),
        cfg.substitutions.len(),
        cfg.stop_words.len(),
        cfg.headings.len(),
        out.display()
    );
    run.finish(&out.join("manifest.json"))
}

pub fn pipeline(
    input: &Path,
    out: &Path,
    config: &ConfigArg,
    lengths: &LengthArgs,
    threshold: u64,
    fit: &FitArgs,
    min_unique: usize,
) -> Result<(), Failure> {
    let mut run = Run::new("pipeline");
    let cfg = load_config(config)?;
    let pipeline = Pipeline::new(cfg.clone())?;
    run.manifest.config_hash = Some(pipeline.config_hash().to_string());
    let bytes = run.read(input)?;

    let outcome = run_ingest(&mut run, &bytes, &cfg, lengths)?;
    let corpus_path = out.join("corpus.tsv");
    write_ingest(&mut run, &corpus_path, &outcome)?;

    let records: Vec<RawRecord> = outcome.documents.iter().map(|d| d.record.clone()).collect();
    let mut corpus_bytes = Vec::new();
    ingest::write_corpus(&mut corpus_bytes, &records)?;
    let built = build_dictionary(&mut run, &records, &pipeline, lexicorp::short_digest(&corpus_bytes));
    run.write(&out.join("dictionary.tsv"), &built.dict.to_bytes())?;
    run.write(&out.join("dictionary.ledger.tsv"), ledger_tsv(&empty_ledger(&built.lists)).as_bytes())?;

    let core = built.dict.prune(threshold);
    run.write(&out.join("dictionary_pruned.tsv"), &core.to_bytes())?;

    let short = min_unique_words_check(&built.lists, &core, min_unique);
    let mut short_text = String::from("document\tunique_words\n");
    for s in &short {
        short_text.push_str(&format!("{}\t{}\n", s.index + 1, s.unique_words));
    }
    if !short.is_empty() {
        run.warn(format!(
            "{} documents have fewer than {min_unique} distinct words in the pruned dictionary",
            short.len()
        ));
    }
    run.write(&out.join("short_documents.tsv"), short_text.as_bytes())?;

    write_stats(&mut run, &built.dict, &out.join("stats"), fit)?;
    write_stats(&mut run, &core, &out.join("stats_pruned"), fit)?;
    println!(
        "{} documents, {} words, {} after pruning at {threshold}",
        outcome.documents.len(),
        built.dict.len(),
        core.len()
    );
    run.finish(&out.join("manifest.json"))
}
