//! Rule tables for the text pipeline and heading splitter.
//!
//! The compiled-in defaults are the prefix, substitution, stop-word and
//! section-heading tables. Each table can be replaced by a plain-text file
//! (one entry per line; substitutions as `key<TAB>value`).

use std::fs;
use std::path::Path;

use crate::pipeline::Step;
use crate::{Error, Result};

pub const PREFIXES_FILE: &str = "prefixes.txt";
pub const SUBSTITUTIONS_FILE: &str = "substitutions.tsv";
pub const STOP_WORDS_FILE: &str = "stopwords.txt";
pub const HEADINGS_FILE: &str = "headings.txt";

pub const DEFAULT_PREFIXES: &[&str] = &[
    "anti", "ante", "auto", "co", "de", "deca", "di", "dia", "dis", "e", "ex", "extra", "fore",
    "hemi", "hexa", "hepta", "homo", "hyper", "in", "inter", "im", "ir", "kilo", "micro", "mid",
    "milli", "mis", "mono", "multi", "non", "octo", "over", "para", "penta", "per", "poly", "post",
    "pre", "pro", "quadri", "re", "retro", "self", "semi", "sub", "super", "tele", "tetra",
    "therm", "trans", "tri", "ultra", "un", "under", "uni",
];

pub const DEFAULT_SUBSTITUTIONS: &[(&str, &str)] = &[
    ("well-known", "wellknown"),
    ("z-test", "ztest"),
    ("z-testing", "ztest"),
    ("z-tests", "ztest"),
    ("z-score", "zscore"),
    ("z-scored", "zscored"),
    ("z-scores", "zscore"),
    ("p-value", "pvalue"),
    ("p-values", "pvalue"),
    ("p-valued", "pvalue"),
    ("p-valuesof", "pvalue"),
    ("chi-square", "chisquare"),
    ("chi-squares", "chisquare"),
    ("chi-squared", "chisquared"),
    ("chi2-test", "chisquared"),
];

/// English stop words of the R `tm` package.
pub const DEFAULT_STOP_WORDS: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "yours", "yourself",
    "yourselves", "he", "him", "his", "himself", "she", "herself", "it", "its", "itself", "they",
    "them", "their", "theirs", "which", "who", "whom", "this", "that", "these", "those", "am",
    "was", "were", "be", "been", "being", "have", "has", "had", "does", "did", "doing", "would",
    "should", "could", "ought", "i'm", "she's", "it's", "we're", "they're", "i've", "you've",
    "we've", "they've", "he'd", "she'd", "we'd", "they'd", "i'll", "you'll", "he'll", "she'll",
    "isn't", "aren't", "wasn't", "weren't", "hasn't", "haven't", "hadn't", "doesn't", "won't",
    "wouldn't", "shan't", "shouldn't", "can't", "cannot", "couldn't", "mustn't", "who's",
    "what's", "here's", "there's", "when's", "where's", "why's", "how's", "the", "and", "but",
    "if", "or", "because", "as", "until", "at", "by", "for", "with", "about", "against",
    "between", "into", "before", "after", "above", "below", "to", "from", "up", "down", "on",
    "off", "over", "under", "again", "further", "then", "once", "when", "where", "why", "how",
    "all", "any", "both", "each", "most", "other", "some", "such", "no", "nor", "not", "only",
    "you", "your", "her", "hers", "themselves", "what", "is", "are", "having", "do", "you're",
    "he's", "i'd", "you'd", "we'll", "they'll", "don't", "didn't", "let's", "that's", "a", "an",
    "while", "of", "through", "during", "in", "out", "here", "there", "few", "more", "so",
    "than", "too", "very", "own", "same",
];

/// Section headings of structured abstracts; `(s)` marks an optional plural.
pub const DEFAULT_HEADINGS: &[&str] = &[
    "Abstract",
    "Aim(s)",
    "Approach",
    "Background",
    "Conclusion(s)",
    "Design",
    "Discussion",
    "Finding(s)",
    "Hypothesis",
    "Introduction",
    "Limitation(s)",
    "Location",
    "Material(s)",
    "Measure(s)",
    "Measurement(s)",
    "Method(s)",
    "Methodology",
    "Objective(s)",
    "Patient(s)",
    "Population",
    "Procedure(s)",
    "Process",
    "Purpose(s)",
    "Rationale(s)",
    "Result(s)",
    "Setting(s)",
    "Subject(s)",
    "Theoretical",
    "Implication(s) for health and nursing policy",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub prefixes: Vec<String>,
    pub substitutions: Vec<(String, String)>,
    pub stop_words: Vec<String>,
    /// Heading table in its written notation, before plural expansion.
    pub headings: Vec<String>,
    pub step_order: Vec<Step>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            prefixes: DEFAULT_PREFIXES.iter().map(|s| s.to_string()).collect(),
            substitutions: DEFAULT_SUBSTITUTIONS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            stop_words: DEFAULT_STOP_WORDS.iter().map(|s| s.to_string()).collect(),
            headings: DEFAULT_HEADINGS.iter().map(|s| s.to_string()).collect(),
            step_order: Step::CANONICAL.to_vec(),
        }
    }
}

impl PipelineConfig {
    /// Loads tables from `dir`; any table file that is absent keeps its default.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Config(format!("{} is not a directory", dir.display())));
        }
        let mut cfg = PipelineConfig::default();
        if let Some(text) = read_optional(&dir.join(PREFIXES_FILE))? {
            cfg.prefixes = parse_list(&text)
                .map(|p| p.trim_end_matches('-').to_string())
                .collect();
        }
        if let Some(text) = read_optional(&dir.join(SUBSTITUTIONS_FILE))? {
            cfg.substitutions = parse_substitutions(&text)?;
        }
        if let Some(text) = read_optional(&dir.join(STOP_WORDS_FILE))? {
            cfg.stop_words = parse_list(&text).map(str::to_string).collect();
        }
        if let Some(text) = read_optional(&dir.join(HEADINGS_FILE))? {
            cfg.headings = parse_list(&text).map(str::to_string).collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.prefixes.is_empty() {
            return Err(Error::Config("prefix table is empty".into()));
        }
        if let Some(p) = self.prefixes.iter().find(|p| p.is_empty() || has_upper(p)) {
            return Err(Error::Config(format!("prefix {p:?} must be non-empty lowercase")));
        }
        if let Some((k, _)) = self.substitutions.iter().find(|(k, _)| !k.contains('-')) {
            return Err(Error::Config(format!("substitution key {k:?} contains no '-'")));
        }
        if let Some(w) = self.stop_words.iter().find(|w| has_upper(w)) {
            return Err(Error::Config(format!("stop word {w:?} must be lowercase")));
        }
        if self.step_order.is_empty() {
            return Err(Error::Config("empty step order".into()));
        }
        Ok(())
    }

    pub fn is_canonical_order(&self) -> bool {
        self.step_order == Step::CANONICAL
    }

    /// Headings with every `(s)` expanded to singular and plural forms.
    pub fn expanded_headings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for h in &self.headings {
            if h.contains("(s)") {
                out.push(h.replace("(s)", ""));
                out.push(h.replace("(s)", "s"));
            } else {
                out.push(h.clone());
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn prefixes_text(&self) -> String {
        lines(self.prefixes.iter().map(String::as_str))
    }

    pub fn substitutions_text(&self) -> String {
        lines(self.substitutions.iter().map(|(k, v)| format!("{k}\t{v}")))
    }

    pub fn stop_words_text(&self) -> String {
        lines(self.stop_words.iter().map(String::as_str))
    }

    pub fn headings_text(&self) -> String {
        lines(self.headings.iter().map(String::as_str))
    }

    /// Writes the four table files into `dir` (created if needed).
    pub fn dump(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(PREFIXES_FILE), self.prefixes_text())?;
        fs::write(dir.join(SUBSTITUTIONS_FILE), self.substitutions_text())?;
        fs::write(dir.join(STOP_WORDS_FILE), self.stop_words_text())?;
        fs::write(dir.join(HEADINGS_FILE), self.headings_text())?;
        Ok(())
    }

    /// Stable short hash of every table and the step order.
    pub fn hash(&self) -> String {
        let steps: Vec<&str> = self.step_order.iter().map(|s| s.name()).collect();
        let canonical = format!(
            "[prefixes]\n{}[substitutions]\n{}[stopwords]\n{}[headings]\n{}[steps]\n{}\n",
            self.prefixes_text(),
            self.substitutions_text(),
            self.stop_words_text(),
            self.headings_text(),
            steps.join(",")
        );
        crate::short_digest(canonical.as_bytes())
    }
}

fn has_upper(s: &str) -> bool {
    s.chars().any(char::is_uppercase)
}

fn lines<I, S>(items: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for item in items {
        out.push_str(item.as_ref());
        out.push('\n');
    }
    out
}

fn read_optional(path: &Path) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn parse_list(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn parse_substitutions(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('\t').ok_or_else(|| {
            Error::Config(format!("{SUBSTITUTIONS_FILE} line {}: expected key<TAB>value", i + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
