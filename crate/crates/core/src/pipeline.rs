//! The eight-step abstract normalisation pipeline.
//!
//! Steps, in canonical order: punctuation removal, lowercasing, prefix
//! uniting, substitutions, hyphen removal, number removal, stemming and
//! stop-word removal. The first six operate on text; the last two on
//! tokens. Each step is exposed as a free function so it can be tested and
//! reordered on its own.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::config::PipelineConfig;
use crate::{stem, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    StripPunctuation,
    Lowercase,
    UnitePrefixes,
    ApplySubstitutions,
    StripHyphens,
    StripNumbers,
    Stem,
    RemoveStopwords,
}

impl Step {
    pub const CANONICAL: [Step; 8] = [
        Step::StripPunctuation,
        Step::Lowercase,
        Step::UnitePrefixes,
        Step::ApplySubstitutions,
        Step::StripHyphens,
        Step::StripNumbers,
        Step::Stem,
        Step::RemoveStopwords,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Step::StripPunctuation => "punctuation",
            Step::Lowercase => "lowercase",
            Step::UnitePrefixes => "prefixes",
            Step::ApplySubstitutions => "substitutions",
            Step::StripHyphens => "hyphens",
            Step::StripNumbers => "numbers",
            Step::Stem => "stem",
            Step::RemoveStopwords => "stopwords",
        }
    }

    fn is_token_step(self) -> bool {
        matches!(self, Step::Stem | Step::RemoveStopwords)
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Step {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Step::CANONICAL
            .into_iter()
            .find(|step| step.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown pipeline step {s:?}")))
    }
}

/// Replaces every character that is neither alphanumeric nor `-` with a space.
pub fn strip_punctuation(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' { c } else { ' ' })
        .collect()
}

pub fn lowercase(text: &str) -> String {
    text.to_lowercase()
}

/// Joins `p-w` into `pw` when `p` is a listed prefix. Only the first hyphen
/// of a token is considered.
pub fn unite_prefixes(text: &str, prefixes: &HashSet<String>) -> String {
    map_tokens(text, |tok| match tok.split_once('-') {
        Some((p, rest)) if !rest.is_empty() && prefixes.contains(p) => {
            Some(format!("{p}{rest}"))
        }
        _ => Some(tok.to_string()),
    })
}

/// Whole-token replacement from the substitution table.
pub fn apply_substitutions(text: &str, substitutions: &HashMap<String, String>) -> String {
    map_tokens(text, |tok| {
        Some(substitutions.get(tok).cloned().unwrap_or_else(|| tok.to_string()))
    })
}

pub fn strip_hyphens(text: &str) -> String {
    text.replace('-', " ")
}

/// Drops tokens made only of digits; mixed tokens such as `co2` survive.
pub fn strip_numbers(text: &str) -> String {
    map_tokens(text, |tok| {
        if is_number(tok) {
            None
        } else {
            Some(tok.to_string())
        }
    })
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

/// Porter2 stem; tokens containing a digit are returned verbatim.
pub fn stem_token(token: &str) -> String {
    if token.chars().any(char::is_numeric) {
        token.to_string()
    } else {
        stem::stem(token)
    }
}

fn is_number(tok: &str) -> bool {
    !tok.is_empty() && tok.chars().all(char::is_numeric)
}

fn map_tokens<F>(text: &str, mut f: F) -> String
where
    F: FnMut(&str) -> Option<String>,
{
    let mut out = String::with_capacity(text.len());
    for tok in text.split_whitespace() {
        if let Some(t) = f(tok) {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&t);
        }
    }
    out
}

/// Stop words after running them through the pipeline's own steps.
///
/// A stop word that survives as one token is matched token by token.
/// Contractions split by punctuation removal (`can't` -> `can t`) are kept as
/// phrases and only removed when the whole token sequence occurs.
#[derive(Debug, Clone, Default)]
pub struct StopSet {
    words: HashSet<String>,
    phrases: Vec<Vec<String>>,
}

impl StopSet {
    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn phrases(&self) -> &[Vec<String>] {
        &self.phrases
    }

    pub fn from_tokens<I>(processed: I) -> Self
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut set = StopSet::default();
        for toks in processed {
            match toks.len() {
                0 => {}
                1 => {
                    set.words.insert(toks.into_iter().next().unwrap());
                }
                _ => {
                    if !set.phrases.contains(&toks) {
                        set.phrases.push(toks);
                    }
                }
            }
        }
        // longest phrase first
        set.phrases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        set
    }
}

pub fn remove_stopwords(tokens: Vec<String>, stop: &StopSet) -> Vec<String> {
    if stop.phrases.is_empty() {
        return tokens.into_iter().filter(|t| !stop.contains(t)).collect();
    }
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    'scan: while i < tokens.len() {
        for phrase in &stop.phrases {
            if tokens[i..].starts_with(phrase) {
                i += phrase.len();
                continue 'scan;
            }
        }
        if !stop.contains(&tokens[i]) {
            out.push(tokens[i].clone());
        }
        i += 1;
    }
    out
}

/// Processed tokens of one document: lowercase, stemmed, stop-word free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenList(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }
}

impl From<Vec<String>> for TokenList {
    fn from(v: Vec<String>) -> Self {
        TokenList(v)
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

enum State {
    Text(String),
    Tokens(Vec<String>),
}

impl State {
    fn into_text(self) -> String {
        match self {
            State::Text(t) => t,
            State::Tokens(t) => t.join(" "),
        }
    }

    fn into_tokens(self) -> Vec<String> {
        match self {
            State::Text(t) => tokenize(&t),
            State::Tokens(t) => t,
        }
    }
}

/// A compiled [`PipelineConfig`], immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    prefixes: HashSet<String>,
    substitutions: HashMap<String, String>,
    stop: StopSet,
    config_hash: String,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let prefixes = config.prefixes.iter().cloned().collect();
        let substitutions = config.substitutions.iter().cloned().collect();
        let config_hash = config.hash();
        let mut pipeline = Pipeline {
            config,
            prefixes,
            substitutions,
            stop: StopSet::default(),
            config_hash,
        };
        let stop_steps: Vec<Step> = pipeline
            .config
            .step_order
            .iter()
            .copied()
            .filter(|s| *s != Step::RemoveStopwords)
            .collect();
        let processed: Vec<Vec<String>> = pipeline
            .config
            .stop_words
            .iter()
            .map(|w| pipeline.run(w, &stop_steps))
            .collect();
        pipeline.stop = StopSet::from_tokens(processed);
        Ok(pipeline)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn stop_set(&self) -> &StopSet {
        &self.stop
    }

    pub fn prefixes(&self) -> &HashSet<String> {
        &self.prefixes
    }

    pub fn substitutions(&self) -> &HashMap<String, String> {
        &self.substitutions
    }

    /// Runs every configured step over one abstract.
    pub fn process(&self, text: &str) -> TokenList {
        TokenList(self.run(text, &self.config.step_order))
    }

    fn run(&self, text: &str, steps: &[Step]) -> Vec<String> {
        let mut state = State::Text(text.to_string());
        for &step in steps {
            state = if step.is_token_step() {
                let tokens = state.into_tokens();
                State::Tokens(match step {
                    Step::Stem => tokens.iter().map(|t| stem_token(t)).collect(),
                    _ => remove_stopwords(tokens, &self.stop),
                })
            } else {
                let text = state.into_text();
                State::Text(match step {
                    Step::StripPunctuation => strip_punctuation(&text),
                    Step::Lowercase => lowercase(&text),
                    Step::UnitePrefixes => unite_prefixes(&text, &self.prefixes),
                    Step::ApplySubstitutions => apply_substitutions(&text, &self.substitutions),
                    Step::StripHyphens => strip_hyphens(&text),
                    _ => strip_numbers(&text),
                })
            };
        }
        state.into_tokens()
    }

    /// Processes many abstracts, preserving input order.
    pub fn process_all<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<TokenList> {
        #[cfg(feature = "parallel")]
        {
            self.process_all_par(texts)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.process_all_seq(texts)
        }
    }

    pub fn process_all_seq<S: AsRef<str>>(&self, texts: &[S]) -> Vec<TokenList> {
        texts.iter().map(|t| self.process(t.as_ref())).collect()
    }

    #[cfg(feature = "parallel")]
    pub fn process_all_par<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<TokenList> {
        use rayon::prelude::*;
        texts.par_iter().map(|t| self.process(t.as_ref())).collect()
    }
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline::new(PipelineConfig::default()).expect("default tables are valid")
    }
}

/// Indices of documents whose processing left no tokens.
pub fn empty_documents(lists: &[TokenList]) -> Vec<usize> {
    lists
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_empty())
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn punctuation_is_replaced_one_for_one() {
        assert_eq!(strip_punctuation("(TBI)."), " TBI  ");
        assert_eq!(strip_punctuation("pre-processing,"), "pre-processing ");
        assert_eq!(strip_punctuation("co2; h2o"), "co2  h2o");
        assert_eq!(strip_punctuation("café!"), "café ");
    }

    #[test]
    fn lowercasing() {
        assert_eq!(lowercase("Corpus"), "corpus");
        assert_eq!(lowercase("CORPUS"), "corpus");
        assert_eq!(lowercase("corpus"), "corpus");
    }

    #[test]
    fn prefix_uniting() {
        let p = Pipeline::default();
        assert_eq!(unite_prefixes("anti-viral", p.prefixes()), "antiviral");
        assert_eq!(unite_prefixes("ex-president", p.prefixes()), "expresident");
        assert_eq!(unite_prefixes("well-known", p.prefixes()), "well-known");
        assert_eq!(unite_prefixes("anti-self-test", p.prefixes()), "antiself-test");
        assert_eq!(unite_prefixes("anti-", p.prefixes()), "anti-");
    }

    #[test]
    fn substitutions_match_whole_tokens() {
        let p = Pipeline::default();
        let s = p.substitutions();
        assert_eq!(apply_substitutions("well-known", s), "wellknown");
        assert_eq!(apply_substitutions("chi-square", s), "chisquare");
        assert_eq!(apply_substitutions("t-test", s), "t-test");
        assert_eq!(apply_substitutions("z-scores-based", s), "z-scores-based");
    }

    #[test]
    fn hyphens_and_numbers() {
        assert_eq!(strip_hyphens("state-of-the-art"), "state of the art");
        assert_eq!(strip_hyphens("t-test"), "t test");
        assert_eq!(strip_hyphens("wellknown"), "wellknown");
        assert_eq!(strip_numbers("in 2014 co2 rose"), "in co2 rose");
        assert_eq!(strip_numbers("21st"), "21st");
        assert_eq!(strip_numbers("3 14"), "");
    }

    #[test]
    fn tokenizing() {
        assert_eq!(tokenize("a  b"), toks(&["a", "b"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize(" x "), toks(&["x"]));
    }

    #[test]
    fn digit_tokens_skip_stemming() {
        assert_eq!(stem_token("co2"), "co2");
        assert_eq!(stem_token("1990s"), "1990s");
        assert_eq!(stem_token("studies"), "studi");
    }

    #[test]
    fn stop_word_removal() {
        let p = Pipeline::default();
        assert_eq!(remove_stopwords(toks(&["the", "result"]), p.stop_set()), toks(&["result"]));
        assert_eq!(remove_stopwords(toks(&["can", "show"]), p.stop_set()), toks(&["can", "show"]));
        assert!(remove_stopwords(vec![], p.stop_set()).is_empty());
    }

    #[test]
    fn contractions_are_phrases() {
        let p = Pipeline::default();
        assert!(!p.stop_set().contains("can"));
        assert!(p.stop_set().phrases().contains(&toks(&["can", "t"])));
        assert_eq!(p.process("We can't show it").tokens(), &toks(&["show"])[..]);
        assert_eq!(p.process("we can show").tokens(), &toks(&["can", "show"])[..]);
    }

    #[test]
    fn stop_words_are_stemmed_before_matching() {
        let p = Pipeline::default();
        assert!(p.stop_set().contains("doe"));
        assert!(p.stop_set().contains("ourselv"));
        assert_eq!(p.process("It does work").tokens(), &toks(&["work"])[..]);
    }

    #[test]
    fn whole_documents() {
        let p = Pipeline::default();
        assert_eq!(p.process("The Z-score was 2.5 in 2014").tokens(), &toks(&["zscore"])[..]);
        assert_eq!(
            p.process("Ex-president listened").tokens(),
            &toks(&["expresid", "listen"])[..]
        );
        assert!(p.process("").is_empty());
    }

    #[test]
    fn step_order_matters() {
        let p = Pipeline::default();
        assert_eq!(p.process("z-test").tokens(), &toks(&["ztest"])[..]);

        let mut cfg = PipelineConfig::default();
        cfg.step_order.swap(3, 4);
        let swapped = Pipeline::new(cfg).unwrap();
        assert_eq!(swapped.process("z-test").tokens(), &toks(&["z", "test"])[..]);
    }

    #[test]
    fn step_names_round_trip() {
        for s in Step::CANONICAL {
            assert_eq!(s.name().parse::<Step>().unwrap(), s);
        }
        assert!("bogus".parse::<Step>().is_err());
    }

    #[test]
    fn seq_and_parallel_agree() {
        let p = Pipeline::default();
        let docs = ["Results were significant.", "", "The z-test of co2 in 2014"];
        let seq = p.process_all_seq(&docs);
        assert_eq!(p.process_all(&docs), seq);
        assert_eq!(empty_documents(&seq), vec![1]);
    }
}
