//! Word-over-document distribution statistics and power-law tail fitting.
//!
//! The tail curve `N_x` counts words found in more than `x` documents and is
//! modelled as `N_x = beta / x^alpha`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::dictionary::Dictionary;
use crate::pipeline::TokenList;
use crate::{Error, Result};

/// Relative MSE improvement below which refinement stops.
pub const FIT_TOLERANCE: f64 = 1e-9;
pub const FIT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocFreqHistogram {
    /// doc_count -> number of words with exactly that doc_count.
    pub counts: BTreeMap<u64, u64>,
    /// Number of words in the dictionary.
    pub total: u64,
}

pub fn histogram(dict: &Dictionary) -> DocFreqHistogram {
    let mut counts = BTreeMap::new();
    for e in dict.entries() {
        *counts.entry(e.doc_count).or_insert(0) += 1;
    }
    DocFreqHistogram { counts, total: dict.len() as u64 }
}

impl DocFreqHistogram {
    pub fn from_doc_counts<I: IntoIterator<Item = u64>>(doc_counts: I) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for d in doc_counts {
            *counts.entry(d).or_insert(0) += 1;
            total += 1;
        }
        DocFreqHistogram { counts, total }
    }

    pub fn get(&self, n: u64) -> u64 {
        self.counts.get(&n).copied().unwrap_or(0)
    }
}

/// `(n, g(n))` where `g(n)` is the number of words in at most `n` documents.
pub fn cumulative(hist: &DocFreqHistogram) -> Vec<(u64, u64)> {
    let mut acc = 0;
    hist.counts
        .iter()
        .map(|(&n, &c)| {
            acc += c;
            (n, acc)
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TailCurve {
    pub points: Vec<(f64, f64)>,
}

impl TailCurve {
    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        TailCurve { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn in_range(&self, range: Option<(f64, f64)>) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (lo, hi) = range.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        self.points.iter().copied().filter(move |&(x, _)| x >= lo && x <= hi)
    }
}

/// `(x, W - g(x))` for every distinct doc_count `x`.
pub fn tail(hist: &DocFreqHistogram) -> TailCurve {
    let points = cumulative(hist)
        .into_iter()
        .map(|(n, g)| (n as f64, (hist.total - g) as f64))
        .collect();
    TailCurve { points }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFit {
    pub alpha: f64,
    pub beta: f64,
    pub mse: f64,
    pub fit_range: (f64, f64),
    pub x_m: f64,
    pub iterations: usize,
    pub n_points: usize,
}

impl ParetoFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.beta * x.powf(-self.alpha)
    }
}

fn mse(points: &[(f64, f64)], alpha: f64, beta: f64) -> f64 {
    let s: f64 = points
        .iter()
        .map(|&(x, n)| {
            let r = n - beta * x.powf(-alpha);
            r * r
        })
        .sum();
    s / points.len() as f64
}

/// Least-squares beta for a fixed alpha.
fn best_beta(points: &[(f64, f64)], alpha: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &(x, n) in points {
        let p = x.powf(-alpha);
        num += n * p;
        den += p * p;
    }
    num / den
}

/// Ordinary least squares on `(ln x, ln N)`; returns `(slope, intercept)`.
fn ols_loglog(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, n)| x > 0.0 && n > 0.0)
        .map(|&(x, n)| (x.ln(), n.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(lx, ly) in &logs {
        sxy += (lx - mx) * (ly - my);
        sxx += (lx - mx) * (lx - mx);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fits `N_x = beta / x^alpha` by raw-scale least squares.
///
/// Starts from the log-log regression line and refines with Nelder-Mead over
/// `(alpha, ln beta)`. Points with `N_x <= 0` still enter the objective but
/// not the starting line.
pub fn fit_pareto(curve: &TailCurve, range: Option<(f64, f64)>) -> Result<ParetoFit> {
    if let Some((lo, hi)) = range {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!("empty fit range {lo}:{hi}")));
        }
    }
    let points: Vec<(f64, f64)> = curve.in_range(range).filter(|&(x, _)| x > 0.0).collect();
    let usable = points.iter().filter(|p| p.1 > 0.0).count();
    if usable < 3 {
        return Err(Error::InsufficientTailData { usable, needed: 3 });
    }
    let (slope, intercept) = ols_loglog(&points).ok_or(Error::InsufficientTailData { usable, needed: 3 })?;

    let f = |v: [f64; 2]| -> f64 {
        if !(v[0] > 0.0) || !v[0].is_finite() || !v[1].is_finite() {
            return f64::INFINITY;
        }
        mse(&points, v[0], v[1].exp())
    };
    let alpha0 = if -slope > 0.0 { -slope } else { 0.5 };
    let start = [alpha0, intercept];
    let mut best = nelder_mead(&f, start, FIT_TOLERANCE, FIT_MAX_ITERATIONS);
    // One restart from the optimum guards against a collapsed simplex.
    if best.iterations < FIT_MAX_ITERATIONS {
        let again = nelder_mead(&f, best.x, FIT_TOLERANCE, FIT_MAX_ITERATIONS - best.iterations);
        let used = best.iterations + again.iterations;
        if again.value <= best.value {
            best = again;
        }
        best.iterations = used;
    }
    let alpha = best.x[0];
    let mut beta = best.x[1].exp();
    let closed = best_beta(&points, alpha);
    if closed > 0.0 && mse(&points, alpha, closed) <= mse(&points, alpha, beta) {
        beta = closed;
    }
    let lo = points.first().map(|p| p.0).unwrap_or(0.0);
    let hi = points.last().map(|p| p.0).unwrap_or(0.0);
    let fit_range = range.unwrap_or((lo, hi));
    Ok(ParetoFit {
        alpha,
        beta,
        mse: mse(&points, alpha, beta),
        fit_range,
        x_m: lo,
        iterations: best.iterations,
        n_points: points.len(),
    })
}

struct Minimum {
    x: [f64; 2],
    value: f64,
    iterations: usize,
}

fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: &F, start: [f64; 2], tol: f64, max_iter: usize) -> Minimum {
    let step = |v: f64| if v.abs() > 1e-8 { 0.05 * v.abs() } else { 2.5e-4 };
    let mut simplex = [
        start,
        [start[0] + step(start[0]), start[1]],
        [start[0], start[1] + step(start[1])],
    ];
    let mut values = simplex.map(f);
    let mut iterations = 0;
    let mut prev_best = f64::INFINITY;
    let mut stalled = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.map(|i| simplex[i]);
        values = idx.map(|i| values[i]);

        let best = values[0];
        if best == 0.0 {
            break;
        }
        // Stop once the best value has stopped improving and the simplex agrees with it.
        let improvement = (prev_best - best) / best.abs();
        let spread = (values[2] - values[0]) / best.abs();
        if improvement < tol && spread < tol {
            stalled += 1;
            if stalled >= 3 {
                break;
            }
        } else {
            stalled = 0;
        }
        prev_best = best;

        let c = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let along = |t: f64| [c[0] + t * (simplex[2][0] - c[0]), c[1] + t * (simplex[2][1] - c[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                simplex[2] = xe;
                values[2] = fe;
            } else {
                simplex[2] = xr;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = xr;
            values[2] = fr;
        } else {
            let (xc, fc) = if fr < values[2] {
                let x = along(-0.5);
                (x, f(x))
            } else {
                let x = along(0.5);
                (x, f(x))
            };
            if fc < values[2].min(fr) {
                simplex[2] = xc;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        simplex[0][0] + 0.5 * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[i][1] - simplex[0][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let (i, &value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("simplex has three vertices");
    Minimum { x: simplex[i], value, iterations }
}

fn check_pareto_params(x_m: f64, alpha: f64) -> Result<()> {
    if !(x_m > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Pareto parameters must be positive (x_m={x_m}, alpha={alpha})"
        )));
    }
    Ok(())
}

/// `P(X > x) = (x_m / x)^alpha` for `x >= x_m`, else 1.
pub fn pareto_tail(x: f64, x_m: f64, alpha: f64) -> Result<f64> {
    check_pareto_params(x_m, alpha)?;
    Ok(if x >= x_m { (x_m / x).powf(alpha) } else { 1.0 })
}

pub fn pareto_cdf(x: f64, x_m: f64, alpha: f64) -> Result<f64> {
    check_pareto_params(x_m, alpha)?;
    Ok(if x >= x_m { 1.0 - (x_m / x).powf(alpha) } else { 0.0 })
}

pub fn pareto_pdf(x: f64, x_m: f64, alpha: f64) -> Result<f64> {
    check_pareto_params(x_m, alpha)?;
    Ok(if x >= x_m { alpha * x_m.powf(alpha) / x.powf(alpha + 1.0) } else { 0.0 })
}

/// Slope of the least-squares line through `(ln x, ln N_x)` for points with `N_x > 0`.
pub fn loglog_slope(curve: &TailCurve, range: Option<(f64, f64)>) -> Result<f64> {
    let points: Vec<(f64, f64)> = curve.in_range(range).collect();
    let usable = points.iter().filter(|&&(x, n)| x > 0.0 && n > 0.0).count();
    ols_loglog(&points)
        .map(|(slope, _)| slope)
        .ok_or(Error::InsufficientTailData { usable, needed: 2 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub vocab_size: usize,
    pub n_docs: usize,
    pub exponent: f64,
    pub seed: u64,
    /// Tokens per document.
    pub doc_len: usize,
}

impl SyntheticSpec {
    pub fn new(vocab_size: usize, n_docs: usize, exponent: f64, seed: u64) -> Self {
        SyntheticSpec { vocab_size, n_docs, exponent, seed, doc_len: 200 }
    }
}

/// Pseudo-word for rank `i` (0-based): consonant-vowel syllables closed by `z`.
///
/// Every such word is left unchanged by the pipeline and the stemmer.
pub fn synthetic_word(i: usize) -> String {
    const C: &[u8] = b"bdfgkmprtvz";
    const V: &[u8] = b"aou";
    let base = C.len() * V.len();
    let mut n = i;
    let mut w = String::new();
    loop {
        let s = n % base;
        w.push(C[s / V.len()] as char);
        w.push(V[s % V.len()] as char);
        n /= base;
        if n == 0 {
            break;
        }
        n -= 1;
    }
    w.push('z');
    w
}

/// Documents whose tokens are drawn independently from a Zipf law over
/// `vocab_size` ranks. Deterministic for a fixed seed.
pub fn gen_synthetic_corpus(spec: &SyntheticSpec) -> Result<impl Iterator<Item = TokenList>> {
    if spec.vocab_size == 0 || spec.n_docs == 0 || spec.doc_len == 0 {
        return Err(Error::InvalidParameter(
            "vocab_size, n_docs and doc_len must be positive".into(),
        ));
    }
    if !(spec.exponent > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Zipf exponent must be positive, got {}",
            spec.exponent
        )));
    }
    let zipf = Zipf::new(spec.vocab_size as f64, spec.exponent)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let words: Vec<String> = (0..spec.vocab_size).map(synthetic_word).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let doc_len = spec.doc_len;
    Ok((0..spec.n_docs).map(move |_| {
        let tokens = (0..doc_len)
            .map(|_| {
                let r = zipf.sample(&mut rng) as usize;
                words[r.clamp(1, words.len()) - 1].clone()
            })
            .collect();
        TokenList::new(tokens)
    }))
}

pub fn histogram_csv(hist: &DocFreqHistogram) -> String {
    let mut s = String::from("n,words\n");
    for (n, c) in &hist.counts {
        let _ = writeln!(s, "{n},{c}");
    }
    s
}

pub fn cumulative_csv(cum: &[(u64, u64)]) -> String {
    let mut s = String::from("n,words_at_most_n\n");
    for (n, g) in cum {
        let _ = writeln!(s, "{n},{g}");
    }
    s
}

/// Tail curve with the fitted values as a third column when a fit is given.
pub fn tail_csv(curve: &TailCurve, fit: Option<&ParetoFit>) -> String {
    let mut s = String::from(if fit.is_some() { "x,n_x,fitted\n" } else { "x,n_x\n" });
    for &(x, n) in &curve.points {
        match fit {
            Some(f) => {
                let _ = writeln!(s, "{x},{n},{}", f.predict(x));
            }
            None => {
                let _ = writeln!(s, "{x},{n}");
            }
        }
    }
    s
}

/// `x, N_x, log10 x, log10 N_x` for points with `N_x > 0`.
pub fn loglog_csv(curve: &TailCurve) -> String {
    let mut s = String::from("x,n_x,log10_x,log10_n_x\n");
    for &(x, n) in curve.points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0) {
        let _ = writeln!(s, "{x},{n},{},{}", x.log10(), n.log10());
    }
    s
}
