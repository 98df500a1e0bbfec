//! Square-root-measurement decoding of explicit codebooks and Monte Carlo
//! verification of the ensemble bounds.
//!
//! A codeword `u = (u_1, ..., u_n)` is sent as the product state
//! `|psi_{u_1}> (x) ... (x) |psi_{u_n}>`. Only inner products between
//! codewords are ever needed, and those factor into single-letter overlaps,
//! so nothing of dimension `d^n` is built.
//!
//! For the Gram matrix `Gamma` of a code the square-root measurement
//! recognizes word `k` with probability `(Gamma^{1/2})_kk^2`.

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{ChannelError, ChannelSpec, Prior};
use crate::exponents::{
    expurgated_rhs_from, random_coding_rhs_from, ExponentError, ExpurgatedFunction, RandomCodingFunction,
};
use crate::hermitian::{psd_sqrt, Complex64, HermitianMatrix, LinalgError, DEFAULT_CLAMP_TOL};

pub const MAX_CODE_SIZE: usize = 512;
pub const MAX_SAMPLES: usize = 1_000_000;
/// Slack allowed in every per-code inequality.
pub const CHECK_SLACK: f64 = 1e-9;
/// Width of the statistical cushion, in standard errors.
pub const STDERR_CUSHION: f64 = 3.0;

#[derive(Debug, Error)]
pub enum SrmError {
    #[error("words of length {left} and {right} cannot be compared")]
    LengthMismatch { left: usize, right: usize },
    #[error("letter {letter} at word {word} is outside the alphabet of size {alphabet}")]
    LetterOutOfRange { word: usize, letter: usize, alphabet: usize },
    #[error("a codebook needs at least one word of length at least one")]
    EmptyCodebook,
    #[error("{what} = {value} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
}

/// `M` words of common length `n` over the channel's input alphabet.
/// Repeated words are allowed.
#[derive(Clone, Debug)]
pub struct Codebook<'a> {
    channel: &'a ChannelSpec,
    n: usize,
    words: Vec<Vec<usize>>,
}

impl<'a> Codebook<'a> {
    pub fn new(channel: &'a ChannelSpec, words: Vec<Vec<usize>>) -> Result<Self, SrmError> {
        let n = words.first().map(Vec::len).unwrap_or(0);
        if n == 0 {
            return Err(SrmError::EmptyCodebook);
        }
        let a = channel.alphabet_size();
        for (k, w) in words.iter().enumerate() {
            if w.len() != n {
                return Err(SrmError::LengthMismatch { left: n, right: w.len() });
            }
            if let Some(&letter) = w.iter().find(|&&x| x >= a) {
                return Err(SrmError::LetterOutOfRange { word: k, letter, alphabet: a });
            }
        }
        Ok(Self { channel, n, words })
    }

    pub fn channel(&self) -> &ChannelSpec {
        self.channel
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }
}

/// `<psi_u | psi_v> = prod_j G_{u_j v_j}`.
pub fn product_overlap(u: &[usize], v: &[usize], ch: &ChannelSpec) -> Result<Complex64, SrmError> {
    if u.len() != v.len() {
        return Err(SrmError::LengthMismatch { left: u.len(), right: v.len() });
    }
    let a = ch.alphabet_size();
    let mut acc = Complex64::new(1.0, 0.0);
    for (word, (&x, &y)) in u.iter().zip(v).enumerate() {
        if x >= a || y >= a {
            return Err(SrmError::LetterOutOfRange { word, letter: x.max(y), alphabet: a });
        }
        acc *= ch.overlap(x, y);
    }
    Ok(acc)
}

/// Gram matrix of a code, `Gamma_kl = <psi_{u^k} | psi_{u^l}>`.
#[derive(Clone, Debug)]
pub struct CodeGram(HermitianMatrix);

impl CodeGram {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self, SrmError> {
        Ok(Self(HermitianMatrix::new(m)?))
    }

    pub fn size(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.0.get(k, l)
    }
}

pub fn code_gram(cb: &Codebook) -> Result<CodeGram, SrmError> {
    let m = cb.size();
    let a = cb.channel.alphabet_size();
    let g = cb.channel.gram();
    let mut out = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for k in 0..m {
        out[(k, k)] = Complex64::new(1.0, 0.0);
        for l in k + 1..m {
            let mut acc = Complex64::new(1.0, 0.0);
            for (&x, &y) in cb.words[k].iter().zip(&cb.words[l]) {
                debug_assert!(x < a && y < a);
                acc *= g.get(x, y);
            }
            out[(k, l)] = acc;
            out[(l, k)] = acc.conj();
        }
    }
    CodeGram::from_matrix(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodingResult {
    pub per_word_error: Vec<f64>,
    pub average: f64,
    pub max: f64,
    /// `(2/M) Sp(E - Gamma^{1/2})`.
    pub gram_bound: f64,
}

pub fn srm_decode(g: &CodeGram) -> Result<DecodingResult, SrmError> {
    let root = psd_sqrt(g.matrix(), DEFAULT_CLAMP_TOL)?.matrix;
    let m = g.size();
    let amplitudes: Vec<f64> = (0..m).map(|k| root.get(k, k).re.clamp(0.0, 1.0)).collect();
    let per_word_error: Vec<f64> = amplitudes.iter().map(|x| (1.0 - x * x).clamp(0.0, 1.0)).collect();
    let deficits: Vec<f64> = amplitudes.iter().map(|x| 1.0 - x).collect();
    Ok(DecodingResult {
        average: pairwise_sum(&per_word_error) / m as f64,
        max: per_word_error.iter().copied().fold(0.0, f64::max),
        gram_bound: 2.0 * pairwise_sum(&deficits) / m as f64,
        per_word_error,
    })
}

/// `(1/2)[1 - sqrt(1 - max_{k != l} |Gamma_kl|^2)]`, a lower bound on the
/// maximal error of any decision rule. `None` for a single word.
pub fn helstrom_pair_lower(g: &CodeGram) -> Option<f64> {
    let m = g.size();
    if m < 2 {
        return None;
    }
    let mut worst: f64 = 0.0;
    for k in 0..m {
        for l in k + 1..m {
            worst = worst.max(g.get(k, l).norm_sqr());
        }
    }
    Some(0.5 * (1.0 - (1.0 - worst.min(1.0)).sqrt()))
}

/// `sum_{i != k} |Gamma_ik|^2`.
pub fn pairwise_union_bound(g: &CodeGram, k: usize) -> f64 {
    (0..g.size()).filter(|&i| i != k).map(|i| g.get(i, k).norm_sqr()).sum()
}

/// Draws `M` words of length `n` letter by letter from `prior`.
///
/// The generator is ChaCha8 keyed by `seed` with `index` as its stream id,
/// so each codebook depends on `(seed, index)` only.
pub fn sample_codebook<'a>(
    ch: &'a ChannelSpec,
    prior: &Prior,
    m: usize,
    n: usize,
    seed: u64,
    index: u64,
) -> Result<Codebook<'a>, SrmError> {
    prior.check_len(ch.alphabet_size())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let weights = prior.weights();
    let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let words = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                    (0..=last).find(|&i| weights[i] > 0.0 && u < cumulative[i]).unwrap_or(last)
                })
                .collect()
        })
        .collect();
    Codebook::new(ch, words)
}

/// Sum by recursive halving, so the rounding does not depend on how the
/// terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        len if len <= 8 => xs.iter().sum(),
        len => {
            let (a, b) = xs.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Counts of codes that broke one of the per-code inequalities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ViolationCounts {
    /// `average <= gram_bound`.
    pub gram_bound: usize,
    /// `lambda_k <= sum_{i != k} |Gamma_ik|^2` for every `k`.
    pub union_bound: usize,
    /// `max >= helstrom_pair_lower`.
    pub helstrom: usize,
}

impl ViolationCounts {
    pub fn total(&self) -> usize {
        self.gram_bound + self.union_bound + self.helstrom
    }

    fn add(self, other: Self) -> Self {
        Self {
            gram_bound: self.gram_bound + other.gram_bound,
            union_bound: self.union_bound + other.union_bound,
            helstrom: self.helstrom + other.helstrom,
        }
    }
}

/// Runs the three per-code checks on a decoded code.
pub fn check_code(g: &CodeGram, res: &DecodingResult) -> ViolationCounts {
    let union_ok =
        res.per_word_error.iter().enumerate().all(|(k, &lambda)| lambda <= pairwise_union_bound(g, k) + CHECK_SLACK);
    let helstrom_ok = helstrom_pair_lower(g).is_none_or(|h| res.max >= h - CHECK_SLACK);
    ViolationCounts {
        gram_bound: usize::from(res.average > res.gram_bound + CHECK_SLACK),
        union_bound: usize::from(!union_ok),
        helstrom: usize::from(!helstrom_ok),
    }
}

fn check_run(m: usize, n: usize, samples: usize) -> Result<(), SrmError> {
    if m == 0 || n == 0 {
        return Err(SrmError::InvalidArgument(format!("need M >= 1 and n >= 1, got M = {m}, n = {n}")));
    }
    if m > MAX_CODE_SIZE {
        return Err(SrmError::CapExceeded { what: "code size", value: m, cap: MAX_CODE_SIZE });
    }
    if samples == 0 {
        return Err(SrmError::InvalidArgument("need at least one sample".into()));
    }
    if samples > MAX_SAMPLES {
        return Err(SrmError::CapExceeded { what: "samples", value: samples, cap: MAX_SAMPLES });
    }
    if n > u32::MAX as usize {
        return Err(SrmError::InvalidArgument(format!("block length {n} is too large")));
    }
    Ok(())
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let count = xs.len() as f64;
    let mean = pairwise_sum(xs) / count;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let squares: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let variance = pairwise_sum(&squares) / (count - 1.0);
    (mean, (variance / count).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub s: f64,
    pub rhs: f64,
    /// `rhs + 3 stderr - mean`; negative means the check failed.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RandomCodingReport {
    pub kind: &'static str,
    pub code_size: usize,
    pub block_length: usize,
    pub samples: usize,
    pub seed: u64,
    pub prior: Vec<f64>,
    pub mean_error: f64,
    pub stderr: f64,
    pub mean_gram_bound: f64,
    pub worst_max_error: f64,
    pub violations: ViolationCounts,
    pub bounds: Vec<BoundRow>,
    pub min_rhs: f64,
    pub passed: bool,
}

struct SampleOutcome {
    average: f64,
    gram_bound: f64,
    max: f64,
    violations: ViolationCounts,
}

/// Decodes `samples` random codebooks and compares the mean error with
/// `2 (M-1)^s (Tr S^{1+s})^n` for every `s` in `s_grid`.
pub fn verify_random_coding(
    ch: &ChannelSpec,
    prior: &Prior,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
    s_grid: &[f64],
) -> Result<RandomCodingReport, SrmError> {
    check_run(m, n, samples)?;
    prior.check_len(ch.alphabet_size())?;
    if s_grid.is_empty() || s_grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(SrmError::InvalidArgument("s grid must be nonempty and inside [0, 1]".into()));
    }
    let f = RandomCodingFunction::for_channel(ch, prior)?;

    let outcomes = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let cb = sample_codebook(ch, prior, m, n, seed, index)?;
            let g = code_gram(&cb)?;
            let res = srm_decode(&g)?;
            Ok(SampleOutcome {
                average: res.average,
                gram_bound: res.gram_bound,
                max: res.max,
                violations: check_code(&g, &res),
            })
        })
        .collect::<Result<Vec<_>, SrmError>>()?;

    let averages: Vec<f64> = outcomes.iter().map(|o| o.average).collect();
    let gram_bounds: Vec<f64> = outcomes.iter().map(|o| o.gram_bound).collect();
    let (mean_error, stderr) = mean_and_stderr(&averages);
    let violations = outcomes.iter().fold(ViolationCounts::default(), |acc, o| acc.add(o.violations));

    let bounds: Vec<BoundRow> = s_grid
        .iter()
        .map(|&s| {
            let rhs = random_coding_rhs_from(&f, m as u64, n as u32, s);
            let margin = rhs + STDERR_CUSHION * stderr - mean_error;
            BoundRow { s, rhs, margin, holds: margin >= 0.0 }
        })
        .collect();
    let min_rhs = bounds.iter().map(|b| b.rhs).fold(f64::INFINITY, f64::min);
    let passed = violations.total() == 0 && bounds.iter().all(|b| b.holds);
    Ok(RandomCodingReport {
        kind: "random-coding",
        code_size: m,
        block_length: n,
        samples,
        seed,
        prior: prior.weights().to_vec(),
        mean_error,
        stderr,
        mean_gram_bound: pairwise_sum(&gram_bounds) / samples as f64,
        worst_max_error: outcomes.iter().map(|o| o.max).fold(0.0, f64::max),
        violations,
        bounds,
        min_rhs,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpurgationReport {
    pub kind: &'static str,
    pub code_size: usize,
    pub sampled_size: usize,
    pub block_length: usize,
    pub samples: usize,
    pub seed: u64,
    pub r: f64,
    pub prior: Vec<f64>,
    /// Ensemble mean of `lambda_k^r` over all samples and words.
    pub mean_error_power: f64,
    /// `[2 mean_error_power]^{1/r}`.
    pub threshold: f64,
    /// Share of samples whose kept words all lie at or below `threshold`.
    pub fraction_clean: f64,
    pub mean_kept_max: f64,
    pub best_kept_max: f64,
    /// Bound on the maximal error at `s = 1/r`.
    pub expurgated_rhs: f64,
    pub samples_within_rhs: usize,
    pub violations: ViolationCounts,
    pub passed: bool,
}

/// Samples codes of size `2M - 1`, keeps the `M` best-decoded words of each
/// and checks the expurgation threshold `[2 E lambda^r]^{1/r}`.
///
/// The run passes when no per-code inequality fails, at least one sample is
/// clean, and the best kept maximal error is within the expurgated bound.
pub fn verify_expurgation(
    ch: &ChannelSpec,
    prior: &Prior,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
    r: f64,
) -> Result<ExpurgationReport, SrmError> {
    if m == 0 {
        return Err(SrmError::InvalidArgument("need M >= 1".into()));
    }
    let sampled = 2 * m - 1;
    check_run(sampled, n, samples)?;
    prior.check_len(ch.alphabet_size())?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(SrmError::InvalidArgument(format!("r = {r} must lie in (0, 1]")));
    }
    let f = ExpurgatedFunction::new(ch, prior)?;

    let outcomes = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let cb = sample_codebook(ch, prior, sampled, n, seed, index)?;
            let g = code_gram(&cb)?;
            let res = srm_decode(&g)?;
            let powers: Vec<f64> = res.per_word_error.iter().map(|x| x.powf(r)).collect();
            let mut sorted = res.per_word_error.clone();
            sorted.sort_by(f64::total_cmp);
            Ok((pairwise_sum(&powers), sorted[m - 1], check_code(&g, &res)))
        })
        .collect::<Result<Vec<_>, SrmError>>()?;

    let power_sums: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let kept_max: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let mean_error_power = pairwise_sum(&power_sums) / (samples * sampled) as f64;
    let threshold = (2.0 * mean_error_power).powf(1.0 / r);
    let clean = kept_max.iter().filter(|&&x| x <= threshold + CHECK_SLACK).count();
    let rhs = expurgated_rhs_from(&f, m as u64, n as u32, 1.0 / r);
    let best_kept_max = kept_max.iter().copied().fold(f64::INFINITY, f64::min);
    let violations = outcomes.iter().fold(ViolationCounts::default(), |acc, o| acc.add(o.2));
    Ok(ExpurgationReport {
        kind: "expurgation",
        code_size: m,
        sampled_size: sampled,
        block_length: n,
        samples,
        seed,
        r,
        prior: prior.weights().to_vec(),
        mean_error_power,
        threshold,
        fraction_clean: clean as f64 / samples as f64,
        mean_kept_max: pairwise_sum(&kept_max) / samples as f64,
        best_kept_max,
        expurgated_rhs: rhs,
        samples_within_rhs: kept_max.iter().filter(|&&x| x <= rhs + CHECK_SLACK).count(),
        violations,
        passed: violations.total() == 0 && clean > 0 && best_kept_max <= rhs + CHECK_SLACK,
    })
}
