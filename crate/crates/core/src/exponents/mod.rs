//! Error-exponent functions of a pure-state channel.
//!
//! Two one-parameter families drive everything here:
//!
//! * the random-coding function `mu(pi, s) = -ln Tr S^{1+s}`, `0 <= s <= 1`,
//!   built from the spectrum of the averaged state `S`;
//! * the expurgation function
//!   `mu~(pi, s) = -s ln sum_ik pi_i pi_k |G_ik|^{2/s}`, `s >= 1`,
//!   built from the pairwise overlaps.
//!
//! The exponents are their Legendre-type transforms,
//! `E_r(pi, R) = max_{0<=s<=1} [mu(s) - sR]` and
//! `E_ex(pi, R) = max_{s>=1} [mu~(s) - sR]`, both solved by bisection on the
//! monotone derivative. Rates and exponents are in nats throughout.

pub mod binary;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::channel::{entropy, spectrum, ChannelError, ChannelSpec, Prior, Spectrum};
use crate::optimize::{default_grid_step, optimize_simplex, Goal, OptimizeError, SimplexOptimum, SimplexPoint};

/// Upper end of the `s` search for the expurgated exponent.
pub const S_CAP: f64 = 200.0;
/// Eigenvalues at or below this are dropped from `Tr S^{1+s}`.
pub const EIGENVALUE_FLOOR: f64 = 1e-15;
/// Overlaps with `|G_ik|` at or below this count as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-12;

const ROOT_VALUE_TOL: f64 = 1e-10;
const ROOT_WIDTH_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ExponentError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error("rate {rate} is below the resolution of the s <= {s_cap} search")]
    UnboundedParameter { rate: f64, s_cap: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// A real number or `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::Infinite => None,
        }
    }

    /// As an `f64`, mapping the infinite case to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => serializer.serialize_f64(*x),
            ExtendedReal::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// `mu(pi, s)` for a fixed spectrum.
#[derive(Clone, Debug)]
pub struct RandomCodingFunction {
    eigenvalues: Vec<f64>,
    logs: Vec<f64>,
}

impl RandomCodingFunction {
    pub fn new(sp: &Spectrum) -> Self {
        let eigenvalues: Vec<f64> = sp.eigenvalues().iter().copied().filter(|&l| l > EIGENVALUE_FLOOR).collect();
        let logs = eigenvalues.iter().map(|l| l.ln()).collect();
        Self { eigenvalues, logs }
    }

    pub fn for_channel(ch: &ChannelSpec, prior: &Prior) -> Result<Self, ExponentError> {
        Ok(Self::new(&spectrum(ch, prior)?))
    }

    /// `Tr S^{1+s} = sum_j lambda_j^{1+s}`.
    pub fn trace_power(&self, s: f64) -> f64 {
        self.eigenvalues.iter().zip(&self.logs).map(|(l, ln)| l * (s * ln).exp()).sum()
    }

    pub fn value(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        -self.trace_power(s).ln()
    }

    /// `(mu'(s), mu''(s))`; the second derivative is minus the variance of
    /// `ln lambda` under the tilted weights `lambda^{1+s} / Tr S^{1+s}`.
    pub fn derivatives(&self, s: f64) -> (f64, f64) {
        let mut b = 0.0;
        let mut a = 0.0;
        let mut d = 0.0;
        for (l, ln) in self.eigenvalues.iter().zip(&self.logs) {
            let w = l * (s * ln).exp();
            b += w;
            a += w * ln;
            d += w * ln * ln;
        }
        let mean = a / b;
        let variance = (d / b - mean * mean).max(0.0);
        (-mean, -variance)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.derivatives(s).0
    }

    /// `mu'(0)`, the entropy of the averaged state.
    pub fn entropy(&self) -> f64 {
        self.derivative(0.0)
    }

    pub fn exponent(&self, rate: f64) -> RandomCodingPoint {
        let knee = self.derivative(1.0);
        if rate <= knee {
            return RandomCodingPoint { value: self.value(1.0) - rate, s_star: 1.0, region: Region::RLinear };
        }
        if rate >= self.derivative(0.0) {
            return RandomCodingPoint { value: 0.0, s_star: 0.0, region: Region::RCurved };
        }
        let s = bisect_decreasing(|s| self.derivative(s), rate, 0.0, 1.0);
        RandomCodingPoint { value: (self.value(s) - s * rate).max(0.0), s_star: s, region: Region::RCurved }
    }
}

/// Root of `g(s) = target` for a nonincreasing `g` with
/// `g(lo) >= target >= g(hi)`.
fn bisect_decreasing(g: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if (gm - target).abs() <= ROOT_VALUE_TOL || hi - lo <= ROOT_WIDTH_TOL {
            return mid;
        }
        if gm > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// `mu~(pi, s)` from the prior-weighted squared overlaps.
#[derive(Clone, Debug)]
pub struct ExpurgatedFunction {
    /// `(pi_i pi_k, |G_ik|^2, ln |G_ik|^2)` for pairs with positive weight
    /// and nonzero overlap.
    terms: Vec<(f64, f64, f64)>,
    /// Total weight of pairs with positive weight and zero overlap.
    orthogonal_weight: f64,
    witness: Option<(usize, usize)>,
}

impl ExpurgatedFunction {
    pub fn new(ch: &ChannelSpec, prior: &Prior) -> Result<Self, ExponentError> {
        prior.check_len(ch.alphabet_size())?;
        let w = prior.weights();
        let a = ch.alphabet_size();
        let mut terms = Vec::new();
        let mut orthogonal_weight = 0.0;
        let mut witness = None;
        for i in 0..a {
            for k in 0..a {
                let weight = w[i] * w[k];
                if weight == 0.0 {
                    continue;
                }
                let g2 = if i == k { 1.0 } else { ch.overlap_sq(i, k) };
                if g2.sqrt() <= ORTHOGONAL_TOL {
                    orthogonal_weight += weight;
                    witness.get_or_insert((i.min(k), i.max(k)));
                } else {
                    terms.push((weight, g2, g2.ln()));
                }
            }
        }
        Ok(Self { terms, orthogonal_weight, witness })
    }

    /// `sum_ik pi_i pi_k |G_ik|^{2/s}`.
    pub fn overlap_sum(&self, s: f64) -> f64 {
        self.terms.iter().map(|(w, _, ln)| w * (ln / s).exp()).sum()
    }

    pub fn value(&self, s: f64) -> f64 {
        -s * self.overlap_sum(s).ln()
    }

    /// `d mu~ / ds = -ln Q + (1/s) sum pi_i pi_k |G|^{2/s} ln|G|^2 / Q`,
    /// with zero overlaps contributing nothing.
    pub fn derivative(&self, s: f64) -> f64 {
        let mut q = 0.0;
        let mut t = 0.0;
        for (w, _, ln) in &self.terms {
            let x = w * (ln / s).exp();
            q += x;
            t += x * ln;
        }
        -q.ln() + t / (s * q)
    }

    /// `mu~(pi, inf) = -sum pi_i pi_k ln |G_ik|^2`, infinite when a pair with
    /// positive weight is orthogonal.
    pub fn at_infinity(&self) -> ExtendedReal {
        if self.orthogonal_weight > 0.0 {
            return ExtendedReal::Infinite;
        }
        ExtendedReal::Finite(-self.terms.iter().map(|(w, _, ln)| w * ln).sum::<f64>())
    }

    /// An orthogonal pair `(i, k)` with positive prior weight, if any.
    pub fn orthogonal_witness(&self) -> Option<(usize, usize)> {
        self.witness
    }

    pub fn exponent(&self, rate: f64, policy: FloorPolicy) -> Result<ExpurgatedPoint, ExponentError> {
        let limit = self.at_infinity();
        if rate <= 0.0 {
            return Ok(ExpurgatedPoint {
                value: limit,
                s_star: ExtendedReal::Infinite,
                region: Region::ExCurved,
                below_resolution: false,
            });
        }
        let at_one = self.value(1.0);
        if rate >= at_one {
            return Ok(ExpurgatedPoint {
                value: ExtendedReal::Finite(0.0),
                s_star: ExtendedReal::Finite(1.0),
                region: Region::ExZero,
                below_resolution: false,
            });
        }
        if rate >= self.derivative(1.0) {
            return Ok(ExpurgatedPoint {
                value: ExtendedReal::Finite(at_one - rate),
                s_star: ExtendedReal::Finite(1.0),
                region: Region::ExLinear,
                below_resolution: false,
            });
        }
        if self.derivative(S_CAP) > rate {
            return match (limit, policy) {
                (ExtendedReal::Infinite, _) => Ok(ExpurgatedPoint {
                    value: ExtendedReal::Infinite,
                    s_star: ExtendedReal::Infinite,
                    region: Region::ExCurved,
                    below_resolution: true,
                }),
                (ExtendedReal::Finite(_), FloorPolicy::Limit) => Ok(ExpurgatedPoint {
                    value: limit,
                    s_star: ExtendedReal::Infinite,
                    region: Region::ExCurved,
                    below_resolution: true,
                }),
                (ExtendedReal::Finite(_), FloorPolicy::Error) => {
                    Err(ExponentError::UnboundedParameter { rate, s_cap: S_CAP })
                }
            };
        }
        let s = bisect_decreasing(|s| self.derivative(s), rate, 1.0, S_CAP);
        Ok(ExpurgatedPoint {
            value: ExtendedReal::Finite(self.value(s) - s * rate),
            s_star: ExtendedReal::Finite(s),
            region: Region::ExCurved,
            below_resolution: false,
        })
    }
}

/// What [`e_ex_at_with`] does when the maximizing `s` lies beyond
/// [`S_CAP`] and the zero-rate limit is finite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FloorPolicy {
    /// Report the `R -> +0` limit and set `below_resolution`.
    #[default]
    Limit,
    /// Fail with [`ExponentError::UnboundedParameter`].
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    #[serde(rename = "r-linear")]
    RLinear,
    #[serde(rename = "r-curved")]
    RCurved,
    #[serde(rename = "ex-curved")]
    ExCurved,
    #[serde(rename = "ex-linear")]
    ExLinear,
    #[serde(rename = "ex-zero")]
    ExZero,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::RLinear => "r-linear",
            Region::RCurved => "r-curved",
            Region::ExCurved => "ex-curved",
            Region::ExLinear => "ex-linear",
            Region::ExZero => "ex-zero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RandomCodingPoint {
    pub value: f64,
    pub s_star: f64,
    pub region: Region,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpurgatedPoint {
    pub value: ExtendedReal,
    pub s_star: ExtendedReal,
    pub region: Region,
    /// The rate lies below what the capped `s` search resolves.
    pub below_resolution: bool,
}

fn check_s(s: f64, lo: f64) -> Result<(), ExponentError> {
    if !s.is_finite() || s < lo {
        return Err(ExponentError::InvalidArgument(format!("s = {s} must be a finite value >= {lo}")));
    }
    Ok(())
}

pub fn mu(ch: &ChannelSpec, prior: &Prior, s: f64) -> Result<f64, ExponentError> {
    check_s(s, 0.0)?;
    Ok(RandomCodingFunction::for_channel(ch, prior)?.value(s))
}

/// `(mu'(pi, s), mu''(pi, s))`.
pub fn mu_derivatives(ch: &ChannelSpec, prior: &Prior, s: f64) -> Result<(f64, f64), ExponentError> {
    check_s(s, 0.0)?;
    Ok(RandomCodingFunction::for_channel(ch, prior)?.derivatives(s))
}

pub fn mu_tilde(ch: &ChannelSpec, prior: &Prior, s: f64) -> Result<f64, ExponentError> {
    check_s(s, 1.0)?;
    Ok(ExpurgatedFunction::new(ch, prior)?.value(s))
}

pub fn mu_tilde_prime(ch: &ChannelSpec, prior: &Prior, s: f64) -> Result<f64, ExponentError> {
    check_s(s, 1.0)?;
    Ok(ExpurgatedFunction::new(ch, prior)?.derivative(s))
}

pub fn mu_tilde_inf(ch: &ChannelSpec, prior: &Prior) -> Result<ExtendedReal, ExponentError> {
    Ok(ExpurgatedFunction::new(ch, prior)?.at_infinity())
}

fn check_code_size(m: u64, n: u32) -> Result<(), ExponentError> {
    if m == 0 || n == 0 {
        return Err(ExponentError::InvalidArgument(format!("need M >= 1 and n >= 1, got M = {m}, n = {n}")));
    }
    Ok(())
}

/// `2 (M-1)^s (Tr S^{1+s})^n`, the bound on the ensemble-average error.
pub fn random_coding_rhs(ch: &ChannelSpec, prior: &Prior, m: u64, n: u32, s: f64) -> Result<f64, ExponentError> {
    check_code_size(m, n)?;
    check_s(s, 0.0)?;
    let f = RandomCodingFunction::for_channel(ch, prior)?;
    Ok(random_coding_rhs_from(&f, m, n, s))
}

pub fn random_coding_rhs_from(f: &RandomCodingFunction, m: u64, n: u32, s: f64) -> f64 {
    2.0 * ((m - 1) as f64).powf(s) * f.trace_power(s).powi(n as i32)
}

/// `(4 (M-1) [sum_ik pi_i pi_k |G_ik|^{2/s}]^n)^s`, the bound on the
/// maximal error of the best code.
pub fn expurgated_rhs(ch: &ChannelSpec, prior: &Prior, m: u64, n: u32, s: f64) -> Result<f64, ExponentError> {
    check_code_size(m, n)?;
    check_s(s, 1.0)?;
    let f = ExpurgatedFunction::new(ch, prior)?;
    Ok(expurgated_rhs_from(&f, m, n, s))
}

pub fn expurgated_rhs_from(f: &ExpurgatedFunction, m: u64, n: u32, s: f64) -> f64 {
    (4.0 * (m - 1) as f64 * f.overlap_sum(s).powi(n as i32)).powf(s)
}

fn check_rate(rate: f64) -> Result<(), ExponentError> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(ExponentError::InvalidArgument(format!("rate {rate} must be finite and >= 0")));
    }
    Ok(())
}

pub fn e_r_at(ch: &ChannelSpec, prior: &Prior, rate: f64) -> Result<RandomCodingPoint, ExponentError> {
    check_rate(rate)?;
    Ok(RandomCodingFunction::for_channel(ch, prior)?.exponent(rate))
}

/// Expurgated exponent at `rate`; rates below the search resolution report
/// the zero-rate limit (see [`FloorPolicy::Limit`]).
pub fn e_ex_at(ch: &ChannelSpec, prior: &Prior, rate: f64) -> Result<ExpurgatedPoint, ExponentError> {
    e_ex_at_with(ch, prior, rate, FloorPolicy::Limit)
}

pub fn e_ex_at_with(
    ch: &ChannelSpec,
    prior: &Prior,
    rate: f64,
    policy: FloorPolicy,
) -> Result<ExpurgatedPoint, ExponentError> {
    check_rate(rate)?;
    ExpurgatedFunction::new(ch, prior)?.exponent(rate, policy)
}

fn prior_of(p: &SimplexPoint) -> Prior {
    Prior::new(p.coordinates().to_vec()).expect("simplex points are valid priors")
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityReport {
    pub capacity: f64,
    pub prior: Prior,
    pub search: SimplexOptimum,
}

/// `C = max_pi H(S_pi)` over the prior simplex.
pub fn capacity(ch: &ChannelSpec) -> Result<CapacityReport, ExponentError> {
    let a = ch.alphabet_size();
    let objective = |p: &SimplexPoint| match spectrum(ch, &prior_of(p)) {
        Ok(sp) => entropy(&sp),
        Err(_) => f64::NAN,
    };
    let search = optimize_simplex(objective, a, Goal::Maximize, default_grid_step(a))?;
    Ok(CapacityReport { capacity: search.value, prior: prior_of(&search.point), search })
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopePoint {
    pub value: ExtendedReal,
    pub prior: Prior,
}

/// `max_pi E_r(pi, R)`.
pub fn e_r_envelope(ch: &ChannelSpec, rate: f64) -> Result<EnvelopePoint, ExponentError> {
    check_rate(rate)?;
    let a = ch.alphabet_size();
    let objective = |p: &SimplexPoint| match RandomCodingFunction::for_channel(ch, &prior_of(p)) {
        Ok(f) => f.exponent(rate).value,
        Err(_) => f64::NAN,
    };
    let best = optimize_simplex(objective, a, Goal::Maximize, default_grid_step(a))?;
    Ok(EnvelopePoint { value: ExtendedReal::Finite(best.value.max(0.0)), prior: prior_of(&best.point) })
}

/// `max_pi E_ex(pi, R)`, optimized independently of the random-coding
/// envelope.
pub fn e_ex_envelope(ch: &ChannelSpec, rate: f64) -> Result<EnvelopePoint, ExponentError> {
    check_rate(rate)?;
    let a = ch.alphabet_size();
    let objective = |p: &SimplexPoint| {
        ExpurgatedFunction::new(ch, &prior_of(p))
            .and_then(|f| f.exponent(rate, FloorPolicy::Limit))
            .map(|e| e.value.to_f64())
            .unwrap_or(f64::NAN)
    };
    let best = optimize_simplex(objective, a, Goal::Maximize, default_grid_step(a))?;
    let value =
        if best.value == f64::INFINITY { ExtendedReal::Infinite } else { ExtendedReal::Finite(best.value.max(0.0)) };
    Ok(EnvelopePoint { value, prior: prior_of(&best.point) })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroRateReport {
    pub value: ExtendedReal,
    /// Extremizing prior; absent in the infinite case.
    pub prior: Option<Prior>,
    /// An orthogonal pair of letters, present exactly in the infinite case.
    pub witness: Option<(usize, usize)>,
    pub search: Option<SimplexOptimum>,
}

/// `E(+0) = -min_pi sum_ik pi_i pi_k ln |G_ik|^2`, or `+inf` when two
/// letters have orthogonal states.
pub fn zero_rate_exponent(ch: &ChannelSpec) -> Result<ZeroRateReport, ExponentError> {
    let a = ch.alphabet_size();
    for i in 0..a {
        for k in (i + 1)..a {
            if ch.overlap(i, k).norm() <= ORTHOGONAL_TOL {
                return Ok(ZeroRateReport {
                    value: ExtendedReal::Infinite,
                    prior: None,
                    witness: Some((i, k)),
                    search: None,
                });
            }
        }
    }
    let log_overlap: Vec<Vec<f64>> =
        (0..a).map(|i| (0..a).map(|k| if i == k { 0.0 } else { ch.overlap_sq(i, k).ln() }).collect()).collect();
    let objective = |p: &SimplexPoint| {
        let w = p.coordinates();
        let mut total = 0.0;
        for i in 0..a {
            for k in 0..a {
                total += w[i] * w[k] * log_overlap[i][k];
            }
        }
        total
    };
    let search = optimize_simplex(objective, a, Goal::Minimize, default_grid_step(a))?;
    Ok(ZeroRateReport {
        value: ExtendedReal::Finite(-search.value),
        prior: Some(prior_of(&search.point)),
        witness: None,
        search: Some(search),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    /// `mu~'(1) < mu'(1)`: expurgated, shared linear, random-coding pieces.
    Generic,
    /// `mu~'(1) = mu'(1)`: the shared linear piece is a single point.
    Degenerate,
    /// `mu~'(1) > mu'(1)`: no shared linear piece.
    NoLinearPiece,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionReport {
    pub mu1: f64,
    pub mu_prime1: f64,
    pub mut_prime1: f64,
    pub mut1: f64,
    pub capacity_at_prior: f64,
    pub ordering: Ordering,
}

pub fn region_report(ch: &ChannelSpec, prior: &Prior) -> Result<RegionReport, ExponentError> {
    let r = RandomCodingFunction::for_channel(ch, prior)?;
    let x = ExpurgatedFunction::new(ch, prior)?;
    Ok(region_report_from(&r, &x))
}

fn region_report_from(r: &RandomCodingFunction, x: &ExpurgatedFunction) -> RegionReport {
    let mu_prime1 = r.derivative(1.0);
    let mut_prime1 = x.derivative(1.0);
    let ordering = if (mut_prime1 - mu_prime1).abs() <= TIE_TOL {
        Ordering::Degenerate
    } else if mut_prime1 < mu_prime1 {
        Ordering::Generic
    } else {
        Ordering::NoLinearPiece
    };
    RegionReport {
        mu1: r.value(1.0),
        mu_prime1,
        mut_prime1,
        mut1: x.value(1.0),
        capacity_at_prior: r.entropy(),
        ordering,
    }
}

#[derive(Clone, Debug)]
pub enum CurveMode {
    /// Both exponents at one prior.
    Prior(Prior),
    /// Each exponent maximized over the prior simplex at every rate.
    Envelope,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub rate: f64,
    pub e_r: f64,
    pub e_ex: ExtendedReal,
    /// Branch of whichever bound is larger; ties go to the expurgated one.
    pub region: Region,
    pub r_region: Region,
    pub ex_region: Region,
    pub ex_below_resolution: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentCurve {
    pub points: Vec<CurvePoint>,
}

fn dominant(e_r: f64, e_ex: ExtendedReal, r_region: Region, ex_region: Region) -> Region {
    let ex = e_ex.to_f64();
    if e_r > ex + TIE_TOL {
        r_region
    } else {
        ex_region
    }
}

/// Samples both exponents on `points` uniformly spaced rates in
/// `[r_min, r_max]`.
pub fn curve(
    ch: &ChannelSpec,
    mode: &CurveMode,
    r_min: f64,
    r_max: f64,
    points: usize,
) -> Result<ExponentCurve, ExponentError> {
    if !(r_min >= 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(ExponentError::InvalidArgument(format!("need 0 <= R_min < R_max, got [{r_min}, {r_max}]")));
    }
    if points < 2 {
        return Err(ExponentError::InvalidArgument(format!("need at least 2 points, got {points}")));
    }
    let step = (r_max - r_min) / (points - 1) as f64;
    let rates: Vec<f64> = (0..points).map(|k| if k + 1 == points { r_max } else { r_min + k as f64 * step }).collect();

    let evaluated: Result<Vec<CurvePoint>, ExponentError> = match mode {
        CurveMode::Prior(prior) => {
            let r = RandomCodingFunction::for_channel(ch, prior)?;
            let x = ExpurgatedFunction::new(ch, prior)?;
            rates
                .par_iter()
                .map(|&rate| {
                    let er = r.exponent(rate);
                    let ex = x.exponent(rate, FloorPolicy::Limit)?;
                    Ok(CurvePoint {
                        rate,
                        e_r: er.value,
                        e_ex: ex.value,
                        region: dominant(er.value, ex.value, er.region, ex.region),
                        r_region: er.region,
                        ex_region: ex.region,
                        ex_below_resolution: ex.below_resolution,
                    })
                })
                .collect()
        }
        CurveMode::Envelope => rates
            .par_iter()
            .map(|&rate| {
                let er = e_r_envelope(ch, rate)?;
                let ex = e_ex_envelope(ch, rate)?;
                let er_point = e_r_at(ch, &er.prior, rate)?;
                let ex_point = e_ex_at(ch, &ex.prior, rate)?;
                let e_r = er.value.to_f64();
                Ok(CurvePoint {
                    rate,
                    e_r,
                    e_ex: ex.value,
                    region: dominant(e_r, ex.value, er_point.region, ex_point.region),
                    r_region: er_point.region,
                    ex_region: ex_point.region,
                    ex_below_resolution: ex_point.below_resolution,
                })
            })
            .collect(),
    };
    Ok(ExponentCurve { points: evaluated? })
}

#[cfg(test)]
mod tests;
