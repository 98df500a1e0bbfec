//! Closed forms for two pure states with overlap `|<psi_0|psi_1>| = eps`.
//!
//! With prior `(1 - pi, pi)` the averaged state has eigenvalues
//! `(1 -+ sqrt(1 - 4 (1 - eps^2) pi (1 - pi))) / 2`, and both `mu` and `mu~`
//! are maximized by `pi = 1/2`. Nothing in this module diagonalizes a
//! matrix; [`binary_cross_check`] compares it against the generic path.

use serde::Serialize;

use super::{mu, mu_derivatives, mu_tilde_inf, mu_tilde_prime, ExponentError, ExtendedReal, S_CAP};
use crate::channel::{entropy, spectrum, ChannelSpec, Prior};

const PRIOR_GRID: usize = 101;
const MU_GRID: usize = 101;

fn check_epsilon(eps: f64) -> Result<(), ExponentError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ExponentError::Domain(format!("overlap epsilon = {eps} must lie in (0, 1)")));
    }
    Ok(())
}

/// `(lambda_1(pi), lambda_2(pi))`, ascending.
pub fn eigenvalues(eps: f64, pi: f64) -> (f64, f64) {
    let root = (1.0 - 4.0 * (1.0 - eps * eps) * pi * (1.0 - pi)).max(0.0).sqrt();
    (0.5 * (1.0 - root), 0.5 * (1.0 + root))
}

pub fn mu_at(eps: f64, pi: f64, s: f64) -> f64 {
    let (l1, l2) = eigenvalues(eps, pi);
    -(l1.powf(1.0 + s) + l2.powf(1.0 + s)).ln()
}

pub fn mu_tilde_at(eps: f64, pi: f64, s: f64) -> f64 {
    -s * (pi * pi + (1.0 - pi) * (1.0 - pi) + 2.0 * pi * (1.0 - pi) * eps.powf(2.0 / s)).ln()
}

/// `mu(1) = mu~(1) = -ln((1 + eps^2) / 2)`.
pub fn mu1(eps: f64) -> f64 {
    -((1.0 + eps * eps) / 2.0).ln()
}

/// `mu~'(1) = mu~(1) + eps^2 ln eps^2 / (1 + eps^2)`.
pub fn mu_tilde_prime1(eps: f64) -> f64 {
    let e2 = eps * eps;
    mu1(eps) + e2 * e2.ln() / (1.0 + e2)
}

pub fn mu_prime1(eps: f64) -> f64 {
    let lo = (1.0 - eps) / 2.0;
    let hi = (1.0 + eps) / 2.0;
    -((1.0 - eps).powi(2) * lo.ln() + (1.0 + eps).powi(2) * hi.ln()) / (2.0 * (1.0 + eps * eps))
}

/// `C = mu'(0)`, the binary entropy of `(1 -+ eps) / 2`.
pub fn capacity(eps: f64) -> f64 {
    let lo = (1.0 - eps) / 2.0;
    let hi = (1.0 + eps) / 2.0;
    -(lo * lo.ln() + hi * hi.ln())
}

/// `E(+0) = -ln eps`.
pub fn zero_rate(eps: f64) -> f64 {
    -eps.ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinaryScalars {
    pub mu1: f64,
    pub mu_tilde_prime1: f64,
    pub mu_prime1: f64,
    pub capacity: f64,
    pub zero_rate: f64,
}

impl BinaryScalars {
    pub fn new(eps: f64) -> Self {
        Self {
            mu1: mu1(eps),
            mu_tilde_prime1: mu_tilde_prime1(eps),
            mu_prime1: mu_prime1(eps),
            capacity: capacity(eps),
            zero_rate: zero_rate(eps),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenvalueSample {
    pub pi: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BinaryReport {
    pub epsilon: f64,
    pub scalars: BinaryScalars,
    pub eigenvalues: Vec<EigenvalueSample>,
    /// `(s, mu(s))` on `[0, 1]`.
    pub mu: Vec<(f64, f64)>,
    /// `(s, mu~(s))` on `[1, S_CAP]`.
    pub mu_tilde: Vec<(f64, f64)>,
}

pub fn binary_report(eps: f64) -> Result<BinaryReport, ExponentError> {
    check_epsilon(eps)?;
    let eigenvalues = (0..PRIOR_GRID)
        .map(|k| {
            let pi = k as f64 / (PRIOR_GRID - 1) as f64;
            let (lambda1, lambda2) = self::eigenvalues(eps, pi);
            EigenvalueSample { pi, lambda1, lambda2 }
        })
        .collect();
    let mu = (0..MU_GRID)
        .map(|k| {
            let s = k as f64 / (MU_GRID - 1) as f64;
            (s, if s == 0.0 { 0.0 } else { mu_at(eps, 0.5, s) })
        })
        .collect();
    let mu_tilde = (1..=S_CAP as usize).map(|k| (k as f64, mu_tilde_at(eps, 0.5, k as f64))).collect();
    Ok(BinaryReport { epsilon: eps, scalars: BinaryScalars::new(eps), eigenvalues, mu, mu_tilde })
}

/// Closed forms against the eigendecomposition path at `pi = 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub closed_form: BinaryScalars,
    pub generic: BinaryScalars,
    pub max_deviation: f64,
}

pub fn binary_cross_check(eps: f64) -> Result<CrossCheck, ExponentError> {
    check_epsilon(eps)?;
    let ch = ChannelSpec::binary(eps)?;
    let prior = Prior::uniform(2);
    let zero_rate = match mu_tilde_inf(&ch, &prior)? {
        ExtendedReal::Finite(x) => x,
        ExtendedReal::Infinite => f64::INFINITY,
    };
    let generic = BinaryScalars {
        mu1: mu(&ch, &prior, 1.0)?,
        mu_tilde_prime1: mu_tilde_prime(&ch, &prior, 1.0)?,
        mu_prime1: mu_derivatives(&ch, &prior, 1.0)?.0,
        capacity: entropy(&spectrum(&ch, &prior)?),
        zero_rate,
    };
    let closed_form = BinaryScalars::new(eps);
    let pairs = [
        (closed_form.mu1, generic.mu1),
        (closed_form.mu_tilde_prime1, generic.mu_tilde_prime1),
        (closed_form.mu_prime1, generic.mu_prime1),
        (closed_form.capacity, generic.capacity),
        (closed_form.zero_rate, generic.zero_rate),
    ];
    let max_deviation = pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(CrossCheck { closed_form, generic, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;

    // 30-digit references for eps = 0.5
    const MU1: f64 = 0.470003629245735553650937031148;
    const MUT_PRIME1: f64 = 0.192744757021757429884044182565;
    const MU_PRIME1: f64 = 0.397543301318591896578743529686;
    const CAPACITY: f64 = 0.562335144618808350288030315224;

    #[test]
    fn scalars_at_one_half() {
        let s = BinaryScalars::new(0.5);
        assert!((s.mu1 - MU1).abs() < 1e-15);
        assert!((s.mu_tilde_prime1 - MUT_PRIME1).abs() < 1e-15);
        assert!((s.mu_prime1 - MU_PRIME1).abs() < 1e-15);
        assert!((s.capacity - CAPACITY).abs() < 1e-15);
        assert!((s.zero_rate - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_grid() {
        let r = binary_report(0.6).unwrap();
        let mid = r.eigenvalues.iter().find(|e| e.pi == 0.5).unwrap();
        assert!((mid.lambda1 - 0.2).abs() < 1e-15);
        assert!((mid.lambda2 - 0.8).abs() < 1e-15);
        assert_eq!(r.eigenvalues.len(), PRIOR_GRID);
        let end = r.eigenvalues.last().unwrap();
        assert_eq!((end.lambda1, end.lambda2), (0.0, 1.0));
    }

    #[test]
    fn curves_are_monotone_and_meet_at_one() {
        let r = binary_report(0.5).unwrap();
        assert!(r.mu.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(r.mu_tilde.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!((r.mu.last().unwrap().1 - r.mu_tilde[0].1).abs() < 1e-15);
        assert!(r.mu_tilde.last().unwrap().1 < zero_rate(0.5));
    }

    #[test]
    fn one_half_maximizes_both_functions() {
        for &eps in &[0.2, 0.5, 0.8] {
            for &s in &[0.3_f64, 1.0, 2.5] {
                let best_mu = mu_at(eps, 0.5, s.min(1.0));
                let best_mut = mu_tilde_at(eps, 0.5, s.max(1.0));
                for k in 0..=100 {
                    let pi = k as f64 / 100.0;
                    assert!(mu_at(eps, pi, s.min(1.0)) <= best_mu + 1e-15);
                    assert!(mu_tilde_at(eps, pi, s.max(1.0)) <= best_mut + 1e-15);
                }
            }
        }
    }

    #[test]
    fn indistinguishable_limit() {
        let s = BinaryScalars::new(1.0 - 1e-9);
        assert!(s.capacity < 1e-7);
        assert!(s.zero_rate < 1e-8);
    }

    #[test]
    fn domain() {
        assert!(matches!(binary_report(0.0), Err(ExponentError::Domain(_))));
        assert!(matches!(binary_report(1.0), Err(ExponentError::Domain(_))));
        assert!(binary_cross_check(1.5).is_err());
    }

    #[test]
    fn generic_path_agrees() {
        for &eps in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let c = binary_cross_check(eps).unwrap();
            assert!(c.max_deviation < 1e-10, "eps {eps}: {c:?}");
        }
    }
}
