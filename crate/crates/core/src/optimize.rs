//! One-dimensional concave maximization and optimization over the
//! probability simplex.
//!
//! The simplex optimizer scans an exhaustive lattice and then polishes the
//! best lattice points with a projected Nelder-Mead descent. Everything is
//! deterministic: lattice ties are broken by lexicographic order and the
//! parallel lattice evaluation preserves point order.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub const MAX_SIMPLEX_DIM: usize = 6;

const CONCAVITY_SLACK: f64 = 1e-9;
const REFINE_STARTS: usize = 5;
const REFINE_MAX_ITER: usize = 500;
const REFINE_STEP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("objective is not concave near x = {x} (midpoint dominance violated by {excess:e})")]
    BracketFailure { x: f64, excess: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("simplex dimension {0} exceeds the supported maximum of {MAX_SIMPLEX_DIM}")]
    DimensionTooLarge(usize),
    #[error("simplex dimension must be at least 1")]
    EmptySimplex,
    #[error("grid step {0} is outside (0, 1/2]")]
    InvalidGridStep(f64),
}

/// Golden-section search for the maximum of a concave function on
/// `[lo, hi]`, stopping once the bracket is narrower than `tol`.
///
/// Endpoints are candidates, so a monotone `f` returns the boundary point
/// exactly. Every bracket triple is checked for midpoint dominance; a
/// violation larger than `1e-9 (1 + |f|)` is reported as
/// [`OptimizeError::BracketFailure`].
pub fn maximize_concave_1d<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64), OptimizeError>
where
    F: FnMut(f64) -> f64,
{
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(OptimizeError::InvalidInterval { lo, hi });
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if b - a <= tol {
        return Ok(if fa >= fb { (a, fa) } else { (b, fb) });
    }
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        check_midpoint((a, fa), (x1, f1), (x2, f2))?;
        check_midpoint((x1, f1), (x2, f2), (b, fb))?;
        if f1 < f2 {
            a = x1;
            fa = f1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            fb = f2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let best = [(a, fa), (x1, f1), (x2, f2), (b, fb)].into_iter().fold((a, f64::NEG_INFINITY), |acc, p| {
        if p.1 > acc.1 {
            p
        } else {
            acc
        }
    });
    Ok(best)
}

fn check_midpoint(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> Result<(), OptimizeError> {
    if r.0 <= p.0 || !(p.1.is_finite() && q.1.is_finite() && r.1.is_finite()) {
        return Ok(());
    }
    let chord = p.1 + (r.1 - p.1) * (q.0 - p.0) / (r.0 - p.0);
    let scale = 1.0 + p.1.abs().max(q.1.abs()).max(r.1.abs());
    let excess = chord - q.1;
    if excess > CONCAVITY_SLACK * scale {
        return Err(OptimizeError::BracketFailure { x: q.0, excess });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Goal {
    Maximize,
    Minimize,
}

/// Nonnegative coordinates summing to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn coordinates(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Euclidean projection of `v` onto the simplex, renormalized so the
    /// coordinates sum to one.
    pub fn project(v: &[f64]) -> Self {
        let mut sorted: Vec<f64> = v.to_vec();
        sorted.sort_by(|x, y| y.total_cmp(x));
        let mut cumulative = 0.0;
        let mut theta = 0.0;
        for (k, &u) in sorted.iter().enumerate() {
            cumulative += u;
            let t = (cumulative - 1.0) / (k + 1) as f64;
            if u - t > 0.0 {
                theta = t;
            }
        }
        let mut w: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            w.iter_mut().for_each(|x| *x /= s);
        } else {
            w.iter_mut().for_each(|x| *x = 1.0 / v.len() as f64);
        }
        Self(w)
    }
}

/// Result of [`optimize_simplex`] with the search metadata.
#[derive(Clone, Debug, Serialize)]
pub struct SimplexOptimum {
    pub point: SimplexPoint,
    pub value: f64,
    pub goal: Goal,
    pub grid_step: f64,
    pub lattice_points: usize,
    pub lattice_value: f64,
    pub refined: bool,
}

pub fn default_grid_step(a: usize) -> f64 {
    if a <= 3 {
        1.0 / 100.0
    } else {
        1.0 / 25.0
    }
}

/// All compositions of `total` into `parts` nonnegative parts, in
/// lexicographic order.
fn lattice(parts: usize, total: usize) -> Vec<Vec<usize>> {
    fn fill(prefix: &mut Vec<usize>, parts: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == parts {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=remaining {
            prefix.push(k);
            fill(prefix, parts, remaining - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(&mut Vec::with_capacity(parts), parts, total, &mut out);
    out
}

/// Lattice scan at resolution `grid_step` followed by Nelder-Mead
/// refinement from the best few lattice points.
pub fn optimize_simplex<F>(objective: F, a: usize, goal: Goal, grid_step: f64) -> Result<SimplexOptimum, OptimizeError>
where
    F: Fn(&SimplexPoint) -> f64 + Sync,
{
    if a == 0 {
        return Err(OptimizeError::EmptySimplex);
    }
    if a > MAX_SIMPLEX_DIM {
        return Err(OptimizeError::DimensionTooLarge(a));
    }
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(OptimizeError::InvalidGridStep(grid_step));
    }
    let sign = match goal {
        Goal::Maximize => 1.0,
        Goal::Minimize => -1.0,
    };
    // NaN never wins
    let score = |p: &SimplexPoint| {
        let v = sign * objective(p);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let divisions = (1.0 / grid_step).round().max(1.0) as usize;
    let points: Vec<SimplexPoint> = lattice(a, divisions)
        .into_iter()
        .map(|c| SimplexPoint(c.into_iter().map(|k| k as f64 / divisions as f64).collect()))
        .collect();
    let scores: Vec<f64> = points.par_iter().map(&score).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    // stable: equal scores keep lexicographic order
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));

    let mut best = points[order[0]].clone();
    let mut best_score = scores[order[0]];
    let lattice_score = best_score;
    let mut refined = false;

    if a > 1 && best_score < f64::INFINITY {
        for &start in order.iter().take(REFINE_STARTS) {
            let (candidate, candidate_score) = nelder_mead(&score, &points[start], grid_step);
            // rounding-level gains do not move the lattice optimum
            if candidate_score > best_score + f64::EPSILON * best_score.abs().max(1.0) {
                best = candidate;
                best_score = candidate_score;
                refined = true;
            }
        }
    }

    Ok(SimplexOptimum {
        value: sign * best_score,
        point: best,
        goal,
        grid_step: 1.0 / divisions as f64,
        lattice_points: points.len(),
        lattice_value: sign * lattice_score,
        refined,
    })
}

/// Downhill simplex in the first `a - 1` coordinates; the last coordinate
/// is implied and every trial point is projected back onto the simplex.
fn nelder_mead<F>(score: &F, start: &SimplexPoint, step: f64) -> (SimplexPoint, f64)
where
    F: Fn(&SimplexPoint) -> f64,
{
    let dim = start.dim() - 1;
    let to_point = |x: &[f64]| {
        let mut full = x.to_vec();
        full.push(1.0 - x.iter().sum::<f64>());
        SimplexPoint::project(&full)
    };
    let eval = |x: &[f64]| score(&to_point(x));

    let x0: Vec<f64> = start.0[..dim].to_vec();
    let mut vertices: Vec<(Vec<f64>, f64)> = vec![(x0.clone(), eval(&x0))];
    for k in 0..dim {
        let mut x = x0.clone();
        x[k] += if x[k] + step <= 1.0 { step } else { -step };
        let f = eval(&x);
        vertices.push((x, f));
    }

    for _ in 0..REFINE_MAX_ITER {
        vertices.sort_by(|p, q| q.1.total_cmp(&p.1));
        let spread = vertices[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&vertices[0].0).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= REFINE_STEP_TOL {
            break;
        }
        let worst = vertices.len() - 1;
        let centroid: Vec<f64> =
            (0..dim).map(|k| vertices[..worst].iter().map(|(x, _)| x[k]).sum::<f64>() / worst as f64).collect();
        let along =
            |t: f64| -> Vec<f64> { centroid.iter().zip(&vertices[worst].0).map(|(c, w)| c + t * (c - w)).collect() };
        let reflected = along(1.0);
        let fr = eval(&reflected);
        if fr > vertices[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded);
            vertices[worst] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > vertices[worst - 1].1 {
            vertices[worst] = (reflected, fr);
        } else {
            let contracted = if fr > vertices[worst].1 { along(0.5) } else { along(-0.5) };
            let fc = eval(&contracted);
            if fc > vertices[worst].1.max(fr) {
                vertices[worst] = (contracted, fc);
            } else {
                let anchor = vertices[0].0.clone();
                for v in vertices.iter_mut().skip(1) {
                    let x: Vec<f64> = v.0.iter().zip(&anchor).map(|(u, b)| b + 0.5 * (u - b)).collect();
                    let f = eval(&x);
                    *v = (x, f);
                }
            }
        }
    }
    vertices.sort_by(|p, q| q.1.total_cmp(&p.1));
    let point = to_point(&vertices[0].0);
    let value = score(&point);
    (point, value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn decreasing_linear_returns_left_endpoint() {
        let r = 1.0;
        let (x, f) = maximize_concave_1d(|s| s * LN2 - s * r, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(x, 0.0);
        assert_eq!(f, 0.0);
    }

    #[test]
    fn increasing_linear_returns_right_endpoint() {
        let r = 0.2;
        let (x, _) = maximize_concave_1d(|s| s * LN2 - s * r, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(x, 1.0);
    }

    #[test]
    fn binary_mu_tradeoff_matches_dense_grid() {
        // mu(s) for eigenvalues (1/4, 3/4), written out directly
        let mu = |s: f64| -(0.25f64.powf(1.0 + s) + 0.75f64.powf(1.0 + s)).ln();
        let f = |s: f64| mu(s) - 0.45 * s;
        let (x, fx) = maximize_concave_1d(f, 0.0, 1.0, 1e-12).unwrap();
        let grid_best = (0..=1_000_000).map(|k| f(k as f64 / 1e6)).fold(f64::NEG_INFINITY, f64::max);
        assert!(x > 0.0 && x < 1.0);
        assert!((fx - grid_best).abs() < 1e-8, "{fx} vs {grid_best}");
    }

    #[test]
    fn detects_convexity() {
        let err = maximize_concave_1d(|x| (x - 0.4).powi(2), 0.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, OptimizeError::BracketFailure { .. }));
        assert!(maximize_concave_1d(|x| x, 1.0, 0.0, 1e-9).is_err());
    }

    fn binary_entropy(p: &SimplexPoint) -> f64 {
        -p.coordinates().iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>()
    }

    #[test]
    fn entropy_maximized_at_uniform() {
        let r = optimize_simplex(binary_entropy, 2, Goal::Maximize, default_grid_step(2)).unwrap();
        assert_eq!(r.point.coordinates(), &[0.5, 0.5]);
        assert!((r.value - LN2).abs() < 1e-15);
        let r = optimize_simplex(binary_entropy, 4, Goal::Maximize, default_grid_step(4)).unwrap();
        assert!((r.value - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_quadratic_for_binary_overlap() {
        let eps: f64 = 0.3;
        let log_g2 = [[0.0, (eps * eps).ln()], [(eps * eps).ln(), 0.0]];
        let obj = |p: &SimplexPoint| {
            let w = p.coordinates();
            -(0..2).flat_map(|i| (0..2).map(move |k| (i, k))).map(|(i, k)| w[i] * w[k] * log_g2[i][k]).sum::<f64>()
        };
        let r = optimize_simplex(obj, 2, Goal::Maximize, 0.01).unwrap();
        assert!((r.point.coordinates()[0] - 0.5).abs() < 1e-9);
        assert!((r.value + eps.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_objective() {
        let r = optimize_simplex(|_| 3.5, 3, Goal::Minimize, 0.1).unwrap();
        assert_eq!(r.value, 3.5);
        // lexicographically first lattice point
        assert_eq!(r.point.coordinates(), &[0.0, 0.0, 1.0]);
        assert!(!r.refined);
    }

    #[test]
    fn interior_optimum_refined_off_lattice() {
        let target = [0.123456, 0.654321, 0.222223];
        let obj = |p: &SimplexPoint| -p.coordinates().iter().zip(&target).map(|(x, t)| (x - t).powi(2)).sum::<f64>();
        let r = optimize_simplex(obj, 3, Goal::Maximize, 0.01).unwrap();
        assert!(r.refined);
        assert!(r.value > r.lattice_value);
        for (x, t) in r.point.coordinates().iter().zip(&target) {
            assert!((x - t).abs() < 1e-7);
        }
    }

    #[test]
    fn argument_checks() {
        assert_eq!(optimize_simplex(|_| 0.0, 7, Goal::Maximize, 0.1).unwrap_err(), OptimizeError::DimensionTooLarge(7));
        assert!(optimize_simplex(|_| 0.0, 2, Goal::Maximize, 0.7).is_err());
        assert!(optimize_simplex(|_| 0.0, 0, Goal::Maximize, 0.1).is_err());
        let r = optimize_simplex(|_| 1.0, 1, Goal::Maximize, 0.1).unwrap();
        assert_eq!(r.point.coordinates(), &[1.0]);
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(lattice(3, 100).len(), 5151);
        assert_eq!(lattice(6, 25).len(), 142_506);
        assert_eq!(lattice(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    proptest! {
        #[test]
        fn concave_quadratic_vertex(c in -3.0f64..3.0, k in 0.1f64..5.0) {
            let (x, _) = maximize_concave_1d(|x| -k * (x - c).powi(2), -4.0, 4.0, 1e-9).unwrap();
            prop_assert!((x - c).abs() <= 1e-9);
        }

        #[test]
        fn simplex_result_dominates_lattice_and_is_deterministic(
            q in prop::collection::vec(-1.0f64..1.0, 16),
            a in 2usize..5,
        ) {
            let obj = |p: &SimplexPoint| {
                let w = p.coordinates();
                let mut v = 0.0;
                for i in 0..w.len() {
                    for j in 0..w.len() {
                        v += q[i * 4 + j] * w[i] * w[j];
                    }
                }
                v
            };
            let step = 0.05;
            let r1 = optimize_simplex(obj, a, Goal::Maximize, step).unwrap();
            let r2 = optimize_simplex(obj, a, Goal::Maximize, step).unwrap();
            prop_assert!(r1.value >= r1.lattice_value);
            prop_assert_eq!(&r1.point, &r2.point);
            prop_assert_eq!(r1.value.to_bits(), r2.value.to_bits());
            let w = r1.point.coordinates();
            prop_assert!(w.iter().all(|x| *x >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}
