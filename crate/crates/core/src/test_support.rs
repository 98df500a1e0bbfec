//! Random instance builders shared by unit tests.

use crate::channel::{ChannelSpec, Prior};
use crate::hermitian::Complex64;

/// `a` unit vectors in `C^d` built from `raw` (at least `2 a d` entries).
pub fn random_states(a: usize, d: usize, raw: &[f64]) -> ChannelSpec {
    let vectors = (0..a)
        .map(|i| {
            let v: Vec<Complex64> =
                (0..d).map(|j| Complex64::new(raw[2 * (i * d + j)], raw[2 * (i * d + j) + 1])).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                let mut e = vec![Complex64::new(0.0, 0.0); d];
                e[0] = Complex64::new(1.0, 0.0);
                e
            } else {
                v.into_iter().map(|z| z / norm).collect()
            }
        })
        .collect();
    ChannelSpec::from_states(vectors).unwrap()
}

/// Prior proportional to the positive weights in `raw`.
pub fn normalize(raw: &[f64]) -> Prior {
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let drift: f64 = w.iter().sum::<f64>() - 1.0;
    let top = (0..w.len()).max_by(|&i, &j| w[i].total_cmp(&w[j])).unwrap();
    w[top] -= drift;
    Prior::new(w).unwrap()
}
