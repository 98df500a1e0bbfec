//! Bounds for commuting (diagonal) output states, where the channel is an
//! ordinary transition matrix `lambda_j^i`.
//!
//! Random coding:  `(M-1)^s (sum_j [sum_i pi_i (lambda_j^i)^{1/(1+s)}]^{1+s})^n`.
//! Expurgation:    `(4 (M-1) [sum_ik pi_i pi_k B_ik^{1/s}]^n)^s` with the
//! Bhattacharyya coefficient `B_ik = sum_j sqrt(lambda_j^i lambda_j^k)`.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelError, ChannelSpec, Prior};
use crate::hermitian::{eig_hermitian, psd_power, psd_sqrt, HermitianMatrix, LinalgError, DEFAULT_CLAMP_TOL};

const ROW_SUM_TOL: f64 = 1e-12;

/// `a` probability rows of common length `d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalChannel {
    rows: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowsDocument {
    rows: Vec<Vec<f64>>,
}

impl DiagonalChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ChannelError> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        if d == 0 {
            return Err(ChannelError::Validation("classical channel needs at least one non-empty row".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(ChannelError::Validation(format!("row {i} has {} entries, expected {d}", row.len())));
            }
            if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(ChannelError::Validation(format!("row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(ChannelError::Validation(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(Self { rows })
    }

    /// Parses `{"rows": [[...], ...]}`.
    pub fn from_document(doc: &str) -> Result<Self, ChannelError> {
        let parsed: RowsDocument = serde_json::from_str(doc).map_err(|e| ChannelError::Parse(e.to_string()))?;
        Self::new(parsed.rows)
    }

    pub fn alphabet_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Row `i` as the diagonal density operator `S_i`.
    pub fn operator(&self, i: usize) -> HermitianMatrix {
        HermitianMatrix::diagonal(&self.rows[i])
    }
}

fn check_code_size(m: u64, n: u32) -> Result<(), ChannelError> {
    if m == 0 || n == 0 {
        return Err(ChannelError::Validation(format!("need M >= 1 and n >= 1, got M = {m}, n = {n}")));
    }
    Ok(())
}

fn check_s(s: f64, lo: f64, hi: f64) -> Result<(), ChannelError> {
    if !(s >= lo && s <= hi) {
        return Err(ChannelError::Validation(format!("s = {s} must lie in [{lo}, {hi}]")));
    }
    Ok(())
}

/// `sum_j [sum_i pi_i (lambda_j^i)^{1/(1+s)}]^{1+s}`.
pub fn gallager_bracket(dc: &DiagonalChannel, prior: &Prior, s: f64) -> Result<f64, ChannelError> {
    prior.check_len(dc.alphabet_size())?;
    check_s(s, 0.0, 1.0)?;
    let p = 1.0 / (1.0 + s);
    Ok((0..dc.output_size())
        .map(|j| {
            let inner: f64 = dc.rows.iter().zip(prior.weights()).map(|(row, w)| w * row[j].powf(p)).sum();
            inner.powf(1.0 + s)
        })
        .sum())
}

pub fn gallager_random_rhs(dc: &DiagonalChannel, prior: &Prior, m: u64, n: u32, s: f64) -> Result<f64, ChannelError> {
    check_code_size(m, n)?;
    Ok(((m - 1) as f64).powf(s) * gallager_bracket(dc, prior, s)?.powi(n as i32))
}

pub fn bhattacharyya(dc: &DiagonalChannel, i: usize, k: usize) -> f64 {
    dc.rows[i].iter().zip(&dc.rows[k]).map(|(x, y)| (x * y).sqrt()).sum()
}

/// `sum_ik pi_i pi_k B_ik^{1/s}`.
pub fn bhattacharyya_sum(dc: &DiagonalChannel, prior: &Prior, s: f64) -> Result<f64, ChannelError> {
    prior.check_len(dc.alphabet_size())?;
    check_s(s, 1.0, f64::INFINITY)?;
    let w = prior.weights();
    let a = dc.alphabet_size();
    let mut acc = 0.0;
    for i in 0..a {
        for k in 0..a {
            acc += w[i] * w[k] * bhattacharyya(dc, i, k).powf(1.0 / s);
        }
    }
    Ok(acc)
}

pub fn expurgated_classical_rhs(
    dc: &DiagonalChannel,
    prior: &Prior,
    m: u64,
    n: u32,
    s: f64,
) -> Result<f64, ChannelError> {
    check_code_size(m, n)?;
    Ok((4.0 * (m - 1) as f64 * bhattacharyya_sum(dc, prior, s)?.powi(n as i32)).powf(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridValue {
    pub s: f64,
    pub value: f64,
}

/// Smallest value of `f` over `grid`, first occurrence on ties.
pub fn minimize_over_grid<F>(grid: &[f64], mut f: F) -> Result<Option<GridValue>, ChannelError>
where
    F: FnMut(f64) -> Result<f64, ChannelError>,
{
    let mut best: Option<GridValue> = None;
    for &s in grid {
        let value = f(s)?;
        if best.is_none_or(|b| value < b.value) {
            best = Some(GridValue { s, value });
        }
    }
    Ok(best)
}

/// `Tr [sum_i pi_i S_i^{1/(1+s)}]^{1+s}` from density operators, with no
/// assumption that they commute.
pub fn operator_gallager_bracket(ops: &[HermitianMatrix], prior: &Prior, s: f64) -> Result<f64, ChannelError> {
    prior.check_len(ops.len())?;
    check_s(s, 0.0, 1.0)?;
    let d = ops[0].dim();
    let mut sum = HermitianMatrix::diagonal(&vec![0.0; d]);
    for (op, &w) in ops.iter().zip(prior.weights()) {
        if w > 0.0 {
            sum = sum.add(&psd_power(op, 1.0 / (1.0 + s), DEFAULT_CLAMP_TOL)?.matrix.scale(w));
        }
    }
    Ok(psd_power(&sum, 1.0 + s, DEFAULT_CLAMP_TOL)?.matrix.trace())
}

/// `Tr sqrt(S_i) sqrt(S_k)`.
pub fn operator_bhattacharyya(si: &HermitianMatrix, sk: &HermitianMatrix) -> Result<f64, LinalgError> {
    let a = psd_sqrt(si, DEFAULT_CLAMP_TOL)?.matrix;
    let b = psd_sqrt(sk, DEFAULT_CLAMP_TOL)?.matrix;
    Ok((a.as_matrix() * b.as_matrix()).trace().re)
}

/// The density operators `|psi_i><psi_i|` of a state-vector channel.
pub fn pure_state_operators(ch: &ChannelSpec) -> Result<Vec<HermitianMatrix>, ChannelError> {
    let states = ch.states().ok_or(ChannelError::RepresentationUnavailable)?;
    Ok(states.iter().map(|v| HermitianMatrix::projector(v)).collect())
}

/// The rank-one operators of a pure-state channel written in the eigenbasis
/// of their average, which is where they are diagonal when they commute.
/// Returns `None` if the operators do not commute.
pub fn diagonal_embedding(ch: &ChannelSpec, prior: &Prior) -> Result<Option<DiagonalChannel>, ChannelError> {
    let ops = pure_state_operators(ch)?;
    prior.check_len(ops.len())?;
    for (i, x) in ops.iter().enumerate() {
        for y in &ops[i + 1..] {
            let c = x.as_matrix() * y.as_matrix() - y.as_matrix() * x.as_matrix();
            if c.iter().any(|z| z.norm() > 1e-12) {
                return Ok(None);
            }
        }
    }
    // a generic mixture separates the common eigenvectors
    let d = ops[0].dim();
    let mut mix = HermitianMatrix::diagonal(&vec![0.0; d]);
    for (i, op) in ops.iter().enumerate() {
        mix = mix.add(&op.scale(1.0 + (i as f64 + 1.0).sqrt()));
    }
    let basis = eig_hermitian(&mix).eigenvectors;
    let rows = ops
        .iter()
        .map(|op| {
            let rotated = basis.adjoint() * op.as_matrix() * &basis;
            let mut row: Vec<f64> = (0..d).map(|j| rotated[(j, j)].re.max(0.0)).collect();
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= sum);
            row
        })
        .collect();
    Ok(Some(DiagonalChannel::new(rows)?))
}
