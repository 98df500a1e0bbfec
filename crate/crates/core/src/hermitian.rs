//! Dense complex Hermitian kernels: eigendecomposition, clamped spectral
//! functions (square root, real powers) and Gram-matrix diagnostics.
//!
//! All tolerances that depend on the size of a matrix are taken relative to
//! its largest eigenvalue magnitude, floored at 1.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

pub type Complex64 = nalgebra::Complex<f64>;

/// Maximum `|H_ij - conj(H_ji)|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default relative clamp window for semi-definite spectra.
pub const DEFAULT_CLAMP_TOL: f64 = 1e-12;

const GRAM_PSD_TOL: f64 = 1e-10;
const GRAM_DIAG_TOL: f64 = 1e-9;
const GRAM_OVERLAP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |H_ij - conj(H_ji)| = {deviation:e}")]
    NonHermitianInput { deviation: f64 },
    #[error("matrix is not positive semi-definite: eigenvalue {eigenvalue:e} below floor {floor:e}")]
    NotPsd { eigenvalue: f64, floor: f64 },
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    /// Validates `m` and stores its exactly-Hermitian part `(m + m†)/2`.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let deviation = asymmetry(&m);
        if deviation > HERMITIAN_TOL || deviation.is_nan() {
            return Err(LinalgError::NonHermitianInput { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(LinalgError::NotSquare { rows: n, cols: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self(DMatrix::from_fn(
            n,
            n,
            |i, j| {
                if i == j {
                    Complex64::new(values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
        ))
    }

    /// Outer product `|v><v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        Self(DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    fn symmetrized(m: DMatrix<Complex64>) -> Self {
        let adj = m.adjoint();
        Self((m + adj).map(|z| z * 0.5))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Elementwise sum of two Hermitian matrices of equal dimension.
    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self(&self.0 + &other.0)
    }

    pub fn scale(&self, factor: f64) -> HermitianMatrix {
        Self(self.0.map(|z| z * factor))
    }
}

fn asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(d);
        }
    }
    worst
}

/// Eigenvalues sorted ascending with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl EigenSystem {
    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        self.map_spectrum(|x| x)
    }

    /// Spectral scale used by every relative tolerance: `max(max |λ|, 1)`.
    pub fn scale(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.abs()).fold(1.0, f64::max)
    }
}

pub fn eig_hermitian(h: &HermitianMatrix) -> EigenSystem {
    let n = h.dim();
    if n == 0 {
        return EigenSystem { eigenvalues: Vec::new(), eigenvectors: DMatrix::zeros(0, 0) };
    }
    let eig = SymmetricEigen::new(h.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    EigenSystem { eigenvalues, eigenvectors }
}

/// A spectral function of a PSD matrix together with the eigenvalues that
/// were clamped to zero on the way.
#[derive(Clone, Debug)]
pub struct ClampedFunction {
    pub matrix: HermitianMatrix,
    pub clamped: Vec<f64>,
}

/// Eigenvalues of `h` with values inside the clamp window set to zero.
///
/// Eigenvalues below `-clamp_tol * scale` are an error; everything below
/// `+clamp_tol * scale` becomes exactly zero.
pub fn clamped_eigen(h: &HermitianMatrix, clamp_tol: f64) -> Result<(EigenSystem, Vec<f64>), LinalgError> {
    let mut eig = eig_hermitian(h);
    let window = clamp_tol * eig.scale();
    let mut clamped = Vec::new();
    for lambda in eig.eigenvalues.iter_mut() {
        if *lambda < -window {
            return Err(LinalgError::NotPsd { eigenvalue: *lambda, floor: -window });
        }
        if *lambda < window {
            if *lambda != 0.0 {
                clamped.push(*lambda);
            }
            *lambda = 0.0;
        }
    }
    Ok((eig, clamped))
}

/// `H^p` for a positive semi-definite `h` and `p > 0`.
pub fn psd_power(h: &HermitianMatrix, p: f64, clamp_tol: f64) -> Result<ClampedFunction, LinalgError> {
    let (eig, clamped) = clamped_eigen(h, clamp_tol)?;
    let m = eig.map_spectrum(|x| if x == 0.0 { 0.0 } else { x.powf(p) });
    Ok(ClampedFunction { matrix: HermitianMatrix::symmetrized(m), clamped })
}

pub fn psd_sqrt(h: &HermitianMatrix, clamp_tol: f64) -> Result<ClampedFunction, LinalgError> {
    let (eig, clamped) = clamped_eigen(h, clamp_tol)?;
    let m = eig.map_spectrum(f64::sqrt);
    Ok(ClampedFunction { matrix: HermitianMatrix::symmetrized(m), clamped })
}

/// Outcome of [`validate_gram`]. Every field is computed even when an
/// earlier check already failed.
#[derive(Clone, Debug, PartialEq)]
pub struct GramDiagnostics {
    pub dim: usize,
    pub max_asymmetry: f64,
    pub min_eigenvalue: f64,
    pub max_diagonal_deviation: f64,
    pub max_overlap: f64,
}

impl GramDiagnostics {
    pub fn hermitian(&self) -> bool {
        self.max_asymmetry <= HERMITIAN_TOL
    }

    pub fn psd(&self) -> bool {
        self.min_eigenvalue >= -GRAM_PSD_TOL
    }

    pub fn unit_diagonal(&self) -> bool {
        self.max_diagonal_deviation <= GRAM_DIAG_TOL
    }

    pub fn overlaps_bounded(&self) -> bool {
        self.max_overlap <= 1.0 + GRAM_OVERLAP_TOL
    }

    pub fn is_valid(&self) -> bool {
        self.hermitian() && self.psd() && self.unit_diagonal() && self.overlaps_bounded()
    }

    /// Names of the failed checks, empty when valid.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.hermitian() {
            out.push("hermitian");
        }
        if !self.psd() {
            out.push("positive semi-definite");
        }
        if !self.unit_diagonal() {
            out.push("unit diagonal");
        }
        if !self.overlaps_bounded() {
            out.push("overlap magnitude <= 1");
        }
        out
    }
}

/// Checks the invariants of a matrix of pairwise inner products of unit
/// vectors. Non-square input reports infinite asymmetry.
pub fn validate_gram(g: &DMatrix<Complex64>) -> GramDiagnostics {
    if !g.is_square() {
        return GramDiagnostics {
            dim: g.nrows(),
            max_asymmetry: f64::INFINITY,
            min_eigenvalue: f64::NEG_INFINITY,
            max_diagonal_deviation: f64::INFINITY,
            max_overlap: f64::INFINITY,
        };
    }
    let n = g.nrows();
    let max_asymmetry = asymmetry(g);
    let hermitian_part = HermitianMatrix::symmetrized(g.clone());
    let min_eigenvalue = eig_hermitian(&hermitian_part).eigenvalues.first().copied().unwrap_or(0.0);
    let max_diagonal_deviation = (0..n).map(|i| (g[(i, i)] - Complex64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);
    let max_overlap = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    GramDiagnostics { dim: n, max_asymmetry, min_eigenvalue, max_diagonal_deviation, max_overlap }
}
