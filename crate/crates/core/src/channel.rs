//! Pure-state channel specifications, input priors and the spectrum of the
//! averaged signal state.
//!
//! A channel is stored either as explicit unit vectors or only through its
//! Gram matrix `G_ik = <psi_i|psi_k>`. Every bound in this crate depends on
//! the states only through `G`, so the Gram form is always available; the
//! state vectors are kept when they were supplied.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hermitian::{clamped_eigen, validate_gram, Complex64, HermitianMatrix, LinalgError, DEFAULT_CLAMP_TOL};

const UNIT_NORM_TOL: f64 = 1e-9;
const PRIOR_SUM_TOL: f64 = 1e-12;
const SPECTRUM_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("operation needs state vectors but the channel is given by its Gram matrix only")]
    RepresentationUnavailable,
    #[error("prior has {got} entries, channel alphabet has {expected}")]
    PriorMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    StateVectors { dim: usize, vectors: Vec<Vec<Complex64>> },
    GramOnly,
}

#[derive(Clone, Debug)]
pub struct ChannelSpec {
    representation: Representation,
    gram: HermitianMatrix,
    declared_prior: Option<Prior>,
}

impl ChannelSpec {
    pub fn from_states(vectors: Vec<Vec<Complex64>>) -> Result<Self, ChannelError> {
        let dim = vectors.first().map(Vec::len).unwrap_or(0);
        if vectors.is_empty() || dim == 0 {
            return Err(ChannelError::Validation("channel needs at least one non-empty state".into()));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(ChannelError::Validation(format!("state {i} has {} components, expected {dim}", v.len())));
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(ChannelError::Validation(format!("state {i} is not a unit vector (norm {norm})")));
            }
        }
        let a = vectors.len();
        let raw = DMatrix::from_fn(a, a, |i, k| inner(&vectors[i], &vectors[k]));
        let gram = checked_gram(raw)?;
        Ok(Self { representation: Representation::StateVectors { dim, vectors }, gram, declared_prior: None })
    }

    pub fn from_gram(g: DMatrix<Complex64>) -> Result<Self, ChannelError> {
        if g.nrows() == 0 {
            return Err(ChannelError::Validation("empty Gram matrix".into()));
        }
        Ok(Self { representation: Representation::GramOnly, gram: checked_gram(g)?, declared_prior: None })
    }

    /// Convenience constructor for real orthonormal-embedded states.
    pub fn from_real_states(vectors: &[Vec<f64>]) -> Result<Self, ChannelError> {
        Self::from_states(vectors.iter().map(|v| v.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect())
    }

    /// Two states in `C^2` with real overlap `epsilon`.
    pub fn binary(epsilon: f64) -> Result<Self, ChannelError> {
        Self::from_real_states(&[vec![1.0, 0.0], vec![epsilon, (1.0 - epsilon * epsilon).sqrt()]])
    }

    /// `k` mutually orthogonal basis states of `C^k`.
    pub fn orthogonal(k: usize) -> Result<Self, ChannelError> {
        let vectors: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::from_real_states(&vectors)
    }

    pub fn with_prior(mut self, prior: Prior) -> Result<Self, ChannelError> {
        prior.check_len(self.alphabet_size())?;
        self.declared_prior = Some(prior);
        Ok(self)
    }

    pub fn alphabet_size(&self) -> usize {
        self.gram.dim()
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    pub fn states(&self) -> Option<&[Vec<Complex64>]> {
        match &self.representation {
            Representation::StateVectors { vectors, .. } => Some(vectors),
            Representation::GramOnly => None,
        }
    }

    pub fn gram(&self) -> &HermitianMatrix {
        &self.gram
    }

    pub fn overlap(&self, i: usize, k: usize) -> Complex64 {
        self.gram.get(i, k)
    }

    /// `|<psi_i|psi_k>|^2`.
    pub fn overlap_sq(&self, i: usize, k: usize) -> f64 {
        self.gram.get(i, k).norm_sqr()
    }

    /// Prior declared in the channel document, if any.
    pub fn declared_prior(&self) -> Option<&Prior> {
        self.declared_prior.as_ref()
    }

    pub fn prior_or_uniform(&self) -> Prior {
        self.declared_prior.clone().unwrap_or_else(|| Prior::uniform(self.alphabet_size()))
    }

    pub fn to_document(&self) -> String {
        let doc = match &self.representation {
            Representation::StateVectors { dim, vectors } => ChannelDocument {
                format: Format::States,
                states: Some(StatesBlock {
                    dim: *dim,
                    vectors: vectors
                        .iter()
                        .map(|v| ComplexVector {
                            re: v.iter().map(|z| z.re).collect(),
                            im: Some(v.iter().map(|z| z.im).collect()),
                        })
                        .collect(),
                }),
                gram: None,
                prior: self.declared_prior.as_ref().map(|p| p.0.clone()),
            },
            Representation::GramOnly => {
                let a = self.alphabet_size();
                let rows = |f: fn(Complex64) -> f64| -> Vec<Vec<f64>> {
                    (0..a).map(|i| (0..a).map(|k| f(self.gram.get(i, k))).collect()).collect()
                };
                ChannelDocument {
                    format: Format::Gram,
                    states: None,
                    gram: Some(GramBlock { re: rows(|z| z.re), im: Some(rows(|z| z.im)) }),
                    prior: self.declared_prior.as_ref().map(|p| p.0.clone()),
                }
            }
        };
        serde_json::to_string_pretty(&doc).expect("channel document serializes")
    }
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn checked_gram(mut g: DMatrix<Complex64>) -> Result<HermitianMatrix, ChannelError> {
    let diag = validate_gram(&g);
    if !diag.is_valid() {
        return Err(ChannelError::Validation(format!("Gram matrix fails: {}", diag.failures().join(", "))));
    }
    // states are unit vectors; keep repeated letters exactly indistinguishable
    g.fill_diagonal(Complex64::new(1.0, 0.0));
    Ok(HermitianMatrix::new(g)?)
}

/// Probability vector over the input alphabet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prior(Vec<f64>);

impl Prior {
    pub fn new(weights: Vec<f64>) -> Result<Self, ChannelError> {
        if weights.is_empty() {
            return Err(ChannelError::Validation("prior is empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(ChannelError::Validation(format!("prior weight {w} is negative or not finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(ChannelError::Validation(format!("prior sums to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(a: usize) -> Self {
        Self(vec![1.0 / a as f64; a])
    }

    /// All mass on a single letter.
    pub fn point(a: usize, letter: usize) -> Self {
        let mut w = vec![0.0; a];
        w[letter] = 1.0;
        Self(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_len(&self, a: usize) -> Result<(), ChannelError> {
        if self.0.len() != a {
            return Err(ChannelError::PriorMismatch { expected: a, got: self.0.len() });
        }
        Ok(())
    }

    /// Parses either a bare JSON array or an object with a `prior` field.
    pub fn from_document(doc: &str) -> Result<Self, ChannelError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum PriorDoc {
            Bare(Vec<f64>),
            Wrapped { prior: Vec<f64> },
        }
        let parsed: PriorDoc = serde_json::from_str(doc).map_err(|e| ChannelError::Parse(e.to_string()))?;
        match parsed {
            PriorDoc::Bare(w) | PriorDoc::Wrapped { prior: w } => Self::new(w),
        }
    }
}

/// Eigenvalues of the averaged state: a probability vector sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self, ChannelError> {
        if eigenvalues.iter().any(|l| l.is_nan() || *l < 0.0) {
            return Err(ChannelError::Validation("spectrum has a negative eigenvalue".into()));
        }
        let sum: f64 = eigenvalues.iter().sum();
        if (sum - 1.0).abs() > SPECTRUM_SUM_TOL {
            return Err(ChannelError::Validation(format!("spectrum sums to {sum}, not 1")));
        }
        Ok(Self(eigenvalues))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.0
    }

    /// Strictly positive eigenvalues, ascending.
    pub fn nonzero(&self) -> Vec<f64> {
        self.0.iter().copied().filter(|&l| l > 0.0).collect()
    }
}

/// `sum_i pi_i |psi_i><psi_i|` on the state space.
pub fn average_state(ch: &ChannelSpec, prior: &Prior) -> Result<HermitianMatrix, ChannelError> {
    prior.check_len(ch.alphabet_size())?;
    let Representation::StateVectors { dim, vectors } = &ch.representation else {
        return Err(ChannelError::RepresentationUnavailable);
    };
    let d = *dim;
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for (v, &w) in vectors.iter().zip(prior.weights()) {
        if w == 0.0 {
            continue;
        }
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] += v[r] * v[c].conj() * w;
            }
        }
    }
    Ok(HermitianMatrix::new(m)?)
}

/// `W_ik = sqrt(pi_i pi_k) G_ik`; shares its nonzero spectrum with the
/// averaged state.
pub fn weighted_gram(ch: &ChannelSpec, prior: &Prior) -> Result<HermitianMatrix, ChannelError> {
    prior.check_len(ch.alphabet_size())?;
    let a = ch.alphabet_size();
    let root: Vec<f64> = prior.weights().iter().map(|w| w.sqrt()).collect();
    let m = DMatrix::from_fn(a, a, |i, k| ch.gram.get(i, k) * (root[i] * root[k]));
    Ok(HermitianMatrix::new(m)?)
}

fn spectrum_of(h: &HermitianMatrix) -> Result<Spectrum, ChannelError> {
    let (eig, _) = clamped_eigen(h, DEFAULT_CLAMP_TOL)?;
    Spectrum::new(eig.eigenvalues)
}

/// Spectrum of the averaged state. State-vector channels diagonalize the
/// `d x d` operator; Gram-only channels use the `a x a` weighted Gram matrix.
pub fn spectrum(ch: &ChannelSpec, prior: &Prior) -> Result<Spectrum, ChannelError> {
    match ch.representation {
        Representation::StateVectors { .. } => spectrum_of(&average_state(ch, prior)?),
        Representation::GramOnly => spectrum_of(&weighted_gram(ch, prior)?),
    }
}

/// Spectrum through the weighted Gram matrix regardless of representation.
pub fn spectrum_via_gram(ch: &ChannelSpec, prior: &Prior) -> Result<Spectrum, ChannelError> {
    spectrum_of(&weighted_gram(ch, prior)?)
}

/// von Neumann entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(sp: &Spectrum) -> f64 {
    -sp.0.iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln()).sum::<f64>()
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    States,
    Gram,
}

#[derive(Serialize, Deserialize)]
struct ComplexVector {
    re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct StatesBlock {
    dim: usize,
    vectors: Vec<ComplexVector>,
}

#[derive(Serialize, Deserialize)]
struct GramBlock {
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDocument {
    format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<StatesBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gram: Option<GramBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prior: Option<Vec<f64>>,
}

fn zip_complex(re: &[f64], im: Option<&Vec<f64>>, what: &str) -> Result<Vec<Complex64>, ChannelError> {
    match im {
        None => Ok(re.iter().map(|&x| Complex64::new(x, 0.0)).collect()),
        Some(im) if im.len() == re.len() => Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()),
        Some(im) => Err(ChannelError::Parse(format!("{what}: re has {} entries but im has {}", re.len(), im.len()))),
    }
}

/// Parses and validates a channel document (JSON).
pub fn load_channel(document: &str) -> Result<ChannelSpec, ChannelError> {
    let doc: ChannelDocument = serde_json::from_str(document).map_err(|e| ChannelError::Parse(e.to_string()))?;
    let channel = match doc.format {
        Format::States => {
            let block =
                doc.states.ok_or_else(|| ChannelError::Parse("format \"states\" needs a \"states\" block".into()))?;
            let vectors = block
                .vectors
                .iter()
                .enumerate()
                .map(|(i, v)| zip_complex(&v.re, v.im.as_ref(), &format!("vector {i}")))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some((i, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != block.dim) {
                return Err(ChannelError::Validation(format!(
                    "vector {i} has {} components but dim is {}",
                    v.len(),
                    block.dim
                )));
            }
            ChannelSpec::from_states(vectors)?
        }
        Format::Gram => {
            let block = doc.gram.ok_or_else(|| ChannelError::Parse("format \"gram\" needs a \"gram\" block".into()))?;
            let a = block.re.len();
            let mut m = DMatrix::<Complex64>::zeros(a, a);
            for (i, row) in block.re.iter().enumerate() {
                let im_row = block.im.as_ref().map(|im| im.get(i).cloned().unwrap_or_default());
                let row = zip_complex(row, im_row.as_ref(), &format!("gram row {i}"))?;
                if row.len() != a {
                    return Err(ChannelError::Parse(format!("gram row {i} has {} entries, expected {a}", row.len())));
                }
                for (k, z) in row.into_iter().enumerate() {
                    m[(i, k)] = z;
                }
            }
            if block.im.as_ref().is_some_and(|im| im.len() != a) {
                return Err(ChannelError::Parse("gram im block has the wrong number of rows".into()));
            }
            ChannelSpec::from_gram(m)?
        }
    };
    match doc.prior {
        Some(p) => channel.with_prior(Prior::new(p)?),
        None => Ok(channel),
    }
}
