//! Core model types: nearest-neighbour steps on `Z^2`, polymer configurations,
//! spin-chain pairs, interaction kernels and Gibbs weights.
//!
//! A polymer of length `n` is a sequence of unit steps `X_1..X_n`; its energy
//! couples every pair of steps through a distance kernel `V(|i-j|)` acting on
//! the inner product `<X_i, X_j>`. Rotating the lattice by 45 degrees maps each
//! step to a pair of signs, turning the polymer weight into a product of two
//! one-dimensional spin-chain weights at half the coupling. That bijection is
//! the workhorse of everything else in this crate, so it lives here next to
//! the types.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("polymer must contain at least one step")]
    EmptyPolymer,
    #[error("spin chains must have equal nonzero length (got {0} and {1})")]
    ChainLengthMismatch(usize, usize),
    #[error("spins must be +1 or -1 (found {0} at site {1})")]
    InvalidSpin(i8, usize),
    #[error("kernel exponent must satisfy alpha > 1 for summability (got {0})")]
    BadExponent(f64),
    #[error("finite-range kernel needs range >= 1 and strength > 0")]
    BadFiniteRange,
    #[error("custom kernel values must be finite and nonnegative")]
    BadCustomKernel,
    #[error("inverse temperature must be finite and nonnegative (got {0})")]
    BadBeta(f64),
}

/// Unit step of the walk. The four directions of `Z^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    PlusX,
    PlusY,
    MinusX,
    MinusY,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::PlusX, Step::PlusY, Step::MinusX, Step::MinusY];

    /// Index in `0..4`, used for dense tables and enumeration order.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Step::PlusX => 0,
            Step::PlusY => 1,
            Step::MinusX => 2,
            Step::MinusY => 3,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Step {
        Step::ALL[i]
    }

    /// Displacement vector.
    #[inline]
    pub fn vector(self) -> [i64; 2] {
        match self {
            Step::PlusX => [1, 0],
            Step::PlusY => [0, 1],
            Step::MinusX => [-1, 0],
            Step::MinusY => [0, -1],
        }
    }

    /// Euclidean inner product of two unit steps; always -1, 0 or +1.
    /// Integer arithmetic so identities involving it hold exactly.
    #[inline]
    pub fn dot(self, other: Step) -> i32 {
        let a = self.vector();
        let b = other.vector();
        (a[0] * b[0] + a[1] * b[1]) as i32
    }

    /// Sign pair under the diagonal rotation: `PlusX -> (+,+)`, `PlusY -> (-,+)`,
    /// `MinusX -> (-,-)`, `MinusY -> (+,-)`.
    #[inline]
    pub fn signs(self) -> (i8, i8) {
        match self {
            Step::PlusX => (1, 1),
            Step::PlusY => (-1, 1),
            Step::MinusX => (-1, -1),
            Step::MinusY => (1, -1),
        }
    }

    #[inline]
    pub fn from_signs(s1: i8, s2: i8) -> Step {
        match (s1, s2) {
            (1, 1) => Step::PlusX,
            (-1, 1) => Step::PlusY,
            (-1, -1) => Step::MinusX,
            (1, -1) => Step::MinusY,
            _ => unreachable!("signs must be +/-1"),
        }
    }
}

/// A polymer configuration: the ordered list of steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polymer {
    steps: Vec<Step>,
}

impl Polymer {
    pub fn new(steps: Vec<Step>) -> Result<Polymer, ModelError> {
        if steps.is_empty() {
            return Err(ModelError::EmptyPolymer);
        }
        Ok(Polymer { steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty polymers
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Visited sites including the origin, so `sites()[k]` is the position
    /// after `k` steps.
    pub fn sites(&self) -> Vec<[i64; 2]> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut pos = [0i64, 0];
        out.push(pos);
        for s in &self.steps {
            let v = s.vector();
            pos = [pos[0] + v[0], pos[1] + v[1]];
            out.push(pos);
        }
        out
    }

    pub fn end_to_end(&self) -> [i64; 2] {
        let mut pos = [0i64, 0];
        for s in &self.steps {
            let v = s.vector();
            pos = [pos[0] + v[0], pos[1] + v[1]];
        }
        pos
    }
}

/// Two +/-1 chains of equal length; the image of a polymer under the
/// diagonal rotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinChainPair {
    pub sigma1: Vec<i8>,
    pub sigma2: Vec<i8>,
}

impl SpinChainPair {
    pub fn new(sigma1: Vec<i8>, sigma2: Vec<i8>) -> Result<SpinChainPair, ModelError> {
        if sigma1.len() != sigma2.len() || sigma1.is_empty() {
            return Err(ModelError::ChainLengthMismatch(sigma1.len(), sigma2.len()));
        }
        for (i, &s) in sigma1.iter().chain(sigma2.iter()).enumerate() {
            if s != 1 && s != -1 {
                return Err(ModelError::InvalidSpin(s, i % sigma1.len()));
            }
        }
        Ok(SpinChainPair { sigma1, sigma2 })
    }

    pub fn len(&self) -> usize {
        self.sigma1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma1.is_empty()
    }
}

/// Distance kernel shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// `V(r) = r^{-alpha}`, `alpha > 1`.
    PowerLaw { alpha: f64 },
    /// `V(r) = strength` for `1 <= r <= range`, zero beyond.
    FiniteRange { range: usize, strength: f64 },
    /// Arbitrary nonnegative table, `values[r-1] = V(r)`; zero past the end.
    /// Summability past the table is the caller's concern.
    Custom { values: Vec<f64> },
}

/// Which exponent sign turns the pair energy into a sampling weight.
///
/// `AlignmentFavoring` (the default) rewards aligned steps: log-weight
/// `+beta * H`. Under the diagonal rotation this makes both spin chains
/// ferromagnetic, which is what every correlation-inequality and cluster
/// routine in this crate relies on. `AsWritten` flips the sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    AlignmentFavoring,
    AsWritten,
}

impl SignConvention {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            SignConvention::AlignmentFavoring => 1.0,
            SignConvention::AsWritten => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionKernel {
    pub kind: KernelKind,
    #[serde(default)]
    pub sign_convention: SignConvention,
}

impl InteractionKernel {
    pub fn power_law(alpha: f64) -> Result<InteractionKernel, ModelError> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(ModelError::BadExponent(alpha));
        }
        Ok(InteractionKernel {
            kind: KernelKind::PowerLaw { alpha },
            sign_convention: SignConvention::default(),
        })
    }

    pub fn finite_range(range: usize, strength: f64) -> Result<InteractionKernel, ModelError> {
        if range == 0 || !(strength > 0.0) || !strength.is_finite() {
            return Err(ModelError::BadFiniteRange);
        }
        Ok(InteractionKernel {
            kind: KernelKind::FiniteRange { range, strength },
            sign_convention: SignConvention::default(),
        })
    }

    pub fn custom(values: Vec<f64>) -> Result<InteractionKernel, ModelError> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::BadCustomKernel);
        }
        Ok(InteractionKernel {
            kind: KernelKind::Custom { values },
            sign_convention: SignConvention::default(),
        })
    }

    pub fn with_sign_convention(mut self, c: SignConvention) -> InteractionKernel {
        self.sign_convention = c;
        self
    }

    /// `V(r)` for `r >= 1`.
    pub fn coupling(&self, r: usize) -> f64 {
        debug_assert!(r >= 1);
        match &self.kind {
            KernelKind::PowerLaw { alpha } => (r as f64).powf(-alpha),
            KernelKind::FiniteRange { range, strength } => {
                if r <= *range {
                    *strength
                } else {
                    0.0
                }
            }
            KernelKind::Custom { values } => values.get(r - 1).copied().unwrap_or(0.0),
        }
    }

    /// Dense table `t[r] = V(r)` for `r` in `1..n`; `t[0]` is unused and zero.
    /// Everything pairwise in this crate runs off such a table.
    pub fn table(&self, n: usize) -> Vec<f64> {
        let mut t = vec![0.0; n.max(1)];
        for r in 1..n {
            t[r] = self.coupling(r);
        }
        t
    }
}

/// Full parameter set for a finite-volume measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsParams {
    pub beta: f64,
    pub kernel: InteractionKernel,
    pub n: usize,
}

impl GibbsParams {
    pub fn new(beta: f64, kernel: InteractionKernel, n: usize) -> Result<GibbsParams, ModelError> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(ModelError::BadBeta(beta));
        }
        if n == 0 {
            return Err(ModelError::EmptyPolymer);
        }
        Ok(GibbsParams { beta, kernel, n })
    }

    /// Signed coupling of each image chain. The factorization below halves the
    /// polymer temperature and carries the convention sign.
    pub fn chain_beta_eff(&self) -> f64 {
        self.kernel.sign_convention.sign() * self.beta / 2.0
    }
}

/// Pair energy `sum_{i<j} V(|i-j|) <X_i, X_j>`.
pub fn hamiltonian(p: &Polymer, kernel: &InteractionKernel) -> f64 {
    let steps = p.steps();
    let n = steps.len();
    let table = kernel.table(n);
    let mut h = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = steps[i].dot(steps[j]);
            if d != 0 {
                h += table[j - i] * d as f64;
            }
        }
    }
    h
}

/// Log-weight of a polymer: `sign * beta * H`. The normalizing constant is
/// deliberately left out; only weight ratios ever matter.
pub fn gibbs_log_weight(p: &Polymer, g: &GibbsParams) -> f64 {
    g.kernel.sign_convention.sign() * g.beta * hamiltonian(p, &g.kernel)
}

/// Log-weight of a single +/-1 chain: `beta_eff * sum_{i<j} V(|i-j|) s_i s_j`.
/// `beta_eff` may be negative (antialigning chain).
pub fn chain_log_weight(spins: &[i8], beta_eff: f64, kernel: &InteractionKernel) -> f64 {
    let n = spins.len();
    let table = kernel.table(n);
    let mut e = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            e += table[j - i] * (spins[i] * spins[j]) as f64;
        }
    }
    beta_eff * e
}

/// Chain pair energy without the coupling factor: `sum_{i<j} V(|i-j|) s_i s_j`.
pub fn chain_energy(spins: &[i8], table: &[f64]) -> f64 {
    let n = spins.len();
    let mut e = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            e += table[j - i] * (spins[i] * spins[j]) as f64;
        }
    }
    e
}

/// Rotate a polymer into its two sign chains.
///
/// Step `X_i` maps to `(sigma1_i, sigma2_i)` via [`Step::signs`]; the inner
/// product identity `<X_i, X_j> = (sigma1_i sigma1_j + sigma2_i sigma2_j) / 2`
/// holds exactly, so
/// `gibbs_log_weight(p) = chain_log_weight(sigma1, s*beta/2) + chain_log_weight(sigma2, s*beta/2)`.
pub fn polymer_to_spins(p: &Polymer) -> SpinChainPair {
    let mut sigma1 = Vec::with_capacity(p.len());
    let mut sigma2 = Vec::with_capacity(p.len());
    for s in p.steps() {
        let (a, b) = s.signs();
        sigma1.push(a);
        sigma2.push(b);
    }
    SpinChainPair { sigma1, sigma2 }
}

/// Inverse of [`polymer_to_spins`].
pub fn spins_to_polymer(pair: &SpinChainPair) -> Result<Polymer, ModelError> {
    if pair.sigma1.len() != pair.sigma2.len() || pair.sigma1.is_empty() {
        return Err(ModelError::ChainLengthMismatch(
            pair.sigma1.len(),
            pair.sigma2.len(),
        ));
    }
    let mut steps = Vec::with_capacity(pair.sigma1.len());
    for (i, (&a, &b)) in pair.sigma1.iter().zip(&pair.sigma2).enumerate() {
        if a.abs() != 1 {
            return Err(ModelError::InvalidSpin(a, i));
        }
        if b.abs() != 1 {
            return Err(ModelError::InvalidSpin(b, i));
        }
        steps.push(Step::from_signs(a, b));
    }
    Ok(Polymer { steps })
}

/// The plane rotation sending `(1,0)` to `(1/sqrt2, 1/sqrt2)`. Exposed for
/// path post-processing; exact integer identities should go through
/// [`Step::signs`] instead.
pub fn rotate_to_chain_frame(x: f64, y: f64) -> (f64, f64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ((x - y) * s, (x + y) * s)
}
