//! Input states and entanglement resources.
//!
//! A resource is stored as the coefficient matrix of a bipartite state: entry
//! (j, k) is the amplitude on sender level j and receiver level k. All
//! factories produce unit-norm objects; the wrapping types re-validate on
//! construction so downstream code can rely on normalization.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, ComplexVector};

/// Joint amplitude budget shared with the engine; see `prepare_joint`.
pub const MAX_AMPLITUDES: usize = 1 << 20;

const NORM_TOL: f64 = 1e-10;

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: ComplexVector,
}

impl StateVector {
    /// Wraps an amplitude vector, enforcing unit norm within 1e-10.
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        if amplitudes.dim() == 0 {
            return Err(Error::Dimension("state needs at least one amplitude".into()));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() {
            return Err(Error::Validation("state contains non-finite amplitudes".into()));
        }
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis vector with 1-based label `i`.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i == 0 || i > dim {
            return Err(Error::IndexRange(format!(
                "basis label {i} outside 1..={dim}"
            )));
        }
        let mut v = ComplexVector::zeros(dim);
        v.set(i - 1, Complex64::new(1.0, 0.0));
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.dim()
    }

    pub fn amplitude(&self, i: usize) -> Complex64 {
        self.amplitudes.get(i)
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// Probability weight outside the given set of 1-based levels.
    pub fn weight_outside(&self, levels: &[usize]) -> f64 {
        (0..self.dim())
            .filter(|idx| !levels.contains(&(idx + 1)))
            .map(|idx| self.amplitudes.get(idx).norm_sqr())
            .sum()
    }
}

/// Coefficient matrix of a bipartite entanglement resource.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceMatrix {
    coefficients: ComplexMatrix,
}

impl ResourceMatrix {
    pub fn dim_sender(&self) -> usize {
        self.coefficients.rows()
    }

    pub fn dim_receiver(&self) -> usize {
        self.coefficients.cols()
    }

    pub fn coefficient(&self, j: usize, k: usize) -> Complex64 {
        self.coefficients.get(j, k)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.coefficients
    }
}

/// An order-preserving map from sender support levels into receiver levels.
/// Entry s (1-based logical label) names the 1-based receiver level that
/// carries it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportInjection {
    targets: Vec<usize>,
}

impl SupportInjection {
    pub fn new(targets: Vec<usize>, dim_receiver: usize) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Validation("injection needs at least one target".into()));
        }
        for (s, &t) in targets.iter().enumerate() {
            if t == 0 || t > dim_receiver {
                return Err(Error::IndexRange(format!(
                    "injection target {t} for level {} outside 1..={dim_receiver}",
                    s + 1
                )));
            }
        }
        let mut seen = targets.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != targets.len() {
            return Err(Error::Validation(
                "injection targets must be distinct".into(),
            ));
        }
        Ok(Self { targets })
    }

    pub fn domain(&self) -> usize {
        self.targets.len()
    }

    /// 1-based image of 1-based level `s`.
    pub fn target(&self, s: usize) -> usize {
        self.targets[s - 1]
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }
}

/// Haar-like random state: independent complex Gaussian amplitudes,
/// normalized. The same seed always yields the same state.
pub fn random_state(dim: usize, seed: u64) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::Dimension("state needs at least one amplitude".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    loop {
        let mut v = ComplexVector::zeros(dim);
        for i in 0..dim {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            v.set(i, Complex64::new(re, im));
        }
        let norm = v.norm();
        // A resample on an astronomically unlikely near-zero draw keeps the
        // output well conditioned for every seed.
        if norm > 1e-6 {
            return StateVector::new(v.scale(Complex64::new(1.0 / norm, 0.0)));
        }
    }
}

/// Diagonal resource with equal weights: coefficient delta(j, k) / sqrt(n).
pub fn maximally_entangled_resource(n: usize) -> Result<ResourceMatrix> {
    if n == 0 {
        return Err(Error::Dimension("resource needs at least one level".into()));
    }
    let w = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, w);
    }
    Ok(ResourceMatrix { coefficients: m })
}

/// Product of `m` balanced two-level pairs, with the first factor of every
/// pair on the sender side. Composite indices follow the tensor convention,
/// so the result coincides with the diagonal resource on 2^m levels.
pub fn epr_product_resource(m: usize) -> Result<ResourceMatrix> {
    if m == 0 {
        return Err(Error::Dimension("need at least one pair".into()));
    }
    if m > 10 {
        return Err(Error::SizeLimit(1 << (2 * m), MAX_AMPLITUDES));
    }
    let w = Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    let mut pair = ComplexMatrix::zeros(2, 2);
    pair.set(0, 0, w);
    pair.set(1, 1, w);

    let mut acc = pair.clone();
    for _ in 1..m {
        acc = acc.tensor(&pair);
    }
    Ok(ResourceMatrix { coefficients: acc })
}

/// Balanced resource supported on an injected image: coefficient
/// 1/sqrt(n1) at (s, injection(s)) and zero elsewhere.
pub fn injection_resource(
    n1: usize,
    n3: usize,
    injection: &SupportInjection,
) -> Result<ResourceMatrix> {
    if injection.domain() != n1 {
        return Err(Error::Dimension(format!(
            "injection covers {} levels, expected {n1}",
            injection.domain()
        )));
    }
    for s in 1..=n1 {
        if injection.target(s) > n3 {
            return Err(Error::IndexRange(format!(
                "injection target {} outside 1..={n3}",
                injection.target(s)
            )));
        }
    }
    let w = Complex64::new(1.0 / (n1 as f64).sqrt(), 0.0);
    let mut m = ComplexMatrix::zeros(n1, n3);
    for s in 1..=n1 {
        m.set(s - 1, injection.target(s) - 1, w);
    }
    Ok(ResourceMatrix { coefficients: m })
}

/// Wraps an explicit coefficient matrix, enforcing unit Frobenius norm.
pub fn resource_from_matrix(coefficients: ComplexMatrix) -> Result<ResourceMatrix> {
    let norm = coefficients.frobenius_norm();
    if !norm.is_finite() {
        return Err(Error::Validation(
            "resource contains non-finite coefficients".into(),
        ));
    }
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Validation(format!(
            "resource Frobenius norm is {norm}, expected 1"
        )));
    }
    Ok(ResourceMatrix { coefficients })
}
