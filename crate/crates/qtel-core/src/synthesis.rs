//! Protocol synthesis.
//!
//! Given an entanglement resource whose Schmidt spectrum is flat over exactly
//! n1 levels, this module builds the sender-side unitary and the matching
//! family of receiver corrections. The construction works in a rotated frame
//! in which the resource is diagonal: the closed-form pattern fills the
//! constrained entries of the unitary, the sender-side Schmidt factor is
//! folded into the returned unitary, and the receiver-side factor becomes the
//! correction frame of the recovery family.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{ResourceMatrix, StateVector};
use crate::tensor::{
    complete_to_unitary, cyclic_shift_power, index_mod, schmidt, ComplexMatrix, ComplexVector,
};

const UNITARY_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-8;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// exp(2 pi i numerator / n) with exact values at the cardinal angles.
fn root_of_unity(numerator: i64, n: usize) -> Complex64 {
    let r = index_mod(numerator + 1, n) as i64 - 1;
    let n_i = n as i64;
    if r == 0 {
        return one();
    }
    if 2 * r == n_i {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * r == n_i {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * r == 3 * n_i {
        return Complex64::new(0.0, -1.0);
    }
    let angle = 2.0 * std::f64::consts::PI * (r as f64) / (n as f64);
    Complex64::new(angle.cos(), angle.sin())
}

/// Unimodular phase coefficients c(i, j, k), i and j in 1..=n1, k in 1..=n2.
///
/// Beyond unimodularity, every fixed-k slice must have columns orthogonal
/// under the n1-scaled Gram condition; that is exactly what makes the
/// synthesized sender unitary unitary, so it is enforced at construction.
#[derive(Debug, Clone)]
pub struct PhaseTensor {
    n1: usize,
    n2: usize,
    values: Vec<Complex64>,
}

impl PhaseTensor {
    pub fn new(n1: usize, n2: usize, values: Vec<Complex64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Dimension("phase tensor dimensions must be positive".into()));
        }
        if values.len() != n1 * n1 * n2 {
            return Err(Error::Dimension(format!(
                "expected {} phase entries, got {}",
                n1 * n1 * n2,
                values.len()
            )));
        }
        let tensor = Self { n1, n2, values };
        for v in &tensor.values {
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "phase entry {v} is not unimodular"
                )));
            }
        }
        for k in 1..=n2 {
            for j in 1..=n1 {
                for jp in 1..=n1 {
                    let mut acc = zero();
                    for s in 1..=n1 {
                        acc += tensor.raw(s, j, k).conj() * tensor.raw(s, jp, k);
                    }
                    let expected = if j == jp { n1 as f64 } else { 0.0 };
                    if (acc - Complex64::new(expected, 0.0)).norm() > 1e-10 * n1 as f64 {
                        return Err(Error::Validation(format!(
                            "slice {k} columns {j} and {jp} are not orthogonal"
                        )));
                    }
                }
            }
        }
        Ok(tensor)
    }

    /// Discrete Fourier phases exp(2 pi i (i-1)(j-1) / n1), independent of k.
    /// At n1 = 2 this reduces to the familiar sign pattern with -1 exactly on
    /// the (2, 2, k) entries.
    pub fn fourier(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Dimension("phase tensor dimensions must be positive".into()));
        }
        let mut values = vec![zero(); n1 * n1 * n2];
        for i in 1..=n1 {
            for j in 1..=n1 {
                let w = root_of_unity(((i - 1) * (j - 1)) as i64, n1);
                for k in 1..=n2 {
                    values[((i - 1) * n1 + (j - 1)) * n2 + (k - 1)] = w;
                }
            }
        }
        Self::new(n1, n2, values)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    fn raw(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[((i - 1) * self.n1 + (j - 1)) * self.n2 + (k - 1)]
    }

    /// 1-based lookup.
    pub fn value(&self, i: usize, j: usize, k: usize) -> Result<Complex64> {
        if i == 0 || i > self.n1 || j == 0 || j > self.n1 || k == 0 || k > self.n2 {
            return Err(Error::IndexRange(format!(
                "phase index ({i}, {j}, {k}) outside ({}, {}, {})",
                self.n1, self.n1, self.n2
            )));
        }
        Ok(self.raw(i, j, k))
    }
}

/// Verdict on whether a resource can carry a dimension-n1 input exactly.
#[derive(Debug, Clone)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// Full Schmidt spectrum, descending.
    pub lambdas: Vec<f64>,
    /// The input dimension the verdict was computed for.
    pub required: usize,
}

/// A resource is usable exactly when its Schmidt spectrum has exactly n1
/// nonzero weights, all equal to 1/n1.
pub fn feasibility(resource: &ResourceMatrix, n1: usize) -> Result<FeasibilityVerdict> {
    if n1 == 0 {
        return Err(Error::Dimension("input dimension must be positive".into()));
    }
    let dec = schmidt(resource.matrix())?;
    let lambdas = dec.lambdas.clone();
    let nonzero = lambdas.iter().filter(|&&l| l > SPECTRUM_TOL).count();
    let flat = nonzero == n1
        && lambdas
            .iter()
            .take(n1)
            .all(|&l| (l - 1.0 / n1 as f64).abs() <= SPECTRUM_TOL);
    Ok(FeasibilityVerdict {
        feasible: flat,
        lambdas,
        required: n1,
    })
}

/// The sender-side unitary on the n1 * n2 dimensional joint space.
#[derive(Debug, Clone)]
pub struct ProtocolUnitary {
    n1: usize,
    n2: usize,
    matrix: ComplexMatrix,
}

impl ProtocolUnitary {
    pub fn new(n1: usize, n2: usize, matrix: ComplexMatrix) -> Result<Self> {
        let d = n1 * n2;
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::Dimension(format!(
                "expected a {d}x{d} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.unitarity_defect()?;
        if defect > UNITARY_TOL {
            return Err(Error::Validation(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        Ok(Self { n1, n2, matrix })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Coefficient of output e_s tensor f_t in the image of input
    /// e_i tensor f_j. All four labels are 1-based.
    pub fn b(&self, i: usize, j: usize, s: usize, t: usize) -> Result<Complex64> {
        if i == 0 || i > self.n1 || s == 0 || s > self.n1 {
            return Err(Error::IndexRange(format!(
                "first-system label outside 1..={}",
                self.n1
            )));
        }
        if j == 0 || j > self.n2 || t == 0 || t > self.n2 {
            return Err(Error::IndexRange(format!(
                "second-system label outside 1..={}",
                self.n2
            )));
        }
        Ok(self
            .matrix
            .get((s - 1) * self.n2 + (t - 1), (i - 1) * self.n2 + (j - 1)))
    }
}

/// Receiver-side corrections, one unitary per measurement outcome (i, k).
#[derive(Debug, Clone)]
pub struct RecoveryFamily {
    n1: usize,
    n2: usize,
    n3: usize,
    receiver_correction: ComplexMatrix,
    ops: Vec<ComplexMatrix>,
}

impl RecoveryFamily {
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    /// The receiver frame: its first n1 columns carry the teleported levels.
    /// Identity whenever the resource is already diagonal in the
    /// computational bases.
    pub fn receiver_correction(&self) -> &ComplexMatrix {
        &self.receiver_correction
    }

    /// Correction unitary for outcome (i, k), 1-based.
    pub fn operator(&self, i: usize, k: usize) -> Result<&ComplexMatrix> {
        if i == 0 || i > self.n1 {
            return Err(Error::IndexRange(format!(
                "outcome label i={i} outside 1..={}",
                self.n1
            )));
        }
        if k == 0 || k > self.n2 {
            return Err(Error::IndexRange(format!(
                "outcome label k={k} outside 1..={}",
                self.n2
            )));
        }
        Ok(&self.ops[(i - 1) * self.n2 + (k - 1)])
    }

    /// The image of a dimension-n1 input in the receiver space: level s of
    /// the input rides on column s of the receiver frame. Every branch of a
    /// feasible protocol reconstructs exactly this state.
    pub fn target_state(&self, psi0: &StateVector) -> Result<StateVector> {
        if psi0.dim() != self.n1 {
            return Err(Error::Dimension(format!(
                "input has dim {}, protocol carries dim {}",
                psi0.dim(),
                self.n1
            )));
        }
        let mut out = ComplexVector::zeros(self.n3);
        for s in 0..self.n1 {
            let amp = psi0.amplitude(s);
            for r in 0..self.n3 {
                let v = out.get(r) + amp * self.receiver_correction.get(r, s);
                out.set(r, v);
            }
        }
        StateVector::new(out)
    }
}

/// Deterministic spectral frames of a resource.
///
/// Returns the sender support frame (n2 x n1), the receiver frame (n3 x n1)
/// and the singular value carried by each support slot. Degenerate spectral
/// clusters are canonicalized through their spectral projector, which does
/// not depend on the arbitrary basis a singular value decomposition picks
/// inside a cluster, so equal resources always produce identical frames.
struct SpectralFrames {
    sender: Vec<ComplexVector>,
    receiver: Vec<ComplexVector>,
}

fn spectral_frames(resource: &ResourceMatrix, n1: usize) -> Result<SpectralFrames> {
    let a = resource.matrix();
    let n2 = a.rows();
    let dec = schmidt(a)?;

    // Cluster the spectrum, then pick the canonical basis of each cluster by
    // orthogonalizing the columns of its spectral projector.
    let mut sender: Vec<ComplexVector> = Vec::with_capacity(n1);
    let mut sigmas: Vec<f64> = Vec::with_capacity(n1);
    let mut idx = 0;
    while sender.len() < n1 && idx < dec.lambdas.len() {
        let mut cluster_end = idx + 1;
        while cluster_end < dec.lambdas.len()
            && (dec.lambdas[idx] - dec.lambdas[cluster_end]).abs() <= SPECTRUM_TOL
        {
            cluster_end += 1;
        }
        let lambda = dec.lambdas[idx];
        if lambda <= 1e-12 {
            break;
        }
        let cluster: Vec<usize> = (idx..cluster_end).collect();

        let mut projector = ComplexMatrix::zeros(n2, n2);
        for &j in &cluster {
            let u = dec.left_basis.column(j);
            for r in 0..n2 {
                for c in 0..n2 {
                    let v = projector.get(r, c) + u.get(r) * u.get(c).conj();
                    projector.set(r, c, v);
                }
            }
        }

        let basis = orthogonalize_projector_columns(&projector, cluster.len())?;
        for v in basis {
            if sender.len() == n1 {
                break;
            }
            sender.push(v);
            sigmas.push(lambda.sqrt());
        }
        idx = cluster_end;
    }

    if sender.len() < n1 {
        return Err(Error::Degenerate(format!(
            "resource rank {} is below the required dimension {n1}",
            sender.len()
        )));
    }

    // Receiver columns r_s = a† l_s / sigma_s are orthonormal because the
    // sender columns are eigenvectors of a a†.
    let a_adj = a.adjoint();
    let mut receiver = Vec::with_capacity(n1);
    for (l, sigma) in sender.iter().zip(&sigmas) {
        let r = a_adj.matvec(l)?.scale(Complex64::new(1.0 / sigma, 0.0));
        receiver.push(r);
    }

    Ok(SpectralFrames { sender, receiver })
}

/// Gram-Schmidt over the columns of a spectral projector, picking the
/// largest-residual column at every step (lowest index on ties).
fn orthogonalize_projector_columns(
    projector: &ComplexMatrix,
    count: usize,
) -> Result<Vec<ComplexVector>> {
    let n = projector.rows();
    let mut kept: Vec<ComplexVector> = Vec::with_capacity(count);
    while kept.len() < count {
        let mut best: Option<(f64, ComplexVector)> = None;
        for j in 0..n {
            let mut cand = projector.column(j);
            for u in &kept {
                let overlap = u.inner(&cand);
                cand = cand.sub(&u.scale(overlap));
            }
            let norm = cand.norm();
            if best.as_ref().map_or(true, |(b, _)| norm > *b) {
                best = Some((norm, cand));
            }
        }
        let (norm, v) = best.ok_or_else(|| Error::Degenerate("empty projector".into()))?;
        if norm < 1e-8 {
            return Err(Error::Degenerate(
                "spectral projector rank below its cluster size".into(),
            ));
        }
        kept.push(v.scale(Complex64::new(1.0 / norm, 0.0)));
    }
    Ok(kept)
}

fn build_protocol(
    resource: &ResourceMatrix,
    phases: &PhaseTensor,
    n1: usize,
) -> Result<(ProtocolUnitary, RecoveryFamily)> {
    let n2 = resource.dim_sender();
    let n3 = resource.dim_receiver();
    if phases.n1() != n1 || phases.n2() != n2 {
        return Err(Error::Dimension(format!(
            "phase tensor is ({}, {}, {}), protocol needs ({n1}, {n1}, {n2})",
            phases.n1(),
            phases.n1(),
            phases.n2()
        )));
    }
    if n1 > n2 {
        return Err(Error::Dimension(format!(
            "sender side has {n2} levels, cannot carry a dim-{n1} input"
        )));
    }

    let frames = spectral_frames(resource, n1)?;
    let sender_frame = complete_to_unitary(&frames.sender, n2)?;
    let receiver_cols: Vec<ComplexVector> = frames
        .receiver
        .iter()
        .map(|v| ComplexVector::from_vec(v.as_slice().iter().map(|z| z.conj()).collect()))
        .collect();
    let receiver_frame = complete_to_unitary(&receiver_cols, n3)?;

    // Canonical-frame sender unitary: on inputs whose second label lies in
    // the support block, the closed-form pattern sends (x, j) to the
    // t = j - x + 1 (mod n1) output slice with phase column x; inputs outside
    // the support block pass through untouched.
    let d = n1 * n2;
    let mut canonical = ComplexMatrix::zeros(d, d);
    let scale = 1.0 / (n1 as f64).sqrt();
    for x in 1..=n1 {
        for j in 1..=n2 {
            let col = (x - 1) * n2 + (j - 1);
            if j <= n1 {
                let t = index_mod(j as i64 - x as i64 + 1, n1);
                for s in 1..=n1 {
                    let row = (s - 1) * n2 + (t - 1);
                    let v = phases.value(s, x, t)? * scale;
                    canonical.set(row, col, v);
                }
            } else {
                canonical.set(col, col, one());
            }
        }
    }

    // Fold the sender frame in: the full unitary first rotates the sender
    // half of the resource to its canonical diagonal, then applies the
    // pattern.
    let rotate = ComplexMatrix::identity(n1).tensor(&sender_frame.adjoint());
    let full = canonical.mul(&rotate)?;
    let unitary = ProtocolUnitary::new(n1, n2, full)?;

    // Recovery for outcome (i, k): inside the receiver frame, shift the
    // cyclic offset k-1 back and strip the phase column, acting on the
    // carried block only.
    let w_adj = receiver_frame.adjoint();
    let mut ops = Vec::with_capacity(n1 * n2);
    for i in 1..=n1 {
        for k in 1..=n2 {
            if k <= n1 {
                let mut block = ComplexMatrix::identity(n3);
                for col in 1..=n1 {
                    for row in 1..=n1 {
                        block.set(row - 1, col - 1, zero());
                    }
                }
                let shift = cyclic_shift_power(n1, 1 - k as i64);
                for col in 1..=n1 {
                    let row = index_mod(col as i64 + 1 - k as i64, n1);
                    debug_assert!((shift.get(row - 1, col - 1) - one()).norm() < 1e-15);
                    block.set(row - 1, col - 1, phases.value(i, row, k)?.conj());
                }
                let op = receiver_frame.mul(&block)?.mul(&w_adj)?;
                ops.push(op);
            } else {
                // Outcomes beyond the support block never occur; the recovery
                // there is trivial.
                ops.push(ComplexMatrix::identity(n3));
            }
        }
    }

    let family = RecoveryFamily {
        n1,
        n2,
        n3,
        receiver_correction: receiver_frame,
        ops,
    };
    Ok((unitary, family))
}

/// Synthesizes the sender unitary and recovery family for a feasible
/// resource. Infeasible resources are rejected with their Schmidt spectrum.
pub fn synthesize(
    resource: &ResourceMatrix,
    n1: usize,
    phases: &PhaseTensor,
) -> Result<(ProtocolUnitary, RecoveryFamily)> {
    let verdict = feasibility(resource, n1)?;
    if !verdict.feasible {
        return Err(Error::Infeasible {
            n1,
            spectrum: verdict.lambdas,
        });
    }
    build_protocol(resource, phases, n1)
}

/// Runs the same construction without the spectrum gate.
///
/// The pattern is applied on the top n1 spectral directions whatever their
/// weights, which is exactly what one needs to demonstrate that an
/// unbalanced resource cannot reach unit fidelity. The resource must still
/// have rank at least n1.
pub fn synthesize_forced(
    resource: &ResourceMatrix,
    n1: usize,
    phases: &PhaseTensor,
) -> Result<(ProtocolUnitary, RecoveryFamily)> {
    build_protocol(resource, phases, n1)
}

/// Largest deviation from the exact-transfer condition, evaluated in the
/// rotated frame in which the resource is diagonal.
///
/// For every output pair (s, t) and receiver level q within the carried
/// block, the joint amplitude produced by `unitary` from `psi0` and
/// `resource` is compared against the phase-twisted input amplitude the
/// condition demands; levels outside the carried block must produce nothing.
/// Feasible synthesized protocols sit at numerical zero; generic unitaries
/// do not.
pub fn condition_residual(
    unitary: &ProtocolUnitary,
    resource: &ResourceMatrix,
    phases: &PhaseTensor,
    psi0: &StateVector,
) -> Result<f64> {
    let n1 = unitary.n1();
    let n2 = unitary.n2();
    let n3 = resource.dim_receiver();
    if resource.dim_sender() != n2 {
        return Err(Error::Dimension(format!(
            "resource sender dim {} does not match unitary block {}",
            resource.dim_sender(),
            n2
        )));
    }
    if psi0.dim() != n1 {
        return Err(Error::Dimension(format!(
            "input dim {} does not match unitary block {}",
            psi0.dim(),
            n1
        )));
    }
    if phases.n1() != n1 || phases.n2() != n2 {
        return Err(Error::Dimension("phase tensor dims do not match".into()));
    }

    let frames = spectral_frames(resource, n1)?;
    let sender_frame = complete_to_unitary(&frames.sender, n2)?;
    let receiver_cols: Vec<ComplexVector> = frames
        .receiver
        .iter()
        .map(|v| ComplexVector::from_vec(v.as_slice().iter().map(|z| z.conj()).collect()))
        .collect();
    let receiver_frame = complete_to_unitary(&receiver_cols, n3)?;

    // Rotated resource coefficients: diagonal sigma on the carried block.
    let rotated_a = sender_frame
        .adjoint()
        .mul(resource.matrix())?
        .mul(&ComplexMatrix::from_fn(n3, n3, |r, c| {
            receiver_frame.get(r, c).conj()
        }))?;

    // Rotated unitary coefficients.
    let rotate = ComplexMatrix::identity(n1).tensor(&sender_frame);
    let b_rot = unitary.matrix().mul(&rotate)?;
    let b = |x: usize, j: usize, s: usize, t: usize| {
        b_rot.get((s - 1) * n2 + (t - 1), (x - 1) * n2 + (j - 1))
    };

    let norm = 1.0 / ((n1 * n2) as f64).sqrt();
    let mut residual = 0.0_f64;
    for s in 1..=n1 {
        for t in 1..=n2 {
            for k in 1..=n3 {
                let mut lhs = zero();
                for j in 1..=n2 {
                    let aj = rotated_a.get(j - 1, k - 1);
                    if aj.norm_sqr() == 0.0 {
                        continue;
                    }
                    for x in 1..=n1 {
                        lhs += psi0.amplitude(x - 1) * aj * b(x, j, s, t);
                    }
                }
                let rhs = if k <= n1 && t <= n1 {
                    let m = index_mod(k as i64 - t as i64 + 1, n1);
                    psi0.amplitude(m - 1) * phases.value(s, m, t)? * norm
                } else {
                    zero()
                };
                residual = residual.max((lhs - rhs).norm());
            }
        }
    }
    Ok(residual)
}
