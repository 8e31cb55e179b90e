//! End-to-end protocol execution.
//!
//! The engine prepares the joint input-plus-resource state, applies the
//! sender unitary, enumerates or samples measurement outcomes, applies the
//! matching recovery, and scores every branch against the protocol target.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::state::{ResourceMatrix, StateVector, MAX_AMPLITUDES};
use crate::synthesis::{synthesize, PhaseTensor, ProtocolUnitary, RecoveryFamily};
use crate::tensor::ComplexVector;

/// Probabilities below this are treated as exactly zero: the branch cannot
/// be observed and carries no conditional state.
pub const ZERO_PROBABILITY: f64 = 1e-15;

/// Joint amplitude vector of input tensor resource, flattened with the input
/// index slowest and the receiver index fastest.
pub fn prepare_joint(psi0: &StateVector, resource: &ResourceMatrix) -> Result<ComplexVector> {
    let n1 = psi0.dim();
    let n2 = resource.dim_sender();
    let n3 = resource.dim_receiver();
    let total = n1
        .checked_mul(n2)
        .and_then(|v| v.checked_mul(n3))
        .ok_or(Error::SizeLimit(usize::MAX, MAX_AMPLITUDES))?;
    if total > MAX_AMPLITUDES {
        return Err(Error::SizeLimit(total, MAX_AMPLITUDES));
    }
    let mut joint = ComplexVector::zeros(total);
    for x in 0..n1 {
        let alpha = psi0.amplitude(x);
        if alpha.norm_sqr() == 0.0 {
            continue;
        }
        for j in 0..n2 {
            for q in 0..n3 {
                joint.set((x * n2 + j) * n3 + q, alpha * resource.coefficient(j, q));
            }
        }
    }
    Ok(joint)
}

/// Applies the sender unitary to the first two factors, leaving the receiver
/// factor untouched.
pub fn apply_sender_unitary(
    joint: &ComplexVector,
    unitary: &ProtocolUnitary,
    n3: usize,
) -> Result<ComplexVector> {
    let d = unitary.n1() * unitary.n2();
    if joint.dim() != d * n3 {
        return Err(Error::Dimension(format!(
            "joint state has {} amplitudes, expected {}",
            joint.dim(),
            d * n3
        )));
    }
    let m = unitary.matrix();
    let mut out = ComplexVector::zeros(joint.dim());
    for col in 0..d {
        for q in 0..n3 {
            let amp = joint.get(col * n3 + q);
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            for row in 0..d {
                let v = m.get(row, col);
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                let cur = out.get(row * n3 + q);
                out.set(row * n3 + q, cur + v * amp);
            }
        }
    }
    Ok(out)
}

/// One joint measurement result on the sender side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    /// First-system label, 1-based.
    pub i: usize,
    /// Second-system label, 1-based.
    pub k: usize,
    /// Born probability of this outcome.
    pub probability: f64,
}

/// Born probability and normalized receiver state for outcome (i, k).
/// Returns `None` for the state when the branch has zero probability.
pub fn collapse_branch(
    state: &ComplexVector,
    n1: usize,
    n2: usize,
    n3: usize,
    i: usize,
    k: usize,
) -> Result<(f64, Option<ComplexVector>)> {
    if state.dim() != n1 * n2 * n3 {
        return Err(Error::Dimension(format!(
            "state has {} amplitudes, expected {}",
            state.dim(),
            n1 * n2 * n3
        )));
    }
    if i == 0 || i > n1 || k == 0 || k > n2 {
        return Err(Error::IndexRange(format!(
            "outcome ({i}, {k}) outside ({n1}, {n2})"
        )));
    }
    let base = ((i - 1) * n2 + (k - 1)) * n3;
    let mut p = 0.0;
    for q in 0..n3 {
        p += state.get(base + q).norm_sqr();
    }
    if p < ZERO_PROBABILITY {
        return Ok((p, None));
    }
    let scale = Complex64::new(1.0 / p.sqrt(), 0.0);
    let mut collapsed = ComplexVector::zeros(n3);
    for q in 0..n3 {
        collapsed.set(q, state.get(base + q) * scale);
    }
    Ok((p, Some(collapsed)))
}

/// Samples one outcome by inverse transform over the lexicographic (i, k)
/// order and returns it with the collapsed receiver state.
pub fn measure_alice<R: Rng>(
    state: &ComplexVector,
    n1: usize,
    n2: usize,
    n3: usize,
    rng: &mut R,
) -> Result<(MeasurementOutcome, ComplexVector)> {
    if state.dim() != n1 * n2 * n3 {
        return Err(Error::Dimension(format!(
            "state has {} amplitudes, expected {}",
            state.dim(),
            n1 * n2 * n3
        )));
    }
    let draw: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last_live: Option<(usize, usize, f64)> = None;
    for i in 1..=n1 {
        for k in 1..=n2 {
            let (p, _) = collapse_branch(state, n1, n2, n3, i, k)?;
            if p < ZERO_PROBABILITY {
                continue;
            }
            cumulative += p;
            last_live = Some((i, k, p));
            if draw < cumulative {
                let (_, collapsed) = collapse_branch(state, n1, n2, n3, i, k)?;
                return Ok((
                    MeasurementOutcome { i, k, probability: p },
                    collapsed.expect("live branch has a state"),
                ));
            }
        }
    }
    // Rounding can leave the cumulative sum a hair under the draw; fall back
    // to the last branch that can occur at all.
    if let Some((i, k, p)) = last_live {
        let (_, collapsed) = collapse_branch(state, n1, n2, n3, i, k)?;
        return Ok((
            MeasurementOutcome { i, k, probability: p },
            collapsed.expect("live branch has a state"),
        ));
    }
    Err(Error::DegenerateState)
}

/// Applies the recovery operator for outcome (i, k) to a receiver state.
pub fn recover(
    state: &ComplexVector,
    family: &RecoveryFamily,
    i: usize,
    k: usize,
) -> Result<ComplexVector> {
    family.operator(i, k)?.matvec(state)
}

/// Squared overlap of two unit vectors.
pub fn fidelity(a: &ComplexVector, b: &ComplexVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "cannot overlap dim {} with dim {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.inner(b).norm_sqr())
}

/// How a protocol run traverses the outcome space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Every outcome (i, k) exactly once, in lexicographic order.
    Exhaustive,
    /// `count` independent measurement draws from the given seed.
    Sampled { count: usize, seed: u64 },
}

/// Outcome, weight and score of a single protocol branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRecord {
    pub i: usize,
    pub k: usize,
    pub probability: f64,
    pub fidelity: f64,
}

/// Result of a full protocol run.
#[derive(Debug, Clone)]
pub struct TeleportReport {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    /// The state every branch must reconstruct on the receiver.
    pub target: StateVector,
    pub branches: Vec<BranchRecord>,
    pub min_fidelity: f64,
    /// Probability-weighted in exhaustive mode, empirical in sampled mode.
    pub mean_fidelity: f64,
}

/// Runs the protocol with already-synthesized machinery.
///
/// Branches that cannot occur are recorded with their raw probability and,
/// by convention, unit fidelity: an unreachable branch transmits nothing and
/// therefore distorts nothing.
pub fn run_with(
    psi0: &StateVector,
    resource: &ResourceMatrix,
    unitary: &ProtocolUnitary,
    family: &RecoveryFamily,
    mode: RunMode,
) -> Result<TeleportReport> {
    let n1 = unitary.n1();
    let n2 = unitary.n2();
    let n3 = resource.dim_receiver();
    if psi0.dim() != n1 {
        return Err(Error::Dimension(format!(
            "input dim {} does not match protocol dim {n1}",
            psi0.dim()
        )));
    }
    if resource.dim_sender() != n2 || family.n1() != n1 || family.n2() != n2 || family.n3() != n3 {
        return Err(Error::Dimension(
            "resource, unitary and recovery family dimensions disagree".into(),
        ));
    }

    let target = family.target_state(psi0)?;
    let joint = prepare_joint(psi0, resource)?;
    let post = apply_sender_unitary(&joint, unitary, n3)?;

    let mut branches = Vec::new();
    match mode {
        RunMode::Exhaustive => {
            for i in 1..=n1 {
                for k in 1..=n2 {
                    let (p, collapsed) = collapse_branch(&post, n1, n2, n3, i, k)?;
                    let f = match collapsed {
                        Some(state) => fidelity(&recover(&state, family, i, k)?, target.vector())?,
                        None => 1.0,
                    };
                    branches.push(BranchRecord {
                        i,
                        k,
                        probability: p,
                        fidelity: f,
                    });
                }
            }
        }
        RunMode::Sampled { count, seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            for _ in 0..count {
                let (outcome, collapsed) = measure_alice(&post, n1, n2, n3, &mut rng)?;
                let recovered = recover(&collapsed, family, outcome.i, outcome.k)?;
                branches.push(BranchRecord {
                    i: outcome.i,
                    k: outcome.k,
                    probability: outcome.probability,
                    fidelity: fidelity(&recovered, target.vector())?,
                });
            }
        }
    }

    let min_fidelity = branches.iter().map(|b| b.fidelity).fold(f64::INFINITY, f64::min);
    let mean_fidelity = match mode {
        RunMode::Exhaustive => branches.iter().map(|b| b.probability * b.fidelity).sum(),
        RunMode::Sampled { .. } => {
            if branches.is_empty() {
                f64::NAN
            } else {
                branches.iter().map(|b| b.fidelity).sum::<f64>() / branches.len() as f64
            }
        }
    };
    let min_fidelity = if branches.is_empty() { f64::NAN } else { min_fidelity };

    Ok(TeleportReport {
        n1,
        n2,
        n3,
        target,
        branches,
        min_fidelity,
        mean_fidelity,
    })
}

/// Synthesizes the protocol for the resource and runs it.
pub fn run_protocol(
    psi0: &StateVector,
    resource: &ResourceMatrix,
    phases: &PhaseTensor,
    mode: RunMode,
) -> Result<TeleportReport> {
    let (unitary, family) = synthesize(resource, psi0.dim(), phases)?;
    run_with(psi0, resource, &unitary, &family, mode)
}
