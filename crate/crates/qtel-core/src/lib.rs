//! Exact teleportation of finite dimensional quantum states.
//!
//! The crate synthesizes, for any entanglement resource whose Schmidt
//! spectrum is flat over the carried dimension, the sender-side unitary and
//! the family of receiver corrections that transfer an unknown state with
//! unit fidelity on every measurement branch, then simulates the full
//! protocol: joint-state preparation, sender measurement, classical frame
//! transfer and receiver recovery.
//!
//! - [`tensor`]: dense complex vectors and matrices, Schmidt decomposition,
//!   cyclic shifts.
//! - [`state`]: validated state vectors and resource constructors.
//! - [`synthesis`]: feasibility, phase tensors, the sender unitary and the
//!   recovery family.
//! - [`engine`]: exhaustive and sampled protocol runs.
//! - [`channel`]: the classical outcome frame and its transports.

pub mod channel;
pub mod engine;
pub mod error;
pub mod state;
pub mod synthesis;
pub mod tensor;

pub use channel::{crc32, run_session, OutcomeFrame, SessionResult, Transport, FRAME_LEN};
pub use engine::{
    apply_sender_unitary, collapse_branch, fidelity, measure_alice, prepare_joint, recover,
    run_protocol, run_with, BranchRecord, MeasurementOutcome, RunMode, TeleportReport,
};
pub use error::{Error, Result};
pub use state::{
    epr_product_resource, injection_resource, maximally_entangled_resource, random_state,
    resource_from_matrix, ResourceMatrix, StateVector, SupportInjection, MAX_AMPLITUDES,
};
pub use synthesis::{
    condition_residual, feasibility, synthesize, synthesize_forced, FeasibilityVerdict,
    PhaseTensor, ProtocolUnitary, RecoveryFamily,
};
pub use tensor::{
    complete_to_unitary, cyclic_shift_power, index_mod, is_unitary, schmidt, ComplexMatrix,
    ComplexVector, SchmidtResult,
};

/// Re-export of the complex scalar type used throughout.
pub use num_complex::Complex64;
