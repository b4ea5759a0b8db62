//! Dense complex linear algebra for small qubit systems.
//!
//! Everything here is sized for formulas whose widest gate has at most six
//! inputs, so matrices never exceed 64×64. Qubit 0 is always the most
//! significant tensor factor.

mod channel;
mod eigen;
mod mat;
mod state;

use thiserror::Error;

pub use channel::Channel;
pub use eigen::{eigendecomposition_2x2, hermitian_eigenvalues, principal_eigenpair_2x2, trace_norm};
pub use mat::{Cx, Mat};
pub use state::{is_classical_state, orthogonal_pure_pair_basis, trace_distance, DensityMatrix, Tolerances};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("rows have different lengths")]
    Ragged,
    #[error("matrix contains NaN or infinity")]
    NonFinite,
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("trace {0} differs from 1")]
    NotUnitTrace(f64),
    #[error("negative eigenvalue {0}")]
    NotPositive(f64),
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("Kraus operators deviate from completeness by {0}")]
    NotTracePreserving(f64),
    #[error("channel has no Kraus operators")]
    NoKraus,
    #[error("state {which} is not pure (purity {purity})")]
    NotPure { which: u8, purity: f64 },
    #[error("states are not orthogonal (overlap {0})")]
    NotOrthogonal(f64),
    #[error("partial trace must keep at least one qubit")]
    EmptyKeep,
    #[error("qubit {qubit} out of range for a {qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("rank-deficient input")]
    RankDeficient,
    #[error("invalid tolerances: {0}")]
    BadTolerances(String),
}
