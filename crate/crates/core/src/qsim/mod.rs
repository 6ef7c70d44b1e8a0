//! Dense pure-state simulator over qubits.
//!
//! Basis state `|x⟩` has qubit `j` equal to bit `j` of the index `x`, which
//! matches [`BitVector::from_index`](crate::gf2::BitVector::from_index).

mod span;
mod state;

pub use num_complex::Complex64;
pub(crate) use state::sample_index;
pub use span::{project_onto_span, OrthonormalBasis, SpanProjection, DROP_TOLERANCE};
pub use state::{
    gather_bits, qubit_cap, scatter_bits, set_qubit_cap, FunctionOutcome, MeasurementOutcome,
    StateVector, DEFAULT_QUBIT_CAP,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QsimError {
    #[error("{qubits} qubits exceeds the simulator cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },
    #[error("empty support")]
    EmptySupport,
    #[error("duplicate basis index {0:#x}")]
    DuplicateIndex(u64),
    #[error("basis index {index:#x} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: u64, num_qubits: usize },
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("repeated qubit {0} in register")]
    RepeatedQubit(usize),
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("map is not injective on the support: two inputs reach {0:#x}")]
    NotInjective(u64),
    #[error("state has zero norm")]
    ZeroState,
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
    #[error("malformed state dump: {0}")]
    Dump(String),
}
