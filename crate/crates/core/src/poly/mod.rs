//! Polynomial algebra shared by every stage of the pipeline.
//!
//! Three representations are used:
//!
//! * [`ContinuousPoly`]: the objective over named real variables.
//! * [`BinaryPoly`]: a multilinear pseudo-Boolean polynomial over bits `x_i ∈ {0,1}`
//!   (PUBO, or QUBO once the degree is at most two).
//! * [`SpinPoly`]: the same kind of object over spins `s_i ∈ {-1,+1}`, i.e. a
//!   sum of Pauli-Z products.
//!
//! All values are canonical after construction: terms live in a sorted map and
//! exact-zero coefficients are never stored, so structural equality is
//! polynomial equality and iteration order is deterministic.

mod continuous;
mod multilinear;

pub use continuous::{ContinuousPoly, Monomial};
pub use multilinear::{Algebra, BinaryPoly, Boolean, IndexSet, MultilinearPoly, Spin, SpinPoly};

/// Upper bound on the number of stored terms produced by any expansion.
pub const MAX_TERMS: usize = 1 << 22;

/// Upper bound on the number of bits (or qubits) an exhaustive table may cover.
pub const MAX_TABLE_BITS: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("dimension mismatch: {left} bits vs {right} bits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expansion exceeds the capacity of {limit} terms")]
    Capacity { limit: usize },
    #[error("index {index} is out of range for {num_bits} bits")]
    IndexOutOfRange { index: usize, num_bits: usize },
    #[error("no value supplied for variable `{0}`")]
    MissingVariable(String),
    #[error("assignment has {got} entries, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("spin value {value} at index {index} is not -1 or +1")]
    InvalidSpin { index: usize, value: i8 },
    #[error("tabulating {bits} bits exceeds the limit of {limit}")]
    TableCapacity { bits: usize, limit: usize },
}

impl PolyError {
    /// True for the errors raised by a capacity guard rather than bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Self::Capacity { .. } | Self::TableCapacity { .. })
    }
}

pub type Result<T, E = PolyError> = std::result::Result<T, E>;
