//! Numerical laboratory for scrambling diagnostics of unitary channels.
//!
//! The crate works with Choi states of unitaries between labeled registers
//! and measures how information spreads between input and output parts:
//! entropies, mutual informations, the tripartite information and its
//! Renyi-2 counterpart, residual channels, recovery maps, and averaged
//! out-of-time-order correlators. Constructors cover the structured
//! unitaries used by the experiment suite (block scramblers, capacity-gap
//! permutations, criss-cross products, modular-linear multi-input
//! scramblers) plus Haar sampling. Everything runs on a dense complex
//! matrix core with a built-in Jacobi eigensolver; no external linear
//! algebra backend is required.

pub mod analysis;
pub mod channel;
pub mod info;
pub mod linalg;
pub mod modmat;
pub mod oto;
pub mod random;
pub mod register;
pub mod state;
pub mod unitary;
pub mod zoo;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("register error: {0}")]
    Register(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("matrix is not Hermitian within tolerance")]
    NotHermitian,
    #[error("matrix is not an isometry: {0}")]
    NotIsometry(String),
    #[error("eigensolver did not converge within 100 sweeps")]
    NoConvergence,
    #[error("modular arithmetic error: {0}")]
    Modular(String),
    #[error("channel error: {0}")]
    Channel(String),
    #[error("normal-form extraction failed: {0}")]
    Extract(String),
    #[error("unitary is not minimally scrambling (I3 = {0})")]
    NotMinimal(f64),
    #[error("entropic dimension {0} is not within tolerance of an integer")]
    NonIntegerDims(f64),
    #[error("spectrum has an eigenvalue below -1e-10: {0}")]
    NegativeEigenvalue(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
