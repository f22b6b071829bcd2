//! Graph-state purification: protocols, thresholds, census, and fixed-point
//! analysis for stabilizer states under diagonal (Z-syndrome) noise.
//!
//! The crate is organized around a few load-bearing conventions:
//!
//! * Graphs are simple and undirected, vertices `0..n` with `n <= 32`,
//!   adjacency stored as bitmasks ([`graph::Graph`]).
//! * Noisy graph states are diagonal in the graph-state basis and represented
//!   by their probability vector over Z-error syndromes
//!   ([`diag::DiagonalState`]). Qubit `i` maps to bit `i` (LSB first); index 0
//!   is the error-free component, so `lambda[0]` is the fidelity.
//! * Protocol maps ([`gmpp`], [`drpp`]) act on those vectors by XOR
//!   convolution; everything downstream (thresholds, census estimates,
//!   fixed-point analysis) is exact arithmetic on such vectors or closed-form
//!   algebra derived from them.

pub mod census;
pub mod diag;
pub mod drpp;
pub mod fixedpoint;
pub mod gmpp;
pub mod graph;
pub mod solve;
pub mod thresholds;
pub mod vbs;

use thiserror::Error;

/// Unified error type for all fallible operations in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph spec `{0}`")]
    InvalidGraphSpec(String),
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("graph on {0} vertices exceeds the supported maximum of 32")]
    TooManyVertices(usize),
    #[error("canonical form requires n <= 16, got {0}")]
    CanonicalTooLarge(usize),
    #[error("graph file: {0}")]
    FileFormat(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph is not connected")]
    NotConnected,
    #[error("graph is not two-colorable")]
    NotTwoColorable,
    #[error("local-complementation orbit exceeds cap of {0} labeled graphs")]
    OrbitCapExceeded(usize),
    #[error("invalid noise parameter: {0}")]
    InvalidNoise(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state has vanishing norm")]
    ZeroNorm,
    #[error("protocol step has zero success probability")]
    ZeroProbability,
    #[error("bipartition has no crossing edge")]
    NoCrossingEdge,
    #[error("bisection bracket does not change sign over [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("iterated map produced imaginary residue {0:.3e} (tolerance 1e-8)")]
    ImaginaryResidue(f64),
    #[error("{0}")]
    Invalid(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
