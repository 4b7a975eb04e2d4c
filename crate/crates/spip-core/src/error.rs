use thiserror::Error;

/// Errors shared across the workbench.
#[derive(Debug, Error)]
pub enum SpipError {
    /// The matrix fails the exact spectral-norm test `‖A‖₂ < 1`.
    #[error("matrix is not contractive (requires trace(AᵀA) < 2 and 1 - trace + det > 0)")]
    NotContractive,
    /// A window box with no lattice points.
    #[error("window box is empty")]
    EmptyWindow,
    /// The search or count exceeded the configured resource cap.
    #[error("search space exceeds cap of {cap}")]
    CapExceeded { cap: String },
    /// Code/state lengths are inconsistent with the instance length.
    #[error("length mismatch: expected code of {expected_code} and {expected_states} states, got {got_code} and {got_states}")]
    LengthMismatch {
        expected_code: usize,
        expected_states: usize,
        got_code: usize,
        got_states: usize,
    },
    /// A backward search window grew past the configured limit.
    #[error("backward window of {cells} cells exceeds limit of {limit}")]
    WindowOverflow { cells: u128, limit: u128 },
    /// The input graph contains a cycle.
    #[error("graph is not acyclic")]
    NotAcyclic,
    /// Vertex embedding could not be verified at the requested spacing.
    #[error("vertex spacing {spacing} is too small: {reason}")]
    SpacingTooSmall { spacing: i64, reason: String },
    /// Entropy of an empty histogram is undefined.
    #[error("histogram is empty")]
    EmptyHistogram,
    /// A symbolic code symbol outside the alphabet `[1, m]`.
    #[error("code symbol {symbol} outside alphabet [1, {alphabet}]")]
    InvalidCode { symbol: u32, alphabet: u32 },
    /// A noise component outside the `[-ε, ε]` bound.
    #[error("noise component {value} outside [-{epsilon}, {epsilon}]")]
    NoiseOutOfBounds { value: String, epsilon: String },
    /// The noise bound is invalid (negative ε, grid too coarse, or grid overflow).
    #[error("invalid noise bound: {0}")]
    InvalidNoise(String),
    /// Malformed input document or literal, with position where available.
    #[error("parse error: {0}")]
    Parse(String),
}

impl SpipError {
    pub fn cap_exceeded(cap: &num_bigint::BigUint) -> Self {
        SpipError::CapExceeded {
            cap: cap.to_string(),
        }
    }
}
