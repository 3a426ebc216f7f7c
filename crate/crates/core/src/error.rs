//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Parameter validation failed (non-finite, wrong sign, empty input, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// No call-in threshold satisfies the capacity constraint. Carries the
    /// minimal attainable total workload so callers can report how far the
    /// instance is from feasibility.
    #[error("infeasible: minimal total workload {w_min} exceeds capacity {capacity}")]
    Infeasible { w_min: f64, capacity: f64 },

    /// The data cannot pin down the requested parameter (e.g. an empirical
    /// call-in fraction of 0 or 1).
    #[error("unidentifiable: {0}")]
    Unidentifiable(String),

    /// Estimation produced a degenerate value (e.g. zero variance).
    #[error("degenerate fit: {0}")]
    Degenerate(String),

    /// A root- or bracket-search failed to enclose a solution.
    #[error("bracket failure: {0}")]
    Bracket(String),

    /// The requested operation is outside supported limits.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
