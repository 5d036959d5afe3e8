use thiserror::Error;

/// Unified error type for the crate.
///
/// Search routines distinguish "the answer is provably absent" (an `Ok`
/// carrying `None` or a negative report) from "a resource cap stopped the
/// search" (`StateCapExceeded`, `BudgetExhausted`); callers must never
/// conflate the two.
#[derive(Debug, Error)]
pub enum DomcertError {
    /// Malformed graph data (loops, duplicate edges, out-of-range endpoints).
    #[error("invalid graph: {0}")]
    BadGraph(String),

    /// Malformed step kernel data.
    #[error("invalid step kernel: {0}")]
    BadGraphon(String),

    /// Construction parameters outside the supported range.
    #[error("invalid parameters: {0}")]
    BadParams(String),

    /// Two values that must share a host graph do not.
    #[error("host graph mismatch: {0}")]
    HostMismatch(String),

    /// An operation cap (vertex count, edge count, work estimate) was hit.
    #[error("cap exceeded: {what} is {actual}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        actual: usize,
        cap: usize,
    },

    /// Breadth-first percolation search gave up after visiting the maximum
    /// number of distinct edge-set states. Distinct from an exhausted search,
    /// which proves unreachability.
    #[error("percolation state cap of {max_states} states exceeded")]
    StateCapExceeded { max_states: usize },

    /// A signature referenced an involution index outside the structure.
    #[error("signature step {step} references involution {index}, only {available} available")]
    BadSignatureIndex {
        step: usize,
        index: usize,
        available: usize,
    },

    /// Certificate search ran out of budget before exhausting the space.
    #[error("certification budget exhausted: {0}")]
    BudgetExhausted(String),

    /// A certificate was presented against a graph with a different hash.
    #[error("certificate hash mismatch: certificate carries {expected}, graph hashes to {actual}")]
    HashMismatch { expected: String, actual: String },

    /// Malformed certificate data.
    #[error("invalid certificate: {0}")]
    BadCertificate(String),

    /// Internal consistency check failed; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
