use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of an operation.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A parameter failed its validity checks (counts, index ranges, p < 1, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A non-finite value showed up where a finite one is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An iterative or adaptive procedure failed to converge.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// The kernel ingredients are inconsistent with the operator's built-in
    /// constraints; almost always a mis-transcribed configuration.
    #[error("kernel transcription error: {0}")]
    Transcription(String),

    /// The discretized least-squares system lost rank.
    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    /// A fit was requested on fewer data points than the method needs.
    #[error("fewer than {needed} usable points ({got} given)")]
    TooFewPoints { needed: usize, got: usize },

    /// Configuration file problems (syntax, unknown keys, bad values).
    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
