use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The instance is in the wrong mode (or a weight is outside the mode's range).
    #[error("mode error: {0}")]
    Mode(String),

    /// The graph violates a structural invariant (self-loop, duplicate edge, bad endpoint).
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// A precondition on an argument does not hold.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Exhaustive enumeration was requested above its configured cap.
    #[error("{what} = {size} exceeds the enumeration cap of {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    /// A ratio estimate observed no hits in one of its two sample phases.
    #[error("insufficient samples: {empty_hits} hits in the empty class, {pair_hits} hits in the pair class, out of {samples} chains each")]
    InsufficientSamples {
        empty_hits: u64,
        pair_hits: u64,
        samples: u64,
    },

    /// A ratio estimate failed inside weight learning.
    #[error("weight learning failed at stage {stage} for pair ({u}, {v}): {source}")]
    Stage {
        stage: usize,
        u: usize,
        v: usize,
        #[source]
        source: Box<Error>,
    },

    /// Failure attributed to one phase of the covariance estimator.
    #[error("{phase} phase failed: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Input file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// An internal consistency check failed; this indicates a bug.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    /// True when the error comes from Monte Carlo sampling rather than bad input.
    pub fn is_sampling_failure(&self) -> bool {
        match self {
            Error::InsufficientSamples { .. } => true,
            Error::Stage { source, .. } | Error::Phase { source, .. } => {
                source.is_sampling_failure()
            }
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
