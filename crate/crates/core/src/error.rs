use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular combiner Gram")]
    SingularCombinerGram,

    #[error("MSE matrix singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularMse { min_eigenvalue: f64 },

    #[error("zero objective coupling")]
    ZeroObjectiveCoupling,

    #[error("undefined phase at element {index}")]
    UndefinedPhase { index: usize },

    #[error("degenerate constraint system")]
    DegenerateConstraintSystem,

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error(
        "SDP solver did not converge in {iterations} iterations \
         (primal {primal_infeas:e}, dual {dual_infeas:e}, gap {gap:e})"
    )]
    SdpNotConverged {
        iterations: usize,
        primal_infeas: f64,
        dual_infeas: f64,
        gap: f64,
    },

    #[error("outer iteration {index}: {source}")]
    OuterIteration {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn at_outer(self, index: usize) -> Self {
        match self {
            e @ Error::OuterIteration { .. } => e,
            e => Error::OuterIteration {
                index,
                source: Box::new(e),
            },
        }
    }
}
