use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Configuration problem, qualified by the dotted path of the offending key.
    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate region: polygon has zero area")]
    DegenerateRegion,

    #[error("zero distance between station {station} and UE {ue}")]
    ZeroDistance { station: usize, ue: usize },

    #[error("station {station} is not a {expected} station")]
    WrongTier { station: usize, expected: &'static str },

    #[error("UE {ue} has zero throughput")]
    ZeroRate { ue: usize },

    #[error("UE {ue} has an all-zero association row")]
    EmptyRow { ue: usize },

    #[error(
        "station {station} cannot serve its UEs: RSRP lower bound {lower_bound:e} W exceeds max power {p_max:e} W"
    )]
    Infeasible {
        station: usize,
        lower_bound: f64,
        p_max: f64,
    },

    #[error("outer iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no metrics records to write")]
    EmptyRecords,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors that signal an infeasible optimization instance rather
    /// than a malformed input.
    pub fn is_infeasibility(&self) -> bool {
        match self {
            Error::Infeasible { .. } | Error::ZeroRate { .. } => true,
            Error::Solver { source, .. } => source.is_infeasibility(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
