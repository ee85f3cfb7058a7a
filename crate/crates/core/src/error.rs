use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no outcome for folded game")]
    FoldedOutcome,

    #[error("invalid game record: {0}")]
    InvalidRecord(String),

    #[error("invalid series at table {table}: {reason}")]
    InvalidSeries { table: String, reason: String },

    #[error("inconsistent player triple at table {0}")]
    InconsistentPlayers(String),

    #[error("duplicate game {seq} at table {table}")]
    DuplicateGame { table: String, seq: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient history: need {needed} series scores, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("missing win probability for game {seq} at table {table}")]
    MissingWinProbability { table: String, seq: u32 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("unknown player {0}")]
    UnknownPlayer(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("table {table}: {source}")]
    AtTable {
        table: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_table(self, table: &str) -> Self {
        match self {
            e @ Error::AtTable { .. } => e,
            e => Error::AtTable {
                table: table.to_string(),
                source: Box::new(e),
            },
        }
    }
}
