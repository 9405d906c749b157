use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lexicon parse error at line {line}: {message}")]
    LexiconParse { line: usize, message: String },

    #[error("lexicon validation failed for `{lemma}`: {message}")]
    LexiconValidation { lemma: String, message: String },

    #[error("transcript parse error at line {line}: {message}")]
    Transcript { line: usize, message: String },

    #[error("utterance {id} has empty text and no pre-annotation")]
    EmptyUtterance { id: u64 },

    #[error("stale utterance {id}: last processed id is {last}")]
    StaleUtterance { id: u64, last: u64 },

    #[error("utterance {id} goes back in time ({t_ms} ms < {last_t_ms} ms)")]
    TimeRegression { id: u64, t_ms: u64, last_t_ms: u64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unknown export format `{0}`")]
    UnknownFormat(String),

    #[error("event log gap: expected seq {expected}, found {found}")]
    SeqGap { expected: u64, found: u64 },

    #[error("event log is malformed: {0}")]
    EventLog(String),

    #[error("replay diverged from the log at seq {seq}")]
    ReplayDivergence { seq: u64 },

    #[error("metrics reports out of order: previous at {prev}, current at {cur}")]
    DeltaOrder { prev: u64, cur: u64 },

    #[error("detailing edge {from} -> {to} would close a cycle")]
    DetailingCycle { from: u32, to: u32 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
