use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Display strings double as stable error codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty-corpus")]
    EmptyCorpus,
    #[error("corpus-too-short: length {len} must exceed order {order}")]
    CorpusTooShort { len: usize, order: usize },
    #[error("empty-prompt")]
    EmptyPrompt,
    #[error("zero-tokens")]
    ZeroTokens,
    #[error("unknown-template: {0}")]
    UnknownTemplate(String),
    #[error("bad-config: {0}")]
    BadConfig(String),
    #[error("trace-too-short")]
    TraceTooShort,
    #[error("degenerate-clusters")]
    DegenerateClusters,
    #[error("empty-class")]
    EmptyClass,
    #[error("not-pcap")]
    NotPcap,
    #[error("truncated-pcap")]
    TruncatedPcap,
    #[error("packet-too-small: {0} bytes cannot hold link headers")]
    PacketTooSmall(u32),
    #[error("scenario-not-found: {0}")]
    ScenarioNotFound(String),
    #[error("no-metrics")]
    NoMetrics,
    #[error("bad-trace: {0}")]
    BadTrace(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// CLI exit code: 2 for configuration errors, 3 for data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BadConfig(_)
            | Error::ScenarioNotFound(_)
            | Error::UnknownTemplate(_)
            | Error::ZeroTokens
            | Error::EmptyPrompt
            | Error::EmptyCorpus
            | Error::CorpusTooShort { .. } => 2,
            _ => 3,
        }
    }
}
