use tempo_core::adversary::AdversaryError;
use tempo_core::engine::EngineError;
use tempo_core::vector::VectorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0}")]
    Zeno(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Domain(_) => 2,
            CliError::Zeno(_) => 3,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Zeno { .. } => CliError::Zeno(e.to_string()),
            EngineError::Codec(_) => CliError::Other(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<VectorError> for CliError {
    fn from(e: VectorError) -> Self {
        match e {
            VectorError::GammaBelowFloor { gamma, floor } => CliError::Domain(format!(
                "delay bound gamma = {gamma} is below the floor of two sampling times (2 dt = {floor})"
            )),
            VectorError::Codec(_) => CliError::Other(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<AdversaryError> for CliError {
    fn from(e: AdversaryError) -> Self {
        match e {
            AdversaryError::Engine(inner) => inner.into(),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(format!("json: {e}"))
    }
}
