use thiserror::Error;

/// Errors surfaced by configuration, validation, and file interfaces.
#[derive(Debug, Error)]
pub enum Error {
    /// A scenario or topology invariant was violated. Carries the entity and
    /// the first broken rule.
    #[error("configuration error: {entity}: {rule}")]
    Configuration { entity: String, rule: String },

    /// A formula was fed an argument outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario or workload file failed to parse.
    #[error("parse error: {context}: {message}")]
    Parse { context: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn configuration(entity: impl Into<String>, rule: impl Into<String>) -> Self {
        Error::Configuration {
            entity: entity.into(),
            rule: rule.into(),
        }
    }

    pub fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    /// Process exit code category: 2 = configuration/validation,
    /// 3 = parse, 4 = io, 1 = anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Configuration { .. } | Error::Domain(_) => 2,
            Error::Parse { .. } => 3,
            Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
