//! Exit-code taxonomy.
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | input or contract error                   |
//! | 2    | knowledge-base backend / transport error  |
//! | 3    | internal invariant violation              |

use std::fmt;
use std::process::ExitCode;

use synsem_core::evaluation::EvaluationError;
use synsem_core::{ConfigError, CorpusError, InferenceError, KbError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Input = 1,
    Backend = 2,
    Internal = 3,
}

impl From<ExitStatus> for ExitCode {
    fn from(status: ExitStatus) -> Self {
        ExitCode::from(status as u8)
    }
}

#[derive(Debug)]
pub struct Failure {
    pub status: ExitStatus,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            status: ExitStatus::Input,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<KbError> for Failure {
    fn from(e: KbError) -> Self {
        let status = match &e {
            KbError::Transport(_) | KbError::Decode { .. } => ExitStatus::Backend,
            KbError::InvalidKeyword(_) => ExitStatus::Internal,
            KbError::SnapshotIo { .. }
            | KbError::SnapshotParse { .. }
            | KbError::SnapshotInvalid { .. }
            | KbError::CacheIo { .. } => ExitStatus::Input,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

impl From<InferenceError> for Failure {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::Kb(kb) => kb.into(),
            InferenceError::InvalidMinSupport(_) | InferenceError::NoKeywords => {
                Failure::input(e.to_string())
            }
            InferenceError::DuplicateKeyword(_) | InferenceError::EmptyDerivation(_) => Failure {
                status: ExitStatus::Internal,
                message: e.to_string(),
            },
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        let status = match e {
            CorpusError::InvalidRecord { .. } => ExitStatus::Internal,
            _ => ExitStatus::Input,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

impl From<EvaluationError> for Failure {
    fn from(e: EvaluationError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::input(e.to_string())
    }
}
