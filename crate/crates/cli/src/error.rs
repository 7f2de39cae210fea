use precsched::deadline_sched::DeadlineError;
use precsched::gap_lab::{FamilyError, SmiError, VerifyError};
use precsched::hierarchy_sched::HierarchyError;
use precsched::list_sched::ListError;
use precsched::model::ModelError;
use precsched::oracle::OracleError;
use precsched::schedule::ScheduleError;
use thiserror::Error;

/// Every failure maps to one of three exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or unreadable input. Exit 2.
    #[error("{0}")]
    Usage(String),
    /// The checked artifact is wrong. Exit 1.
    #[error("{0}")]
    Failed(String),
    /// A size or search cap was hit. Exit 3.
    #[error("cap exceeded: {0}")]
    Cap(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
            CliError::Cap(_) => 3,
        }
    }

    pub fn usage(msg: impl std::fmt::Display) -> Self {
        CliError::Usage(msg.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("io: {e}"))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::usage(e)
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        CliError::usage(e)
    }
}

impl From<DeadlineError> for CliError {
    fn from(e: DeadlineError) -> Self {
        CliError::usage(e)
    }
}

impl From<SmiError> for CliError {
    fn from(e: SmiError) -> Self {
        CliError::usage(e)
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        CliError::usage(e)
    }
}

impl From<ListError> for CliError {
    fn from(e: ListError) -> Self {
        CliError::usage(e)
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::CapExceeded(s) => CliError::Cap(s),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::SizeBlowup(s) => CliError::Cap(s),
            VerifyError::InvalidParameter(_) => CliError::usage(e),
        }
    }
}

impl From<HierarchyError> for CliError {
    fn from(e: HierarchyError) -> Self {
        match e {
            HierarchyError::SizeBlowup(s) => CliError::Cap(s),
            HierarchyError::Oracle(o) => o.into(),
            HierarchyError::NoFeasibleHorizon(_) | HierarchyError::LevelExhausted => CliError::Cap(e.to_string()),
            HierarchyError::InvalidParameter(_) => CliError::usage(e),
            other => CliError::Failed(other.to_string()),
        }
    }
}
