use thiserror::Error;

use crate::instance::InstanceDiagnostic;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid instance: {}", join(.0))]
    Semantic(Vec<InstanceDiagnostic>),

    #[error("malformed PSPLIB input: {0}")]
    Psplib(String),

    #[error("PSPLIB input declares no renewable resources")]
    NoWorkshops,
}

impl InstanceError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        InstanceError::Syntax { line, message: message.into() }
    }
}

fn join(diags: &[InstanceDiagnostic]) -> String {
    diags.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; ")
}

/// The serial decoder could not place an activity before the deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("horizon exhausted: activity {} cannot be scheduled", .activity + 1)]
pub struct HorizonExhausted {
    pub activity: usize,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("instance is invalid: {}", join(.0))]
    InvalidInstance(Vec<InstanceDiagnostic>),

    #[error("no feasible initial solution found: {0}")]
    Initialization(String),

    #[error("instance is outside the exact solver limits: {0}")]
    OutOfLimits(String),

    #[error("exact search found no feasible schedule")]
    Infeasible,

    #[error("exact search exhausted its node budget without a feasible schedule")]
    BudgetExhausted,
}
