use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid machine: {0}")]
    Invalid(ValidationReport),
    #[error("unknown {kind} `{name}`")]
    UnknownIdentifier { kind: &'static str, name: String },
    #[error("not a run of this machine: {0}")]
    NotARun(String),
    #[error("malformed view: {0}")]
    MalformedView(String),
}

/// A search or enumeration hit its configured cap. Never a verdict.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("resource limit exceeded: {what} (limit {limit})")]
pub struct ResourceExceeded {
    pub what: &'static str,
    pub limit: usize,
}

impl ResourceExceeded {
    pub fn new(what: &'static str, limit: usize) -> Self {
        ResourceExceeded { what, limit }
    }
}

/// Errors raised while checking a witness against a machine.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum WitnessError {
    #[error("witness lengths disagree: {actions} H actions for an L view of length {view}")]
    LengthMismatch { actions: usize, view: usize },
    #[error("view belongs to agent {0:?}, expected L")]
    WrongAgent(crate::model::AgentId),
    #[error("strategy has no action for knowledge set {knowledge:?} at step {step}")]
    StrategyUndefined { step: usize, knowledge: Vec<String> },
    #[error("horizon {horizon} is shorter than the view length {view}")]
    HorizonTooShort { horizon: usize, view: usize },
    #[error("{0}")]
    Malformed(String),
}
