use thiserror::Error;

use crate::hilbert::{Owner, SubsystemId};
use crate::timeline::Actor;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("subsystem `{0}` appears more than once")]
    DuplicateSubsystem(SubsystemId),

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(SubsystemId),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid energy spectrum: {0}")]
    InvalidEnergySpec(String),

    #[error("invalid phase model: {0}")]
    InvalidModel(String),

    #[error("targets are not held by a single party: {0}")]
    MixedOwnership(String),

    #[error("illegal transfer of `{id}` from {from} to {to}")]
    IllegalTransfer {
        id: SubsystemId,
        from: Owner,
        to: Owner,
    },

    #[error("causality violation for `{id}`: leaves the channel at t={at} before it entered at t={entered}")]
    Causality {
        id: SubsystemId,
        entered: f64,
        at: f64,
    },

    #[error("subsystem `{id}` is held by {owner}, expected {expected}")]
    WrongOwner {
        id: SubsystemId,
        owner: Owner,
        expected: Owner,
    },

    #[error("invalid timeline: {0}")]
    InvalidTimeline(String),

    #[error("post-selected outcome {outcome} on `{target}` has zero probability")]
    ImpossibleBranch { target: SubsystemId, outcome: usize },

    #[error("event #{index} ({actor}): {source}")]
    Event {
        index: usize,
        actor: Actor,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("every candidate offset assigns zero likelihood to the observed outcomes")]
    ZeroLikelihood,
}

impl Error {
    pub(crate) fn at_event(self, index: usize, actor: Actor) -> Self {
        match self {
            e @ Error::Event { .. } => e,
            other => Error::Event {
                index,
                actor,
                source: Box::new(other),
            },
        }
    }
}
