//! Protocol timelines and the event engine that runs them.

mod engine;
mod model;
mod record;
pub mod scenarios;

pub use engine::{run_exact, run_exact_with, run_sampled, sample_outcomes, RunOptions, TieBreak};
pub use model::{
    Action, Actor, BasisSpec, ClockFrame, Condition, Event, Register, Schedule, StateSpec, Timeline, UnitarySpec,
};
pub use record::{
    bloch_vector, einstein_estimate, BranchRecord, OutcomeKey, OutcomeRow, ReducedState, RunRecord, StampKind,
    TimestampRow,
};
pub use scenarios::{
    scenario_einstein, scenario_eddington, scenario_entangled_distribution, scenario_postselect, Builtin, Readout,
};
