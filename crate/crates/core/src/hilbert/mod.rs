//! Multipartite finite-dimensional state algebra with a time-stamped
//! partition of subsystems among Alice, the channel and Bob.

mod energy;
mod ledger;
mod state;

pub use energy::{EnergyLevel, EnergySpec};
pub use ledger::{Owner, OwnershipLedger, SubsystemId, TransferEntry};
pub use state::{check_density, CompositeState, INPUT_TOL, PSD_TOL, STATE_TOL};

pub(crate) use state::{pure_density, sanitize_density};
