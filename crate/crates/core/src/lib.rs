//! Simulation of clock synchronization across a dephasing quantum channel.
//!
//! * [`hilbert`]: multipartite density matrices with an ownership ledger.
//! * [`channel`]: per-energy-sector phase randomization during transit.
//! * [`timeline`]: protocol events in each party's proper time and the engine
//!   that runs them, exactly or by sampling trajectories.
//! * [`estimation`]: trace distance, quantum Fisher information and
//!   maximum-likelihood estimation of the clock offset.
//!
//! ```
//! use qsync_core::estimation::{max_pairwise_distance, qfi, rho_b_at, DEFAULT_STEP};
//! use qsync_core::timeline::scenario_eddington;
//! use qsync_core::PhaseModel;
//!
//! let t = scenario_eddington(1.0, 1.0, 2.0)?.with_channel(PhaseModel::mixture(1.0)?);
//! let states = [-0.5, 0.0, 0.5]
//!     .iter()
//!     .map(|&d| rho_b_at(&t, d))
//!     .collect::<qsync_core::Result<Vec<_>>>()?;
//! assert!(max_pairwise_distance(&states)? < 1e-10);
//! assert!(qfi(|d| rho_b_at(&t, d), 0.0, DEFAULT_STEP)?.qfi < 1e-8);
//! # Ok::<(), qsync_core::Error>(())
//! ```

pub mod channel;
pub mod error;
pub mod estimation;
pub mod hilbert;
pub mod linalg;
pub mod rng;
pub mod timeline;

pub use channel::{apply_transit, delta_matrix, sample_transit, DelayDistribution, DeltaMatrix, PhaseModel};
pub use error::{Error, Result};
pub use hilbert::{CompositeState, EnergySpec, Owner, SubsystemId};
pub use timeline::{run_exact, run_sampled, Actor, ClockFrame, RunRecord, Timeline};
