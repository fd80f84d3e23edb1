//! How much timing information survives: trace distance, quantum Fisher
//! information and maximum-likelihood offset estimation.

mod distance;
mod fisher;
mod mle;
mod sweep;

pub use distance::{max_pairwise_distance, trace_distance};
pub use fisher::{qfi, qfi_with, spectral_qfi, FisherReport, DEFAULT_CUTOFF, DEFAULT_STEP};
pub use mle::{count_outcomes, linspace, log_likelihood, mle_from_counts, mle_offset, OffsetEstimate, OutcomeCounts};
pub use sweep::{distinguishability, nogo_sweep, rho_b_at, NoiseAxis, SweepRow};
