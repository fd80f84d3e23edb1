use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::max_pairwise_distance;
use super::fisher::{qfi, DEFAULT_STEP};
use crate::channel::{DelayDistribution, PhaseModel};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::timeline::{run_exact, Timeline};

/// Which channel parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "parameter", rename_all = "snake_case")]
pub enum NoiseAxis {
    /// `Mixture(ε)`.
    Epsilon,
    /// `RandomDelay(σ)`.
    Sigma {
        #[serde(default)]
        distribution: DelayDistribution,
    },
}

impl NoiseAxis {
    pub fn model(&self, value: f64) -> Result<PhaseModel> {
        match *self {
            NoiseAxis::Epsilon => PhaseModel::mixture(value),
            NoiseAxis::Sigma { distribution } => PhaseModel::random_delay(value, distribution),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseAxis::Epsilon => "epsilon",
            NoiseAxis::Sigma { .. } => "sigma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub noise_value: f64,
    /// Grid midpoint at which the QFI is evaluated.
    pub delta: f64,
    pub trace_distance_max: f64,
    pub qfi: f64,
}

/// Bob's final state as a function of `Δ`.
pub fn rho_b_at(t: &Timeline, delta: f64) -> Result<CMatrix> {
    Ok(run_exact(&t.clone().with_delta(delta))?.rho_b.rho)
}

/// How much Bob's state reveals about `Δ` under `t`'s own channel: the
/// largest pairwise trace distance over `delta_grid` and the QFI at the grid
/// midpoint.
pub fn distinguishability(t: &Timeline, delta_grid: &[f64]) -> Result<(f64, f64, f64)> {
    if delta_grid.is_empty() {
        return Err(Error::InvalidArgument("the delta grid is empty".into()));
    }
    let states: Vec<CMatrix> = delta_grid.iter().map(|&d| rho_b_at(t, d)).collect::<Result<_>>()?;
    let lo = delta_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = delta_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let report = qfi(|d| rho_b_at(t, d), mid, DEFAULT_STEP)?;
    Ok((max_pairwise_distance(&states)?, mid, report.qfi))
}

/// One row per noise value, sorted by noise value.
pub fn nogo_sweep(t: &Timeline, delta_grid: &[f64], axis: NoiseAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("the noise grid is empty".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&value| {
            let noisy = t.clone().with_channel(axis.model(value)?);
            let (trace_distance_max, delta, qfi) = distinguishability(&noisy, delta_grid)?;
            Ok(SweepRow {
                noise_value: value,
                delta,
                trace_distance_max,
                qfi,
            })
        })
        .collect()
}
