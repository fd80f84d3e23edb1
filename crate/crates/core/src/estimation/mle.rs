use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;
use crate::timeline::{run_exact, sample_outcomes, OutcomeKey, Timeline};

/// Relative gap below which grid candidates count as tied.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffsetEstimate {
    /// Maximizing grid point.
    pub estimate: f64,
    /// Smallest spacing between adjacent grid points (0 for one point).
    pub grid_resolution: f64,
    /// `(candidate Δ, log-likelihood)` over the grid, in grid order.
    pub log_likelihood: Vec<(f64, f64)>,
    pub shots: usize,
    /// Shots that passed every post-selection.
    pub accepted: usize,
    /// `1/√(observed information)` at the estimate; infinite if the
    /// likelihood is not curved there.
    pub stderr: f64,
}

pub type OutcomeCounts = BTreeMap<OutcomeKey, usize>;

pub fn count_outcomes(keys: impl IntoIterator<Item = Option<OutcomeKey>>) -> OutcomeCounts {
    let mut counts = OutcomeCounts::new();
    for key in keys.into_iter().flatten() {
        *counts.entry(key).or_default() += 1;
    }
    counts
}

/// `Σ n_k ln p_k(Δ)` with `p_k` the exact outcome probabilities.
pub fn log_likelihood(t: &Timeline, delta: f64, counts: &OutcomeCounts) -> Result<f64> {
    let record = run_exact(&t.clone().with_delta(delta))?;
    let dist: BTreeMap<OutcomeKey, f64> = record.outcome_distribution().into_iter().collect();
    let mut ll = 0.0;
    for (key, &n) in counts {
        let p = dist.get(key).copied().unwrap_or(0.0);
        if p <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        ll += n as f64 * p.ln();
    }
    Ok(ll)
}

/// Simulate `shots` trajectories at `true_delta` and return the grid point
/// maximizing the likelihood of the observed outcomes. Exact ties are broken
/// uniformly at random with a stream derived from `seed`.
pub fn mle_offset(t: &Timeline, true_delta: f64, shots: usize, grid: &[f64], seed: u64) -> Result<OffsetEstimate> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("the candidate grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid point {bad} is not finite")));
    }
    let keys = sample_outcomes(&t.clone().with_delta(true_delta), shots, seed)?;
    let accepted = keys.iter().filter(|k| k.is_some()).count();
    let counts = count_outcomes(keys);
    mle_from_counts(t, &counts, grid, seed, shots, accepted)
}

pub fn mle_from_counts(
    t: &Timeline,
    counts: &OutcomeCounts,
    grid: &[f64],
    seed: u64,
    shots: usize,
    accepted: usize,
) -> Result<OffsetEstimate> {
    let lls: Vec<f64> = grid
        .par_iter()
        .map(|&d| log_likelihood(t, d, counts))
        .collect::<Result<_>>()?;
    let best = lls.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(Error::ZeroLikelihood);
    }
    let tol = TIE_TOL * best.abs().max(1.0);
    let tied: Vec<usize> = (0..grid.len()).filter(|&i| lls[i] >= best - tol).collect();
    let pick = if tied.len() == 1 {
        tied[0]
    } else {
        let mut r = rng::stream(rng::derive_seed(seed, u64::MAX), 0);
        tied[r.random_range(0..tied.len())]
    };
    let estimate = grid[pick];
    let resolution = grid_resolution(grid);
    let h = if resolution > 0.0 { (resolution / 4.0).max(1e-5) } else { 1e-3 };
    let stderr = if tied.len() > 1 {
        f64::INFINITY
    } else {
        let up = log_likelihood(t, estimate + h, counts)?;
        let down = log_likelihood(t, estimate - h, counts)?;
        let curvature = -(up - 2.0 * lls[pick] + down) / (h * h);
        if curvature.is_finite() && curvature > 0.0 {
            1.0 / curvature.sqrt()
        } else {
            f64::INFINITY
        }
    };
    Ok(OffsetEstimate {
        estimate,
        grid_resolution: resolution,
        log_likelihood: grid.iter().copied().zip(lls).collect(),
        shots,
        accepted,
        stderr,
    })
}

fn grid_resolution(grid: &[f64]) -> f64 {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_gap.is_finite() {
        min_gap
    } else {
        0.0
    }
}

/// Evenly spaced grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
