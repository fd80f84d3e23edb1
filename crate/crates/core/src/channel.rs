//! Transit through a dephasing channel.
//!
//! While a subsystem is in transit each energy sector `e` picks up a random
//! phase `φ_e` (independent of the degeneracy label). Averaging over the
//! phase law gives the block map `ρ_{ee'} → δ_{ee'} ρ_{ee'}` with
//! `δ_{ee'} = E[exp(-i(φ_e - φ_e'))]`; sampling one phase realization gives
//! the trajectory unitary `exp(-i Σ_e P_e (ω_e T + φ_e))`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CompositeState, EnergySpec, Owner, SubsystemId};
use crate::linalg::{self, phase, CMatrix, ONE, ZERO};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayDistribution {
    #[default]
    Gaussian,
    /// `θ ~ Uniform[-σ√3, σ√3]`, so `σ` is the standard deviation.
    Uniform,
}

/// Phase-randomization law of the channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PhaseModel {
    /// Deterministic extra delay `d`: `φ_e = ω_e d`.
    Noiseless {
        #[serde(default)]
        fixed_delay: f64,
    },
    /// With probability `1 - ε` all sectors share one uniform phase,
    /// otherwise each sector draws its own.
    Mixture { epsilon: f64 },
    /// Random delay `θ` with standard deviation `σ`: `φ_e = ω_e θ`.
    RandomDelay {
        sigma: f64,
        #[serde(default)]
        distribution: DelayDistribution,
    },
    /// Independent uniform phase per sector.
    FullyRandom,
}

impl Default for PhaseModel {
    fn default() -> Self {
        PhaseModel::Noiseless { fixed_delay: 0.0 }
    }
}

/// One sampled transit: the phase of every sector and, for delay models, the
/// delay that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRealization {
    pub phases: Vec<f64>,
    pub delay: Option<f64>,
}

impl PhaseModel {
    pub fn noiseless() -> Self {
        PhaseModel::Noiseless { fixed_delay: 0.0 }
    }

    pub fn mixture(epsilon: f64) -> Result<Self> {
        let m = PhaseModel::Mixture { epsilon };
        m.validate()?;
        Ok(m)
    }

    pub fn random_delay(sigma: f64, distribution: DelayDistribution) -> Result<Self> {
        let m = PhaseModel::RandomDelay {
            sigma,
            distribution,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseModel::Noiseless { fixed_delay } if !(fixed_delay.is_finite() && fixed_delay >= 0.0) => {
                Err(Error::InvalidModel(format!(
                    "fixed_delay must be a finite non-negative duration, got {fixed_delay}"
                )))
            }
            PhaseModel::Mixture { epsilon } if !(0.0..=1.0).contains(&epsilon) => Err(
                Error::InvalidModel(format!("epsilon must lie in [0, 1], got {epsilon}")),
            ),
            PhaseModel::RandomDelay { sigma, .. } if !(sigma.is_finite() && sigma >= 0.0) => Err(
                Error::InvalidModel(format!("sigma must be finite and >= 0, got {sigma}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhaseModel::Noiseless { .. } => "noiseless",
            PhaseModel::Mixture { .. } => "mixture",
            PhaseModel::RandomDelay { .. } => "random_delay",
            PhaseModel::FullyRandom => "fully_random",
        }
    }

    /// `E[exp(-i(φ_e - φ_f))]` for two sectors with frequencies `omega_e`,
    /// `omega_f`.
    pub fn correlation(&self, e: usize, f: usize, omega_e: f64, omega_f: f64) -> Complex64 {
        if e == f {
            return ONE;
        }
        let dw = omega_e - omega_f;
        match *self {
            PhaseModel::Noiseless { fixed_delay } => phase(dw * fixed_delay),
            PhaseModel::Mixture { epsilon } => Complex64::new(1.0 - epsilon, 0.0),
            PhaseModel::RandomDelay {
                sigma,
                distribution: DelayDistribution::Gaussian,
            } => Complex64::new((-0.5 * dw * dw * sigma * sigma).exp(), 0.0),
            PhaseModel::RandomDelay {
                sigma,
                distribution: DelayDistribution::Uniform,
            } => {
                let x = dw * sigma * 3f64.sqrt();
                let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                Complex64::new(sinc, 0.0)
            }
            PhaseModel::FullyRandom => ZERO,
        }
    }

    /// Draw the sector phases for one transit.
    pub fn sample<R: Rng + ?Sized>(&self, sector_omegas: &[f64], rng: &mut R) -> PhaseRealization {
        let uniform_phase = Uniform::new(0.0, TAU).expect("valid range");
        match *self {
            PhaseModel::Noiseless { fixed_delay } => PhaseRealization {
                phases: sector_omegas.iter().map(|w| w * fixed_delay).collect(),
                delay: None,
            },
            PhaseModel::Mixture { epsilon } => {
                let independent = rng.random::<f64>() < epsilon;
                let phases = if independent {
                    sector_omegas.iter().map(|_| uniform_phase.sample(rng)).collect()
                } else {
                    let shared = uniform_phase.sample(rng);
                    vec![shared; sector_omegas.len()]
                };
                PhaseRealization { phases, delay: None }
            }
            PhaseModel::RandomDelay {
                sigma,
                distribution,
            } => {
                let theta = match distribution {
                    DelayDistribution::Gaussian => Normal::new(0.0, sigma).expect("sigma validated").sample(rng),
                    DelayDistribution::Uniform => {
                        let half = sigma * 3f64.sqrt();
                        if half == 0.0 {
                            0.0
                        } else {
                            Uniform::new_inclusive(-half, half).expect("valid range").sample(rng)
                        }
                    }
                };
                PhaseRealization {
                    phases: sector_omegas.iter().map(|w| w * theta).collect(),
                    delay: Some(theta),
                }
            }
            PhaseModel::FullyRandom => PhaseRealization {
                phases: sector_omegas.iter().map(|_| uniform_phase.sample(rng)).collect(),
                delay: None,
            },
        }
    }
}

/// The sector correlation matrix `δ_{ee'}` induced by a phase model on a
/// given spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix {
    pub entries: CMatrix,
    pub model: PhaseModel,
    pub energies: EnergySpec,
}

impl DeltaMatrix {
    pub fn get(&self, e: usize, f: usize) -> Complex64 {
        self.entries[(e, f)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.entries)
    }
}

pub fn delta_matrix(model: &PhaseModel, energies: &EnergySpec) -> DeltaMatrix {
    let omegas = energies.sector_omegas();
    let n = omegas.len();
    let entries = CMatrix::from_fn(n, n, |e, f| model.correlation(e, f, omegas[e], omegas[f]));
    DeltaMatrix {
        entries,
        model: model.clone(),
        energies: energies.clone(),
    }
}

fn channel_position(s: &CompositeState, id: &SubsystemId) -> Result<usize> {
    let position = s.position(id)?;
    s.require_owner(std::slice::from_ref(id), Owner::Channel)?;
    Ok(position)
}

/// Averaged transit of `id` through the channel for `transit` time units:
/// `ρ_{ee'} → exp(-i(ω_e - ω_e')T) δ_{ee'} ρ_{ee'}` on the sectors of `id`,
/// acting on the full composite (coherences with partners are damped too).
pub fn apply_transit(
    s: &CompositeState,
    id: &SubsystemId,
    model: &PhaseModel,
    transit: f64,
) -> Result<CompositeState> {
    let mut out = s.clone();
    apply_transit_in_place(&mut out, id, model, transit)?;
    Ok(out)
}

pub(crate) fn apply_transit_in_place(
    s: &mut CompositeState,
    id: &SubsystemId,
    model: &PhaseModel,
    transit: f64,
) -> Result<()> {
    model.validate()?;
    if !transit.is_finite() || transit < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "transit duration must be finite and >= 0, got {transit}"
        )));
    }
    let position = channel_position(s, id)?;
    let energies = s.energy(id)?.clone();
    let delta = delta_matrix(model, &energies);
    let omegas = energies.sector_omegas();
    let n = energies.num_sectors();
    let factors = CMatrix::from_fn(n, n, |e, f| {
        phase((omegas[e] - omegas[f]) * transit) * delta.get(e, f)
    });
    let sectors = s.sector_index_map(position);
    s.scale_entries(|i, j| factors[(sectors[i], sectors[j])]);
    Ok(())
}

fn transit_unitary(energies: &EnergySpec, transit: f64, realization: &PhaseRealization) -> CMatrix {
    let omegas = energies.sector_omegas();
    let diag: Vec<Complex64> = energies
        .sectors()
        .iter()
        .map(|&e| phase(omegas[e] * transit + realization.phases[e]))
        .collect();
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

/// One trajectory realization `exp(-i Σ_e P_e (ω_e T + φ_e))`.
pub fn sample_transit<R: Rng + ?Sized>(
    model: &PhaseModel,
    energies: &EnergySpec,
    transit: f64,
    rng: &mut R,
) -> CMatrix {
    let realization = model.sample(&energies.sector_omegas(), rng);
    transit_unitary(energies, transit, &realization)
}

/// Apply a sampled transit unitary to a channel-held subsystem.
pub fn apply_sampled_transit<R: Rng + ?Sized>(
    s: &CompositeState,
    id: &SubsystemId,
    model: &PhaseModel,
    transit: f64,
    rng: &mut R,
) -> Result<CompositeState> {
    model.validate()?;
    let position = channel_position(s, id)?;
    let u = sample_transit(model, s.energy(id)?, transit, rng);
    let mut out = s.clone();
    out.conjugate_at(&[position], &u);
    Ok(out)
}

/// Apply a fixed realization (phases only, no free evolution) to a
/// channel-held subsystem.
pub(crate) fn apply_realization_in_place(
    s: &mut CompositeState,
    id: &SubsystemId,
    realization: &PhaseRealization,
) -> Result<()> {
    let position = channel_position(s, id)?;
    let sectors = s.sector_index_map(position);
    let phases = &realization.phases;
    s.scale_entries(|i, j| phase(phases[sectors[i]] - phases[sectors[j]]));
    Ok(())
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}
