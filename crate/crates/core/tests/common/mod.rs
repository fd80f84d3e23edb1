#![allow(dead_code)]

use num_complex::Complex64;
use qsync_core::channel::{DelayDistribution, PhaseModel};
use qsync_core::hilbert::EnergySpec;
use qsync_core::linalg::{max_abs_diff, CMatrix};
use qsync_core::timeline::RunRecord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Full-rank mixed state `GG†/tr(GG†)`.
pub fn random_density<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn random_pure<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    gaussian_matrix(rng, n).qr().q()
}

/// One to three sectors with increasing frequencies and small degeneracies.
pub fn random_energy<R: Rng>(rng: &mut R) -> EnergySpec {
    let sectors = rng.random_range(1..=3);
    let mut omega = rng.random_range(-1.0..1.0);
    let pairs: Vec<(f64, usize)> = (0..sectors)
        .map(|_| {
            let level = (omega, rng.random_range(1..=2));
            omega += rng.random_range(0.2..2.0);
            level
        })
        .collect();
    EnergySpec::from_pairs(&pairs).unwrap()
}

pub fn random_model<R: Rng>(rng: &mut R) -> PhaseModel {
    match rng.random_range(0..4) {
        0 => PhaseModel::Noiseless {
            fixed_delay: rng.random_range(0.0..3.0),
        },
        1 => PhaseModel::mixture(rng.random_range(0.0..=1.0)).unwrap(),
        2 => {
            let distribution = if rng.random_bool(0.5) {
                DelayDistribution::Gaussian
            } else {
                DelayDistribution::Uniform
            };
            PhaseModel::random_delay(rng.random_range(0.0..3.0), distribution).unwrap()
        }
        _ => PhaseModel::FullyRandom,
    }
}

/// Largest discrepancy between two run records: states, branch weights and
/// recorded proper times. Structure (labels, outcomes, order) must match.
pub fn record_gap(a: &RunRecord, b: &RunRecord) -> f64 {
    assert_eq!(a.branches.len(), b.branches.len());
    let mut gap = max_abs_diff(&a.rho_a.rho, &b.rho_a.rho)
        .max(max_abs_diff(&a.rho_b.rho, &b.rho_b.rho))
        .max(max_abs_diff(&a.rho_ab.rho, &b.rho_ab.rho))
        .max((a.survival - b.survival).abs());
    for (x, y) in a.branches.iter().zip(&b.branches) {
        assert_eq!(x.outcome_key(), y.outcome_key());
        assert_eq!(x.timestamps.len(), y.timestamps.len());
        gap = gap
            .max((x.probability - y.probability).abs())
            .max(max_abs_diff(&x.rho_a.rho, &y.rho_a.rho))
            .max(max_abs_diff(&x.rho_b.rho, &y.rho_b.rho));
        for (s, t) in x.timestamps.iter().zip(&y.timestamps) {
            assert_eq!((s.actor, s.event, s.kind), (t.actor, t.event, t.kind));
            gap = gap.max((s.pti - t.pti).abs());
        }
    }
    gap
}
