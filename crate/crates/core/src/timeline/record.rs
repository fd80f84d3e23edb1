use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::model::Actor;
use crate::error::{Error, Result};
use crate::hilbert::SubsystemId;
use crate::linalg::{self, CMatrix};

/// Reduced density matrix of a set of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub subsystems: Vec<SubsystemId>,
    pub rho: CMatrix,
}

impl ReducedState {
    pub fn trivial() -> Self {
        Self {
            subsystems: Vec::new(),
            rho: CMatrix::identity(1, 1),
        }
    }
}

impl Serialize for ReducedState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            subsystems: &'a [SubsystemId],
            rho: Vec<Vec<Complex64>>,
        }
        Repr {
            subsystems: &self.subsystems,
            rho: linalg::to_rows(&self.rho),
        }
        .serialize(serializer)
    }
}

/// One recorded measurement result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRow {
    pub actor: Actor,
    pub label: String,
    pub event: usize,
    pub pti: f64,
    pub outcome: usize,
    /// Born probability of this outcome given everything before it.
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StampKind {
    Send,
    Receive,
}

/// Proper time at which a party sent or received a subsystem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimestampRow {
    pub actor: Actor,
    pub event: usize,
    pub subsystem: SubsystemId,
    pub kind: StampKind,
    pub pti: f64,
}

/// Measurement outcomes of a run, keyed by event index (ascending).
pub type OutcomeKey = Vec<(usize, usize)>;

/// One outcome history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchRecord {
    /// Probability of this history given that every post-selection passed.
    pub probability: f64,
    pub outcomes: Vec<OutcomeRow>,
    pub timestamps: Vec<TimestampRow>,
    /// Alice's subsystems at her last event.
    pub rho_a: ReducedState,
    /// Bob's subsystems at his last event.
    pub rho_b: ReducedState,
}

impl BranchRecord {
    pub fn outcome_key(&self) -> OutcomeKey {
        let mut key: OutcomeKey = self.outcomes.iter().map(|o| (o.event, o.outcome)).collect();
        key.sort_unstable();
        key
    }

    pub fn outcome(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().find(|o| o.label == label).map(|o| o.outcome)
    }

    pub fn stamp(&self, actor: Actor, subsystem: &SubsystemId, kind: StampKind) -> Vec<f64> {
        self.timestamps
            .iter()
            .filter(|s| s.actor == actor && &s.subsystem == subsystem && s.kind == kind)
            .map(|s| s.pti)
            .collect()
    }
}

/// What the parties can know after a run: outcomes, proper times and their
/// local states. Contains no absolute time and no clock offset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    /// Every outcome history (exact runs) or the single sampled one.
    pub branches: Vec<BranchRecord>,
    /// Branch-averaged state of Alice's subsystems at her last event.
    pub rho_a: ReducedState,
    /// Branch-averaged state of Bob's subsystems at his last event.
    pub rho_b: ReducedState,
    /// Branch-averaged joint state of all subsystems held by Alice or Bob
    /// when the run ends.
    pub rho_ab: ReducedState,
    /// Probability that every post-selection passed (0 or 1 for a sampled
    /// shot).
    pub survival: f64,
}

impl RunRecord {
    pub fn survived(&self) -> bool {
        self.survival > 0.0
    }

    /// Outcome histories and their probabilities, sorted by key.
    pub fn outcome_distribution(&self) -> Vec<(OutcomeKey, f64)> {
        let mut out: Vec<(OutcomeKey, f64)> = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let key = b.outcome_key();
            match out.iter_mut().find(|(k, _)| *k == key) {
                Some((_, p)) => *p += b.probability,
                None => out.push((key, b.probability)),
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Marginal probability that measurement `label` gave `outcome`.
    pub fn probability_of(&self, label: &str, outcome: usize) -> f64 {
        self.branches
            .iter()
            .filter(|b| b.outcome(label) == Some(outcome))
            .map(|b| b.probability)
            .sum()
    }
}

/// Round-trip estimate of the one-way transit from proper times only:
/// `((τ_r^A - τ_s^A) - (τ_s^B - τ_r^B)) / 2`, using the first round trip of
/// `probe`.
pub fn einstein_estimate(branch: &BranchRecord, probe: &SubsystemId) -> Result<f64> {
    let first = |actor, kind| {
        branch.stamp(actor, probe, kind).first().copied().ok_or_else(|| {
            Error::InvalidArgument(format!("no {kind:?} of `{probe}` by {actor} in the record"))
        })
    };
    let sent = first(Actor::Alice, StampKind::Send)?;
    let returned = first(Actor::Alice, StampKind::Receive)?;
    let bounced_in = first(Actor::Bob, StampKind::Receive)?;
    let bounced_out = first(Actor::Bob, StampKind::Send)?;
    Ok(((returned - sent) - (bounced_out - bounced_in)) / 2.0)
}

/// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of a qubit density matrix.
pub fn bloch_vector(rho: &CMatrix) -> Result<[f64; 3]> {
    if rho.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho.nrows(),
        });
    }
    let r01 = rho[(0, 1)];
    Ok([2.0 * r01.re, -2.0 * r01.im, (rho[(0, 0)] - rho[(1, 1)]).re])
}
