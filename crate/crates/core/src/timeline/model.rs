use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::PhaseModel;
use crate::error::{Error, Result};
use crate::hilbert::{pure_density, sanitize_density, EnergySpec, Owner, SubsystemId, INPUT_TOL};
use crate::linalg::{self, from_rows, phase, CMatrix, ONE, ZERO};

/// A party able to act on subsystems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Alice,
    Bob,
}

impl Actor {
    pub fn owner(self) -> Owner {
        match self {
            Actor::Alice => Owner::Alice,
            Actor::Bob => Owner::Bob,
        }
    }

    pub fn other(self) -> Actor {
        match self {
            Actor::Alice => Actor::Bob,
            Actor::Bob => Actor::Alice,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Actor::Alice => 0,
            Actor::Bob => 1,
        }
    }
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Actor::Alice => "Alice",
            Actor::Bob => "Bob",
        })
    }
}

/// Hidden clock origins. Actors only ever see proper times `τ = t - t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockFrame {
    pub t0_a: f64,
    pub t0_b: f64,
}

impl Default for ClockFrame {
    fn default() -> Self {
        Self { t0_a: 0.0, t0_b: 0.0 }
    }
}

impl ClockFrame {
    pub fn new(t0_a: f64, t0_b: f64) -> Self {
        Self { t0_a, t0_b }
    }

    /// Frame with `t0_a = 0` and `t0_b = delta`.
    pub fn from_offset(delta: f64) -> Self {
        Self { t0_a: 0.0, t0_b: delta }
    }

    /// `Δ = t0_b - t0_a`.
    pub fn delta(&self) -> f64 {
        self.t0_b - self.t0_a
    }

    /// Both origins moved by `shift`; `Δ` is unchanged.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            t0_a: self.t0_a + shift,
            t0_b: self.t0_b + shift,
        }
    }

    /// Same `t0_a`, new offset.
    pub fn with_delta(&self, delta: f64) -> Self {
        Self {
            t0_a: self.t0_a,
            t0_b: self.t0_a + delta,
        }
    }

    pub fn origin(&self, actor: Actor) -> f64 {
        match actor {
            Actor::Alice => self.t0_a,
            Actor::Bob => self.t0_b,
        }
    }

    pub(crate) fn absolute(&self, actor: Actor, tau: f64) -> f64 {
        self.origin(actor) + tau
    }

    pub(crate) fn proper(&self, actor: Actor, t: f64) -> f64 {
        t - self.origin(actor)
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0_a.is_finite() && self.t0_b.is_finite()) {
            return Err(Error::InvalidTimeline("clock origins must be finite".into()));
        }
        Ok(())
    }
}

/// A pure or mixed state over one or more subsystems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    /// Energy eigenstate with the given basis index.
    Basis { index: usize },
    /// Equal superposition of all basis states.
    Uniform,
    Amplitudes { amplitudes: Vec<Complex64> },
    Density { rows: Vec<Vec<Complex64>> },
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec::Basis { index: 0 }
    }
}

impl StateSpec {
    pub fn resolve(&self, dim: usize) -> Result<CMatrix> {
        match self {
            StateSpec::Basis { index } => {
                if *index >= dim {
                    return Err(Error::InvalidState(format!(
                        "basis index {index} out of range for dimension {dim}"
                    )));
                }
                let mut amps = vec![ZERO; dim];
                amps[*index] = ONE;
                Ok(linalg::pure_state(&amps))
            }
            StateSpec::Uniform => {
                let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
                Ok(linalg::pure_state(&vec![a; dim]))
            }
            StateSpec::Amplitudes { amplitudes } => pure_density(amplitudes, dim),
            StateSpec::Density { rows } => {
                let m = from_rows(rows)?;
                if m.shape() != (dim, dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: m.nrows(),
                    });
                }
                sanitize_density(m)
            }
        }
    }
}

/// A local unitary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum UnitarySpec {
    Identity,
    PauliX,
    PauliY,
    PauliZ,
    Hadamard,
    /// `diag(exp(-i p_k))`.
    Phases { phases: Vec<f64> },
    Matrix { rows: Vec<Vec<Complex64>> },
}

impl UnitarySpec {
    pub fn resolve(&self, dim: usize) -> Result<CMatrix> {
        let qubit = |m: CMatrix| {
            if dim == 2 {
                Ok(m)
            } else {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: 2,
                })
            }
        };
        let u = match self {
            UnitarySpec::Identity => CMatrix::identity(dim, dim),
            UnitarySpec::PauliX => qubit(linalg::pauli_x())?,
            UnitarySpec::PauliY => qubit(linalg::pauli_y())?,
            UnitarySpec::PauliZ => qubit(linalg::pauli_z())?,
            UnitarySpec::Hadamard => qubit(linalg::hadamard())?,
            UnitarySpec::Phases { phases } => {
                if phases.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: phases.len(),
                    });
                }
                let diag: Vec<Complex64> = phases.iter().map(|&p| phase(p)).collect();
                CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
            }
            UnitarySpec::Matrix { rows } => {
                let m = from_rows(rows)?;
                if m.shape() != (dim, dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: m.nrows(),
                    });
                }
                m
            }
        };
        linalg::ensure_unitary(&u)?;
        Ok(u)
    }
}

/// Orthonormal measurement basis for one subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisSpec {
    Energy,
    /// `|±⟩`, outcome 0 is `+` (qubits only).
    X,
    /// `(|0⟩ ± i|1⟩)/√2`, outcome 0 is `+` (qubits only).
    Y,
    /// Basis vectors, one per outcome.
    Custom { vectors: Vec<Vec<Complex64>> },
}

impl BasisSpec {
    /// Rank-one projectors, one per outcome.
    pub fn projectors(&self, dim: usize) -> Result<Vec<CMatrix>> {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let i = Complex64::new(0.0, FRAC_1_SQRT_2);
        let qubit_only = || Error::InvalidArgument(format!("X/Y bases need a qubit, got dimension {dim}"));
        let vectors: Vec<Vec<Complex64>> = match self {
            BasisSpec::Energy => (0..dim)
                .map(|k| (0..dim).map(|j| if j == k { ONE } else { ZERO }).collect())
                .collect(),
            BasisSpec::X if dim == 2 => vec![vec![s, s], vec![s, -s]],
            BasisSpec::Y if dim == 2 => vec![vec![s, i], vec![s, -i]],
            BasisSpec::X | BasisSpec::Y => return Err(qubit_only()),
            BasisSpec::Custom { vectors } => {
                if vectors.len() != dim || vectors.iter().any(|v| v.len() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: vectors.len(),
                    });
                }
                for (a, va) in vectors.iter().enumerate() {
                    for (b, vb) in vectors.iter().enumerate() {
                        let ip: Complex64 = va.iter().zip(vb).map(|(x, y)| x.conj() * y).sum();
                        let target = if a == b { ONE } else { ZERO };
                        if (ip - target).norm() > INPUT_TOL {
                            return Err(Error::InvalidArgument(
                                "custom basis vectors are not orthonormal".into(),
                            ));
                        }
                    }
                }
                vectors.clone()
            }
        };
        Ok(vectors.iter().map(|v| linalg::pure_state(v)).collect())
    }
}

/// When an event fires, in the acting party's proper time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    /// At proper time `τ` (a `Receive` additionally waits for the arrival).
    Proper { proper_time: f64 },
    /// `delay` after `subsystem` arrived at this party.
    AfterArrival {
        after_arrival: SubsystemId,
        #[serde(default)]
        delay: f64,
    },
}

impl Schedule {
    pub fn at(proper_time: f64) -> Self {
        Schedule::Proper { proper_time }
    }

    pub fn after_arrival(id: impl Into<SubsystemId>, delay: f64) -> Self {
        Schedule::AfterArrival {
            after_arrival: id.into(),
            delay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    /// Discard the current state of `targets` and prepare `state` on them.
    Prepare {
        targets: Vec<SubsystemId>,
        state: StateSpec,
    },
    ApplyLocal {
        targets: Vec<SubsystemId>,
        unitary: UnitarySpec,
    },
    /// Hand `subsystem` to the channel; it reaches the other party after
    /// `transit` time units.
    Send {
        subsystem: SubsystemId,
        transit: f64,
    },
    Receive {
        subsystem: SubsystemId,
    },
    Measure {
        target: SubsystemId,
        basis: BasisSpec,
        label: String,
    },
    /// Keep only runs in which measuring `target` in `basis` gives `outcome`.
    PostSelect {
        target: SubsystemId,
        basis: BasisSpec,
        outcome: usize,
    },
    /// No operation; marks a proper time for the final state snapshot.
    Wait,
}

impl Action {
    fn targets(&self) -> Vec<&SubsystemId> {
        match self {
            Action::Prepare { targets, .. } | Action::ApplyLocal { targets, .. } => targets.iter().collect(),
            Action::Send { subsystem, .. } | Action::Receive { subsystem } => vec![subsystem],
            Action::Measure { target, .. } | Action::PostSelect { target, .. } => vec![target],
            Action::Wait => Vec::new(),
        }
    }
}

/// Run the event only if the measurement labelled `label` gave `outcome`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub label: String,
    pub outcome: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub actor: Actor,
    #[serde(flatten)]
    pub at: Schedule,
    #[serde(flatten)]
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<Condition>,
}

impl Event {
    pub fn new(actor: Actor, at: Schedule, action: Action) -> Self {
        Self {
            actor,
            at,
            action,
            when: None,
        }
    }

    pub fn when(mut self, label: impl Into<String>, outcome: usize) -> Self {
        self.when = Some(Condition {
            label: label.into(),
            outcome,
        });
        self
    }
}

/// A subsystem present from the start, held by `owner`, whose state at the
/// owner's clock origin is `initial`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Register {
    pub id: SubsystemId,
    pub owner: Actor,
    pub levels: EnergySpec,
    #[serde(default)]
    pub initial: StateSpec,
}

impl Register {
    pub fn new(id: impl Into<SubsystemId>, owner: Actor, levels: EnergySpec, initial: StateSpec) -> Self {
        Self {
            id: id.into(),
            owner,
            levels,
            initial,
        }
    }
}

/// A synchronization protocol: initial registers, per-party events, the
/// channel law and the hidden clock frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub registers: Vec<Register>,
    pub events: Vec<Event>,
    #[serde(default)]
    pub channel: PhaseModel,
    #[serde(default)]
    pub frame: ClockFrame,
    /// Subsystems allowed to remain in the channel at the end.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub abandoned: Vec<SubsystemId>,
}

impl Timeline {
    pub fn new(registers: Vec<Register>, events: Vec<Event>) -> Self {
        Self {
            registers,
            events,
            channel: PhaseModel::default(),
            frame: ClockFrame::default(),
            abandoned: Vec::new(),
        }
    }

    pub fn with_channel(mut self, channel: PhaseModel) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_frame(mut self, frame: ClockFrame) -> Self {
        self.frame = frame;
        self
    }

    /// Same timeline with `Δ` replaced (keeps `t0_a`).
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.frame = self.frame.with_delta(delta);
        self
    }

    pub fn register(&self, id: &SubsystemId) -> Option<&Register> {
        self.registers.iter().find(|r| &r.id == id)
    }

    /// Every register id and measurement label prefixed with `prefix`.
    pub fn with_prefix(&self, prefix: &str) -> Timeline {
        let rename = |id: &SubsystemId| SubsystemId::new(format!("{prefix}{id}"));
        let mut out = self.clone();
        for r in &mut out.registers {
            r.id = rename(&r.id);
        }
        for id in &mut out.abandoned {
            *id = rename(id);
        }
        for e in &mut out.events {
            if let Schedule::AfterArrival { after_arrival, .. } = &mut e.at {
                *after_arrival = rename(after_arrival);
            }
            if let Some(c) = &mut e.when {
                c.label = format!("{prefix}{}", c.label);
            }
            match &mut e.action {
                Action::Prepare { targets, .. } | Action::ApplyLocal { targets, .. } => {
                    for t in targets {
                        *t = rename(t);
                    }
                }
                Action::Send { subsystem, .. } | Action::Receive { subsystem } => *subsystem = rename(subsystem),
                Action::Measure { target, label, .. } => {
                    *target = rename(target);
                    *label = format!("{prefix}{label}");
                }
                Action::PostSelect { target, .. } => *target = rename(target),
                Action::Wait => {}
            }
        }
        out
    }

    /// Append `next` with its proper times shifted by `shift` for both
    /// parties. Registers must be disjoint; channel and frame come from
    /// `self`.
    pub fn then(&self, next: &Timeline, shift: f64) -> Result<Timeline> {
        let mut out = self.clone();
        for r in &next.registers {
            if out.register(&r.id).is_some() {
                return Err(Error::DuplicateSubsystem(r.id.clone()));
            }
            out.registers.push(r.clone());
        }
        for e in &next.events {
            let mut e = e.clone();
            if let Schedule::Proper { proper_time } = &mut e.at {
                *proper_time += shift;
            }
            out.events.push(e);
        }
        out.abandoned.extend(next.abandoned.iter().cloned());
        out.validate()?;
        Ok(out)
    }

    /// Static checks: known subsystems, non-decreasing proper times per
    /// party, conditions on earlier labels, every send matched by a receive
    /// (or declared abandoned), valid channel and frame.
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.frame.validate()?;
        let mut ids = BTreeSet::new();
        for r in &self.registers {
            if !ids.insert(&r.id) {
                return Err(Error::DuplicateSubsystem(r.id.clone()));
            }
            r.initial.resolve(r.levels.dim()).map_err(|e| {
                Error::InvalidTimeline(format!("initial state of `{}`: {e}", r.id))
            })?;
        }
        for id in &self.abandoned {
            if !ids.contains(id) {
                return Err(Error::UnknownSubsystem(id.clone()));
            }
        }
        let mut last_tau: [Option<f64>; 2] = [None, None];
        let mut labels: BTreeSet<&str> = BTreeSet::new();
        // (subsystem, receiver) -> pending sends
        let mut in_flight: BTreeMap<(&SubsystemId, Actor), i64> = BTreeMap::new();
        for (index, e) in self.events.iter().enumerate() {
            let wrap = |err: Error| err.at_event(index, e.actor);
            for id in e.action.targets() {
                if !ids.contains(id) {
                    return Err(wrap(Error::UnknownSubsystem(id.clone())));
                }
            }
            match &e.at {
                Schedule::Proper { proper_time } => {
                    if !(proper_time.is_finite() && *proper_time >= 0.0) {
                        return Err(wrap(Error::InvalidTimeline(format!(
                            "proper time must be finite and >= 0, got {proper_time}"
                        ))));
                    }
                    let slot = &mut last_tau[e.actor.index()];
                    if let Some(prev) = *slot {
                        if *proper_time < prev {
                            return Err(wrap(Error::InvalidTimeline(format!(
                                "proper time {proper_time} precedes the previous {} event at {prev}",
                                e.actor
                            ))));
                        }
                    }
                    *slot = Some(*proper_time);
                }
                Schedule::AfterArrival { after_arrival, delay } => {
                    if !ids.contains(after_arrival) {
                        return Err(wrap(Error::UnknownSubsystem(after_arrival.clone())));
                    }
                    if !(delay.is_finite() && *delay >= 0.0) {
                        return Err(wrap(Error::InvalidTimeline(format!(
                            "arrival delay must be finite and >= 0, got {delay}"
                        ))));
                    }
                }
            }
            if let Some(c) = &e.when {
                if !labels.contains(c.label.as_str()) {
                    return Err(wrap(Error::InvalidTimeline(format!(
                        "condition refers to label `{}` with no earlier measurement",
                        c.label
                    ))));
                }
            }
            match &e.action {
                Action::Prepare { targets, .. } | Action::ApplyLocal { targets, .. } => {
                    if targets.is_empty() {
                        return Err(wrap(Error::InvalidArgument("no target subsystems".into())));
                    }
                    let unique: BTreeSet<_> = targets.iter().collect();
                    if unique.len() != targets.len() {
                        return Err(wrap(Error::InvalidArgument("repeated target subsystem".into())));
                    }
                    let dim: usize = targets
                        .iter()
                        .map(|t| self.register(t).map_or(1, |r| r.levels.dim()))
                        .product();
                    match &e.action {
                        Action::Prepare { state, .. } => {
                            state.resolve(dim).map_err(wrap)?;
                        }
                        Action::ApplyLocal { unitary, .. } => {
                            unitary.resolve(dim).map_err(wrap)?;
                        }
                        _ => unreachable!(),
                    }
                }
                Action::Send { subsystem, transit } => {
                    if !(transit.is_finite() && *transit >= 0.0) {
                        return Err(wrap(Error::InvalidTimeline(format!(
                            "transit must be finite and >= 0, got {transit}"
                        ))));
                    }
                    *in_flight.entry((subsystem, e.actor.other())).or_default() += 1;
                }
                Action::Receive { subsystem } => {
                    let pending = in_flight.entry((subsystem, e.actor)).or_default();
                    if *pending == 0 {
                        return Err(wrap(Error::InvalidTimeline(format!(
                            "receive of `{subsystem}` has no earlier send by {}",
                            e.actor.other()
                        ))));
                    }
                    *pending -= 1;
                }
                Action::Measure { target, basis, label } => {
                    let dim = self.register(target).map_or(1, |r| r.levels.dim());
                    basis.projectors(dim).map_err(wrap)?;
                    if !labels.insert(label.as_str()) {
                        return Err(wrap(Error::InvalidTimeline(format!(
                            "measurement label `{label}` is used twice"
                        ))));
                    }
                }
                Action::PostSelect { target, basis, outcome } => {
                    let dim = self.register(target).map_or(1, |r| r.levels.dim());
                    let n = basis.projectors(dim).map_err(wrap)?.len();
                    if *outcome >= n {
                        return Err(wrap(Error::InvalidArgument(format!(
                            "outcome {outcome} out of range for a {n}-outcome basis"
                        ))));
                    }
                }
                Action::Wait => {}
            }
        }
        for ((id, _), pending) in in_flight {
            if pending > 0 && !self.abandoned.contains(id) {
                return Err(Error::InvalidTimeline(format!(
                    "`{id}` is sent but never received; list it as abandoned to allow this"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn qubit_register(id: &str, owner: Actor) -> Register {
        Register::new(id, owner, EnergySpec::qubit(1.0).unwrap(), StateSpec::default())
    }

    #[test]
    fn frame_bookkeeping() {
        let f = ClockFrame::new(2.0, 5.0);
        assert_eq!(f.delta(), 3.0);
        assert_eq!(f.shifted(1.5).delta(), 3.0);
        assert_eq!(f.absolute(Actor::Bob, 1.0), 6.0);
        assert_eq!(f.proper(Actor::Alice, 6.0), 4.0);
        assert_eq!(f.with_delta(-1.0), ClockFrame::new(2.0, 1.0));
    }

    #[test]
    fn state_specs() {
        let u = StateSpec::Uniform.resolve(4).unwrap();
        assert!(u.iter().all(|z| (z - Complex64::new(0.25, 0.0)).norm() < 1e-15));
        assert!(StateSpec::Basis { index: 2 }.resolve(2).is_err());
        assert!(StateSpec::Amplitudes { amplitudes: vec![ONE, ONE] }.resolve(2).is_err());
    }

    #[test]
    fn bases_are_complete() {
        for basis in [BasisSpec::Energy, BasisSpec::X, BasisSpec::Y] {
            let ps = basis.projectors(2).unwrap();
            let sum = ps.iter().fold(CMatrix::zeros(2, 2), |acc, p| acc + p);
            assert!(max_abs_diff(&sum, &CMatrix::identity(2, 2)) < 1e-15);
        }
        assert!(BasisSpec::X.projectors(3).is_err());
        let skewed = BasisSpec::Custom {
            vectors: vec![vec![ONE, ZERO], vec![ONE, ONE]],
        };
        assert!(skewed.projectors(2).is_err());
    }

    #[test]
    fn validation_catches_structural_errors() {
        let regs = vec![qubit_register("q", Actor::Alice)];
        let send = Event::new(
            Actor::Alice,
            Schedule::at(0.0),
            Action::Send {
                subsystem: "q".into(),
                transit: 1.0,
            },
        );
        let unmatched = Timeline::new(regs.clone(), vec![send.clone()]);
        assert!(matches!(unmatched.validate(), Err(Error::InvalidTimeline(_))));
        let mut abandoned = unmatched.clone();
        abandoned.abandoned.push("q".into());
        abandoned.validate().unwrap();

        let receive_first = Timeline::new(
            regs.clone(),
            vec![Event::new(Actor::Bob, Schedule::at(0.0), Action::Receive { subsystem: "q".into() })],
        );
        assert!(receive_first.validate().is_err());

        let backwards = Timeline::new(
            regs.clone(),
            vec![
                Event::new(Actor::Alice, Schedule::at(2.0), Action::Wait),
                Event::new(Actor::Alice, Schedule::at(1.0), Action::Wait),
            ],
        );
        assert!(matches!(
            backwards.validate(),
            Err(Error::Event { index: 1, actor: Actor::Alice, .. })
        ));

        let dangling = Timeline::new(
            regs,
            vec![Event::new(Actor::Alice, Schedule::at(0.0), Action::Wait).when("nope", 0)],
        );
        assert!(dangling.validate().is_err());
    }

    #[test]
    fn event_serde_is_flat() {
        let e = Event::new(
            Actor::Bob,
            Schedule::after_arrival("clock", 0.5),
            Action::Measure {
                target: "clock".into(),
                basis: BasisSpec::X,
                label: "m".into(),
            },
        )
        .when("coin", 1);
        let json = serde_json::to_string(&e).unwrap();
        assert!(json.contains("\"action\":\"measure\""));
        assert!(json.contains("\"after_arrival\":\"clock\""));
        let back: Event = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);

        let text = r#"
            actor = "alice"
            proper_time = 1
            action = "apply_local"
            targets = ["q"]
            unitary = { gate = "phases", phases = [0.0, 1.5] }
        "#;
        let e: Event = toml::from_str(text).unwrap();
        assert_eq!(e.at, Schedule::at(1.0));
    }
}
