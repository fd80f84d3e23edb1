//! Discrete-event execution of a [`Timeline`].
//!
//! Each party runs its own event list in order. The engine repeatedly picks
//! the earliest runnable event in absolute time (ties go to Alice unless
//! configured otherwise), lets every subsystem evolve freely up to that
//! instant and applies the event. Channel noise is applied when a subsystem
//! is received: since free evolution runs continuously, the transit itself
//! only contributes the sector correlations.

use rand::Rng;
use rayon::prelude::*;

use super::model::{Action, Actor, Schedule, Timeline};
use super::record::{BranchRecord, OutcomeKey, OutcomeRow, ReducedState, RunRecord, StampKind, TimestampRow};
use crate::channel::{apply_realization_in_place, apply_transit_in_place, PhaseModel, PhaseRealization};
use crate::error::{Error, Result};
use crate::hilbert::{CompositeState, Owner, SubsystemId};
use crate::linalg::CMatrix;
use crate::rng::{self, SimRng};

/// Outcomes with probability at or below this are not branched on.
const BRANCH_FLOOR: f64 = 1e-15;
/// Post-selections with probability at or below this are impossible.
const IMPOSSIBLE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    AliceFirst,
    BobFirst,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub tie_break: TieBreak,
}

/// Run with the averaged channel, branching on every measurement outcome.
pub fn run_exact(t: &Timeline) -> Result<RunRecord> {
    run_exact_with(t, RunOptions::default())
}

pub fn run_exact_with(t: &Timeline, options: RunOptions) -> Result<RunRecord> {
    let compiled = Compiled::new(t, options)?;
    let mut finished = Vec::new();
    compiled.run(compiled.start(), &mut Mode::Exact, &mut finished)?;
    compiled.aggregate(finished)
}

/// `shots` independent trajectories. Shot `i` draws from the random stream
/// `(seed, i)`, so results do not depend on scheduling.
pub fn run_sampled(t: &Timeline, shots: usize, seed: u64) -> Result<Vec<RunRecord>> {
    let compiled = Compiled::new(t, RunOptions::default())?;
    require_shots(shots)?;
    (0..shots)
        .into_par_iter()
        .map(|i| {
            let b = compiled.shot(seed, i as u64)?;
            compiled.sampled_record(b)
        })
        .collect()
}

/// Outcome histories of `shots` trajectories, `None` for shots rejected by a
/// post-selection. Same streams as [`run_sampled`], without state snapshots.
pub fn sample_outcomes(t: &Timeline, shots: usize, seed: u64) -> Result<Vec<Option<OutcomeKey>>> {
    let compiled = Compiled::new(t, RunOptions::default())?;
    require_shots(shots)?;
    (0..shots)
        .into_par_iter()
        .map(|i| {
            let b = compiled.shot(seed, i as u64)?;
            Ok((!b.rejected).then(|| {
                let mut key: OutcomeKey = b.outcomes.iter().map(|o| (o.event, o.outcome)).collect();
                key.sort_unstable();
                key
            }))
        })
        .collect()
}

fn require_shots(shots: usize) -> Result<()> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    Ok(())
}

enum Op {
    Prepare { positions: Vec<usize>, sigma: CMatrix },
    Unitary { full: CMatrix },
    Send { id: SubsystemId, position: usize, transit: f64 },
    Receive { id: SubsystemId },
    Measure { projectors: Vec<CMatrix>, label: String },
    PostSelect { projector: CMatrix, target: SubsystemId, outcome: usize },
    Wait,
}

#[derive(Clone)]
struct Arrival {
    id: SubsystemId,
    to: Actor,
    at: f64,
    realization: Option<PhaseRealization>,
}

#[derive(Clone)]
struct Branch {
    state: CompositeState,
    now: f64,
    pc: [usize; 2],
    last: [Option<f64>; 2],
    arrivals: Vec<Arrival>,
    /// (label, outcome, absolute time)
    labels: Vec<(String, usize, f64)>,
    outcomes: Vec<OutcomeRow>,
    stamps: Vec<TimestampRow>,
    /// Product of the Born probabilities of the recorded outcomes.
    weight: f64,
    /// Product of the post-selection probabilities.
    survival: f64,
    rejected: bool,
    /// Sampled arrivals may come later than nominal; events that would then
    /// fall before an actor's previous event run right after it instead.
    defer_late: bool,
}

enum Mode<'r> {
    Exact,
    Sampled(&'r mut SimRng),
}

enum Flow {
    Continue,
    Split(Vec<Branch>),
    Stop,
}

enum Readiness {
    Done,
    Blocked(usize, String),
    Ready(usize, f64),
}

/// A timeline with every operator resolved and lifted to the full space.
struct Compiled<'t> {
    t: &'t Timeline,
    ops: Vec<Op>,
    owner_checks: Vec<Vec<SubsystemId>>,
    programs: [Vec<usize>; 2],
    initial: CompositeState,
    energies: Vec<f64>,
    sector_omegas: Vec<Vec<f64>>,
    t_start: f64,
    options: RunOptions,
}

impl<'t> Compiled<'t> {
    fn new(t: &'t Timeline, options: RunOptions) -> Result<Self> {
        t.validate()?;
        let t_start = t.frame.t0_a.min(t.frame.t0_b);
        let mut initial = CompositeState::empty();
        for r in &t.registers {
            let rho = r.initial.resolve(r.levels.dim())?;
            let mut s = CompositeState::from_density(r.id.clone(), r.levels.clone(), r.owner.owner(), rho)?;
            s.free_evolve_all(t_start - t.frame.origin(r.owner));
            initial = initial.tensor(&s)?;
        }
        let mut ops = Vec::with_capacity(t.events.len());
        let mut owner_checks = Vec::with_capacity(t.events.len());
        let mut programs = [Vec::new(), Vec::new()];
        for (index, e) in t.events.iter().enumerate() {
            programs[e.actor.index()].push(index);
            let (op, checks) = Self::compile(&initial, &e.action).map_err(|err| err.at_event(index, e.actor))?;
            ops.push(op);
            owner_checks.push(checks);
        }
        let energies = initial.basis_energies();
        let sector_omegas = initial.subsystems().iter().map(|(_, e)| e.sector_omegas()).collect();
        Ok(Self {
            t,
            ops,
            owner_checks,
            programs,
            initial,
            energies,
            sector_omegas,
            t_start,
            options,
        })
    }

    fn compile(s: &CompositeState, action: &Action) -> Result<(Op, Vec<SubsystemId>)> {
        let dim_of = |ids: &[SubsystemId]| -> Result<usize> {
            ids.iter().map(|id| s.energy(id).map(|e| e.dim())).product()
        };
        Ok(match action {
            Action::Prepare { targets, state } => (
                Op::Prepare {
                    positions: s.positions(targets)?,
                    sigma: state.resolve(dim_of(targets)?)?,
                },
                targets.clone(),
            ),
            Action::ApplyLocal { targets, unitary } => {
                let u = unitary.resolve(dim_of(targets)?)?;
                (
                    Op::Unitary {
                        full: s.lift(&s.positions(targets)?, &u),
                    },
                    targets.clone(),
                )
            }
            Action::Send { subsystem, transit } => (
                Op::Send {
                    id: subsystem.clone(),
                    position: s.position(subsystem)?,
                    transit: *transit,
                },
                vec![subsystem.clone()],
            ),
            Action::Receive { subsystem } => (Op::Receive { id: subsystem.clone() }, Vec::new()),
            Action::Measure { target, basis, label } => {
                let position = s.position(target)?;
                let projectors = basis
                    .projectors(s.energy(target)?.dim())?
                    .iter()
                    .map(|p| s.lift(&[position], p))
                    .collect();
                (
                    Op::Measure {
                        projectors,
                        label: label.clone(),
                    },
                    vec![target.clone()],
                )
            }
            Action::PostSelect { target, basis, outcome } => {
                let position = s.position(target)?;
                let p = basis
                    .projectors(s.energy(target)?.dim())?
                    .into_iter()
                    .nth(*outcome)
                    .ok_or_else(|| Error::InvalidArgument(format!("outcome {outcome} out of range")))?;
                (
                    Op::PostSelect {
                        projector: s.lift(&[position], &p),
                        target: target.clone(),
                        outcome: *outcome,
                    },
                    vec![target.clone()],
                )
            }
            Action::Wait => (Op::Wait, Vec::new()),
        })
    }

    fn start(&self) -> Branch {
        Branch {
            state: self.initial.clone(),
            now: self.t_start,
            pc: [0, 0],
            last: [None, None],
            arrivals: Vec::new(),
            labels: Vec::new(),
            outcomes: Vec::new(),
            stamps: Vec::new(),
            weight: 1.0,
            survival: 1.0,
            rejected: false,
            defer_late: false,
        }
    }

    fn shot(&self, seed: u64, index: u64) -> Result<Branch> {
        let mut rng = rng::stream(seed, index);
        let mut finished = Vec::with_capacity(1);
        let mut start = self.start();
        start.defer_late = matches!(self.t.channel, PhaseModel::RandomDelay { .. });
        self.run(start, &mut Mode::Sampled(&mut rng), &mut finished)?;
        Ok(finished.pop().expect("a sampled run ends in exactly one branch"))
    }

    fn run(&self, mut b: Branch, mode: &mut Mode<'_>, finished: &mut Vec<Branch>) -> Result<()> {
        loop {
            let Some((actor, index, at)) = self.next_event(&mut b)? else {
                finished.push(b);
                return Ok(());
            };
            b.state.free_evolve_with(&self.energies, at - b.now);
            b.now = at;
            b.last[actor.index()] = Some(at);
            b.pc[actor.index()] += 1;
            match self.execute(&mut b, actor, index, mode).map_err(|e| e.at_event(index, actor))? {
                Flow::Continue => {}
                Flow::Split(children) => {
                    for child in children {
                        self.run(child, mode, finished)?;
                    }
                    return Ok(());
                }
                Flow::Stop => {
                    finished.push(b);
                    return Ok(());
                }
            }
        }
    }

    fn next_event(&self, b: &mut Branch) -> Result<Option<(Actor, usize, f64)>> {
        let order = match self.options.tie_break {
            TieBreak::AliceFirst => [Actor::Alice, Actor::Bob],
            TieBreak::BobFirst => [Actor::Bob, Actor::Alice],
        };
        let mut best: Option<(Actor, usize, f64)> = None;
        let mut waiting: Option<(Actor, usize, String)> = None;
        for actor in order {
            match self.readiness(b, actor)? {
                Readiness::Done => {}
                Readiness::Blocked(index, why) => {
                    waiting.get_or_insert((actor, index, why));
                }
                Readiness::Ready(index, t) => {
                    if best.is_none_or(|(_, _, bt)| t < bt) {
                        best = Some((actor, index, t));
                    }
                }
            }
        }
        match (best, waiting) {
            (Some(next), _) => Ok(Some(next)),
            (None, Some((actor, index, why))) => {
                Err(Error::InvalidTimeline(format!("deadlock: {why}")).at_event(index, actor))
            }
            (None, None) => Ok(None),
        }
    }

    fn readiness(&self, b: &mut Branch, actor: Actor) -> Result<Readiness> {
        let ai = actor.index();
        loop {
            let Some(&index) = self.programs[ai].get(b.pc[ai]) else {
                return Ok(Readiness::Done);
            };
            let e = &self.t.events[index];
            let mut earliest = b.now;
            if let Some(c) = &e.when {
                match b.labels.iter().find(|(l, _, _)| *l == c.label) {
                    None => {
                        return Ok(Readiness::Blocked(index, format!("waiting for outcome `{}`", c.label)));
                    }
                    Some((_, outcome, _)) if *outcome != c.outcome => {
                        b.pc[ai] += 1;
                        continue;
                    }
                    Some((_, _, at)) => earliest = earliest.max(*at),
                }
            }
            let arrival = |id: &SubsystemId| b.arrivals.iter().find(|a| &a.id == id && a.to == actor).map(|a| a.at);
            let mut t = match &e.at {
                Schedule::Proper { proper_time } => self.t.frame.absolute(actor, *proper_time),
                Schedule::AfterArrival { after_arrival, delay } => match arrival(after_arrival) {
                    Some(at) => at + delay,
                    None => {
                        return Ok(Readiness::Blocked(
                            index,
                            format!("waiting for `{after_arrival}` to arrive"),
                        ))
                    }
                },
            };
            if let Action::Receive { subsystem } = &e.action {
                match arrival(subsystem) {
                    Some(at) => t = t.max(at),
                    None => {
                        return Ok(Readiness::Blocked(index, format!("waiting for `{subsystem}` to arrive")));
                    }
                }
            }
            if let Some(last) = b.last[ai] {
                if t < last && b.defer_late {
                    t = last;
                } else if t < last {
                    let frame = &self.t.frame;
                    return Err(Error::InvalidTimeline(format!(
                        "scheduled at proper time {} before the previous event at {}",
                        frame.proper(actor, t),
                        frame.proper(actor, last)
                    ))
                    .at_event(index, actor));
                }
            }
            return Ok(Readiness::Ready(index, t.max(earliest)));
        }
    }

    fn execute(&self, b: &mut Branch, actor: Actor, index: usize, mode: &mut Mode<'_>) -> Result<Flow> {
        b.state.require_owner(&self.owner_checks[index], actor.owner())?;
        let pti = self.t.frame.proper(actor, b.now);
        match &self.ops[index] {
            Op::Prepare { positions, sigma } => b.state.replace_at(positions, sigma),
            Op::Unitary { full } => b.state.conjugate_full(full),
            Op::Send { id, position, transit } => {
                b.state.transfer_in_place(id, Owner::Channel, b.now)?;
                let (realization, residence) = match mode {
                    Mode::Exact => (None, *transit),
                    Mode::Sampled(rng) => {
                        let r = self.t.channel.sample(&self.sector_omegas[*position], *rng);
                        // A delay realization shifts the whole signal: its
                        // phase by ω θ and its arrival by -θ.
                        let residence = r.delay.map_or(*transit, |theta| (transit - theta).max(0.0));
                        (Some(r), residence)
                    }
                };
                b.arrivals.retain(|a| &a.id != id);
                b.arrivals.push(Arrival {
                    id: id.clone(),
                    to: actor.other(),
                    at: b.now + residence,
                    realization,
                });
                b.stamps.push(TimestampRow {
                    actor,
                    event: index,
                    subsystem: id.clone(),
                    kind: StampKind::Send,
                    pti,
                });
            }
            Op::Receive { id } => {
                let realization = b
                    .arrivals
                    .iter()
                    .find(|a| &a.id == id && a.to == actor)
                    .and_then(|a| a.realization.clone());
                match realization {
                    Some(r) => apply_realization_in_place(&mut b.state, id, &r)?,
                    None => apply_transit_in_place(&mut b.state, id, &self.t.channel, 0.0)?,
                }
                b.state.transfer_in_place(id, actor.owner(), b.now)?;
                b.stamps.push(TimestampRow {
                    actor,
                    event: index,
                    subsystem: id.clone(),
                    kind: StampKind::Receive,
                    pti,
                });
            }
            Op::Measure { projectors, label } => {
                let probs: Vec<f64> = projectors.iter().map(|p| b.state.expectation_full(p).max(0.0)).collect();
                let record = |b: &mut Branch, k: usize, p: f64| {
                    b.state.conjugate_full(&projectors[k]);
                    b.state.normalize();
                    b.weight *= p;
                    b.labels.push((label.clone(), k, b.now));
                    b.outcomes.push(OutcomeRow {
                        actor,
                        label: label.clone(),
                        event: index,
                        pti,
                        outcome: k,
                        probability: p,
                    });
                };
                match mode {
                    Mode::Exact => {
                        let children = probs
                            .iter()
                            .enumerate()
                            .filter(|(_, &p)| p > BRANCH_FLOOR)
                            .map(|(k, &p)| {
                                let mut child = b.clone();
                                record(&mut child, k, p);
                                child
                            })
                            .collect();
                        return Ok(Flow::Split(children));
                    }
                    Mode::Sampled(rng) => {
                        let total: f64 = probs.iter().sum();
                        let u = rng.random::<f64>() * total;
                        let mut acc = 0.0;
                        let mut chosen = None;
                        for (k, &p) in probs.iter().enumerate() {
                            if p > BRANCH_FLOOR {
                                chosen = Some(k);
                                acc += p;
                                if u < acc {
                                    break;
                                }
                            }
                        }
                        let k = chosen.ok_or_else(|| Error::InvalidState("measurement with no possible outcome".into()))?;
                        record(b, k, probs[k]);
                    }
                }
            }
            Op::PostSelect { projector, target, outcome } => {
                let p = b.state.expectation_full(projector);
                if p <= IMPOSSIBLE {
                    return Err(Error::ImpossibleBranch {
                        target: target.clone(),
                        outcome: *outcome,
                    });
                }
                let keep = match mode {
                    Mode::Exact => {
                        b.survival *= p;
                        true
                    }
                    Mode::Sampled(rng) => rng.random::<f64>() < p,
                };
                if !keep {
                    b.rejected = true;
                    return Ok(Flow::Stop);
                }
                b.state.conjugate_full(projector);
                b.state.normalize();
            }
            Op::Wait => {}
        }
        Ok(Flow::Continue)
    }

    /// State of `actor`'s subsystems at that actor's last event (or clock
    /// origin if it never acted).
    fn snapshot(&self, b: &Branch, actor: Actor) -> Result<ReducedState> {
        let ids: Vec<SubsystemId> = b.state.ledger().owned_by(actor.owner()).cloned().collect();
        if ids.is_empty() {
            return Ok(ReducedState::trivial());
        }
        let at = b.last[actor.index()].unwrap_or(self.t.frame.origin(actor));
        let reduced = b.state.partial_trace(&ids)?.free_evolve(&ids, at - b.now)?;
        Ok(ReducedState {
            subsystems: reduced.ids().cloned().collect(),
            rho: reduced.rho().clone(),
        })
    }

    fn joint(&self, b: &Branch) -> Result<ReducedState> {
        let ids: Vec<SubsystemId> = b
            .state
            .ledger()
            .owners()
            .iter()
            .filter(|(_, &o)| o != Owner::Channel)
            .map(|(id, _)| id.clone())
            .collect();
        if ids.is_empty() {
            return Ok(ReducedState::trivial());
        }
        let reduced = b.state.partial_trace(&ids)?;
        Ok(ReducedState {
            subsystems: reduced.ids().cloned().collect(),
            rho: reduced.rho().clone(),
        })
    }

    fn branch_record(&self, b: &Branch, probability: f64) -> Result<BranchRecord> {
        Ok(BranchRecord {
            probability,
            outcomes: b.outcomes.clone(),
            timestamps: b.stamps.clone(),
            rho_a: self.snapshot(b, Actor::Alice)?,
            rho_b: self.snapshot(b, Actor::Bob)?,
        })
    }

    fn aggregate(&self, finished: Vec<Branch>) -> Result<RunRecord> {
        let survival: f64 = finished.iter().map(|b| b.weight * b.survival).sum();
        if !(survival > 0.0) {
            return Err(Error::InvalidTimeline("every branch has zero probability".into()));
        }
        let mut branches = Vec::with_capacity(finished.len());
        let mut joints = Vec::with_capacity(finished.len());
        for b in &finished {
            branches.push(self.branch_record(b, b.weight * b.survival / survival)?);
            joints.push(self.joint(b)?);
        }
        let weights: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        let rho_a = average(branches.iter().map(|b| &b.rho_a), &weights)?;
        let rho_b = average(branches.iter().map(|b| &b.rho_b), &weights)?;
        let rho_ab = average(joints.iter(), &weights)?;
        Ok(RunRecord {
            branches,
            rho_a,
            rho_b,
            rho_ab,
            survival,
        })
    }

    fn sampled_record(&self, b: Branch) -> Result<RunRecord> {
        let branch = self.branch_record(&b, 1.0)?;
        Ok(RunRecord {
            rho_a: branch.rho_a.clone(),
            rho_b: branch.rho_b.clone(),
            rho_ab: self.joint(&b)?,
            survival: if b.rejected { 0.0 } else { 1.0 },
            branches: vec![branch],
        })
    }
}

fn average<'a>(states: impl Iterator<Item = &'a ReducedState>, weights: &[f64]) -> Result<ReducedState> {
    let mut out: Option<ReducedState> = None;
    for (s, &w) in states.zip(weights) {
        let scaled = &s.rho * num_complex::Complex64::new(w, 0.0);
        match &mut out {
            None => {
                out = Some(ReducedState {
                    subsystems: s.subsystems.clone(),
                    rho: scaled,
                })
            }
            Some(acc) => {
                if acc.subsystems != s.subsystems {
                    return Err(Error::InvalidTimeline(
                        "outcome branches end with different subsystems held by the same party".into(),
                    ));
                }
                acc.rho += scaled;
            }
        }
    }
    Ok(out.unwrap_or_else(ReducedState::trivial))
}
