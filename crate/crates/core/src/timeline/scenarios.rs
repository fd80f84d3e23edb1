//! Ready-made synchronization protocols.
//!
//! Every builder returns a [`Timeline`] with a noiseless channel and `Δ = 0`;
//! use [`Timeline::with_channel`] and [`Timeline::with_delta`] to vary them.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::{Action, Actor, BasisSpec, Event, Register, Schedule, StateSpec, Timeline, UnitarySpec};
use crate::error::{Error, Result};
use crate::hilbert::{EnergySpec, SubsystemId, INPUT_TOL};
use crate::linalg::ZERO;

pub const CLOCK: &str = "clock";
pub const COIN: &str = "coin";
pub const PROBE: &str = "probe";
pub const MEMORY: &str = "memory";
pub const PAIR_A: &str = "pair_a";
pub const PAIR_B: &str = "pair_b";
/// Label of Bob's readout-basis choice (0 = X, 1 = Y).
pub const BASIS_LABEL: &str = "basis";
/// Label of Bob's clock readout.
pub const READOUT_LABEL: &str = "readout";

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")))
    }
}

fn non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be >= 0, got {value}")))
    }
}

fn ev(actor: Actor, at: Schedule, action: Action) -> Event {
    Event::new(actor, at, action)
}

/// How Bob reads the clock he received.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// A fair coin (a degenerate qubit in `|+⟩`) picks X or Y; the clock
    /// is then measured in that basis. Outcomes are labelled
    /// [`BASIS_LABEL`] and [`READOUT_LABEL`].
    #[default]
    Xy,
    /// No measurement; Bob only marks his proper time so his final state is
    /// taken there.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EddingtonParams {
    pub omega: f64,
    pub transit: f64,
    pub measure_delay: f64,
    pub readout: Readout,
}

impl Default for EddingtonParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            transit: 1.0,
            measure_delay: 2.0,
            readout: Readout::Xy,
        }
    }
}

/// Slow clock transfer: Alice prepares a qubit clock (levels `0, ω`) in
/// `|+⟩` at her `τ = 0` and sends it; Bob receives it and reads it at his
/// proper time `measure_delay`.
///
/// Without noise Bob's clock phase is `ω (measure_delay + Δ)`, so
/// `⟨X⟩ = cos φ` and `⟨Y⟩ = -sin φ`. The phase identifies `Δ` on any window
/// shorter than `2π/ω`; `measure_delay` must exceed `transit - Δ` so the
/// clock has arrived.
pub fn scenario_eddington(omega: f64, transit: f64, measure_delay: f64) -> Result<Timeline> {
    eddington(&EddingtonParams {
        omega,
        transit,
        measure_delay,
        readout: Readout::Xy,
    })
}

pub fn eddington(p: &EddingtonParams) -> Result<Timeline> {
    positive("omega", p.omega)?;
    positive("transit", p.transit)?;
    positive("measure_delay", p.measure_delay)?;
    let mut registers = vec![Register::new(
        CLOCK,
        Actor::Alice,
        EnergySpec::qubit(p.omega)?,
        StateSpec::default(),
    )];
    let mut events = vec![
        ev(
            Actor::Alice,
            Schedule::at(0.0),
            Action::Prepare {
                targets: vec![CLOCK.into()],
                state: StateSpec::Uniform,
            },
        ),
        ev(
            Actor::Alice,
            Schedule::at(0.0),
            Action::Send {
                subsystem: CLOCK.into(),
                transit: p.transit,
            },
        ),
        ev(
            Actor::Bob,
            Schedule::after_arrival(CLOCK, 0.0),
            Action::Receive { subsystem: CLOCK.into() },
        ),
    ];
    push_readout(&mut registers, &mut events, p.readout, p.measure_delay)?;
    Ok(Timeline::new(registers, events))
}

fn push_readout(registers: &mut Vec<Register>, events: &mut Vec<Event>, readout: Readout, at: f64) -> Result<()> {
    match readout {
        Readout::None => events.push(ev(Actor::Bob, Schedule::at(at), Action::Wait)),
        Readout::Xy => {
            registers.push(Register::new(COIN, Actor::Bob, EnergySpec::degenerate(2)?, StateSpec::Uniform));
            events.extend([
                // controlled-S† maps the Y eigenbasis onto the X eigenbasis
                ev(
                    Actor::Bob,
                    Schedule::at(at),
                    Action::ApplyLocal {
                        targets: vec![COIN.into(), CLOCK.into()],
                        unitary: UnitarySpec::Phases {
                            phases: vec![0.0, 0.0, 0.0, FRAC_PI_2],
                        },
                    },
                ),
                ev(
                    Actor::Bob,
                    Schedule::at(at),
                    Action::Measure {
                        target: COIN.into(),
                        basis: BasisSpec::Energy,
                        label: BASIS_LABEL.into(),
                    },
                ),
                ev(
                    Actor::Bob,
                    Schedule::at(at),
                    Action::Measure {
                        target: CLOCK.into(),
                        basis: BasisSpec::X,
                        label: READOUT_LABEL.into(),
                    },
                ),
            ]);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EinsteinParams {
    pub omega: f64,
    pub transit_out: f64,
    pub transit_back: f64,
    /// Bob's proper-time delay between receiving and returning the probe.
    pub dwell: f64,
    /// Alice's proper time of emission.
    pub send_time: f64,
}

impl Default for EinsteinParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            transit_out: 1.0,
            transit_back: 1.0,
            dwell: 0.0,
            send_time: 0.0,
        }
    }
}

/// Round-trip signalling: Alice prepares a qubit probe in `|+⟩` and sends
/// it at `τ_s`; Bob returns it on arrival; Alice receives it at `τ_r`. See
/// [`einstein_estimate`](super::einstein_estimate) for the one-way estimate.
pub fn scenario_einstein(transit_out: f64, transit_back: f64) -> Result<Timeline> {
    einstein(&EinsteinParams {
        transit_out,
        transit_back,
        ..EinsteinParams::default()
    })
}

pub fn einstein(p: &EinsteinParams) -> Result<Timeline> {
    positive("omega", p.omega)?;
    positive("transit_out", p.transit_out)?;
    positive("transit_back", p.transit_back)?;
    non_negative("dwell", p.dwell)?;
    non_negative("send_time", p.send_time)?;
    let registers = vec![Register::new(
        PROBE,
        Actor::Alice,
        EnergySpec::qubit(p.omega)?,
        StateSpec::default(),
    )];
    let events = vec![
        ev(
            Actor::Alice,
            Schedule::at(p.send_time),
            Action::Prepare {
                targets: vec![PROBE.into()],
                state: StateSpec::Uniform,
            },
        ),
        ev(
            Actor::Alice,
            Schedule::at(p.send_time),
            Action::Send {
                subsystem: PROBE.into(),
                transit: p.transit_out,
            },
        ),
        ev(
            Actor::Bob,
            Schedule::after_arrival(PROBE, 0.0),
            Action::Receive { subsystem: PROBE.into() },
        ),
        ev(
            Actor::Bob,
            Schedule::after_arrival(PROBE, p.dwell),
            Action::Send {
                subsystem: PROBE.into(),
                transit: p.transit_back,
            },
        ),
        ev(
            Actor::Alice,
            Schedule::after_arrival(PROBE, 0.0),
            Action::Receive { subsystem: PROBE.into() },
        ),
    ];
    Ok(Timeline::new(registers, events))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntangledParams {
    /// `χ[a][b]`, the amplitude of `|a⟩|b⟩`.
    pub chi: Vec<Vec<Complex64>>,
    /// Level spacing of Alice's half.
    pub omega_a: f64,
    /// Level spacing of the transmitted half; `0` makes it degenerate.
    pub omega_b: f64,
    pub transit: f64,
    /// Bob's proper time for his final state.
    pub measure_delay: f64,
    /// Optional local unitary Bob applies at `measure_delay`.
    pub bob_unitary: Option<UnitarySpec>,
}

impl Default for EntangledParams {
    fn default() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            chi: vec![vec![h, ZERO], vec![ZERO, h]],
            omega_a: 1.0,
            omega_b: 1.0,
            transit: 1.0,
            measure_delay: 2.0,
            bob_unitary: None,
        }
    }
}

/// Alice prepares `Σ χ_ab |a⟩|b⟩` on two registers she holds and sends the
/// second to Bob.
pub fn scenario_entangled_distribution(chi: &[Vec<Complex64>]) -> Result<Timeline> {
    entangled_distribution(&EntangledParams {
        chi: chi.to_vec(),
        ..EntangledParams::default()
    })
}

pub fn entangled_distribution(p: &EntangledParams) -> Result<Timeline> {
    positive("omega_a", p.omega_a)?;
    non_negative("omega_b", p.omega_b)?;
    positive("transit", p.transit)?;
    positive("measure_delay", p.measure_delay)?;
    let da = p.chi.len();
    let db = p.chi.first().map_or(0, Vec::len);
    if da == 0 || db == 0 || p.chi.iter().any(|row| row.len() != db) {
        return Err(Error::InvalidArgument("chi must be a non-empty rectangular table".into()));
    }
    let norm: f64 = p.chi.iter().flatten().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > INPUT_TOL {
        return Err(Error::InvalidState(format!("chi has squared norm {norm}, expected 1")));
    }
    let levels_b = if p.omega_b == 0.0 {
        EnergySpec::degenerate(db)?
    } else {
        EnergySpec::ladder(db, p.omega_b)?
    };
    let registers = vec![
        Register::new(PAIR_A, Actor::Alice, EnergySpec::ladder(da, p.omega_a)?, StateSpec::default()),
        Register::new(PAIR_B, Actor::Alice, levels_b, StateSpec::default()),
    ];
    let mut events = vec![
        ev(
            Actor::Alice,
            Schedule::at(0.0),
            Action::Prepare {
                targets: vec![PAIR_A.into(), PAIR_B.into()],
                state: StateSpec::Amplitudes {
                    amplitudes: p.chi.iter().flatten().copied().collect(),
                },
            },
        ),
        ev(
            Actor::Alice,
            Schedule::at(0.0),
            Action::Send {
                subsystem: PAIR_B.into(),
                transit: p.transit,
            },
        ),
        ev(
            Actor::Bob,
            Schedule::after_arrival(PAIR_B, 0.0),
            Action::Receive { subsystem: PAIR_B.into() },
        ),
    ];
    events.push(match &p.bob_unitary {
        Some(u) => ev(
            Actor::Bob,
            Schedule::at(p.measure_delay),
            Action::ApplyLocal {
                targets: vec![PAIR_B.into()],
                unitary: u.clone(),
            },
        ),
        None => ev(Actor::Bob, Schedule::at(p.measure_delay), Action::Wait),
    });
    Ok(Timeline::new(registers, events))
}

/// Insert a post-selection of `target` on `outcome` of `basis`, performed by
/// `actor` at `proper_time`. The event is placed after every event of that
/// actor scheduled no later than `proper_time`.
pub fn scenario_postselect(
    base: &Timeline,
    actor: Actor,
    target: impl Into<SubsystemId>,
    outcome: usize,
    proper_time: f64,
    basis: BasisSpec,
) -> Result<Timeline> {
    non_negative("proper_time", proper_time)?;
    let target = target.into();
    if base.register(&target).is_none() {
        return Err(Error::UnknownSubsystem(target));
    }
    let insert_at = base
        .events
        .iter()
        .rposition(|e| {
            e.actor == actor && matches!(e.at, Schedule::Proper { proper_time: tau } if tau <= proper_time)
        })
        .map_or_else(
            || base.events.iter().position(|e| e.actor == actor).unwrap_or(base.events.len()),
            |i| i + 1,
        );
    let mut out = base.clone();
    out.events.insert(
        insert_at,
        ev(
            actor,
            Schedule::at(proper_time),
            Action::PostSelect { target, basis, outcome },
        ),
    );
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostselectedEddingtonParams {
    pub eddington: EddingtonParams,
    /// Alice's proper time of the post-selection (after her send).
    pub select_time: f64,
}

impl Default for PostselectedEddingtonParams {
    fn default() -> Self {
        Self {
            eddington: EddingtonParams::default(),
            select_time: 0.5,
        }
    }
}

/// Eddington transfer with a delayed, heralded preparation: Alice entangles
/// the clock with a degenerate memory qubit, `(|0⟩|0⟩ + |1⟩|1⟩)/√2`, sends
/// the clock, and later post-selects the memory on `|+⟩`. Survival is 1/2
/// and the surviving runs carry a clock prepared in `|+⟩` at `τ = 0`.
pub fn postselected_eddington(p: &PostselectedEddingtonParams) -> Result<Timeline> {
    non_negative("select_time", p.select_time)?;
    let mut t = eddington(&p.eddington)?;
    t.registers.insert(
        0,
        Register::new(MEMORY, Actor::Alice, EnergySpec::degenerate(2)?, StateSpec::default()),
    );
    t.events[0] = ev(
        Actor::Alice,
        Schedule::at(0.0),
        Action::Prepare {
            targets: vec![MEMORY.into(), CLOCK.into()],
            state: StateSpec::Amplitudes {
                amplitudes: {
                    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                    vec![h, ZERO, ZERO, h]
                },
            },
        },
    );
    scenario_postselect(&t, Actor::Alice, MEMORY, 0, p.select_time, BasisSpec::X)
}

/// Builtin scenarios by name, with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Builtin {
    Eddington(EddingtonParams),
    Einstein(EinsteinParams),
    EntangledDistribution(EntangledParams),
    PostselectedEddington(PostselectedEddingtonParams),
}

impl Builtin {
    pub fn build(&self) -> Result<Timeline> {
        match self {
            Builtin::Eddington(p) => eddington(p),
            Builtin::Einstein(p) => einstein(p),
            Builtin::EntangledDistribution(p) => entangled_distribution(p),
            Builtin::PostselectedEddington(p) => postselected_eddington(p),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Eddington(_) => "eddington",
            Builtin::Einstein(_) => "einstein",
            Builtin::EntangledDistribution(_) => "entangled_distribution",
            Builtin::PostselectedEddington(_) => "postselected_eddington",
        }
    }
}
