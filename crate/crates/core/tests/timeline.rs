use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use qsync_core::channel::{DelayDistribution, PhaseModel};
use qsync_core::estimation::{qfi_with, trace_distance, DEFAULT_STEP};
use qsync_core::hilbert::EnergySpec;
use qsync_core::linalg::{self, max_abs_diff, CMatrix, ONE, ZERO};
use qsync_core::timeline::scenarios::{
    self, EddingtonParams, EinsteinParams, EntangledParams, PostselectedEddingtonParams, Readout, BASIS_LABEL,
    CLOCK, PAIR_A, PAIR_B, PROBE, READOUT_LABEL,
};
use qsync_core::timeline::{
    bloch_vector, einstein_estimate, run_exact, run_exact_with, run_sampled, scenario_postselect, Action, Actor,
    BasisSpec, ClockFrame, Event, Register, RunOptions, Schedule, StateSpec, TieBreak, Timeline, UnitarySpec,
};
use qsync_core::Error;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn eddington_plain(omega: f64) -> Timeline {
    scenarios::eddington(&EddingtonParams {
        omega,
        transit: 1.0,
        measure_delay: 2.0,
        readout: Readout::None,
    })
    .unwrap()
}

/// Clock phase Bob should see: the qubit evolves freely from Alice's τ=0 to
/// Bob's τ_m, plus the channel's fixed delay.
fn eddington_phase(omega: f64, measure_delay: f64, delta: f64, fixed_delay: f64) -> f64 {
    omega * (measure_delay + delta + fixed_delay)
}

#[test]
fn empty_timeline_keeps_initial_product() {
    let regs = vec![
        Register::new("a", Actor::Alice, EnergySpec::qubit(1.0).unwrap(), StateSpec::Uniform),
        Register::new("b", Actor::Bob, EnergySpec::qubit(2.0).unwrap(), StateSpec::Basis { index: 1 }),
    ];
    let t = Timeline::new(regs, vec![]).with_frame(ClockFrame::new(0.5, -1.0));
    let r = run_exact(&t).unwrap();
    assert_eq!(r.branches.len(), 1);
    assert!(r.branches[0].outcomes.is_empty());
    // each party's state sits at its own clock origin
    assert!(max_abs_diff(&r.rho_a.rho, &linalg::pure_state(&[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)])) < 1e-14);
    assert!(max_abs_diff(&r.rho_b.rho, &linalg::pure_state(&[ZERO, ONE])) < 1e-15);
    assert_eq!(r.survival, 1.0);
}

#[test]
fn noiseless_eddington_phase_bookkeeping() {
    let omega = 1.3;
    for (delta, d) in [(0.0, 0.0), (0.4, 0.0), (-0.7, 0.25), (1.9, 1.0)] {
        let t = eddington_plain(omega)
            .with_channel(PhaseModel::Noiseless { fixed_delay: d })
            .with_delta(delta);
        let r = run_exact(&t).unwrap();
        let [x, y, z] = bloch_vector(&r.rho_b.rho).unwrap();
        let phi = eddington_phase(omega, 2.0, delta, d);
        assert!((x - phi.cos()).abs() < 1e-12, "delta={delta}");
        assert!((y + phi.sin()).abs() < 1e-12, "delta={delta}");
        assert!(z.abs() < 1e-12);
    }
}

#[test]
fn eddington_readout_probabilities() {
    let omega = 0.8;
    let t = scenarios::scenario_eddington(omega, 1.0, 2.0).unwrap();
    for delta in [-0.3, 0.0, 0.6] {
        let r = run_exact(&t.clone().with_delta(delta)).unwrap();
        let phi = eddington_phase(omega, 2.0, delta, 0.0);
        let dist = r.outcome_distribution();
        assert_eq!(dist.len(), 4);
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let joint = |basis: usize, out: usize| {
            r.branches
                .iter()
                .filter(|b| b.outcome(BASIS_LABEL) == Some(basis) && b.outcome(READOUT_LABEL) == Some(out))
                .map(|b| b.probability)
                .sum::<f64>()
        };
        assert!((joint(0, 0) - 0.25 * (1.0 + phi.cos())).abs() < 1e-12);
        assert!((joint(1, 0) - 0.25 * (1.0 - phi.sin())).abs() < 1e-12);
        assert!((r.probability_of(BASIS_LABEL, 1) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn fully_random_eddington_is_maximally_mixed() {
    let half = CMatrix::identity(2, 2) * c(0.5);
    for delta in [-1.0, 0.0, 0.37] {
        let t = eddington_plain(1.0).with_channel(PhaseModel::FullyRandom).with_delta(delta);
        let r = run_exact(&t).unwrap();
        assert!(max_abs_diff(&r.rho_b.rho, &half) < 1e-15);
        let xy = scenarios::scenario_eddington(1.0, 1.0, 2.0)
            .unwrap()
            .with_channel(PhaseModel::FullyRandom)
            .with_delta(delta);
        for (_, p) in run_exact(&xy).unwrap().outcome_distribution() {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }
}

#[test]
fn mixture_scales_received_coherence() {
    for eps in [0.0, 0.2, 0.5, 0.9, 1.0] {
        let t = eddington_plain(1.0).with_channel(PhaseModel::mixture(eps).unwrap());
        let r = run_exact(&t).unwrap();
        assert!((r.rho_b.rho[(0, 1)].norm() - 0.5 * (1.0 - eps)).abs() < 1e-12);
    }
}

#[test]
fn sampled_frequencies_match_born_probabilities() {
    let t = scenarios::scenario_eddington(1.0, 1.0, 2.0)
        .unwrap()
        .with_channel(PhaseModel::mixture(0.3).unwrap())
        .with_delta(0.2);
    let exact = run_exact(&t).unwrap().outcome_distribution();
    let shots = 10_000;
    let records = run_sampled(&t, shots, 7).unwrap();
    for (key, p) in exact {
        let n = records.iter().filter(|r| r.branches[0].outcome_key() == key).count();
        let freq = n as f64 / shots as f64;
        let se = (p * (1.0 - p) / shots as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * se, "{key:?}: {freq} vs {p}");
    }
}

#[test]
fn fully_random_sampled_readout_is_fair() {
    let shots = 10_000;
    for delta in [-0.5, 0.0, 0.5] {
        let t = scenarios::scenario_eddington(1.0, 1.0, 2.0)
            .unwrap()
            .with_channel(PhaseModel::FullyRandom)
            .with_delta(delta);
        let records = run_sampled(&t, shots, 11).unwrap();
        let plus = records
            .iter()
            .filter(|r| r.branches[0].outcome(BASIS_LABEL) == Some(0) && r.branches[0].outcome(READOUT_LABEL) == Some(0))
            .count() as f64;
        let x_shots = records.iter().filter(|r| r.branches[0].outcome(BASIS_LABEL) == Some(0)).count() as f64;
        let freq = plus / x_shots;
        assert!((freq - 0.5).abs() < 3.0 * (0.25 / x_shots).sqrt(), "delta={delta}: {freq}");
    }
}

#[test]
fn single_sampled_shot_is_one_pure_trajectory() {
    let t = eddington_plain(1.0).with_channel(PhaseModel::FullyRandom);
    let records = run_sampled(&t, 1, 3).unwrap();
    assert_eq!(records.len(), 1);
    let rho = &records[0].rho_b.rho;
    let purity = linalg::trace(&(rho * rho)).re;
    assert!((purity - 1.0).abs() < 1e-12);
    assert!(run_sampled(&t, 0, 3).is_err());
}

#[test]
fn sampled_runs_are_reproducible() {
    let t = scenarios::scenario_eddington(1.0, 1.0, 2.0).unwrap().with_channel(PhaseModel::mixture(0.5).unwrap());
    assert_eq!(run_sampled(&t, 50, 99).unwrap(), run_sampled(&t, 50, 99).unwrap());
    assert_ne!(run_sampled(&t, 50, 99).unwrap(), run_sampled(&t, 50, 100).unwrap());
}

#[test]
fn noiseless_einstein_recovers_transit() {
    for (out, back, dwell) in [(1.0, 1.0, 0.0), (2.5, 2.5, 0.7), (0.3, 0.3, 1.5)] {
        let t = scenarios::einstein(&EinsteinParams {
            transit_out: out,
            transit_back: back,
            dwell,
            ..EinsteinParams::default()
        })
        .unwrap()
        .with_delta(0.9);
        let r = run_exact(&t).unwrap();
        assert!((einstein_estimate(&r.branches[0], &PROBE.into()).unwrap() - out).abs() < 1e-12);
    }
    // asymmetric legs: the estimate is their mean
    let t = scenarios::scenario_einstein(1.0, 3.0).unwrap();
    let r = run_exact(&t).unwrap();
    assert!((einstein_estimate(&r.branches[0], &PROBE.into()).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn einstein_under_delay_jitter_is_unbiased() {
    let sigma = 0.2;
    let t = scenarios::scenario_einstein(5.0, 5.0)
        .unwrap()
        .with_channel(PhaseModel::random_delay(sigma, DelayDistribution::Uniform).unwrap());
    let records = run_sampled(&t, 2_000, 5).unwrap();
    let est: Vec<f64> = records
        .iter()
        .map(|r| einstein_estimate(&r.branches[0], &PROBE.into()).unwrap())
        .collect();
    let mean = est.iter().sum::<f64>() / est.len() as f64;
    let se = sigma / 2f64.sqrt() / (est.len() as f64).sqrt();
    assert!((mean - 5.0).abs() < 4.0 * se);
}

fn returned_probe(model: PhaseModel) -> impl Fn(f64) -> qsync_core::Result<CMatrix> {
    move |transit| {
        let t = scenarios::scenario_einstein(transit, transit).unwrap().with_channel(model.clone());
        Ok(run_exact(&t)?.rho_a.rho)
    }
}

#[test]
fn einstein_returned_state_and_transit() {
    let none = qfi_with("transit", returned_probe(PhaseModel::FullyRandom), 1.0, DEFAULT_STEP, 1e-12).unwrap();
    assert!(none.qfi <= 1e-8);
    let some = qfi_with("transit", returned_probe(PhaseModel::noiseless()), 1.0, DEFAULT_STEP, 1e-12).unwrap();
    // Alice's proper time of receipt, 2T, sets the probe phase: QFI = (2ω)²
    assert!((some.qfi - 4.0).abs() < 1e-4);
}

fn chi_oracle(chi: &[Vec<Complex64>], omega_a: f64, omega_b: f64, t: f64) -> CMatrix {
    // free evolution of both halves for time t
    let amps: Vec<Complex64> = chi
        .iter()
        .enumerate()
        .flat_map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(move |(b, x)| x * linalg::phase((a as f64 * omega_a + b as f64 * omega_b) * t))
        })
        .collect();
    linalg::pure_state(&amps)
}

fn sample_chi() -> Vec<Vec<Complex64>> {
    let raw = [[0.5, 0.1, -0.3], [0.2, 0.6, 0.15], [-0.25, 0.3, 0.2]];
    let norm: f64 = raw.iter().flatten().map(|x: &f64| x * x).sum::<f64>().sqrt();
    raw.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, x)| Complex64::from_polar(x / norm, 0.3 * i as f64 - 0.2 * j as f64))
                .collect()
        })
        .collect()
}

#[test]
fn entangled_distribution_noiseless_matches_oracle() {
    let chi = sample_chi();
    let p = EntangledParams {
        chi: chi.clone(),
        omega_a: 0.7,
        omega_b: 1.1,
        transit: 1.0,
        measure_delay: 2.0,
        bob_unitary: None,
    };
    let t = scenarios::entangled_distribution(&p).unwrap().with_delta(0.5);
    let r = run_exact(&t).unwrap();
    assert_eq!(r.rho_ab.subsystems, vec![PAIR_A.into(), PAIR_B.into()]);
    // run ends at Bob's wait, absolute time Δ + measure_delay
    let expected = chi_oracle(&chi, 0.7, 1.1, 2.5);
    assert!(max_abs_diff(&r.rho_ab.rho, &expected) < 1e-12);
}

#[test]
fn entangled_distribution_fully_random_kills_cross_energy_coherence() {
    let chi = sample_chi();
    let p = EntangledParams {
        chi: chi.clone(),
        ..EntangledParams::default()
    };
    let t = scenarios::entangled_distribution(&p).unwrap().with_channel(PhaseModel::FullyRandom);
    let r = run_exact(&t).unwrap();
    let rho = &r.rho_ab.rho;
    let ideal = chi_oracle(&chi, p.omega_a, p.omega_b, 2.0);
    for i in 0..9 {
        for j in 0..9 {
            let (bi, bj) = (i % 3, j % 3);
            if bi == bj {
                assert!((rho[(i, j)] - ideal[(i, j)]).norm() < 1e-12);
            } else {
                assert_eq!(rho[(i, j)], ZERO);
            }
        }
    }
    let family = |delta: f64| Ok(run_exact(&t.clone().with_delta(delta))?.rho_b.rho);
    assert!(qfi_with("delta", family, 0.0, DEFAULT_STEP, 1e-12).unwrap().qfi <= 1e-8);
}

#[test]
fn degenerate_half_survives_full_dephasing() {
    let h = c(FRAC_1_SQRT_2);
    let p = EntangledParams {
        chi: vec![vec![h, ZERO], vec![ZERO, h]],
        omega_a: 1.0,
        omega_b: 0.0,
        ..EntangledParams::default()
    };
    let t = scenarios::entangled_distribution(&p).unwrap().with_channel(PhaseModel::FullyRandom);
    let r = run_exact(&t).unwrap();
    let rb = &r.rho_b.rho;
    assert!((linalg::von_neumann_entropy_bits(rb) - 1.0).abs() < 1e-10);
    let purity = linalg::trace(&(&r.rho_ab.rho * &r.rho_ab.rho)).re;
    assert!((purity - 1.0).abs() < 1e-12);
}

#[test]
fn entangled_distribution_rejects_unnormalized_chi() {
    let err = scenarios::scenario_entangled_distribution(&[vec![ONE, ONE]]).unwrap_err();
    assert!(matches!(err, Error::InvalidState(_)));
}

fn bell_pair_timeline() -> Timeline {
    let regs = vec![
        Register::new("q1", Actor::Alice, EnergySpec::qubit(1.0).unwrap(), StateSpec::default()),
        Register::new("q2", Actor::Alice, EnergySpec::qubit(1.0).unwrap(), StateSpec::default()),
    ];
    let h = c(FRAC_1_SQRT_2);
    let events = vec![Event::new(
        Actor::Alice,
        Schedule::at(0.0),
        Action::Prepare {
            targets: vec!["q1".into(), "q2".into()],
            state: StateSpec::Amplitudes {
                amplitudes: vec![h, ZERO, ZERO, h],
            },
        },
    )];
    Timeline::new(regs, events)
}

#[test]
fn bell_postselection_collapses_partner() {
    let t = scenario_postselect(&bell_pair_timeline(), Actor::Alice, "q1", 0, 0.0, BasisSpec::Energy).unwrap();
    let r = run_exact(&t).unwrap();
    assert!((r.survival - 0.5).abs() < 1e-12);
    let q2 = linalg::pure_state(&[ONE, ZERO]);
    let expected = linalg::kron(&q2, &q2);
    assert!(max_abs_diff(&r.rho_a.rho, &expected) < 1e-12);
}

#[test]
fn postselecting_a_product_ancilla_leaves_the_rest_alone() {
    let mut base = eddington_plain(1.0).with_channel(PhaseModel::mixture(0.3).unwrap());
    base.registers.push(Register::new(
        "ancilla",
        Actor::Alice,
        EnergySpec::degenerate(2).unwrap(),
        StateSpec::Uniform,
    ));
    let plain = run_exact(&base).unwrap();
    let selected = run_exact(&scenario_postselect(&base, Actor::Alice, "ancilla", 0, 0.5, BasisSpec::X).unwrap()).unwrap();
    assert!((selected.survival - 1.0).abs() < 1e-12);
    assert!(max_abs_diff(&plain.rho_b.rho, &selected.rho_b.rho) < 1e-12);
    let half = run_exact(&scenario_postselect(&base, Actor::Alice, "ancilla", 1, 0.5, BasisSpec::Energy).unwrap()).unwrap();
    assert!((half.survival - 0.5).abs() < 1e-12);
    assert!(max_abs_diff(&plain.rho_b.rho, &half.rho_b.rho) < 1e-12);
}

#[test]
fn impossible_postselection_is_an_error() {
    // with ω = π the clock phase at τ_m = 2 is 2π, so Bob holds exactly |+⟩
    let base = eddington_plain(PI);
    let t = scenario_postselect(&base, Actor::Bob, CLOCK, 1, 2.0, BasisSpec::X).unwrap();
    let err = run_exact(&t).unwrap_err();
    match err {
        Error::Event { actor, source, .. } => {
            assert_eq!(actor, Actor::Bob);
            assert!(matches!(*source, Error::ImpossibleBranch { outcome: 1, .. }));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn postselected_eddington_heralds_the_clock() {
    let p = PostselectedEddingtonParams {
        eddington: EddingtonParams {
            readout: Readout::None,
            ..EddingtonParams::default()
        },
        select_time: 0.5,
    };
    let t = scenarios::postselected_eddington(&p).unwrap().with_delta(0.3);
    let r = run_exact(&t).unwrap();
    assert!((r.survival - 0.5).abs() < 1e-12);
    let [x, y, _] = bloch_vector(&r.rho_b.rho).unwrap();
    let phi = eddington_phase(1.0, 2.0, 0.3, 0.0);
    assert!((x - phi.cos()).abs() < 1e-12 && (y + phi.sin()).abs() < 1e-12);
    let noisy = t.with_channel(PhaseModel::FullyRandom);
    let a = run_exact(&noisy.clone().with_delta(-0.8)).unwrap().rho_b.rho;
    let b = run_exact(&noisy.with_delta(0.8)).unwrap().rho_b.rho;
    assert!(trace_distance(&a, &b).unwrap() <= 1e-10);
}

#[test]
fn sampled_postselection_rejects_about_half() {
    let p = PostselectedEddingtonParams::default();
    let t = scenarios::postselected_eddington(&p).unwrap();
    let records = run_sampled(&t, 4_000, 1).unwrap();
    let kept = records.iter().filter(|r| r.survived()).count() as f64 / 4_000.0;
    assert!((kept - 0.5).abs() < 3.0 * (0.25f64 / 4_000.0).sqrt());
}

#[test]
fn acting_on_a_foreign_subsystem_reports_event_and_actor() {
    let mut t = eddington_plain(1.0);
    t.events.push(Event::new(
        Actor::Alice,
        Schedule::at(5.0),
        Action::ApplyLocal {
            targets: vec![CLOCK.into()],
            unitary: UnitarySpec::PauliX,
        },
    ));
    match run_exact(&t).unwrap_err() {
        Error::Event { index, actor, source } => {
            assert_eq!((index, actor), (4, Actor::Alice));
            assert!(matches!(*source, Error::WrongOwner { .. }));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn measuring_before_arrival_is_rejected() {
    // Bob's readout at τ=0.5 but the clock only arrives at τ=1
    let t = scenarios::eddington(&EddingtonParams {
        measure_delay: 0.5,
        ..EddingtonParams::default()
    })
    .unwrap();
    assert!(matches!(run_exact(&t), Err(Error::Event { actor: Actor::Bob, .. })));
}

#[test]
fn deadlock_is_reported() {
    let regs = vec![
        Register::new("a", Actor::Alice, EnergySpec::qubit(1.0).unwrap(), StateSpec::default()),
        Register::new("b", Actor::Bob, EnergySpec::qubit(1.0).unwrap(), StateSpec::default()),
    ];
    // each party waits for the other's subsystem before sending its own
    let mut t = Timeline::new(
        regs,
        vec![
            Event::new(Actor::Bob, Schedule::after_arrival("a", 0.0), Action::Wait),
            Event::new(Actor::Bob, Schedule::at(0.0), Action::Send { subsystem: "b".into(), transit: 1.0 }),
            Event::new(Actor::Alice, Schedule::after_arrival("b", 0.0), Action::Receive { subsystem: "b".into() }),
            Event::new(Actor::Alice, Schedule::at(0.0), Action::Send { subsystem: "a".into(), transit: 1.0 }),
        ],
    );
    t.abandoned.push("a".into());
    t.validate().unwrap();
    match run_exact(&t).unwrap_err() {
        Error::Event { source, .. } => assert!(matches!(*source, Error::InvalidTimeline(_))),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn feed_forward_branches_on_outcome() {
    // Alice measures her half of a Bell pair; Bob flips his half when she
    // saw 1, so his qubit always ends in |0⟩.
    let mut t = bell_pair_timeline();
    t.events.extend([
        Event::new(Actor::Alice, Schedule::at(0.0), Action::Send { subsystem: "q2".into(), transit: 1.0 }),
        Event::new(
            Actor::Alice,
            Schedule::at(0.0),
            Action::Measure {
                target: "q1".into(),
                basis: BasisSpec::Energy,
                label: "m".into(),
            },
        ),
        Event::new(Actor::Bob, Schedule::after_arrival("q2", 0.0), Action::Receive { subsystem: "q2".into() }),
        Event::new(
            Actor::Bob,
            Schedule::at(3.0),
            Action::ApplyLocal {
                targets: vec!["q2".into()],
                unitary: UnitarySpec::PauliX,
            },
        )
        .when("m", 1),
    ]);
    let r = run_exact(&t).unwrap();
    assert_eq!(r.branches.len(), 2);
    assert!(max_abs_diff(&r.rho_b.rho, &linalg::pure_state(&[ONE, ZERO])) < 1e-12);
}

#[test]
fn simultaneous_events_commute() {
    let mut t = scenarios::scenario_eddington(1.0, 1.0, 1.0).unwrap().with_channel(PhaseModel::mixture(0.4).unwrap());
    // Alice acts at the very instant Bob reads the clock
    t.registers.push(Register::new("mine", Actor::Alice, EnergySpec::qubit(0.7).unwrap(), StateSpec::Uniform));
    t.events.push(Event::new(
        Actor::Alice,
        Schedule::at(1.0),
        Action::ApplyLocal {
            targets: vec!["mine".into()],
            unitary: UnitarySpec::Hadamard,
        },
    ));
    let a = run_exact_with(&t, RunOptions { tie_break: TieBreak::AliceFirst }).unwrap();
    let b = run_exact_with(&t, RunOptions { tie_break: TieBreak::BobFirst }).unwrap();
    assert!(max_abs_diff(&a.rho_ab.rho, &b.rho_ab.rho) < 1e-12);
    assert!(max_abs_diff(&a.rho_b.rho, &b.rho_b.rho) < 1e-12);
    let da = a.outcome_distribution();
    let db = b.outcome_distribution();
    for ((ka, pa), (kb, pb)) in da.iter().zip(&db) {
        assert_eq!(ka, kb);
        assert!((pa - pb).abs() < 1e-12);
    }
}

#[test]
fn two_rounds_compose_like_a_hand_built_timeline() {
    let round = eddington_plain(1.0).with_channel(PhaseModel::mixture(0.2).unwrap());
    let composed = round.with_prefix("r1.").then(&round.with_prefix("r2."), 3.0).unwrap();

    let qubit = || EnergySpec::qubit(1.0).unwrap();
    let prep = |id: &str, tau| {
        Event::new(Actor::Alice, Schedule::at(tau), Action::Prepare { targets: vec![id.into()], state: StateSpec::Uniform })
    };
    let send = |id: &str, tau| Event::new(Actor::Alice, Schedule::at(tau), Action::Send { subsystem: id.into(), transit: 1.0 });
    let recv = |id: &str| Event::new(Actor::Bob, Schedule::after_arrival(id, 0.0), Action::Receive { subsystem: id.into() });
    let wait = |tau| Event::new(Actor::Bob, Schedule::at(tau), Action::Wait);
    let hand = Timeline::new(
        vec![
            Register::new("r1.clock", Actor::Alice, qubit(), StateSpec::default()),
            Register::new("r2.clock", Actor::Alice, qubit(), StateSpec::default()),
        ],
        vec![
            prep("r1.clock", 0.0),
            send("r1.clock", 0.0),
            recv("r1.clock"),
            wait(2.0),
            prep("r2.clock", 3.0),
            send("r2.clock", 3.0),
            recv("r2.clock"),
            wait(5.0),
        ],
    )
    .with_channel(PhaseModel::mixture(0.2).unwrap());
    for delta in [0.0, 0.4] {
        let a = run_exact(&composed.clone().with_delta(delta)).unwrap();
        let b = run_exact(&hand.clone().with_delta(delta)).unwrap();
        assert!(max_abs_diff(&a.rho_ab.rho, &b.rho_ab.rho) < 1e-12);
        assert!(max_abs_diff(&a.rho_b.rho, &b.rho_b.rho) < 1e-12);
    }
}

#[test]
fn records_carry_proper_times_only() {
    let t = scenarios::scenario_einstein(1.5, 1.5).unwrap();
    let shifted = t.clone().with_frame(t.frame.shifted(1234.5));
    let a = run_exact(&t).unwrap();
    let b = run_exact(&shifted).unwrap();
    assert_eq!(a.branches[0].timestamps, b.branches[0].timestamps);
    let stamps: Vec<f64> = a.branches[0].timestamps.iter().map(|s| s.pti).collect();
    assert_eq!(stamps, vec![0.0, 1.5, 1.5, 3.0]);
    let json = serde_json::to_string(&a).unwrap();
    assert!(!json.contains("t0") && !json.contains("delta"));
}

#[test]
fn delay_jitter_is_symmetric_in_sampled_and_exact_runs() {
    let model = PhaseModel::random_delay(0.4, DelayDistribution::Gaussian).unwrap();
    let t = eddington_plain(1.0).with_channel(model);
    let exact = run_exact(&t).unwrap().rho_b.rho;
    let shots = 20_000;
    let records = run_sampled(&t, shots, 2).unwrap();
    let mean = records.iter().fold(CMatrix::zeros(2, 2), |acc, r| acc + &r.rho_b.rho) / c(shots as f64);
    assert!(max_abs_diff(&mean, &exact) < 0.02);
}
