use std::collections::BTreeMap;

use log::{debug, info};
use qsync_core::estimation::{count_outcomes, max_pairwise_distance, mle_from_counts, qfi, DEFAULT_STEP};
use qsync_core::rng::derive_seed;
use qsync_core::timeline::{
    run_exact, run_sampled, Action, Actor, BranchRecord, OutcomeKey, ReducedState, RunRecord, StampKind, Timeline,
};
use qsync_core::{PhaseModel, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunMode, ScenarioConfig};

/// Label used in outcome tables for shots removed by post-selection.
pub const REJECTED: &str = "rejected";

/// One line of the summary table. Measures that were not computed are `None`
/// and come out as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub noise_value: Option<f64>,
    pub delta: f64,
    pub trace_distance_max: Option<f64>,
    pub qfi: Option<f64>,
    pub mle_estimate: Option<f64>,
    pub mle_stderr: Option<f64>,
    pub shots: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeLine {
    pub noise_value: Option<f64>,
    pub delta: f64,
    /// `label=outcome` pairs in event order, or [`REJECTED`].
    pub outcome: String,
    pub probability: f64,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDump {
    pub noise_value: Option<f64>,
    pub delta: f64,
    pub party: &'static str,
    pub state: ReducedState,
}

/// Statistics of one send or receive proper time over branches (weighted
/// by probability) or over surviving sampled shots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingLine {
    pub noise_value: Option<f64>,
    pub delta: f64,
    pub actor: Actor,
    pub event: usize,
    pub subsystem: String,
    pub kind: StampKind,
    pub pti_mean: f64,
    pub pti_std: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Report {
    pub scenario: String,
    pub summary: Vec<SummaryRow>,
    pub outcomes: Vec<OutcomeLine>,
    pub timing: Vec<TimingLine>,
    pub states: Vec<StateDump>,
}

struct PointResult {
    row: SummaryRow,
    outcomes: Vec<OutcomeLine>,
    timing: Vec<TimingLine>,
    states: Vec<StateDump>,
}

pub fn execute(config: &ScenarioConfig) -> Result<Report> {
    let base = config.timeline()?;
    let deltas = config.frame.deltas();
    let points = config.noise_points()?;
    info!(
        "running {} with {} noise point(s) over {} offset(s)",
        config.scenario.name(),
        points.len(),
        deltas.len()
    );
    let results: Vec<PointResult> = points
        .par_iter()
        .enumerate()
        .map(|(i, (value, model))| run_point(config, &base, &deltas, i as u64, *value, model))
        .collect::<Result<_>>()?;
    let mut report = Report {
        scenario: config.scenario.name().to_string(),
        ..Report::default()
    };
    for r in results {
        report.summary.push(r.row);
        report.outcomes.extend(r.outcomes);
        report.timing.extend(r.timing);
        report.states.extend(r.states);
    }
    Ok(report)
}

fn midpoint(deltas: &[f64]) -> f64 {
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    0.5 * (lo + hi)
}

fn run_point(
    config: &ScenarioConfig,
    base: &Timeline,
    deltas: &[f64],
    index: u64,
    noise_value: Option<f64>,
    model: &PhaseModel,
) -> Result<PointResult> {
    let t = base.clone().with_channel(model.clone());
    let at = |d: f64| t.clone().with_delta(d);
    let delta = midpoint(deltas);
    debug!("noise point {index}: {} at delta {delta}", model.name());

    let trace_distance_max = if deltas.len() > 1 {
        let states = deltas
            .iter()
            .map(|&d| Ok(run_exact(&at(d))?.rho_b.rho))
            .collect::<Result<Vec<_>>>()?;
        Some(max_pairwise_distance(&states)?)
    } else {
        None
    };
    let fisher = qfi(|d| Ok(run_exact(&at(d))?.rho_b.rho), delta, DEFAULT_STEP)?;
    let record = run_exact(&at(delta))?;

    let mut row = SummaryRow {
        noise_value,
        delta,
        trace_distance_max,
        qfi: Some(fisher.qfi),
        mle_estimate: None,
        mle_stderr: None,
        shots: None,
    };
    let mut counts = None;
    let mut sampled = Vec::new();
    if let RunMode::Sampled { shots } = config.run {
        let seed = derive_seed(config.seed.expect("validated: sampled runs carry a seed"), index);
        sampled = run_sampled(&at(delta), shots, seed)?;
        let keys = sampled.iter().map(|r| r.survived().then(|| r.branches[0].outcome_key()));
        let accepted = sampled.iter().filter(|r| r.survived()).count();
        let c = count_outcomes(keys);
        if let Some(e) = &config.estimate {
            let est = mle_from_counts(&t, &c, &e.candidates(), seed, shots, accepted)?;
            row.mle_estimate = Some(est.estimate);
            row.mle_stderr = Some(est.stderr);
        }
        row.shots = Some(shots);
        counts = Some((c, shots - accepted));
    }

    let outcomes = outcome_lines(&t, &record, noise_value, delta, counts);
    let timing = if sampled.is_empty() {
        let weighted = record.branches.iter().map(|b| (b.probability, b));
        timing_lines(weighted, noise_value, delta)
    } else {
        let shots = sampled.iter().filter(|r| r.survived()).map(|r| (1.0, &r.branches[0]));
        timing_lines(shots, noise_value, delta)
    };
    let states = [("A", &record.rho_a), ("B", &record.rho_b), ("AB", &record.rho_ab)]
        .into_iter()
        .map(|(party, s)| StateDump {
            noise_value,
            delta,
            party,
            state: s.clone(),
        })
        .collect();
    Ok(PointResult {
        row,
        outcomes,
        timing,
        states,
    })
}

fn render_key(t: &Timeline, key: &OutcomeKey) -> String {
    if key.is_empty() {
        return "-".to_string();
    }
    key.iter()
        .map(|&(event, outcome)| match &t.events[event].action {
            Action::Measure { label, .. } => format!("{label}={outcome}"),
            _ => format!("#{event}={outcome}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn outcome_lines(
    t: &Timeline,
    record: &RunRecord,
    noise_value: Option<f64>,
    delta: f64,
    counts: Option<(BTreeMap<OutcomeKey, usize>, usize)>,
) -> Vec<OutcomeLine> {
    let exact: BTreeMap<OutcomeKey, f64> = record
        .outcome_distribution()
        .into_iter()
        .map(|(k, p)| (k, p * record.survival))
        .collect();
    let mut keys: Vec<&OutcomeKey> = exact.keys().collect();
    if let Some((c, _)) = &counts {
        keys.extend(c.keys().filter(|k| !exact.contains_key(*k)));
        keys.sort();
    }
    let mut lines: Vec<OutcomeLine> = keys
        .into_iter()
        .map(|k| OutcomeLine {
            noise_value,
            delta,
            outcome: render_key(t, k),
            probability: exact.get(k).copied().unwrap_or(0.0),
            count: counts.as_ref().map(|(c, _)| c.get(k).copied().unwrap_or(0)),
        })
        .collect();
    if record.survival < 1.0 {
        lines.push(OutcomeLine {
            noise_value,
            delta,
            outcome: REJECTED.to_string(),
            probability: 1.0 - record.survival,
            count: counts.as_ref().map(|(_, rejected)| *rejected),
        });
    }
    lines
}

fn timing_lines<'a>(
    branches: impl Iterator<Item = (f64, &'a BranchRecord)>,
    noise_value: Option<f64>,
    delta: f64,
) -> Vec<TimingLine> {
    let mut acc: BTreeMap<(usize, Actor, String, StampKind), Vec<(f64, f64)>> = BTreeMap::new();
    for (w, b) in branches {
        for s in &b.timestamps {
            acc.entry((s.event, s.actor, s.subsystem.to_string(), s.kind))
                .or_default()
                .push((w, s.pti));
        }
    }
    acc.into_iter()
        .map(|((event, actor, subsystem, kind), samples)| {
            let weight: f64 = samples.iter().map(|(w, _)| w).sum();
            let mean = samples.iter().map(|(w, x)| w * x).sum::<f64>() / weight;
            let var = samples.iter().map(|(w, x)| w * (x - mean).powi(2)).sum::<f64>() / weight;
            TimingLine {
                noise_value,
                delta,
                actor,
                event,
                subsystem,
                kind,
                pti_mean: mean,
                pti_std: var.sqrt(),
                samples: samples.len(),
            }
        })
        .collect()
}
