//! Scenario configuration files (TOML).
//!
//! Every section is parsed independently so that one bad section does not
//! hide problems in another; [`parse_config`] reports all of them.

use std::fmt;

use qsync_core::channel::PhaseModel;
use qsync_core::estimation::{linspace, NoiseAxis};
use qsync_core::hilbert::SubsystemId;
use qsync_core::timeline::{Builtin, Event, Register, Timeline};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

const SECTIONS: [&str; 8] = ["scenario", "channel", "frame", "run", "sweep", "estimate", "output", "seed"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// A scenario given inline as registers plus an event list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineScenario {
    pub registers: Vec<Register>,
    pub events: Vec<Event>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub abandoned: Vec<SubsystemId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Builtin(Builtin),
    Inline(InlineScenario),
}

impl ScenarioSource {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioSource::Builtin(b) => b.name(),
            ScenarioSource::Inline(_) => "inline",
        }
    }

    pub fn build(&self) -> qsync_core::Result<Timeline> {
        match self {
            ScenarioSource::Builtin(b) => b.build(),
            ScenarioSource::Inline(s) => {
                let mut t = Timeline::new(s.registers.clone(), s.events.clone());
                t.abandoned = s.abandoned.clone();
                Ok(t)
            }
        }
    }
}

impl Serialize for ScenarioSource {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ScenarioSource::Builtin(b) => b.serialize(serializer),
            ScenarioSource::Inline(s) => {
                #[derive(Serialize)]
                struct Tagged<'a> {
                    name: &'static str,
                    #[serde(flatten)]
                    inner: &'a InlineScenario,
                }
                Tagged { name: "inline", inner: s }.serialize(serializer)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Range {
    fn values(&self) -> Vec<f64> {
        linspace(self.from, self.to, self.points)
    }
}

/// The hidden offset: one value, an explicit grid or an evenly spaced range.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_range: Option<Range>,
}

impl FrameSpec {
    pub fn deltas(&self) -> Vec<f64> {
        match (&self.delta, &self.delta_grid, &self.delta_range) {
            (Some(d), _, _) => vec![*d],
            (_, Some(g), _) => g.clone(),
            (_, _, Some(r)) => r.values(),
            _ => vec![0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunMode {
    #[default]
    Exact,
    Sampled { shots: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Epsilon,
    Sigma,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::Sigma => "sigma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Candidate offsets for maximum-likelihood estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<Range>,
}

impl EstimateSpec {
    pub fn candidates(&self) -> Vec<f64> {
        match (&self.grid, &self.range) {
            (Some(g), _) => g.clone(),
            (_, Some(r)) => r.values(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub scenario: ScenarioSource,
    pub channel: PhaseModel,
    pub frame: FrameSpec,
    pub run: RunMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateSpec>,
    pub output: OutputSpec,
}

impl ScenarioConfig {
    /// The scenario with the configured channel applied.
    pub fn timeline(&self) -> qsync_core::Result<Timeline> {
        Ok(self.scenario.build()?.with_channel(self.channel.clone()))
    }

    /// The channel models to run, one per sweep value (or just the
    /// configured one), each with the swept value if any.
    pub fn noise_points(&self) -> qsync_core::Result<Vec<(Option<f64>, PhaseModel)>> {
        match &self.sweep {
            None => Ok(vec![(noise_value(&self.channel), self.channel.clone())]),
            Some(s) => {
                let axis = self.axis().expect("validated sweep matches the channel");
                let mut values = s.values.clone();
                values.sort_by(f64::total_cmp);
                values.into_iter().map(|v| Ok((Some(v), axis.model(v)?))).collect()
            }
        }
    }

    pub fn axis(&self) -> Option<NoiseAxis> {
        match (self.sweep.as_ref()?.parameter, &self.channel) {
            (SweepParameter::Epsilon, PhaseModel::Mixture { .. }) => Some(NoiseAxis::Epsilon),
            (SweepParameter::Sigma, PhaseModel::RandomDelay { distribution, .. }) => Some(NoiseAxis::Sigma {
                distribution: *distribution,
            }),
            _ => None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize to TOML")
    }
}

fn noise_value(model: &PhaseModel) -> Option<f64> {
    match model {
        PhaseModel::Mixture { epsilon } => Some(*epsilon),
        PhaseModel::RandomDelay { sigma, .. } => Some(*sigma),
        PhaseModel::Noiseless { .. } | PhaseModel::FullyRandom => None,
    }
}

/// Values the command line may override before validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    parse_config_with(text, Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: Overrides) -> Result<ScenarioConfig, ConfigErrors> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigError {
            field: "config".into(),
            message: e.message().trim().to_string(),
        }])
    })?;
    if let Some(seed) = overrides.seed {
        match i64::try_from(seed) {
            Ok(s) => {
                table.insert("seed".into(), Value::Integer(s));
            }
            Err(_) => {
                return Err(ConfigErrors(vec![ConfigError {
                    field: "seed".into(),
                    message: format!("{seed} does not fit a TOML integer"),
                }]))
            }
        }
    }
    if let Some(format) = overrides.format {
        let output = table
            .entry("output")
            .or_insert_with(|| Value::Table(Table::new()));
        if let Value::Table(t) = output {
            t.insert("format".into(), Value::String(format.extension().into()));
        }
    }
    Validator::default().run(table)
}

#[derive(Default)]
struct Validator {
    errors: Vec<ConfigError>,
}

impl Validator {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ConfigError {
            field: field.into(),
            message: message.into(),
        });
    }

    fn section<T: DeserializeOwned>(&mut self, table: &Table, key: &str) -> Option<Option<T>> {
        let value = table.get(key)?;
        match value.clone().try_into::<T>() {
            Ok(v) => Some(Some(v)),
            Err(e) => {
                self.push(key, e.message().trim().to_string());
                Some(None)
            }
        }
    }

    fn run(mut self, table: Table) -> Result<ScenarioConfig, ConfigErrors> {
        for key in table.keys() {
            if !SECTIONS.contains(&key.as_str()) {
                self.push(key.as_str(), format!("unknown section; expected one of {}", SECTIONS.join(", ")));
            }
        }
        let seed = match table.get("seed") {
            None => None,
            Some(Value::Integer(s)) if *s >= 0 => Some(*s as u64),
            Some(other) => {
                self.push("seed", format!("expected a non-negative integer, got {other}"));
                None
            }
        };
        let scenario = self.scenario(&table);
        let channel = self.section::<PhaseModel>(&table, "channel").unwrap_or(Some(PhaseModel::default()));
        if let Some(c) = &channel {
            self.check_channel(c);
        }
        let frame = self.section::<FrameSpec>(&table, "frame").unwrap_or(Some(FrameSpec::default()));
        if let Some(f) = &frame {
            self.check_frame(f);
        }
        let run = self.section::<RunMode>(&table, "run").unwrap_or(Some(RunMode::Exact));
        if let Some(RunMode::Sampled { shots }) = run {
            if shots == 0 {
                self.push("run.shots", "must be at least 1");
            }
            if seed.is_none() {
                self.push("seed", "required in sampled mode");
            }
        }
        let sweep = self.section::<SweepSpec>(&table, "sweep");
        if let (Some(Some(s)), Some(c)) = (&sweep, &channel) {
            self.check_sweep(s, c);
        }
        let estimate = self.section::<EstimateSpec>(&table, "estimate");
        if let Some(Some(e)) = &estimate {
            self.check_estimate(e);
            if matches!(run, Some(RunMode::Exact)) {
                self.push("estimate", "offset estimation needs `run.mode = \"sampled\"`");
            }
        }
        let output = self.section::<OutputSpec>(&table, "output").unwrap_or(Some(OutputSpec::default()));

        if let (Some(s), Some(c)) = (&scenario, &channel) {
            if let Err(e) = s.build().and_then(|t| t.with_channel(c.clone()).validate()) {
                self.push("scenario", e.to_string());
            }
        }
        if !self.errors.is_empty() {
            return Err(ConfigErrors(self.errors));
        }
        Ok(ScenarioConfig {
            seed,
            scenario: scenario.expect("no errors"),
            channel: channel.expect("no errors"),
            frame: frame.expect("no errors"),
            run: run.expect("no errors"),
            sweep: sweep.flatten(),
            estimate: estimate.flatten(),
            output: output.expect("no errors"),
        })
    }

    fn scenario(&mut self, table: &Table) -> Option<ScenarioSource> {
        let Some(value) = table.get("scenario") else {
            self.push("scenario", "missing; give a builtin `name` or `name = \"inline\"` with registers and events");
            return None;
        };
        let Some(section) = value.as_table() else {
            self.push("scenario", "expected a table");
            return None;
        };
        let Some(name) = section.get("name").and_then(Value::as_str) else {
            self.push("scenario.name", "missing or not a string");
            return None;
        };
        if name == "inline" {
            let mut rest = section.clone();
            rest.remove("name");
            match Value::Table(rest).try_into::<InlineScenario>() {
                Ok(s) => Some(ScenarioSource::Inline(s)),
                Err(e) => {
                    self.push("scenario", e.message().trim().to_string());
                    None
                }
            }
        } else {
            match value.clone().try_into::<Builtin>() {
                Ok(b) => Some(ScenarioSource::Builtin(b)),
                Err(e) => {
                    self.push("scenario", e.message().trim().to_string());
                    None
                }
            }
        }
    }

    fn check_channel(&mut self, c: &PhaseModel) {
        match c {
            PhaseModel::Noiseless { fixed_delay } => {
                if !(fixed_delay.is_finite() && *fixed_delay >= 0.0) {
                    self.push("channel.fixed_delay", format!("{fixed_delay} is negative or not finite"));
                }
            }
            PhaseModel::Mixture { epsilon } => self.check_epsilon("channel.epsilon", *epsilon),
            PhaseModel::RandomDelay { sigma, .. } => self.check_sigma("channel.sigma", *sigma),
            PhaseModel::FullyRandom => {}
        }
    }

    fn check_epsilon(&mut self, field: &str, epsilon: f64) {
        if !(0.0..=1.0).contains(&epsilon) {
            self.push(field, format!("{epsilon} is outside the legal range [0, 1]"));
        }
    }

    fn check_sigma(&mut self, field: &str, sigma: f64) {
        if !(sigma.is_finite() && sigma >= 0.0) {
            self.push(field, format!("{sigma} is outside the legal range [0, inf)"));
        }
    }

    fn check_range(&mut self, field: &str, r: &Range) {
        if !(r.from.is_finite() && r.to.is_finite()) {
            self.push(field, "bounds must be finite");
        } else if r.from > r.to {
            self.push(field, format!("`from` ({}) exceeds `to` ({})", r.from, r.to));
        }
        if r.points == 0 {
            self.push(format!("{field}.points"), "must be at least 1");
        }
    }

    fn check_grid(&mut self, field: &str, grid: &[f64]) {
        if grid.is_empty() {
            self.push(field, "must not be empty");
        }
        for (i, v) in grid.iter().enumerate() {
            if !v.is_finite() {
                self.push(format!("{field}[{i}]"), format!("{v} is not finite"));
            }
        }
    }

    fn check_frame(&mut self, f: &FrameSpec) {
        let given = [f.delta.is_some(), f.delta_grid.is_some(), f.delta_range.is_some()];
        if given.iter().filter(|g| **g).count() > 1 {
            self.push("frame", "give only one of `delta`, `delta_grid` and `delta_range`");
        }
        if let Some(d) = f.delta {
            if !d.is_finite() {
                self.push("frame.delta", format!("{d} is not finite"));
            }
        }
        if let Some(g) = &f.delta_grid {
            self.check_grid("frame.delta_grid", g);
        }
        if let Some(r) = &f.delta_range {
            self.check_range("frame.delta_range", r);
        }
    }

    fn check_sweep(&mut self, s: &SweepSpec, channel: &PhaseModel) {
        let matches = matches!(
            (s.parameter, channel),
            (SweepParameter::Epsilon, PhaseModel::Mixture { .. }) | (SweepParameter::Sigma, PhaseModel::RandomDelay { .. })
        );
        if !matches {
            self.push(
                "sweep.parameter",
                format!("`{}` is not a parameter of channel model `{}`", s.parameter.name(), channel.name()),
            );
        }
        self.check_grid("sweep.values", &s.values);
        for (i, &v) in s.values.iter().enumerate() {
            let field = format!("sweep.values[{i}]");
            match s.parameter {
                SweepParameter::Epsilon => self.check_epsilon(&field, v),
                SweepParameter::Sigma => self.check_sigma(&field, v),
            }
        }
    }

    fn check_estimate(&mut self, e: &EstimateSpec) {
        match (&e.grid, &e.range) {
            (Some(_), Some(_)) => self.push("estimate", "give only one of `grid` and `range`"),
            (None, None) => self.push("estimate", "needs a candidate `grid` or `range`"),
            (Some(g), None) => self.check_grid("estimate.grid", g),
            (None, Some(r)) => self.check_range("estimate.range", r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
name = "eddington"

[channel]
model = "mixture"
epsilon = 1.0

[frame]
delta = 0.0
"#;

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.scenario.name(), "eddington");
        assert_eq!(c.channel, PhaseModel::Mixture { epsilon: 1.0 });
        assert_eq!(c.run, RunMode::Exact);
        assert_eq!(c.frame.deltas(), vec![0.0]);
    }

    #[test]
    fn every_problem_is_reported() {
        let text = r#"
[scenario]
name = "eddington"
transit = -1.0

[channel]
model = "mixture"
epsilon = 1.5

[run]
mode = "sampled"
shots = 100

[frame]
delta = 0.0
delta_grid = [0.0, 1.0]
"#;
        let errs = parse_config(text).unwrap_err().0;
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"channel.epsilon"), "{errs:?}");
        assert!(fields.contains(&"seed"));
        assert!(fields.contains(&"frame"));
        assert!(fields.contains(&"scenario"));
        let eps = errs.iter().find(|e| e.field == "channel.epsilon").unwrap();
        assert!(eps.message.contains("[0, 1]"));
    }

    #[test]
    fn unknown_names_are_rejected() {
        let errs = parse_config("[scenario]\nname = \"ramsey\"\n[channel]\nmodel = \"thermal\"\n").unwrap_err().0;
        assert_eq!(errs.len(), 2, "{errs:?}");
        let errs = parse_config("[scenario]\nname = \"eddington\"\n[extras]\nx = 1\n").unwrap_err().0;
        assert_eq!(errs[0].field, "extras");
    }

    #[test]
    fn sweep_must_belong_to_the_channel() {
        let text = format!("{MINIMAL}\n[sweep]\nparameter = \"sigma\"\nvalues = [0.0, 1.0]\n");
        let errs = parse_config(&text).unwrap_err().0;
        assert_eq!(errs[0].field, "sweep.parameter");
        let text = format!("{MINIMAL}\n[sweep]\nparameter = \"epsilon\"\nvalues = [0.5, 0.0, 1.2]\n");
        let errs = parse_config(&text).unwrap_err().0;
        assert_eq!(errs[0].field, "sweep.values[2]");
    }

    #[test]
    fn overrides_apply_before_validation() {
        let text = format!("{MINIMAL}\n[run]\nmode = \"sampled\"\nshots = 10\n");
        assert!(parse_config(&text).is_err());
        let c = parse_config_with(
            &text,
            Overrides {
                seed: Some(3),
                format: Some(Format::Json),
            },
        )
        .unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.output.format, Format::Json);
    }

    #[test]
    fn serialization_round_trips() {
        let text = format!(
            "seed = 7\n{MINIMAL}\n[run]\nmode = \"sampled\"\nshots = 10\n[sweep]\nparameter = \"epsilon\"\nvalues = [0.0, 0.5]\n[estimate]\nrange = {{ from = -0.5, to = 0.5, points = 11 }}\n"
        );
        let c = parse_config(&text).unwrap();
        let again = parse_config(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }
}
