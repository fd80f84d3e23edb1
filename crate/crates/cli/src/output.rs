use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qsync_core::timeline::StampKind;

use crate::config::Format;
use crate::execute::{Report, SummaryRow};

pub const SUMMARY_COLUMNS: [&str; 7] = [
    "noise_value",
    "delta",
    "trace_distance_max",
    "qfi",
    "mle_estimate",
    "mle_stderr",
    "shots",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = SUMMARY_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let fields = [
            opt(r.noise_value),
            num(r.delta),
            opt(r.trace_distance_max),
            opt(r.qfi),
            opt(r.mle_estimate),
            opt(r.mle_stderr),
            r.shots.map(|s| s.to_string()).unwrap_or_default(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn outcomes_csv(report: &Report) -> String {
    let mut out = String::from("noise_value,delta,outcome,probability,count\n");
    for o in &report.outcomes {
        let count = o.count.map(|c| c.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{count}",
            opt(o.noise_value),
            num(o.delta),
            quote(&o.outcome),
            num(o.probability)
        )
        .unwrap();
    }
    out
}

fn timing_csv(report: &Report) -> String {
    let mut out = String::from("noise_value,delta,actor,event,subsystem,kind,pti_mean,pti_std,samples\n");
    for t in &report.timing {
        let kind = match t.kind {
            StampKind::Send => "send",
            StampKind::Receive => "receive",
        };
        writeln!(
            out,
            "{},{},{},{},{},{kind},{},{},{}",
            opt(t.noise_value),
            num(t.delta),
            t.actor.to_string().to_lowercase(),
            t.event,
            quote(&t.subsystem),
            num(t.pti_mean),
            num(t.pti_std),
            t.samples
        )
        .unwrap();
    }
    out
}

fn states_csv(report: &Report) -> String {
    let mut out = String::from("noise_value,delta,party,subsystems,row,col,re,im\n");
    for s in &report.states {
        let subsystems = s.state.subsystems.iter().map(|id| id.as_str()).collect::<Vec<_>>().join(" ");
        let rho = &s.state.rho;
        for i in 0..rho.nrows() {
            for j in 0..rho.ncols() {
                writeln!(
                    out,
                    "{},{},{},{},{i},{j},{},{}",
                    opt(s.noise_value),
                    num(s.delta),
                    s.party,
                    quote(&subsystems),
                    num(rho[(i, j)].re),
                    num(rho[(i, j)].im)
                )
                .unwrap();
            }
        }
    }
    out
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    scenario: &'a str,
    columns: [&'static str; 7],
    rows: &'a [SummaryRow],
}

/// Render the output files as `(file name, contents)`.
pub fn render(report: &Report, format: Format) -> Vec<(String, String)> {
    let ext = format.extension();
    let files = match format {
        Format::Csv => [
            summary_csv(&report.summary),
            outcomes_csv(report),
            timing_csv(report),
            states_csv(report),
        ],
        Format::Json => [
            json(&SummaryJson {
                scenario: &report.scenario,
                columns: SUMMARY_COLUMNS,
                rows: &report.summary,
            }),
            json(&report.outcomes),
            json(&report.timing),
            json(&report.states),
        ],
    };
    ["summary", "outcomes", "timing", "states"]
        .into_iter()
        .zip(files)
        .map(|(stem, contents)| (format!("{stem}.{ext}"), contents))
        .collect()
}

pub fn write_report(report: &Report, dir: &Path, format: Format) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    render(report, format)
        .into_iter()
        .map(|(name, contents)| {
            let path = dir.join(name);
            fs::write(&path, contents)?;
            Ok(path)
        })
        .collect()
}

/// The one-line console summary of a table row.
pub fn summary_line(r: &SummaryRow) -> String {
    let show = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
    let mut line = format!(
        "noise={} delta={:.6} trace_distance_max={} qfi={}",
        r.noise_value.map_or_else(|| "-".to_string(), |v| format!("{v}")),
        r.delta,
        show(r.trace_distance_max),
        show(r.qfi)
    );
    if let Some(shots) = r.shots {
        write!(line, " shots={shots}").unwrap();
    }
    if let Some(est) = r.mle_estimate {
        write!(line, " mle={est:.6} stderr={}", show(r.mle_stderr)).unwrap();
    }
    line
}
