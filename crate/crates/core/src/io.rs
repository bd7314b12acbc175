//! File formats: telemetry and force CSVs, JSON-lines event log, and the
//! versioned JSON documents.
//!
//! Floats are written in shortest round-trip form, so a trace written and
//! read back is bit-identical.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::gait::{
    analyze_traces, event_thresholds, Condition, Foot, FootForceTrace, GaitAnalysis, GaitFeatures,
    GroundTruth,
};
use crate::sim::{RunEvent, RunRecord, RunStatus, ScenarioConfig, TelemetryRow};
use crate::{Error, Result, SCHEMA_VERSION};

pub const TELEMETRY_FILE: &str = "telemetry.csv";
pub const FORCE_LEFT_FILE: &str = "force_left.csv";
pub const FORCE_RIGHT_FILE: &str = "force_right.csv";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const FEATURES_FILE: &str = "features.json";

pub fn write_telemetry_csv<W: Write>(writer: W, rows: &[TelemetryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record([
            "tick",
            "t",
            "region",
            "tau_cmd",
            "velocity",
            "position",
            "p_muscle",
            "f_left",
            "f_right",
            "valve",
            "tau_applied",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(writer: W, trace: &FootForceTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "force"])?;
    for &(t, f) in &trace.samples {
        w.write_record([t.to_string(), f.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a two-column `t,force` CSV. Row numbers in errors are file lines.
pub fn read_trace_csv<R: Read>(reader: R, foot: Foot) -> Result<FootForceTrace> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "force" {
        return Err(Error::Format {
            row: 1,
            reason: format!(
                "expected header `t,force`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut trace = FootForceTrace::new(foot);
    for (i, record) in r.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Format {
            row: line,
            reason: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::Format {
                row: line,
                reason: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let parse = |field: &str, name: &str| -> Result<f64> {
            field.trim().parse::<f64>().map_err(|_| Error::Format {
                row: line,
                reason: format!("`{field}` is not a number in column `{name}`"),
            })
        };
        trace.push(parse(&record[0], "t")?, parse(&record[1], "force")?);
    }
    Ok(trace)
}

pub fn write_events_jsonl<W: Write>(mut writer: W, events: &[RunEvent]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut writer, e)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Per-run features document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFeatures {
    pub schema_version: String,
    pub trial_id: String,
    pub condition: Condition,
    pub seed: u64,
    pub status: RunStatus,
    pub path_length: f64,
    pub exclude_first_steps: usize,
    pub features: Option<GaitFeatures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis_error: Option<String>,
    pub final_position: f64,
    pub end_time: f64,
    pub ground_truth: GroundTruth,
}

/// Features document produced from external traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: String,
    pub path_length: f64,
    pub exclude_first_steps: usize,
    pub features: GaitFeatures,
}

impl AnalysisReport {
    pub fn new(path_length: f64, exclude_first_steps: usize, features: GaitFeatures) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            path_length,
            exclude_first_steps,
            features,
        }
    }
}

/// Runs the trace pipeline on a simulated trial.
pub fn analyze_run(record: &RunRecord, config: &ScenarioConfig) -> Result<GaitAnalysis> {
    analyze_traces(
        &record.left,
        &record.right,
        config.target_distance,
        config.exclude_first_steps,
        &event_thresholds(),
    )
}

pub fn run_features(record: &RunRecord, config: &ScenarioConfig) -> RunFeatures {
    let (features, analysis_error) = match analyze_run(record, config) {
        Ok(a) => (Some(a.features), None),
        Err(e) => (None, Some(e.to_string())),
    };
    RunFeatures {
        schema_version: SCHEMA_VERSION.to_string(),
        trial_id: record.trial_id.clone(),
        condition: record.condition,
        seed: record.seed,
        status: record.status,
        path_length: config.target_distance,
        exclude_first_steps: config.exclude_first_steps,
        features,
        analysis_error,
        final_position: record.final_state.position,
        end_time: record.end_time,
        ground_truth: record.truth.clone(),
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Writes the five per-run files into `dir` and returns the features.
pub fn write_run_outputs(
    dir: &Path,
    record: &RunRecord,
    config: &ScenarioConfig,
) -> Result<RunFeatures> {
    fs::create_dir_all(dir)?;
    write_telemetry_csv(create(&dir.join(TELEMETRY_FILE))?, &record.telemetry)?;
    write_trace_csv(create(&dir.join(FORCE_LEFT_FILE))?, &record.left)?;
    write_trace_csv(create(&dir.join(FORCE_RIGHT_FILE))?, &record.right)?;
    write_events_jsonl(create(&dir.join(EVENTS_FILE))?, &record.events)?;
    let features = run_features(record, config);
    write_json(&dir.join(FEATURES_FILE), &features)?;
    Ok(features)
}

pub fn run_output_paths(dir: &Path) -> [PathBuf; 5] {
    [
        TELEMETRY_FILE,
        FORCE_LEFT_FILE,
        FORCE_RIGHT_FILE,
        EVENTS_FILE,
        FEATURES_FILE,
    ]
    .map(|f| dir.join(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::Region;

    fn trace() -> FootForceTrace {
        let mut t = FootForceTrace::new(Foot::Left);
        for k in 0..50 {
            t.push(k as f64 * 0.01, (k as f64 * 0.37).sin().abs() * 700.0 + 0.1);
        }
        t
    }

    #[test]
    fn trace_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace()).unwrap();
        let back = read_trace_csv(buf.as_slice(), Foot::Left).unwrap();
        assert_eq!(back, trace());
    }

    #[test]
    fn truncated_row_is_reported() {
        let text = "t,force\n0,0\n0.01,5\n0.02\n";
        assert!(matches!(
            read_trace_csv(text.as_bytes(), Foot::Right),
            Err(Error::Format { row: 4, .. })
        ));
        let text = "t,force\n0,0\n0.01,abc\n";
        assert!(matches!(
            read_trace_csv(text.as_bytes(), Foot::Right),
            Err(Error::Format { row: 3, .. })
        ));
        let text = "time,f\n0,0\n";
        assert!(matches!(
            read_trace_csv(text.as_bytes(), Foot::Right),
            Err(Error::Format { row: 1, .. })
        ));
    }

    #[test]
    fn telemetry_header_order() {
        let row = TelemetryRow {
            tick: 0,
            t: 0.0,
            region: Region::PositiveNeutral,
            tau_cmd: 0.0,
            velocity: 0.0,
            position: 0.0,
            p_muscle: 0.0,
            f_left: 700.0,
            f_right: 700.0,
            valve: false,
            tau_applied: 0.0,
        };
        let mut buf = Vec::new();
        write_telemetry_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "tick,t,region,tau_cmd,velocity,position,p_muscle,f_left,f_right,valve,tau_applied"
        );
        assert_eq!(
            lines.next().unwrap(),
            "0,0.0,PositiveNeutral,0.0,0.0,0.0,0.0,700.0,700.0,false,0.0"
        );
    }
}
