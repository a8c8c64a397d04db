//! CSV and weight files.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use pime_core::neuralnet::{serialize, GaussianPolicy, ValueNet};

use crate::episode::TraceRow;
use crate::error::{HarnessError, Result};
use crate::metrics::{EvalReport, SegmentMetrics};
use crate::train::DiagnosticsRow;

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "y", "y_ref", "u", "z", "reward", "model_id", "seed"];
pub const DIAGNOSTICS_HEADER: [&str; 10] = [
    "iteration",
    "env_steps",
    "mean_return",
    "std_return",
    "policy_loss",
    "value_loss",
    "entropy",
    "clip_frac",
    "approx_kl",
    "sigma",
];
pub const REPORT_HEADER: [&str; 8] =
    ["label", "model_id", "segment", "level", "return", "ss_error", "overshoot", "settling_steps"];

/// Nine significant digits.
pub fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => HarnessError::Format { path: path.into(), detail: format!("{other:?}") },
    }
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| HarnessError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// One file holding the trajectories of several episodes.
pub fn write_trajectories<'a>(
    path: &Path,
    seed: u64,
    episodes: impl IntoIterator<Item = (u64, &'a [TraceRow])>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(TRAJECTORY_HEADER).map_err(|e| csv_err(path, e))?;
    for (model_id, rows) in episodes {
        for r in rows {
            w.write_record([
                r.t.to_string(),
                fmt9(r.y),
                fmt9(r.y_ref),
                fmt9(r.u),
                fmt9(r.z),
                fmt9(r.reward),
                model_id.to_string(),
                seed.to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Appends rows as training proceeds, flushing after each one so an aborted
/// run keeps its log.
pub struct DiagnosticsWriter {
    path: PathBuf,
    file: File,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        writeln!(file, "{}", DIAGNOSTICS_HEADER.join(",")).map_err(|e| HarnessError::io(path, e))?;
        Ok(DiagnosticsWriter { path: path.into(), file })
    }

    pub fn write(&mut self, r: &DiagnosticsRow) -> Result<()> {
        let line = [
            r.iteration.to_string(),
            r.env_steps.to_string(),
            fmt9(r.mean_return),
            fmt9(r.std_return),
            fmt9(r.policy_loss),
            fmt9(r.value_loss),
            fmt9(r.entropy),
            fmt9(r.clip_frac),
            fmt9(r.approx_kl),
            fmt9(r.sigma),
        ]
        .join(",");
        writeln!(self.file, "{line}")
            .and_then(|_| self.file.flush())
            .map_err(|e| HarnessError::io(&self.path, e))
    }
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(REPORT_HEADER).map_err(|e| csv_err(path, e))?;
    for s in &report.segments {
        w.write_record([
            report.label.clone(),
            s.model_id.to_string(),
            s.segment.to_string(),
            fmt9(s.level),
            fmt9(s.ret),
            fmt9(s.ss_error),
            fmt9(s.overshoot),
            s.settling_steps.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Read a report file. All rows must share one label.
pub fn read_report(path: &Path) -> Result<EvalReport> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(HarnessError::Format { path: path.into(), detail: "not an evaluation report".into() });
    }
    let bad = |line: usize, what: &str| HarnessError::Format {
        path: path.into(),
        detail: format!("record {line}: bad {what}"),
    };
    let mut label: Option<String> = None;
    let mut segments = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let f = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(i + 1, REPORT_HEADER[k]));
        let n = |k: usize| rec[k].parse::<u64>().map_err(|_| bad(i + 1, REPORT_HEADER[k]));
        match &label {
            None => label = Some(rec[0].to_string()),
            Some(l) if l != &rec[0] => return Err(bad(i + 1, "label (mixed labels)")),
            _ => {}
        }
        segments.push(SegmentMetrics {
            model_id: n(1)?,
            segment: n(2)? as usize,
            level: f(3)?,
            ret: f(4)?,
            ss_error: f(5)?,
            overshoot: f(6)?,
            settling_steps: n(7)? as usize,
        });
    }
    Ok(EvalReport { label: label.unwrap_or_default(), segments })
}

pub fn save_weights(path: &Path, policy: &GaussianPolicy, value: &ValueNet) -> Result<()> {
    write_text(path, &serialize::encode(policy, value))
}

pub fn load_weights(path: &Path) -> Result<(GaussianPolicy, ValueNet)> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serialize::decode(&text).map_err(|e| HarnessError::Format { path: path.into(), detail: e.to_string() })
}
