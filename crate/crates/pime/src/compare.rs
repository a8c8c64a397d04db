//! Side-by-side comparison of evaluation reports.

use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::io::fmt9;
use crate::metrics::{summarize, EvalReport, Summary};

pub const COMPARISON_HEADER: [&str; 13] = [
    "label",
    "segment",
    "level",
    "n",
    "return_mean",
    "return_std",
    "return_diff",
    "ss_error_mean",
    "ss_error_std",
    "overshoot_mean",
    "overshoot_std",
    "settling_mean",
    "settling_std",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub segment: usize,
    pub level: f64,
    /// Number of (report, model) pairs pooled.
    pub n: usize,
    pub ret: Summary,
    /// Mean return minus that of the first label on the same segment.
    pub return_diff: f64,
    pub ss_error: Summary,
    pub overshoot: Summary,
    pub settling: Summary,
}

/// The (segment, level) sequence every model in `report` must follow.
fn trace_of(report: &EvalReport) -> Result<Vec<(usize, f64)>> {
    let Some(first) = report.segments.first() else {
        return Err(pime_core::Error::Structural(format!("report `{}` is empty", report.label)).into());
    };
    let trace: Vec<(usize, f64)> = report
        .segments
        .iter()
        .take_while(|s| s.model_id == first.model_id)
        .map(|s| (s.segment, s.level))
        .collect();
    for chunk in report.segments.chunks(trace.len()) {
        let ok = chunk.len() == trace.len()
            && chunk.iter().all(|s| s.model_id == chunk[0].model_id)
            && chunk.iter().zip(&trace).all(|(s, &(k, l))| s.segment == k && s.level == l);
        if !ok {
            return Err(pime_core::Error::Structural(format!(
                "report `{}` mixes set-point traces",
                report.label
            ))
            .into());
        }
    }
    Ok(trace)
}

/// Pool reports by label (first-appearance order) and summarize each
/// segment. All reports must share one trace.
pub fn compare(reports: &[EvalReport]) -> Result<Vec<ComparisonRow>> {
    let Some(first) = reports.first() else {
        return Err(pime_core::Error::Structural("nothing to compare".into()).into());
    };
    let trace = trace_of(first)?;
    for r in &reports[1..] {
        if trace_of(r)? != trace {
            return Err(pime_core::Error::Structural(format!(
                "report `{}` uses a different set-point trace than `{}`",
                r.label, first.label
            ))
            .into());
        }
    }
    let mut labels: Vec<&str> = Vec::new();
    for r in reports {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }

    let mut rows = Vec::new();
    let mut baseline: Vec<f64> = Vec::new();
    for (li, label) in labels.iter().enumerate() {
        for (k, &(segment, level)) in trace.iter().enumerate() {
            let segs: Vec<_> = reports
                .iter()
                .filter(|r| r.label == *label)
                .flat_map(|r| r.segments.iter().skip(k).step_by(trace.len()))
                .collect();
            let pick = |f: fn(&crate::metrics::SegmentMetrics) -> f64| summarize(&segs.iter().map(|s| f(s)).collect::<Vec<_>>());
            let ret = pick(|s| s.ret);
            if li == 0 {
                baseline.push(ret.mean);
            }
            rows.push(ComparisonRow {
                label: label.to_string(),
                segment,
                level,
                n: segs.len(),
                ret,
                return_diff: ret.mean - baseline[k],
                ss_error: pick(|s| s.ss_error),
                overshoot: pick(|s| s.overshoot),
                settling: pick(|s| s.settling_steps as f64),
            });
        }
    }
    Ok(rows)
}

pub fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::Format {
        path: path.into(),
        detail: e.to_string(),
    })?;
    let mut put = |rec: Vec<String>| {
        w.write_record(rec).map_err(|e| HarnessError::Format { path: path.into(), detail: e.to_string() })
    };
    put(COMPARISON_HEADER.iter().map(|s| s.to_string()).collect())?;
    for r in rows {
        put(vec![
            r.label.clone(),
            r.segment.to_string(),
            fmt9(r.level),
            r.n.to_string(),
            fmt9(r.ret.mean),
            fmt9(r.ret.std),
            fmt9(r.return_diff),
            fmt9(r.ss_error.mean),
            fmt9(r.ss_error.std),
            fmt9(r.overshoot.mean),
            fmt9(r.overshoot.std),
            fmt9(r.settling.mean),
            fmt9(r.settling.std),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::SegmentMetrics;

    fn report(label: &str, models: &[u64], levels: &[f64], ret: f64) -> EvalReport {
        let segments = models
            .iter()
            .flat_map(|&m| {
                levels.iter().enumerate().map(move |(k, &level)| SegmentMetrics {
                    model_id: m,
                    segment: k,
                    level,
                    ret: ret - m as f64,
                    ss_error: 0.1,
                    overshoot: 0.0,
                    settling_steps: 5,
                })
            })
            .collect();
        EvalReport { label: label.into(), segments }
    }

    #[test]
    fn identical_reports_have_zero_difference() {
        let a = report("a", &[0, 1], &[2.0, 4.0], -3.0);
        let mut b = a.clone();
        b.label = "b".into();
        let rows = compare(&[a, b]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.return_diff == 0.0));
    }

    #[test]
    fn seeds_pool_into_std() {
        let reports: Vec<_> = (0..5).map(|s| report("pime", &[0], &[2.0], -(s as f64))).collect();
        let rows = compare(&reports).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n, 5);
        assert!(rows[0].ret.std > 0.0);
        assert_eq!(rows[0].ret.mean, -2.0);
    }

    #[test]
    fn mismatched_traces_are_structural_errors() {
        let a = report("a", &[0], &[2.0, 4.0], -1.0);
        let b = report("b", &[0], &[2.0, 5.0], -1.0);
        let err = compare(&[a, b]).unwrap_err();
        assert!(matches!(err, HarnessError::Core(pime_core::Error::Structural(_))));
        let c = report("c", &[0], &[2.0], -1.0);
        assert!(compare(&[report("a", &[0], &[2.0, 4.0], -1.0), c]).is_err());
    }
}
