//! Tracking metrics over piecewise-constant set-point traces.

use crate::episode::TraceRow;

/// Fraction of each segment, counted from its end, that is treated as
/// steady state.
pub const STEADY_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentMetrics {
    pub model_id: u64,
    pub segment: usize,
    pub level: f64,
    /// Sum of rewards over the segment.
    pub ret: f64,
    /// Mean |y_ref - y| over the steady-state window.
    pub ss_error: f64,
    /// Largest excursion past the set-point after the output first reaches it.
    pub overshoot: f64,
    /// Steps until the output stays inside the band for the rest of the
    /// segment; the segment length if it never does.
    pub settling_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub label: String,
    pub segments: Vec<SegmentMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

/// Mean and population standard deviation; zeros for an empty slice.
pub fn summarize(values: &[f64]) -> Summary {
    if values.is_empty() {
        return Summary { mean: 0.0, std: 0.0 };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Summary { mean, std: var.sqrt() }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Steps in the steady-state window of a segment of `len` steps.
pub fn steady_window(len: usize) -> usize {
    ((len as f64 * STEADY_FRACTION).ceil() as usize).clamp(1, len.max(1))
}

/// Metrics for one segment of consecutive rows sharing a set-point.
pub fn segment_metrics(model_id: u64, segment: usize, rows: &[TraceRow], band: f64) -> SegmentMetrics {
    let level = rows.first().map_or(f64::NAN, |r| r.y_ref);
    let err: Vec<f64> = rows.iter().map(|r| r.y_ref - r.y).collect();
    let w = steady_window(rows.len());
    let ss_error = err[err.len() - w..].iter().map(|e| e.abs()).sum::<f64>() / w as f64;

    // Direction of approach: +1 when the output starts below the level.
    let dir = if err[0] >= 0.0 { 1.0 } else { -1.0 };
    let overshoot = match err.iter().position(|e| dir * e <= 0.0) {
        Some(k) => err[k..].iter().map(|e| (-dir * e).max(0.0)).fold(0.0, f64::max),
        None => 0.0,
    };
    let settling_steps = err.iter().rposition(|e| e.abs() > band).map_or(0, |k| k + 1);

    SegmentMetrics {
        model_id,
        segment,
        level,
        ret: rows.iter().map(|r| r.reward).sum(),
        ss_error,
        overshoot,
        settling_steps,
    }
}

/// Split an evaluation trace into its segments and score each.
pub fn trace_metrics(model_id: u64, trace: &[TraceRow], segment_len: usize, band: f64) -> Vec<SegmentMetrics> {
    trace
        .chunks(segment_len)
        .enumerate()
        .map(|(k, rows)| segment_metrics(model_id, k, rows, band))
        .collect()
}

impl EvalReport {
    /// Episodic return of each model, in report order.
    pub fn model_returns(&self) -> Vec<f64> {
        let mut out: Vec<(u64, f64)> = Vec::new();
        for s in &self.segments {
            match out.last_mut() {
                Some((id, r)) if *id == s.model_id => *r += s.ret,
                _ => out.push((s.model_id, s.ret)),
            }
        }
        out.into_iter().map(|(_, r)| r).collect()
    }

    pub fn mean_return(&self) -> Summary {
        summarize(&self.model_returns())
    }

    pub fn ss_errors(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.ss_error).collect()
    }

    /// Fraction of (model, segment) pairs with steady-state error below `tol`.
    pub fn fraction_tracked(&self, tol: f64) -> f64 {
        let n = self.segments.len().max(1) as f64;
        self.segments.iter().filter(|s| s.ss_error < tol).count() as f64 / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(ys: &[f64], y_ref: f64) -> Vec<TraceRow> {
        ys.iter()
            .enumerate()
            .map(|(t, &y)| TraceRow { t, y, y_ref, u: 0.0, z: 0.0, reward: -(y - y_ref).powi(2) })
            .collect()
    }

    #[test]
    fn perfect_tracking_scores_zero() {
        let m = segment_metrics(0, 0, &rows(&[2.0; 8], 2.0), 0.1);
        assert_eq!((m.ss_error, m.overshoot, m.settling_steps, m.ret), (0.0, 0.0, 0, 0.0));
    }

    #[test]
    fn rising_response() {
        // Rises past 5, peaks at 5.5, settles to 5.1.
        let m = segment_metrics(0, 0, &rows(&[1.0, 3.0, 5.5, 5.2, 5.1, 5.1, 5.1, 5.1], 5.0), 0.15);
        assert_eq!(m.overshoot, 0.5);
        assert_eq!(m.settling_steps, 4);
        assert!((m.ss_error - 0.1).abs() < 1e-12);
        assert!(m.ss_error >= 0.0 && m.overshoot >= 0.0);
    }

    #[test]
    fn falling_response_and_no_crossing() {
        let m = segment_metrics(0, 0, &rows(&[9.0, 6.0, 4.0, 4.5], 5.0), 0.1);
        assert_eq!(m.overshoot, 1.0);
        assert_eq!(m.settling_steps, 4);
        let m = segment_metrics(0, 0, &rows(&[1.0, 2.0, 3.0, 4.0], 5.0), 0.1);
        assert_eq!(m.overshoot, 0.0);
        assert_eq!(m.ss_error, 1.0);
    }

    #[test]
    fn window_is_final_quarter() {
        assert_eq!(steady_window(100), 25);
        assert_eq!(steady_window(50), 13);
        assert_eq!(steady_window(1), 1);
    }

    #[test]
    fn summaries() {
        let s = summarize(&[1.0, 3.0]);
        assert_eq!((s.mean, s.std), (2.0, 1.0));
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn returns_grouped_by_model() {
        let mut segs = trace_metrics(4, &rows(&[1.0, 1.0, 2.0, 2.0], 2.0), 2, 0.1);
        segs.extend(trace_metrics(5, &rows(&[2.0; 4], 2.0), 2, 0.1));
        let r = EvalReport { label: "x".into(), segments: segs };
        assert_eq!(r.model_returns(), vec![-2.0, 0.0]);
        assert_eq!(r.fraction_tracked(0.5), 0.75);
    }
}
