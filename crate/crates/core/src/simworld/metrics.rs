use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::TraceRecord;
use crate::navigation::CaseId;

/// How long case 5 must hold before a stationary episode counts as converged.
pub const CONVERGE_HOLD_S: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("cannot compute metrics of an empty trace")]
    EmptyTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub ticks: usize,
    /// Fraction of ticks whose ground-truth box was visible.
    pub in_fov_fraction: f64,
    pub detections: usize,
    pub frames_skipped: usize,
    /// Time of the first tick whose latest delta is a detection.
    pub first_acquisition_s: Option<f64>,
    /// The delta statistics below cover ticks from first acquisition on
    /// whose latest delta is a detection.
    pub mean_abs_delta_x: Option<f64>,
    pub mean_abs_delta_y: Option<f64>,
    pub mean_abs_delta: Option<f64>,
    pub max_abs_delta: Option<f64>,
    /// Stationary targets only: start of the first case-5 run lasting at least
    /// [`CONVERGE_HOLD_S`] (or the whole trace, if shorter).
    pub time_to_converge_s: Option<f64>,
    pub final_standoff_m: f64,
    pub case_transitions: usize,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn compute_metrics(trace: &[TraceRecord]) -> Result<Metrics, MetricsError> {
    let first = trace.first().ok_or(MetricsError::EmptyTrace)?;
    let last = trace.last().expect("non-empty");
    let n = trace.len();

    let in_fov = trace.iter().filter(|r| r.truth_box.is_some()).count();
    let acquired_at = trace.iter().position(|r| r.delta.detected);
    let tracked: Vec<_> = match acquired_at {
        Some(i) => trace[i..].iter().filter(|r| r.delta.detected).map(|r| r.delta).collect(),
        None => Vec::new(),
    };

    let stationary = trace.iter().all(|r| r.target == first.target);
    let time_to_converge_s = if stationary {
        let span = last.t - first.t;
        let needed = CONVERGE_HOLD_S.min(span);
        let mut run_start: Option<usize> = None;
        let mut found = None;
        for (i, r) in trace.iter().enumerate() {
            if r.case_id == CaseId::NULL {
                let s = *run_start.get_or_insert(i);
                if r.t - trace[s].t >= needed {
                    found = Some(trace[s].t);
                    break;
                }
            } else {
                run_start = None;
            }
        }
        found
    } else {
        None
    };

    Ok(Metrics {
        ticks: n,
        in_fov_fraction: in_fov as f64 / n as f64,
        detections: trace.iter().filter(|r| r.detection.is_some()).count(),
        frames_skipped: trace.iter().filter(|r| r.frame_skipped).count(),
        first_acquisition_s: acquired_at.map(|i| trace[i].t),
        mean_abs_delta_x: mean(tracked.iter().map(|d| d.delta_x.abs())),
        mean_abs_delta_y: mean(tracked.iter().map(|d| d.delta_y.abs())),
        mean_abs_delta: mean(tracked.iter().map(|d| d.magnitude())),
        max_abs_delta: tracked.iter().map(|d| d.magnitude()).reduce(f64::max),
        time_to_converge_s,
        final_standoff_m: last.pose.position().distance(&last.target),
        case_transitions: trace.windows(2).filter(|w| w[0].case_id != w[1].case_id).count(),
    })
}
