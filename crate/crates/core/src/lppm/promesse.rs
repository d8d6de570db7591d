//! Speed smoothing: the trace is replaced by points spaced exactly `alpha`
//! meters apart along its path, with timestamps spread evenly between the
//! first and last original instants. Stays collapse into a handful of evenly
//! timed points, so no location keeps a dwell time.

use crate::error::{Error, Result};
use crate::geo::{from_local_plane, to_local_plane, LocalXY, Timestamp, Trace};

pub const NAME: &str = "promesse";
pub const ALPHA: &str = "alpha";

/// Points at along-path distances `0, α, 2α, …` of the polyline `path`.
/// The remainder after the last full step is dropped.
pub fn resample_path(path: &[LocalXY], alpha: f64) -> Vec<LocalXY> {
    if path.is_empty() {
        return Vec::new();
    }
    let mut cumulative = Vec::with_capacity(path.len());
    let mut total = 0.0;
    cumulative.push(0.0);
    for w in path.windows(2) {
        total += w[0].dist(&w[1]);
        cumulative.push(total);
    }
    // a hair of slack so a path of exactly k·α keeps its last point
    let steps = (total / alpha + 1e-9).floor() as usize;

    let mut out = Vec::with_capacity(steps + 1);
    let mut seg = 0;
    for k in 0..=steps {
        let d = (k as f64 * alpha).min(total);
        while seg + 2 < path.len() && cumulative[seg + 1] < d {
            seg += 1;
        }
        let point = if path.len() == 1 {
            path[0]
        } else {
            let (a, b) = (path[seg], path[seg + 1]);
            let len = cumulative[seg + 1] - cumulative[seg];
            let f = if len > 0.0 {
                ((d - cumulative[seg]) / len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            LocalXY::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))
        };
        out.push(point);
    }
    out
}

/// `count` instants from `first` to `last` inclusive, gaps differing by at
/// most one millisecond.
pub(crate) fn uniform_times(first: Timestamp, last: Timestamp, count: usize) -> Vec<Timestamp> {
    let span = (last.millis() - first.millis()) as i128;
    let steps = (count.max(2) - 1) as i128;
    (0..count as i128)
        .map(|k| {
            let off = (k * span + steps / 2).div_euclid(steps);
            Timestamp::from_millis(first.millis() + off as i64)
        })
        .collect()
}

pub fn obfuscate(trace: &Trace, alpha: f64) -> Result<Trace> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let (Some(first), Some(last)) = (trace.records().first(), trace.records().last()) else {
        return Ok(Trace::empty(trace.user().clone()));
    };
    let origin = first.point;
    let path: Vec<LocalXY> = trace.points().map(|p| to_local_plane(origin, p)).collect();
    let resampled = resample_path(&path, alpha);
    if resampled.len() < 2 {
        return Ok(Trace::empty(trace.user().clone()));
    }
    let times = uniform_times(first.time, last.time, resampled.len());
    Trace::from_points(
        trace.user().clone(),
        times
            .into_iter()
            .zip(resampled.into_iter().map(|xy| from_local_plane(origin, xy))),
    )
}
