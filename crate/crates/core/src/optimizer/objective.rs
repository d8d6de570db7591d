use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A metric to minimise or maximise, normalised by `scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub metric: MetricKind,
    pub minimise: bool,
    pub scale: f64,
}

impl Objective {
    pub fn new(metric: MetricKind, minimise: bool, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::config(format!("objective scale must be positive, got {scale}")));
        }
        Ok(Objective {
            metric,
            minimise,
            scale,
        })
    }

    pub fn minimise(metric: MetricKind) -> Self {
        Objective {
            metric,
            minimise: true,
            scale: default_scale(metric),
        }
    }

    pub fn maximise(metric: MetricKind) -> Self {
        Objective {
            metric,
            minimise: false,
            scale: default_scale(metric),
        }
    }

    /// Contribution of a raw metric value to the cost, in `[0, 1]`.
    pub fn cost_of(&self, value: f64) -> f64 {
        let n = value.min(self.scale).max(0.0) / self.scale;
        if self.minimise {
            n
        } else {
            1.0 - n
        }
    }
}

/// Normalisation bound used when an objective does not name one.
pub fn default_scale(metric: MetricKind) -> f64 {
    match metric {
        MetricKind::Pois | MetricKind::Coverage => 1.0,
        MetricKind::Distortion => 500.0,
    }
}

/// Sum of per-objective contributions.
pub fn combine_cost(objectives: &[Objective], values: &[f64]) -> f64 {
    objectives.iter().zip(values).map(|(o, &v)| o.cost_of(v)).sum()
}

impl FromStr for Objective {
    type Err = Error;

    /// `<min|max>:<evaluator>[:scale=<real>]`
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("malformed objective `{s}`, expected <min|max>:<evaluator>[:scale=<real>]"));
        let mut parts = s.trim().split(':');
        let minimise = match parts.next() {
            Some("min") => true,
            Some("max") => false,
            _ => return Err(bad()),
        };
        let metric: MetricKind = parts.next().ok_or_else(bad)?.parse()?;
        let scale = match parts.next() {
            None => default_scale(metric),
            Some(kv) => kv
                .strip_prefix("scale=")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(bad)?,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Objective::new(metric, minimise, scale)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = if self.minimise { "min" } else { "max" };
        write!(f, "{dir}:{}:scale={}", self.metric, self.scale)
    }
}

/// Parses a comma-separated objective list.
pub fn parse_objectives(s: &str) -> Result<Vec<Objective>> {
    let objectives = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Objective>>>()?;
    if objectives.is_empty() {
        return Err(Error::config("at least one objective is required"));
    }
    Ok(objectives)
}

/// Objectives used when none are given: geo-i trades POI retrieval against
/// distortion, Promesse against area coverage.
pub fn default_objectives(lppm_name: &str) -> Result<Vec<Objective>> {
    match lppm_name {
        "geo-i" => parse_objectives("min:pois,min:distortion:scale=500"),
        "promesse" => parse_objectives("min:pois,max:coverage"),
        other => Err(Error::config(format!("no default objectives for `{other}`"))),
    }
}
