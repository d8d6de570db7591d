//! Privacy and utility metrics over a raw trace and its protected version.
//!
//! * `pois`: F-score of points of interest recovered from the protected
//!   trace (privacy, lower is better).
//! * `distortion`: mean distance from protected locations to the nearest raw
//!   location, in meters (utility, lower is better).
//! * `coverage`: F-score over visited grid cells (utility, higher is better).

mod coverage;
mod distortion;
mod poi;
mod robust;

pub use coverage::{area_coverage, cell_f_score, cells_of};
pub use distortion::{spatial_distortion, NearestIndex};
pub use poi::{extract_pois, poi_retrieval, Poi, PoiClusteringParams};
pub use robust::{evaluate_robust, evaluate_robust_many, median};

use crate::error::{Error, Result};
use crate::geo::{CellGrid, CellId, GeoPoint, Trace, DEFAULT_CELL_SIZE_M};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricValue {
    pub value: f64,
    pub evaluator_name: String,
}

/// Settings shared by all evaluators of one experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSettings {
    pub poi: PoiClusteringParams,
    pub grid: CellGrid,
}

impl MetricSettings {
    pub fn new(poi: PoiClusteringParams, grid: CellGrid) -> Self {
        MetricSettings { poi, grid }
    }

    /// Default POI parameters and a 250 m grid at `ref_lat`.
    pub fn with_reference_latitude(ref_lat: f64) -> Result<Self> {
        Ok(MetricSettings {
            poi: PoiClusteringParams::default(),
            grid: CellGrid::new(DEFAULT_CELL_SIZE_M, ref_lat)?,
        })
    }
}

/// A raw trace with lazily computed, reusable views (POIs, visited cells,
/// nearest-location index) so repeated evaluations do not redo them.
pub struct Reference {
    trace: Trace,
    points: Vec<GeoPoint>,
    settings: MetricSettings,
    pois: OnceLock<Vec<GeoPoint>>,
    cells: OnceLock<HashSet<CellId>>,
    nearest: OnceLock<NearestIndex>,
}

impl Reference {
    pub fn new(trace: Trace, settings: MetricSettings) -> Self {
        let points = trace.points().collect();
        Reference {
            trace,
            points,
            settings,
            pois: OnceLock::new(),
            cells: OnceLock::new(),
            nearest: OnceLock::new(),
        }
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn settings(&self) -> &MetricSettings {
        &self.settings
    }

    pub fn poi_centroids(&self) -> &[GeoPoint] {
        self.pois.get_or_init(|| {
            extract_pois(&self.trace, &self.settings.poi)
                .into_iter()
                .map(|p| p.centroid)
                .collect()
        })
    }

    pub fn cells(&self) -> &HashSet<CellId> {
        self.cells.get_or_init(|| cells_of(&self.points, &self.settings.grid))
    }

    fn nearest(&self) -> &NearestIndex {
        self.nearest.get_or_init(|| NearestIndex::new(&self.points))
    }
}

/// Scores a protected trace against a reference.
pub trait Evaluator: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, reference: &Reference, protected: &Trace) -> Result<f64>;
}

/// The built-in evaluators, addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Pois,
    Distortion,
    Coverage,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Pois, MetricKind::Distortion, MetricKind::Coverage];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Pois => "pois",
            MetricKind::Distortion => "distortion",
            MetricKind::Coverage => "coverage",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown evaluator `{s}`")))
    }
}

impl Evaluator for MetricKind {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn evaluate(&self, reference: &Reference, protected: &Trace) -> Result<f64> {
        match self {
            MetricKind::Pois => {
                let found: Vec<GeoPoint> = extract_pois(protected, &reference.settings.poi)
                    .into_iter()
                    .map(|p| p.centroid)
                    .collect();
                Ok(poi_retrieval(
                    reference.poi_centroids(),
                    &found,
                    reference.settings.poi.match_threshold_m,
                ))
            }
            MetricKind::Distortion => {
                let points: Vec<GeoPoint> = protected.points().collect();
                reference.nearest().distortion(&points)
            }
            MetricKind::Coverage => {
                let points: Vec<GeoPoint> = protected.points().collect();
                Ok(cell_f_score(
                    reference.cells(),
                    &cells_of(&points, &reference.settings.grid),
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{Timestamp, UserId};

    #[test]
    fn registry_by_name() {
        for m in MetricKind::ALL {
            assert_eq!(m.as_str().parse::<MetricKind>().unwrap(), m);
        }
        assert!(matches!("speed".parse::<MetricKind>(), Err(Error::Config(_))));
    }

    #[test]
    fn identity_protection_scores() {
        let u = UserId::new("u").unwrap();
        let p = GeoPoint::new(46.5, 6.6).unwrap();
        let t = Trace::from_points(u, (0..40).map(|i| (Timestamp::from_secs(i * 30), p))).unwrap();
        let r = Reference::new(t.clone(), MetricSettings::with_reference_latitude(46.5).unwrap());
        assert_eq!(MetricKind::Pois.evaluate(&r, &t).unwrap(), 1.0);
        assert_eq!(MetricKind::Distortion.evaluate(&r, &t).unwrap(), 0.0);
        assert_eq!(MetricKind::Coverage.evaluate(&r, &t).unwrap(), 1.0);
    }
}
