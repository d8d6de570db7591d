use crate::error::{Error, Result};
use crate::geo::{distance_meters, GeoPoint};
use rstar::primitives::GeomWithData;
use rstar::RTree;

type Entry = GeomWithData<[f64; 3], usize>;

// below this many distance pairs a plain scan is faster than building a tree
const BRUTE_FORCE_PAIRS: usize = 10_000;

fn unit_vector(p: GeoPoint) -> [f64; 3] {
    let (lat, lon) = (p.lat().to_radians(), p.lon().to_radians());
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

/// Nearest raw location lookup.
///
/// Chord length between unit vectors is monotone in great-circle distance,
/// so the Euclidean nearest neighbour in 3-D is the haversine nearest
/// neighbour.
pub struct NearestIndex {
    points: Vec<GeoPoint>,
    tree: RTree<Entry>,
}

impl NearestIndex {
    pub fn new(points: &[GeoPoint]) -> Self {
        let entries = points
            .iter()
            .enumerate()
            .map(|(i, &p)| GeomWithData::new(unit_vector(p), i))
            .collect();
        NearestIndex {
            points: points.to_vec(),
            tree: RTree::bulk_load(entries),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Haversine distance from `p` to its nearest indexed point.
    pub fn nearest_distance(&self, p: GeoPoint) -> Option<f64> {
        self.tree
            .nearest_neighbor(&unit_vector(p))
            .map(|e| distance_meters(self.points[e.data], p))
    }

    /// Mean nearest distance of `protected`; 0 when it is empty.
    pub fn distortion(&self, protected: &[GeoPoint]) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::invalid("spatial distortion needs raw locations"));
        }
        if protected.is_empty() {
            return Ok(0.0);
        }
        let sum: f64 = protected
            .iter()
            .map(|&p| self.nearest_distance(p).unwrap_or(0.0))
            .sum();
        Ok(sum / protected.len() as f64)
    }
}

/// Mean distance from each protected location to its closest raw location.
pub fn spatial_distortion(raw: &[GeoPoint], protected: &[GeoPoint]) -> Result<f64> {
    if raw.is_empty() {
        return Err(Error::invalid("spatial distortion needs raw locations"));
    }
    if protected.is_empty() {
        return Ok(0.0);
    }
    if raw.len().saturating_mul(protected.len()) > BRUTE_FORCE_PAIRS {
        return NearestIndex::new(raw).distortion(protected);
    }
    let sum: f64 = protected
        .iter()
        .map(|&q| {
            raw.iter()
                .map(|&p| distance_meters(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(sum / protected.len() as f64)
}
