use crate::geo::{distance_meters, from_local_plane, to_local_plane, GeoPoint, LocalXY, Timestamp, Trace, UserId};
use serde::{Deserialize, Serialize};

/// Stay-point extraction and matching parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoiClusteringParams {
    /// Maximum cluster diameter Δℓ, meters.
    pub max_diameter_m: f64,
    /// Minimum stay Δt, milliseconds.
    pub min_stay_ms: i64,
    /// Distance ℓ under which a protected POI matches a real one, meters.
    pub match_threshold_m: f64,
}

impl Default for PoiClusteringParams {
    fn default() -> Self {
        PoiClusteringParams {
            max_diameter_m: 200.0,
            min_stay_ms: 15 * 60 * 1000,
            match_threshold_m: 100.0,
        }
    }
}

impl PoiClusteringParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.max_diameter_m > 0.0 && self.min_stay_ms > 0 && self.match_threshold_m > 0.0) {
            return Err(crate::Error::invalid(format!(
                "POI parameters must be strictly positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Poi {
    pub user: UserId,
    pub centroid: GeoPoint,
    pub start: Timestamp,
    pub end: Timestamp,
    pub size: usize,
}

/// Greedy forward scan over consecutive records.
///
/// A cluster grows while its diameter stays within `max_diameter_m`. When a
/// record would break that bound the cluster is closed, kept as a POI if it
/// spans at least `min_stay_ms`, and a new cluster starts at the breaking
/// record.
pub fn extract_pois(trace: &Trace, params: &PoiClusteringParams) -> Vec<Poi> {
    let records = trace.records();
    let n = records.len();
    let mut pois = Vec::new();
    let mut start = 0;
    while start < n {
        let anchor = records[start].point;
        // radius of the cluster around its first point, for a cheap accept
        let mut radius: f64 = 0.0;
        let mut end = start + 1;
        while end < n {
            let p = records[end].point;
            let from_anchor = distance_meters(anchor, p);
            let fits = from_anchor + radius <= params.max_diameter_m
                || records[start..end]
                    .iter()
                    .all(|r| distance_meters(r.point, p) <= params.max_diameter_m);
            if !fits {
                break;
            }
            radius = radius.max(from_anchor);
            end += 1;
        }
        let cluster = &records[start..end];
        let (first, last) = (cluster[0].time, cluster[cluster.len() - 1].time);
        if last.millis() - first.millis() >= params.min_stay_ms {
            pois.push(Poi {
                user: trace.user().clone(),
                centroid: centroid(cluster.iter().map(|r| r.point)),
                start: first,
                end: last,
                size: cluster.len(),
            });
        }
        start = end;
    }
    pois
}

/// Arithmetic mean in the tangent plane of the first point.
pub(crate) fn centroid(points: impl Iterator<Item = GeoPoint>) -> GeoPoint {
    let mut points = points.peekable();
    let origin = *points.peek().expect("non-empty cluster");
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for p in points {
        let xy = to_local_plane(origin, p);
        sx += xy.x;
        sy += xy.y;
        n += 1;
    }
    from_local_plane(origin, LocalXY::new(sx / n as f64, sy / n as f64))
}

/// F-score of POI retrieval between real POIs `actual` and POIs `found` in a
/// protected trace.
///
/// The shared numerator counts found POIs lying within `threshold_m` of some
/// real POI. Recall divides it by `|actual|` and is capped at 1, since several
/// found POIs may match the same real one. Empty sets and a zero
/// precision + recall give 0.
pub fn poi_retrieval(actual: &[GeoPoint], found: &[GeoPoint], threshold_m: f64) -> f64 {
    if actual.is_empty() || found.is_empty() {
        return 0.0;
    }
    let matched = found
        .iter()
        .filter(|&&f| actual.iter().any(|&a| distance_meters(a, f) <= threshold_m))
        .count() as f64;
    let recall = (matched / actual.len() as f64).min(1.0);
    let precision = matched / found.len() as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user() -> UserId {
        UserId::new("u").unwrap()
    }

    fn at(origin: GeoPoint, x: f64, y: f64) -> GeoPoint {
        from_local_plane(origin, LocalXY::new(x, y))
    }

    #[test]
    fn stationary_quarter_hour_is_one_poi() {
        let p = GeoPoint::new(46.5, 6.6).unwrap();
        let t = Trace::from_points(user(), (0..31).map(|i| (Timestamp::from_secs(i * 30), p))).unwrap();
        let pois = extract_pois(&t, &PoiClusteringParams::default());
        assert_eq!(pois.len(), 1);
        assert!(distance_meters(pois[0].centroid, p) < 1e-6);
        assert_eq!(pois[0].size, 31);
        assert_eq!(pois[0].end.millis() - pois[0].start.millis(), 900_000);

        let short = Trace::from_points(user(), (0..30).map(|i| (Timestamp::from_secs(i * 30), p))).unwrap();
        assert!(extract_pois(&short, &PoiClusteringParams::default()).is_empty());
    }

    #[test]
    fn steady_motion_has_no_poi() {
        let o = GeoPoint::new(46.5, 6.6).unwrap();
        let t = Trace::from_points(
            user(),
            (0..=40).map(|i| (Timestamp::from_secs(i * 30), at(o, 300.0 * i as f64, 0.0))),
        )
        .unwrap();
        assert!(extract_pois(&t, &PoiClusteringParams::default()).is_empty());
        assert!(extract_pois(&Trace::empty(user()), &PoiClusteringParams::default()).is_empty());
    }

    #[test]
    fn centroid_is_planar_mean() {
        let o = GeoPoint::new(10.0, 10.0).unwrap();
        let c = centroid([at(o, 0.0, 0.0), at(o, 100.0, 0.0), at(o, 50.0, 60.0)].into_iter());
        let xy = to_local_plane(o, c);
        assert!((xy.x - 50.0).abs() < 1e-6 && (xy.y - 20.0).abs() < 1e-6);
    }

    #[test]
    fn retrieval_examples() {
        let o = GeoPoint::new(46.5, 6.6).unwrap();
        let a = o;
        let b = at(o, 1000.0, 0.0);
        assert_eq!(poi_retrieval(&[a], &[a], 100.0), 1.0);
        assert_eq!(poi_retrieval(&[a], &[], 100.0), 0.0);
        assert_eq!(poi_retrieval(&[], &[a], 100.0), 0.0);
        let a2 = at(o, 50.0, 0.0);
        let c = at(o, 0.0, 1500.0);
        assert!((poi_retrieval(&[a, b], &[a2, c], 100.0) - 0.5).abs() < 1e-12);
        assert_eq!(poi_retrieval(&[a], &[c], 100.0), 0.0);
    }

    #[test]
    fn duplicate_matches_are_capped() {
        let o = GeoPoint::new(46.5, 6.6).unwrap();
        let v = poi_retrieval(&[o], &[at(o, 10.0, 0.0), at(o, -10.0, 0.0)], 100.0);
        assert_eq!(v, 1.0);
    }
}
