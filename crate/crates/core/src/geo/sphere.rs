use super::GeoPoint;

/// Mean Earth radius used by every distance and projection in the crate.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Planar offset in meters: `x` east, `y` north.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalXY {
    pub x: f64,
    pub y: f64,
}

impl LocalXY {
    pub fn new(x: f64, y: f64) -> Self {
        LocalXY { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: &LocalXY) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Great-circle (haversine) distance in meters.
pub fn distance_meters(a: GeoPoint, b: GeoPoint) -> f64 {
    let phi1 = a.lat().to_radians();
    let phi2 = b.lat().to_radians();
    let dphi = phi2 - phi1;
    let dlambda = (b.lon() - a.lon()).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

fn wrap_radians(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Equirectangular projection of `p` onto the tangent plane at `origin`.
pub fn to_local_plane(origin: GeoPoint, p: GeoPoint) -> LocalXY {
    let dlambda = wrap_radians((p.lon() - origin.lon()).to_radians());
    let dphi = (p.lat() - origin.lat()).to_radians();
    LocalXY {
        x: EARTH_RADIUS_M * dlambda * origin.lat().to_radians().cos(),
        y: EARTH_RADIUS_M * dphi,
    }
}

/// Inverse of [`to_local_plane`].
pub fn from_local_plane(origin: GeoPoint, xy: LocalXY) -> GeoPoint {
    let lat = origin.lat() + (xy.y / EARTH_RADIUS_M).to_degrees();
    let cos0 = origin.lat().to_radians().cos();
    let lon = if cos0.abs() < 1e-12 {
        origin.lon()
    } else {
        origin.lon() + (xy.x / (EARTH_RADIUS_M * cos0)).to_degrees()
    };
    GeoPoint::normalized(lat, lon)
}
