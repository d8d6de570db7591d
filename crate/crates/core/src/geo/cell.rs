use super::{GeoPoint, EARTH_RADIUS_M};
use crate::error::{Error, Result};
use std::hash::{Hash, Hasher};

/// Default cell edge, in meters.
pub const DEFAULT_CELL_SIZE_M: f64 = 250.0;

/// Square grid cell identifier.
#[derive(Clone, Copy, Debug)]
pub struct CellId {
    pub ix: i64,
    pub iy: i64,
    pub size_m: f64,
}

impl PartialEq for CellId {
    fn eq(&self, other: &Self) -> bool {
        self.ix == other.ix && self.iy == other.iy && self.size_m.to_bits() == other.size_m.to_bits()
    }
}

impl Eq for CellId {}

impl Hash for CellId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ix.hash(state);
        self.iy.hash(state);
        self.size_m.to_bits().hash(state);
    }
}

/// Equirectangular square grid anchored at the equator/prime meridian, with
/// longitudes scaled by the cosine of a fixed reference latitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGrid {
    size_m: f64,
    ref_lat: f64,
    cos_ref: f64,
}

impl CellGrid {
    pub fn new(size_m: f64, ref_lat: f64) -> Result<Self> {
        if !(size_m > 0.0) || !size_m.is_finite() {
            return Err(Error::invalid(format!("cell size must be positive, got {size_m}")));
        }
        if !(-90.0..=90.0).contains(&ref_lat) {
            return Err(Error::invalid(format!("reference latitude {ref_lat} out of range")));
        }
        Ok(CellGrid {
            size_m,
            ref_lat,
            cos_ref: ref_lat.to_radians().cos(),
        })
    }

    pub fn size_m(&self) -> f64 {
        self.size_m
    }

    pub fn reference_latitude(&self) -> f64 {
        self.ref_lat
    }

    pub fn cell_of(&self, p: GeoPoint) -> CellId {
        let x = EARTH_RADIUS_M * p.lon().to_radians() * self.cos_ref;
        let y = EARTH_RADIUS_M * p.lat().to_radians();
        CellId {
            ix: (x / self.size_m).floor() as i64,
            iy: (y / self.size_m).floor() as i64,
            size_m: self.size_m,
        }
    }
}
