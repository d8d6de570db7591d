//! Spatial and temporal primitives: traces, spherical distance, local
//! tangent-plane projection, and the square cell grid used by area coverage.

mod cell;
mod sphere;
mod types;

pub use cell::{CellGrid, CellId, DEFAULT_CELL_SIZE_M};
pub use sphere::{distance_meters, from_local_plane, to_local_plane, LocalXY, EARTH_RADIUS_M};
pub use types::{Dataset, GeoPoint, Record, Timestamp, Trace, UserId};
