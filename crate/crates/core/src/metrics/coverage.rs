use crate::geo::{CellGrid, CellId, GeoPoint};
use std::collections::HashSet;

pub fn cells_of(points: &[GeoPoint], grid: &CellGrid) -> HashSet<CellId> {
    points.iter().map(|&p| grid.cell_of(p)).collect()
}

/// F-score between the cells visited by raw locations and by protected ones.
/// Recall is relative to the number of raw cells.
pub fn cell_f_score(raw: &HashSet<CellId>, protected: &HashSet<CellId>) -> f64 {
    if raw.is_empty() || protected.is_empty() {
        return 0.0;
    }
    let common = protected.intersection(raw).count() as f64;
    let recall = common / raw.len() as f64;
    let precision = common / protected.len() as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn area_coverage(raw: &[GeoPoint], protected: &[GeoPoint], grid: &CellGrid) -> f64 {
    cell_f_score(&cells_of(raw, grid), &cells_of(protected, grid))
}
