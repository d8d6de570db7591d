//! Geo-indistinguishability through planar Laplace noise.
//!
//! Each location is moved by a polar offset `(r, θ)`: the angle is uniform and
//! the radius follows the radial law of the planar Laplace density,
//! `C(r) = 1 - (1 + εr)·exp(-εr)`, i.e. a Gamma(2, 1/ε) distribution.

use crate::error::{Error, Result};
use crate::geo::{from_local_plane, LocalXY, Trace};
use crate::rng::RandomStream;
use rand::Rng;
use std::f64::consts::TAU;

pub const NAME: &str = "geo-i";
pub const EPSILON: &str = "epsilon";

/// `ln(1 + x) - x`, accurate for small `x`.
fn log1p_minus_x(x: f64) -> f64 {
    if x < 1e-3 {
        // alternating series; the omitted x^8 term is below 1e-24
        let x2 = x * x;
        x2 * (-1.0 / 2.0 + x * (1.0 / 3.0 + x * (-1.0 / 4.0 + x * (1.0 / 5.0 + x * (-1.0 / 6.0 + x / 7.0)))))
    } else {
        x.ln_1p() - x
    }
}

/// Inverse radial CDF: the `r ≥ 0` with `1 - (1 + εr)e^{-εr} = p`.
///
/// Solved in the scaled variable `x = εr` by bisection on
/// `ln(1 + x) - x = ln(1 - p)`, whose left side decreases strictly on
/// `x > 0`. The bracket is narrowed to a relative width of 1e-13.
pub fn sample_radius(epsilon: f64, p: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p must lie in (0, 1), got {p}")));
    }
    let target = (-p).ln_1p();
    let above = |x: f64| log1p_minus_x(x) > target;

    let mut lo = 0.0;
    let mut hi = 1.0;
    while above(hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi) / epsilon)
}

/// Draws one planar offset in meters.
pub fn sample_offset<R: Rng + ?Sized>(epsilon: f64, rng: &mut R) -> Result<LocalXY> {
    let theta = rng.random::<f64>() * TAU;
    let p = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    let r = sample_radius(epsilon, p)?;
    Ok(LocalXY::new(r * theta.cos(), r * theta.sin()))
}

/// Displaces every record independently; user, length and timestamps are kept.
pub fn obfuscate(trace: &Trace, epsilon: f64, stream: &RandomStream) -> Result<Trace> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut rng = stream.rng();
    let mut points = Vec::with_capacity(trace.len());
    for r in trace.records() {
        let offset = sample_offset(epsilon, &mut rng)?;
        points.push((r.time, from_local_plane(r.point, offset)));
    }
    Trace::from_points(trace.user().clone(), points)
}
