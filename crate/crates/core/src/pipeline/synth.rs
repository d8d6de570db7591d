//! Seeded synthetic mobility: each user owns a few fixed places and, every
//! day, dwells at each of them once, travelling between them at constant
//! speed. Dwells have zero spatial spread, so they are recoverable POIs.

use crate::error::{Error, Result};
use crate::geo::{distance_meters, from_local_plane, Dataset, GeoPoint, LocalXY, Timestamp, Trace, UserId};
use crate::rng::RandomStream;
use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const DAY_MS: i64 = 86_400_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub users: usize,
    pub days: usize,
    pub pois_per_user: usize,
    /// Minimum dwell per visit, milliseconds.
    pub min_dwell_ms: i64,
    /// Transit speed, m/s.
    pub speed_mps: f64,
    pub sample_period_ms: i64,
    pub seed: u64,
    pub start_date: NaiveDate,
    pub center: (f64, f64),
    /// Radius of the disk in which places are drawn, meters.
    pub area_radius_m: f64,
    /// Minimum distance between two places of the same user, meters.
    pub min_poi_separation_m: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            users: 1,
            days: 1,
            pois_per_user: 3,
            min_dwell_ms: 30 * 60 * 1000,
            speed_mps: 10.0,
            sample_period_ms: 30_000,
            seed: 42,
            start_date: NaiveDate::from_ymd_opt(2021, 3, 1).expect("valid date"),
            center: (46.52, 6.63),
            area_radius_m: 3000.0,
            min_poi_separation_m: 600.0,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        let ok = self.users > 0
            && self.days > 0
            && self.pois_per_user > 0
            && self.min_dwell_ms > 0
            && self.speed_mps > 0.0
            && self.sample_period_ms > 0
            && self.area_radius_m > 0.0
            && self.min_poi_separation_m >= 0.0;
        if !ok {
            return Err(Error::config(format!("invalid synthetic dataset spec: {self:?}")));
        }
        GeoPoint::new(self.center.0, self.center.1)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDataset {
    pub dataset: Dataset,
    /// Planted places per user.
    pub ground_truth: BTreeMap<UserId, Vec<GeoPoint>>,
}

fn place_pois<R: Rng>(spec: &SynthSpec, center: GeoPoint, rng: &mut R) -> Result<Vec<LocalXY>> {
    let mut pois: Vec<LocalXY> = Vec::with_capacity(spec.pois_per_user);
    let mut attempts = 0;
    while pois.len() < spec.pois_per_user {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::config(format!(
                "cannot place {} places {} m apart within {} m",
                spec.pois_per_user, spec.min_poi_separation_m, spec.area_radius_m
            )));
        }
        // uniform over the disk
        let r = spec.area_radius_m * rng.random::<f64>().sqrt();
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let p = LocalXY::new(r * theta.cos(), r * theta.sin());
        let far_enough = pois.iter().all(|q| {
            let (a, b) = (from_local_plane(center, p), from_local_plane(center, *q));
            distance_meters(a, b) >= spec.min_poi_separation_m
        });
        if far_enough {
            pois.push(p);
        }
    }
    Ok(pois)
}

enum Leg {
    Dwell { at: LocalXY, until: f64 },
    Move { from: LocalXY, to: LocalXY, start: f64, until: f64 },
}

fn day_itinerary<R: Rng>(
    spec: &SynthSpec,
    pois: &[LocalXY],
    first: usize,
    rng: &mut R,
) -> Result<(Vec<Leg>, usize)> {
    let mut order: Vec<usize> = (0..pois.len()).filter(|&i| i != first).collect();
    order.shuffle(rng);
    order.insert(0, first);

    let transits: Vec<f64> = order
        .windows(2)
        .map(|w| pois[w[0]].dist(&pois[w[1]]) / spec.speed_mps * 1000.0)
        .collect();
    let slack = DAY_MS as f64 - transits.iter().sum::<f64>() - (order.len() as i64 * spec.min_dwell_ms) as f64;
    if slack < 0.0 {
        return Err(Error::config("dwell and transit times do not fit in a day"));
    }
    // split the slack at sorted uniform cut points
    let mut cuts: Vec<f64> = (0..order.len() - 1).map(|_| rng.random::<f64>() * slack).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.insert(0, 0.0);
    cuts.push(slack);

    let mut legs = Vec::with_capacity(2 * order.len());
    let mut t = 0.0;
    for (k, &poi) in order.iter().enumerate() {
        t += spec.min_dwell_ms as f64 + (cuts[k + 1] - cuts[k]);
        legs.push(Leg::Dwell { at: pois[poi], until: t });
        if let Some(&next) = order.get(k + 1) {
            let start = t;
            t += transits[k];
            legs.push(Leg::Move {
                from: pois[poi],
                to: pois[next],
                start,
                until: t,
            });
        }
    }
    Ok((legs, *order.last().expect("non-empty itinerary")))
}

fn position(legs: &[Leg], t: f64) -> LocalXY {
    for leg in legs {
        match *leg {
            Leg::Dwell { at, until } if t < until => return at,
            Leg::Move { from, to, start, until } if t < until => {
                let f = ((t - start) / (until - start)).clamp(0.0, 1.0);
                return LocalXY::new(from.x + f * (to.x - from.x), from.y + f * (to.y - from.y));
            }
            _ => {}
        }
    }
    match legs.last() {
        Some(Leg::Dwell { at, .. }) => *at,
        Some(Leg::Move { to, .. }) => *to,
        None => LocalXY::default(),
    }
}

/// Builds a reproducible dataset with one trace per user.
pub fn generate_synthetic_dataset(spec: &SynthSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let center = GeoPoint::new(spec.center.0, spec.center.1)?;
    let root = RandomStream::new(spec.seed).child("synth");
    let day0 = spec
        .start_date
        .and_hms_opt(0, 0, 0)
        .expect("midnight")
        .and_utc()
        .timestamp_millis();

    let mut traces = Vec::with_capacity(spec.users);
    let mut ground_truth = BTreeMap::new();
    for u in 0..spec.users {
        let user = UserId::new(format!("user{u:03}"))?;
        let mut rng = root.child(&user).rng();
        let pois = place_pois(spec, center, &mut rng)?;
        let mut current = rng.random_range(0..pois.len());
        let mut points = Vec::new();
        for d in 0..spec.days as i64 {
            let (legs, last) = day_itinerary(spec, &pois, current, &mut rng)?;
            current = last;
            let start = day0 + d * DAY_MS;
            let mut offset = 0;
            while offset < DAY_MS {
                let xy = position(&legs, offset as f64);
                points.push((Timestamp::from_millis(start + offset), from_local_plane(center, xy)));
                offset += spec.sample_period_ms;
            }
        }
        ground_truth.insert(
            user.clone(),
            pois.iter().map(|&p| from_local_plane(center, p)).collect(),
        );
        traces.push(Trace::from_points(user, points)?);
    }
    Ok(SyntheticDataset {
        dataset: Dataset::new(traces),
        ground_truth,
    })
}
