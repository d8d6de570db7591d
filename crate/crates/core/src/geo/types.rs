use crate::error::{Error, Result};
use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub(crate) const MILLIS_PER_DAY: i64 = 86_400_000;

/// Opaque, non-empty user identifier. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct UserId(Arc<str>);

impl UserId {
    pub fn new(id: impl AsRef<str>) -> Result<Self> {
        let id = id.as_ref();
        if id.is_empty() {
            return Err(Error::invalid("user id must not be empty"));
        }
        Ok(UserId(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for UserId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        UserId::new(s)
    }
}

impl From<UserId> for String {
    fn from(u: UserId) -> String {
        u.0.to_string()
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A point on the sphere, in degrees. Latitude lies in `[-90, 90]` and
/// longitude in `(-180, 180]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(Error::invalid(format!("non-finite coordinate ({lat}, {lon})")));
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::invalid(format!("latitude {lat} outside [-90, 90]")));
        }
        if !(lon > -180.0 && lon <= 180.0) {
            return Err(Error::invalid(format!("longitude {lon} outside (-180, 180]")));
        }
        Ok(GeoPoint { lat, lon })
    }

    /// Builds a point from arbitrary finite degrees, clamping latitude and
    /// wrapping longitude into range.
    pub(crate) fn normalized(lat: f64, lon: f64) -> Self {
        let lat = lat.clamp(-90.0, 90.0);
        let mut lon = (lon + 180.0).rem_euclid(360.0) - 180.0;
        if lon == -180.0 {
            lon = 180.0;
        }
        GeoPoint { lat, lon }
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// Milliseconds since the Unix epoch, UTC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_millis(ms: i64) -> Self {
        Timestamp(ms)
    }

    pub const fn from_secs(s: i64) -> Self {
        Timestamp(s * 1000)
    }

    pub const fn millis(&self) -> i64 {
        self.0
    }

    /// Whole days since the epoch; days are half-open `[00:00, 24:00)` UTC.
    pub fn epoch_day(&self) -> i64 {
        self.0.div_euclid(MILLIS_PER_DAY)
    }

    pub fn date(&self) -> NaiveDate {
        self.to_datetime().date_naive()
    }

    pub fn to_datetime(&self) -> DateTime<Utc> {
        DateTime::from_timestamp_millis(self.0).unwrap_or(DateTime::<Utc>::MIN_UTC)
    }

    pub fn to_iso8601(&self) -> String {
        self.to_datetime().to_rfc3339_opts(SecondsFormat::Millis, true)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso8601())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub user: UserId,
    pub point: GeoPoint,
    pub time: Timestamp,
}

/// Chronologically ordered records of a single user.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    user: UserId,
    records: Vec<Record>,
}

impl Trace {
    pub fn empty(user: UserId) -> Self {
        Trace {
            user,
            records: Vec::new(),
        }
    }

    /// Rejects records of another user and decreasing timestamps.
    pub fn new(user: UserId, records: Vec<Record>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if r.user != user {
                return Err(Error::invalid(format!(
                    "record {i} belongs to user {} in trace of {}",
                    r.user, user
                )));
            }
            if i > 0 && records[i - 1].time > r.time {
                return Err(Error::invalid(format!(
                    "record {i} at {} precedes record {} at {}",
                    r.time,
                    i - 1,
                    records[i - 1].time
                )));
            }
        }
        Ok(Trace { user, records })
    }

    pub fn from_points(
        user: UserId,
        points: impl IntoIterator<Item = (Timestamp, GeoPoint)>,
    ) -> Result<Self> {
        let records = points
            .into_iter()
            .map(|(time, point)| Record {
                user: user.clone(),
                point,
                time,
            })
            .collect();
        Trace::new(user, records)
    }

    pub fn user(&self) -> &UserId {
        &self.user
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = GeoPoint> + '_ {
        self.records.iter().map(|r| r.point)
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = Timestamp> + '_ {
        self.records.iter().map(|r| r.time)
    }

    pub fn into_records(self) -> Vec<Record> {
        self.records
    }

    /// Concatenates traces of the same user, re-sorting by time.
    pub fn concat(user: UserId, traces: &[&Trace]) -> Result<Self> {
        let mut records: Vec<Record> = traces
            .iter()
            .flat_map(|t| t.records.iter().cloned())
            .collect();
        records.sort_by_key(|r| r.time);
        Trace::new(user, records)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub traces: Vec<Trace>,
}

impl Dataset {
    pub fn new(traces: Vec<Trace>) -> Self {
        Dataset { traces }
    }

    /// Distinct users in ascending order.
    pub fn users(&self) -> Vec<UserId> {
        let mut users: Vec<UserId> = self.traces.iter().map(|t| t.user().clone()).collect();
        users.sort();
        users.dedup();
        users
    }

    pub fn traces_of<'a>(&'a self, user: &'a UserId) -> impl Iterator<Item = &'a Trace> + 'a {
        self.traces.iter().filter(move |t| t.user() == user)
    }

    pub fn record_count(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    /// Mean latitude over every record, or 0 for an empty dataset.
    pub fn reference_latitude(&self) -> f64 {
        let n = self.record_count();
        if n == 0 {
            return 0.0;
        }
        let sum: f64 = self
            .traces
            .iter()
            .flat_map(|t| t.points())
            .map(|p| p.lat())
            .sum();
        sum / n as f64
    }
}
