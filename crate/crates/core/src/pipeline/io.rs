//! CSV input/output. Files have the header `user,timestamp,lat,lon`.

use crate::error::{Error, Result};
use crate::geo::{Dataset, GeoPoint, Timestamp, Trace, UserId};
use chrono::{DateTime, NaiveDateTime};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const HEADER: [&str; 4] = ["user", "timestamp", "lat", "lon"];

// most offending lines listed in a load error
const MAX_REPORTED: usize = 20;

/// Parses ISO-8601 or an integer epoch. Integers below 1e11 are seconds,
/// larger ones milliseconds. Timestamps without an offset are taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    let s = s.trim();
    if let Ok(n) = s.parse::<i64>() {
        return Some(if n.abs() < 100_000_000_000 {
            Timestamp::from_secs(n)
        } else {
            Timestamp::from_millis(n)
        });
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(Timestamp::from_millis(dt.timestamp_millis()));
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|dt| Timestamp::from_millis(dt.and_utc().timestamp_millis()))
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<(UserId, Timestamp, GeoPoint), String> {
    if row.len() != 4 {
        return Err(format!("expected 4 fields, found {}", row.len()));
    }
    let user = UserId::new(row[0].trim()).map_err(|e| e.to_string())?;
    let time = parse_timestamp(&row[1]).ok_or_else(|| format!("bad timestamp `{}`", &row[1]))?;
    let lat: f64 = row[2].trim().parse().map_err(|_| format!("bad latitude `{}`", &row[2]))?;
    let lon: f64 = row[3].trim().parse().map_err(|_| format!("bad longitude `{}`", &row[3]))?;
    let point = GeoPoint::new(lat, lon).map_err(|e| e.to_string())?;
    Ok((user, time, point))
}

/// Reads a dataset, one time-sorted trace per user, users in ascending order.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, path)
}

pub(crate) fn read_dataset(input: impl std::io::Read, path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let load_err = |lines: Vec<String>| Error::Load {
        path: path.to_path_buf(),
        lines,
    };

    let header = reader.headers().map_err(|e| load_err(vec![format!("line 1: {e}")]))?;
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != HEADER {
        return Err(load_err(vec![format!(
            "line 1: expected header `{}`, found `{}`",
            HEADER.join(","),
            names.join(",")
        )]));
    }

    let mut per_user: BTreeMap<UserId, Vec<(Timestamp, GeoPoint)>> = BTreeMap::new();
    let mut errors = Vec::new();
    let mut bad = 0usize;
    for row in reader.records() {
        let outcome = match row {
            Ok(row) => {
                let line = row.position().map_or(0, |p| p.line());
                parse_row(&row).map_err(|e| format!("line {line}: {e}"))
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                Err(format!("line {line}: {e}"))
            }
        };
        match outcome {
            Ok((user, time, point)) => per_user.entry(user).or_default().push((time, point)),
            Err(msg) => {
                bad += 1;
                if errors.len() < MAX_REPORTED {
                    errors.push(msg);
                }
            }
        }
    }
    if bad > 0 {
        if bad > errors.len() {
            errors.push(format!("and {} more malformed rows", bad - errors.len()));
        }
        return Err(load_err(errors));
    }

    let traces = per_user
        .into_iter()
        .map(|(user, mut points)| {
            points.sort_by_key(|(t, _)| *t);
            Trace::from_points(user, points)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(traces))
}

pub(crate) fn write_traces<W: Write>(out: W, traces: &[Trace]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for t in traces {
        for r in t.records() {
            w.write_record([
                r.user.as_str(),
                &r.time.to_iso8601(),
                &r.point.lat().to_string(),
                &r.point.lon().to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Writes `contents` through a temporary file in the destination directory,
/// renamed into place only once complete.
pub fn write_atomic(path: impl AsRef<Path>, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes a dataset in the input schema.
pub fn write_dataset(path: impl AsRef<Path>, traces: &[Trace]) -> Result<()> {
    write_atomic(path, |w| write_traces(w, traces))
}
