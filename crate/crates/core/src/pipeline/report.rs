use super::io::write_atomic;
use super::run::RunConfig;
use crate::error::Result;
use crate::geo::{Trace, UserId};
use chrono::NaiveDate;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Empirical CDF: sorted distinct values with the fraction of inputs `≤` each.
pub fn cdf_points(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = frac,
            _ => out.push((*v, frac)),
        }
    }
    out
}

/// One protected unit of work: a user (offline) or a user-day (online).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub user: UserId,
    pub day: Option<NaiveDate>,
    pub params: BTreeMap<String, f64>,
    pub pois: f64,
    pub distortion_m: f64,
    pub coverage: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub run_config: RunConfig,
    pub rows_file: String,
    pub cdf: BTreeMap<String, Vec<(f64, f64)>>,
    pub param_cdf: BTreeMap<String, Vec<(f64, f64)>>,
    pub per_user_param_range: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub run_config: RunConfig,
    /// Sorted by `(user, day)`.
    pub rows: Vec<Row>,
    /// Protected traces, aligned with `rows`.
    pub protected: Vec<Trace>,
}

pub const ROW_COLUMNS: [&str; 8] = [
    "user",
    "day",
    "param_name",
    "param_value",
    "pois",
    "distortion_m",
    "coverage",
    "cost",
];

/// Output paths derived from a prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportPaths {
    pub rows_csv: PathBuf,
    pub summary_json: PathBuf,
    pub protected_csv: PathBuf,
}

impl ReportPaths {
    pub fn from_prefix(prefix: impl AsRef<Path>) -> Self {
        let prefix = prefix.as_ref().as_os_str().to_string_lossy().into_owned();
        ReportPaths {
            rows_csv: PathBuf::from(format!("{prefix}_report.csv")),
            summary_json: PathBuf::from(format!("{prefix}_report.json")),
            protected_csv: PathBuf::from(format!("{prefix}_protected.csv")),
        }
    }
}

impl Report {
    pub fn summary(&self, rows_file: impl Into<String>) -> Summary {
        let column = |f: fn(&Row) -> f64| -> Vec<(f64, f64)> {
            cdf_points(&self.rows.iter().map(f).collect::<Vec<_>>())
        };
        let mut cdf = BTreeMap::new();
        cdf.insert("pois".to_string(), column(|r| r.pois));
        cdf.insert("distortion_m".to_string(), column(|r| r.distortion_m));
        cdf.insert("coverage".to_string(), column(|r| r.coverage));
        cdf.insert("cost".to_string(), column(|r| r.cost));

        let mut per_param: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut per_user: BTreeMap<String, BTreeMap<String, (f64, f64)>> = BTreeMap::new();
        for row in &self.rows {
            for (name, &v) in &row.params {
                per_param.entry(name.clone()).or_default().push(v);
                per_user
                    .entry(row.user.to_string())
                    .or_default()
                    .entry(name.clone())
                    .and_modify(|(lo, hi)| {
                        *lo = lo.min(v);
                        *hi = hi.max(v);
                    })
                    .or_insert((v, v));
            }
        }
        Summary {
            run_config: self.run_config.clone(),
            rows_file: rows_file.into(),
            cdf,
            param_cdf: per_param.into_iter().map(|(k, v)| (k, cdf_points(&v))).collect(),
            per_user_param_range: per_user
                .into_iter()
                .map(|(u, m)| (u, m.into_iter().map(|(k, (lo, hi))| (k, hi - lo)).collect()))
                .collect(),
        }
    }

    pub fn write_rows<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(ROW_COLUMNS)?;
        for r in &self.rows {
            let names: Vec<&str> = r.params.keys().map(String::as_str).collect();
            let values: Vec<String> = r.params.values().map(f64::to_string).collect();
            w.write_record([
                r.user.to_string(),
                r.day.map(|d| d.to_string()).unwrap_or_default(),
                names.join(";"),
                values.join(";"),
                r.pois.to_string(),
                r.distortion_m.to_string(),
                r.coverage.to_string(),
                r.cost.to_string(),
            ])?;
        }
        w.flush().map_err(|e| crate::Error::io("<csv>", e))?;
        Ok(())
    }

    /// Writes the rows CSV, the summary JSON and the protected traces.
    /// Each file is replaced atomically.
    pub fn write(&self, paths: &ReportPaths) -> Result<()> {
        let rows_file = paths
            .rows_csv
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default();
        let summary = self.summary(rows_file);
        write_atomic(&paths.protected_csv, |w| super::io::write_traces(w, &self.protected))?;
        write_atomic(&paths.rows_csv, |w| self.write_rows(w))?;
        write_atomic(&paths.summary_json, |w| {
            serde_json::to_writer_pretty(&mut *w, &summary)?;
            w.write_all(b"\n").map_err(|e| crate::Error::io(&paths.summary_json, e))
        })?;
        Ok(())
    }
}
