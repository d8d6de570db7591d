//! Dataset ingestion, offline and online orchestration, and reports.

mod batch;
mod io;
mod report;
mod run;
mod synth;

pub use batch::{split_daily_batches, Batch};
pub use io::{load_dataset, parse_timestamp, write_atomic, write_dataset, HEADER};
pub use report::{cdf_points, Report, ReportPaths, Row, Summary, ROW_COLUMNS};
pub use run::{
    metric_settings, protect_and_score, run, run_offline, run_online, run_static, unit_stream, Mode, RunConfig,
    Scores, Unit,
};
pub use synth::{generate_synthetic_dataset, SynthSpec, SyntheticDataset};
