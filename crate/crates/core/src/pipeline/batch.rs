use crate::geo::{Trace, UserId};
use chrono::NaiveDate;

/// One user's records within one UTC day.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub user: UserId,
    pub day: NaiveDate,
    pub trace: Trace,
}

/// Splits a trace at UTC midnights. A record at exactly 00:00:00.000 starts
/// the new day.
pub fn split_daily_batches(trace: &Trace) -> Vec<Batch> {
    let records = trace.records();
    let mut batches = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let day = records[start].time.epoch_day();
        let end = start + records[start..].partition_point(|r| r.time.epoch_day() == day);
        batches.push(Batch {
            user: trace.user().clone(),
            day: records[start].time.date(),
            trace: Trace::new(trace.user().clone(), records[start..end].to_vec())
                .expect("sub-slice of an ordered trace"),
        });
        start = end;
    }
    batches
}
