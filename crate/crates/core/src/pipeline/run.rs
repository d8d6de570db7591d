use super::batch::split_daily_batches;
use super::report::{Report, Row};
use crate::error::{Error, Result};
use crate::geo::{CellGrid, Dataset, Trace, UserId, DEFAULT_CELL_SIZE_M};
use crate::lppm::{apply_lppm, builtin_registry, LppmConfig, ParameterDomain};
use crate::metrics::{Evaluator, MetricKind, MetricSettings, PoiClusteringParams, Reference};
use crate::optimizer::{anneal, combine_cost, default_objectives, AnnealingSchedule, Objective, Selection};
use crate::rng::RandomStream;
use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One tuned configuration per user.
    Offline,
    /// One tuned configuration per user and UTC day.
    Online,
    /// A fixed configuration, no tuning.
    StaticBaseline,
}

/// Unit of work for the static baseline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    User,
    Day,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub lppm_name: String,
    /// Search space; `None` uses the mechanism's default domains.
    pub domains: Option<Vec<ParameterDomain>>,
    /// Fixed configuration for the static baseline.
    pub static_config: Option<LppmConfig>,
    pub static_unit: Unit,
    pub objectives: Vec<Objective>,
    pub schedule: AnnealingSchedule,
    pub selection: Selection,
    pub poi: PoiClusteringParams,
    pub cell_size_m: f64,
    pub seed: u64,
    /// Protections per metric evaluation; `None` picks 1 for deterministic
    /// mechanisms and 3 otherwise.
    pub robust_k: Option<usize>,
    /// Worker threads; `None` uses the global pool. Never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl RunConfig {
    fn base(mode: Mode, lppm_name: &str) -> Result<Self> {
        Ok(RunConfig {
            mode,
            lppm_name: lppm_name.to_string(),
            domains: None,
            static_config: None,
            static_unit: Unit::User,
            objectives: default_objectives(lppm_name)?,
            schedule: AnnealingSchedule::default(),
            selection: Selection::Best,
            poi: PoiClusteringParams::default(),
            cell_size_m: DEFAULT_CELL_SIZE_M,
            seed: 42,
            robust_k: None,
            workers: None,
        })
    }

    pub fn offline(lppm_name: &str) -> Result<Self> {
        RunConfig::base(Mode::Offline, lppm_name)
    }

    pub fn online(lppm_name: &str) -> Result<Self> {
        RunConfig::base(Mode::Online, lppm_name)
    }

    pub fn static_baseline(config: LppmConfig, unit: Unit) -> Result<Self> {
        let mut c = RunConfig::base(Mode::StaticBaseline, &config.lppm_name)?;
        c.static_config = Some(config);
        c.static_unit = unit;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let lppm = builtin_registry().get(&self.lppm_name)?;
        if self.objectives.is_empty() {
            return Err(Error::config("at least one objective is required"));
        }
        if !(self.cell_size_m > 0.0) {
            return Err(Error::config("cell size must be positive"));
        }
        self.poi.validate()?;
        if let Some(k) = self.robust_k {
            if k == 0 || k % 2 == 0 {
                return Err(Error::config(format!("robust repetitions must be odd, got {k}")));
            }
        }
        match self.mode {
            Mode::StaticBaseline => {
                let cfg = self
                    .static_config
                    .as_ref()
                    .ok_or_else(|| Error::config("static baseline needs a full parameter assignment"))?;
                if cfg.lppm_name != self.lppm_name {
                    return Err(Error::config("static configuration names another mechanism"));
                }
                builtin_registry().validate(cfg)?;
            }
            Mode::Offline | Mode::Online => {
                self.schedule.validate()?;
                let defaults = lppm.default_domains();
                let domains = self.domains.as_ref().unwrap_or(&defaults);
                for d in &defaults {
                    if !domains.iter().any(|x| x.name() == d.name()) {
                        return Err(Error::config(format!("missing domain for `{}`", d.name())));
                    }
                }
                if domains.len() != defaults.len() {
                    return Err(Error::config(format!("{} takes {} parameter(s)", self.lppm_name, defaults.len())));
                }
            }
        }
        Ok(())
    }

    pub fn effective_domains(&self) -> Result<Vec<ParameterDomain>> {
        match &self.domains {
            Some(d) => Ok(d.clone()),
            None => Ok(builtin_registry().get(&self.lppm_name)?.default_domains()),
        }
    }

    pub fn effective_k(&self) -> Result<usize> {
        Ok(match self.robust_k {
            Some(k) => k,
            None if builtin_registry().get(&self.lppm_name)?.is_deterministic() => 1,
            None => 3,
        })
    }

    fn unit(&self) -> Unit {
        match self.mode {
            Mode::Offline => Unit::User,
            Mode::Online => Unit::Day,
            Mode::StaticBaseline => self.static_unit,
        }
    }
}

/// Random stream owned by one unit of work.
pub fn unit_stream(seed: u64, user: &UserId, day: Option<NaiveDate>) -> RandomStream {
    let s = RandomStream::new(seed).child(format_args!("user/{user}"));
    match day {
        Some(d) => s.child(format_args!("day/{d}")),
        None => s,
    }
}

/// Metric values of one protected output and their objective cost.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scores {
    pub pois: f64,
    pub distortion_m: f64,
    pub coverage: f64,
    pub cost: f64,
}

/// Protects the reference once on `stream/protect` and scores the output.
pub fn protect_and_score(
    reference: &Reference,
    config: &LppmConfig,
    objectives: &[Objective],
    stream: &RandomStream,
) -> Result<(Scores, Trace)> {
    let protected = apply_lppm(config, reference.trace(), &stream.child("protect"))?;
    let pois = MetricKind::Pois.evaluate(reference, &protected)?;
    let distortion_m = MetricKind::Distortion.evaluate(reference, &protected)?;
    let coverage = MetricKind::Coverage.evaluate(reference, &protected)?;
    let values: Vec<f64> = objectives
        .iter()
        .map(|o| match o.metric {
            MetricKind::Pois => pois,
            MetricKind::Distortion => distortion_m,
            MetricKind::Coverage => coverage,
        })
        .collect();
    let cost = combine_cost(objectives, &values);
    Ok((
        Scores {
            pois,
            distortion_m,
            coverage,
            cost,
        },
        protected,
    ))
}

struct WorkItem {
    user: UserId,
    day: Option<NaiveDate>,
    trace: Trace,
}

fn work_items(dataset: &Dataset, unit: Unit) -> Result<Vec<WorkItem>> {
    let mut items = Vec::new();
    for user in dataset.users() {
        let traces: Vec<&Trace> = dataset.traces_of(&user).collect();
        let trace = Trace::concat(user.clone(), &traces)?;
        match unit {
            Unit::User => {
                if !trace.is_empty() {
                    items.push(WorkItem {
                        user,
                        day: None,
                        trace,
                    })
                }
            }
            Unit::Day => items.extend(split_daily_batches(&trace).into_iter().map(|b| WorkItem {
                user: b.user,
                day: Some(b.day),
                trace: b.trace,
            })),
        }
    }
    Ok(items)
}

fn process(
    item: &WorkItem,
    config: &RunConfig,
    settings: &MetricSettings,
    domains: &[ParameterDomain],
    k: usize,
) -> Result<(Row, Trace)> {
    let stream = unit_stream(config.seed, &item.user, item.day);
    let reference = Reference::new(item.trace.clone(), *settings);
    let chosen = match config.mode {
        Mode::StaticBaseline => config.static_config.clone().expect("validated"),
        Mode::Offline | Mode::Online => {
            let result = anneal(
                &config.lppm_name,
                domains,
                &config.objectives,
                &reference,
                &config.schedule,
                k,
                &stream.child("anneal"),
            )?;
            result.selected(config.selection).clone()
        }
    };
    let (scores, protected) = protect_and_score(&reference, &chosen, &config.objectives, &stream)?;
    Ok((
        Row {
            user: item.user.clone(),
            day: item.day,
            params: chosen.assignment,
            pois: scores.pois,
            distortion_m: scores.distortion_m,
            coverage: scores.coverage,
            cost: scores.cost,
        },
        protected,
    ))
}

/// Metric settings for `dataset`: the cell grid uses its mean latitude.
pub fn metric_settings(dataset: &Dataset, config: &RunConfig) -> Result<MetricSettings> {
    Ok(MetricSettings::new(
        config.poi,
        CellGrid::new(config.cell_size_m, dataset.reference_latitude())?,
    ))
}

/// Runs any mode. Units are processed in parallel; the report does not depend
/// on the number of workers.
pub fn run(dataset: &Dataset, config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let settings = metric_settings(dataset, config)?;
    let domains = config.effective_domains()?;
    let k = config.effective_k()?;
    let items = work_items(dataset, config.unit())?;

    let work = || -> Result<Vec<(Row, Trace)>> {
        items
            .par_iter()
            .map(|item| process(item, config, &settings, &domains, k))
            .collect()
    };
    let results = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::config(format!("cannot start {n} workers: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let (rows, protected) = results.into_iter().unzip();
    Ok(Report {
        run_config: config.clone(),
        rows,
        protected,
    })
}

pub fn run_offline(dataset: &Dataset, config: &RunConfig) -> Result<Report> {
    if config.mode != Mode::Offline {
        return Err(Error::config("run_offline needs mode = offline"));
    }
    run(dataset, config)
}

pub fn run_online(dataset: &Dataset, config: &RunConfig) -> Result<Report> {
    if config.mode != Mode::Online {
        return Err(Error::config("run_online needs mode = online"));
    }
    run(dataset, config)
}

pub fn run_static(dataset: &Dataset, config: &RunConfig) -> Result<Report> {
    if config.mode != Mode::StaticBaseline {
        return Err(Error::config("run_static needs mode = static-baseline"));
    }
    run(dataset, config)
}
