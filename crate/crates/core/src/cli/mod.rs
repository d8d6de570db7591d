//! Command-line front end.
//!
//! Every command accepts `--config FILE`, a flat `key = value` file whose keys
//! are flag names without the leading dashes. Values given on the command
//! line win over the file.

use crate::error::{Error, Result};
use crate::lppm::{LppmConfig, ParameterDomain};
use crate::optimizer::{parse_objectives, AnnealingSchedule, Objective, Selection};
use crate::pipeline::{
    generate_synthetic_dataset, load_dataset, run, write_dataset, Report, ReportPaths, RunConfig, SynthSpec, Unit,
};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "alp", version, about = "Tune and apply location-privacy mechanisms to GPS traces")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a fixed configuration and print the metric table.
    Evaluate(StaticArgs),
    /// Apply a fixed configuration and write the protected dataset and report.
    Protect(StaticArgs),
    /// Tune one configuration per user (offline scenario) and protect.
    Optimize(TuneArgs),
    /// Tune one configuration per user and UTC day (online scenario) and protect.
    Online(TuneArgs),
    /// Generate a synthetic dataset with planted points of interest.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input CSV with header `user,timestamp,lat,lon`.
    #[arg(long)]
    pub input: PathBuf,
    /// Output prefix; defaults to the input path without extension.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Mechanism name: `geo-i` or `promesse`.
    #[arg(long)]
    pub lppm: String,
    /// Comma-separated `<min|max>:<evaluator>[:scale=<real>]` objectives.
    #[arg(long)]
    pub objectives: Option<String>,
    /// Master seed; falls back to `ALP_SEED`, then 42.
    #[arg(long, env = "ALP_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Area-coverage cell edge, meters.
    #[arg(long, default_value_t = 250.0)]
    pub cell_size: f64,
    /// Maximum POI diameter, meters.
    #[arg(long, default_value_t = 200.0)]
    pub max_diameter: f64,
    /// Minimum POI stay, minutes.
    #[arg(long, default_value_t = 15.0)]
    pub min_stay: f64,
    /// POI match threshold, meters.
    #[arg(long, default_value_t = 100.0)]
    pub match_threshold: f64,
    /// Protections per metric evaluation (odd); default 1 for deterministic mechanisms, else 3.
    #[arg(long)]
    pub robust_k: Option<usize>,
    /// Flat key = value file of default flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StaticArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Parameter assignment `NAME=VALUE`, repeatable.
    #[arg(long = "param", required = true)]
    pub params: Vec<String>,
    /// Evaluate each UTC day separately instead of each user.
    #[arg(long)]
    pub per_day: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SelectionArg {
    Best,
    Final,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Override a search domain: `NAME=lin:LO:HI:N` or `NAME=log:LO:HI:N`, repeatable.
    #[arg(long = "domain")]
    pub domains: Vec<String>,
    /// Initial temperature.
    #[arg(long, default_value_t = 1.0)]
    pub t0: f64,
    /// Final temperature.
    #[arg(long, default_value_t = 1e-5)]
    pub t_min: f64,
    /// Cooling factor per step.
    #[arg(long, default_value_t = 0.9)]
    pub cooling: f64,
    /// Protect with the best state seen or the final state.
    #[arg(long, value_enum, default_value_t = SelectionArg::Best)]
    pub selection: SelectionArg,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Destination CSV.
    #[arg(long, default_value = "synthetic.csv")]
    pub output: PathBuf,
    /// Number of users.
    #[arg(long, default_value_t = 1)]
    pub users: usize,
    /// Number of days per user.
    #[arg(long, default_value_t = 1)]
    pub days: usize,
    /// Places visited by each user every day.
    #[arg(long, default_value_t = 3)]
    pub pois: usize,
    /// Minimum dwell per visit, minutes.
    #[arg(long, default_value_t = 30.0)]
    pub dwell: f64,
    /// Transit speed, m/s.
    #[arg(long, default_value_t = 10.0)]
    pub speed: f64,
    /// Sampling period, seconds.
    #[arg(long, default_value_t = 30.0)]
    pub sample_period: f64,
    /// First day, YYYY-MM-DD.
    #[arg(long, default_value = "2021-03-01")]
    pub start_date: NaiveDate,
    /// Seed; falls back to `ALP_SEED`, then 42.
    #[arg(long, env = "ALP_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Flat key = value file of default flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// A parsed command line with configuration-file values folded in.
#[derive(Debug)]
pub struct CliInvocation {
    pub command: Command,
    pub config_file: Option<PathBuf>,
}

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        pairs.push((k.trim().trim_start_matches('-').to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> std::result::Result<CliInvocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let config_file = find_config(&argv);
    let mut full = argv.clone();
    if let Some(path) = &config_file {
        let pairs = read_config_file(path).map_err(|e| {
            clap::Error::raw(clap::error::ErrorKind::Io, format!("{e}\n"))
        })?;
        // file values go right after the subcommand so command-line flags override them
        let mut injected = Vec::new();
        for (k, v) in pairs {
            match v.as_str() {
                "true" => injected.push(OsString::from(format!("--{k}"))),
                "false" => {}
                _ => {
                    injected.push(OsString::from(format!("--{k}")));
                    injected.push(OsString::from(v));
                }
            }
        }
        if full.len() >= 2 {
            full.splice(2..2, injected);
        }
    }
    let cli = Cli::try_parse_from(full)?;
    Ok(CliInvocation {
        command: cli.command,
        config_file,
    })
}

fn parse_assignment(s: &str) -> Result<(String, &str)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::config(format!("expected NAME=VALUE, got `{s}`")))?;
    Ok((k.trim().to_string(), v.trim()))
}

fn parse_domain(s: &str) -> Result<ParameterDomain> {
    let (name, spec) = parse_assignment(s)?;
    let bad = || Error::config(format!("expected NAME=lin|log:LO:HI:N, got `{s}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [kind, lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    match *kind {
        "lin" => ParameterDomain::linear(name, lo, hi, n),
        "log" => ParameterDomain::log10(name, lo, hi, n),
        _ => Err(bad()),
    }
}

fn apply_common(config: &mut RunConfig, c: &CommonArgs) -> Result<()> {
    if let Some(o) = &c.objectives {
        config.objectives = parse_objectives(o)?;
    }
    config.seed = c.seed;
    config.workers = c.workers;
    config.cell_size_m = c.cell_size;
    config.poi.max_diameter_m = c.max_diameter;
    config.poi.min_stay_ms = (c.min_stay * 60_000.0).round() as i64;
    config.poi.match_threshold_m = c.match_threshold;
    config.robust_k = c.robust_k;
    Ok(())
}

fn static_config(args: &StaticArgs) -> Result<RunConfig> {
    let mut lppm = LppmConfig::new(&args.common.lppm);
    for p in &args.params {
        let (k, v) = parse_assignment(p)?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::config(format!("parameter `{k}` is not a number: `{v}`")))?;
        lppm.assignment.insert(k, v);
    }
    let unit = if args.per_day { Unit::Day } else { Unit::User };
    let mut config = RunConfig::static_baseline(lppm, unit)?;
    apply_common(&mut config, &args.common)?;
    Ok(config)
}

fn tune_config(args: &TuneArgs, online: bool) -> Result<RunConfig> {
    let lppm = &args.common.lppm;
    let mut config = if online {
        RunConfig::online(lppm)?
    } else {
        RunConfig::offline(lppm)?
    };
    apply_common(&mut config, &args.common)?;
    if !args.domains.is_empty() {
        let mut domains = config.effective_domains()?;
        for spec in &args.domains {
            let d = parse_domain(spec)?;
            match domains.iter_mut().find(|x| x.name() == d.name()) {
                Some(slot) => *slot = d,
                None => return Err(Error::config(format!("{lppm} has no parameter `{}`", d.name()))),
            }
        }
        config.domains = Some(domains);
    }
    config.schedule = AnnealingSchedule {
        t0: args.t0,
        t_min: args.t_min,
        delta_t: args.cooling,
    };
    config.selection = match args.selection {
        SelectionArg::Best => Selection::Best,
        SelectionArg::Final => Selection::Final,
    };
    Ok(config)
}

fn output_prefix(common: &CommonArgs) -> PathBuf {
    common
        .output
        .clone()
        .unwrap_or_else(|| common.input.with_extension(""))
}

fn print_table(out: &mut dyn Write, report: &Report, objectives: &[Objective]) -> std::io::Result<()> {
    let names: Vec<String> = objectives.iter().map(Objective::to_string).collect();
    writeln!(out, "# objectives: {}", names.join(","))?;
    report.write_rows(&mut *out).map_err(std::io::Error::other)?;
    Ok(())
}

fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Evaluate(args) => {
            let config = static_config(args)?;
            let dataset = load_dataset(&args.common.input)?;
            let report = run(&dataset, &config)?;
            let stdout = std::io::stdout();
            print_table(&mut stdout.lock(), &report, &config.objectives)
                .map_err(|e| Error::io("<stdout>", e))
        }
        Command::Protect(args) => {
            let config = static_config(args)?;
            let dataset = load_dataset(&args.common.input)?;
            run(&dataset, &config)?.write(&ReportPaths::from_prefix(output_prefix(&args.common)))
        }
        Command::Optimize(args) | Command::Online(args) => {
            let config = tune_config(args, matches!(command, Command::Online(_)))?;
            let dataset = load_dataset(&args.common.input)?;
            run(&dataset, &config)?.write(&ReportPaths::from_prefix(output_prefix(&args.common)))
        }
        Command::Synth(args) => {
            let spec = SynthSpec {
                users: args.users,
                days: args.days,
                pois_per_user: args.pois,
                min_dwell_ms: (args.dwell * 60_000.0).round() as i64,
                speed_mps: args.speed,
                sample_period_ms: (args.sample_period * 1000.0).round() as i64,
                seed: args.seed,
                start_date: args.start_date,
                ..SynthSpec::default()
            };
            let synth = generate_synthetic_dataset(&spec)?;
            write_dataset(&args.output, &synth.dataset.traces)
        }
    }
}

/// Exit code: 0 on success, 1 on a runtime error.
pub fn run_invocation(invocation: &CliInvocation) -> i32 {
    match execute(&invocation.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Parses and runs; 2 on a usage error.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    match parse_args(argv) {
        Ok(inv) => run_invocation(&inv),
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            code
        }
    }
}
