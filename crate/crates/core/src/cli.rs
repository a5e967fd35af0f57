//! `purebirth` command-line front end.
//!
//! Every subcommand takes the same model flags. `--config <path>` reads a
//! flat `key = value` file whose keys are the long flag names without the
//! leading dashes; flags given on the command line win over file values.
//!
//! CSV output has a header row and renders floats with 17 significant
//! digits. JSON output holds a `metadata` object and one object per CSV row
//! under `rows`.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::analytic::{expected_absorption_time, powerlaw_expected_time, PowerLawRegime};
use crate::forward_solver::{forward_grid, Method, SolverConfig};
use crate::montecarlo::{
    estimate_absorption_time_with, explosion_study_with, simulate_paths, Execution, Quantiles,
};
use crate::rate_models::{Family, ModelSpec, RateModel};

pub const DEFAULT_REPLICATES: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 0;
/// Forward-solution rows below this probability are omitted.
pub const ROW_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "purebirth",
    version,
    about = "Pure-birth CTMC model of infection spread"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact and approximate expected time until everyone is infected.
    ExpectTime(CommonArgs),
    /// State distribution over a time grid from the forward equations.
    Forward {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Monte Carlo estimate of the absorption time.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write every trajectory as CSV rows (replicate, time, state).
        #[arg(long, value_name = "PATH")]
        dump_trajectories: Option<PathBuf>,
        /// Run replicates on one thread (output is identical either way).
        #[arg(long)]
        serial: bool,
    },
    /// Expected absorption time over a grid of one parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter to vary.
        #[arg(long)]
        vary: Option<SweepParam>,
        /// Comma-separated, strictly increasing grid values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Option<Vec<f64>>,
    },
    /// Time to reach the cap of a λ_k = c·k² chain.
    Explosion {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        serial: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "N")]
    Population,
    P,
    Mu,
    Lambda,
    C,
}

impl SweepParam {
    fn key(self) -> &'static str {
        match self {
            SweepParam::Population => "N",
            SweepParam::P => "p",
            SweepParam::Mu => "mu",
            SweepParam::Lambda => "lambda",
            SweepParam::C => "c",
        }
    }
}

impl FromStr for SweepParam {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        <SweepParam as ValueEnum>::from_str(s, false).map_err(|e| anyhow!(e))
    }
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        <Format as ValueEnum>::from_str(s, true).map_err(|e| anyhow!(e))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// hypergeometric | yule | powerlaw
    #[arg(long)]
    pub family: Option<String>,
    /// Population size.
    #[arg(long = "N")]
    pub population: Option<u64>,
    /// Contact rate λ (hypergeometric).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Per-capita contact rate μ (yule), λ = Nμ.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Transmission probability per contact.
    #[arg(long)]
    pub p: Option<f64>,
    /// Power-law coefficient.
    #[arg(long)]
    pub c: Option<f64>,
    /// Power-law exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub exponent: Option<f64>,
    /// Absorbing cap state for power-law models.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Initial number infected.
    #[arg(long)]
    pub start: Option<u64>,
    /// Time-unit label carried into outputs.
    #[arg(long)]
    pub unit: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<u64>,
    /// Single output time.
    #[arg(long)]
    pub t: Option<f64>,
    /// Comma-separated, strictly increasing output times.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub t_grid: Option<Vec<f64>>,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Flat key = value file of defaults for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    /// adaptive | rk4
    #[arg(long)]
    pub method: Option<String>,
}

/// Config-file values keyed by flag name.
#[derive(Debug, Default)]
struct ConfigFile {
    values: BTreeMap<String, String>,
}

const CONFIG_KEYS: &[&str] = &[
    "family",
    "N",
    "lambda",
    "mu",
    "p",
    "c",
    "exponent",
    "cap",
    "start",
    "unit",
    "seed",
    "replicates",
    "t",
    "t-grid",
    "out",
    "format",
    "rel-tol",
    "abs-tol",
    "max-step",
    "method",
    "vary",
    "values",
];

impl ConfigFile {
    fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    fn parse(text: &str) -> anyhow::Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key `{key}`", lineno + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    fn get<T>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| anyhow!("config key `{key}` = `{v}`: {e}"))
            })
            .transpose()
    }

    fn get_list(&self, key: &str) -> anyhow::Result<Option<Vec<f64>>> {
        self.values
            .get(key)
            .map(|v| parse_list(v).with_context(|| format!("config key `{key}`")))
            .transpose()
    }
}

fn parse_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().map_err(|e| anyhow!("`{x}`: {e}")))
        .collect()
}

fn pick<T>(flag: Option<T>, file: &ConfigFile, key: &str) -> anyhow::Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

/// Flags merged with config-file values.
#[derive(Debug, Clone)]
pub struct Settings {
    pub spec: ModelSpec,
    pub start: u64,
    pub seed: u64,
    pub replicates: u64,
    pub times: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Settings {
    fn resolve(args: &CommonArgs, file: &ConfigFile) -> anyhow::Result<Self> {
        let family = pick(args.family.clone(), file, "family")?
            .map(|f| f.parse::<Family>())
            .transpose()?;
        let spec = ModelSpec {
            family,
            population: pick(args.population, file, "N")?,
            contact_rate: pick(args.lambda, file, "lambda")?,
            per_capita_rate: pick(args.mu, file, "mu")?,
            transmission_prob: pick(args.p, file, "p")?,
            coefficient: pick(args.c, file, "c")?,
            exponent: pick(args.exponent, file, "exponent")?,
            state_cap: pick(args.cap, file, "cap")?,
            time_unit: pick(args.unit.clone(), file, "unit")?,
        };
        let t = pick(args.t, file, "t")?;
        let grid = match &args.t_grid {
            Some(g) => Some(g.clone()),
            None => file.get_list("t-grid")?,
        };
        let times = match (t, grid) {
            (Some(_), Some(_)) => bail!("give either --t or --t-grid, not both"),
            (Some(t), None) => Some(vec![t]),
            (None, Some(g)) => Some(g),
            (None, None) => None,
        };
        if let Some(times) = &times {
            validate_grid("t-grid", times)?;
            if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                bail!("output time {t} must be finite and nonnegative");
            }
        }
        Ok(Self {
            spec,
            start: pick(args.start, file, "start")?.unwrap_or(1),
            seed: pick(args.seed, file, "seed")?.unwrap_or(DEFAULT_SEED),
            replicates: pick(args.replicates, file, "replicates")?.unwrap_or(DEFAULT_REPLICATES),
            times,
            out: pick(args.out.clone(), file, "out")?,
            format: pick(args.format, file, "format")?.unwrap_or(Format::Csv),
        })
    }

    fn model(&self) -> anyhow::Result<RateModel> {
        Ok(self.spec.build()?)
    }

    fn unit(&self) -> String {
        self.spec
            .time_unit
            .clone()
            .unwrap_or_else(|| crate::rate_models::DEFAULT_TIME_UNIT.to_string())
    }
}

fn validate_grid(name: &str, values: &[f64]) -> anyhow::Result<()> {
    if values.is_empty() {
        bail!("{name} is empty");
    }
    for w in values.windows(2) {
        if !(w[1] > w[0]) {
            bail!("{name} must be strictly increasing ({} then {})", w[0], w[1]);
        }
    }
    Ok(())
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Renders a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

/// Column-oriented result ready for CSV or JSON rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self, metadata: Value) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.to_json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        json!({ "metadata": metadata, "rows": rows })
    }
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn emit(
    settings: &Settings,
    command: &str,
    table: &Table,
    mut extra: Map<String, Value>,
) -> anyhow::Result<()> {
    let mut out = open_output(settings.out.as_deref())?;
    match settings.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => {
            let mut meta = Map::new();
            meta.insert("command".into(), json!(command));
            meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
            meta.insert("model".into(), serde_json::to_value(&settings.spec)?);
            meta.insert("start".into(), json!(settings.start));
            meta.insert("time_unit".into(), json!(settings.unit()));
            meta.append(&mut extra);
            serde_json::to_writer_pretty(&mut out, &table.to_json(Value::Object(meta)))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Parses `std::env::args` and runs the selected subcommand.
pub fn run_from_env() -> anyhow::Result<()> {
    run(Cli::parse())
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::ExpectTime(common) => {
            let (settings, _) = load(&common)?;
            let (table, meta) = expect_time_table(&settings)?;
            emit(&settings, "expect-time", &table, meta)
        }
        Command::Forward { common, solver } => {
            let (settings, file) = load(&common)?;
            let config = solver_config(&solver, &file)?;
            let (table, meta) = forward_table(&settings, &config)?;
            emit(&settings, "forward", &table, meta)
        }
        Command::Simulate {
            common,
            dump_trajectories,
            serial,
        } => {
            let (settings, _) = load(&common)?;
            let execution = if serial {
                Execution::Serial
            } else {
                Execution::Parallel
            };
            let (table, meta) = simulate_table(&settings, execution)?;
            if let Some(path) = dump_trajectories {
                dump_paths(&settings, execution, &path)?;
            }
            emit(&settings, "simulate", &table, meta)
        }
        Command::Sweep { common, vary, values } => {
            let (settings, file) = load(&common)?;
            let vary = pick(vary, &file, "vary")?.ok_or_else(|| anyhow!("sweep needs --vary"))?;
            let values = match values {
                Some(v) => Some(v),
                None => file.get_list("values")?,
            }
            .ok_or_else(|| anyhow!("sweep needs --values"))?;
            validate_grid("values", &values)?;
            let (table, meta) = sweep_table(&settings, vary, &values)?;
            emit(&settings, "sweep", &table, meta)
        }
        Command::Explosion { common, serial } => {
            let (settings, _) = load(&common)?;
            let execution = if serial {
                Execution::Serial
            } else {
                Execution::Parallel
            };
            let (table, meta) = explosion_table(&settings, execution)?;
            emit(&settings, "explosion", &table, meta)
        }
    }
}

fn load(common: &CommonArgs) -> anyhow::Result<(Settings, ConfigFile)> {
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let settings = Settings::resolve(common, &file)?;
    Ok((settings, file))
}

fn solver_config(args: &SolverArgs, file: &ConfigFile) -> anyhow::Result<SolverConfig> {
    let defaults = SolverConfig::default();
    let method = match pick(args.method.clone(), file, "method")?.as_deref() {
        None | Some("adaptive") => Method::Adaptive,
        Some("rk4") => Method::FixedRk4,
        Some(other) => bail!("unknown method `{other}` (expected adaptive or rk4)"),
    };
    let config = SolverConfig {
        method,
        abs_tol: pick(args.abs_tol, file, "abs-tol")?.unwrap_or(defaults.abs_tol),
        rel_tol: pick(args.rel_tol, file, "rel-tol")?.unwrap_or(defaults.rel_tol),
        max_step: pick(args.max_step, file, "max-step")?.unwrap_or(match method {
            Method::Adaptive => defaults.max_step,
            Method::FixedRk4 => 1e-3,
        }),
        ..defaults
    };
    config.validate()?;
    Ok(config)
}

pub fn expect_time_table(settings: &Settings) -> anyhow::Result<(Table, Map<String, Value>)> {
    let model = settings.model()?;
    let report = expected_absorption_time(&model, settings.start)?;
    let mut table = Table::new(&[
        "family",
        "start_state",
        "exact_mean",
        "closed_form",
        "approx_mean",
        "refined_approx",
        "variance",
        "time_unit",
        "truncated",
    ]);
    table.push(vec![
        model.family().name().into(),
        report.start_state.into(),
        report.exact_mean.into(),
        report.closed_form.into(),
        report.approx_mean.into(),
        report.refined_approx.into(),
        report.variance.into(),
        report.time_unit.clone().into(),
        report.truncated.into(),
    ]);
    Ok((table, Map::new()))
}

pub fn forward_table(
    settings: &Settings,
    config: &SolverConfig,
) -> anyhow::Result<(Table, Map<String, Value>)> {
    let model = settings.model()?;
    let times = settings
        .times
        .as_ref()
        .ok_or_else(|| anyhow!("forward needs --t or --t-grid"))?;
    let snapshots = forward_grid(&model, settings.start, times, config)?;
    let mut table = Table::new(&["time", "state", "probability"]);
    for snap in &snapshots {
        for (state, p) in snap.iter() {
            if p > ROW_THRESHOLD {
                table.push(vec![snap.time.into(), state.into(), p.into()]);
            }
        }
    }
    let mut meta = Map::new();
    meta.insert("solver".into(), serde_json::to_value(config)?);
    meta.insert("truncated".into(), json!(model.is_truncated()));
    meta.insert("absorbing_state".into(), json!(model.absorbing_state()));
    meta.insert(
        "mass_defect".into(),
        json!(snapshots.iter().map(|s| s.mass_defect).fold(0.0, f64::max)),
    );
    Ok((table, meta))
}

fn quantile_cells(q: &Quantiles) -> Vec<Cell> {
    vec![
        q.q05.into(),
        q.q25.into(),
        q.q50.into(),
        q.q75.into(),
        q.q95.into(),
    ]
}

pub fn simulate_table(
    settings: &Settings,
    execution: Execution,
) -> anyhow::Result<(Table, Map<String, Value>)> {
    let model = settings.model()?;
    let summary = estimate_absorption_time_with(
        &model,
        settings.start,
        settings.replicates,
        settings.seed,
        execution,
    )?;
    let analytic = expected_absorption_time(&model, settings.start)?;
    let mut table = Table::new(&[
        "replicates",
        "master_seed",
        "start_state",
        "mean",
        "std_error",
        "sample_variance",
        "q05",
        "q25",
        "q50",
        "q75",
        "q95",
        "exact_mean",
        "exact_variance",
        "time_unit",
    ]);
    let mut row = vec![
        summary.replicates.into(),
        summary.master_seed.into(),
        settings.start.into(),
        summary.mean.into(),
        summary.std_error.into(),
        summary.sample_variance.into(),
    ];
    row.extend(quantile_cells(&summary.quantiles));
    row.extend([
        analytic.exact_mean.into(),
        analytic.variance.into(),
        summary.time_unit.clone().into(),
    ]);
    table.push(row);
    let mut meta = Map::new();
    meta.insert("seed".into(), json!(settings.seed));
    meta.insert("replicates".into(), json!(settings.replicates));
    Ok((table, meta))
}

fn dump_paths(settings: &Settings, execution: Execution, path: &Path) -> anyhow::Result<()> {
    let model = settings.model()?;
    let paths = simulate_paths(
        &model,
        settings.start,
        settings.replicates,
        settings.seed,
        execution,
    )?;
    let mut table = Table::new(&["replicate", "time", "state"]);
    for (i, tr) in paths.iter().enumerate() {
        for ev in &tr.events {
            table.push(vec![(i as u64).into(), ev.time.into(), ev.state.into()]);
        }
    }
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    table.write_csv(io::BufWriter::new(file))
}

pub fn sweep_table(
    settings: &Settings,
    vary: SweepParam,
    values: &[f64],
) -> anyhow::Result<(Table, Map<String, Value>)> {
    let mut table = Table::new(&["parameter", "value", "exact_mean", "approx_mean", "time_unit"]);
    for &value in values {
        let mut spec = settings.spec.clone();
        let value_cell = match vary {
            SweepParam::Population => {
                if value.fract() != 0.0 || value < 0.0 {
                    bail!("N = {value} is not a nonnegative integer");
                }
                spec.population = Some(value as u64);
                Cell::Int(value as u64)
            }
            SweepParam::P => {
                spec.transmission_prob = Some(value);
                Cell::Float(value)
            }
            SweepParam::Mu => {
                spec.per_capita_rate = Some(value);
                Cell::Float(value)
            }
            SweepParam::Lambda => {
                spec.contact_rate = Some(value);
                Cell::Float(value)
            }
            SweepParam::C => {
                spec.coefficient = Some(value);
                Cell::Float(value)
            }
        };
        let (exact, approx) =
            sweep_point(&spec, settings.start).with_context(|| format!("at {} = {value}", vary.key()))?;
        table.push(vec![
            vary.key().into(),
            value_cell,
            exact.into(),
            approx.into(),
            settings.unit().into(),
        ]);
    }
    Ok((table, Map::new()))
}

/// Exact and approximate expected times at one grid point. Power-law
/// models read `N` as the number of transient states, i.e. cap = N + 1.
fn sweep_point(spec: &ModelSpec, start: u64) -> anyhow::Result<(f64, Option<f64>)> {
    if spec.family == Some(Family::PowerLaw) {
        let mut spec = spec.clone();
        if let Some(n) = spec.population {
            spec.state_cap = Some(n + 1);
        }
        let model = spec.build()?;
        let n = model.absorbing_state() - 1;
        let exponent = spec.exponent.expect("validated by build");
        if let (Ok(regime), 1) = (PowerLawRegime::from_exponent(exponent), start) {
            let c = spec.coefficient.expect("validated by build");
            let report = powerlaw_expected_time(c, regime, n)?;
            return Ok((report.value, report.growth.or(report.limit)));
        }
        return Ok((expected_absorption_time(&model, start)?.exact_mean, None));
    }
    let model = spec.build()?;
    let report = expected_absorption_time(&model, start)?;
    Ok((report.exact_mean, report.approx_mean))
}

pub fn explosion_table(
    settings: &Settings,
    execution: Execution,
) -> anyhow::Result<(Table, Map<String, Value>)> {
    let mut spec = settings.spec.clone();
    spec.family.get_or_insert(Family::PowerLaw);
    spec.exponent.get_or_insert(2.0);
    let model = spec.build()?;
    let study = explosion_study_with(
        &model,
        settings.start,
        settings.replicates,
        settings.seed,
        execution,
    )?;
    let mut table = Table::new(&[
        "cap",
        "start_state",
        "replicates",
        "master_seed",
        "mean",
        "std_error",
        "q05",
        "q25",
        "q50",
        "q75",
        "q95",
        "partial_sum",
        "limit",
        "tail_bound",
        "time_unit",
    ]);
    let s = &study.summary;
    let mut row = vec![
        study.cap.into(),
        study.start_state.into(),
        s.replicates.into(),
        s.master_seed.into(),
        s.mean.into(),
        s.std_error.into(),
    ];
    row.extend(quantile_cells(&s.quantiles));
    row.extend([
        study.partial_sum.into(),
        study.limit.into(),
        study.tail_bound.into(),
        s.time_unit.clone().into(),
    ]);
    table.push(row);
    let mut meta = Map::new();
    meta.insert("seed".into(), json!(settings.seed));
    meta.insert("replicates".into(), json!(settings.replicates));
    meta.insert("truncated_at_cap".into(), json!(study.cap));
    Ok((table, meta))
}
