//! Command-line front end. Every command is a pure function of its flags
//! and seed; `--workers` changes wall time only.
//!
//! Exit codes: 0 success, 1 runtime or range error, 2 usage error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::annealed::{self, AnnealedRow, DEFAULT_SAMPLES};
use crate::ensemble::{self, SweepRow, SweepTable, DEFAULT_REALIZATIONS};
use crate::error::{Error, Result};
use crate::reactor::DEFAULT_MAX_SWEEPS;
use crate::scaling::{self, CollapseParams, Criterion, FitResult};

#[derive(Debug, Parser)]
#[command(name = "primegen", version, about = "Stochastic prime number generator experiments")]
pub struct Cli {
    /// Worker threads (affects wall time only, never output bytes)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// One ensemble at fixed (N, M)
    Simulate(SimulateArgs),
    /// Ensembles over a grid of N at fixed M
    Sweep(SweepArgs),
    /// Histogram of final-state values
    Distribution(SimulateArgs),
    /// Annealed no-reactive-pair probability q(N, M) over a grid of N
    Annealed(AnnealedArgs),
    /// Log-log power-law fit
    Fit(FitArgs),
    /// Finite-size-scaling collapse of sweep tables
    Collapse(CollapseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Output file (standard output when absent)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Pool size M (values drawn from 2..=M)
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..))]
    pub pool_size: u32,
    /// System size N
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub system_size: u32,
    /// Realizations R
    #[arg(long, default_value_t = DEFAULT_REALIZATIONS, value_parser = clap::value_parser!(u32).range(1..))]
    pub realizations: u32,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_sweeps: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// A list of system sizes, given as `start:stop:step` (inclusive) or as a
/// comma-separated list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grid(pub Vec<u32>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("bad grid entry '{t}': {e}"));
        let values: Vec<u32> = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, stop, step] = parts[..] else {
                return Err("range grid must be start:stop:step".into());
            };
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step == 0 {
                return Err("grid step must be positive".into());
            }
            (start..=stop).step_by(step as usize).collect()
        } else {
            s.split(',').map(num).collect::<std::result::Result<_, _>>()?
        };
        if values.is_empty() {
            return Err("grid is empty".into());
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err("grid must be strictly increasing".into());
        }
        Ok(Grid(values))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..))]
    pub pool_size: u32,
    /// N grid: start:stop:step or a comma-separated list
    #[arg(long)]
    pub n_grid: Grid,
    #[arg(long, default_value_t = DEFAULT_REALIZATIONS, value_parser = clap::value_parser!(u32).range(1..))]
    pub realizations: u32,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_sweeps: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct AnnealedArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(4..))]
    pub pool_size: u32,
    #[arg(long)]
    pub n_grid: Grid,
    /// Samples S per grid point
    #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = clap::value_parser!(u32).range(1..))]
    pub samples: u32,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    /// Fit y-col against x-col of a single CSV file
    Columns,
    /// Detect N_c on every sweep table and fit it against M / ln M
    Threshold,
    /// Fit the peak of tau against M / ln M
    TauPeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum XTransform {
    Identity,
    /// Replace x = M by M / ln M
    CharacteristicSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionArg {
    FirstNonzero,
    HalfCrossing,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Input CSV files (sweep tables for the threshold and tau-peak modes)
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = FitMode::Columns)]
    pub mode: FitMode,
    #[arg(long, default_value = "x")]
    pub x_col: String,
    #[arg(long, default_value = "y")]
    pub y_col: String,
    #[arg(long, value_enum, default_value_t = XTransform::Identity)]
    pub x_transform: XTransform,
    #[arg(long, value_enum, default_value_t = CriterionArg::FirstNonzero)]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = scaling::DEFAULT_THETA)]
    pub theta: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Column {
    #[value(name = "P")]
    P,
    #[value(name = "tau")]
    Tau,
}

#[derive(Debug, Args, Serialize)]
pub struct CollapseArgs {
    /// Sweep tables, one or more pool sizes each
    #[arg(long, required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub nc: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    /// Column to rescale
    #[arg(long, value_enum, default_value_t = Column::P)]
    pub column: Column,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Parses the process arguments, runs the command and maps errors to exit
/// codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Runs a parsed command line on a pool of `--workers` threads.
pub fn run(cli: &Cli) -> Result<()> {
    let resolved = serde_json::to_string(&cli.command)?;
    eprintln!("config: {resolved}");
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool.build().map_err(|e| Error::Io(e.to_string()))?;
    pool.install(|| dispatch(&cli.command))
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Distribution(a) => cmd_distribution(a),
        Command::Annealed(a) => cmd_annealed(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Collapse(a) => cmd_collapse(a),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn write_records<T: Serialize>(out: &OutputArgs, records: &[T]) -> Result<()> {
    let mut w = open_output(out.output.as_deref())?;
    match out.format {
        Format::Csv => {
            let mut cw = csv_writer(&mut w);
            for r in records {
                cw.serialize(r)?;
            }
            cw.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, records)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = open_output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateRecord<'a> {
    #[serde(flatten)]
    row: &'a SweepRow,
    tau_raw: f64,
    unreliable: bool,
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let stats = ensemble::run_ensemble(a.pool_size, a.system_size, a.realizations, a.seed, a.max_sweeps)?;
    warn_unreliable(&stats);
    let row = SweepRow::from(&stats);
    match a.out.format {
        Format::Csv => write_records(&a.out, &[row]),
        Format::Json => write_json(
            a.out.output.as_deref(),
            &SimulateRecord { row: &row, tau_raw: stats.tau_raw, unreliable: stats.unreliable },
        ),
    }
}

fn warn_unreliable(stats: &ensemble::EnsembleStats) {
    if stats.unreliable {
        eprintln!(
            "warning: M = {} N = {}: {} of {} runs truncated; statistics unreliable",
            stats.pool, stats.size, stats.truncated_runs, stats.realizations
        );
    }
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let (table, stats) =
        ensemble::sweep_over_n_full(a.pool_size, &a.n_grid.0, a.realizations, a.seed, a.max_sweeps)?;
    stats.iter().for_each(warn_unreliable);
    write_records(&a.out, &table.rows)
}

#[derive(Serialize)]
struct HistogramRecord {
    value: u32,
    count: u64,
}

pub fn cmd_distribution(a: &SimulateArgs) -> Result<()> {
    let stats = ensemble::run_ensemble(a.pool_size, a.system_size, a.realizations, a.seed, a.max_sweeps)?;
    warn_unreliable(&stats);
    let records: Vec<_> = stats.histogram.iter().map(|(value, count)| HistogramRecord { value, count }).collect();
    write_records(&a.out, &records)
}

pub fn cmd_annealed(a: &AnnealedArgs) -> Result<()> {
    let curve = annealed::annealed_curve(a.pool_size, &a.n_grid.0, a.samples, a.seed)?;
    match annealed::annealed_threshold(&curve) {
        Ok(nc) => eprintln!("annealed threshold N_c = {nc}"),
        Err(e) => eprintln!("note: {e}"),
    }
    write_records(&a.out, &curve.rows)
}

/// Reads the sweep rows of one or more CSV files and groups them into one
/// table per pool size, sorted by `M`.
pub fn read_sweep_tables(paths: &[PathBuf]) -> Result<Vec<SweepTable>> {
    let mut by_pool: BTreeMap<u32, Vec<SweepRow>> = BTreeMap::new();
    for p in paths {
        let mut r = csv::Reader::from_path(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        for rec in r.deserialize::<SweepRow>() {
            let row = rec?;
            by_pool.entry(row.pool).or_default().push(row);
        }
    }
    by_pool.into_values().map(SweepTable::from_rows).collect()
}

pub fn read_annealed_rows(path: &Path) -> Result<Vec<AnnealedRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

fn read_columns(paths: &[PathBuf], x_col: &str, y_col: &str) -> Result<Vec<(f64, f64)>> {
    let mut pts = Vec::new();
    for p in paths {
        let mut r = csv::Reader::from_path(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        let headers = r.headers()?.clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("{}: no column '{name}'", p.display())))
        };
        let (xi, yi) = (find(x_col)?, find(y_col)?);
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec[i].trim().parse().map_err(|e| Error::Parse(format!("'{}': {e}", &rec[i])))
            };
            pts.push((parse(xi)?, parse(yi)?));
        }
    }
    Ok(pts)
}

#[derive(Serialize)]
struct FitRecord {
    #[serde(flatten)]
    fit: FitResult,
    prefactor: f64,
    points: Vec<(f64, f64)>,
}

pub fn cmd_fit(a: &FitArgs) -> Result<()> {
    let points = match a.mode {
        FitMode::Columns => {
            let raw = read_columns(&a.inputs, &a.x_col, &a.y_col)?;
            match a.x_transform {
                XTransform::Identity => raw,
                XTransform::CharacteristicSize => raw
                    .into_iter()
                    .map(|(x, y)| {
                        if x < 2.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
                            Err(Error::domain(format!("x = {x} is not a pool size")))
                        } else {
                            Ok((scaling::characteristic_size(x as u32), y))
                        }
                    })
                    .collect::<Result<_>>()?,
            }
        }
        FitMode::Threshold => {
            let tables = read_sweep_tables(&a.inputs)?;
            scaling::thresholds(&tables, criterion(a.criterion, a.theta))?
                .into_iter()
                .map(|(m, nc)| (scaling::characteristic_size(m), nc))
                .collect()
        }
        FitMode::TauPeak => read_sweep_tables(&a.inputs)?
            .iter()
            .map(|t| Ok((scaling::characteristic_size(t.pool), scaling::tau_peak(t)?.1)))
            .collect::<Result<_>>()?,
    };
    let fit = scaling::fit_power_law(&points)?;
    write_json(a.output.as_deref(), &FitRecord { fit, prefactor: fit.prefactor(), points })
}

fn criterion(c: CriterionArg, theta: f64) -> Criterion {
    match c {
        CriterionArg::FirstNonzero => Criterion::FirstNonzero { theta },
        CriterionArg::HalfCrossing => Criterion::HalfCrossing,
    }
}

#[derive(Serialize)]
struct CollapseRecord<'a> {
    params: CollapseParams,
    quality: Option<f64>,
    points: Vec<&'a scaling::CollapsePoint>,
}

pub fn cmd_collapse(a: &CollapseArgs) -> Result<()> {
    let tables = read_sweep_tables(&a.inputs)?;
    let params = CollapseParams { n_c: a.nc, nu: a.nu, beta: a.beta };
    let ct = match a.column {
        Column::P => scaling::collapse(&tables, params)?,
        Column::Tau => scaling::collapse_with(&tables, params, |r| r.tau)?,
    };
    let quality = match scaling::collapse_quality(&ct) {
        Ok(q) => {
            eprintln!("collapse_quality {q}");
            Some(q)
        }
        Err(e) => {
            eprintln!("note: {e}");
            None
        }
    };
    let points: Vec<_> = ct.curves.iter().flat_map(|c| c.points.iter()).collect();
    match a.out.format {
        Format::Csv => write_records(&a.out, &points),
        Format::Json => write_json(a.out.output.as_deref(), &CollapseRecord { params, quality, points }),
    }
}
