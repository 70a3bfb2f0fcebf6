use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mick::diagnostics::{
    hessian_definiteness, ratio_constancy, stationarity_fit, tp2_check, DefinitenessReport, RatioAudit,
    StationarityFit, Tp2Mode, Tp2Report, HESSIAN_MAX_N, UNIQUENESS_THRESHOLD,
};
use mick::ingest::{align, load_prices, load_series, log_returns, to_pseudo_observations};
use mick::solver::{calibrate_with, run, CalibrationOptions, CalibrationResult};
use mick::stats::{sample, summarize, DependenceSummary, RankConvention};
use mick::{Acceleration, CheckerboardCopula, Family, Measure, SolveReport, SolverConfig, SweepOrder, WindowKind};
use rayon::prelude::*;
use serde::Serialize;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  invalid input or options (bad flags, infeasible target, malformed matrix or data)
  3  an iterative method did not converge
  4  file could not be read or written";

const MICK_GRID: [f64; 11] = [0.3, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
const MICS_GRID: [f64; 18] = [
    0.001, 0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08,
    0.09,
];

/// Minimum-information checkerboard copulas under rank-correlation constraints.
#[derive(Parser)]
#[command(name = "mick", version, after_help = EXIT_CODES)]
struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Mick,
    Mics,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Mick => Family::Mick,
            FamilyArg::Mics => Family::Mics,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Ranks {
    /// (rank − 0.5)/N
    Midrank,
    /// rank/(N + 1)
    Scaled,
}

impl From<Ranks> for RankConvention {
    fn from(r: Ranks) -> Self {
        match r {
            Ranks::Midrank => RankConvention::MidRank,
            Ranks::Scaled => RankConvention::Scaled,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a MICK or MICS at a given ratio or correlation target.
    #[command(after_help = EXIT_CODES)]
    Solve(SolveArgs),
    /// Find the ratio that attains a target tau or rho.
    #[command(after_help = EXIT_CODES)]
    Calibrate(CalibrateArgs),
    /// Tabulate (ratio, rho, tau, information) over a ratio grid.
    #[command(after_help = EXIT_CODES)]
    Table(TableArgs),
    /// Run optimality and positivity diagnostics on a matrix file.
    #[command(after_help = EXIT_CODES)]
    Check(CheckArgs),
    /// Draw points from a matrix file as (u, v) CSV.
    #[command(after_help = EXIT_CODES)]
    Sample(SampleArgs),
    /// Summarize a price data set, calibrate both families to it and simulate.
    #[command(after_help = EXIT_CODES)]
    Fit(FitArgs),
}

#[derive(Args)]
#[group(id = "target", required = true, multiple = false)]
struct Target {
    /// Pseudo log odds ratio (mick) or log odds ratio (mics).
    #[arg(long, group = "target", allow_hyphen_values = true)]
    ratio: Option<f64>,
    /// Kendall's tau to calibrate to.
    #[arg(long, group = "target", allow_hyphen_values = true)]
    tau: Option<f64>,
    /// Spearman's rho to calibrate to.
    #[arg(long, group = "target", allow_hyphen_values = true)]
    rho: Option<f64>,
}

#[derive(Args)]
struct SolverArgs {
    /// Worst allowed window |log odds − log K|.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,
    /// Skip the Newton warm start and run plain greedy sweeps.
    #[arg(long)]
    no_newton: bool,
    /// Visit windows in a random order reshuffled each sweep.
    #[arg(long)]
    shuffle_seed: Option<u64>,
}

impl SolverArgs {
    fn config(&self, ratio: f64) -> SolverConfig {
        SolverConfig {
            ratio,
            max_sweeps: self.max_sweeps,
            tol: self.tol,
            sweep_order: self
                .shuffle_seed
                .map_or(SweepOrder::RowMajor, |seed| SweepOrder::RandomPermutation { seed }),
            acceleration: if self.no_newton { Acceleration::None } else { Acceleration::Newton },
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Mick)]
    family: FamilyArg,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[command(flatten)]
    target: Target,
    /// Calibration tolerance on the correlation.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the solved matrix here as CSV.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[group(id = "corr", required = true, multiple = false)]
struct CorrTarget {
    #[arg(long, group = "corr", allow_hyphen_values = true)]
    tau: Option<f64>,
    #[arg(long, group = "corr", allow_hyphen_values = true)]
    rho: Option<f64>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Mick)]
    family: FamilyArg,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[command(flatten)]
    target: CorrTarget,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Mick)]
    family: FamilyArg,
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Comma-separated ratios; defaults to the reference grid of the family.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ratios: Option<Vec<f64>>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the table here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Matrix CSV, one row per line.
    matrix: PathBuf,
    /// Multiplier for the definiteness test; defaults to the fitted lambda.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Write per-window odds (pseudo kind) to this CSV.
    #[arg(long)]
    windows: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    matrix: PathBuf,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write points here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Price CSV with a date column first.
    input: PathBuf,
    /// Column holding the first price series.
    #[arg(long)]
    x: String,
    /// Column holding the second price series.
    #[arg(long)]
    y: String,
    /// Read the second series from this file, inner-joined on dates.
    #[arg(long)]
    y_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Ranks::Midrank)]
    ranks: Ranks,
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Simulated data sets per family.
    #[arg(long, default_value_t = 150)]
    replicates: usize,
    /// Points per simulated data set; defaults to the number of returns.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the pseudo-observations here as (u, v) CSV.
    #[arg(long)]
    pseudo_output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(m) = cause.downcast_ref::<mick::Error>() {
            return if m.is_io() {
                4
            } else if m.is_convergence() {
                3
            } else {
                2
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return 4;
        }
    }
    2
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, cli.format),
        Command::Calibrate(a) => cmd_calibrate(a, cli.format),
        Command::Table(a) => cmd_table(a, cli.format),
        Command::Check(a) => cmd_check(a, cli.format),
        Command::Sample(a) => cmd_sample(a),
        Command::Fit(a) => cmd_fit(a, cli.format),
    }
}

fn emit<T: Serialize + ?Sized>(format: Format, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    let out = match format {
        Format::Json => serde_json::to_string_pretty(value)?,
        Format::Text => text(),
    };
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{out}")?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn calibration_options(tolerance: f64, solver: &SolverArgs) -> CalibrationOptions {
    CalibrationOptions {
        tolerance,
        solver: solver.config(0.0),
        ..Default::default()
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<&'a CalibrationResult>,
    report: &'a SolveReport,
}

fn cmd_solve(a: &SolveArgs, format: Format) -> Result<()> {
    let family = a.family.into();
    let (report, calibration) = match (a.target.ratio, a.target.tau, a.target.rho) {
        (Some(r), _, _) => (run(a.n, family, &a.solver.config(r), None)?, None),
        (_, tau, rho) => {
            let (target, measure) = match (tau, rho) {
                (Some(t), _) => (t, Measure::Kendall),
                (_, Some(r)) => (r, Measure::Spearman),
                _ => unreachable!("clap requires one target"),
            };
            let c = calibrate_with(a.n, target, measure, family, &calibration_options(a.tolerance, &a.solver))?;
            (c.report, Some(c.result))
        }
    };
    if let Some(path) = &a.output {
        report.copula.write_csv(path)?;
    }
    let out = SolveOutput {
        calibration: calibration.as_ref(),
        report: &report,
    };
    emit(format, &out, || match &calibration {
        Some(c) => format!("{c}\n\n{report}"),
        None => report.to_string(),
    })?;
    report.into_converged()?;
    Ok(())
}

fn cmd_calibrate(a: &CalibrateArgs, format: Format) -> Result<()> {
    let (target, measure) = match (a.target.tau, a.target.rho) {
        (Some(t), _) => (t, Measure::Kendall),
        (_, Some(r)) => (r, Measure::Spearman),
        _ => unreachable!("clap requires one target"),
    };
    let c = calibrate_with(a.n, target, measure, a.family.into(), &calibration_options(a.tolerance, &a.solver))?;
    emit(format, &c.result, || c.result.to_string())
}

#[derive(Serialize)]
struct TableRow {
    ratio: f64,
    rho: f64,
    tau: f64,
    information: f64,
}

fn cmd_table(a: &TableArgs, format: Format) -> Result<()> {
    let family: Family = a.family.into();
    let ratios = a.ratios.clone().unwrap_or_else(|| match family {
        Family::Mick => MICK_GRID.to_vec(),
        Family::Mics => MICS_GRID.to_vec(),
    });
    let rows: Vec<TableRow> = ratios
        .par_iter()
        .map(|&r| {
            let rep = run(a.n, family, &a.solver.config(r), None)?.into_converged()?;
            Ok(TableRow {
                ratio: r,
                rho: rep.rho,
                tau: rep.tau,
                information: rep.information,
            })
        })
        .collect::<mick::Result<_>>()?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&rows)?,
        Format::Text => {
            let mut s = String::from("ratio,rho,tau,information\n");
            for r in &rows {
                s.push_str(&format!("{},{:.6},{:.6},{:.6}\n", r.ratio, r.rho, r.tau, r.information));
            }
            s
        }
    };
    match &a.output {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Which family's optimality condition the matrix satisfies.
#[derive(Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Classification {
    Mick,
    Mics,
    /// both conditions; only the uniform copula
    Both,
    Neither,
}

/// Ratio constancy accepted as a stationary point.
const CONSTANCY_TOL: f64 = 1e-6;

#[derive(Serialize)]
struct CheckOutput {
    n: usize,
    classification: Classification,
    /// n²/12 times the log odds ratio, for MICS
    theta: Option<f64>,
    pseudo_ratio: Option<RatioAudit>,
    plain_ratio: Option<RatioAudit>,
    tp2: Tp2Report,
    stationarity: Option<StationarityFit>,
    definiteness: Option<DefinitenessReport>,
    unique: Option<bool>,
    notes: Vec<String>,
}

fn audit_line(name: &str, a: &Option<RatioAudit>) -> String {
    match a {
        Some(a) => format!("{name} ratio: mean {:.10}, max deviation {:.3e}\n", a.mean, a.max_deviation),
        None => format!("{name} ratio: undefined\n"),
    }
}

fn cmd_check(a: &CheckArgs, format: Format) -> Result<()> {
    let p = CheckerboardCopula::read_csv(&a.matrix)?;
    let n = p.n();
    let mut notes = Vec::new();
    let pseudo = ratio_constancy(&p, WindowKind::Pseudo).ok();
    let plain = ratio_constancy(&p, WindowKind::Plain).ok();
    if let (Some(path), Some(audit)) = (&a.windows, &pseudo) {
        audit.write_csv(path)?;
    }
    let tp2 = tp2_check(&p, Tp2Mode::Adjacent);
    let stationarity = match stationarity_fit(&p) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(format!("stationarity fit skipped: {e}"));
            None
        }
    };
    let fitted = stationarity.as_ref().and_then(|f| f.lambda);
    if stationarity.is_some() && fitted.is_none() {
        notes.push("lambda is not identifiable; the fit is gauge-degenerate".into());
    }
    let lambda = a.lambda.or(fitted);
    let definiteness = match lambda {
        Some(l) if n <= HESSIAN_MAX_N && p.first_zero().is_none() => Some(hessian_definiteness(&p, l)?),
        Some(_) if n > HESSIAN_MAX_N => {
            notes.push(format!("definiteness check skipped for n > {HESSIAN_MAX_N}"));
            None
        }
        _ => None,
    };
    let constant = |a: &Option<RatioAudit>| a.as_ref().is_some_and(|a| a.max_deviation < CONSTANCY_TOL);
    let classification = match (constant(&pseudo), constant(&plain)) {
        (true, true) => Classification::Both,
        (true, false) => Classification::Mick,
        (false, true) => Classification::Mics,
        (false, false) => Classification::Neither,
    };
    let theta = match classification {
        Classification::Mics | Classification::Both => plain.as_ref().map(|a| (n * n) as f64 / 12.0 * a.mean),
        _ => None,
    };
    let unique = match classification {
        Classification::Mick | Classification::Both => fitted.map(|l| l.abs() < UNIQUENESS_THRESHOLD),
        _ => None,
    };
    if classification == Classification::Mics {
        notes.push("the Kendall stationarity fit and Hessian apply to MICK; MICS solves a convex problem".into());
    }
    let out = CheckOutput {
        n,
        classification,
        theta,
        pseudo_ratio: pseudo,
        plain_ratio: plain,
        tp2,
        stationarity,
        definiteness,
        unique,
        notes,
    };
    emit(format, &out, || {
        let mut s = format!("n = {n}\n");
        s.push_str(&audit_line("pseudo log odds", &out.pseudo_ratio));
        s.push_str(&audit_line("log odds", &out.plain_ratio));
        let class = match out.classification {
            Classification::Mick => "MICK (constant pseudo log odds ratio)",
            Classification::Mics => "MICS (constant log odds ratio)",
            Classification::Both => "uniform (both ratios constant)",
            Classification::Neither => "not a stationary point of either family",
        };
        s.push_str(&format!("classification: {class}\n"));
        if let Some(t) = out.theta {
            s.push_str(&format!("theta: {t:.10}\n"));
        }
        s.push_str(&format!(
            "TP2: {} (min adjacent minor {:.3e}, {} violations)\n",
            if out.tp2.holds { "holds" } else { "VIOLATED" },
            out.tp2.min_minor,
            out.tp2.violations
        ));
        if let Some(f) = &out.stationarity {
            let l = f.lambda.map_or("n/a".to_string(), |l| format!("{l:.10}"));
            s.push_str(&format!("stationarity: lambda {l}, residual {:.3e}\n", f.residual_norm));
        }
        if let Some(d) = &out.definiteness {
            s.push_str(&format!(
                "Hessian at lambda {:.6}: {} (min eigenvalue {:.3e}, |quotient| <= {:.6})\n",
                d.lambda_used,
                if d.positive_definite { "positive definite" } else { "NOT positive definite" },
                d.min_eigenvalue,
                d.quotient_bound()
            ));
        }
        match out.unique {
            Some(true) => s.push_str("uniqueness: |lambda| < 2, the stationary point is the unique minimizer\n"),
            Some(false) => s.push_str("uniqueness: |lambda| >= 2, uniqueness is not guaranteed\n"),
            None => {}
        }
        for note in &out.notes {
            s.push_str(&format!("note: {note}\n"));
        }
        s.trim_end().to_string()
    })
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let p = CheckerboardCopula::read_csv(&a.matrix)?;
    let obs = sample(&p, a.count, a.seed);
    match &a.output {
        Some(path) => obs.write_csv(path)?,
        None => {
            let mut out = BufWriter::new(io::stdout().lock());
            obs.write_csv_to(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FamilyFit {
    calibration: CalibrationResult,
    simulated: DependenceSummary,
}

#[derive(Serialize)]
struct FitOutput {
    returns: usize,
    replicates: usize,
    count: usize,
    observed: DependenceSummary,
    mick: FamilyFit,
    mics: FamilyFit,
}

fn simulate(p: &CheckerboardCopula, replicates: usize, count: usize, seed: u64) -> Result<DependenceSummary> {
    let runs: Vec<DependenceSummary> = (0..replicates as u64)
        .into_par_iter()
        .map(|k| summarize(&sample(p, count, seed.wrapping_add(k))))
        .collect::<mick::Result<_>>()?;
    DependenceSummary::mean(&runs).context("no replicates to average")
}

fn cmd_fit(a: &FitArgs, format: Format) -> Result<()> {
    if a.replicates == 0 {
        bail!(mick::Error::InvalidConfig("--replicates must be at least 1".into()));
    }
    let prices = match &a.y_file {
        Some(other) => align(&load_series(&a.input, &a.x)?, &load_series(other, &a.y)?)?,
        None => load_prices(&a.input, &a.x, &a.y)?,
    };
    let returns = log_returns(&prices)?;
    let obs = to_pseudo_observations(&returns, a.ranks.into())?;
    if let Some(path) = &a.pseudo_output {
        obs.write_csv(path)?;
    }
    let observed = summarize(&obs)?;
    let count = a.count.unwrap_or(returns.len());
    let opts = CalibrationOptions::default();
    let fit_family = |family: Family, target: f64, measure: Measure| -> Result<FamilyFit> {
        let c = calibrate_with(a.n, target, measure, family, &opts)?;
        let simulated = simulate(&c.report.copula, a.replicates, count, a.seed)?;
        Ok(FamilyFit {
            calibration: c.result,
            simulated,
        })
    };
    let out = FitOutput {
        returns: returns.len(),
        replicates: a.replicates,
        count,
        observed,
        mick: fit_family(Family::Mick, observed.tau, Measure::Kendall)?,
        mics: fit_family(Family::Mics, observed.rho, Measure::Spearman)?,
    };
    emit(format, &out, || {
        let mut s = format!(
            "returns = {}\nsimulation = {} data sets of {} points\nmick_ratio = {}\nmics_ratio = {}\n\n",
            out.returns, out.replicates, out.count, out.mick.calibration.ratio, out.mics.calibration.ratio
        );
        s.push_str(&format!("{:<14}{:>10}{:>10}{:>10}\n", "statistic", "observed", "MICK", "MICS"));
        let names = ["tau", "rho", "lower_tail_5", "upper_tail_5", "lower_tail_1", "upper_tail_1"];
        let (o, k, m) = (out.observed.as_array(), out.mick.simulated.as_array(), out.mics.simulated.as_array());
        for (i, name) in names.iter().enumerate() {
            s.push_str(&format!("{name:<14}{:>10.4}{:>10.4}{:>10.4}\n", o[i], k[i], m[i]));
        }
        s.trim_end().to_string()
    })
}
