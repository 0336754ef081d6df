//! The `tcsl` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 validation error,
//! 4 numerical divergence (see [`Error::exit_code`]).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    area_ratio_prediction, centroid_z, compare_runs, conversion_probability, separation, width_l,
    ComparisonReport, SpaceTime,
};
use crate::config::{Config, SolverSelection, Start};
use crate::dispersion::{chi_minus, omega_full};
use crate::error::{Error, Result};
use crate::output::{self, AnalyticRow, DispersionRow};
use crate::params::{validate_scenario, Branch, ReleaseMode, ValidationReport};
use crate::spectral::{evolve, spectrum_from_field, SpectralGrid, SpectralRun};
use crate::timedomain::{self, Mode, Options, TdRun};

#[derive(Debug, Parser)]
#[command(
    name = "tcsl",
    version,
    about = "Two-color stationary light: simulations, dispersion and closed-form laws"
)]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one or both solvers and write space-time, metrics and manifest files.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        solver: Option<SolverArg>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Comma-separated output times.
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<f64>>,
    },
    /// Tabulate the dispersion relation and the mode-locking factor over the k grid.
    Dispersion {
        #[command(flatten)]
        common: CommonArgs,
        /// Evaluation time; defaults to the trap midpoint.
        #[arg(long)]
        time: Option<f64>,
    },
    /// Tabulate the closed-form centroids, width, separation, area ratio and conversion.
    Analytic {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<f64>>,
    },
    /// Print the regime margins of a scenario.
    Validate {
        #[arg(long, default_value = "fig2ab")]
        scenario: String,
    },
    /// Compare two space-time tables, or the two solvers on a scenario.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Reference space-time CSV.
        #[arg(long, requires = "candidate")]
        reference: Option<PathBuf>,
        /// Space-time CSV compared against the reference.
        #[arg(long, requires = "reference")]
        candidate: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Built-in name (fig2ab, fig2cd, fig3-decay) or scenario file.
    #[arg(long, default_value = "fig2ab")]
    pub scenario: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Spectral,
    Timedomain,
    Both,
}

impl From<SolverArg> for SolverSelection {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Spectral => SolverSelection::Spectral,
            SolverArg::Timedomain => SolverSelection::Timedomain,
            SolverArg::Both => SolverSelection::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Adiabatic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::Adiabatic => Mode::Adiabatic,
        }
    }
}

/// A resolved invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub config: Config,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    fn resolve(common: &CommonArgs) -> Result<Self> {
        Ok(RunConfig {
            config: Config::load(&common.scenario)?,
            out: common.out.clone(),
            format: common.format,
        })
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        fs::create_dir_all(&self.out)?;
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }
}

/// Results of [`simulate`] before anything is written.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub validation: ValidationReport,
    pub timedomain: Option<(TdRun, SpaceTime)>,
    pub spectral: Option<SpaceTime>,
    /// Spectral against time-domain when both ran.
    pub comparison: Option<ComparisonReport>,
}

/// Runs the selected solvers. With both, the spectral solver starts from the
/// time-domain fields at the first output time so that the two runs share
/// their initial state.
pub fn simulate(config: &Config) -> Result<Simulation> {
    let s = &config.scenario;
    let validation = validate_scenario(s)?;
    if !validation.all_pass() {
        return Err(Error::Validation(validation.to_string()));
    }
    let times = config.output_times();
    let v_o = s.entry_velocity();
    let solver = config.run.solver;

    let timedomain = if solver.time_domain() {
        let mut opts = match config.run.start {
            Start::Injected => Options::for_scenario(s, config.run.mode),
            Start::Seeded => Options::seeded(s, config.run.mode)?,
        };
        opts.output_times = times.clone();
        let run = timedomain::run_with(s, &opts)?;
        for w in &run.warnings {
            log::warn!("{w}");
        }
        let st = SpaceTime::from_timedomain(&run, s.z());
        Some((run, st))
    } else {
        None
    };

    let spectral = if solver.spectral() {
        if times.first().is_some_and(|&t| t < s.times.t_o) {
            return Err(Error::Config(
                "spectral output times must not precede times.t_o".into(),
            ));
        }
        let mut run = SpectralRun::new(s, config.run.spectral_model)?;
        run.output_times = times.clone();
        if let (Some((_, td)), Start::Injected) = (&timedomain, config.run.start) {
            let first = &td.fields[0];
            run.initial = spectrum_from_field(
                &first.a_plus,
                td.times[0],
                &s.medium,
                &s.schedule,
                &run.grid,
            )?;
        }
        let ev = evolve(&run)?;
        if ev.dropped_modes > 0 {
            log::info!(
                "{} modes outside the model's validity band were dropped",
                ev.dropped_modes
            );
        }
        Some(SpaceTime::from_spectral(&ev, s, &run.grid)?)
    } else {
        None
    };

    let comparison = match (&timedomain, &spectral) {
        (Some((_, td)), Some(sp)) => Some(compare_runs(td, sp, v_o)?),
        _ => None,
    };
    Ok(Simulation {
        validation,
        timedomain,
        spectral,
        comparison,
    })
}

/// Writes `manifest.toml`, per-solver `*_spacetime.csv` and `*_metrics.csv`,
/// `timedomain_diagnostics.csv` and, with both solvers, `comparison.txt`.
pub fn cmd_simulate(rc: &RunConfig) -> Result<Vec<PathBuf>> {
    let sim = simulate(&rc.config)?;
    let v_o = rc.config.scenario.entry_velocity();
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&mut dyn Write) -> Result<()>| -> Result<()> {
        let mut w = rc.create(name)?;
        f(&mut w)?;
        w.flush()?;
        written.push(rc.out.join(name));
        Ok(())
    };
    let manifest = rc.config.to_manifest()?;
    emit("manifest.toml", &|w| Ok(w.write_all(manifest.as_bytes())?))?;
    if let Some((run, st)) = &sim.timedomain {
        emit("timedomain_spacetime.csv", &|w| {
            output::write_space_time(w, st)
        })?;
        emit("timedomain_metrics.csv", &|w| {
            output::write_metrics(w, &st.metrics(v_o))
        })?;
        emit("timedomain_diagnostics.csv", &|w| {
            output::write_diagnostics(w, &run.diagnostics)
        })?;
    }
    if let Some(st) = &sim.spectral {
        emit("spectral_spacetime.csv", &|w| {
            output::write_space_time(w, st)
        })?;
        emit("spectral_metrics.csv", &|w| {
            output::write_metrics(w, &st.metrics(v_o))
        })?;
    }
    if let Some(report) = &sim.comparison {
        emit("comparison.txt", &|w| Ok(write!(w, "{report}")?))?;
    }
    Ok(written)
}

/// `omega_full` and `chi_-` on the scenario's k grid, in increasing k.
pub fn dispersion_table(config: &Config) -> Result<Vec<DispersionRow>> {
    let s = &config.scenario;
    let t = config.dispersion_time();
    let grid = SpectralGrid::for_scenario(s)?;
    let mut k = grid.k().to_vec();
    k.sort_by(f64::total_cmp);
    k.into_iter()
        .map(|k| {
            Ok(DispersionRow {
                k,
                omega: omega_full(k, t, &s.medium, &s.schedule)?,
                chi_minus: chi_minus(k, &s.medium)?,
            })
        })
        .collect()
}

pub fn cmd_dispersion(rc: &RunConfig) -> Result<Vec<PathBuf>> {
    let rows = dispersion_table(&rc.config)?;
    let mut w = rc.create("dispersion.csv")?;
    output::write_dispersion(&mut w, &rows)?;
    w.flush()?;
    Ok(vec![rc.out.join("dispersion.csv")])
}

/// Closed-form predictions at the output times (all at or after `t_o`).
/// Centroids are positions in the medium, referenced to the probe centre at
/// `t_o`. The area ratio follows the surviving branch after release; `P` is
/// the conversion probability of a release at `min(t, t_1)`.
pub fn analytic_table(config: &Config) -> Result<Vec<AnalyticRow>> {
    let s = &config.scenario;
    let (t_o, t_1) = (s.times.t_o, s.times.t_1);
    let origin = s.probe.center_z - centroid_z(t_o, s, Branch::Forward)?.re;
    let d = separation(&s.medium).re;
    config
        .output_times()
        .into_iter()
        .map(|t| {
            if t < t_o {
                return Err(Error::Config(format!(
                    "analytic output time {t} precedes times.t_o"
                )));
            }
            let release = t.min(t_1);
            let branch = if t > t_1 && s.release_mode == ReleaseMode::Backward {
                Branch::Backward
            } else {
                Branch::Forward
            };
            Ok(AnalyticRow {
                t,
                z_plus: origin + centroid_z(t, s, Branch::Forward)?.re,
                z_minus: origin + centroid_z(t, s, Branch::Backward)?.re,
                l: width_l(t, s)?,
                separation: d,
                theta_ratio: area_ratio_prediction(t, t_o, release, s, branch)?.norm(),
                conversion: conversion_probability(release, t_o, s, config.run.broadening)?,
            })
        })
        .collect()
}

pub fn cmd_analytic(rc: &RunConfig) -> Result<Vec<PathBuf>> {
    let rows = analytic_table(&rc.config)?;
    let mut w = rc.create("analytic.csv")?;
    output::write_analytic(&mut w, &rows)?;
    w.flush()?;
    Ok(vec![rc.out.join("analytic.csv")])
}

/// The margins of every regime condition; an error if any is below the pass level.
pub fn cmd_validate(config: &Config) -> Result<ValidationReport> {
    let report = validate_scenario(&config.scenario)?;
    if report.all_pass() {
        Ok(report)
    } else {
        Err(Error::Validation(report.to_string()))
    }
}

/// Compares two stored space-time tables, normalizing areas by the
/// scenario's entry velocity.
pub fn compare_files(
    reference: &Path,
    candidate: &Path,
    config: &Config,
) -> Result<ComparisonReport> {
    let read = |p: &Path| -> Result<SpaceTime> {
        let f = File::open(p)
            .map_err(|e| Error::Config(format!("cannot open '{}': {e}", p.display())))?;
        output::read_space_time(f)
    };
    compare_runs(
        &read(reference)?,
        &read(candidate)?,
        config.scenario.entry_velocity(),
    )
}

pub fn cmd_compare(
    rc: &RunConfig,
    reference: Option<&Path>,
    candidate: Option<&Path>,
) -> Result<ComparisonReport> {
    let report = match (reference, candidate) {
        (Some(a), Some(b)) => compare_files(a, b, &rc.config)?,
        _ => {
            let mut config = rc.config.clone();
            config.run.solver = SolverSelection::Both;
            simulate(&config)?
                .comparison
                .ok_or_else(|| Error::Comparison("no comparison produced".into()))?
        }
    };
    let mut w = rc.create("comparison.txt")?;
    write!(w, "{report}")?;
    w.flush()?;
    Ok(report)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            common,
            solver,
            mode,
            snapshots,
        } => {
            let mut rc = RunConfig::resolve(&common)?;
            if let Some(s) = solver {
                rc.config.run.solver = s.into();
            }
            if let Some(m) = mode {
                rc.config.run.mode = m.into();
            }
            if let Some(t) = snapshots {
                rc.config.run.snapshots = t;
            }
            for p in cmd_simulate(&rc)? {
                println!("{}", p.display());
            }
        }
        Command::Dispersion { common, time } => {
            let mut rc = RunConfig::resolve(&common)?;
            if let Some(t) = time {
                rc.config.run.dispersion_time = t;
            }
            for p in cmd_dispersion(&rc)? {
                println!("{}", p.display());
            }
        }
        Command::Analytic { common, snapshots } => {
            let mut rc = RunConfig::resolve(&common)?;
            if let Some(t) = snapshots {
                rc.config.run.snapshots = t;
            }
            for p in cmd_analytic(&rc)? {
                println!("{}", p.display());
            }
        }
        Command::Validate { scenario } => {
            let config = Config::load(&scenario)?;
            print!("{}", cmd_validate(&config)?);
        }
        Command::Compare {
            common,
            mode,
            reference,
            candidate,
        } => {
            let mut rc = RunConfig::resolve(&common)?;
            if let Some(m) = mode {
                rc.config.run.mode = m.into();
            }
            print!(
                "{}",
                cmd_compare(&rc, reference.as_deref(), candidate.as_deref())?
            );
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_errors_are_config_errors() {
        assert_eq!(main_with(["tcsl", "simulate", "--solver", "magic"]), 2);
        assert_eq!(main_with(["tcsl", "frobnicate"]), 2);
        assert_eq!(main_with(["tcsl", "validate", "--scenario", "fig9"]), 2);
        assert_eq!(main_with(["tcsl", "--help"]), 0);
    }

    #[test]
    fn validate_builtins() {
        for name in crate::params::BUILTIN_SCENARIOS {
            assert_eq!(
                main_with(["tcsl", "validate", "--scenario", name]),
                0,
                "{name}"
            );
        }
    }

    #[test]
    fn regime_violation_exits_with_validation_code() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("slow.toml");
        std::fs::write(&path, "medium.gamma2 = 0.05\n").unwrap();
        assert_eq!(
            main_with(["tcsl", "validate", "--scenario", path.to_str().unwrap()]),
            3
        );
    }

    #[test]
    fn analytic_decay_column() {
        let mut c = Config::builtin("fig3-decay").unwrap();
        c.run.snapshots = vec![5.0, 15.0];
        let rows = analytic_table(&c).unwrap();
        assert!((rows[0].theta_ratio - 1.0).abs() < 1e-12);
        assert!((rows[1].theta_ratio - (-0.1f64).exp()).abs() < 1e-6);
        assert!((rows[0].z_plus - c.scenario.probe.center_z).abs() < 1e-12);
        assert!((rows[0].z_plus - rows[0].z_minus - 0.2).abs() < 1e-12);
        assert!((rows[1].separation - 0.2).abs() < 1e-12);
        c.run.snapshots = vec![4.0];
        assert!(matches!(analytic_table(&c), Err(Error::Config(_))));
    }

    #[test]
    fn dispersion_single_control_decay_is_constant() {
        let mut c = Config::builtin("fig2ab").unwrap();
        c.run.dispersion_time = 2.0;
        let rows = dispersion_table(&c).unwrap();
        assert_eq!(rows.len(), c.scenario.grid.nk);
        assert!(rows.windows(2).all(|w| w[0].k < w[1].k));
        for r in &rows {
            assert!(
                r.omega.im.abs() < 1e-9 * r.omega.norm().max(1.0),
                "k = {}: {}",
                r.k,
                r.omega
            );
        }
    }
}
