//! Flat `key = value` scenario files.
//!
//! Keys are dotted paths into the scenario (`medium.gamma3 = 1000.0`,
//! `schedule.omega_plus.initial = 100.0`, `release_mode = "forward"`) plus the
//! `run.*` settings consumed by the drivers. A file only needs the keys it
//! changes: everything else comes from the built-in named by `base`
//! (default `fig2ab`). Unknown keys are errors.
//!
//! [`Config::to_manifest`] writes every resolved key in the same syntax, so a
//! manifest read back with [`Config::parse`] reproduces the run.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::analysis::BroadeningReading;
use crate::dispersion::SpectralModel;
use crate::error::{Error, Result};
use crate::params::{builtin_scenario, Scenario, BUILTIN_SCENARIOS};
use crate::timedomain::Mode;

/// Which solvers a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverSelection {
    Spectral,
    #[default]
    Timedomain,
    Both,
}

impl SolverSelection {
    pub fn time_domain(self) -> bool {
        matches!(self, SolverSelection::Timedomain | SolverSelection::Both)
    }

    pub fn spectral(self) -> bool {
        matches!(self, SolverSelection::Spectral | SolverSelection::Both)
    }
}

/// How the time-domain solver obtains the probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    /// Gaussian injected through z = 0 from `grid.t_start`.
    #[default]
    Injected,
    /// Gaussian polariton placed in the medium at `t_o`.
    Seeded,
}

/// Driver settings that are not part of the physical scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub solver: SolverSelection,
    pub mode: Mode,
    pub start: Start,
    pub spectral_model: SpectralModel,
    pub broadening: BroadeningReading,
    /// Output times; empty means every `output.snapshot_interval` from `t_o`.
    pub snapshots: Vec<f64>,
    /// Time at which `dispersion` evaluates the relations; negative means the
    /// trap midpoint.
    pub dispersion_time: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            solver: SolverSelection::default(),
            mode: Mode::default(),
            start: Start::default(),
            spectral_model: SpectralModel::default(),
            broadening: BroadeningReading::default(),
            snapshots: Vec::new(),
            dispersion_time: -1.0,
        }
    }
}

/// A scenario together with its run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub run: RunSettings,
}

impl Config {
    pub fn builtin(name: &str) -> Result<Self> {
        let scenario = builtin_scenario(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown built-in scenario '{name}' (available: {})",
                BUILTIN_SCENARIOS.join(", ")
            ))
        })?;
        Ok(Config {
            scenario,
            run: RunSettings::default(),
        })
    }

    /// A built-in name, or a path to a scenario file.
    pub fn load(spec: &str) -> Result<Self> {
        if BUILTIN_SCENARIOS.contains(&spec) {
            return Config::builtin(spec);
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read scenario '{}': {e}", path.display()))
        })?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let base = match table.remove("base") {
            None => "fig2ab".to_string(),
            Some(Value::String(s)) => s,
            Some(other) => {
                return Err(Error::Config(format!("base must be a string, got {other}")))
            }
        };
        let run_table = match table.remove("run") {
            None => Table::new(),
            Some(Value::Table(t)) => t,
            Some(_) => return Err(Error::Config("run must hold run.* keys".into())),
        };
        let base = Config::builtin(&base)?;
        let mut merged = to_table(&base.scenario)?;
        merge(&mut merged, table);
        let scenario: Scenario = Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let run: RunSettings = Value::Table(run_table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("run: {}", e.message())))?;
        Ok(Config { scenario, run })
    }

    /// Every resolved key, one per line, sorted within each section.
    pub fn to_manifest(&self) -> Result<String> {
        let mut out = String::new();
        flatten("", &to_table(&self.scenario)?, &mut out);
        flatten("run", &to_table(&self.run)?, &mut out);
        Ok(out)
    }

    /// Snapshot times of the run: the explicit list if given.
    pub fn output_times(&self) -> Vec<f64> {
        if self.run.snapshots.is_empty() {
            self.scenario.snapshot_times()
        } else {
            self.run.snapshots.clone()
        }
    }

    pub fn dispersion_time(&self) -> f64 {
        if self.run.dispersion_time < 0.0 {
            self.scenario.trap_midpoint()
        } else {
            self.run.dispersion_time
        }
    }
}

fn to_table<T: Serialize>(value: &T) -> Result<Table> {
    match Value::try_from(value) {
        Ok(Value::Table(t)) => Ok(t),
        Ok(_) => Err(Error::Config("expected a table".into())),
        Err(e) => Err(Error::Config(e.to_string())),
    }
}

/// Overwrites `base` with `over`, descending into tables present in both.
fn merge(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// Scalars and arrays of a section first, then its subsections.
fn flatten(prefix: &str, table: &Table, out: &mut String) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    for (k, v) in table.iter().filter(|(_, v)| !v.is_table()) {
        let _ = writeln!(out, "{} = {}", key(k), v);
    }
    for (k, v) in table {
        if let Value::Table(t) = v {
            flatten(&key(k), t, out);
        }
    }
}
