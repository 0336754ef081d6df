//! Time-domain and spectral solvers on the same scenario.

use stationary_light::cli::simulate;
use stationary_light::config::{Config, SolverSelection};

fn main() -> stationary_light::Result<()> {
    let mut config = Config::builtin("fig2ab")?;
    config.run.solver = SolverSelection::Both;
    config.run.snapshots = vec![5.0, 7.5, 10.0, 12.5];
    let sim = simulate(&config)?;
    if let Some(report) = sim.comparison {
        print!("{report}");
    }
    Ok(())
}
