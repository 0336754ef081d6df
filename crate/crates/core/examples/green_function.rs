//! The trapped field as a convolution of the field at t_o with a Green function.

use stationary_light::default_scenario;
use stationary_light::dispersion::SpectralModel;
use stationary_light::spectral::{evolve, polaritons, GreenFunction, SpectralRun};
use stationary_light::Branch;

fn main() -> stationary_light::Result<()> {
    let s = default_scenario();
    let mut run = SpectralRun::new(&s, SpectralModel::DynamicSpin)?;
    run.output_times = vec![s.times.t_o, 8.0];
    let ev = evolve(&run)?;
    let (initial, _) = polaritons(&ev.states[0], &run.grid)?;
    let (pp, pm) = polaritons(&ev.states[1], &run.grid)?;
    for (branch, target) in [(Branch::Forward, pp), (Branch::Backward, pm)] {
        let g = GreenFunction::new(
            &run.grid,
            8.0,
            s.times.t_o,
            &s.medium,
            &s.schedule,
            branch,
            SpectralModel::DynamicSpin,
        )?;
        let conv = g.convolve(&initial);
        let num: f64 = target
            .iter()
            .zip(&conv)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = target.iter().map(|a| a.norm_sqr()).sum();
        println!(
            "{branch:?}: convolution vs evolution rel-L2 {:.2e}",
            (num / den).sqrt()
        );
    }
    Ok(())
}
