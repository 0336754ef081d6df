//! The backward polariton as a non-local image of the forward one.

use num_complex::Complex64;
use stationary_light::default_scenario;
use stationary_light::spectral::{apply_nonlocal_coupling, coupling_kernel, SpectralGrid};

fn main() -> stationary_light::Result<()> {
    let m = default_scenario().medium;
    println!(
        "l_cor = {:.4}, delta weight = {:.4}",
        m.correlation_length(),
        coupling_kernel(0.0, &m).delta_weight
    );
    for i in 0..=5 {
        let x = -0.1 * i as f64;
        println!(
            "K({x:>5.2}) smooth part = {:.4e}",
            coupling_kernel(x, &m).smooth
        );
    }
    let grid = SpectralGrid::new(400, 1600, 0.025)?;
    let psi: Vec<Complex64> = grid
        .z()
        .iter()
        .map(|z| Complex64::new((-0.5 * (z - 5.0).powi(2)).exp(), 0.0))
        .collect();
    let out = apply_nonlocal_coupling(&psi, grid.dz(), &m);
    let peak = |f: &[Complex64]| {
        let i = (0..f.len())
            .max_by(|&a, &b| f[a].norm().total_cmp(&f[b].norm()))
            .unwrap_or(0);
        grid.z()[i]
    };
    println!(
        "peak of Psi+ at {:.3}, of Psi- at {:.3}",
        peak(&psi),
        peak(&out)
    );
    Ok(())
}
