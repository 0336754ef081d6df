//! Order of the upwind discretization: a decoupled pulse translated at c
//! against the exact shift.

use num_complex::Complex64;
use stationary_light::default_scenario;
use stationary_light::timedomain::{run_with, Mode, Options, SimulationState};
use stationary_light::{ControlSchedule, ReleaseMode};

fn error(nz: usize) -> stationary_light::Result<f64> {
    let gauss = |x: f64| Complex64::new((-0.5 * (x - 4.0).powi(2)).exp(), 0.0);
    let mut s = default_scenario();
    s.medium.ng2 *= 1e-12;
    s.schedule = ControlSchedule::two_sided(1e-4, 1e-4, 5.0, 10.0, ReleaseMode::Forward, 0.25);
    s.grid.nz = nz;
    s.grid.nk = 4 * nz;
    s.grid.dt = s.dz() / s.medium.c;
    let z = s.z();
    let mut st = SimulationState::zeros(0.0, nz);
    for (a, &z) in st.fields.a_plus.iter_mut().zip(&z) {
        *a = gauss(z);
    }
    let mut o = Options::for_scenario(&s, Mode::Full);
    o.injection = None;
    o.initial = Some(st);
    o.output_times = vec![1.0 / s.medium.c];
    let f = &run_with(&s, &o)?.snapshots[0].fields;
    let e: f64 = f
        .a_plus
        .iter()
        .zip(&z)
        .map(|(a, &z)| (a - gauss(z - 1.0)).norm_sqr())
        .sum();
    Ok((e * s.dz()).sqrt())
}

fn main() -> stationary_light::Result<()> {
    let mut prev: Option<f64> = None;
    for nz in [100, 200, 400, 800] {
        let e = error(nz)?;
        match prev {
            Some(p) => println!(
                "nz {nz:>4}: error {e:.3e}, order {:.3}",
                (p / e).log2()
            ),
            None => println!("nz {nz:>4}: error {e:.3e}"),
        }
        prev = Some(e);
    }
    Ok(())
}
