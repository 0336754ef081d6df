//! Mode-by-mode evolution of the same trap in k-space.

use stationary_light::analysis::{centroid_width, SpaceTime};
use stationary_light::default_scenario;
use stationary_light::dispersion::SpectralModel;
use stationary_light::spectral::{evolve, SpectralRun};

fn main() -> stationary_light::Result<()> {
    let s = default_scenario();
    for model in [SpectralModel::DynamicSpin, SpectralModel::EliminatedSpin] {
        let mut run = SpectralRun::new(&s, model)?;
        run.output_times = vec![5.0, 7.5, 10.0, 12.5, 15.0];
        let ev = evolve(&run)?;
        let st = SpaceTime::from_spectral(&ev, &s, &run.grid)?;
        println!(
            "{model:?}: max gain {:.3e}, dropped modes {}",
            ev.max_gain, ev.dropped_modes
        );
        for (t, f) in st.times.iter().zip(&st.fields) {
            if let Some((c, w)) = centroid_width(&st.z, f) {
                println!("  t = {t:>5.2}  centroid {c:.4}  width {w:.4}");
            }
        }
    }
    Ok(())
}
