//! Releasing the stored pulse into the backward direction. The retrieved
//! energy fraction follows l_o/l(t_1).

use stationary_light::analysis::{conversion_probability, energy, BroadeningReading, SpaceTime};
use stationary_light::dispersion::SpectralModel;
use stationary_light::spectral::{evolve, SpectralRun};
use stationary_light::{builtin_scenario, ReleaseMode};

fn main() -> stationary_light::Result<()> {
    let s = builtin_scenario("fig2cd").expect("built-in");
    assert_eq!(s.release_mode, ReleaseMode::Backward);
    let t_out = s.times.t_1 + s.schedule.ramp_time;
    let mut run = SpectralRun::new(&s, SpectralModel::DynamicSpin)?;
    run.output_times = vec![s.times.t_o, t_out];
    let st = SpaceTime::from_spectral(&evolve(&run)?, &s, &run.grid)?;
    let dz = st.dz();
    let measured = energy(&st.fields[1].a_minus, dz) / energy(&st.fields[0].a_plus, dz);
    let predicted =
        conversion_probability(s.times.t_1, s.times.t_o, &s, BroadeningReading::default())?;
    println!("backward energy fraction: measured {measured:.4}, predicted {predicted:.4}");
    Ok(())
}
