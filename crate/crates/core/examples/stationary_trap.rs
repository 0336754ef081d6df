//! Time-domain Maxwell-Bloch run of the default trap: the pulse stops while
//! both controls are on and spreads diffusively.

use stationary_light::analysis::{centroid_width, SpaceTime};
use stationary_light::default_scenario;
use stationary_light::timedomain::{run_with, Mode, Options};

fn main() -> stationary_light::Result<()> {
    let s = default_scenario();
    let mut opts = Options::seeded(&s, Mode::Full)?;
    opts.output_times = (0..=10).map(|i| s.times.t_o + i as f64).collect();
    let run = run_with(&s, &opts)?;
    let st = SpaceTime::from_timedomain(&run, s.z());
    println!("{} steps, max |p12| = {:.3e}", run.steps, run.p12_max);
    println!(
        "{:>6} {:>10} {:>10} {:>12} {:>12}",
        "t", "centroid", "width", "E+", "E-"
    );
    for (m, f) in st.metrics(s.entry_velocity()).iter().zip(&st.fields) {
        let (c, w) = centroid_width(&st.z, f).unwrap_or((f64::NAN, f64::NAN));
        println!(
            "{:>6.2} {c:>10.4} {w:>10.4} {:>12.4e} {:>12.4e}",
            m.t, m.energy_plus, m.energy_minus
        );
    }
    for w in &run.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
