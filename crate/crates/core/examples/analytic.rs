//! Closed-form trajectory, width and conversion predictions for a trap.

use stationary_light::analysis::{
    conversion_probability, separation, width_l, width_stationary, BroadeningReading,
};
use stationary_light::default_scenario;

fn main() -> stationary_light::Result<()> {
    let s = default_scenario();
    let (t_o, t_1) = (s.times.t_o, s.times.t_1);
    let (l_o, v_o) = (s.l_o(), s.entry_velocity());
    println!(
        "separation of the backward copy D = {:.4}",
        separation(&s.medium).re
    );
    println!("{:>6} {:>10} {:>12} {:>8}", "t", "|l|", "step switch", "P");
    for i in 0..=10 {
        let t = t_o + 0.5 * i as f64;
        let p = conversion_probability(t, t_o, &s, BroadeningReading::default())?;
        println!(
            "{t:>6.2} {:>10.5} {:>12.5} {p:>8.5}",
            width_l(t, &s)?,
            width_stationary(t - t_o, l_o, v_o, &s.medium)
        );
    }
    let p = conversion_probability(t_1, t_o, &s, BroadeningReading::default())?;
    println!(
        "backward conversion after a {}-long trap: {p:.4}",
        t_1 - t_o
    );
    Ok(())
}
