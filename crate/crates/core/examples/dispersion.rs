//! Polariton dispersion inside the trap and the locking factor chi_-(k).

use stationary_light::default_scenario;
use stationary_light::dispersion::{chi_minus, group_velocity, omega_full, omega_simplified};

fn main() -> stationary_light::Result<()> {
    let s = default_scenario();
    let t = s.trap_midpoint();
    let (m, sched) = (&s.medium, &s.schedule);
    println!(
        "group velocity at t = {t}: {:.3e}",
        group_velocity(t, m, sched)
    );
    println!(
        "{:>8} {:>14} {:>14} {:>14} {:>10} {:>10}",
        "k", "re omega", "im omega", "re simplified", "|chi-|", "arg chi-"
    );
    for i in -10..=10 {
        let k = 0.5 * i as f64;
        let w = omega_full(k, t, m, sched)?;
        let ws = omega_simplified(k, t, m, sched)?;
        let chi = chi_minus(k, m)?;
        println!(
            "{k:>8.2} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.6} {:>10.6}",
            w.re,
            w.im,
            ws.re,
            chi.norm(),
            chi.arg()
        );
    }
    Ok(())
}
