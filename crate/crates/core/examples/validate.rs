//! Regime checks for every built-in scenario.

use stationary_light::{builtin_scenario, params::BUILTIN_SCENARIOS, validate_scenario};

fn main() -> stationary_light::Result<()> {
    for name in BUILTIN_SCENARIOS {
        let s = builtin_scenario(name).expect("built-in");
        let report = validate_scenario(&s)?;
        println!(
            "== {name} (xi = {}, v_o = {}, l_cor = {:.4})",
            s.medium.xi(),
            s.entry_velocity(),
            s.medium.correlation_length()
        );
        print!("{report}");
    }
    Ok(())
}
