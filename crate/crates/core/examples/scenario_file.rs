//! Scenario files overlay a built-in and resolve to a full manifest.

use stationary_light::config::Config;

fn main() -> stationary_light::Result<()> {
    let text = "base = \"fig3-decay\"\nmedium.delta_plus = 0.0\nrun.solver = \"spectral\"\nrun.snapshots = [5.0, 10.0]\n";
    let config = Config::parse(text)?;
    let manifest = config.to_manifest()?;
    print!("{manifest}");
    assert_eq!(Config::parse(&manifest)?, config);
    Ok(())
}
