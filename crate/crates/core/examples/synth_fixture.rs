//! Generates a seeded synthetic fixture and writes it as CSV inputs.
//!
//! ```text
//! cargo run --example synth_fixture -- /tmp/fixture 42
//! ```

use std::path::PathBuf;

use envvuln::synth::{generate, SynthParams};

fn main() -> envvuln::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixture".into()));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);

    let params = SynthParams::default();
    let fixture = generate(&params, seed)?;
    println!(
        "{} SA2 regions, years {}-{}, {} demographic variables",
        params.n_regions,
        params.years.start,
        params.years.end,
        fixture.demographics.len()
    );
    println!("mortality vs generating signal: tau = {:.3}", fixture.report.signal_tau);
    for (var, tau) in &fixture.report.variable_tau {
        println!("  {var:<22} tau = {tau:.3}");
    }
    fixture.write(&dir)?;
    println!("wrote inputs under {}", dir.display());
    Ok(())
}
