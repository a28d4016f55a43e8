//! A two-week heat event in one region: visible in the weekly index, lost
//! in the annual one.

use chrono::NaiveDate;
use envvuln::model::{Resolution, TimeKey};
use envvuln::pipeline::{shipped_specs, Pipeline, PipelineConfig};
use envvuln::synth::{generate, HeatEvent, SynthParams};

fn main() -> envvuln::Result<()> {
    let params = SynthParams {
        heat_event: Some(HeatEvent {
            region: 7,
            start: NaiveDate::from_ymd_opt(2017, 2, 6).unwrap(),
            days: 14,
            magnitude: 4.0,
        }),
        ..SynthParams::default()
    };
    let fixture = generate(&params, 42)?;
    let mut config = PipelineConfig::default();
    config.resolutions = vec![Resolution::Weekly, Resolution::Yearly];
    let pipeline = Pipeline::from_inputs(config, shipped_specs(), fixture.into())?;
    let spec = pipeline.spec("heat")?.clone();

    let annual = pipeline.build(&spec, Resolution::Yearly)?;
    let weekly = pipeline.build(&spec, Resolution::Weekly)?;
    let region = annual.regions().into_iter().nth(7).unwrap();

    for year in params.years.years() {
        println!("{year}: annual heat index {:.3}", annual.overall(&region, &TimeKey::yearly(year)).unwrap());
    }
    println!("weekly, early 2017:");
    for week in 3..=10 {
        let t = TimeKey::weekly(2017, week);
        let v = weekly.overall(&region, &t).unwrap_or(f64::NAN);
        println!("  {t}  {v:.3}  {}", "#".repeat((v * 40.0) as usize));
    }
    Ok(())
}
