//! Explains one region's heat index value: sub-index, theme and variable
//! percentiles, plus a reconstruction check.

use envvuln::index::breakdown;
use envvuln::model::{Resolution, TimeKey};
use envvuln::pipeline::{shipped_specs, Pipeline, PipelineConfig};
use envvuln::synth::{generate, SynthParams};

fn main() -> envvuln::Result<()> {
    let fixture = generate(&SynthParams::default(), 42)?;
    let mut config = PipelineConfig::default();
    config.resolutions = vec![Resolution::Monthly];
    let pipeline = Pipeline::from_inputs(config, shipped_specs(), fixture.into())?;
    let spec = pipeline.spec("heat")?.clone();
    let result = pipeline.build(&spec, Resolution::Monthly)?;

    let time = TimeKey::monthly(2018, 1);
    let (region, _) = result
        .overall_slice(&time)
        .into_iter()
        .filter_map(|(r, v)| v.map(|v| (r, v)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("some region has a value");

    let report = breakdown(&result, &region, &time)?;
    println!("most vulnerable region in {time}: {}", region.code);
    println!("overall {:.3}", report.overall.unwrap());
    for s in &report.sub_indices {
        println!("  {:<18} {:.3}", s.kind.as_str(), s.percentile.unwrap_or(f64::NAN));
    }
    println!("variables above the median:");
    for v in report.variables.iter().filter(|v| v.above_median == Some(true)) {
        println!("  {:<18} {:<22} {:.2}", v.theme_id, v.variable_id, v.percentile.unwrap());
    }
    println!("reconstruction difference {:e}", report.reconstruction.abs_difference.unwrap_or(0.0));
    Ok(())
}
