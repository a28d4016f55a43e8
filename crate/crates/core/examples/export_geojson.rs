//! Writes a built index as long-format CSV and as GeoJSON properties for a
//! map join.

use envvuln::index::{geojson_property_join, index_rows, write_index_csv};
use envvuln::model::Resolution;
use envvuln::pipeline::{shipped_specs, Pipeline, PipelineConfig};
use envvuln::synth::{generate, SynthParams};

fn main() -> envvuln::Result<()> {
    let params = SynthParams { n_regions: 6, ..SynthParams::default() };
    let mut config = PipelineConfig::default();
    config.resolutions = vec![Resolution::Yearly];
    let pipeline = Pipeline::from_inputs(config, shipped_specs(), generate(&params, 5)?.into())?;
    let spec = pipeline.spec("cold")?.clone();
    let result = pipeline.build(&spec, Resolution::Yearly)?;

    let mut csv = Vec::new();
    write_index_csv(&result, &mut csv)?;
    let text = String::from_utf8(csv).expect("utf-8");
    println!("{} CSV rows; first lines:", text.lines().count() - 1);
    for line in text.lines().take(4) {
        println!("  {line}");
    }

    let rows: Vec<_> = index_rows(&result).collect();
    let geojson = geojson_property_join(&rows);
    let first = &geojson["features"][0]["properties"];
    println!("{} features; first: {first}", geojson["features"].as_array().unwrap().len());
    Ok(())
}
