//! The command sequence behind the `envvuln` binary, run in-process:
//! synth, indicators, weights, build, breakdown, export.

use envvuln::model::Resolution;
use envvuln::pipeline::{self, PipelineConfig};

fn main() -> envvuln::Result<()> {
    let dir = std::env::temp_dir().join("envvuln-workflow");
    let mut seed_config = PipelineConfig::default();
    seed_config.seed = Some(42);
    seed_config.set_base_dir(&dir);
    seed_config.out_dir = dir.clone();
    pipeline::cmd_synth(&seed_config)?;

    let mut config = PipelineConfig::read(&dir.join("config.json"))?;
    config.resolutions = vec![Resolution::Monthly];
    let mut written = pipeline::cmd_indicators(&config)?;
    written.extend(pipeline::cmd_weights(&config)?);
    written.extend(pipeline::cmd_build(&config)?);
    written.extend(pipeline::cmd_export(&config)?);
    let (path, report) = pipeline::cmd_breakdown(&config, "heat", "100010001", "2017-01")?;
    written.push(path);

    for p in &written {
        println!("{}", p.display());
    }
    println!("heat index for 100010001 in January 2017: {:?}", report.overall);
    Ok(())
}
