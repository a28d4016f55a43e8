//! Derives per-variable weights for the heat index from Kendall
//! correlations with all-cause mortality, then compares how well the
//! unweighted and weighted indices track mortality.

use std::collections::BTreeMap;

use envvuln::index::{themed_index, weighted_index};
use envvuln::model::{IndexResult, RegionId, Resolution, TimeKey};
use envvuln::pipeline::{shipped_specs, Pipeline, PipelineConfig};
use envvuln::stats::{kendall_tau, mean};
use envvuln::synth::{generate, SynthParams};

fn per_region(result: &IndexResult) -> BTreeMap<RegionId, Option<f64>> {
    let mut acc: BTreeMap<RegionId, Vec<Option<f64>>> = BTreeMap::new();
    for ((region, _), scores) in &result.records {
        acc.entry(region.clone()).or_default().push(scores.overall);
    }
    acc.into_iter().map(|(r, v)| (r, mean(v))).collect()
}

fn main() -> envvuln::Result<()> {
    let params = SynthParams::default();
    let fixture = generate(&params, 42)?;
    let mut config = PipelineConfig::default();
    config.resolutions = vec![Resolution::Yearly];
    let pipeline = Pipeline::from_inputs(config, shipped_specs(), fixture.into())?;

    let spec = pipeline.spec("heat")?.clone();
    let weights = pipeline.compute_weights(&spec)?;
    let mut ranked: Vec<_> = weights.iter().collect();
    ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    println!("strongest weights:");
    for (key, w) in ranked.iter().take(8) {
        println!("  {:<18} {:<24} {w:+.3}", key.sub_index.as_str(), key.variable_id);
    }

    let ctx = pipeline.context(&spec, Resolution::Yearly)?;
    let mortality = pipeline.mortality()?;
    let latest = TimeKey::yearly(params.years.end);
    for (name, result) in [("themed", themed_index(&ctx)?), ("weighted", weighted_index(&ctx, &weights)?)] {
        let (x, y): (Vec<_>, Vec<_>) = per_region(&result)
            .into_iter()
            .map(|(r, v)| (v, mortality.get(&r, &latest)))
            .unzip();
        println!("tau({name} index, mortality) = {:.3}", kendall_tau(&x, &y)?);
    }
    Ok(())
}
