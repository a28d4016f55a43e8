//! The same index under each missing-data policy when one region has no
//! health-status data at all.

use std::collections::BTreeMap;

use envvuln::index::{themed_index, BuildContext, MissingPolicy};
use envvuln::model::{IndexSpec, Level, Method, RegionId, Resolution, TimeKey, VariablePanel};
use envvuln::pipeline::shipped_specs;
use envvuln::synth::{generate, SynthParams};
use envvuln::impute::{broadcast, interpolate_annual};

fn main() -> envvuln::Result<()> {
    let params = SynthParams { n_regions: 12, ..SynthParams::default() };
    let fixture = generate(&params, 3)?;
    let mut spec: IndexSpec = shipped_specs().into_iter().find(|s| s.index_id == "air_quality").unwrap();
    spec.method = Method::EqualThemed;
    let year = TimeKey::yearly(params.years.end);

    // Yearly panels for every spec variable; pollutants are taken flat at 1.0
    // to keep the example about sensitivity and adaptive capacity.
    let mut panels = BTreeMap::new();
    for (_, _, var) in spec.variables() {
        let panel = match fixture.demographics.get(&var.variable_id) {
            Some(raw) => broadcast(&interpolate_annual(raw, params.years)?, Resolution::Yearly)?,
            None => {
                let mut p = VariablePanel::new(var.variable_id.clone(), "", Resolution::Yearly);
                for i in 0..params.n_regions {
                    p.insert(region_at(&fixture, i), year, Some(1.0));
                }
                p
            }
        };
        panels.insert(var.variable_id.clone(), panel);
    }
    let target = region_at(&fixture, 0);
    for id in ["respiratory_disease", "asthma", "copd"] {
        panels.get_mut(id).unwrap().insert(target.clone(), year, None);
    }

    for policy in [
        MissingPolicy::Propagate,
        MissingPolicy::MeanFill,
        MissingPolicy::MultipleImpute { m: 20, seed: 9 },
    ] {
        let ctx = BuildContext::new(spec.clone(), panels.clone(), None, policy)?;
        let result = themed_index(&ctx)?;
        let scores = result.get(&target, &year).unwrap();
        let health = scores.themes.iter().find(|t| t.theme_id == "health_status").unwrap();
        println!(
            "{policy:?}: health_status {:?} (imputed {}), overall {:?}",
            health.percentile.value, health.percentile.imputed, scores.overall
        );
    }
    Ok(())
}

fn region_at(fixture: &envvuln::synth::SynthFixture, i: usize) -> RegionId {
    let codes = fixture.demographics.values().next().unwrap().regions();
    let code = codes.into_iter().nth(i).unwrap().code;
    RegionId::new(code, Level::Sa2)
}
