//! Daily excess heat and cold factors for a synthetic region, then the
//! weekly peaks the index consumes.

use envvuln::indicators::{build_climatology, default_rule, temporal_aggregate, DailyIndicators, IndicatorParams};
use envvuln::model::Resolution;
use envvuln::synth::{generate, SynthParams};

fn main() -> envvuln::Result<()> {
    let params = SynthParams { n_regions: 4, ..SynthParams::default() };
    let fixture = generate(&params, 7)?;

    let (climatology, diagnostics) = build_climatology(&fixture.temperatures, None, IndicatorParams::default());
    for d in &diagnostics {
        eprintln!("{d:?}");
    }
    let daily = DailyIndicators::compute(&fixture.temperatures, &climatology);

    let weekly_ehf = temporal_aggregate(&daily.ehf, Resolution::Weekly, default_rule("ehf"))?;
    let region = weekly_ehf.regions().into_iter().next().expect("fixture has regions");
    println!("weekly EHF peaks for {region} in {}:", params.years.end);
    for (week, value) in weekly_ehf.region_series(&region) {
        if week.year == params.years.end {
            if let Some(v) = value.filter(|v| *v > 0.0) {
                println!("  {week}  {v:6.2}  {}", "#".repeat((v.ceil() as usize).min(40)));
            }
        }
    }
    let hot_days = daily.ehf.iter().filter(|(r, _, v)| *r == &region && v.is_some_and(|x| x > 0.0)).count();
    let cold_days = daily.ecf.iter().filter(|(r, _, v)| *r == &region && v.is_some_and(|x| x > 0.0)).count();
    println!("days with positive EHF: {hot_days}, positive ECF: {cold_days}");
    Ok(())
}
