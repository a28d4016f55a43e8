//! A hand-written two-theme index over five regions, built with each
//! method.

use std::collections::BTreeMap;

use envvuln::index::{equal_sum_index, themed_index, weighted_index, BuildContext, MissingPolicy};
use envvuln::model::{
    IndexSpec, Level, MortalityCategory, RegionId, Resolution, SubIndexKind, TimeKey, VariablePanel, WeightTable,
};

const SPEC: &str = r#"{
  "index_id": "toy",
  "method": "equal_themed",
  "sub_indices": [
    {"kind": "exposure", "themes": [
      {"theme_id": "heat", "variables": [{"variable_id": "hot_days", "polarity": "risk_increasing"}]}]},
    {"kind": "sensitivity", "themes": [
      {"theme_id": "age", "variables": [
        {"variable_id": "elderly", "polarity": "risk_increasing"},
        {"variable_id": "infants", "polarity": "risk_increasing"}]},
      {"theme_id": "money", "variables": [{"variable_id": "median_income", "polarity": "risk_decreasing"}]}]},
    {"kind": "adaptive_capacity", "themes": [
      {"theme_id": "green", "variables": [{"variable_id": "greenspace", "polarity": "risk_decreasing"}]}]}
  ]
}"#;

fn panel(id: &str, values: [f64; 5]) -> (String, VariablePanel) {
    let mut p = VariablePanel::new(id, "", Resolution::Yearly);
    for (i, v) in values.into_iter().enumerate() {
        p.insert(RegionId::new(format!("R{i}"), Level::Sa2), TimeKey::yearly(2018), Some(v));
    }
    (id.to_string(), p)
}

fn main() -> envvuln::Result<()> {
    let spec = IndexSpec::from_json(SPEC)?;
    let panels: BTreeMap<_, _> = [
        panel("hot_days", [3.0, 9.0, 4.0, 12.0, 7.0]),
        panel("elderly", [11.0, 24.0, 15.0, 9.0, 19.0]),
        panel("infants", [6.0, 5.0, 7.0, 4.0, 5.5]),
        panel("median_income", [820.0, 560.0, 1210.0, 700.0, 640.0]),
        panel("greenspace", [0.4, 0.1, 0.6, 0.2, 0.3]),
    ]
    .into();

    let ctx = BuildContext::new(spec.clone(), panels, None, MissingPolicy::Propagate)?;
    let sum = equal_sum_index(&ctx)?;
    let themed = themed_index(&ctx)?;

    // Down-weight infants relative to elderly.
    let mut weights = WeightTable::unit(&spec, MortalityCategory::AllCause);
    weights.insert(SubIndexKind::Sensitivity, "age", "infants", 0.25)?;
    let weighted = weighted_index(&ctx, &weights)?;

    println!("region  equal_sum  themed  weighted");
    for region in themed.regions() {
        let t = TimeKey::yearly(2018);
        let show = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.3}"));
        println!(
            "{:<7} {:>9}  {:>6}  {:>8}",
            region.code,
            show(sum.overall(&region, &t)),
            show(themed.overall(&region, &t)),
            show(weighted.overall(&region, &t))
        );
    }
    Ok(())
}
