use std::collections::BTreeMap;

use super::BuildContext;
use crate::error::{Error, Result};
use crate::model::{
    Diagnostic, DiagnosticKind, MortalityCategory, Polarity, RegionId, SubIndexKind, VariablePanel, WeightTable,
    YearSpan,
};
use crate::stats::{kendall_tau, mean, spatial_percentile};

/// Per-region mean of the polarity-adjusted cross-region percentiles of
/// every time slice in `period`. Regions never observed in the period map to
/// `None`.
pub fn pool_percentiles(panel: &VariablePanel, polarity: Polarity, period: YearSpan) -> BTreeMap<RegionId, Option<f64>> {
    let regions: Vec<RegionId> = panel.regions().into_iter().collect();
    let mut sums: Vec<Vec<Option<f64>>> = vec![Vec::new(); regions.len()];
    for t in panel.time_keys().into_iter().filter(|t| period.contains(t.year)) {
        let slice: Vec<Option<f64>> = regions
            .iter()
            .map(|r| {
                panel.get(r, &t).map(|v| match polarity {
                    Polarity::RiskIncreasing => v,
                    Polarity::RiskDecreasing => -v,
                })
            })
            .collect();
        for (i, p) in spatial_percentile(&slice).into_iter().enumerate() {
            sums[i].push(p);
        }
    }
    regions
        .into_iter()
        .zip(sums)
        .map(|(r, ps)| (r, mean(ps)))
        .collect()
}

/// Kendall correlation between each sensitivity and adaptive-capacity
/// variable and the mortality rate, over regions, within `period`.
///
/// `mortality` holds one rate per region at the context's level, keyed by
/// any year in `period`. Variables are pooled with [`pool_percentiles`]
/// before correlating. Exposure variables get weight 1. A correlation that
/// cannot be computed gives weight 0 and a diagnostic.
pub fn compute_weights(
    ctx: &BuildContext,
    mortality: &VariablePanel,
    category: MortalityCategory,
    period: YearSpan,
) -> Result<WeightTable> {
    let mut rates: BTreeMap<RegionId, Vec<Option<f64>>> = BTreeMap::new();
    for (r, t, v) in mortality.iter() {
        if period.contains(t.year) {
            rates.entry(r.clone()).or_default().push(v);
        }
    }
    let rates: BTreeMap<RegionId, f64> = rates
        .into_iter()
        .filter_map(|(r, vs)| mean(vs).map(|m| (r, m)))
        .collect();
    if rates.is_empty() {
        return Err(Error::EmptyMortality);
    }

    let mut table = WeightTable::new(category);
    for (kind, theme, var) in ctx.spec.variables() {
        if kind == SubIndexKind::Exposure {
            table.insert(kind, &theme.theme_id, &var.variable_id, 1.0)?;
            continue;
        }
        let pooled = pool_percentiles(&ctx.panels[&var.variable_id], var.polarity, period);
        let (xs, ys): (Vec<Option<f64>>, Vec<Option<f64>>) =
            rates.iter().map(|(r, &m)| (pooled.get(r).copied().flatten(), Some(m))).unzip();
        let weight = match kendall_tau(&xs, &ys) {
            Ok(tau) => tau,
            Err(Error::UndefinedCorrelation(why)) => {
                table.diagnostics.push(Diagnostic::new(
                    DiagnosticKind::UndefinedCorrelation,
                    format!("{}/{}: {why}; weight set to 0", theme.theme_id, var.variable_id),
                ));
                0.0
            }
            Err(e) => return Err(e),
        };
        table.insert(kind, &theme.theme_id, &var.variable_id, weight)?;
    }
    Ok(table)
}
