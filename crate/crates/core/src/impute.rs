//! Temporal gap filling for slow-moving panels and imputation of missing
//! percentiles. Nothing here moves values between regions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Resolution, TimeKey, VariablePanel, YearSpan};

fn require_yearly(panel: &VariablePanel, op: &str) -> Result<()> {
    if panel.resolution != Resolution::Yearly {
        return Err(Error::InvalidInput(format!(
            "{op} needs a yearly panel, `{}` is {}",
            panel.variable_id, panel.resolution
        )));
    }
    Ok(())
}

/// Fills every year of `span` per region: linear between the nearest
/// observed years, held flat beyond the first and last observation.
/// Observations are kept as they are, including ones outside `span`.
/// Regions with no observation stay missing.
pub fn interpolate_annual(panel: &VariablePanel, span: YearSpan) -> Result<VariablePanel> {
    require_yearly(panel, "interpolate_annual")?;
    let mut out = VariablePanel::new(panel.variable_id.clone(), panel.unit.clone(), Resolution::Yearly);
    for region in panel.regions() {
        let observed: BTreeMap<i32, f64> = panel
            .region_series(&region)
            .into_iter()
            .filter_map(|(t, v)| v.map(|v| (t.year, v)))
            .collect();
        for (t, v) in panel.region_series(&region) {
            out.insert(region.clone(), t, v);
        }
        for year in span.years() {
            if observed.contains_key(&year) {
                continue;
            }
            let before = observed.range(..year).next_back();
            let after = observed.range(year..).next();
            let value = match (before, after) {
                (Some((&y0, &v0)), Some((&y1, &v1))) => {
                    let t = f64::from(year - y0) / f64::from(y1 - y0);
                    Some((v0 + t * (v1 - v0)).clamp(v0.min(v1), v0.max(v1)))
                }
                (Some((_, &v)), None) | (None, Some((_, &v))) => Some(v),
                (None, None) => None,
            };
            out.insert(region.clone(), TimeKey::yearly(year), value);
        }
    }
    Ok(out)
}

/// Copies each yearly value to every month or ISO week of that year. Weeks
/// belong to their ISO week-numbering year.
pub fn broadcast(panel: &VariablePanel, target: Resolution) -> Result<VariablePanel> {
    require_yearly(panel, "broadcast")?;
    if !matches!(target, Resolution::Monthly | Resolution::Weekly | Resolution::Yearly) {
        return Err(Error::InvalidInput(format!("cannot broadcast to {target}")));
    }
    let mut out = VariablePanel::new(panel.variable_id.clone(), panel.unit.clone(), target);
    for (region, key, value) in panel.iter() {
        for child in TimeKey::all_in_year(key.year, target) {
            out.insert(region.clone(), child, value);
        }
    }
    Ok(out)
}

/// Replaces each missing entry with a value drawn uniformly, with
/// replacement, from the present entries. Leaves the vector untouched when
/// nothing is present.
pub fn fill_from_observed<R: Rng + ?Sized>(values: &[Option<f64>], rng: &mut R) -> Vec<Option<f64>> {
    let observed: Vec<f64> = values.iter().flatten().copied().collect();
    if observed.is_empty() {
        return values.to_vec();
    }
    values
        .iter()
        .map(|v| v.or_else(|| Some(observed[rng.random_range(0..observed.len())])))
        .collect()
}

/// Replaces each missing entry with the mean of the present entries.
pub fn fill_with_mean(values: &[Option<f64>]) -> Vec<Option<f64>> {
    match crate::stats::mean(values.iter().copied()) {
        Some(m) => values.iter().map(|v| v.or(Some(m))).collect(),
        None => values.to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipleImputation {
    pub completed: Vec<Vec<f64>>,
    /// Element-wise mean over the completed vectors.
    pub mean: Vec<f64>,
}

/// Draws `m` completed copies of a percentile vector, filling each missing
/// entry from the empirical distribution of the present entries.
pub fn multiple_impute_percentiles(values: &[Option<f64>], m: usize, seed: u64) -> Result<MultipleImputation> {
    if m == 0 {
        return Err(Error::InvalidInput("multiple imputation needs m >= 1".into()));
    }
    if values.iter().all(Option::is_none) {
        return Err(Error::NothingToImpute);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let completed: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            fill_from_observed(values, &mut rng)
                .into_iter()
                .map(|v| v.expect("filled"))
                .collect()
        })
        .collect();
    let mean = (0..values.len())
        .map(|i| completed.iter().map(|c| c[i]).sum::<f64>() / m as f64)
        .collect();
    Ok(MultipleImputation { completed, mean })
}
