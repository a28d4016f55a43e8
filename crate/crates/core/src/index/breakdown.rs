use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{reconstruct, IndexResult, Method, RegionId, SubIndexKind, TimeKey};

/// Largest gap tolerated between a stored overall value and its recomputation
/// from the stored sub-index percentiles.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownSubIndex {
    pub kind: SubIndexKind,
    pub raw: Option<f64>,
    pub percentile: Option<f64>,
    pub imputed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownTheme {
    pub sub_index: SubIndexKind,
    pub theme_id: String,
    pub inner: Option<f64>,
    pub percentile: Option<f64>,
    pub imputed: bool,
    pub usable_variables: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownVariable {
    pub sub_index: SubIndexKind,
    pub theme_id: String,
    pub variable_id: String,
    pub percentile: Option<f64>,
    pub weight: f64,
    /// Whether this region sits at or above the cross-region median.
    pub above_median: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub recomputed: Option<f64>,
    pub abs_difference: Option<f64>,
}

/// Why one region scores as it does at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownReport {
    pub index_id: String,
    pub method: Method,
    pub region_code: String,
    pub time: String,
    pub overall: Option<f64>,
    pub sub_indices: Vec<BreakdownSubIndex>,
    pub themes: Vec<BreakdownTheme>,
    pub variables: Vec<BreakdownVariable>,
    pub reconstruction: Reconstruction,
}

impl BreakdownReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("breakdown serializes")
    }
}

/// Decomposes one (region, time) of `result`, and checks that the overall
/// value is recovered from the reported sub-index percentiles.
pub fn breakdown(result: &IndexResult, region: &RegionId, time: &TimeKey) -> Result<BreakdownReport> {
    if !result.records.keys().any(|(r, _)| r == region) {
        return Err(Error::UnknownRegion(region.to_string()));
    }
    let scores = result.get(region, time).ok_or_else(|| Error::UnknownTime(time.to_string()))?;

    let sub_indices: Vec<BreakdownSubIndex> = scores
        .sub_indices
        .iter()
        .map(|s| BreakdownSubIndex {
            kind: s.kind,
            raw: s.raw,
            percentile: s.percentile.value,
            imputed: s.percentile.imputed,
        })
        .collect();
    let themes = scores
        .themes
        .iter()
        .map(|t| BreakdownTheme {
            sub_index: t.sub_index,
            theme_id: t.theme_id.clone(),
            inner: t.inner,
            percentile: t.percentile.value,
            imputed: t.percentile.imputed,
            usable_variables: t.usable_variables,
        })
        .collect();
    let variables = scores
        .variables
        .iter()
        .map(|v| BreakdownVariable {
            sub_index: v.sub_index,
            theme_id: v.theme_id.clone(),
            variable_id: v.variable_id.clone(),
            percentile: v.percentile,
            weight: v.weight,
            above_median: v.percentile.map(|p| p >= 0.5),
        })
        .collect();

    let recomputed = reconstruct(result.method, sub_indices.iter().map(|s| s.percentile));
    let abs_difference = match (scores.overall, recomputed) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        (None, None) => None,
        (a, b) => {
            return Err(Error::SelfCheck(format!(
                "{region} {time}: overall {a:?} but sub-indices give {b:?}"
            )))
        }
    };
    if let Some(d) = abs_difference {
        if d > RECONSTRUCTION_TOLERANCE {
            return Err(Error::SelfCheck(format!(
                "{region} {time}: overall differs from its reconstruction by {d:e}"
            )));
        }
    }

    Ok(BreakdownReport {
        index_id: result.index_id.clone(),
        method: result.method,
        region_code: region.code.clone(),
        time: time.to_string(),
        overall: scores.overall,
        sub_indices,
        themes,
        variables,
        reconstruction: Reconstruction {
            recomputed,
            abs_difference,
        },
    })
}
