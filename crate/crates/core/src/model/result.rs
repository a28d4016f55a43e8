use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::panel::{Diagnostic, Level, RegionId};
use super::spec::{Method, SubIndexKind};
use super::time::{Resolution, TimeKey};
use super::weights::MortalityCategory;

/// A value that may be missing, and may have been filled by the missing-value
/// policy rather than computed from observations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Score {
    pub value: Option<f64>,
    pub imputed: bool,
}

impl Score {
    pub fn observed(value: Option<f64>) -> Self {
        Score {
            value,
            imputed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubIndexScore {
    pub kind: SubIndexKind,
    /// Sub-index score before cross-region ranking.
    pub raw: Option<f64>,
    /// Cross-region percentile of `raw`; the term that enters the overall index.
    pub percentile: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThemeScore {
    pub sub_index: SubIndexKind,
    pub theme_id: String,
    /// Mean of (weighted) variable percentiles within the theme.
    pub inner: Option<f64>,
    pub percentile: Score,
    /// Variables with at least one observation across regions at this time.
    pub usable_variables: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableScore {
    pub sub_index: SubIndexKind,
    pub theme_id: String,
    pub variable_id: String,
    /// Polarity-adjusted cross-region percentile.
    pub percentile: Option<f64>,
    pub weight: f64,
    /// False when the variable had no observation for any region at this time.
    pub usable: bool,
}

/// Everything computed for one (region, time).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionScores {
    pub overall: Option<f64>,
    pub sub_indices: [SubIndexScore; 3],
    pub themes: Vec<ThemeScore>,
    pub variables: Vec<VariableScore>,
}

impl RegionScores {
    pub fn sub_index(&self, kind: SubIndexKind) -> &SubIndexScore {
        &self.sub_indices[kind.ordinal()]
    }

    /// Overall value recomputed from the stored sub-index percentiles.
    pub fn reconstruct_overall(&self, method: Method) -> Option<f64> {
        reconstruct(method, self.sub_indices.iter().map(|s| s.percentile.value))
    }
}

pub(crate) fn reconstruct(method: Method, parts: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let mut sum = 0.0;
    for p in parts {
        sum += p?;
    }
    Some(match method {
        Method::EqualSum => sum,
        Method::EqualThemed | Method::Weighted => sum / 3.0,
    })
}

/// Index values and decomposition for every (region, time) of one build.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexResult {
    pub index_id: String,
    pub method: Method,
    pub level: Level,
    pub resolution: Resolution,
    /// Category of the weight table used, weighted method only.
    pub mortality_category: Option<MortalityCategory>,
    pub records: BTreeMap<(RegionId, TimeKey), RegionScores>,
    pub diagnostics: Vec<Diagnostic>,
}

impl IndexResult {
    pub fn get(&self, region: &RegionId, time: &TimeKey) -> Option<&RegionScores> {
        self.records.get(&(region.clone(), *time))
    }

    pub fn overall(&self, region: &RegionId, time: &TimeKey) -> Option<f64> {
        self.get(region, time).and_then(|r| r.overall)
    }

    pub fn regions(&self) -> BTreeSet<RegionId> {
        self.records.keys().map(|(r, _)| r.clone()).collect()
    }

    pub fn time_keys(&self) -> BTreeSet<TimeKey> {
        self.records.keys().map(|(_, t)| *t).collect()
    }

    /// Overall values of every region at one time, in region order.
    pub fn overall_slice(&self, time: &TimeKey) -> Vec<(RegionId, Option<f64>)> {
        self.records
            .iter()
            .filter(|((_, t), _)| t == time)
            .map(|((r, _), s)| (r.clone(), s.overall))
            .collect()
    }
}
