//! Vulnerability index construction.
//!
//! Each variable is polarity-adjusted and ranked across regions per time
//! slice. The three methods then differ only in how those percentiles are
//! combined:
//!
//! - `equal_sum`: `S_k = Σ_n f(x_n)` over every variable of sub-index `k`,
//!   `VI = Σ_k f(S_k)`, so `VI ∈ [0, 3]`.
//! - `equal_themed`: `S_k = mean_p f(mean_n f(x_n))` over the themes `p` of
//!   `k` and their usable variables, `VI = mean_k f(S_k) ∈ [0, 1]`.
//! - `weighted`: as `equal_themed` with each inner `f(x_n)` scaled by the
//!   variable's weight before the theme mean (the mean still divides by the
//!   variable count, not by the weight sum).
//!
//! `f` is [`crate::stats::spatial_percentile`]. A variable is usable at a
//! time when at least one region observes it; a theme with no usable
//! variable is dropped for that time.

mod breakdown;
mod build;
mod export;
mod weights;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IndexSpec, Level, Method, Polarity, Resolution, VariablePanel, WeightTable};

pub use breakdown::{breakdown, RECONSTRUCTION_TOLERANCE, BreakdownReport, BreakdownSubIndex, BreakdownTheme, BreakdownVariable, Reconstruction};
pub use build::{
    build_index, equal_sum_index, equal_sum_subindex, themed_index, themed_subindex, weighted_index, weighted_subindex,
    SliceScores,
};
pub use export::{
    geojson_property_join, index_rows, read_index_csv, write_index_csv, write_index_csv_file, IndexRow, COMPONENT_HEADER,
};
pub use weights::{compute_weights, pool_percentiles};

/// How missing percentiles are handled wherever values are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Any missing term makes the combination missing.
    #[default]
    Propagate,
    /// A missing term is replaced by the mean of the region's present terms.
    MeanFill,
    /// The index is built `m` times, each filling missing terms with draws
    /// from the region's present terms, and the builds are averaged.
    MultipleImpute { m: usize, seed: u64 },
}

/// Negates risk-decreasing variables so that a higher percentile always
/// means more vulnerable.
pub fn apply_polarity(panel: &VariablePanel, polarity: Polarity) -> VariablePanel {
    match polarity {
        Polarity::RiskIncreasing => panel.clone(),
        Polarity::RiskDecreasing => panel.map_values(|v| -v),
    }
}

/// Everything one index build reads.
#[derive(Debug, Clone)]
pub struct BuildContext {
    pub spec: IndexSpec,
    pub panels: BTreeMap<String, VariablePanel>,
    pub weights: Option<WeightTable>,
    pub missing_policy: MissingPolicy,
    level: Level,
    resolution: Resolution,
}

impl BuildContext {
    /// Checks that every spec variable has a panel, that all panels share
    /// one level and resolution, and that the weighted method has weights
    /// covering every variable.
    pub fn new(
        spec: IndexSpec,
        panels: BTreeMap<String, VariablePanel>,
        weights: Option<WeightTable>,
        missing_policy: MissingPolicy,
    ) -> Result<Self> {
        spec.validate()?;
        let mut level = None;
        let mut resolution = None;
        for (_, _, var) in spec.variables() {
            let panel = panels
                .get(&var.variable_id)
                .ok_or_else(|| Error::MissingPanel(var.variable_id.clone()))?;
            match resolution {
                None => resolution = Some(panel.resolution),
                Some(r) if r != panel.resolution => {
                    return Err(Error::InvalidInput(format!(
                        "panel `{}` is {} but others are {r}",
                        var.variable_id, panel.resolution
                    )))
                }
                _ => {}
            }
            if let Some(l) = panel.level() {
                match level {
                    None => level = Some(l),
                    Some(prev) if prev != l => {
                        return Err(Error::InvalidInput(format!(
                            "panel `{}` is at {l} but others are at {prev}",
                            var.variable_id
                        )))
                    }
                    _ => {}
                }
            }
        }
        if let MissingPolicy::MultipleImpute { m: 0, .. } = missing_policy {
            return Err(Error::InvalidInput("multiple imputation needs m >= 1".into()));
        }
        if spec.method == Method::Weighted {
            let w = weights
                .as_ref()
                .ok_or_else(|| Error::InvalidInput(format!("index `{}` is weighted but has no weight table", spec.index_id)))?;
            w.check_covers(&spec)?;
        }
        Ok(BuildContext {
            level: level.unwrap_or(Level::Sa2),
            resolution: resolution.expect("validated spec has variables"),
            spec,
            panels,
            weights,
            missing_policy,
        })
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    /// Same inputs under a different method; weights are dropped unless the
    /// new method is weighted.
    pub fn with_method(&self, method: Method, weights: Option<WeightTable>) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.method = method;
        BuildContext::new(spec, self.panels.clone(), weights, self.missing_policy)
    }

    /// Applies `f` to every present value of every panel.
    pub fn map_panels(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for p in out.panels.values_mut() {
            *p = p.map_values(&f);
        }
        out
    }
}
