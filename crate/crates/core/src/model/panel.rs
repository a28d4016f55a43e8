use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::time::{Resolution, TimeKey};
use crate::error::Error;

/// Geographic level of a region code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Sa2,
    Sa3,
    Sa4,
    Lga,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Sa2 => "sa2",
            Level::Sa3 => "sa3",
            Level::Sa4 => "sa4",
            Level::Lga => "lga",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sa2" => Ok(Level::Sa2),
            "sa3" => Ok(Level::Sa3),
            "sa4" => Ok(Level::Sa4),
            "lga" => Ok(Level::Lga),
            _ => Err(Error::InvalidInput(format!("unknown geographic level `{s}`"))),
        }
    }
}

/// Opaque region code at a geographic level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegionId {
    pub code: String,
    pub level: Level,
}

impl RegionId {
    pub fn new(code: impl Into<String>, level: Level) -> Self {
        RegionId {
            code: code.into(),
            level,
        }
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.code)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    MixedLevel,
    TimeKeyOutOfRange,
    ResolutionMismatch,
    EmptyRegionCode,
    RegionWithoutCells,
    EmptyClimatology,
    UndefinedCorrelation,
    ThemeDropped,
}

/// A non-fatal finding attached to a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Diagnostic {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

/// One variable observed over (region, time), with explicit missingness.
///
/// `None` values are observed-as-missing entries; keys that are absent from
/// the map were never part of the panel. Keys are unique by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VariablePanel {
    pub variable_id: String,
    pub unit: String,
    pub resolution: Resolution,
    values: BTreeMap<(RegionId, TimeKey), Option<f64>>,
}

impl VariablePanel {
    pub fn new(variable_id: impl Into<String>, unit: impl Into<String>, resolution: Resolution) -> Self {
        VariablePanel {
            variable_id: variable_id.into(),
            unit: unit.into(),
            resolution,
            values: BTreeMap::new(),
        }
    }

    /// Inserts an entry, returning the previous one if the key was present.
    pub fn insert(&mut self, region: RegionId, time: TimeKey, value: Option<f64>) -> Option<Option<f64>> {
        self.values.insert((region, time), value)
    }

    /// Observed value, `None` when missing or absent.
    pub fn get(&self, region: &RegionId, time: &TimeKey) -> Option<f64> {
        self.entry(region, time).flatten()
    }

    /// `None` when the key is absent, `Some(None)` when present but missing.
    pub fn entry(&self, region: &RegionId, time: &TimeKey) -> Option<Option<f64>> {
        // BTreeMap lookups need an owned tuple key.
        self.values.get(&(region.clone(), *time)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RegionId, &TimeKey, Option<f64>)> {
        self.values.iter().map(|((r, t), v)| (r, t, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn present_count(&self) -> usize {
        self.values.values().filter(|v| v.is_some()).count()
    }

    pub fn regions(&self) -> BTreeSet<RegionId> {
        self.values.keys().map(|(r, _)| r.clone()).collect()
    }

    pub fn time_keys(&self) -> BTreeSet<TimeKey> {
        self.values.keys().map(|(_, t)| *t).collect()
    }

    /// Level of the first region, if any.
    pub fn level(&self) -> Option<Level> {
        self.values.keys().next().map(|(r, _)| r.level)
    }

    /// All entries of one region in time order.
    pub fn region_series(&self, region: &RegionId) -> Vec<(TimeKey, Option<f64>)> {
        self.values
            .iter()
            .filter(|((r, _), _)| r == region)
            .map(|((_, t), v)| (*t, *v))
            .collect()
    }

    /// Applies `f` to every present value; missing entries stay missing.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> VariablePanel {
        VariablePanel {
            variable_id: self.variable_id.clone(),
            unit: self.unit.clone(),
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .map(|(k, v)| (k.clone(), v.map(&f)))
                .collect(),
        }
    }
}

/// Checks the panel invariants, returning one diagnostic per violation.
pub fn validate_panel(panel: &VariablePanel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut levels: BTreeMap<Level, usize> = BTreeMap::new();
    let mut code_levels: BTreeMap<&str, BTreeSet<Level>> = BTreeMap::new();
    for region in panel.regions_iter() {
        *levels.entry(region.level).or_default() += 1;
        code_levels.entry(&region.code).or_default().insert(region.level);
        if region.code.is_empty() {
            out.push(Diagnostic::new(
                DiagnosticKind::EmptyRegionCode,
                format!("panel `{}` has an empty region code", panel.variable_id),
            ));
        }
    }
    if levels.len() > 1 {
        let found: Vec<_> = levels.keys().map(|l| l.as_str()).collect();
        out.push(Diagnostic::new(
            DiagnosticKind::MixedLevel,
            format!(
                "mixed geographic level in panel `{}`: {}",
                panel.variable_id,
                found.join(", ")
            ),
        ));
    }

    for key in panel.time_keys() {
        if key.resolution != panel.resolution {
            out.push(Diagnostic::new(
                DiagnosticKind::ResolutionMismatch,
                format!(
                    "time key {key} is {} but panel `{}` is {}",
                    key.resolution, panel.variable_id, panel.resolution
                ),
            ));
        } else if !key.is_valid() {
            out.push(Diagnostic::new(
                DiagnosticKind::TimeKeyOutOfRange,
                format!(
                    "TimeKey out of range in panel `{}`: {} {}/{}",
                    panel.variable_id, key.resolution, key.year, key.sub
                ),
            ));
        }
    }
    out
}

impl VariablePanel {
    fn regions_iter(&self) -> impl Iterator<Item = &RegionId> {
        let mut last: Option<&RegionId> = None;
        self.values.keys().filter_map(move |(r, _)| {
            if last == Some(r) {
                None
            } else {
                last = Some(r);
                Some(r)
            }
        })
    }
}
