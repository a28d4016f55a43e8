use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction in which a variable raises vulnerability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    RiskIncreasing,
    RiskDecreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubIndexKind {
    Exposure,
    Sensitivity,
    AdaptiveCapacity,
}

impl SubIndexKind {
    pub const ALL: [SubIndexKind; 3] = [
        SubIndexKind::Exposure,
        SubIndexKind::Sensitivity,
        SubIndexKind::AdaptiveCapacity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SubIndexKind::Exposure => "exposure",
            SubIndexKind::Sensitivity => "sensitivity",
            SubIndexKind::AdaptiveCapacity => "adaptive_capacity",
        }
    }

    /// Position 0..3 in [`SubIndexKind::ALL`].
    pub fn ordinal(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SubIndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Unnormalised percentile rank-sum over flattened variables.
    EqualSum,
    /// Theme means re-ranked, averaged per sub-index, averaged overall.
    EqualThemed,
    /// As `EqualThemed` with variable percentiles scaled by a mortality
    /// correlation before the theme mean.
    Weighted,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::EqualSum => "equal_sum",
            Method::EqualThemed => "equal_themed",
            Method::Weighted => "weighted",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableRef {
    pub variable_id: String,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeSpec {
    pub theme_id: String,
    pub variables: Vec<VariableRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubIndexSpec {
    pub kind: SubIndexKind,
    pub themes: Vec<ThemeSpec>,
}

/// Declarative description of one vulnerability index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSpec {
    pub index_id: String,
    pub method: Method,
    pub sub_indices: Vec<SubIndexSpec>,
}

impl IndexSpec {
    pub fn from_json(text: &str) -> Result<IndexSpec> {
        let spec: IndexSpec = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "index spec".into(),
            source,
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<IndexSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: IndexSpec = serde_json::from_str(&text).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("index spec serializes")
    }

    /// Checks that there is exactly one sub-index per kind, no empty theme or
    /// sub-index, and that theme and variable ids are unique within the index.
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidSpec(format!("{}: {m}", self.index_id)));
        if self.index_id.is_empty() {
            return Err(Error::InvalidSpec("empty index_id".into()));
        }
        for kind in SubIndexKind::ALL {
            let n = self.sub_indices.iter().filter(|s| s.kind == kind).count();
            if n != 1 {
                return invalid(format!("expected exactly one {kind} sub-index, found {n}"));
            }
        }
        if self.sub_indices.len() != 3 {
            return invalid(format!("expected 3 sub-indices, found {}", self.sub_indices.len()));
        }
        let mut themes = BTreeSet::new();
        let mut variables = BTreeSet::new();
        for sub in &self.sub_indices {
            if sub.themes.is_empty() {
                return invalid(format!("{} sub-index has no themes", sub.kind));
            }
            for theme in &sub.themes {
                if theme.variables.is_empty() {
                    return invalid(format!("theme `{}` has no variables", theme.theme_id));
                }
                if !themes.insert(theme.theme_id.as_str()) {
                    return invalid(format!("duplicate theme `{}`", theme.theme_id));
                }
                for var in &theme.variables {
                    if !variables.insert(var.variable_id.as_str()) {
                        return invalid(format!("duplicate variable `{}`", var.variable_id));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sub_index(&self, kind: SubIndexKind) -> &SubIndexSpec {
        self.sub_indices
            .iter()
            .find(|s| s.kind == kind)
            .expect("validated spec has every sub-index kind")
    }

    /// (sub-index, theme, variable) triples in spec order, exposure first.
    pub fn variables(&self) -> impl Iterator<Item = (SubIndexKind, &ThemeSpec, &VariableRef)> + '_ {
        SubIndexKind::ALL.into_iter().flat_map(move |kind| {
            self.sub_index(kind)
                .themes
                .iter()
                .flat_map(move |t| t.variables.iter().map(move |v| (kind, t, v)))
        })
    }
}
