use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::panel::Diagnostic;
use super::spec::{IndexSpec, SubIndexKind};
use crate::error::{Error, Result};

/// Mortality grouping a weight table is correlated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MortalityCategory {
    Heat,
    AirQuality,
    AllCause,
}

impl MortalityCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            MortalityCategory::Heat => "heat",
            MortalityCategory::AirQuality => "air_quality",
            MortalityCategory::AllCause => "all_cause",
        }
    }
}

impl fmt::Display for MortalityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MortalityCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(MortalityCategory::Heat),
            "air_quality" => Ok(MortalityCategory::AirQuality),
            "all_cause" => Ok(MortalityCategory::AllCause),
            _ => Err(Error::InvalidInput(format!("unknown mortality category `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeightKey {
    pub sub_index: SubIndexKind,
    pub theme_id: String,
    pub variable_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WeightEntry {
    variable_id: String,
    theme_id: String,
    sub_index: SubIndexKind,
    weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WeightDocument {
    mortality_category: MortalityCategory,
    entries: Vec<WeightEntry>,
    #[serde(default)]
    diagnostics: Vec<Diagnostic>,
}

/// Kendall's-tau weights per (sub-index, theme, variable).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub mortality_category: MortalityCategory,
    entries: BTreeMap<WeightKey, f64>,
    pub diagnostics: Vec<Diagnostic>,
}

impl WeightTable {
    pub fn new(mortality_category: MortalityCategory) -> Self {
        WeightTable {
            mortality_category,
            entries: BTreeMap::new(),
            diagnostics: Vec::new(),
        }
    }

    /// A table with every weight equal to 1, which reduces the weighted
    /// method to the themed one.
    pub fn unit(spec: &IndexSpec, mortality_category: MortalityCategory) -> Self {
        let mut table = WeightTable::new(mortality_category);
        for (kind, theme, var) in spec.variables() {
            table
                .insert(kind, &theme.theme_id, &var.variable_id, 1.0)
                .expect("unit weight is valid");
        }
        table
    }

    pub fn insert(&mut self, sub_index: SubIndexKind, theme_id: &str, variable_id: &str, weight: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&weight) {
            return Err(Error::InvalidInput(format!(
                "weight {weight} for `{variable_id}` outside [-1, 1]"
            )));
        }
        if sub_index == SubIndexKind::Exposure && weight != 1.0 {
            return Err(Error::InvalidInput(format!(
                "exposure weight for `{variable_id}` must be 1, got {weight}"
            )));
        }
        self.entries.insert(
            WeightKey {
                sub_index,
                theme_id: theme_id.to_owned(),
                variable_id: variable_id.to_owned(),
            },
            weight,
        );
        Ok(())
    }

    pub fn get(&self, sub_index: SubIndexKind, theme_id: &str, variable_id: &str) -> Option<f64> {
        self.entries
            .get(&WeightKey {
                sub_index,
                theme_id: theme_id.to_owned(),
                variable_id: variable_id.to_owned(),
            })
            .copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WeightKey, f64)> {
        self.entries.iter().map(|(k, w)| (k, *w))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every variable of `spec` must have a weight.
    pub fn check_covers(&self, spec: &IndexSpec) -> Result<()> {
        for (kind, theme, var) in spec.variables() {
            if self.get(kind, &theme.theme_id, &var.variable_id).is_none() {
                return Err(Error::InvalidInput(format!(
                    "weight table has no entry for {kind}/{}/{}",
                    theme.theme_id, var.variable_id
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = WeightDocument {
            mortality_category: self.mortality_category,
            entries: self
                .entries
                .iter()
                .map(|(k, w)| WeightEntry {
                    variable_id: k.variable_id.clone(),
                    theme_id: k.theme_id.clone(),
                    sub_index: k.sub_index,
                    weight: *w,
                })
                .collect(),
            diagnostics: self.diagnostics.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("weight table serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<WeightTable> {
        let doc: WeightDocument = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "weight table".into(),
            source,
        })?;
        let mut table = WeightTable::new(doc.mortality_category);
        for e in doc.entries {
            table.insert(e.sub_index, &e.theme_id, &e.variable_id, e.weight)?;
        }
        table.diagnostics = doc.diagnostics;
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<WeightTable> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        WeightTable::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_and_non_unit_exposure() {
        let mut t = WeightTable::new(MortalityCategory::AllCause);
        assert!(t.insert(SubIndexKind::Sensitivity, "s", "x", 1.5).is_err());
        assert!(t.insert(SubIndexKind::Exposure, "e", "ehf", 0.3).is_err());
        assert!(t.insert(SubIndexKind::Sensitivity, "s", "x", -0.25).is_ok());
        assert_eq!(t.get(SubIndexKind::Sensitivity, "s", "x"), Some(-0.25));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut t = WeightTable::new(MortalityCategory::Heat);
        t.insert(SubIndexKind::Exposure, "e", "ehf", 1.0).unwrap();
        t.insert(SubIndexKind::Sensitivity, "s", "eld", 0.123_456_789_012_345_67).unwrap();
        t.insert(SubIndexKind::AdaptiveCapacity, "a", "hosp", -0.0).unwrap();
        let back = WeightTable::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }
}
