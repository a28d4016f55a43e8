use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::MissingPolicy;
use crate::indicators::{AggregationRule, IndicatorParams};
use crate::model::{Level, MortalityCategory, Resolution, YearSpan};
use crate::synth::SynthParams;

/// Input file locations. Relative paths are resolved against the directory
/// of the config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputPaths {
    /// `region_code,date,tmax,tmin` CSV.
    pub daily_temperature: Option<PathBuf>,
    /// Pollutant id to gridded daily CSV.
    pub pollutant_grids: BTreeMap<String, PathBuf>,
    pub cell_weights: Option<PathBuf>,
    /// Directory of yearly panel CSVs, one per variable, named `<id>.csv`.
    pub demographics_dir: Option<PathBuf>,
    pub mortality: Option<PathBuf>,
    /// Maps index regions to the mortality regions.
    pub crosswalk: Option<PathBuf>,
}

/// One JSON document driving every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub level: Level,
    pub resolutions: Vec<Resolution>,
    /// Years the indices are built for.
    pub years: YearSpan,
    /// Years feeding the temperature climatology; every available day when
    /// absent.
    pub baseline: Option<YearSpan>,
    pub indicator_params: IndicatorParams,
    /// Per-variable aggregation rule overrides.
    pub aggregation: BTreeMap<String, AggregationRule>,
    pub missing_policy: MissingPolicy,
    pub mortality_category: MortalityCategory,
    /// Index spec JSON files.
    pub indices: Vec<PathBuf>,
    pub inputs: InputPaths,
    pub synth: SynthParams,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: None,
            out_dir: PathBuf::from("out"),
            level: Level::Sa2,
            resolutions: vec![Resolution::Weekly, Resolution::Monthly, Resolution::Yearly],
            years: YearSpan { start: 2016, end: 2018 },
            baseline: None,
            indicator_params: IndicatorParams::default(),
            aggregation: BTreeMap::new(),
            missing_policy: MissingPolicy::Propagate,
            mortality_category: MortalityCategory::AllCause,
            indices: Vec::new(),
            inputs: InputPaths::default(),
            synth: SynthParams::default(),
            base_dir: PathBuf::new(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "pipeline config".into(),
            source,
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        PipelineConfig::from_json(&text, base).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                context: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn set_base_dir(&mut self, dir: impl Into<PathBuf>) {
        self.base_dir = dir.into();
    }

    /// `path` joined onto the config directory unless it is absolute.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolutions.is_empty() {
            return Err(Error::InvalidInput("config lists no resolutions".into()));
        }
        if self.resolutions.contains(&Resolution::Daily) {
            return Err(Error::InvalidInput("indices are built weekly, monthly or yearly, not daily".into()));
        }
        if self.years.start > self.years.end {
            return Err(Error::InvalidInput(format!(
                "year span {}-{} is empty",
                self.years.start, self.years.end
            )));
        }
        if let MissingPolicy::MultipleImpute { m: 0, .. } = self.missing_policy {
            return Err(Error::InvalidInput("multiple imputation needs m >= 1".into()));
        }
        Ok(())
    }

    /// Applies command-line overrides of the scalar settings. A seed also
    /// reseeds multiple imputation.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        out: Option<PathBuf>,
        level: Option<Level>,
        resolution: Option<Resolution>,
    ) -> Result<()> {
        if let Some(s) = seed {
            self.seed = Some(s);
            if let MissingPolicy::MultipleImpute { m, .. } = self.missing_policy {
                self.missing_policy = MissingPolicy::MultipleImpute { m, seed: s };
            }
        }
        if let Some(o) = out {
            // Flags are relative to the working directory, not the config.
            self.out_dir = std::path::absolute(&o).map_err(|e| Error::io(&o, e))?;
        }
        if let Some(l) = level {
            self.level = l;
        }
        if let Some(r) = resolution {
            self.resolutions = vec![r];
        }
        self.validate()
    }
}
