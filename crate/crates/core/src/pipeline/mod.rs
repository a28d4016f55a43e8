//! Config-driven orchestration behind the command-line tool. Each command
//! is a plain function returning the files it wrote; the stages it chains
//! are also available through [`Pipeline`] for in-process use.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::impute::{broadcast, interpolate_annual};
use crate::index::{
    breakdown, build_index, compute_weights, geojson_property_join, read_index_csv, write_index_csv_file,
    BreakdownReport, BuildContext,
};
use crate::indicators::{
    build_climatology, default_rule, restrict_years, temporal_aggregate, DailyIndicators, DailyTempSeries,
};
use crate::ingest::{
    crosswalk_to_level, mortality_category_rates, read_panel_csv, zonal_aggregate, CellWeightTable, Crosswalk,
    GridSeries, MortalityTable,
};
use crate::model::{
    Diagnostic, IndexResult, IndexSpec, Method, RegionId, Resolution, TimeKey, VariablePanel, WeightTable,
};
use crate::synth::{generate, layout, SynthFixture, POLLUTANTS};

pub use config::{InputPaths, PipelineConfig};

/// The index specs shipped with the crate, as `(index_id, json)`.
pub const SHIPPED_SPECS: [(&str, &str); 3] = [
    ("heat", include_str!("../../specs/heat.json")),
    ("cold", include_str!("../../specs/cold.json")),
    ("air_quality", include_str!("../../specs/air_quality.json")),
];

pub const INDICATOR_DIR: &str = "indicators";
pub const WEIGHT_DIR: &str = "weights";
pub const INDEX_DIR: &str = "index";
pub const BREAKDOWN_DIR: &str = "breakdown";
pub const EXPORT_DIR: &str = "exports";

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a PathBuf> {
    path.as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("config has no `inputs.{what}` path")))
}

/// Inputs loaded once and prepared up to the point where they differ by
/// resolution: exposure indicators as daily panels, demographics as
/// gap-filled yearly panels, mortality at the index level.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
    pub specs: Vec<IndexSpec>,
    daily_exposure: BTreeMap<String, VariablePanel>,
    demographics: BTreeMap<String, VariablePanel>,
    mortality: Option<VariablePanel>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Raw inputs as read from disk or generated in memory.
#[derive(Debug, Clone, Default)]
pub struct PipelineInputs {
    pub temperatures: Option<DailyTempSeries>,
    pub grids: BTreeMap<String, GridSeries>,
    pub cell_weights: Option<CellWeightTable>,
    /// Yearly panels, possibly with unobserved years.
    pub demographics: BTreeMap<String, VariablePanel>,
    pub mortality: Option<MortalityTable>,
    pub crosswalk: Option<Crosswalk>,
}

impl PipelineInputs {
    /// Reads every input named by `config`.
    pub fn read(config: &PipelineConfig) -> Result<Self> {
        let inputs = &config.inputs;
        let temperatures = match &inputs.daily_temperature {
            Some(p) => Some(DailyTempSeries::read_csv(&config.resolve(p), config.level)?),
            None => None,
        };
        let grids = inputs
            .pollutant_grids
            .iter()
            .map(|(id, p)| Ok((id.clone(), GridSeries::read_csv(&config.resolve(p))?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let cell_weights = if grids.is_empty() {
            None
        } else {
            Some(CellWeightTable::read_csv(&config.resolve(require(&inputs.cell_weights, "cell_weights")?))?)
        };
        let mut demographics = BTreeMap::new();
        if let Some(dir) = &inputs.demographics_dir {
            let dir = config.resolve(dir);
            let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
            let mut paths: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            paths.sort();
            for path in paths {
                let panel = read_panel_csv(&path)?;
                if panel.resolution != Resolution::Yearly {
                    return Err(Error::InvalidInput(format!(
                        "{}: demographic panels must be yearly, found {}",
                        path.display(),
                        panel.resolution
                    )));
                }
                demographics.insert(panel.variable_id.clone(), panel);
            }
        }
        let crosswalk = match &inputs.crosswalk {
            Some(p) => Some(Crosswalk::read_csv(&config.resolve(p))?),
            None => None,
        };
        let mortality = match &inputs.mortality {
            Some(p) => {
                let level = crosswalk
                    .as_ref()
                    .and_then(|c| c.iter().next().map(|(_, parent)| parent.level))
                    .unwrap_or(config.level);
                Some(MortalityTable::read_csv(&config.resolve(p), level)?)
            }
            None => None,
        };
        Ok(PipelineInputs {
            temperatures,
            grids,
            cell_weights,
            demographics,
            mortality,
            crosswalk,
        })
    }
}

impl From<SynthFixture> for PipelineInputs {
    fn from(f: SynthFixture) -> Self {
        PipelineInputs {
            temperatures: Some(f.temperatures),
            grids: f.grids,
            cell_weights: Some(f.cell_weights),
            demographics: f.demographics,
            mortality: Some(f.mortality),
            crosswalk: Some(f.crosswalk),
        }
    }
}

/// The index specs shipped with the crate, parsed.
pub fn shipped_specs() -> Vec<IndexSpec> {
    SHIPPED_SPECS
        .iter()
        .map(|(_, json)| IndexSpec::from_json(json).expect("shipped specs are valid"))
        .collect()
}

impl Pipeline {
    /// Reads the config's specs and inputs.
    pub fn load(config: PipelineConfig) -> Result<Self> {
        let specs = config
            .indices
            .iter()
            .map(|p| IndexSpec::read(&config.resolve(p)))
            .collect::<Result<Vec<_>>>()?;
        let inputs = PipelineInputs::read(&config)?;
        Pipeline::from_inputs(config, specs, inputs)
    }

    pub fn from_inputs(config: PipelineConfig, specs: Vec<IndexSpec>, inputs: PipelineInputs) -> Result<Self> {
        let mut diagnostics = Vec::new();
        let mut daily_exposure = BTreeMap::new();
        if let Some(series) = &inputs.temperatures {
            let (clim, diags) = build_climatology(series, config.baseline, config.indicator_params);
            diagnostics.extend(diags);
            let ind = DailyIndicators::compute(series, &clim);
            for p in ind.panels() {
                daily_exposure.insert(p.variable_id.clone(), p.clone());
            }
        }
        if !inputs.grids.is_empty() {
            let weights = inputs
                .cell_weights
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("pollutant grids need a cell weight table".into()))?;
            for (id, grid) in &inputs.grids {
                let (panel, diags) = zonal_aggregate(grid, weights, id);
                diagnostics.extend(diags);
                daily_exposure.insert(id.clone(), panel);
            }
        }
        let mut demographics = BTreeMap::new();
        for (id, raw) in &inputs.demographics {
            let filled = restrict_years(&interpolate_annual(raw, config.years)?, config.years);
            demographics.insert(id.clone(), filled);
        }
        for panel in daily_exposure.values().chain(demographics.values()) {
            if let Some(level) = panel.level() {
                if level != config.level {
                    return Err(Error::InvalidInput(format!(
                        "`{}` is at {level} but the configured level is {}",
                        panel.variable_id, config.level
                    )));
                }
            }
        }
        let mortality = match &inputs.mortality {
            Some(table) => {
                if table.is_empty() {
                    return Err(Error::EmptyMortality);
                }
                let rates = mortality_category_rates(table, config.mortality_category);
                let at_level = rates.level().is_none_or(|l| l == config.level);
                match &inputs.crosswalk {
                    Some(cw) if !at_level => {
                        let mut targets: Vec<RegionId> =
                            daily_exposure.values().chain(demographics.values()).flat_map(|p| p.regions()).collect();
                        targets.sort();
                        targets.dedup();
                        Some(crosswalk_to_level(&rates, cw, config.level, &targets)?)
                    }
                    _ => Some(rates),
                }
            }
            None => None,
        };
        Ok(Pipeline {
            config,
            specs,
            daily_exposure,
            demographics,
            mortality,
            diagnostics,
        })
    }

    fn rule(&self, variable_id: &str) -> crate::indicators::AggregationRule {
        self.config
            .aggregation
            .get(variable_id)
            .copied()
            .unwrap_or_else(|| default_rule(variable_id))
    }

    /// Exposure indicators aggregated to `resolution`, within the configured
    /// years.
    pub fn exposure_at(&self, resolution: Resolution) -> Result<BTreeMap<String, VariablePanel>> {
        self.daily_exposure
            .iter()
            .map(|(id, daily)| {
                let p = temporal_aggregate(daily, resolution, self.rule(id))?;
                Ok((id.clone(), restrict_years(&p, self.config.years)))
            })
            .collect()
    }

    /// Every available variable at `resolution`.
    pub fn panels_at(&self, resolution: Resolution) -> Result<BTreeMap<String, VariablePanel>> {
        let mut out = self.exposure_at(resolution)?;
        for (id, yearly) in &self.demographics {
            out.insert(id.clone(), broadcast(yearly, resolution)?);
        }
        Ok(out)
    }

    pub fn spec(&self, index_id: &str) -> Result<&IndexSpec> {
        self.specs
            .iter()
            .find(|s| s.index_id == index_id)
            .ok_or_else(|| Error::InvalidInput(format!("no index `{index_id}` in config")))
    }

    pub fn mortality(&self) -> Result<&VariablePanel> {
        self.mortality
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("config has no `inputs.mortality` path".into()))
    }

    /// A build context for `spec` at `resolution` without weights; the
    /// method is switched to `equal_themed` when the spec is weighted.
    pub fn context(&self, spec: &IndexSpec, resolution: Resolution) -> Result<BuildContext> {
        self.context_from(spec, &self.panels_at(resolution)?)
    }

    /// As [`Pipeline::context`], taking the panels from `panels`.
    pub fn context_from(&self, spec: &IndexSpec, panels: &BTreeMap<String, VariablePanel>) -> Result<BuildContext> {
        let mut spec = spec.clone();
        if spec.method == Method::Weighted {
            spec.method = Method::EqualThemed;
        }
        let wanted = spec
            .variables()
            .filter_map(|(_, _, v)| panels.get(&v.variable_id).map(|p| (v.variable_id.clone(), p.clone())))
            .collect();
        BuildContext::new(spec, wanted, None, self.config.missing_policy)
    }

    /// Mortality-correlation weights for `spec`, from yearly panels over the
    /// configured years.
    pub fn compute_weights(&self, spec: &IndexSpec) -> Result<WeightTable> {
        let ctx = self.context(spec, Resolution::Yearly)?;
        compute_weights(&ctx, self.mortality()?, self.config.mortality_category, self.config.years)
    }

    fn weight_path(&self, index_id: &str) -> PathBuf {
        self.config.out_dir().join(WEIGHT_DIR).join(format!("{index_id}.json"))
    }

    /// Weights from the output directory if the `weights` command wrote
    /// them, computed otherwise.
    pub fn weights_for(&self, spec: &IndexSpec) -> Result<WeightTable> {
        let path = self.weight_path(&spec.index_id);
        if path.exists() {
            WeightTable::read(&path)
        } else {
            self.compute_weights(spec)
        }
    }

    /// Builds `spec` at `resolution` with the spec's method.
    pub fn build(&self, spec: &IndexSpec, resolution: Resolution) -> Result<IndexResult> {
        self.build_from(spec, &self.panels_at(resolution)?)
    }

    /// As [`Pipeline::build`], taking the panels from `panels`.
    pub fn build_from(&self, spec: &IndexSpec, panels: &BTreeMap<String, VariablePanel>) -> Result<IndexResult> {
        let ctx = self.context_from(spec, panels)?;
        let ctx = if spec.method == Method::Weighted {
            ctx.with_method(Method::Weighted, Some(self.weights_for(spec)?))?
        } else {
            ctx
        };
        build_index(&ctx)
    }

    fn indicator_resolutions(&self) -> Vec<Resolution> {
        let mut res = self.config.resolutions.clone();
        if !res.contains(&Resolution::Yearly) {
            res.push(Resolution::Yearly);
        }
        res
    }
}

/// Writes every exposure indicator at every configured resolution, plus
/// yearly.
pub fn cmd_indicators(config: &PipelineConfig) -> Result<Vec<PathBuf>> {
    if config.inputs.daily_temperature.is_none() && config.inputs.pollutant_grids.is_empty() {
        return Err(Error::InvalidInput(
            "config has neither `inputs.daily_temperature` nor `inputs.pollutant_grids`".into(),
        ));
    }
    let pipeline = Pipeline::load(config.clone())?;
    let dir = config.out_dir().join(INDICATOR_DIR);
    let mut written = Vec::new();
    for res in pipeline.indicator_resolutions() {
        for (id, panel) in pipeline.exposure_at(res)? {
            let path = dir.join(format!("{id}_{res}.csv"));
            crate::ingest::write_panel_csv(&panel, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes one weight table per configured index.
pub fn cmd_weights(config: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let pipeline = Pipeline::load(config.clone())?;
    let mut written = Vec::new();
    for spec in &pipeline.specs {
        let table = pipeline.compute_weights(spec)?;
        let path = pipeline.weight_path(&spec.index_id);
        write_text(&path, &table.to_json())?;
        written.push(path);
    }
    Ok(written)
}

/// Writes one index CSV per configured index and resolution.
pub fn cmd_build(config: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let pipeline = Pipeline::load(config.clone())?;
    let dir = config.out_dir().join(INDEX_DIR);
    let mut written = Vec::new();
    for res in &config.resolutions {
        let panels = pipeline.panels_at(*res)?;
        for spec in &pipeline.specs {
            let result = pipeline.build_from(spec, &panels)?;
            let path = dir.join(format!("{}_{res}.csv", spec.index_id));
            write_index_csv_file(&result, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Rebuilds one index at the resolution of `time` and decomposes one
/// region there. The report is written and returned.
pub fn cmd_breakdown(config: &PipelineConfig, index_id: &str, region: &str, time: &str) -> Result<(PathBuf, BreakdownReport)> {
    let key: TimeKey = time.parse()?;
    let pipeline = Pipeline::load(config.clone())?;
    let spec = pipeline.spec(index_id)?;
    let result = pipeline.build(spec, key.resolution)?;
    let region = RegionId::new(region, config.level);
    let report = breakdown(&result, &region, &key)?;
    let path = config
        .out_dir()
        .join(BREAKDOWN_DIR)
        .join(format!("{index_id}_{}_{key}.json", region.code));
    write_text(&path, &report.to_json())?;
    Ok((path, report))
}

/// Converts the index CSVs written by `build` to GeoJSON feature
/// collections for joining onto region boundaries.
pub fn cmd_export(config: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let specs = config
        .indices
        .iter()
        .map(|p| IndexSpec::read(&config.resolve(p)))
        .collect::<Result<Vec<_>>>()?;
    let out = config.out_dir();
    let mut written = Vec::new();
    for res in &config.resolutions {
        for spec in &specs {
            let src = out.join(INDEX_DIR).join(format!("{}_{res}.csv", spec.index_id));
            let file = std::fs::File::open(&src).map_err(|e| Error::io(&src, e))?;
            let rows = read_index_csv(file, &src.display().to_string())?;
            let doc = geojson_property_join(&rows);
            let path = out.join(EXPORT_DIR).join(format!("{}_{res}.geojson", spec.index_id));
            write_text(&path, &serde_json::to_string_pretty(&doc).expect("geojson serializes"))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes a synthetic fixture, the shipped index specs and a ready-to-run
/// `config.json` into the output directory.
pub fn cmd_synth(config: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let seed = config
        .seed
        .ok_or_else(|| Error::InvalidInput("synth needs a seed (config `seed` or --seed)".into()))?;
    let mut params = config.synth.clone();
    params.years = config.years;
    let fixture = generate(&params, seed)?;
    let out = config.out_dir();
    fixture.write(&out)?;

    let mut fixture_config = config.clone();
    fixture_config.seed = Some(seed);
    fixture_config.out_dir = PathBuf::from(".");
    fixture_config.synth = params;
    fixture_config.inputs = InputPaths {
        daily_temperature: Some(layout::TEMPERATURE.into()),
        pollutant_grids: POLLUTANTS
            .iter()
            .map(|p| (p.to_string(), Path::new(layout::GRID_DIR).join(format!("{p}.csv"))))
            .collect(),
        cell_weights: Some(layout::CELL_WEIGHTS.into()),
        demographics_dir: Some(layout::DEMOGRAPHICS_DIR.into()),
        mortality: Some(layout::MORTALITY.into()),
        crosswalk: Some(layout::CROSSWALK.into()),
    };
    fixture_config.indices.clear();
    let mut written = Vec::new();
    for (id, json) in SHIPPED_SPECS {
        let rel = Path::new(layout::SPEC_DIR).join(format!("{id}.json"));
        write_text(&out.join(&rel), json)?;
        fixture_config.indices.push(rel);
    }
    let config_path = out.join("config.json");
    write_text(&config_path, &fixture_config.to_json())?;
    let report_path = out.join("synth_report.json");
    write_text(
        &report_path,
        &serde_json::to_string_pretty(&fixture.report).expect("report serializes"),
    )?;
    written.push(config_path);
    written.push(report_path);
    Ok(written)
}
