//! File readers and writers for panels, grids, cell weights, mortality and
//! region crosswalks, plus grid-to-region aggregation.
//!
//! Every CSV uses a header row, UTF-8 and `\n` line endings. An empty value
//! field means missing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Diagnostic, DiagnosticKind, Level, MortalityCategory, RegionId, Resolution, TimeKey, VariablePanel,
};

pub const PANEL_HEADER: [&str; 6] = ["region_code", "level", "resolution", "year", "sub", "value"];
pub const CELL_WEIGHT_HEADER: [&str; 4] = ["cell_id", "region_code", "level", "weight"];
pub const GRID_HEADER: [&str; 5] = ["cell_id", "resolution", "year", "sub", "value"];
pub const MORTALITY_HEADER: [&str; 5] = ["region_code", "cause", "period_start", "period_end", "rate"];
pub const CROSSWALK_HEADER: [&str; 4] = ["region_code", "level", "parent_code", "parent_level"];

/// Tolerance on per-region cell weight sums.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

// ---------------------------------------------------------------------------
// CSV plumbing

pub(crate) struct CsvRows<R> {
    context: String,
    reader: csv::Reader<R>,
    columns: Vec<usize>,
}

impl<R: Read> CsvRows<R> {
    pub(crate) fn new(reader: R, context: &str, header: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let found = reader.headers()?.clone();
        let mut columns = Vec::with_capacity(header.len());
        for name in header {
            match found.iter().position(|h| h.trim() == *name) {
                Some(i) => columns.push(i),
                None => {
                    return Err(Error::MissingColumn {
                        context: context.to_owned(),
                        column: (*name).to_owned(),
                    })
                }
            }
        }
        Ok(CsvRows {
            context: context.to_owned(),
            reader,
            columns,
        })
    }

    /// Calls `f` with each row's fields in header order and its line number.
    pub(crate) fn for_each(mut self, mut f: impl FnMut(&[&str], u64) -> Result<()>) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            let more = self.reader.read_record(&mut record).map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::parse(&self.context, line, e.to_string())
            })?;
            if !more {
                return Ok(());
            }
            let line = record.position().map_or(0, |p| p.line());
            let mut fields: Vec<&str> = Vec::with_capacity(self.columns.len());
            for &c in &self.columns {
                match record.get(c) {
                    Some(v) => fields.push(v),
                    None => return Err(Error::parse(&self.context, line, "too few fields")),
                }
            }
            f(&fields, line)?;
        }
    }
}

pub(crate) fn parse_field<T: FromStr>(context: &str, line: u64, name: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(context, line, format!("invalid {name} `{raw}`")))
}

pub(crate) fn parse_value(context: &str, line: u64, raw: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::parse(context, line, format!("non-numeric value `{raw}`"))),
    }
}

pub(crate) fn parse_key(context: &str, line: u64, res: &str, year: &str, sub: &str) -> Result<TimeKey> {
    let resolution: Resolution = parse_field(context, line, "resolution", res)?;
    let year: i32 = parse_field(context, line, "year", year)?;
    let sub: u32 = parse_field(context, line, "sub", sub)?;
    TimeKey::new(resolution, year, sub).map_err(|e| Error::parse(context, line, e.to_string()))
}

/// Formats an optional value; `Display` for `f64` is the shortest string that
/// parses back to the same bits.
pub fn format_value(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub(crate) fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn flush<W: Write>(w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Panels

/// Reads a panel CSV from any reader. The first row fixes the panel's level
/// and resolution; later rows that disagree, out-of-range keys and duplicate
/// keys are errors naming the line.
pub fn read_panel<R: Read>(reader: R, variable_id: &str, context: &str) -> Result<VariablePanel> {
    let mut panel = VariablePanel::new(variable_id, "", Resolution::Yearly);
    let mut level: Option<Level> = None;
    let mut resolution: Option<Resolution> = None;
    CsvRows::new(reader, context, &PANEL_HEADER)?.for_each(|f, line| {
        let code = f[0].trim();
        if code.is_empty() {
            return Err(Error::parse(context, line, "empty region_code"));
        }
        let row_level: Level = parse_field(context, line, "level", f[1])?;
        let key = parse_key(context, line, f[2], f[3], f[4])?;
        let value = parse_value(context, line, f[5])?;
        match level {
            None => level = Some(row_level),
            Some(l) if l != row_level => {
                return Err(Error::parse(
                    context,
                    line,
                    format!("mixed geographic level: {row_level} after {l}"),
                ))
            }
            _ => {}
        }
        match resolution {
            None => resolution = Some(key.resolution),
            Some(r) if r != key.resolution => {
                return Err(Error::parse(
                    context,
                    line,
                    format!("mixed resolution: {} after {r}", key.resolution),
                ))
            }
            _ => {}
        }
        if panel.insert(RegionId::new(code, row_level), key, value).is_some() {
            return Err(Error::parse(context, line, format!("duplicate entry for {code} {key}")));
        }
        Ok(())
    })?;
    if let Some(r) = resolution {
        panel.resolution = r;
    }
    Ok(panel)
}

/// Reads a panel CSV; the variable id is the file stem.
pub fn read_panel_csv(path: &Path) -> Result<VariablePanel> {
    let variable_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_panel(open(path)?, &variable_id, &path.display().to_string())
}

pub fn write_panel<W: Write>(panel: &VariablePanel, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(PANEL_HEADER)?;
    for (region, key, value) in panel.iter() {
        out.write_record([
            region.code.as_str(),
            region.level.as_str(),
            key.resolution.as_str(),
            &key.year.to_string(),
            &key.sub.to_string(),
            &format_value(value),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<panel>", e))?;
    Ok(())
}

pub fn write_panel_csv(panel: &VariablePanel, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_panel(panel, &mut buf)?;
    let mut f = create(path)?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))?;
    f.flush().map_err(|e| Error::io(path, e))
}

pub fn panel_to_string(panel: &VariablePanel) -> String {
    let mut buf = Vec::new();
    write_panel(panel, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("panel csv is utf-8")
}

// ---------------------------------------------------------------------------
// Grids and cell weights

/// Cell-to-region overlap weights; each region's weights sum to 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellWeightTable {
    // region -> cell -> weight; sorted so that aggregation order is fixed.
    regions: BTreeMap<RegionId, BTreeMap<String, f64>>,
}

impl CellWeightTable {
    /// Builds a table from rows, checking weight ranges, duplicates and sums.
    pub fn from_rows(rows: impl IntoIterator<Item = (String, RegionId, f64)>) -> Result<Self> {
        let mut regions: BTreeMap<RegionId, BTreeMap<String, f64>> = BTreeMap::new();
        for (cell, region, weight) in rows {
            if !(weight > 0.0 && weight <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "cell weight {weight} for {cell} -> {region} outside (0, 1]"
                )));
            }
            if regions
                .entry(region.clone())
                .or_default()
                .insert(cell.clone(), weight)
                .is_some()
            {
                return Err(Error::InvalidInput(format!("duplicate cell weight {cell} -> {region}")));
            }
        }
        for (region, cells) in &regions {
            let sum: f64 = cells.values().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "cell weights for {region} sum to {sum}, expected 1"
                )));
            }
        }
        Ok(CellWeightTable { regions })
    }

    pub fn regions(&self) -> impl Iterator<Item = (&RegionId, &BTreeMap<String, f64>)> {
        self.regions.iter()
    }

    pub fn cells(&self) -> BTreeSet<&str> {
        self.regions
            .values()
            .flat_map(|c| c.keys().map(String::as_str))
            .collect()
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let context = path.display().to_string();
        let mut rows = Vec::new();
        CsvRows::new(open(path)?, &context, &CELL_WEIGHT_HEADER)?.for_each(|f, line| {
            let level: Level = parse_field(&context, line, "level", f[2])?;
            let weight: f64 = parse_field(&context, line, "weight", f[3])?;
            rows.push((f[0].trim().to_owned(), RegionId::new(f[1].trim(), level), weight));
            Ok(())
        })?;
        Self::from_rows(rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = csv_writer(create(path)?);
        out.write_record(CELL_WEIGHT_HEADER)?;
        for (region, cells) in &self.regions {
            for (cell, w) in cells {
                out.write_record([
                    cell.as_str(),
                    region.code.as_str(),
                    region.level.as_str(),
                    &w.to_string(),
                ])?;
            }
        }
        flush(out, path)
    }
}

/// Values on keyed grid cells over time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSeries {
    pub resolution: Resolution,
    values: BTreeMap<(String, TimeKey), Option<f64>>,
}

impl GridSeries {
    pub fn new(resolution: Resolution) -> Self {
        GridSeries {
            resolution,
            values: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, cell: impl Into<String>, time: TimeKey, value: Option<f64>) -> Result<()> {
        if time.resolution != self.resolution {
            return Err(Error::InvalidInput(format!(
                "grid time key {time} is not {}",
                self.resolution
            )));
        }
        self.values.insert((cell.into(), time), value);
        Ok(())
    }

    pub fn get(&self, cell: &str, time: &TimeKey) -> Option<Option<f64>> {
        self.values.get(&(cell.to_owned(), *time)).copied()
    }

    pub fn cells(&self) -> BTreeSet<&str> {
        self.values.keys().map(|(c, _)| c.as_str()).collect()
    }

    pub fn time_keys(&self) -> BTreeSet<TimeKey> {
        self.values.keys().map(|(_, t)| *t).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TimeKey, Option<f64>)> {
        self.values.iter().map(|((c, t), v)| (c.as_str(), t, *v))
    }

    /// Applies `f` to every present value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> GridSeries {
        GridSeries {
            resolution: self.resolution,
            values: self.values.iter().map(|(k, v)| (k.clone(), v.map(&f))).collect(),
        }
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let context = path.display().to_string();
        let mut grid: Option<GridSeries> = None;
        CsvRows::new(open(path)?, &context, &GRID_HEADER)?.for_each(|f, line| {
            let key = parse_key(&context, line, f[1], f[2], f[3])?;
            let value = parse_value(&context, line, f[4])?;
            let g = grid.get_or_insert_with(|| GridSeries::new(key.resolution));
            g.insert(f[0].trim(), key, value)
                .map_err(|e| Error::parse(&context, line, e.to_string()))
        })?;
        Ok(grid.unwrap_or_else(|| GridSeries::new(Resolution::Daily)))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = csv_writer(create(path)?);
        out.write_record(GRID_HEADER)?;
        for ((cell, key), value) in &self.values {
            out.write_record([
                cell.as_str(),
                key.resolution.as_str(),
                &key.year.to_string(),
                &key.sub.to_string(),
                &format_value(*value),
            ])?;
        }
        flush(out, path)
    }
}

/// Weighted mean of each region's cells at every grid time.
///
/// Weights are renormalised over the cells that are present at that time; a
/// region is missing where all of its cells are. Regions none of whose cells
/// occur in the grid get a diagnostic and missing entries.
pub fn zonal_aggregate(
    grid: &GridSeries,
    weights: &CellWeightTable,
    variable_id: &str,
) -> (VariablePanel, Vec<Diagnostic>) {
    let mut panel = VariablePanel::new(variable_id, "", grid.resolution);
    let mut diagnostics = Vec::new();
    let grid_cells = grid.cells();
    let times = grid.time_keys();

    for (region, cells) in weights.regions() {
        if !cells.keys().any(|c| grid_cells.contains(c.as_str())) {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::RegionWithoutCells,
                format!("{region}: none of its cells occur in the `{variable_id}` grid"),
            ));
        }
        for t in &times {
            let present: Vec<(f64, f64)> = cells
                .iter()
                .filter_map(|(c, w)| grid.get(c, t).flatten().map(|v| (*w, v)))
                .collect();
            let value = present.first().map(|&(_, reference)| {
                // Deviations from a reference value keep a uniform field exact.
                let mut wsum = 0.0;
                let mut dev = 0.0;
                for &(w, v) in &present {
                    wsum += w;
                    dev += w * (v - reference);
                }
                reference + dev / wsum
            });
            panel.insert(region.clone(), *t, value);
        }
    }
    (panel, diagnostics)
}

// ---------------------------------------------------------------------------
// Mortality

/// Causes of death carried by mortality tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MortalityCause {
    CoronaryHeartDisease,
    CerebrovascularDisease,
    HeartFailure,
    CardiacArrhythmia,
    ChronicObstructivePulmonaryDisease,
    AllCause,
}

impl MortalityCause {
    pub const ALL: [MortalityCause; 6] = [
        MortalityCause::CoronaryHeartDisease,
        MortalityCause::CerebrovascularDisease,
        MortalityCause::HeartFailure,
        MortalityCause::CardiacArrhythmia,
        MortalityCause::ChronicObstructivePulmonaryDisease,
        MortalityCause::AllCause,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MortalityCause::CoronaryHeartDisease => "coronary_heart_disease",
            MortalityCause::CerebrovascularDisease => "cerebrovascular_disease",
            MortalityCause::HeartFailure => "heart_failure",
            MortalityCause::CardiacArrhythmia => "cardiac_arrhythmia",
            MortalityCause::ChronicObstructivePulmonaryDisease => "copd",
            MortalityCause::AllCause => "all_cause",
        }
    }

    /// Causes whose rates are summed into a mortality category.
    pub fn for_category(category: MortalityCategory) -> &'static [MortalityCause] {
        match category {
            MortalityCategory::Heat => &[
                MortalityCause::CoronaryHeartDisease,
                MortalityCause::CerebrovascularDisease,
                MortalityCause::HeartFailure,
                MortalityCause::CardiacArrhythmia,
            ],
            MortalityCategory::AirQuality => &[MortalityCause::ChronicObstructivePulmonaryDisease],
            MortalityCategory::AllCause => &[MortalityCause::AllCause],
        }
    }
}

impl fmt::Display for MortalityCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MortalityCause {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MortalityCause::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown mortality cause `{s}`")))
    }
}

/// Age-standardised death rates per 100,000 by region and cause over
/// multi-year periods.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MortalityTable {
    rates: BTreeMap<(RegionId, MortalityCause, i32, i32), f64>,
}

impl MortalityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        region: RegionId,
        cause: MortalityCause,
        period_start: i32,
        period_end: i32,
        rate: f64,
    ) -> Result<()> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidInput(format!("negative or non-finite rate {rate} for {region}")));
        }
        if period_start > period_end {
            return Err(Error::InvalidInput(format!("empty period {period_start}-{period_end}")));
        }
        self.rates.insert((region, cause, period_start, period_end), rate);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn periods(&self) -> BTreeSet<(i32, i32)> {
        self.rates.keys().map(|k| (k.2, k.3)).collect()
    }

    pub fn regions(&self) -> BTreeSet<RegionId> {
        self.rates.keys().map(|k| k.0.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RegionId, MortalityCause, (i32, i32), f64)> {
        self.rates.iter().map(|(k, v)| (&k.0, k.1, (k.2, k.3), *v))
    }

    /// Reads a mortality CSV whose region codes are all at `level`.
    pub fn read_csv(path: &Path, level: Level) -> Result<Self> {
        let context = path.display().to_string();
        let mut table = MortalityTable::new();
        CsvRows::new(open(path)?, &context, &MORTALITY_HEADER)?.for_each(|f, line| {
            let cause: MortalityCause = parse_field(&context, line, "cause", f[1])?;
            let start: i32 = parse_field(&context, line, "period_start", f[2])?;
            let end: i32 = parse_field(&context, line, "period_end", f[3])?;
            let rate: f64 = parse_field(&context, line, "rate", f[4])?;
            table
                .insert(RegionId::new(f[0].trim(), level), cause, start, end, rate)
                .map_err(|e| Error::parse(&context, line, e.to_string()))
        })?;
        Ok(table)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = csv_writer(create(path)?);
        out.write_record(MORTALITY_HEADER)?;
        for ((region, cause, start, end), rate) in &self.rates {
            out.write_record([
                region.code.as_str(),
                cause.as_str(),
                &start.to_string(),
                &end.to_string(),
                &rate.to_string(),
            ])?;
        }
        flush(out, path)
    }
}

/// Rates of a mortality category per region, keyed by a yearly time key at
/// the end year of each period. A region lacking any required cause is
/// missing.
pub fn mortality_category_rates(table: &MortalityTable, category: MortalityCategory) -> VariablePanel {
    let causes = MortalityCause::for_category(category);
    let mut panel = VariablePanel::new(
        format!("mortality_{category}"),
        "deaths per 100,000 (age-standardised)",
        Resolution::Yearly,
    );
    for region in table.regions() {
        for (start, end) in table.periods() {
            let rates: Vec<Option<f64>> = causes
                .iter()
                .map(|c| table.rates.get(&(region.clone(), *c, start, end)).copied())
                .collect();
            let has_period = MortalityCause::ALL
                .iter()
                .any(|c| table.rates.contains_key(&(region.clone(), *c, start, end)));
            if !has_period {
                continue;
            }
            let value = rates.iter().copied().sum::<Option<f64>>();
            panel.insert(region.clone(), TimeKey::yearly(end), value);
        }
    }
    panel
}

// ---------------------------------------------------------------------------
// Crosswalk

/// Child region to parent region mapping (e.g. SA2 to SA3).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Crosswalk {
    parents: BTreeMap<RegionId, RegionId>,
}

impl Crosswalk {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, child: RegionId, parent: RegionId) {
        self.parents.insert(child, parent);
    }

    pub fn parent(&self, child: &RegionId) -> Option<&RegionId> {
        self.parents.get(child)
    }

    pub fn children(&self) -> impl Iterator<Item = &RegionId> {
        self.parents.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RegionId, &RegionId)> {
        self.parents.iter()
    }

    /// Maps every region of a panel to itself.
    pub fn identity(regions: impl IntoIterator<Item = RegionId>) -> Self {
        Crosswalk {
            parents: regions.into_iter().map(|r| (r.clone(), r)).collect(),
        }
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let context = path.display().to_string();
        let mut cw = Crosswalk::new();
        CsvRows::new(open(path)?, &context, &CROSSWALK_HEADER)?.for_each(|f, line| {
            let level: Level = parse_field(&context, line, "level", f[1])?;
            let parent_level: Level = parse_field(&context, line, "parent_level", f[3])?;
            let child = RegionId::new(f[0].trim(), level);
            if cw.parents.contains_key(&child) {
                return Err(Error::parse(&context, line, format!("duplicate mapping for {child}")));
            }
            cw.insert(child, RegionId::new(f[2].trim(), parent_level));
            Ok(())
        })?;
        Ok(cw)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = csv_writer(create(path)?);
        out.write_record(CROSSWALK_HEADER)?;
        for (child, parent) in &self.parents {
            out.write_record([
                child.code.as_str(),
                child.level.as_str(),
                parent.code.as_str(),
                parent.level.as_str(),
            ])?;
        }
        flush(out, path)
    }
}

/// Carries a coarse-level panel down to `targets` at `level` by copying each
/// target's parent value. Targets without a mapping, or whose parent has no
/// entry, are missing at every time key of the panel.
pub fn crosswalk_to_level<'a>(
    panel: &VariablePanel,
    mapping: &Crosswalk,
    level: Level,
    targets: impl IntoIterator<Item = &'a RegionId>,
) -> Result<VariablePanel> {
    let mut out = VariablePanel::new(panel.variable_id.clone(), panel.unit.clone(), panel.resolution);
    let times = panel.time_keys();
    for target in targets {
        if target.level != level {
            return Err(Error::InvalidInput(format!("target {target} is not at level {level}")));
        }
        let parent = mapping.parent(target);
        for t in &times {
            let value = parent.and_then(|p| panel.get(p, t));
            out.insert(target.clone(), *t, value);
        }
    }
    Ok(out)
}
