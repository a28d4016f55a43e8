//! Exposure indicators derived from daily temperatures: excess heat and cold
//! factors, within-region historical temperature percentiles, and temporal
//! aggregation of daily panels to weekly, monthly or yearly panels.
//!
//! The excess heat factor for day `d` is
//!
//! ```text
//! T3   = mean daily temperature over d, d-1, d-2
//! sig  = T3 - T95            (T95: 95th percentile of the region's history)
//! accl = T3 - mean daily temperature over the 30 days before d-2
//! EHF  = max(0, sig) * max(1, accl)
//! ```
//!
//! and the excess cold factor mirrors it with the 5th percentile:
//! `ECF = min(0, T3 - T05) * min(-1, accl)`. Both are in °C² and never
//! negative. Window lengths and percentiles live in [`IndicatorParams`].

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Diagnostic, DiagnosticKind, Level, RegionId, Resolution, TimeKey, VariablePanel, YearSpan};
use crate::stats;

/// Which minimum temperature is paired with a day's maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TminPairing {
    #[default]
    SameDay,
    /// The following morning's minimum, as in the Bureau of Meteorology
    /// heatwave service.
    NextDay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndicatorParams {
    pub window_days: usize,
    pub acclimatisation_days: usize,
    pub heat_quantile: f64,
    pub cold_quantile: f64,
    pub tmin_pairing: TminPairing,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        IndicatorParams {
            window_days: 3,
            acclimatisation_days: 30,
            heat_quantile: 0.95,
            cold_quantile: 0.05,
            tmin_pairing: TminPairing::SameDay,
        }
    }
}

impl IndicatorParams {
    /// Days of history needed, including the day itself.
    pub fn history_days(&self) -> usize {
        self.window_days + self.acclimatisation_days
    }
}

/// Daily maximum and minimum temperatures of one region from `start` on.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTemps {
    pub start: NaiveDate,
    pub tmax: Vec<Option<f64>>,
    pub tmin: Vec<Option<f64>>,
}

impl RegionTemps {
    pub fn len(&self) -> usize {
        self.tmax.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tmax.is_empty()
    }

    pub fn date(&self, index: usize) -> NaiveDate {
        self.start + Duration::days(index as i64)
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let i = (date - self.start).num_days();
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }

    fn daily_mean(&self, index: usize, pairing: TminPairing) -> Option<f64> {
        let tmin_index = match pairing {
            TminPairing::SameDay => index,
            TminPairing::NextDay => index + 1,
        };
        let tmax = (*self.tmax.get(index)?)?;
        let tmin = (*self.tmin.get(tmin_index)?)?;
        Some((tmax + tmin) / 2.0)
    }
}

/// Contiguous daily temperature records per region.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DailyTempSeries {
    regions: BTreeMap<RegionId, RegionTemps>,
}

impl DailyTempSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, region: RegionId, temps: RegionTemps) -> Result<()> {
        if temps.tmax.len() != temps.tmin.len() {
            return Err(Error::InvalidInput(format!("{region}: tmax and tmin lengths differ")));
        }
        for (i, (hi, lo)) in temps.tmax.iter().zip(&temps.tmin).enumerate() {
            if let (Some(hi), Some(lo)) = (hi, lo) {
                if hi < lo {
                    return Err(Error::InvalidInput(format!(
                        "{region} {}: tmax {hi} below tmin {lo}",
                        temps.date(i)
                    )));
                }
            }
        }
        self.regions.insert(region, temps);
        Ok(())
    }

    pub fn get(&self, region: &RegionId) -> Option<&RegionTemps> {
        self.regions.get(region)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RegionId, &RegionTemps)> {
        self.regions.iter()
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Adds `delta` to every temperature.
    pub fn shifted(&self, delta: f64) -> DailyTempSeries {
        let shift = |v: &Vec<Option<f64>>| v.iter().map(|x| x.map(|t| t + delta)).collect();
        DailyTempSeries {
            regions: self
                .regions
                .iter()
                .map(|(r, t)| {
                    (
                        r.clone(),
                        RegionTemps {
                            start: t.start,
                            tmax: shift(&t.tmax),
                            tmin: shift(&t.tmin),
                        },
                    )
                })
                .collect(),
        }
    }

    /// Reads `region_code,date,tmax,tmin` rows. Dates absent between a
    /// region's first and last row become missing days.
    pub fn read_csv(path: &Path, level: Level) -> Result<Self> {
        let context = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().from_reader(file);
        let headers = reader.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::MissingColumn {
                context: context.clone(),
                column: name.to_owned(),
            })
        };
        let (ci, di, hi, li) = (col("region_code")?, col("date")?, col("tmax")?, col("tmin")?);

        let mut rows: BTreeMap<RegionId, BTreeMap<NaiveDate, (Option<f64>, Option<f64>)>> = BTreeMap::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |i: usize| record.get(i).unwrap_or("").trim();
            let date = NaiveDate::parse_from_str(field(di), "%Y-%m-%d")
                .map_err(|_| Error::parse(&context, line, format!("invalid date `{}`", field(di))))?;
            let temp = |i: usize| -> Result<Option<f64>> {
                let raw = field(i);
                if raw.is_empty() {
                    return Ok(None);
                }
                match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Some(v)),
                    _ => Err(Error::parse(&context, line, format!("non-numeric temperature `{raw}`"))),
                }
            };
            let (hi_v, lo_v) = (temp(hi)?, temp(li)?);
            if let (Some(h), Some(l)) = (hi_v, lo_v) {
                if h < l {
                    return Err(Error::parse(&context, line, format!("tmax {h} below tmin {l}")));
                }
            }
            let region = RegionId::new(field(ci), level);
            if rows.entry(region).or_default().insert(date, (hi_v, lo_v)).is_some() {
                return Err(Error::parse(&context, line, format!("duplicate date {date}")));
            }
        }

        let mut series = DailyTempSeries::new();
        for (region, days) in rows {
            let (&start, _) = days.first_key_value().expect("non-empty");
            let (&end, _) = days.last_key_value().expect("non-empty");
            let n = (end - start).num_days() as usize + 1;
            let mut temps = RegionTemps {
                start,
                tmax: vec![None; n],
                tmin: vec![None; n],
            };
            for (date, (h, l)) in days {
                let i = (date - start).num_days() as usize;
                temps.tmax[i] = h;
                temps.tmin[i] = l;
            }
            series.insert(region, temps)?;
        }
        Ok(series)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(std::io::BufWriter::new(file));
        out.write_record(["region_code", "date", "tmax", "tmin"])?;
        for (region, t) in &self.regions {
            for i in 0..t.len() {
                out.write_record([
                    region.code.as_str(),
                    &t.date(i).format("%Y-%m-%d").to_string(),
                    &crate::ingest::format_value(t.tmax[i]),
                    &crate::ingest::format_value(t.tmin[i]),
                ])?;
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Daily mean temperatures of one region.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyMeans {
    pub start: NaiveDate,
    pub values: Vec<Option<f64>>,
}

/// (tmax + tmin) / 2 per region and day; missing unless both are present.
pub fn daily_mean_temp(series: &DailyTempSeries, pairing: TminPairing) -> BTreeMap<RegionId, DailyMeans> {
    series
        .iter()
        .map(|(region, t)| {
            let values = (0..t.len()).map(|i| t.daily_mean(i, pairing)).collect();
            (region.clone(), DailyMeans { start: t.start, values })
        })
        .collect()
}

/// Sorted historical daily means of one region and its cached thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionClimatology {
    sample: Vec<f64>,
    pub t_hot: f64,
    pub t_cold: f64,
}

impl RegionClimatology {
    /// `None` for an empty sample.
    pub fn from_sample(mut sample: Vec<f64>, params: &IndicatorParams) -> Option<Self> {
        if sample.is_empty() {
            return None;
        }
        sample.sort_by(f64::total_cmp);
        Some(RegionClimatology {
            t_hot: stats::empirical_quantile(&sample, params.heat_quantile),
            t_cold: stats::empirical_quantile(&sample, params.cold_quantile),
            sample,
        })
    }

    pub fn sample(&self) -> &[f64] {
        &self.sample
    }
}

/// Per-region historical temperature distributions, built once and shared.
#[derive(Debug, Clone, PartialEq)]
pub struct ClimatologyStore {
    pub params: IndicatorParams,
    pub baseline: Option<YearSpan>,
    regions: BTreeMap<RegionId, RegionClimatology>,
}

impl ClimatologyStore {
    pub fn new(params: IndicatorParams, baseline: Option<YearSpan>) -> Self {
        ClimatologyStore {
            params,
            baseline,
            regions: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, region: RegionId, clim: RegionClimatology) {
        self.regions.insert(region, clim);
    }

    pub fn get(&self, region: &RegionId) -> Option<&RegionClimatology> {
        self.regions.get(region)
    }

    pub fn regions(&self) -> impl Iterator<Item = &RegionId> {
        self.regions.keys()
    }
}

/// Collects each region's daily means inside `baseline` (all days when
/// `None`). Regions without a single usable day are left out with a
/// diagnostic.
pub fn build_climatology(
    series: &DailyTempSeries,
    baseline: Option<YearSpan>,
    params: IndicatorParams,
) -> (ClimatologyStore, Vec<Diagnostic>) {
    let mut store = ClimatologyStore::new(params, baseline);
    let mut diagnostics = Vec::new();
    for (region, t) in series.iter() {
        let sample: Vec<f64> = (0..t.len())
            .filter(|&i| baseline.is_none_or(|b| b.contains(t.date(i).year())))
            .filter_map(|i| t.daily_mean(i, params.tmin_pairing))
            .collect();
        match RegionClimatology::from_sample(sample, &params) {
            Some(c) => store.insert(region.clone(), c),
            None => diagnostics.push(Diagnostic::new(
                DiagnosticKind::EmptyClimatology,
                format!("{region}: no daily temperatures inside the baseline window"),
            )),
        }
    }
    (store, diagnostics)
}

/// Three-day mean and acclimatisation anomaly at `index`, or `None` when any
/// day of the history window is missing or out of range.
fn window_terms(mean_at: impl Fn(usize) -> Option<f64>, index: usize, params: &IndicatorParams) -> Option<(f64, f64)> {
    let w = params.window_days;
    let a = params.acclimatisation_days;
    if index + 1 < w + a {
        return None;
    }
    let mut recent = Vec::with_capacity(w);
    for i in index + 1 - w..=index {
        recent.push(Some(mean_at(i)?));
    }
    let mut prior = Vec::with_capacity(a);
    for i in index + 1 - w - a..index + 1 - w {
        prior.push(Some(mean_at(i)?));
    }
    let t3 = stats::mean(recent)?;
    let accl = stats::mean(prior)?;
    Some((t3, t3 - accl))
}

fn heat_factor(t3: f64, accl: f64, t_hot: f64) -> f64 {
    (t3 - t_hot).max(0.0) * accl.max(1.0) + 0.0
}

fn cold_factor(t3: f64, accl: f64, t_cold: f64) -> f64 {
    // Product of two non-positive factors; + 0.0 clears a negative zero.
    (t3 - t_cold).min(0.0) * accl.min(-1.0) + 0.0
}

/// Excess heat factor of `region` on `date`, in °C².
pub fn ehf(series: &DailyTempSeries, clim: &ClimatologyStore, date: NaiveDate, region: &RegionId) -> Option<f64> {
    let t = series.get(region)?;
    let c = clim.get(region)?;
    let index = t.index_of(date)?;
    let (t3, accl) = window_terms(|i| t.daily_mean(i, clim.params.tmin_pairing), index, &clim.params)?;
    Some(heat_factor(t3, accl, c.t_hot))
}

/// Excess cold factor of `region` on `date`, in °C².
pub fn ecf(series: &DailyTempSeries, clim: &ClimatologyStore, date: NaiveDate, region: &RegionId) -> Option<f64> {
    let t = series.get(region)?;
    let c = clim.get(region)?;
    let index = t.index_of(date)?;
    let (t3, accl) = window_terms(|i| t.daily_mean(i, clim.params.tmin_pairing), index, &clim.params)?;
    Some(cold_factor(t3, accl, c.t_cold))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercentileMode {
    Heat,
    Cold,
}

/// Fraction of the region's own history at or below the day's mean
/// temperature; `Cold` returns the complement so that higher is always more
/// exposed.
pub fn historical_percentile(
    series: &DailyTempSeries,
    clim: &ClimatologyStore,
    date: NaiveDate,
    region: &RegionId,
    mode: PercentileMode,
) -> Option<f64> {
    let t = series.get(region)?;
    let c = clim.get(region)?;
    let m = t.daily_mean(t.index_of(date)?, clim.params.tmin_pairing)?;
    Some(percentile_in(c, m, mode))
}

fn percentile_in(c: &RegionClimatology, value: f64, mode: PercentileMode) -> f64 {
    let p = stats::empirical_cdf(&c.sample, value);
    match mode {
        PercentileMode::Heat => p,
        PercentileMode::Cold => 1.0 - p,
    }
}

pub const EHF: &str = "ehf";
pub const ECF: &str = "ecf";
pub const HIST_PCT_HEAT: &str = "hist_pct_heat";
pub const HIST_PCT_COLD: &str = "hist_pct_cold";

/// The four temperature indicators as daily panels.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyIndicators {
    pub ehf: VariablePanel,
    pub ecf: VariablePanel,
    pub hist_pct_heat: VariablePanel,
    pub hist_pct_cold: VariablePanel,
}

impl DailyIndicators {
    /// Computes every indicator for every region and day of the series.
    /// Regions missing from the climatology are skipped.
    pub fn compute(series: &DailyTempSeries, clim: &ClimatologyStore) -> DailyIndicators {
        let mut out = DailyIndicators {
            ehf: VariablePanel::new(EHF, "degC^2", Resolution::Daily),
            ecf: VariablePanel::new(ECF, "degC^2", Resolution::Daily),
            hist_pct_heat: VariablePanel::new(HIST_PCT_HEAT, "fraction", Resolution::Daily),
            hist_pct_cold: VariablePanel::new(HIST_PCT_COLD, "fraction", Resolution::Daily),
        };
        let means = daily_mean_temp(series, clim.params.tmin_pairing);
        for (region, m) in &means {
            let Some(c) = clim.get(region) else { continue };
            for (i, value) in m.values.iter().enumerate() {
                let key = TimeKey::from_date(m.start + Duration::days(i as i64), Resolution::Daily);
                let terms = window_terms(|j| m.values[j], i, &clim.params);
                out.ehf.insert(region.clone(), key, terms.map(|(t3, a)| heat_factor(t3, a, c.t_hot)));
                out.ecf.insert(region.clone(), key, terms.map(|(t3, a)| cold_factor(t3, a, c.t_cold)));
                out.hist_pct_heat
                    .insert(region.clone(), key, value.map(|v| percentile_in(c, v, PercentileMode::Heat)));
                out.hist_pct_cold
                    .insert(region.clone(), key, value.map(|v| percentile_in(c, v, PercentileMode::Cold)));
            }
        }
        out
    }

    pub fn panels(&self) -> [&VariablePanel; 4] {
        [&self.ehf, &self.ecf, &self.hist_pct_heat, &self.hist_pct_cold]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationRule {
    Mean,
    Max,
}

/// Default rule per indicator: peaks of the excess factors survive
/// aggregation; everything else is averaged.
pub fn default_rule(variable_id: &str) -> AggregationRule {
    match variable_id {
        EHF | ECF => AggregationRule::Max,
        _ => AggregationRule::Mean,
    }
}

/// Aggregates a daily panel to `target`, applying `rule` over the present
/// days of each period. A period with no present day is missing.
pub fn temporal_aggregate(daily: &VariablePanel, target: Resolution, rule: AggregationRule) -> Result<VariablePanel> {
    if daily.resolution != Resolution::Daily {
        return Err(Error::InvalidInput(format!(
            "temporal_aggregate needs a daily panel, `{}` is {}",
            daily.variable_id, daily.resolution
        )));
    }
    if target == Resolution::Daily {
        return Err(Error::InvalidInput("aggregation target must be coarser than daily".into()));
    }
    let mut groups: BTreeMap<(RegionId, TimeKey), Vec<Option<f64>>> = BTreeMap::new();
    for (region, key, value) in daily.iter() {
        let date = key
            .date()
            .ok_or_else(|| Error::InvalidInput(format!("invalid daily key {key}")))?;
        groups
            .entry((region.clone(), TimeKey::from_date(date, target)))
            .or_default()
            .push(value);
    }
    let mut out = VariablePanel::new(daily.variable_id.clone(), daily.unit.clone(), target);
    for ((region, key), values) in groups {
        let value = match rule {
            AggregationRule::Mean => stats::mean(values),
            AggregationRule::Max => values.into_iter().flatten().reduce(f64::max),
        };
        out.insert(region, key, value);
    }
    Ok(out)
}

/// Keeps only entries whose (ISO) year lies inside `span`.
pub fn restrict_years(panel: &VariablePanel, span: YearSpan) -> VariablePanel {
    let mut out = VariablePanel::new(panel.variable_id.clone(), panel.unit.clone(), panel.resolution);
    for (r, t, v) in panel.iter() {
        if span.contains(t.year) {
            out.insert(r.clone(), *t, v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region() -> RegionId {
        RegionId::new("r", Level::Sa2)
    }

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn series_from_means(means: &[f64]) -> DailyTempSeries {
        let mut s = DailyTempSeries::new();
        s.insert(
            region(),
            RegionTemps {
                start: d(2018, 1, 1),
                tmax: means.iter().map(|&m| Some(m)).collect(),
                tmin: means.iter().map(|&m| Some(m)).collect(),
            },
        )
        .unwrap();
        s
    }

    fn store_with_sample(sample: Vec<f64>) -> ClimatologyStore {
        let params = IndicatorParams::default();
        let mut c = ClimatologyStore::new(params, None);
        c.insert(region(), RegionClimatology::from_sample(sample, &params).unwrap());
        c
    }

    #[test]
    fn daily_mean_examples() {
        let mut s = DailyTempSeries::new();
        s.insert(
            region(),
            RegionTemps {
                start: d(2018, 1, 1),
                tmax: vec![Some(30.0), Some(30.0), Some(15.0)],
                tmin: vec![Some(20.0), None, Some(15.0)],
            },
        )
        .unwrap();
        let m = &daily_mean_temp(&s, TminPairing::SameDay)[&region()];
        assert_eq!(m.values, vec![Some(25.0), None, Some(15.0)]);
        let next = &daily_mean_temp(&s, TminPairing::NextDay)[&region()];
        assert_eq!(next.values, vec![None, Some(22.5), None]);
    }

    #[test]
    fn rejects_tmax_below_tmin() {
        let mut s = DailyTempSeries::new();
        let bad = RegionTemps {
            start: d(2018, 1, 1),
            tmax: vec![Some(10.0)],
            tmin: vec![Some(11.0)],
        };
        assert!(s.insert(region(), bad).is_err());
    }

    #[test]
    fn constant_climatology() {
        let s = series_from_means(&[20.0; 400]);
        let (c, diag) = build_climatology(&s, None, IndicatorParams::default());
        assert!(diag.is_empty());
        let rc = c.get(&region()).unwrap();
        assert_eq!((rc.t_hot, rc.t_cold), (20.0, 20.0));
    }

    #[test]
    fn empty_baseline_window_drops_region() {
        let s = series_from_means(&[20.0; 40]);
        let (c, diag) = build_climatology(&s, Some(YearSpan::new(2000, 2001).unwrap()), IndicatorParams::default());
        assert!(c.get(&region()).is_none());
        assert_eq!(diag.len(), 1);
        assert_eq!(diag[0].kind, DiagnosticKind::EmptyClimatology);
    }

    #[test]
    fn ehf_spike_case() {
        // 30 days at 20, then three days at 32; T95 = 30.
        let mut means = vec![20.0; 30];
        means.extend([32.0; 3]);
        let s = series_from_means(&means);
        let c = store_with_sample(vec![30.0; 10]);
        let day = d(2018, 1, 1) + Duration::days(32);
        assert_eq!(ehf(&s, &c, day, &region()), Some(24.0));
        // One day earlier there are only 32 days of history.
        assert_eq!(ehf(&s, &c, day - Duration::days(1), &region()), None);
    }

    #[test]
    fn ecf_spike_case() {
        let mut means = vec![10.0; 30];
        means.extend([2.0; 3]);
        let s = series_from_means(&means);
        let c = store_with_sample(vec![5.0; 10]);
        let day = d(2018, 1, 1) + Duration::days(32);
        assert_eq!(ecf(&s, &c, day, &region()), Some(24.0));
    }

    #[test]
    fn warm_snap_has_no_cold_factor() {
        let mut means = vec![10.0; 30];
        means.extend([15.0; 3]);
        let s = series_from_means(&means);
        let c = store_with_sample(vec![5.0; 10]);
        let v = ecf(&s, &c, d(2018, 2, 2), &region()).unwrap();
        assert_eq!(v.to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn constant_series_has_zero_factors() {
        let s = series_from_means(&[20.0; 100]);
        let (c, _) = build_climatology(&s, None, IndicatorParams::default());
        let ind = DailyIndicators::compute(&s, &c);
        for p in [&ind.ehf, &ind.ecf] {
            let present: Vec<f64> = p.iter().filter_map(|(_, _, v)| v).collect();
            assert_eq!(present.len(), 100 - 32);
            assert!(present.iter().all(|v| v.to_bits() == 0.0f64.to_bits()));
        }
        // History too short for the first days.
        assert_eq!(ehf(&s, &c, d(2018, 1, 10), &region()), None);
    }

    #[test]
    fn bulk_matches_pointwise() {
        let means: Vec<f64> = (0..120).map(|i| 15.0 + ((i * 37) % 23) as f64 * 0.7).collect();
        let s = series_from_means(&means);
        let (c, _) = build_climatology(&s, None, IndicatorParams::default());
        let ind = DailyIndicators::compute(&s, &c);
        for i in 0..120 {
            let date = d(2018, 1, 1) + Duration::days(i);
            let key = TimeKey::from_date(date, Resolution::Daily);
            assert_eq!(ind.ehf.get(&region(), &key), ehf(&s, &c, date, &region()));
            assert_eq!(ind.ecf.get(&region(), &key), ecf(&s, &c, date, &region()));
            assert_eq!(
                ind.hist_pct_cold.get(&region(), &key),
                historical_percentile(&s, &c, date, &region(), PercentileMode::Cold)
            );
        }
    }

    #[test]
    fn historical_percentile_extremes() {
        let means: Vec<f64> = (0..50).map(f64::from).collect();
        let s = series_from_means(&means);
        let (c, _) = build_climatology(&s, None, IndicatorParams::default());
        let last = d(2018, 1, 1) + Duration::days(49);
        assert_eq!(historical_percentile(&s, &c, last, &region(), PercentileMode::Heat), Some(1.0));
        assert_eq!(historical_percentile(&s, &c, last, &region(), PercentileMode::Cold), Some(0.0));
    }

    fn daily_panel(values: &[(NaiveDate, Option<f64>)]) -> VariablePanel {
        let mut p = VariablePanel::new("x", "", Resolution::Daily);
        for (date, v) in values {
            p.insert(region(), TimeKey::from_date(*date, Resolution::Daily), *v);
        }
        p
    }

    #[test]
    fn aggregate_one_iso_week() {
        // 2018-01-01 is a Monday.
        let days: Vec<_> = (0..7).map(|i| (d(2018, 1, 1) + Duration::days(i), Some((i + 1) as f64))).collect();
        let p = daily_panel(&days);
        let mean = temporal_aggregate(&p, Resolution::Weekly, AggregationRule::Mean).unwrap();
        let max = temporal_aggregate(&p, Resolution::Weekly, AggregationRule::Max).unwrap();
        assert_eq!(mean.get(&region(), &TimeKey::weekly(2018, 1)), Some(4.0));
        assert_eq!(max.get(&region(), &TimeKey::weekly(2018, 1)), Some(7.0));
        assert_eq!(mean.len(), 1);
    }

    #[test]
    fn all_missing_month_is_missing() {
        let days: Vec<_> = (0..28).map(|i| (d(2018, 2, 1) + Duration::days(i), None)).collect();
        let p = daily_panel(&days);
        let m = temporal_aggregate(&p, Resolution::Monthly, AggregationRule::Mean).unwrap();
        assert_eq!(m.entry(&region(), &TimeKey::monthly(2018, 2)), Some(None));
    }

    #[test]
    fn aggregate_rejects_non_daily() {
        let p = VariablePanel::new("x", "", Resolution::Weekly);
        assert!(temporal_aggregate(&p, Resolution::Yearly, AggregationRule::Mean).is_err());
    }
}
