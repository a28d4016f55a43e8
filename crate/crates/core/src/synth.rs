//! Seeded synthetic inputs: daily temperatures, gridded pollutants with
//! cell weights, yearly demographic panels with census-style observation
//! gaps, SA3 mortality and an SA2 to SA3 crosswalk.
//!
//! Mortality is a noisy monotone function of a few chosen sensitivity
//! variables, so weighting has a signal to recover.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::{DailyTempSeries, RegionTemps};
use crate::ingest::{
    mortality_category_rates, write_panel_csv, CellWeightTable, Crosswalk, GridSeries, MortalityCause, MortalityTable,
};
use crate::model::{Level, MortalityCategory, Polarity, RegionId, Resolution, TimeKey, VariablePanel, YearSpan};
use crate::stats::kendall_tau;

pub const POLLUTANTS: [&str; 4] = ["no", "no2", "o3", "pm25"];

/// A block of extra heat added to one region's daily maxima and minima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatEvent {
    /// Position of the region in SA2 code order.
    pub region: usize,
    pub start: NaiveDate,
    pub days: u32,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_regions: usize,
    pub sa2_per_sa3: usize,
    /// Years the indices are built for.
    pub years: YearSpan,
    /// Years of temperature record before `years.start`.
    pub history_years: u32,
    pub heat_event: Option<HeatEvent>,
    /// Standard deviation of the noise added to the standardised mortality
    /// signal.
    pub mortality_noise: f64,
    pub signal_variables: Vec<String>,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_regions: 50,
            sa2_per_sa3: 2,
            years: YearSpan { start: 2016, end: 2018 },
            history_years: 2,
            heat_event: None,
            mortality_noise: 0.3,
            signal_variables: ["elderly", "circulatory_disease", "low_income"].map(String::from).to_vec(),
        }
    }
}

struct DemographicVar {
    id: &'static str,
    unit: &'static str,
    mean: f64,
    sd: f64,
    /// Years with an observation; every other year is written as missing.
    observed: &'static [i32],
    percent: bool,
}

const Y2014_2019: &[i32] = &[2014, 2015, 2016, 2017, 2018, 2019];
const CENSUS: &[i32] = &[2011, 2016];
const PHIDU_3: &[i32] = &[2011, 2014, 2017];
const PHIDU_2: &[i32] = &[2011, 2014];

const fn var(id: &'static str, unit: &'static str, mean: f64, sd: f64, observed: &'static [i32], percent: bool) -> DemographicVar {
    DemographicVar {
        id,
        unit,
        mean,
        sd,
        observed,
        percent,
    }
}

const DEMOGRAPHICS: &[DemographicVar] = &[
    var("population_density", "thousand persons/km2", 3.0, 1.5, Y2014_2019, false),
    var("median_income", "$1000/week", 0.9, 0.25, &[2014, 2015, 2016, 2017], false),
    var("low_income", "%", 20.0, 6.0, &[2016], true),
    var("no_high_school", "%", 40.0, 10.0, CENSUS, true),
    var("unemployment_rate", "%", 6.0, 2.0, CENSUS, true),
    var("elderly", "%", 16.0, 5.0, Y2014_2019, true),
    var("infants", "%", 6.0, 1.5, Y2014_2019, true),
    var("single_parents", "%", 10.0, 3.0, CENSUS, true),
    var("unpaid_childcare", "%", 28.0, 4.0, CENSUS, true),
    var("core_assistance", "%", 5.0, 1.5, CENSUS, true),
    var("disability", "%", 18.0, 4.0, &[2015, 2018], true),
    var("living_alone", "%", 24.0, 5.0, CENSUS, true),
    var("second_language", "%", 20.0, 12.0, CENSUS, true),
    var("indigenous", "%", 3.0, 3.0, CENSUS, true),
    var("mobile_homes", "%", 1.0, 0.8, Y2014_2019, true),
    var("crowded_dwellings", "%", 4.0, 2.0, &[2016], true),
    var("renters", "%", 30.0, 8.0, CENSUS, true),
    var("mortgage_payers", "%", 33.0, 7.0, CENSUS, true),
    var("respiratory_disease", "%", 28.0, 4.0, PHIDU_2, true),
    var("asthma", "%", 11.0, 2.0, PHIDU_3, true),
    var("copd", "%", 2.5, 0.7, PHIDU_3, true),
    var("circulatory_disease", "%", 18.0, 3.0, PHIDU_2, true),
    var("high_blood_pressure", "%", 22.0, 3.0, PHIDU_3, true),
    var("high_cholesterol", "%", 7.0, 1.5, PHIDU_2, true),
    var("cardiovascular_disease", "%", 5.0, 1.2, &[2014, 2017], true),
    var("overweight", "%", 36.0, 3.0, PHIDU_3, true),
    var("obese", "%", 30.0, 5.0, PHIDU_3, true),
    var("smoker", "%", 15.0, 4.0, PHIDU_3, true),
    var("high_alcohol", "%", 17.0, 4.0, PHIDU_3, true),
    var("hospitals", "per 10,000 persons", 0.3, 0.2, &[2021], false),
    var("greenspace", "%", 8.0, 5.0, &[2016], true),
    var("water_bodies", "%", 2.0, 2.0, &[2019], true),
    var("ndvi", "index", 0.45, 0.12, &[2011, 2012, 2013, 2014, 2015, 2016, 2017, 2018, 2019], false),
    var("vehicle_access", "%", 91.0, 5.0, CENSUS, true),
    var("internet_access", "%", 84.0, 6.0, &[2016], true),
];

/// Ids of every generated demographic and built-environment variable.
pub fn demographic_variables() -> impl Iterator<Item = &'static str> {
    DEMOGRAPHICS.iter().map(|d| d.id)
}

/// The polarity the shipped index specs give a variable.
pub fn default_polarity(variable_id: &str) -> Polarity {
    match variable_id {
        "median_income" | "hospitals" | "greenspace" | "water_bodies" | "ndvi" | "vehicle_access"
        | "internet_access" => Polarity::RiskDecreasing,
        _ => Polarity::RiskIncreasing,
    }
}

/// How well the generated mortality tracks its generating variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthReport {
    /// Kendall tau between SA3 all-cause mortality and the noise-free signal.
    pub signal_tau: f64,
    /// Kendall tau between SA3 all-cause mortality and each generating
    /// variable's SA3 mean latent score, polarity-adjusted.
    pub variable_tau: BTreeMap<String, f64>,
}

/// Minimum `signal_tau` accepted by [`generate`].
pub const MIN_SIGNAL_TAU: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthFixture {
    pub params: SynthParams,
    pub temperatures: DailyTempSeries,
    pub grids: BTreeMap<String, GridSeries>,
    pub cell_weights: CellWeightTable,
    pub demographics: BTreeMap<String, VariablePanel>,
    pub mortality: MortalityTable,
    pub crosswalk: Crosswalk,
    pub report: SynthReport,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn round_to(x: f64, places: i32) -> f64 {
    let s = 10f64.powi(places);
    (x * s).round() / s
}

pub fn sa2_regions(params: &SynthParams) -> Vec<(RegionId, RegionId)> {
    let per = params.sa2_per_sa3.max(1);
    (0..params.n_regions)
        .map(|i| {
            let sa3 = format!("1{:04}", i / per + 1);
            let sa2 = format!("{sa3}{:04}", i % per + 1);
            (RegionId::new(sa2, Level::Sa2), RegionId::new(sa3, Level::Sa3))
        })
        .collect()
}

fn temperatures(
    params: &SynthParams,
    regions: &[(RegionId, RegionId)],
    rng: &mut ChaCha8Rng,
) -> Result<DailyTempSeries> {
    let first = params.years.start - params.history_years as i32;
    let start = NaiveDate::from_ymd_opt(first, 1, 1).ok_or_else(|| Error::InvalidInput(format!("bad year {first}")))?;
    let end = NaiveDate::from_ymd_opt(params.years.end, 12, 31)
        .ok_or_else(|| Error::InvalidInput(format!("bad year {}", params.years.end)))?;
    let days = (end - start).num_days() as usize + 1;
    let mut series = DailyTempSeries::new();
    for (i, (sa2, _)) in regions.iter().enumerate() {
        let offset = 3.0 * normal(rng);
        let amplitude = 6.0 + normal(rng).abs();
        let mut anomaly = 0.0;
        let mut tmax = Vec::with_capacity(days);
        let mut tmin = Vec::with_capacity(days);
        for d in 0..days {
            let date = start + Duration::days(d as i64);
            anomaly = 0.7 * anomaly + 2.2 * normal(rng);
            let season = (2.0 * std::f64::consts::PI * (f64::from(date.ordinal()) - 20.0) / 365.25).cos();
            let mut mean = 17.0 + offset + amplitude * season + anomaly;
            if let Some(ev) = params.heat_event {
                let since = (date - ev.start).num_days();
                if ev.region == i && since >= 0 && since < i64::from(ev.days) {
                    mean += ev.magnitude;
                }
            }
            let range = (10.0 + 2.0 * normal(rng)).max(2.0);
            tmax.push(Some(round_to(mean + range / 2.0, 1)));
            tmin.push(Some(round_to(mean - range / 2.0, 1)));
        }
        series.insert(sa2.clone(), RegionTemps { start, tmax, tmin })?;
    }
    Ok(series)
}

fn pollutants(
    params: &SynthParams,
    regions: &[(RegionId, RegionId)],
    rng: &mut ChaCha8Rng,
) -> Result<(BTreeMap<String, GridSeries>, CellWeightTable)> {
    let n_cells = regions.len() + 1;
    let cell = |c: usize| format!("c{c:04}");
    let weights = CellWeightTable::from_rows(regions.iter().enumerate().flat_map(|(i, (sa2, _))| {
        [(cell(i), sa2.clone(), 0.6), (cell(i + 1), sa2.clone(), 0.4)]
    }))?;
    let start = NaiveDate::from_ymd_opt(params.years.start, 1, 1).expect("valid year");
    let end = NaiveDate::from_ymd_opt(params.years.end, 12, 31).expect("valid year");
    let days = (end - start).num_days() + 1;
    let mut grids = BTreeMap::new();
    for (p, base_level) in POLLUTANTS.iter().zip([5.0, 12.0, 40.0, 8.0]) {
        let mut grid = GridSeries::new(Resolution::Daily);
        for c in 0..n_cells {
            let base = base_level * (0.4 * normal(rng)).exp();
            for d in 0..days {
                let date = start + Duration::days(d);
                let season = (2.0 * std::f64::consts::PI * f64::from(date.ordinal()) / 365.25).sin();
                let value = base * (1.0 + 0.3 * season) * (0.3 * normal(rng)).exp();
                grid.insert(cell(c), TimeKey::from_date(date, Resolution::Daily), Some(round_to(value, 4)))?;
            }
        }
        grids.insert((*p).to_owned(), grid);
    }
    Ok((grids, weights))
}

/// Generates a full fixture. Fails if the mortality signal comes out weaker
/// than [`MIN_SIGNAL_TAU`].
pub fn generate(params: &SynthParams, seed: u64) -> Result<SynthFixture> {
    if params.n_regions < 2 {
        return Err(Error::InvalidInput("synth needs at least two regions".into()));
    }
    for v in &params.signal_variables {
        if !demographic_variables().any(|d| d == v) {
            return Err(Error::InvalidInput(format!("unknown signal variable `{v}`")));
        }
    }
    if let Some(ev) = params.heat_event {
        if ev.region >= params.n_regions {
            return Err(Error::InvalidInput(format!("heat event region {} out of range", ev.region)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let regions = sa2_regions(params);

    let temperatures = temperatures(params, &regions, &mut rng)?;
    let (grids, cell_weights) = pollutants(params, &regions, &mut rng)?;

    // Latent standardised score per variable and region; observed values are
    // an affine image of it plus a small drift and noise.
    let first_year = DEMOGRAPHICS.iter().flat_map(|d| d.observed).copied().min().unwrap_or(params.years.start);
    let last_year = params.years.end.max(DEMOGRAPHICS.iter().flat_map(|d| d.observed).copied().max().unwrap_or(0));
    let mut latent: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut demographics = BTreeMap::new();
    for d in DEMOGRAPHICS {
        let z: Vec<f64> = (0..regions.len()).map(|_| normal(&mut rng)).collect();
        let drift = 0.03 * normal(&mut rng);
        let mut panel = VariablePanel::new(d.id, d.unit, Resolution::Yearly);
        for (i, (sa2, _)) in regions.iter().enumerate() {
            for year in first_year..=last_year {
                let value = d.observed.contains(&year).then(|| {
                    let x = z[i] + drift * f64::from(year - 2016) + 0.05 * normal(&mut rng);
                    let v = d.mean + d.sd * x;
                    let v = if d.percent { v.clamp(0.0, 100.0) } else { v.max(0.01 * d.mean) };
                    round_to(v, 3)
                });
                panel.insert(sa2.clone(), TimeKey::yearly(year), value);
            }
        }
        latent.insert(d.id, z);
        demographics.insert(d.id.to_owned(), panel);
    }

    // Mortality per SA3 from the polarity-adjusted signal of its children.
    let sign = |v: &str| match default_polarity(v) {
        Polarity::RiskIncreasing => 1.0,
        Polarity::RiskDecreasing => -1.0,
    };
    let k = params.signal_variables.len().max(1) as f64;
    let mut crosswalk = Crosswalk::new();
    let mut children: BTreeMap<RegionId, Vec<usize>> = BTreeMap::new();
    for (i, (sa2, sa3)) in regions.iter().enumerate() {
        crosswalk.insert(sa2.clone(), sa3.clone());
        children.entry(sa3.clone()).or_default().push(i);
    }
    let sa3_mean = |z: &dyn Fn(usize) -> f64, kids: &[usize]| kids.iter().map(|&i| z(i)).sum::<f64>() / kids.len() as f64;
    let mut mortality = MortalityTable::new();
    let mut signal = Vec::new();
    let bases = [80.0, 40.0, 15.0, 10.0, 30.0, 550.0];
    for (sa3, kids) in &children {
        let s = sa3_mean(
            &|i| {
                params
                    .signal_variables
                    .iter()
                    .map(|v| sign(v) * latent[v.as_str()][i])
                    .sum::<f64>()
                    / k.sqrt()
            },
            kids,
        );
        signal.push(s);
        for (cause, base) in MortalityCause::ALL.into_iter().zip(bases) {
            let noisy = s + params.mortality_noise * normal(&mut rng);
            let rate = round_to(base * (0.15 * noisy).exp(), 3);
            mortality.insert(sa3.clone(), cause, params.years.start, params.years.end, rate)?;
        }
    }

    let all_cause = mortality_category_rates(&mortality, MortalityCategory::AllCause);
    let rates: Vec<Option<f64>> = children
        .keys()
        .map(|r| all_cause.get(r, &TimeKey::yearly(params.years.end)))
        .collect();
    let as_opt = |v: &[f64]| v.iter().map(|x| Some(*x)).collect::<Vec<_>>();
    let signal_tau = kendall_tau(&as_opt(&signal), &rates)?;
    let mut variable_tau = BTreeMap::new();
    for v in &params.signal_variables {
        let scores: Vec<f64> = children
            .values()
            .map(|kids| sa3_mean(&|i| sign(v) * latent[v.as_str()][i], kids))
            .collect();
        variable_tau.insert(v.clone(), kendall_tau(&as_opt(&scores), &rates)?);
    }
    if signal_tau <= MIN_SIGNAL_TAU {
        return Err(Error::SelfCheck(format!(
            "synthetic mortality tracks its signal with tau {signal_tau:.3}, below {MIN_SIGNAL_TAU}"
        )));
    }

    Ok(SynthFixture {
        params: params.clone(),
        temperatures,
        grids,
        cell_weights,
        demographics,
        mortality,
        crosswalk,
        report: SynthReport {
            signal_tau,
            variable_tau,
        },
    })
}

/// Relative paths of the files written by [`SynthFixture::write`].
pub mod layout {
    pub const TEMPERATURE: &str = "inputs/temperature.csv";
    pub const GRID_DIR: &str = "inputs/grids";
    pub const CELL_WEIGHTS: &str = "inputs/cell_weights.csv";
    pub const DEMOGRAPHICS_DIR: &str = "inputs/demographics";
    pub const MORTALITY: &str = "inputs/mortality.csv";
    pub const CROSSWALK: &str = "inputs/crosswalk.csv";
    pub const SPEC_DIR: &str = "specs";
}

impl SynthFixture {
    /// Writes every input file under `dir`, following [`layout`].
    pub fn write(&self, dir: &Path) -> Result<()> {
        self.temperatures.write_csv(&dir.join(layout::TEMPERATURE))?;
        for (p, grid) in &self.grids {
            grid.write_csv(&dir.join(layout::GRID_DIR).join(format!("{p}.csv")))?;
        }
        self.cell_weights.write_csv(&dir.join(layout::CELL_WEIGHTS))?;
        for (id, panel) in &self.demographics {
            write_panel_csv(panel, &dir.join(layout::DEMOGRAPHICS_DIR).join(format!("{id}.csv")))?;
        }
        self.mortality.write_csv(&dir.join(layout::MORTALITY))?;
        self.crosswalk.write_csv(&dir.join(layout::CROSSWALK))?;
        Ok(())
    }
}
