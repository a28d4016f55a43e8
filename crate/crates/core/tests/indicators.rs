use chrono::{Duration, NaiveDate};
use envvuln::indicators::{
    build_climatology, temporal_aggregate, AggregationRule, DailyIndicators, DailyTempSeries, IndicatorParams,
    RegionTemps,
};
use envvuln::model::{Level, RegionId, Resolution, TimeKey, VariablePanel};
use proptest::prelude::*;

fn series(days: &[Vec<f64>]) -> DailyTempSeries {
    let start = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
    let mut s = DailyTempSeries::new();
    for (i, means) in days.iter().enumerate() {
        s.insert(
            RegionId::new(format!("r{i}"), Level::Sa2),
            RegionTemps {
                start,
                tmax: means.iter().map(|m| Some(m + 4.0)).collect(),
                tmin: means.iter().map(|m| Some(m - 4.0)).collect(),
            },
        )
        .unwrap();
    }
    s
}

fn indicators(s: &DailyTempSeries) -> DailyIndicators {
    let (clim, _) = build_climatology(s, None, IndicatorParams::default());
    DailyIndicators::compute(s, &clim)
}

fn half_degree_series() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec((0i32..60).prop_map(|h| h as f64 / 2.0), 60..120), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shifting_every_temperature_leaves_indicators_unchanged(days in half_degree_series(), shift in -20i32..20) {
        let base = indicators(&series(&days));
        let moved = indicators(&series(&days).shifted(shift as f64));
        for (a, b) in base.panels().iter().zip(moved.panels()) {
            prop_assert_eq!(a.len(), b.len());
            for (r, t, v) in a.iter() {
                let w = b.get(r, t);
                match (v, w) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-9, "{} {}: {} vs {}", r, t, x, y),
                    (x, y) => prop_assert_eq!(x, y),
                }
            }
        }
    }

    #[test]
    fn excess_factors_are_never_negative(days in half_degree_series()) {
        let ind = indicators(&series(&days));
        for p in [&ind.ehf, &ind.ecf] {
            prop_assert!(p.iter().filter_map(|(_, _, v)| v).all(|v| v >= 0.0));
        }
        for p in [&ind.hist_pct_heat, &ind.hist_pct_cold] {
            prop_assert!(p.iter().filter_map(|(_, _, v)| v).all(|v| (0.0..=1.0).contains(&v)));
        }
    }
}

#[test]
fn first_days_lack_history() {
    let ind = indicators(&series(&[vec![20.0; 40]]));
    let r = RegionId::new("r0", Level::Sa2);
    let day = |n: i64| TimeKey::from_date(NaiveDate::from_ymd_opt(2016, 1, 1).unwrap() + Duration::days(n), Resolution::Daily);
    assert_eq!(ind.ehf.get(&r, &day(31)), None);
    assert_eq!(ind.ehf.get(&r, &day(32)), Some(0.0));
}

#[test]
fn weekly_max_and_mean() {
    let r = RegionId::new("r0", Level::Sa2);
    let mut daily = VariablePanel::new("ehf", "", Resolution::Daily);
    let monday = NaiveDate::from_ymd_opt(2017, 1, 2).unwrap();
    for (i, v) in [0.0, 0.0, 7.0, 0.0, 0.0, 0.0, 0.0].iter().enumerate() {
        daily.insert(r.clone(), TimeKey::from_date(monday + Duration::days(i as i64), Resolution::Daily), Some(*v));
    }
    let week = TimeKey::weekly(2017, 1);
    let max = temporal_aggregate(&daily, Resolution::Weekly, AggregationRule::Max).unwrap();
    let mean = temporal_aggregate(&daily, Resolution::Weekly, AggregationRule::Mean).unwrap();
    assert_eq!(max.get(&r, &week), Some(7.0));
    assert_eq!(mean.get(&r, &week), Some(1.0));
}
