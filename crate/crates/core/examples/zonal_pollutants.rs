//! Area-weighted averaging of gridded pollutant cells onto regions.

use envvuln::ingest::{zonal_aggregate, CellWeightTable, GridSeries};
use envvuln::model::{Level, RegionId, Resolution, TimeKey};

fn main() -> envvuln::Result<()> {
    let inner = RegionId::new("inner", Level::Sa2);
    let coast = RegionId::new("coast", Level::Sa2);
    let weights = CellWeightTable::from_rows([
        ("a".to_string(), inner.clone(), 0.5),
        ("b".to_string(), inner.clone(), 0.5),
        ("b".to_string(), coast.clone(), 0.2),
        ("c".to_string(), coast.clone(), 0.8),
    ])?;

    let mut grid = GridSeries::new(Resolution::Daily);
    for day in 1..=3 {
        let t = TimeKey::daily(2018, day);
        grid.insert("a", t, Some(30.0 + day as f64))?;
        grid.insert("b", t, Some(20.0))?;
        // Cell c has a sensor outage on day 2.
        grid.insert("c", t, if day == 2 { None } else { Some(8.0) })?;
    }

    let (pm25, diagnostics) = zonal_aggregate(&grid, &weights, "pm25");
    assert!(diagnostics.is_empty());
    for (region, t, v) in pm25.iter() {
        println!("{region:<6} {t}  {}", v.map_or("-".into(), |v| format!("{v:.2}")));
    }
    Ok(())
}
