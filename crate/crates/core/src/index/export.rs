use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::ingest::{create, csv_writer, flush, format_value, parse_field, parse_key, parse_value, CsvRows};
use crate::model::{IndexResult, Level, RegionId, TimeKey};

pub const COMPONENT_HEADER: [&str; 8] = [
    "region_code",
    "level",
    "resolution",
    "year",
    "sub",
    "index_id",
    "component",
    "value",
];

/// One row of an index CSV. `component` is `overall`, a sub-index name,
/// `theme:<id>` or `var:<id>`; every value except `overall` is a percentile.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexRow {
    pub region: RegionId,
    pub time: TimeKey,
    pub index_id: String,
    pub component: String,
    pub value: Option<f64>,
}

/// Flattens a result into CSV rows, in (region, time) order.
pub fn index_rows(result: &IndexResult) -> impl Iterator<Item = IndexRow> + '_ {
    result.records.iter().flat_map(move |((region, time), s)| {
        let row = move |component: String, value: Option<f64>| IndexRow {
            region: region.clone(),
            time: *time,
            index_id: result.index_id.clone(),
            component,
            value,
        };
        std::iter::once(row("overall".into(), s.overall))
            .chain(s.sub_indices.iter().map(move |k| row(k.kind.as_str().into(), k.percentile.value)))
            .chain(s.themes.iter().map(move |t| row(format!("theme:{}", t.theme_id), t.percentile.value)))
            .chain(s.variables.iter().map(move |v| row(format!("var:{}", v.variable_id), v.percentile)))
    })
}

fn write_rows<W: Write>(result: &IndexResult, out: &mut csv::Writer<W>) -> Result<()> {
    out.write_record(COMPONENT_HEADER)?;
    for r in index_rows(result) {
        out.write_record([
            r.region.code.as_str(),
            r.region.level.as_str(),
            r.time.resolution.as_str(),
            &r.time.year.to_string(),
            &r.time.sub.to_string(),
            &r.index_id,
            &r.component,
            &format_value(r.value),
        ])?;
    }
    Ok(())
}

pub fn write_index_csv<W: Write>(result: &IndexResult, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    write_rows(result, &mut out)?;
    out.flush().map_err(|e| Error::io("<index csv>", e))
}

pub fn write_index_csv_file(result: &IndexResult, path: &Path) -> Result<()> {
    let mut out = csv_writer(create(path)?);
    write_rows(result, &mut out)?;
    flush(out, path)
}

pub fn read_index_csv<R: Read>(reader: R, context: &str) -> Result<Vec<IndexRow>> {
    let mut out = Vec::new();
    CsvRows::new(reader, context, &COMPONENT_HEADER)?.for_each(|f, line| {
        let level: Level = parse_field(context, line, "level", f[1])?;
        out.push(IndexRow {
            region: RegionId::new(f[0].trim(), level),
            time: parse_key(context, line, f[2], f[3], f[4])?,
            index_id: f[5].trim().to_owned(),
            component: f[6].trim().to_owned(),
            value: parse_value(context, line, f[7])?,
        });
        Ok(())
    })?;
    Ok(out)
}

/// A GeoJSON `FeatureCollection` with one feature per (index, region),
/// geometry left `null` for joining onto boundary files by `region_code`.
/// Each feature's `values` maps time labels to the overall index.
pub fn geojson_property_join(rows: &[IndexRow]) -> Value {
    let mut by_region: BTreeMap<(&str, &RegionId), Map<String, Value>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.component == "overall") {
        by_region
            .entry((r.index_id.as_str(), &r.region))
            .or_default()
            .insert(r.time.to_string(), r.value.map_or(Value::Null, Value::from));
    }
    let features: Vec<Value> = by_region
        .into_iter()
        .map(|((index_id, region), values)| {
            json!({
                "type": "Feature",
                "geometry": null,
                "properties": {
                    "region_code": region.code,
                    "level": region.level.as_str(),
                    "index_id": index_id,
                    "values": values,
                }
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}
