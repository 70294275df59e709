//! Disaggregation of delivered volumes into daily usage and assembly of the
//! classification dataset.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{build_farm_intervals, join_days, open_csv, CsvTable, RawJoinedDay, WeatherStations, DATE_FORMAT};
use crate::model::{
    discretize_usage, AttributeKind, AttributeSchema, Dataset, DeliveryEvent, DeliveryInterval, FarmProfile,
    Provenance, TrainingRecord, Value, WeatherDay, CROP_TYPE, HUMIDITY, RAINFALL, SOIL_TYPE, SOLAR, TMAX, TMIN, WIND,
};

/// How a delivered volume is spread over the days it serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisaggregationMethod {
    /// Equal split over the interval.
    Ewd,
    /// Split proportional to each day's reference evapotranspiration.
    Rep,
}

impl fmt::Display for DisaggregationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DisaggregationMethod::Ewd => "ewd",
            DisaggregationMethod::Rep => "rep",
        })
    }
}

impl FromStr for DisaggregationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ewd" => Ok(DisaggregationMethod::Ewd),
            "rep" => Ok(DisaggregationMethod::Rep),
            _ => Err(Error::Config(format!("unknown method {s:?} (expected ewd or rep)"))),
        }
    }
}

fn check_interval(interval: &DeliveryInterval) -> Result<()> {
    if interval.n == 0 {
        return Err(Error::invalid(format!(
            "interval for farm {} on {} has no days",
            interval.farm_id, interval.start_date
        )));
    }
    if !(interval.wt >= 0.0 && interval.wt.is_finite()) {
        return Err(Error::invalid(format!("delivered volume {} is invalid", interval.wt)));
    }
    Ok(())
}

/// Equal split: every day gets `wt / n`.
pub fn ewd_distribute(interval: &DeliveryInterval) -> Result<Vec<f64>> {
    check_interval(interval)?;
    let share = interval.wt / interval.n as f64;
    Ok(vec![share; interval.n])
}

/// ET_o-weighted split: day `i` gets `wt * eto_i / sum(eto)`.
///
/// Falls back to the equal split when the interval's ET_o sums to zero, and
/// returns the equal split verbatim when all ET_o values are equal.
pub fn rep_distribute(interval: &DeliveryInterval) -> Result<Vec<f64>> {
    check_interval(interval)?;
    let eto = &interval.eto_by_day;
    if eto.len() != interval.n {
        return Err(Error::invalid(format!(
            "interval has n = {} but {} ET_o values",
            interval.n,
            eto.len()
        )));
    }
    if let Some(bad) = eto.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
        return Err(Error::invalid(format!("ET_o value {bad} is negative or not finite")));
    }
    let total: f64 = eto.iter().sum();
    if total == 0.0 || eto.iter().all(|&e| e == eto[0]) {
        return ewd_distribute(interval);
    }
    Ok(eto.iter().map(|&e| interval.wt * e / total).collect())
}

pub fn distribute(interval: &DeliveryInterval, method: DisaggregationMethod) -> Result<Vec<f64>> {
    match method {
        DisaggregationMethod::Ewd => ewd_distribute(interval),
        DisaggregationMethod::Rep => rep_distribute(interval),
    }
}

/// Non-class attribute values of a farm-day, in schema order.
pub fn record_values(schema: &AttributeSchema, weather: &WeatherDay, farm: &FarmProfile) -> Result<Vec<Value>> {
    schema
        .attributes()
        .iter()
        .map(|a| {
            let v = match a.name.as_str() {
                TMAX => Value::Num(weather.tmax),
                TMIN => Value::Num(weather.tmin),
                HUMIDITY => Value::Num(weather.humidity),
                WIND => Value::Num(weather.wind),
                RAINFALL => Value::Num(weather.rainfall),
                SOLAR => Value::Num(weather.solar),
                SOIL_TYPE => Value::Cat(farm.soil_type.clone()),
                CROP_TYPE => Value::Cat(farm.crop_type.clone()),
                other => return Err(Error::Config(format!("attribute {other:?} has no source column"))),
            };
            let expected = match v {
                Value::Num(_) => AttributeKind::Numerical,
                Value::Cat(_) => AttributeKind::Categorical,
            };
            if a.kind != expected {
                return Err(Error::Config(format!("attribute {:?} has the wrong kind", a.name)));
            }
            Ok(v)
        })
        .collect()
}

/// One record per farm-day covered by `intervals`, ordered by (farm, date).
/// The class is the bin of the day's usage per hectare.
pub fn build_dataset(
    joined: &[RawJoinedDay],
    intervals: &[DeliveryInterval],
    method: DisaggregationMethod,
    schema: &AttributeSchema,
) -> Result<Dataset> {
    let lookup: BTreeMap<(&str, NaiveDate), &RawJoinedDay> =
        joined.iter().map(|j| ((j.farm_id.as_str(), j.date), j)).collect();

    let mut records = BTreeMap::new();
    for iv in intervals {
        let usages = distribute(iv, method)?;
        for (date, used) in iv.dates().zip(usages) {
            let row = lookup.get(&(iv.farm_id.as_str(), date)).ok_or_else(|| Error::Gap {
                farm_id: Some(iv.farm_id.clone()),
                date,
            })?;
            let usage = used / row.farm.area;
            let provenance = Provenance {
                farm_id: iv.farm_id.clone(),
                date,
            };
            let record = TrainingRecord {
                values: record_values(schema, &row.weather, &row.farm)?,
                class_label: discretize_usage(usage, schema)?,
                usage,
                eto: row.weather.eto,
                provenance: provenance.clone(),
            };
            if records.insert(provenance, record).is_some() {
                return Err(Error::invalid(format!(
                    "overlapping intervals for farm {} on {date}",
                    iv.farm_id
                )));
            }
        }
    }
    Ok(Dataset::new(schema.clone(), records.into_values().collect()))
}

/// Intervals, join and dataset in one pass over the ingested inputs.
pub fn prepare_dataset(
    events: &[DeliveryEvent],
    farms: &[FarmProfile],
    stations: &WeatherStations,
    season_end: NaiveDate,
    method: DisaggregationMethod,
    schema: &AttributeSchema,
) -> Result<Dataset> {
    let intervals = build_farm_intervals(events, farms, stations, season_end)?;
    let joined = join_days(farms, stations, &intervals)?;
    build_dataset(&joined, &intervals, method, schema)
}

pub const DATASET_HEADER: [&str; 13] = [
    "farm_id",
    "date",
    TMAX,
    TMIN,
    HUMIDITY,
    WIND,
    RAINFALL,
    SOLAR,
    SOIL_TYPE,
    CROP_TYPE,
    "usage_ml_ha_day",
    "class_bin",
    "eto_mm",
];

fn dump_columns(schema: &AttributeSchema) -> Result<Vec<usize>> {
    DATASET_HEADER[2..10]
        .iter()
        .map(|name| {
            schema
                .attribute_index(name)
                .ok_or_else(|| Error::Config(format!("dataset dump needs attribute {name:?}")))
        })
        .collect()
}

pub fn write_dataset_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let cols = dump_columns(&dataset.schema)?;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("dataset.csv", std::io::Error::other(e));
    w.write_record(DATASET_HEADER).map_err(io)?;
    for r in &dataset.records {
        let mut row = vec![
            r.provenance.farm_id.clone(),
            r.provenance.date.format(DATE_FORMAT).to_string(),
        ];
        row.extend(cols.iter().map(|&c| r.values[c].to_string()));
        row.push(r.usage.to_string());
        row.push(dataset.schema.class_bins()[r.class_label].label.clone());
        row.push(r.eto.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("dataset.csv", e))
}

pub fn save_dataset_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset_csv(dataset, std::io::BufWriter::new(file))
}

pub fn load_dataset_csv(path: impl AsRef<Path>, schema: &AttributeSchema) -> Result<Dataset> {
    let path = path.as_ref();
    read_dataset_csv(open_csv(path)?, path, schema)
}

/// Reads a dataset dump. Class labels must name bins of `schema`. The
/// trailing `eto_mm` column may be absent, in which case records carry NaN.
pub fn read_dataset_csv<R: Read>(source: R, file: &Path, schema: &AttributeSchema) -> Result<Dataset> {
    let cols = dump_columns(schema)?;
    let mut table = CsvTable::new(source, file, &DATASET_HEADER[..12], &DATASET_HEADER[12..])?;
    let has_eto = table.columns == DATASET_HEADER.len();
    let mut records = Vec::new();
    for row in table.rows() {
        let row = row?;
        let mut values = vec![Value::Num(0.0); schema.attributes().len()];
        for (k, &c) in cols.iter().enumerate() {
            let name = DATASET_HEADER[k + 2];
            values[c] = match schema.attributes()[c].kind {
                AttributeKind::Numerical => Value::Num(row.number(k + 2, name)?),
                AttributeKind::Categorical => Value::Cat(row.text(k + 2, name)?.to_owned()),
            };
        }
        let label = row.text(11, "class_bin")?;
        let class_label = schema
            .bin_index(label)
            .ok_or_else(|| row.error(format!("class_bin {label:?} is not a bin of the schema")))?;
        records.push(TrainingRecord {
            values,
            class_label,
            usage: row.number(10, "usage_ml_ha_day")?,
            eto: if has_eto { row.number(12, "eto_mm")? } else { f64::NAN },
            provenance: Provenance {
                farm_id: row.text(0, "farm_id")?.to_owned(),
                date: row.date(1, "date")?,
            },
        });
    }
    Ok(Dataset::new(schema.clone(), records))
}
