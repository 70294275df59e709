//! Readers for the weather, delivery-statement and farm tables, and the join
//! that lines deliveries up with the weather of every day they serve.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::model::{DeliveryEvent, DeliveryInterval, FarmProfile, WeatherDay};

pub const WEATHER_HEADER: [&str; 8] = [
    "date",
    "tmax_c",
    "tmin_c",
    "humidity_pct",
    "wind_km_day",
    "rainfall_mm",
    "solar_mj_m2",
    "eto_mm",
];
pub const DELIVERY_HEADER: [&str; 3] = ["farm_id", "date", "volume_ml"];
pub const FARM_HEADER: [&str; 5] = ["farm_id", "node_id", "area_ha", "soil_type", "crop_type"];
/// Optional trailing column of the farm table naming the weather station.
pub const FARM_STATION_COLUMN: &str = "station_id";

pub(crate) const DATE_FORMAT: &str = "%Y-%m-%d";

/// A CSV source with a checked header; rows come back with their 1-based
/// line numbers.
pub(crate) struct CsvTable<R> {
    reader: csv::Reader<R>,
    file: PathBuf,
    pub(crate) columns: usize,
}

pub(crate) fn open_csv(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

impl<R: Read> CsvTable<R> {
    /// Checks that the header is exactly `expected`, optionally followed by
    /// the columns in `optional` (in order).
    pub(crate) fn new(source: R, file: &Path, expected: &[&str], optional: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_reader(source);
        let schema_err = |message: String| Error::Schema {
            file: file.to_path_buf(),
            message,
        };
        let header = reader
            .headers()
            .map_err(|e| schema_err(format!("unreadable header: {e}")))?
            .clone();
        let got: Vec<&str> = header.iter().collect();
        if let Some(missing) = expected.iter().find(|c| !got.contains(c)) {
            return Err(schema_err(format!("missing column `{missing}`")));
        }
        let allowed_len = expected.len()..=expected.len() + optional.len();
        let in_order = got.len() >= expected.len()
            && got[..expected.len()] == *expected
            && got[expected.len()..] == optional[..got.len() - expected.len()];
        if !allowed_len.contains(&got.len()) || !in_order {
            return Err(schema_err(format!(
                "header must be `{}`, found `{}`",
                expected.join(","),
                got.join(",")
            )));
        }
        Ok(CsvTable {
            reader,
            file: file.to_path_buf(),
            columns: got.len(),
        })
    }

    pub(crate) fn rows(&mut self) -> impl Iterator<Item = Result<Row>> + '_ {
        let file = self.file.clone();
        self.reader.records().map(move |r| {
            let rec = r.map_err(|e| Error::Row {
                file: file.clone(),
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            Ok(Row {
                rec,
                line,
                file: file.clone(),
            })
        })
    }
}

pub(crate) struct Row {
    rec: csv::StringRecord,
    pub(crate) line: u64,
    file: PathBuf,
}

impl Row {
    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        Error::Row {
            file: self.file.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    pub(crate) fn text(&self, idx: usize, name: &str) -> Result<&str> {
        match self.rec.get(idx) {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(self.error(format!("`{name}` is empty"))),
        }
    }

    pub(crate) fn parse<T: FromStr>(&self, idx: usize, name: &str) -> Result<T> {
        let s = self.text(idx, name)?;
        s.parse()
            .map_err(|_| self.error(format!("cannot parse `{name}` from {s:?}")))
    }

    pub(crate) fn number(&self, idx: usize, name: &str) -> Result<f64> {
        let v: f64 = self.parse(idx, name)?;
        if !v.is_finite() {
            return Err(self.error(format!("`{name}` must be finite")));
        }
        Ok(v)
    }

    pub(crate) fn date(&self, idx: usize, name: &str) -> Result<NaiveDate> {
        let s = self.text(idx, name)?;
        NaiveDate::parse_from_str(s, DATE_FORMAT).map_err(|_| self.error(format!("`{name}` is not an ISO date: {s:?}")))
    }
}

/// Daily weather of one station, keyed by date.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeatherSeries {
    days: BTreeMap<NaiveDate, WeatherDay>,
}

impl WeatherSeries {
    pub fn from_days(days: Vec<WeatherDay>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for d in days {
            let date = d.date;
            if map.insert(date, d).is_some() {
                return Err(Error::invalid(format!("duplicate weather date {date}")));
            }
        }
        Ok(WeatherSeries { days: map })
    }

    pub fn get(&self, date: NaiveDate) -> Option<&WeatherDay> {
        self.days.get(&date)
    }

    pub fn require(&self, date: NaiveDate, farm_id: Option<&str>) -> Result<&WeatherDay> {
        self.get(date).ok_or_else(|| Error::Gap {
            farm_id: farm_id.map(str::to_owned),
            date,
        })
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.days.keys().next().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.days.keys().next_back().copied()
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &WeatherDay> {
        self.days.values()
    }
}

/// Weather series per station, with an optional default used by farms that
/// name no station.
#[derive(Clone, Debug, Default)]
pub struct WeatherStations {
    pub default: Option<WeatherSeries>,
    pub stations: BTreeMap<String, WeatherSeries>,
}

impl WeatherStations {
    pub fn single(series: WeatherSeries) -> Self {
        WeatherStations {
            default: Some(series),
            stations: BTreeMap::new(),
        }
    }

    pub fn for_farm(&self, farm: &FarmProfile) -> Result<&WeatherSeries> {
        // With no named stations configured every farm reads the default.
        match farm.station_id.as_ref().filter(|_| !self.stations.is_empty()) {
            Some(id) => self
                .stations
                .get(id)
                .ok_or_else(|| Error::Config(format!("farm {} refers to unknown station {id:?}", farm.farm_id))),
            None => self
                .default
                .as_ref()
                .ok_or_else(|| Error::Config(format!("farm {} has no station and no default weather", farm.farm_id))),
        }
    }
}

pub fn parse_weather_csv(path: impl AsRef<Path>) -> Result<Vec<WeatherDay>> {
    let path = path.as_ref();
    read_weather(open_csv(path)?, path)
}

pub fn read_weather<R: Read>(source: R, file: &Path) -> Result<Vec<WeatherDay>> {
    let mut table = CsvTable::new(source, file, &WEATHER_HEADER, &[])?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in table.rows() {
        let row = row?;
        let day = WeatherDay {
            date: row.date(0, WEATHER_HEADER[0])?,
            tmax: row.number(1, WEATHER_HEADER[1])?,
            tmin: row.number(2, WEATHER_HEADER[2])?,
            humidity: row.number(3, WEATHER_HEADER[3])?,
            wind: row.number(4, WEATHER_HEADER[4])?,
            rainfall: row.number(5, WEATHER_HEADER[5])?,
            solar: row.number(6, WEATHER_HEADER[6])?,
            eto: row.number(7, WEATHER_HEADER[7])?,
        };
        if let Some(v) = day.violations().into_iter().next() {
            return Err(row.error(v));
        }
        if !seen.insert(day.date) {
            return Err(row.error(format!("duplicate date {}", day.date)));
        }
        out.push(day);
    }
    out.sort_by_key(|d| d.date);
    Ok(out)
}

pub fn parse_delivery_csv(path: impl AsRef<Path>) -> Result<Vec<DeliveryEvent>> {
    let path = path.as_ref();
    read_deliveries(open_csv(path)?, path)
}

/// Reads delivery statements. Rows for the same (farm, date) are summed;
/// the result is ordered by (farm, date).
pub fn read_deliveries<R: Read>(source: R, file: &Path) -> Result<Vec<DeliveryEvent>> {
    let mut table = CsvTable::new(source, file, &DELIVERY_HEADER, &[])?;
    let mut merged: BTreeMap<(String, NaiveDate), f64> = BTreeMap::new();
    for row in table.rows() {
        let row = row?;
        let farm_id = row.text(0, DELIVERY_HEADER[0])?.to_owned();
        let date = row.date(1, DELIVERY_HEADER[1])?;
        let volume = row.number(2, DELIVERY_HEADER[2])?;
        if volume < 0.0 {
            return Err(row.error(format!("negative volume {volume}")));
        }
        *merged.entry((farm_id, date)).or_insert(0.0) += volume;
    }
    Ok(merged
        .into_iter()
        .map(|((farm_id, date), volume)| DeliveryEvent { farm_id, date, volume })
        .collect())
}

pub fn parse_farm_csv(path: impl AsRef<Path>) -> Result<Vec<FarmProfile>> {
    let path = path.as_ref();
    read_farms(open_csv(path)?, path)
}

pub fn read_farms<R: Read>(source: R, file: &Path) -> Result<Vec<FarmProfile>> {
    let mut table = CsvTable::new(source, file, &FARM_HEADER, &[FARM_STATION_COLUMN])?;
    let has_station = table.columns > FARM_HEADER.len();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in table.rows() {
        let row = row?;
        let farm = FarmProfile {
            farm_id: row.text(0, FARM_HEADER[0])?.to_owned(),
            node_id: row.text(1, FARM_HEADER[1])?.to_owned(),
            area: row.number(2, FARM_HEADER[2])?,
            soil_type: row.text(3, FARM_HEADER[3])?.to_owned(),
            crop_type: row.text(4, FARM_HEADER[4])?.to_owned(),
            station_id: if has_station {
                row.text(5, FARM_STATION_COLUMN).ok().map(str::to_owned)
            } else {
                None
            },
        };
        if farm.area <= 0.0 {
            return Err(row.error(format!("area must be positive, got {}", farm.area)));
        }
        if !seen.insert(farm.farm_id.clone()) {
            return Err(Error::Schema {
                file: file.to_path_buf(),
                message: format!("duplicate farm_id {:?} on line {}", farm.farm_id, row.line),
            });
        }
        out.push(farm);
    }
    Ok(out)
}

/// Turns one farm's deliveries into intervals. Consecutive deliveries on
/// `d_k` and `d_k+1` give an interval of `d_k+1 - d_k` days; the last one
/// runs through `season_end` inclusive.
pub fn build_delivery_intervals(
    events: &[DeliveryEvent],
    weather: &WeatherSeries,
    season_end: NaiveDate,
) -> Result<Vec<DeliveryInterval>> {
    let mut sorted: Vec<&DeliveryEvent> = events.iter().collect();
    sorted.sort_by(|a, b| (&a.farm_id, a.date).cmp(&(&b.farm_id, b.date)));

    let mut out = Vec::with_capacity(sorted.len());
    for (i, ev) in sorted.iter().enumerate() {
        if ev.volume < 0.0 {
            return Err(Error::invalid(format!(
                "negative delivery volume for farm {} on {}",
                ev.farm_id, ev.date
            )));
        }
        let next = sorted.get(i + 1).filter(|n| n.farm_id == ev.farm_id);
        let n = match next {
            Some(next) if next.date == ev.date => {
                return Err(Error::invalid(format!(
                    "two delivery events for farm {} on {}; merge them first",
                    ev.farm_id, ev.date
                )))
            }
            Some(next) => (next.date - ev.date).num_days(),
            None => (season_end - ev.date).num_days() + 1,
        };
        if n < 1 {
            return Err(Error::invalid(format!(
                "delivery for farm {} on {} is after season end {season_end}",
                ev.farm_id, ev.date
            )));
        }
        let n = n as usize;
        let eto_by_day = ev
            .date
            .iter_days()
            .take(n)
            .map(|d| weather.require(d, Some(&ev.farm_id)).map(|w| w.eto))
            .collect::<Result<Vec<_>>>()?;
        out.push(DeliveryInterval {
            farm_id: ev.farm_id.clone(),
            start_date: ev.date,
            n,
            wt: ev.volume,
            eto_by_day,
        });
    }
    Ok(out)
}

/// Builds intervals for every farm, each against its own station's weather.
pub fn build_farm_intervals(
    events: &[DeliveryEvent],
    farms: &[FarmProfile],
    stations: &WeatherStations,
    season_end: NaiveDate,
) -> Result<Vec<DeliveryInterval>> {
    let by_id: BTreeMap<&str, &FarmProfile> = farms.iter().map(|f| (f.farm_id.as_str(), f)).collect();
    let mut grouped: BTreeMap<&str, Vec<DeliveryEvent>> = BTreeMap::new();
    for ev in events {
        grouped.entry(ev.farm_id.as_str()).or_default().push(ev.clone());
    }
    let mut out = Vec::new();
    for (farm_id, evs) in grouped {
        let farm = by_id
            .get(farm_id)
            .ok_or_else(|| Error::invalid(format!("delivery for unknown farm {farm_id:?}")))?;
        let series = stations.for_farm(farm)?;
        out.extend(build_delivery_intervals(&evs, series, season_end)?);
    }
    Ok(out)
}

/// One farm-day with its weather and farm attributes.
#[derive(Clone, Debug, PartialEq)]
pub struct RawJoinedDay {
    pub farm_id: String,
    pub date: NaiveDate,
    pub weather: WeatherDay,
    pub farm: FarmProfile,
}

/// Joins every day covered by `intervals` with its farm and weather rows,
/// ordered by (farm, date).
pub fn join_days(
    farms: &[FarmProfile],
    stations: &WeatherStations,
    intervals: &[DeliveryInterval],
) -> Result<Vec<RawJoinedDay>> {
    let by_id: BTreeMap<&str, &FarmProfile> = farms.iter().map(|f| (f.farm_id.as_str(), f)).collect();
    let mut out = BTreeMap::new();
    for iv in intervals {
        let farm = *by_id
            .get(iv.farm_id.as_str())
            .ok_or_else(|| Error::invalid(format!("interval for unknown farm {:?}", iv.farm_id)))?;
        let series = stations.for_farm(farm)?;
        for date in iv.dates() {
            let weather = series.require(date, Some(&farm.farm_id))?.clone();
            out.insert(
                (farm.farm_id.clone(), date),
                RawJoinedDay {
                    farm_id: farm.farm_id.clone(),
                    date,
                    weather,
                    farm: farm.clone(),
                },
            );
        }
    }
    Ok(out.into_values().collect())
}
