//! Domain types shared by every stage of the pipeline, plus the mapping from
//! continuous daily water usage onto the discrete class attribute.

use std::collections::HashSet;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column names of the non-class attributes, in their canonical order.
pub const TMAX: &str = "tmax_c";
pub const TMIN: &str = "tmin_c";
pub const HUMIDITY: &str = "humidity_pct";
pub const WIND: &str = "wind_km_day";
pub const RAINFALL: &str = "rainfall_mm";
pub const SOLAR: &str = "solar_mj_m2";
pub const SOIL_TYPE: &str = "soil_type";
pub const CROP_TYPE: &str = "crop_type";

/// Lower edge of the first default usage bin (ML/ha/day).
pub const DEFAULT_FIRST_BIN_LO: f64 = 0.005;
/// Width of the default usage bins (ML/ha/day).
pub const DEFAULT_BIN_WIDTH: f64 = 0.05;
pub const DEFAULT_BIN_COUNT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numerical,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn numerical(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Numerical,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Categorical,
        }
    }
}

/// One class interval of daily usage, half-open `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UsageBin {
    pub lo: f64,
    pub hi: f64,
    pub label: String,
}

impl UsageBin {
    pub fn midpoint(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    pub fn contains(&self, usage: f64) -> bool {
        self.lo <= usage && usage < self.hi
    }
}

#[derive(Deserialize)]
struct RawSchema {
    attributes: Vec<Attribute>,
    class_bins: Vec<UsageBin>,
}

/// Ordered non-class attributes and the class bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema")]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    class_bins: Vec<UsageBin>,
}

impl TryFrom<RawSchema> for AttributeSchema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        AttributeSchema::new(raw.attributes, raw.class_bins)
    }
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>, class_bins: Vec<UsageBin>) -> Result<Self> {
        let mut seen = HashSet::new();
        for a in &attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(Error::invalid(format!("duplicate attribute name {:?}", a.name)));
            }
        }
        if class_bins.is_empty() {
            return Err(Error::invalid("schema needs at least one class bin"));
        }
        for (i, b) in class_bins.iter().enumerate() {
            if !(b.lo.is_finite() && b.hi.is_finite() && b.lo < b.hi) {
                return Err(Error::invalid(format!("class bin {i} has bounds {}..{}", b.lo, b.hi)));
            }
        }
        for w in class_bins.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::invalid(format!(
                    "class bins {:?} and {:?} are not contiguous",
                    w[0].label, w[1].label
                )));
            }
        }
        Ok(AttributeSchema { attributes, class_bins })
    }

    /// Contiguous equal-width bins starting at `first_lo`, labelled in the
    /// two-decimal style of delivery reports ("0.01-0.05", "0.06-0.10", ...).
    pub fn equal_width_bins(first_lo: f64, width: f64, count: usize) -> Vec<UsageBin> {
        let half_step = width / 10.0;
        (0..count)
            .map(|i| {
                let lo = first_lo + width * i as f64;
                let hi = first_lo + width * (i + 1) as f64;
                UsageBin {
                    lo,
                    hi,
                    label: format!("{:.2}-{:.2}", lo + half_step, hi - half_step),
                }
            })
            .collect()
    }

    /// The eight-attribute irrigation schema with `bin_count` default bins.
    pub fn irrigation(bin_count: usize) -> Result<Self> {
        let attributes = vec![
            Attribute::numerical(TMAX),
            Attribute::numerical(TMIN),
            Attribute::numerical(HUMIDITY),
            Attribute::numerical(WIND),
            Attribute::numerical(RAINFALL),
            Attribute::numerical(SOLAR),
            Attribute::categorical(SOIL_TYPE),
            Attribute::categorical(CROP_TYPE),
        ];
        let bins = Self::equal_width_bins(DEFAULT_FIRST_BIN_LO, DEFAULT_BIN_WIDTH, bin_count);
        Self::new(attributes, bins)
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn class_bins(&self) -> &[UsageBin] {
        &self.class_bins
    }

    pub fn class_count(&self) -> usize {
        self.class_bins.len()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn bin_index(&self, label: &str) -> Option<usize> {
        self.class_bins.iter().position(|b| b.label == label)
    }
}

/// Maps a daily usage (ML/ha/day) to its class bin. Values outside the bin
/// range clamp to the first or last bin; the last bin is closed at the top.
pub fn discretize_usage(usage: f64, schema: &AttributeSchema) -> Result<usize> {
    if usage.is_nan() {
        return Err(Error::invalid("usage is NaN"));
    }
    let bins = schema.class_bins();
    let idx = bins.partition_point(|b| b.hi <= usage);
    Ok(idx.min(bins.len() - 1))
}

/// A single attribute value of a record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Cat(String),
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            Value::Cat(_) => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            Value::Cat(c) => Some(c),
            Value::Num(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Cat(c) => f.write_str(c),
        }
    }
}

/// One station-day of meteorology.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeatherDay {
    pub date: NaiveDate,
    pub tmax: f64,
    pub tmin: f64,
    pub humidity: f64,
    pub wind: f64,
    pub rainfall: f64,
    pub solar: f64,
    /// Reference evapotranspiration, mm/day.
    pub eto: f64,
}

impl WeatherDay {
    /// Range violations, empty when the day is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let fields = [
            ("tmax", self.tmax),
            ("tmin", self.tmin),
            ("humidity", self.humidity),
            ("wind", self.wind),
            ("rainfall", self.rainfall),
            ("solar", self.solar),
            ("eto", self.eto),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                out.push(format!("{name} is not a finite number"));
            }
        }
        if self.tmax < self.tmin {
            out.push(format!("tmax {} is below tmin {}", self.tmax, self.tmin));
        }
        if !(0.0..=100.0).contains(&self.humidity) {
            out.push(format!("humidity {} outside [0, 100]", self.humidity));
        }
        for (name, v) in [
            ("wind", self.wind),
            ("rainfall", self.rainfall),
            ("solar", self.solar),
            ("eto", self.eto),
        ] {
            if v < 0.0 {
                out.push(format!("{name} {v} is negative"));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarmProfile {
    pub farm_id: String,
    pub node_id: String,
    /// Cropped area in hectares.
    pub area: f64,
    pub soil_type: String,
    pub crop_type: String,
    /// Weather station serving this farm; `None` uses the default station.
    pub station_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliveryEvent {
    pub farm_id: String,
    pub date: NaiveDate,
    /// Megalitres.
    pub volume: f64,
}

/// The span served by one delivery: `wt` megalitres delivered on
/// `start_date` and consumed over `n` days.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliveryInterval {
    pub farm_id: String,
    pub start_date: NaiveDate,
    pub n: usize,
    pub wt: f64,
    pub eto_by_day: Vec<f64>,
}

impl DeliveryInterval {
    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.start_date.iter_days().take(self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub farm_id: String,
    pub date: NaiveDate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    /// One value per schema attribute, in schema order.
    pub values: Vec<Value>,
    pub class_label: usize,
    /// Daily usage in ML/ha/day the class label was derived from.
    pub usage: f64,
    /// Reference evapotranspiration of the record's day (mm/day). Not a
    /// classification attribute; the crop-coefficient baseline reads it.
    pub eto: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub schema: AttributeSchema,
    pub records: Vec<TrainingRecord>,
}

impl Dataset {
    pub fn new(schema: AttributeSchema, records: Vec<TrainingRecord>) -> Self {
        Dataset { schema, records }
    }

    pub fn empty(schema: AttributeSchema) -> Self {
        Dataset::new(schema, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Copy of the records at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset::new(
            self.schema.clone(),
            indices.iter().map(|&i| self.records[i].clone()).collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub record: usize,
    pub farm_id: String,
    pub date: NaiveDate,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "record {} (farm {}, {}): {}",
            self.record, self.farm_id, self.date, self.message
        )
    }
}

/// Checks every record against the schema and the weather range invariants.
pub fn validate_dataset(dataset: &Dataset) -> Vec<Violation> {
    let schema = &dataset.schema;
    let idx = |name| schema.attribute_index(name);
    let (tmax, tmin, hum) = (idx(TMAX), idx(TMIN), idx(HUMIDITY));
    let non_negative: Vec<usize> = [WIND, RAINFALL, SOLAR].into_iter().filter_map(idx).collect();

    let mut out = Vec::new();
    for (r, rec) in dataset.records.iter().enumerate() {
        let mut push = |message: String| {
            out.push(Violation {
                record: r,
                farm_id: rec.provenance.farm_id.clone(),
                date: rec.provenance.date,
                message,
            })
        };
        if rec.values.len() != schema.attributes().len() {
            push(format!(
                "{} values for {} attributes",
                rec.values.len(),
                schema.attributes().len()
            ));
            continue;
        }
        for (attr, v) in schema.attributes().iter().zip(&rec.values) {
            match (attr.kind, v) {
                (AttributeKind::Numerical, Value::Num(x)) if !x.is_finite() => {
                    push(format!("{} is not finite", attr.name))
                }
                (AttributeKind::Numerical, Value::Cat(_)) => push(format!("{} must be numerical", attr.name)),
                (AttributeKind::Categorical, Value::Num(_)) => push(format!("{} must be categorical", attr.name)),
                _ => {}
            }
        }
        if rec.class_label >= schema.class_count() {
            push(format!("class label {} out of range", rec.class_label));
        }
        let num = |i: Option<usize>| i.and_then(|i| rec.values[i].as_num());
        if let (Some(hi), Some(lo)) = (num(tmax), num(tmin)) {
            if hi < lo {
                push(format!("tmax {hi} is below tmin {lo}"));
            }
        }
        if let Some(h) = num(hum) {
            if !(0.0..=100.0).contains(&h) {
                push(format!("humidity {h} outside [0, 100]"));
            }
        }
        for &i in &non_negative {
            if let Some(v) = rec.values[i].as_num() {
                if v < 0.0 {
                    push(format!("{} {v} is negative", schema.attributes()[i].name));
                }
            }
        }
        if rec.usage < 0.0 || rec.usage.is_nan() {
            push(format!("usage {} is negative", rec.usage));
        }
    }
    out
}
