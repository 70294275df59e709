//! Crop evapotranspiration baseline: `ET_c = K_c * ET_o`, with one
//! season-constant coefficient per crop.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::{open_csv, CsvTable};
use crate::model::{discretize_usage, AttributeSchema, TrainingRecord, CROP_TYPE};

pub const KC_HEADER: [&str; 2] = ["crop_type", "kc"];

/// Depth in millimetres of one megalitre spread over one hectare
/// (1 mm over 1 ha is 10 m^3, i.e. 0.01 ML).
const MM_PER_ML_HA: f64 = 100.0;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CropCoefficientTable {
    kc: BTreeMap<String, f64>,
}

impl CropCoefficientTable {
    pub fn new(entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut kc = BTreeMap::new();
        for (crop, k) in entries {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::invalid(format!(
                    "crop coefficient for {crop} must be positive, got {k}"
                )));
            }
            if kc.insert(crop.clone(), k).is_some() {
                return Err(Error::invalid(format!("crop {crop} listed twice")));
            }
        }
        Ok(CropCoefficientTable { kc })
    }

    pub fn get(&self, crop: &str) -> Option<f64> {
        self.kc.get(crop).copied()
    }

    pub fn require(&self, crop: &str) -> Result<f64> {
        self.get(crop)
            .ok_or_else(|| Error::Config(format!("no crop coefficient for crop {crop:?}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.kc.iter().map(|(c, &k)| (c.as_str(), k))
    }

    /// Crops in `crops` that have no coefficient.
    pub fn missing<'a>(&self, crops: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        let mut out: Vec<String> = crops
            .into_iter()
            .filter(|c| !self.kc.contains_key(*c))
            .map(str::to_owned)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = KC_HEADER.join(",");
        s.push('\n');
        for (c, k) in self.iter() {
            s.push_str(&format!("{c},{k}\n"));
        }
        s
    }
}

pub fn parse_kc_csv(path: impl AsRef<Path>) -> Result<CropCoefficientTable> {
    let path = path.as_ref();
    read_kc(open_csv(path)?, path)
}

pub fn read_kc<R: Read>(source: R, file: &Path) -> Result<CropCoefficientTable> {
    let mut table = CsvTable::new(source, file, &KC_HEADER, &[])?;
    let mut entries = Vec::new();
    for row in table.rows() {
        let row = row?;
        let crop = row.text(0, KC_HEADER[0])?.to_owned();
        let kc = row.number(1, KC_HEADER[1])?;
        if kc <= 0.0 {
            return Err(row.error(format!("kc must be positive, got {kc}")));
        }
        entries.push((crop, kc));
    }
    CropCoefficientTable::new(entries).map_err(|e| Error::Schema {
        file: file.to_path_buf(),
        message: e.to_string(),
    })
}

fn check(kc: f64, eto: f64) -> Result<()> {
    if !(kc > 0.0 && kc.is_finite()) {
        return Err(Error::invalid(format!("crop coefficient {kc} must be positive")));
    }
    if !(eto >= 0.0 && eto.is_finite()) {
        return Err(Error::invalid(format!(
            "reference evapotranspiration {eto} must be non-negative"
        )));
    }
    Ok(())
}

/// Crop evapotranspiration in mm/day.
pub fn etc_mm(kc: f64, eto: f64) -> Result<f64> {
    check(kc, eto)?;
    Ok(kc * eto)
}

/// Crop evapotranspiration as usage in ML/ha/day.
pub fn etc_usage(kc: f64, eto: f64) -> Result<f64> {
    Ok(etc_mm(kc, eto)? / MM_PER_ML_HA)
}

/// Class predicted by the ET_c baseline for a record: the bin of the crop's
/// ET_c usage on the record's day.
pub fn predict_class(table: &CropCoefficientTable, schema: &AttributeSchema, record: &TrainingRecord) -> Result<usize> {
    let crop_idx = schema
        .attribute_index(CROP_TYPE)
        .ok_or_else(|| Error::Config("the ET_c baseline needs a crop_type attribute".into()))?;
    let crop = record.values[crop_idx]
        .as_cat()
        .ok_or_else(|| Error::invalid("crop_type must be categorical"))?;
    if record.eto.is_nan() {
        return Err(Error::invalid(format!(
            "record for farm {} on {} has no ET_o value",
            record.provenance.farm_id, record.provenance.date
        )));
    }
    discretize_usage(etc_usage(table.require(crop)?, record.eto)?, schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn etc_mm_examples() {
        assert_eq!(etc_mm(1.0, 5.0).unwrap(), 5.0);
        assert_eq!(etc_mm(1.1, 0.0).unwrap(), 0.0);
        assert!((etc_mm(1.2, 6.1).unwrap() - 7.32).abs() < 1e-12);
        assert!(etc_mm(-1.0, 5.0).is_err());
        assert!(etc_mm(1.0, -0.1).is_err());
        assert!(etc_mm(0.0, 1.0).is_err());
    }

    #[test]
    fn etc_usage_examples() {
        // 1 mm over 1 ha = 10 m^3 = 0.01 ML
        assert_eq!(etc_usage(1.0, 5.0).unwrap(), 0.05);
        assert_eq!(etc_usage(1.0, 0.0).unwrap(), 0.0);
        let u = etc_usage(1.2, 5.0).unwrap();
        assert!((u - 0.06).abs() < 1e-15);
        let schema = AttributeSchema::irrigation(3).unwrap();
        assert_eq!(
            schema.class_bins()[discretize_usage(u, &schema).unwrap()].label,
            "0.06-0.10"
        );
    }

    #[test]
    fn kc_table_parsing() {
        let t = read_kc("crop_type,kc\nRice,1.2\nWheat,0.9\n".as_bytes(), Path::new("kc.csv")).unwrap();
        assert_eq!(t.get("Rice"), Some(1.2));
        assert_eq!(t.missing(["Rice", "Corn", "Corn"]), vec!["Corn".to_string()]);
        assert!(read_kc("crop_type,kc\nRice,0\n".as_bytes(), Path::new("kc.csv")).is_err());
        assert!(read_kc("crop_type,kc\nRice,1\nRice,2\n".as_bytes(), Path::new("kc.csv")).is_err());
        let again = read_kc(t.to_csv().as_bytes(), Path::new("kc.csv")).unwrap();
        assert_eq!(again, t);
    }

    proptest! {
        #[test]
        fn usage_is_linear_in_eto(kc in 0.1f64..2.0, eto in 0.0f64..15.0, a in 0.0f64..5.0) {
            let lhs = etc_usage(kc, a * eto).unwrap();
            let rhs = a * etc_usage(kc, eto).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}
