//! Seeded synthetic scenarios: weather, farms and delivery statements with
//! known daily usage, for end-to-end checks of the pipeline.

use std::f64::consts::TAU;
use std::path::Path;

use chrono::NaiveDate;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::etc::CropCoefficientTable;
use crate::ingest::{DATE_FORMAT, DELIVERY_HEADER, FARM_HEADER, WEATHER_HEADER};
use crate::model::{DeliveryEvent, FarmProfile, WeatherDay};

/// ET_o in mm/day per MJ/m^2 of solar radiation.
pub const ETO_PER_SOLAR: f64 = 0.25;
/// Solar radiation on a rain day relative to a dry one.
const RAIN_DAY_SOLAR: f64 = 0.6;
pub const TRUTH_HEADER: [&str; 3] = ["farm_id", "date", "usage_ml"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CropMix {
    pub crop: String,
    pub kc: f64,
    /// Relative share of farms growing this crop.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_farms: usize,
    pub n_days: usize,
    pub n_nodes: usize,
    /// Days between deliveries after each farm's first gap.
    pub delivery_period: usize,
    pub start_date: NaiveDate,
    /// Mean of the seasonal ET_o sinusoid, mm/day.
    pub eto_base: f64,
    /// Amplitude of the sinusoid; one full cycle spans the season.
    pub eto_amplitude: f64,
    /// Half-width of the uniform day-to-day ET_o jitter, mm/day.
    pub eto_jitter: f64,
    pub rain_probability: f64,
    pub crops: Vec<CropMix>,
    pub soils: Vec<String>,
    /// Multiplicative usage noise level in [0, 1].
    pub noise: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let crop = |crop: &str, kc, weight| CropMix {
            crop: crop.into(),
            kc,
            weight,
        };
        ScenarioConfig {
            seed: 1,
            n_farms: 20,
            n_days: 120,
            n_nodes: 4,
            delivery_period: 7,
            start_date: NaiveDate::from_ymd_opt(2009, 1, 1).expect("valid date"),
            eto_base: 6.5,
            eto_amplitude: 3.5,
            eto_jitter: 1.0,
            rain_probability: 0.15,
            crops: vec![crop("Rice", 1.2, 2.0), crop("Maize", 0.8, 1.0), crop("Wheat", 0.5, 1.0)],
            soils: vec!["SMC".into(), "TRB".into(), "CLY".into()],
            noise: 0.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_farms == 0 || self.n_days == 0 || self.n_nodes == 0 {
            return fail("n_farms, n_days and n_nodes must be at least 1".into());
        }
        if self.delivery_period == 0 {
            return fail("delivery_period must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return fail(format!("noise {} outside [0, 1]", self.noise));
        }
        if !(0.0..=1.0).contains(&self.rain_probability) {
            return fail(format!("rain_probability {} outside [0, 1]", self.rain_probability));
        }
        if !(self.eto_amplitude >= 0.0 && self.eto_jitter >= 0.0) {
            return fail("eto_amplitude and eto_jitter must be non-negative".into());
        }
        if !(self.eto_base - self.eto_amplitude - self.eto_jitter > 0.0 && self.eto_base.is_finite()) {
            return fail("eto_base must exceed eto_amplitude + eto_jitter".into());
        }
        if self.crops.is_empty() || self.soils.is_empty() {
            return fail("crops and soils must not be empty".into());
        }
        for c in &self.crops {
            if !(c.kc > 0.0 && c.weight > 0.0 && c.kc.is_finite() && c.weight.is_finite()) {
                return fail(format!("crop {} needs positive kc and weight", c.crop));
            }
        }
        self.kc_table().map(|_| ())
    }

    pub fn kc_table(&self) -> Result<CropCoefficientTable> {
        CropCoefficientTable::new(self.crops.iter().map(|c| (c.crop.clone(), c.kc)))
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn season_end(&self) -> NaiveDate {
        self.start_date + chrono::Days::new(self.n_days as u64 - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruthDay {
    pub farm_id: String,
    pub date: NaiveDate,
    pub usage_ml: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub weather: Vec<WeatherDay>,
    pub farms: Vec<FarmProfile>,
    pub deliveries: Vec<DeliveryEvent>,
    /// Daily usage per farm, ordered by (farm, date).
    pub truth: Vec<TruthDay>,
    pub kc: CropCoefficientTable,
}

/// Rounds through the decimal text the CSV writer will emit, so values read
/// back are bit-identical to the ones used for the truth.
fn quantize(x: f64, places: usize) -> f64 {
    format!("{x:.places$}").parse().expect("formatted float parses")
}

pub fn generate(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_days;

    let mut weather = Vec::with_capacity(n);
    for (d, date) in config.start_date.iter_days().take(n).enumerate() {
        let phase = (TAU * d as f64 / n as f64).sin();
        let jitter = rng.gen_range(-1.0..=1.0) * config.eto_jitter;
        let rain = rng.gen_bool(config.rain_probability);
        let rainfall = if rain {
            quantize(rng.gen_range(1.0..20.0), 1)
        } else {
            0.0
        };
        let mut solar = (config.eto_base + config.eto_amplitude * phase + jitter) / ETO_PER_SOLAR;
        if rain {
            solar *= RAIN_DAY_SOLAR;
        }
        let solar = quantize(solar, 2);
        let tmax = quantize(24.0 + 8.0 * phase + rng.gen_range(-2.0..2.0), 1);
        let tmin = quantize(tmax - rng.gen_range(8.0..14.0), 1);
        let humidity = quantize((45.0 - 20.0 * phase + rng.gen_range(-10.0..10.0)).clamp(5.0, 95.0), 1);
        let wind = quantize(rng.gen_range(100.0..400.0), 1);
        weather.push(WeatherDay {
            date,
            tmax,
            tmin,
            humidity,
            wind,
            rainfall,
            solar,
            eto: quantize(ETO_PER_SOLAR * solar, 3),
        });
    }

    let crop_pick = WeightedIndex::new(config.crops.iter().map(|c| c.weight))
        .map_err(|e| Error::Config(format!("crop weights: {e}")))?;
    let mut farms = Vec::with_capacity(config.n_farms);
    let mut truth = Vec::with_capacity(config.n_farms * n);
    let mut deliveries = Vec::new();
    for f in 0..config.n_farms {
        let crop = &config.crops[crop_pick.sample(&mut rng)];
        let farm = FarmProfile {
            farm_id: format!("F{:03}", f + 1),
            node_id: format!("N{}", f % config.n_nodes + 1),
            area: quantize(rng.gen_range(20.0..200.0), 1),
            soil_type: config.soils[rng.gen_range(0..config.soils.len())].clone(),
            crop_type: crop.crop.clone(),
            station_id: None,
        };
        let scale = crop.kc * 0.01 * farm.area;
        let usage: Vec<f64> = weather
            .iter()
            .map(|w| scale * w.eto * (1.0 + config.noise * rng.gen_range(-1.0..=1.0)))
            .collect();

        let mut starts = vec![0];
        let mut next = rng.gen_range(1..=config.delivery_period);
        while next < n {
            starts.push(next);
            next += config.delivery_period;
        }
        for (i, &s) in starts.iter().enumerate() {
            let end = starts.get(i + 1).copied().unwrap_or(n);
            deliveries.push(DeliveryEvent {
                farm_id: farm.farm_id.clone(),
                date: weather[s].date,
                volume: usage[s..end].iter().sum(),
            });
        }
        truth.extend(weather.iter().zip(&usage).map(|(w, &u)| TruthDay {
            farm_id: farm.farm_id.clone(),
            date: w.date,
            usage_ml: u,
        }));
        farms.push(farm);
    }

    Ok(Scenario {
        weather,
        farms,
        deliveries,
        truth,
        kc: config.kc_table()?,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::io(path, std::io::Error::other(e))
}

fn write_csv<const N: usize>(path: &Path, header: [&str; N], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

impl Scenario {
    /// Writes `weather.csv`, `farms.csv`, `deliveries.csv`, `truth.csv` and
    /// `kc.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let date = |d: NaiveDate| d.format(DATE_FORMAT).to_string();
        write_csv(
            &dir.join("weather.csv"),
            WEATHER_HEADER,
            self.weather.iter().map(|w| {
                let mut row = vec![date(w.date)];
                row.extend([w.tmax, w.tmin, w.humidity, w.wind, w.rainfall, w.solar, w.eto].map(|v| v.to_string()));
                row
            }),
        )?;
        write_csv(
            &dir.join("farms.csv"),
            FARM_HEADER,
            self.farms.iter().map(|f| {
                vec![
                    f.farm_id.clone(),
                    f.node_id.clone(),
                    f.area.to_string(),
                    f.soil_type.clone(),
                    f.crop_type.clone(),
                ]
            }),
        )?;
        write_csv(
            &dir.join("deliveries.csv"),
            DELIVERY_HEADER,
            self.deliveries
                .iter()
                .map(|e| vec![e.farm_id.clone(), date(e.date), e.volume.to_string()]),
        )?;
        write_csv(
            &dir.join("truth.csv"),
            TRUTH_HEADER,
            self.truth
                .iter()
                .map(|t| vec![t.farm_id.clone(), date(t.date), t.usage_ml.to_string()]),
        )?;
        let kc = dir.join("kc.csv");
        std::fs::write(&kc, self.kc.to_csv()).map_err(|e| Error::io(&kc, e))
    }
}
