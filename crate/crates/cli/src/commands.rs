use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use demandcast_core::etc::parse_kc_csv;
use demandcast_core::eval::{
    build_node_reports, cross_validate, node_aggregate, parse_actuals_csv, parse_external_predictions, score_external,
    seasonal_demand, summarize, write_folds, write_folds_csv, write_nodes_csv, write_summary_json, FarmDemand,
    NodeTotal,
};
use demandcast_core::ingest::{parse_delivery_csv, parse_farm_csv, parse_weather_csv, WeatherSeries, WeatherStations};
use demandcast_core::preprocess::{load_dataset_csv, prepare_dataset, save_dataset_csv};
use demandcast_core::synth::{generate, CropMix, ScenarioConfig};
use demandcast_core::{
    AttributeSchema, C45Params, Classifier, Dataset, Error, FarmProfile, ModelKind, ModelSpec, Result, SysForParams,
};

use crate::args::{CrossvalArgs, ForecastArgs, InputArgs, ModelArgs, PreprocessArgs, SynthArgs};

fn need<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing --{flag}")))
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stations(input: &InputArgs) -> Result<WeatherStations> {
    let default = input
        .weather
        .as_ref()
        .map(|p| WeatherSeries::from_days(parse_weather_csv(p)?))
        .transpose()?;
    let mut named = BTreeMap::new();
    for spec in &input.station {
        let (id, path) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--station expects ID=FILE, got {spec:?}")))?;
        named.insert(id.to_owned(), WeatherSeries::from_days(parse_weather_csv(path)?)?);
    }
    if default.is_none() && named.is_empty() {
        return Err(Error::Config("missing --weather".into()));
    }
    Ok(WeatherStations {
        default,
        stations: named,
    })
}

fn farms(input: &InputArgs) -> Result<Vec<FarmProfile>> {
    parse_farm_csv(need(input.farms.as_ref(), "farms")?)
}

pub fn preprocess(args: PreprocessArgs) -> Result<()> {
    let method = need(args.method, "method")?;
    let season_end = need(args.season_end, "season-end")?;
    let output = need(args.output, "output")?;
    let schema = AttributeSchema::irrigation(args.input.bins)?;
    let events = parse_delivery_csv(need(args.deliveries.as_ref(), "deliveries")?)?;
    let farms = farms(&args.input)?;
    let stations = stations(&args.input)?;
    let dataset = prepare_dataset(&events, &farms, &stations, season_end, method, &schema)?;
    save_dataset_csv(&dataset, &output)?;
    println!("{} records ({method}) written to {}", dataset.len(), output.display());
    Ok(())
}

fn model_specs(args: &ModelArgs) -> Result<Vec<ModelSpec>> {
    if args.model.is_empty() {
        return Err(Error::Config("missing --model".into()));
    }
    let tree = C45Params {
        min_leaf: args.min_leaf,
        min_gain_ratio: args.min_gain_ratio,
        max_depth: args.max_depth,
    };
    let mut seen = Vec::new();
    let mut specs = Vec::new();
    for &kind in &args.model {
        if seen.contains(&kind) {
            continue;
        }
        seen.push(kind);
        specs.push(match kind {
            ModelKind::C45 => ModelSpec::C45(tree),
            ModelKind::SysFor => {
                let p = SysForParams {
                    num_trees: args.num_trees,
                    goodness: args.goodness,
                    separation: args.separation,
                    tree,
                };
                p.validate()?;
                ModelSpec::SysFor(p)
            }
            ModelKind::Etc => ModelSpec::Etc(parse_kc_csv(need(args.kc.as_ref(), "kc")?)?),
        });
    }
    Ok(specs)
}

fn check_kc(specs: &[ModelSpec], crops: &mut dyn Iterator<Item = &str>) -> Result<()> {
    let crops: Vec<&str> = crops.collect();
    for spec in specs {
        if let ModelSpec::Etc(table) = spec {
            let missing = table.missing(crops.iter().copied());
            if !missing.is_empty() {
                return Err(Error::Config(format!("no crop coefficient for {}", missing.join(", "))));
            }
        }
    }
    Ok(())
}

fn dataset_crops(dataset: &Dataset) -> Vec<String> {
    let Some(idx) = dataset.schema.attribute_index(demandcast_core::model::CROP_TYPE) else {
        return Vec::new();
    };
    dataset
        .records
        .iter()
        .filter_map(|r| r.values[idx].as_cat().map(str::to_owned))
        .collect()
}

pub fn crossval(args: CrossvalArgs) -> Result<()> {
    let path = need(args.dataset.as_ref(), "dataset")?;
    let specs = model_specs(&args.model)?;
    if args.folds < 2 {
        return Err(Error::Config(format!("--folds must be at least 2, got {}", args.folds)));
    }
    let schema = AttributeSchema::irrigation(args.bins)?;
    let dataset = load_dataset_csv(path, &schema)?;
    let crops = dataset_crops(&dataset);
    check_kc(&specs, &mut crops.iter().map(String::as_str))?;

    let mut reports = Vec::new();
    for spec in &specs {
        reports.push(cross_validate(spec, &dataset, args.folds, args.seed)?);
    }
    if let Some(ext) = &args.external {
        for preds in parse_external_predictions(ext, &schema)? {
            reports.push(score_external(&preds, &dataset, args.folds, args.seed)?);
        }
    }

    match &args.output {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_error(dir))?;
            write_folds_csv(&reports, &dir.join("folds.csv"))?;
        }
        None => write_folds(&reports, std::io::stdout().lock(), Path::new("<stdout>"))?,
    }
    for r in &reports {
        eprintln!(
            "{}: mean accuracy {:.2}% over {} folds",
            r.model,
            r.average_pct,
            r.folds()
        );
    }
    Ok(())
}

fn write_farm_demand(demands: &[(String, Vec<FarmDemand>)], dir: &Path) -> Result<()> {
    let totals = dir.join("farm_demand.csv");
    let daily = dir.join("farm_daily.csv");
    let mut t = std::fs::File::create(&totals).map_err(io_error(&totals))?;
    let mut d = std::fs::File::create(&daily).map_err(io_error(&daily))?;
    let mut tb = String::from("farm_id,node_id,model,days,predicted_ml\n");
    let mut db = String::from("farm_id,node_id,model,date,predicted_ml\n");
    for (model, farms) in demands {
        for f in farms {
            tb.push_str(&format!(
                "{},{},{model},{},{}\n",
                f.farm_id,
                f.node_id,
                f.daily_ml.len(),
                f.total_ml
            ));
            for (date, ml) in &f.daily_ml {
                db.push_str(&format!("{},{},{model},{date},{ml}\n", f.farm_id, f.node_id));
            }
        }
    }
    t.write_all(tb.as_bytes()).map_err(io_error(&totals))?;
    d.write_all(db.as_bytes()).map_err(io_error(&daily))
}

fn save_model(model: &Classifier, dir: &Path) -> Result<()> {
    let json = match model {
        Classifier::Tree(t) => t.to_json()?,
        Classifier::Forest(f) => f.to_json()?,
        Classifier::Etc { .. } => return Ok(()),
    };
    std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    let path = dir.join(format!("{}.json", model.kind()));
    std::fs::write(&path, json + "\n").map_err(io_error(&path))
}

pub fn forecast(args: ForecastArgs) -> Result<()> {
    let output: PathBuf = need(args.output.clone(), "output")?;
    let specs = model_specs(&args.model)?;
    let schema = AttributeSchema::irrigation(args.input.bins)?;
    let dataset = load_dataset_csv(need(args.dataset.as_ref(), "dataset")?, &schema)?;
    let farms = farms(&args.input)?;
    check_kc(&specs, &mut farms.iter().map(|f| f.crop_type.as_str()))?;
    let stations = stations(&args.input)?;
    let actuals = args.actuals.as_ref().map(parse_actuals_csv).transpose()?;

    let farm_to_node: BTreeMap<String, String> = farms.iter().map(|f| (f.farm_id.clone(), f.node_id.clone())).collect();
    let mut demands = Vec::new();
    let mut node_totals: Vec<(String, Vec<NodeTotal>)> = Vec::new();
    for spec in &specs {
        let model = spec.train(&dataset)?;
        if let Some(dir) = &args.save_models {
            save_model(&model, dir)?;
        }
        let mut per_farm = Vec::with_capacity(farms.len());
        for farm in &farms {
            let series = stations.for_farm(farm)?;
            let start = match args.start {
                Some(s) => s,
                None => series
                    .first_date()
                    .ok_or_else(|| Error::InvalidInput("weather file has no rows".into()))?,
            };
            per_farm.push(seasonal_demand(&model, &schema, farm, series, start, args.days)?);
        }
        let totals = node_aggregate(
            per_farm.iter().map(|d| (d.farm_id.as_str(), d.total_ml)),
            &farm_to_node,
            farms.iter().map(|f| f.node_id.as_str()),
        )?;
        node_totals.push((spec.kind().to_string(), totals));
        demands.push((spec.kind().to_string(), per_farm));
    }

    std::fs::create_dir_all(&output).map_err(io_error(&output))?;
    write_farm_demand(&demands, &output)?;
    let reports = build_node_reports(&node_totals, actuals.as_ref(), &args.exclude_nodes);
    write_nodes_csv(&reports, &output.join("nodes.csv"))?;
    let summary = summarize(&reports);
    write_summary_json(&summary, &output.join("summary.json"))?;
    for model in &summary.models {
        match summary.overall_closeness_pct[model] {
            Some(c) => eprintln!("{model}: overall closeness {c:.2}%"),
            None => eprintln!("{model}: {} ML forecast", summary.total_predicted_ml[model]),
        }
    }
    Ok(())
}

fn parse_crop(spec: &str) -> Result<CropMix> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("--crops expects CROP:KC:WEIGHT, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(CropMix {
        crop: parts[0].to_owned(),
        kc: parts[1].parse().map_err(|_| bad())?,
        weight: parts[2].parse().map_err(|_| bad())?,
    })
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let output = need(args.output, "output")?;
    let mut c = ScenarioConfig::default();
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = args.$field { c.$field = v; } )* };
    }
    set!(
        seed,
        n_farms,
        n_days,
        n_nodes,
        delivery_period,
        start_date,
        eto_base,
        eto_amplitude,
        eto_jitter,
        rain_probability,
        noise
    );
    if !args.crops.is_empty() {
        c.crops = args.crops.iter().map(|s| parse_crop(s)).collect::<Result<_>>()?;
    }
    if !args.soils.is_empty() {
        c.soils = args.soils;
    }
    let scenario = generate(&c)?;
    scenario.write(&output)?;
    println!(
        "{} farms, {} days, {} deliveries written to {} (season ends {})",
        scenario.farms.len(),
        scenario.weather.len(),
        scenario.deliveries.len(),
        output.display(),
        c.season_end()
    );
    Ok(())
}
