//! Evaluation: k-fold cross-validation, seasonal demand per farm and node,
//! closeness of predicted to actual volumes, and report files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::c45::{build_tree, C45Params, DecisionTree};
use crate::error::{Error, Result};
use crate::etc::{self, CropCoefficientTable};
use crate::ingest::{open_csv, CsvTable, WeatherSeries};
use crate::model::{AttributeSchema, Dataset, FarmProfile, Provenance, TrainingRecord};
use crate::preprocess::record_values;
use crate::sysfor::{build_forest, Forest, SysForParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    C45,
    SysFor,
    Etc,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::C45 => "c45",
            ModelKind::SysFor => "sysfor",
            ModelKind::Etc => "etc",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c45" | "dt" => Ok(ModelKind::C45),
            "sysfor" => Ok(ModelKind::SysFor),
            "etc" => Ok(ModelKind::Etc),
            _ => Err(Error::Config(format!(
                "unknown model {s:?} (expected c45, sysfor or etc)"
            ))),
        }
    }
}

/// A model and the settings needed to train it.
#[derive(Clone, Debug)]
pub enum ModelSpec {
    C45(C45Params),
    SysFor(SysForParams),
    Etc(CropCoefficientTable),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::C45(_) => ModelKind::C45,
            ModelSpec::SysFor(_) => ModelKind::SysFor,
            ModelSpec::Etc(_) => ModelKind::Etc,
        }
    }

    /// Trains on `dataset`. The ET_c baseline has nothing to learn.
    pub fn train(&self, dataset: &Dataset) -> Result<Classifier> {
        Ok(match self {
            ModelSpec::C45(p) => Classifier::Tree(build_tree(dataset, *p, None)?),
            ModelSpec::SysFor(p) => Classifier::Forest(build_forest(dataset, *p)?),
            ModelSpec::Etc(table) => Classifier::Etc {
                table: table.clone(),
                schema: dataset.schema.clone(),
            },
        })
    }
}

#[derive(Clone, Debug)]
pub enum Classifier {
    Tree(DecisionTree),
    Forest(Forest),
    Etc {
        table: CropCoefficientTable,
        schema: AttributeSchema,
    },
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::Tree(_) => ModelKind::C45,
            Classifier::Forest(_) => ModelKind::SysFor,
            Classifier::Etc { .. } => ModelKind::Etc,
        }
    }

    pub fn predict(&self, record: &TrainingRecord) -> Result<usize> {
        match self {
            Classifier::Tree(t) => Ok(t.predict(record).0),
            Classifier::Forest(f) => Ok(f.predict(record)),
            Classifier::Etc { table, schema } => etc::predict_class(table, schema, record),
        }
    }
}

/// Shuffles `0..len` with `seed` and cuts it into `k` contiguous folds whose
/// sizes differ by at most one (the larger folds come first).
pub fn kfold_split(len: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if len < k {
        return Err(Error::invalid(format!("{len} records cannot fill {k} folds")));
    }
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (len / k, len % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(idx[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldReport {
    pub model: String,
    pub fold_accuracy_pct: Vec<f64>,
    pub average_pct: f64,
}

impl FoldReport {
    pub fn new(model: impl Into<String>, fold_accuracy_pct: Vec<f64>) -> Self {
        let average_pct = fold_accuracy_pct.iter().sum::<f64>() / fold_accuracy_pct.len().max(1) as f64;
        FoldReport {
            model: model.into(),
            fold_accuracy_pct,
            average_pct,
        }
    }

    pub fn folds(&self) -> usize {
        self.fold_accuracy_pct.len()
    }
}

fn complement(len: usize, fold: &[usize]) -> Vec<usize> {
    let mut in_fold = vec![false; len];
    fold.iter().for_each(|&i| in_fold[i] = true);
    (0..len).filter(|&i| !in_fold[i]).collect()
}

/// Trains on k-1 folds and tests on the remaining one, k times.
pub fn cross_validate(spec: &ModelSpec, dataset: &Dataset, k: usize, seed: u64) -> Result<FoldReport> {
    let folds = kfold_split(dataset.len(), k, seed)?;
    let mut acc = Vec::with_capacity(k);
    for fold in &folds {
        let train = dataset.subset(&complement(dataset.len(), fold));
        let model = spec.train(&train)?;
        let mut correct = 0usize;
        for &i in fold {
            let r = &dataset.records[i];
            if model.predict(r)? == r.class_label {
                correct += 1;
            }
        }
        acc.push(correct as f64 / fold.len() as f64 * 100.0);
    }
    Ok(FoldReport::new(spec.kind().name(), acc))
}

/// Class predictions made elsewhere, indexed by dataset record.
#[derive(Clone, Debug, PartialEq)]
pub struct ExternalPredictions {
    pub model: String,
    pub predictions: BTreeMap<usize, usize>,
}

pub const EXTERNAL_HEADER: [&str; 3] = ["record_index", "model", "predicted_bin"];

pub fn parse_external_predictions(
    path: impl AsRef<Path>,
    schema: &AttributeSchema,
) -> Result<Vec<ExternalPredictions>> {
    let path = path.as_ref();
    read_external_predictions(open_csv(path)?, path, schema)
}

/// Reads `record_index,model,predicted_bin` rows. The bin may be given by
/// label or by index.
pub fn read_external_predictions<R: Read>(
    source: R,
    file: &Path,
    schema: &AttributeSchema,
) -> Result<Vec<ExternalPredictions>> {
    let mut table = CsvTable::new(source, file, &EXTERNAL_HEADER, &[])?;
    let mut by_model: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
    for row in table.rows() {
        let row = row?;
        let index: usize = row.parse(0, EXTERNAL_HEADER[0])?;
        let model = row.text(1, EXTERNAL_HEADER[1])?.to_owned();
        let bin_text = row.text(2, EXTERNAL_HEADER[2])?;
        let bin = schema
            .bin_index(bin_text)
            .or_else(|| bin_text.parse::<usize>().ok().filter(|&b| b < schema.class_count()))
            .ok_or_else(|| row.error(format!("unknown class bin {bin_text:?}")))?;
        if by_model.entry(model.clone()).or_default().insert(index, bin).is_some() {
            return Err(row.error(format!("second prediction for record {index} of model {model}")));
        }
    }
    Ok(by_model
        .into_iter()
        .map(|(model, predictions)| ExternalPredictions { model, predictions })
        .collect())
}

/// Scores external predictions on the same folds `cross_validate` would use.
pub fn score_external(preds: &ExternalPredictions, dataset: &Dataset, k: usize, seed: u64) -> Result<FoldReport> {
    let folds = kfold_split(dataset.len(), k, seed)?;
    let mut acc = Vec::with_capacity(k);
    for fold in &folds {
        let mut correct = 0usize;
        for &i in fold {
            let p = preds
                .predictions
                .get(&i)
                .ok_or_else(|| Error::invalid(format!("model {} has no prediction for record {i}", preds.model)))?;
            if *p == dataset.records[i].class_label {
                correct += 1;
            }
        }
        acc.push(correct as f64 / fold.len() as f64 * 100.0);
    }
    Ok(FoldReport::new(preds.model.clone(), acc))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FarmDemand {
    pub farm_id: String,
    pub node_id: String,
    pub daily_ml: Vec<(NaiveDate, f64)>,
    pub total_ml: f64,
}

/// Forecast volume for one farm over `days` days from `start`: each day's
/// predicted bin midpoint (ML/ha/day) times the farm's area, summed.
pub fn seasonal_demand(
    model: &Classifier,
    schema: &AttributeSchema,
    farm: &FarmProfile,
    weather: &WeatherSeries,
    start: NaiveDate,
    days: usize,
) -> Result<FarmDemand> {
    let mut daily = Vec::with_capacity(days);
    for date in start.iter_days().take(days) {
        let w = weather.require(date, Some(&farm.farm_id))?;
        let record = TrainingRecord {
            values: record_values(schema, w, farm)?,
            class_label: 0,
            usage: 0.0,
            eto: w.eto,
            provenance: Provenance {
                farm_id: farm.farm_id.clone(),
                date,
            },
        };
        let bin = model.predict(&record)?;
        daily.push((date, schema.class_bins()[bin].midpoint() * farm.area));
    }
    Ok(FarmDemand {
        farm_id: farm.farm_id.clone(),
        node_id: farm.node_id.clone(),
        total_ml: daily.iter().map(|d| d.1).sum(),
        daily_ml: daily,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeTotal {
    pub node_id: String,
    pub total_ml: f64,
    pub farm_count: usize,
}

impl NodeTotal {
    /// Nodes without any farm are reported with a zero total.
    pub fn is_empty(&self) -> bool {
        self.farm_count == 0
    }
}

/// Sums farm demands per node. Nodes listed in `nodes` but without farms
/// come back with zero totals. Output is ordered by node id.
pub fn node_aggregate<'a>(
    demands: impl IntoIterator<Item = (&'a str, f64)>,
    farm_to_node: &BTreeMap<String, String>,
    nodes: impl IntoIterator<Item = &'a str>,
) -> Result<Vec<NodeTotal>> {
    let mut totals: BTreeMap<String, (f64, usize)> = nodes.into_iter().map(|n| (n.to_owned(), (0.0, 0))).collect();
    for (farm, ml) in demands {
        let node = farm_to_node
            .get(farm)
            .ok_or_else(|| Error::Config(format!("farm {farm:?} is not mapped to a node")))?;
        let e = totals.entry(node.clone()).or_insert((0.0, 0));
        e.0 += ml;
        e.1 += 1;
    }
    Ok(totals
        .into_iter()
        .map(|(node_id, (total_ml, farm_count))| NodeTotal {
            node_id,
            total_ml,
            farm_count,
        })
        .collect())
}

/// `(1 - |actual - predicted| / actual) * 100`. Undefined for `actual <= 0`.
pub fn closeness_accuracy(actual: f64, predicted: f64) -> Result<f64> {
    if !(actual > 0.0 && actual.is_finite()) {
        return Err(Error::invalid(format!(
            "closeness is undefined for actual volume {actual}"
        )));
    }
    Ok((1.0 - (actual - predicted).abs() / actual) * 100.0)
}

/// Node names compared loosely: case, spaces, `_` and `-` are ignored, so
/// `coly7` names the node "Coly 7".
pub fn node_key(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
        .flat_map(char::to_lowercase)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeReport {
    pub node_id: String,
    pub actual_ml: Option<f64>,
    /// Predicted volume per model, in model order.
    pub predicted_ml: Vec<(String, f64)>,
    pub excluded: bool,
    /// Closeness per model, `None` when excluded or without a positive actual.
    pub closeness_pct: Vec<Option<f64>>,
}

/// Combines per-model node predictions with actual volumes. Nodes named in
/// `exclude` and nodes whose actual volume is zero are flagged as excluded.
pub fn build_node_reports(
    predicted: &[(String, Vec<NodeTotal>)],
    actuals: Option<&BTreeMap<String, f64>>,
    exclude: &[String],
) -> Vec<NodeReport> {
    let excluded_keys: BTreeSet<String> = exclude.iter().map(|n| node_key(n)).collect();
    let mut nodes: BTreeSet<&str> = predicted
        .iter()
        .flat_map(|(_, t)| t.iter().map(|n| n.node_id.as_str()))
        .collect();
    if let Some(a) = actuals {
        nodes.extend(a.keys().map(String::as_str));
    }
    nodes
        .into_iter()
        .map(|node| {
            let actual_ml = actuals.and_then(|a| a.get(node).copied());
            let excluded = excluded_keys.contains(&node_key(node)) || actual_ml == Some(0.0);
            let predicted_ml: Vec<(String, f64)> = predicted
                .iter()
                .map(|(model, totals)| {
                    let ml = totals.iter().find(|t| t.node_id == node).map_or(0.0, |t| t.total_ml);
                    (model.clone(), ml)
                })
                .collect();
            let closeness_pct = predicted_ml
                .iter()
                .map(|(_, p)| match actual_ml {
                    Some(a) if !excluded => closeness_accuracy(a, *p).ok(),
                    _ => None,
                })
                .collect();
            NodeReport {
                node_id: node.to_owned(),
                actual_ml,
                predicted_ml,
                excluded,
                closeness_pct,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub models: Vec<String>,
    /// Closeness of summed predictions to summed actuals over included nodes.
    pub overall_closeness_pct: BTreeMap<String, Option<f64>>,
    /// Mean of the per-node closeness values over included nodes.
    pub mean_node_closeness_pct: BTreeMap<String, Option<f64>>,
    /// Actual volume over included nodes.
    pub total_actual_ml: Option<f64>,
    /// Predicted volume per model over included nodes.
    pub total_predicted_ml: BTreeMap<String, f64>,
    pub excluded_nodes: Vec<String>,
}

/// Totals and closeness over the nodes that are not excluded.
pub fn summarize(reports: &[NodeReport]) -> Summary {
    let models: Vec<String> = reports
        .first()
        .map(|r| r.predicted_ml.iter().map(|(m, _)| m.clone()).collect())
        .unwrap_or_default();
    let included: Vec<&NodeReport> = reports.iter().filter(|r| !r.excluded).collect();
    let total_actual_ml = if included.iter().all(|r| r.actual_ml.is_some()) && !included.is_empty() {
        Some(included.iter().filter_map(|r| r.actual_ml).sum::<f64>())
    } else {
        None
    };
    let mut overall = BTreeMap::new();
    let mut mean = BTreeMap::new();
    let mut totals = BTreeMap::new();
    for (m, model) in models.iter().enumerate() {
        let predicted: f64 = included.iter().map(|r| r.predicted_ml[m].1).sum();
        totals.insert(model.clone(), predicted);
        overall.insert(
            model.clone(),
            total_actual_ml.and_then(|a| closeness_accuracy(a, predicted).ok()),
        );
        let per_node: Vec<f64> = included.iter().filter_map(|r| r.closeness_pct[m]).collect();
        mean.insert(
            model.clone(),
            (!per_node.is_empty()).then(|| per_node.iter().sum::<f64>() / per_node.len() as f64),
        );
    }
    Summary {
        models,
        overall_closeness_pct: overall,
        mean_node_closeness_pct: mean,
        total_actual_ml,
        total_predicted_ml: totals,
        excluded_nodes: reports
            .iter()
            .filter(|r| r.excluded)
            .map(|r| r.node_id.clone())
            .collect(),
    }
}

pub const FOLDS_HEADER: [&str; 3] = ["model", "fold", "accuracy_pct"];
pub const NODES_HEADER: [&str; 7] = [
    "node_id",
    "actual_ml",
    "model",
    "predicted_ml",
    "difference_ml",
    "closeness_pct",
    "excluded",
];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::io(path, std::io::Error::other(e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the fold table; each report contributes one row per fold and a
/// `mean` row. `name` labels errors.
pub fn write_folds<W: std::io::Write>(reports: &[FoldReport], out: W, name: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FOLDS_HEADER).map_err(csv_err(name))?;
    for r in reports {
        for (i, a) in r.fold_accuracy_pct.iter().enumerate() {
            w.write_record([r.model.as_str(), &(i + 1).to_string(), &a.to_string()])
                .map_err(csv_err(name))?;
        }
        w.write_record([r.model.as_str(), "mean", &r.average_pct.to_string()])
            .map_err(csv_err(name))?;
    }
    w.flush().map_err(|e| Error::io(name, e))
}

pub fn write_folds_csv(reports: &[FoldReport], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_folds(reports, file, path)
}

/// Writes `nodes.csv` in long form, one row per (node, model). The
/// difference is predicted minus actual.
pub fn write_nodes_csv(reports: &[NodeReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(NODES_HEADER).map_err(csv_err(path))?;
    for r in reports {
        for ((model, predicted), closeness) in r.predicted_ml.iter().zip(&r.closeness_pct) {
            w.write_record([
                r.node_id.clone(),
                opt(r.actual_ml),
                model.clone(),
                predicted.to_string(),
                opt(r.actual_ml.map(|a| predicted - a)),
                opt(*closeness),
                r.excluded.to_string(),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary_json(summary: &Summary, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `folds.csv`, `nodes.csv` and `summary.json` into `dir`.
pub fn emit_reports(folds: &[FoldReport], nodes: &[NodeReport], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_folds_csv(folds, &dir.join("folds.csv"))?;
    write_nodes_csv(nodes, &dir.join("nodes.csv"))?;
    write_summary_json(&summarize(nodes), &dir.join("summary.json"))
}

pub const ACTUALS_HEADER: [&str; 2] = ["node_id", "actual_ml"];

pub fn parse_actuals_csv(path: impl AsRef<Path>) -> Result<BTreeMap<String, f64>> {
    let path = path.as_ref();
    read_actuals(open_csv(path)?, path)
}

/// Reads `node_id,actual_ml` rows of measured seasonal node volumes.
pub fn read_actuals<R: Read>(source: R, file: &Path) -> Result<BTreeMap<String, f64>> {
    let mut table = CsvTable::new(source, file, &ACTUALS_HEADER, &[])?;
    let mut out = BTreeMap::new();
    for row in table.rows() {
        let row = row?;
        let node = row.text(0, ACTUALS_HEADER[0])?.to_owned();
        let ml = row.number(1, ACTUALS_HEADER[1])?;
        if ml < 0.0 {
            return Err(row.error(format!("negative actual volume {ml}")));
        }
        if out.insert(node.clone(), ml).is_some() {
            return Err(row.error(format!("node {node:?} listed twice")));
        }
    }
    Ok(out)
}
