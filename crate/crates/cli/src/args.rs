use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use demandcast_core::{DisaggregationMethod, ModelKind};

/// Forecast irrigation water demand from delivery statements and weather.
#[derive(Debug, Parser)]
#[command(name = "demandcast", version)]
pub struct Cli {
    /// TOML file with one table per subcommand; keys are long flag names.
    /// Flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn delivery statements into a daily training dataset.
    Preprocess(PreprocessArgs),
    /// k-fold cross-validation of one or more models on a dataset.
    Crossval(CrossvalArgs),
    /// Train on a dataset and forecast farm and node demand over a weather window.
    Forecast(ForecastArgs),
    /// Generate a synthetic scenario with known daily usage.
    Synth(SynthArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Preprocess(_) => "preprocess",
            Command::Crossval(_) => "crossval",
            Command::Forecast(_) => "forecast",
            Command::Synth(_) => "synth",
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Weather CSV used for farms without a station.
    #[arg(long, value_name = "FILE")]
    pub weather: Option<PathBuf>,
    /// Named station weather, as ID=FILE; repeatable. Farms pick one through
    /// a station_id column.
    #[arg(long, value_name = "ID=FILE")]
    pub station: Vec<String>,
    #[arg(long, value_name = "FILE")]
    pub farms: Option<PathBuf>,
    /// Number of usage bins, 0.05 ML/ha/day wide from 0.005.
    #[arg(long, default_value_t = 6)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "FILE")]
    pub deliveries: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<DisaggregationMethod>,
    /// Last day served by each farm's final delivery.
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub season_end: Option<NaiveDate>,
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Models to run: c45, sysfor, etc.
    #[arg(long, value_delimiter = ',')]
    pub model: Vec<ModelKind>,
    /// Crop coefficient CSV (crop_type,kc), needed by the etc model.
    #[arg(long, value_name = "FILE")]
    pub kc: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 0.01)]
    pub min_gain_ratio: f64,
    #[arg(long, default_value_t = 15)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 5)]
    pub num_trees: usize,
    #[arg(long, default_value_t = 0.3)]
    pub goodness: f64,
    #[arg(long, default_value_t = 0.3)]
    pub separation: f64,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    /// Dataset CSV written by `preprocess`.
    #[arg(value_name = "DATASET")]
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 3)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub bins: usize,
    /// Predictions from other tools (record_index,model,predicted_bin),
    /// scored on the same folds.
    #[arg(long, value_name = "FILE")]
    pub external: Option<PathBuf>,
    /// Directory for folds.csv; without it the table goes to stdout.
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Training dataset CSV written by `preprocess`.
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// First forecast day; defaults to the first weather day.
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub start: Option<NaiveDate>,
    #[arg(long, default_value_t = 7)]
    pub days: usize,
    /// Measured node volumes (node_id,actual_ml).
    #[arg(long, value_name = "FILE")]
    pub actuals: Option<PathBuf>,
    /// Nodes left out of the closeness totals, e.g. coly7,coly10.
    #[arg(long, value_delimiter = ',')]
    pub exclude_nodes: Vec<String>,
    /// Also write each trained tree or forest as JSON into this directory.
    #[arg(long, value_name = "DIR")]
    pub save_models: Option<PathBuf>,
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_farms: Option<usize>,
    #[arg(long)]
    pub n_days: Option<usize>,
    #[arg(long)]
    pub n_nodes: Option<usize>,
    #[arg(long)]
    pub delivery_period: Option<usize>,
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub start_date: Option<NaiveDate>,
    #[arg(long)]
    pub eto_base: Option<f64>,
    #[arg(long)]
    pub eto_amplitude: Option<f64>,
    #[arg(long)]
    pub eto_jitter: Option<f64>,
    #[arg(long)]
    pub rain_probability: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    /// Crop mix as CROP:KC:WEIGHT, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "CROP:KC:WEIGHT")]
    pub crops: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub soils: Vec<String>,
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,
}
