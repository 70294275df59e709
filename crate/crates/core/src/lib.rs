//! Irrigation water demand forecasting from delivery statements and weather.
//!
//! Delivered volumes are spread over the days they served (evenly, or in
//! proportion to reference evapotranspiration), each day is labelled with a
//! usage bin, and gain-ratio decision trees or SysFor forests learn the bin
//! from weather and farm attributes. A crop-coefficient baseline, k-fold
//! cross-validation and node-level demand comparison sit alongside.

pub mod c45;
pub mod error;
pub mod etc;
pub mod eval;
pub mod ingest;
pub mod model;
pub mod preprocess;
pub mod synth;
pub mod sysfor;

pub use c45::{build_tree, C45Params, DecisionTree, SplitTest};
pub use error::{Error, Result};
pub use etc::CropCoefficientTable;
pub use eval::{Classifier, FoldReport, ModelKind, ModelSpec, NodeReport};
pub use model::{
    Attribute, AttributeKind, AttributeSchema, Dataset, DeliveryEvent, DeliveryInterval, FarmProfile, Provenance,
    TrainingRecord, UsageBin, Value, WeatherDay,
};
pub use preprocess::DisaggregationMethod;
pub use synth::ScenarioConfig;
pub use sysfor::{build_forest, Forest, SysForParams};
