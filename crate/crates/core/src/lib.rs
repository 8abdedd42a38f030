//! Semi-synthetic time series by morphing a source series into a target,
//! and the tooling to relate forecasting performance to series
//! characteristics along the morph path.
//!
//! * [`series`]: value type, missing-value repair, elementary statistics
//! * [`morph`]: equally spaced convex morphs between two series
//! * [`features`]: spectral and predictability meta-features
//! * [`forecasting`]: baseline forecasters, external bridge, MASE
//! * [`analysis`]: ranking, pairing and feature/MASE correlation reports

pub mod analysis;
pub mod error;
pub mod features;
pub mod forecasting;
pub mod morph;
pub mod series;

pub use analysis::{
    correlate, rank_by_mase, relative_mase, run_experiment, run_experiment_with, select_pairs, top_features,
    ExperimentConfig, FeatureCorrelation, MorphAnalysisReport, PairSelection, PairTable, Ranking, RelativeMase,
    StepProbe, StepRow, TopFeature, REPORT_SCHEMA,
};
pub use error::{Error, Result};
pub use features::{extract_features, FeatureVector, Spectrum, FEATURE_NAMES};
pub use forecasting::{evaluate, external_forecast, forecast, mase, EvaluationRecord, ForecasterSpec};
pub use morph::{alpha_schedule, morph_at, morph_pair, MorphMeta, MorphSequence, MorphStep};
pub use series::{interpolate_missing, pearson, split, SplitSeries, TimeSeries};
