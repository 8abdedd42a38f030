//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has no observations: every slot is missing")]
    AllMissing,
    #[error("series has {count} missing slot(s); interpolate first")]
    Incomplete { count: usize },
    #[error("series is empty")]
    EmptySeries,
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("horizon {horizon} must be smaller than series length {len}")]
    HorizonTooLarge { horizon: usize, len: usize },
    #[error("series is constant (zero variance)")]
    ConstantSeries,
    #[error("input sequence is constant (zero variance)")]
    ConstantInput,
    #[error("residuals are constant")]
    ConstantResiduals,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid count {0}: at least 2 required")]
    InvalidCount(usize),
    #[error("alpha {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("series too short: need at least {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("training series too short: need at least {needed}, got {got}")]
    TrainTooShort { needed: usize, got: usize },
    #[error("autoregressive least-squares system is singular")]
    SingularFit,
    #[error("MASE denominator is zero: in-sample seasonal-naive error of the training data vanishes")]
    ZeroDenominator,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("external forecaster failed: {0}")]
    ProcessFailure(String),
    #[error("external forecaster protocol error: {0}")]
    ProtocolError(String),
    #[error("external forecaster timed out after {0} s")]
    Timeout(u64),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("every series in the corpus failed evaluation")]
    AllSeriesFailed,
    #[error("corpus too small: need at least {needed} ranked series, got {got}")]
    CorpusTooSmall { needed: usize, got: usize },
    #[error("corpus series have mixed lengths ({first} and {other})")]
    MixedLengths { first: usize, other: usize },
    #[error("not enough features with valid statistics: requested {requested}, available {available}")]
    NotEnoughFeatures { requested: usize, available: usize },
    #[error("duplicate series id {0:?}")]
    DuplicateId(String),
}

impl Error {
    /// Stable short name of the variant, used in exclusion records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AllMissing => "AllMissing",
            Error::Incomplete { .. } => "Incomplete",
            Error::EmptySeries => "EmptySeries",
            Error::NonFinite { .. } => "NonFinite",
            Error::HorizonTooLarge { .. } => "HorizonTooLarge",
            Error::ConstantSeries => "ConstantSeries",
            Error::ConstantInput => "ConstantInput",
            Error::ConstantResiduals => "ConstantResiduals",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::InvalidCount(_) => "InvalidCount",
            Error::AlphaOutOfRange(_) => "AlphaOutOfRange",
            Error::TooShort { .. } => "TooShort",
            Error::TrainTooShort { .. } => "TrainTooShort",
            Error::SingularFit => "SingularFit",
            Error::ZeroDenominator => "ZeroDenominator",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::ProcessFailure(_) => "ProcessFailure",
            Error::ProtocolError(_) => "ProtocolError",
            Error::Timeout(_) => "Timeout",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::AllSeriesFailed => "AllSeriesFailed",
            Error::CorpusTooSmall { .. } => "CorpusTooSmall",
            Error::MixedLengths { .. } => "MixedLengths",
            Error::NotEnoughFeatures { .. } => "NotEnoughFeatures",
            Error::DuplicateId(_) => "DuplicateId",
        }
    }
}
