//! Meta-features describing a (training) series.
//!
//! Every feature is computed on the z-scored input. The spectral features use
//! a full-length rectangular-window periodogram over the Fourier frequencies
//! `2*pi*j/T`, `j = 1..=T/2` (DC excluded).

use std::f64::consts::PI;

use indexmap::IndexMap;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::de::{Deserialize, Deserializer};
use serde::ser::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::series::{acf_values, first_zero_crossing, is_constant, mean, std_dev, zscore_values, TimeSeries};

pub const FORECAST_ERROR: &str = "forecast_error";
pub const CENTROID_FREQUENCY: &str = "centroid_frequency";
pub const LOW_FREQUENCY_POWER: &str = "low_frequency_power";
pub const WHITEN_TIMESCALE: &str = "whiten_timescale";
pub const MEAN: &str = "mean";
pub const STD: &str = "std";
pub const ACF_LAG1: &str = "acf_lag1";

/// Registered feature names, in registration (serialization) order.
pub const FEATURE_NAMES: [&str; 7] = [
    FORECAST_ERROR,
    CENTROID_FREQUENCY,
    LOW_FREQUENCY_POWER,
    WHITEN_TIMESCALE,
    MEAN,
    STD,
    ACF_LAG1,
];

pub const MIN_SPECTRUM_LEN: usize = 8;
/// Residuals (in z-score units) with a spread below this are treated as
/// constant.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const MIN_FEATURE_LEN: usize = 16;

/// One-sided power spectrum of a z-scored series.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Angular frequencies in `(0, pi]`, strictly increasing.
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    pub total_power: f64,
    /// Length of the transformed series.
    pub len: usize,
}

impl Spectrum {
    /// Bin index `j` (1-based Fourier index) of the entry at position `i`.
    fn fourier_index(i: usize) -> usize {
        i + 1
    }
}

fn complete(series: &TimeSeries) -> Result<&[f64]> {
    series.values()
}

pub fn periodogram_values(values: &[f64]) -> Result<Spectrum> {
    if values.len() < MIN_SPECTRUM_LEN {
        return Err(Error::TooShort { needed: MIN_SPECTRUM_LEN, got: values.len() });
    }
    let z = zscore_values(values)?;
    let len = z.len();
    let mut buf: Vec<Complex<f64>> = z.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let half = len / 2;
    let frequencies: Vec<f64> = (1..=half).map(|j| 2.0 * PI * j as f64 / len as f64).collect();
    let power: Vec<f64> = buf[1..=half].iter().map(|x| x.norm_sqr() / len as f64).collect();
    let total_power = power.iter().sum();
    Ok(Spectrum { frequencies, power, total_power, len })
}

pub fn periodogram(series: &TimeSeries) -> Result<Spectrum> {
    periodogram_values(complete(series)?)
}

/// Smallest Fourier frequency at which the cumulative power reaches half the
/// total.
pub fn centroid_frequency_of(spectrum: &Spectrum) -> f64 {
    let half = spectrum.total_power / 2.0;
    let mut acc = 0.0;
    for (w, p) in spectrum.frequencies.iter().zip(&spectrum.power) {
        acc += p;
        if acc >= half {
            return *w;
        }
    }
    *spectrum.frequencies.last().expect("spectrum has at least one bin")
}

/// Fraction of power at frequencies `<= 0.2 * pi`.
pub fn low_frequency_power_of(spectrum: &Spectrum) -> f64 {
    // 2*pi*j/T <= 0.2*pi  <=>  10*j <= T, evaluated exactly in integers.
    let low: f64 = spectrum
        .power
        .iter()
        .enumerate()
        .filter(|(i, _)| 10 * Spectrum::fourier_index(*i) <= spectrum.len)
        .map(|(_, p)| p)
        .sum();
    (low / spectrum.total_power).clamp(0.0, 1.0)
}

pub fn centroid_frequency(series: &TimeSeries) -> Result<f64> {
    Ok(centroid_frequency_of(&periodogram(series)?))
}

pub fn low_frequency_power(series: &TimeSeries) -> Result<f64> {
    Ok(low_frequency_power_of(&periodogram(series)?))
}

/// `z_t - mean(z_{t-1}, ..., z_{t-k})` for `t = k..T` on the z-scored input.
pub fn local_forecast_residuals_values(values: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    if values.len() <= k {
        return Err(Error::TooShort { needed: k + 1, got: values.len() });
    }
    let z = zscore_values(values)?;
    let kf = k as f64;
    Ok((k..z.len())
        .map(|t| z[t] - z[t - k..t].iter().sum::<f64>() / kf)
        .collect())
}

pub fn local_forecast_residuals(series: &TimeSeries, k: usize) -> Result<Vec<f64>> {
    local_forecast_residuals_values(complete(series)?, k)
}

/// Spread of the errors made by predicting each value with the mean of its
/// three predecessors.
pub fn forecast_error_values(values: &[f64]) -> Result<f64> {
    let residuals = local_forecast_residuals_values(values, 3)?;
    let spread = std_dev(&residuals);
    if spread < RESIDUAL_TOLERANCE {
        return Ok(0.0);
    }
    Ok(spread)
}

pub fn forecast_error(series: &TimeSeries) -> Result<f64> {
    forecast_error_values(complete(series)?)
}

/// Ratio of the first ACF zero crossing of the one-step residuals to that of
/// the series itself, both searched up to lag `T/2`.
pub fn whiten_timescale_values(values: &[f64]) -> Result<f64> {
    if values.len() < MIN_FEATURE_LEN {
        return Err(Error::TooShort { needed: MIN_FEATURE_LEN, got: values.len() });
    }
    let max_lag = values.len() / 2;
    let z = zscore_values(values)?;
    let tau_orig = first_zero_crossing(&acf_values(&z, max_lag)?);
    let residuals = local_forecast_residuals_values(values, 1)?;
    if is_constant(&residuals) || std_dev(&residuals) < RESIDUAL_TOLERANCE {
        return Err(Error::ConstantResiduals);
    }
    let tau_res = first_zero_crossing(&acf_values(&residuals, max_lag)?);
    Ok(tau_res as f64 / tau_orig as f64)
}

pub fn whiten_timescale(series: &TimeSeries) -> Result<f64> {
    whiten_timescale_values(complete(series)?)
}

/// Named feature values for one series, in registration order.
///
/// Serializes as a JSON object mapping feature name to value; the series id
/// is carried alongside, not inside, that object.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    pub series_id: String,
    pub entries: IndexMap<String, f64>,
}

impl FeatureVector {
    pub fn new(series_id: impl Into<String>) -> Self {
        Self { series_id: series_id.into(), entries: IndexMap::new() }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.entries.insert(name.into(), value);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Serialize for FeatureVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = IndexMap::<String, f64>::deserialize(deserializer)?;
        Ok(Self { series_id: String::new(), entries })
    }
}

/// Computes every registered feature. Requires a complete, non-constant series
/// of at least 16 observations.
pub fn extract_features_values(series_id: &str, values: &[f64]) -> Result<FeatureVector> {
    if values.len() < MIN_FEATURE_LEN {
        return Err(Error::TooShort { needed: MIN_FEATURE_LEN, got: values.len() });
    }
    if is_constant(values) {
        return Err(Error::ConstantSeries);
    }
    let spectrum = periodogram_values(values)?;
    let acf1 = acf_values(values, 1)?[0];
    let mut fv = FeatureVector::new(series_id);
    fv.insert(FORECAST_ERROR, forecast_error_values(values)?);
    fv.insert(CENTROID_FREQUENCY, centroid_frequency_of(&spectrum));
    fv.insert(LOW_FREQUENCY_POWER, low_frequency_power_of(&spectrum));
    fv.insert(WHITEN_TIMESCALE, whiten_timescale_values(values)?);
    fv.insert(MEAN, mean(values));
    fv.insert(STD, std_dev(values));
    fv.insert(ACF_LAG1, acf1);
    Ok(fv)
}

pub fn extract_features(series: &TimeSeries) -> Result<FeatureVector> {
    extract_features_values(series.id().unwrap_or(""), complete(series)?)
}
