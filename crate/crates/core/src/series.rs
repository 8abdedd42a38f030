//! The time series value type, missing-value repair, splitting and the
//! elementary statistics every other module builds on.
//!
//! Conventions used throughout the crate:
//! * standard deviations are population estimates (divisor `T`);
//! * the autocorrelation function is the biased estimator, normalised by the
//!   lag-0 sum of squares, so every `r_k` lies in `[-1, 1]`;
//! * a sequence is "constant" when all of its values compare equal.

use crate::error::{Error, Result};

/// An equally spaced, univariate series of real observations.
///
/// Slots may be missing. Missing slots are stored as `NaN` internally and
/// never leak out as observations: [`TimeSeries::values`] refuses to hand out
/// a slice while any slot is missing, and [`TimeSeries::get`] returns `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    id: Option<String>,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a complete series. Every value must be finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { id: None, values })
    }

    /// Builds a series where `None` marks a missing observation.
    pub fn with_missing(slots: Vec<Option<f64>>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::EmptySeries);
        }
        let mut values = Vec::with_capacity(slots.len());
        for (index, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(v) if !v.is_finite() => return Err(Error::NonFinite { index, value: v }),
                Some(v) => values.push(v),
                None => values.push(f64::NAN),
            }
        }
        Ok(Self { id: None, values })
    }

    /// Caller guarantees `values` is non-empty and finite.
    pub(crate) fn from_finite(values: Vec<f64>, id: Option<String>) -> Self {
        debug_assert!(!values.is_empty());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { id, values }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: a series holds at least one slot.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.values.get(index).copied().filter(|v| !v.is_nan())
    }

    pub fn slots(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.values.iter().map(|v| if v.is_nan() { None } else { Some(*v) })
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| !v.is_nan())
    }

    /// The observations, if no slot is missing.
    pub fn values(&self) -> Result<&[f64]> {
        match self.missing_count() {
            0 => Ok(&self.values),
            count => Err(Error::Incomplete { count }),
        }
    }

    pub fn mean(&self) -> Result<f64> {
        Ok(mean(self.values()?))
    }

    pub fn std(&self) -> Result<f64> {
        Ok(std_dev(self.values()?))
    }
}

/// Train/test partition of a complete series. `train ++ test` is the original.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSeries {
    pub train: TimeSeries,
    pub test: TimeSeries,
}

/// Fills missing slots: interior gaps linearly between the nearest present
/// neighbours, leading and trailing gaps with the nearest present value.
pub fn interpolate_missing(series: &TimeSeries) -> Result<TimeSeries> {
    let present: Vec<usize> = (0..series.len())
        .filter(|&i| !series.values[i].is_nan())
        .collect();
    let (&first, &last) = match (present.first(), present.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::AllMissing),
    };
    let mut out = series.values.clone();
    for slot in out.iter_mut().take(first) {
        *slot = series.values[first];
    }
    for slot in out.iter_mut().skip(last + 1) {
        *slot = series.values[last];
    }
    for pair in present.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo < 2 {
            continue;
        }
        let (a, b) = (series.values[lo], series.values[hi]);
        let span = (hi - lo) as f64;
        for (i, slot) in out.iter_mut().enumerate().take(hi).skip(lo + 1) {
            *slot = a + (b - a) * ((i - lo) as f64 / span);
        }
    }
    Ok(TimeSeries::from_finite(out, series.id.clone()))
}

/// Holds out the last `horizon` observations as the test segment.
pub fn split(series: &TimeSeries, horizon: usize) -> Result<SplitSeries> {
    let values = series.values()?;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if horizon >= values.len() {
        return Err(Error::HorizonTooLarge { horizon, len: values.len() });
    }
    let cut = values.len() - horizon;
    Ok(SplitSeries {
        train: TimeSeries::from_finite(values[..cut].to_vec(), series.id.clone()),
        test: TimeSeries::from_finite(values[cut..].to_vec(), series.id.clone()),
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / values.len() as f64).sqrt()
}

pub fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|v| *v == values[0])
}

/// Standardises to zero mean and unit population standard deviation.
///
/// A second centring/scaling pass removes the rounding residue of the first,
/// which keeps mean and std within a few ulps of 0 and 1.
pub fn zscore_values(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    if is_constant(values) {
        return Err(Error::ConstantSeries);
    }
    let mut z = values.to_vec();
    for _ in 0..2 {
        let m = mean(&z);
        let s = std_dev(&z);
        if s == 0.0 || !s.is_finite() {
            return Err(Error::ConstantSeries);
        }
        z.iter_mut().for_each(|v| *v = (*v - m) / s);
    }
    Ok(z)
}

pub fn zscore(series: &TimeSeries) -> Result<TimeSeries> {
    let z = zscore_values(series.values()?)?;
    Ok(TimeSeries::from_finite(z, series.id.clone()))
}

/// Autocorrelations `r_1..=r_max_lag` (biased estimator).
pub fn acf_values(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag == 0 || max_lag >= values.len() {
        return Err(Error::TooShort { needed: max_lag + 1, got: values.len() });
    }
    if is_constant(values) {
        return Err(Error::ConstantSeries);
    }
    let m = mean(values);
    let centred: Vec<f64> = values.iter().map(|v| v - m).collect();
    let denom: f64 = centred.iter().map(|d| d * d).sum();
    if denom == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok((1..=max_lag)
        .map(|k| {
            let num: f64 = centred.iter().zip(&centred[k..]).map(|(a, b)| a * b).sum();
            (num / denom).clamp(-1.0, 1.0)
        })
        .collect())
}

pub fn acf(series: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    acf_values(series.values()?, max_lag)
}

/// First lag (1-based) whose autocorrelation is `<= 0`.
///
/// Saturates at `acf.len()` when no crossing occurs; returns 0 for an empty
/// input.
pub fn first_zero_crossing(acf: &[f64]) -> usize {
    acf.iter()
        .position(|r| *r <= 0.0)
        .map_or(acf.len(), |i| i + 1)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: x.len() });
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::ConstantInput);
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert_eq!(TimeSeries::new(vec![]), Err(Error::EmptySeries));
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::INFINITY]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(matches!(
            TimeSeries::with_missing(vec![None, Some(f64::NAN)]),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn interpolates_midpoint() {
        let s = TimeSeries::with_missing(vec![Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!(interpolate_missing(&s).unwrap().values().unwrap(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn interpolation_is_identity_on_complete() {
        let s = ts(&[5.0, 5.0, 5.0]);
        assert_eq!(interpolate_missing(&s).unwrap(), s);
    }

    /// Independent oracle: the two-point line through the neighbours.
    fn line_through(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
        let slope = (y1 - y0) / (x1 - x0);
        y0 + slope * (x - x0)
    }

    #[test]
    fn interpolates_interior_and_extends_edges() {
        let s = TimeSeries::with_missing(vec![None, Some(4.0), None, None, Some(10.0), None]).unwrap();
        let out = interpolate_missing(&s).unwrap();
        let expected = [
            4.0,
            4.0,
            line_through(1.0, 4.0, 4.0, 10.0, 2.0),
            line_through(1.0, 4.0, 4.0, 10.0, 3.0),
            10.0,
            10.0,
        ];
        assert_eq!(expected, [4.0, 4.0, 6.0, 8.0, 10.0, 10.0]);
        for (a, b) in out.values().unwrap().iter().zip(expected) {
            assert!(close(*a, b, 1e-12));
        }
    }

    #[test]
    fn interpolation_of_all_missing_fails() {
        let s = TimeSeries::with_missing(vec![None, None]).unwrap();
        assert_eq!(interpolate_missing(&s), Err(Error::AllMissing));
    }

    #[test]
    fn split_examples() {
        let s = ts(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let sp = split(&s, 2).unwrap();
        assert_eq!(sp.train.values().unwrap(), &[1.0, 2.0, 3.0]);
        assert_eq!(sp.test.values().unwrap(), &[4.0, 5.0]);

        let sp = split(&ts(&[1.0, 2.0]), 1).unwrap();
        assert_eq!(sp.train.values().unwrap(), &[1.0]);
        assert_eq!(sp.test.values().unwrap(), &[2.0]);

        let ten: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(
            split(&ts(&ten), 10),
            Err(Error::HorizonTooLarge { horizon: 10, len: 10 })
        );
    }

    #[test]
    fn split_requires_complete_series() {
        let s = TimeSeries::with_missing(vec![Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!(split(&s, 1), Err(Error::Incomplete { count: 1 }));
    }

    #[test]
    fn mean_and_std_examples() {
        assert_eq!(mean(&[2.0, 4.0, 6.0]), 4.0);
        assert_eq!(std_dev(&[5.0, 5.0, 5.0]), 0.0);
        assert_eq!(std_dev(&[1.0, -1.0, 1.0, -1.0]), 1.0);
    }

    #[test]
    fn zscore_examples() {
        assert_eq!(zscore_values(&[0.0, 2.0]).unwrap(), vec![-1.0, 1.0]);
        let z = zscore_values(&[1.0, 2.0, 3.0]).unwrap();
        let e = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!(close(z[0], -e, 1e-12) && close(z[1], 0.0, 1e-12) && close(z[2], e, 1e-12));
        let again = zscore_values(&z).unwrap();
        for (a, b) in z.iter().zip(&again) {
            assert!(close(*a, *b, 1e-12));
        }
        assert_eq!(zscore_values(&[3.0, 3.0]), Err(Error::ConstantSeries));
    }

    /// Direct double-loop evaluation of the biased ACF.
    fn acf_oracle(y: &[f64], k: usize) -> f64 {
        let n = y.len();
        let mut m = 0.0;
        for v in y {
            m += v;
        }
        m /= n as f64;
        let mut num = 0.0;
        for t in 0..n - k {
            num += (y[t] - m) * (y[t + k] - m);
        }
        let mut den = 0.0;
        for v in y {
            den += (v - m) * (v - m);
        }
        num / den
    }

    #[test]
    fn acf_examples() {
        let r = acf_values(&[1.0, -1.0, 1.0, -1.0], 1).unwrap();
        assert!(close(r[0], -0.75, 1e-15));

        let ramp = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let r = acf_values(&ramp, 5).unwrap();
        for (k, v) in r.iter().enumerate() {
            assert!(close(*v, acf_oracle(&ramp, k + 1), 1e-12));
        }
        // sum of products (-2.5*-1.5 + ...) = 8.75 over 17.5
        assert!(close(r[0], 0.5, 1e-12));

        assert_eq!(acf_values(&[2.0, 2.0, 2.0], 1), Err(Error::ConstantSeries));
        assert!(matches!(acf_values(&ramp, 6), Err(Error::TooShort { .. })));
    }

    #[test]
    fn zero_crossing_examples() {
        let alt: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(first_zero_crossing(&acf_values(&alt, 8).unwrap()), 1);
        assert_eq!(first_zero_crossing(&[0.9; 10]), 10);
        assert_eq!(first_zero_crossing(&[0.5, 0.0, -0.2]), 2);
    }

    #[test]
    fn pearson_examples() {
        assert!(close(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0, 1e-15));
        assert!(close(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0, 1e-15));
        assert!(close(pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8, 1e-15));
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ConstantInput));
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::LengthMismatch { .. })));
    }

    fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e6f64..1e6, 2..400)
    }

    proptest! {
        #[test]
        fn interpolation_is_idempotent(slots in prop::collection::vec(prop::option::of(-1e3f64..1e3), 1..60)) {
            prop_assume!(slots.iter().any(|s| s.is_some()));
            let s = TimeSeries::with_missing(slots).unwrap();
            let once = interpolate_missing(&s).unwrap();
            let twice = interpolate_missing(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn split_round_trips(values in series_strategy(), frac in 0.0f64..1.0) {
            let s = TimeSeries::new(values.clone()).unwrap();
            let horizon = 1 + ((values.len() - 1) as f64 * frac) as usize % (values.len() - 1);
            let sp = split(&s, horizon).unwrap();
            prop_assert_eq!(sp.test.len(), horizon);
            let mut joined = sp.train.values().unwrap().to_vec();
            joined.extend_from_slice(sp.test.values().unwrap());
            prop_assert_eq!(joined, values);
        }

        #[test]
        fn zscore_is_standardised(values in series_strategy()) {
            prop_assume!(!is_constant(&values));
            let z = zscore_values(&values).unwrap();
            prop_assert!(mean(&z).abs() < 1e-12);
            prop_assert!((std_dev(&z) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn pearson_affine_and_symmetric(x in series_strategy(), a in 0.1f64..100.0, b in -100.0f64..100.0, flip in any::<bool>()) {
            prop_assume!(!is_constant(&x));
            let a = if flip { -a } else { a };
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assume!(!is_constant(&y));
            let r = pearson(&x, &y).unwrap();
            prop_assert!((r - a.signum()).abs() < 1e-12);
            let w: Vec<f64> = x.iter().rev().cloned().collect();
            prop_assume!(!is_constant(&w));
            prop_assert_eq!(pearson(&x, &w).unwrap().to_bits(), pearson(&w, &x).unwrap().to_bits());
        }

        #[test]
        fn acf_is_bounded(values in series_strategy()) {
            prop_assume!(!is_constant(&values));
            let r = acf_values(&values, values.len() - 1).unwrap();
            prop_assert!(r.iter().all(|v| (-1.0 - 1e-12..=1.0 + 1e-12).contains(v)));
        }
    }
}
