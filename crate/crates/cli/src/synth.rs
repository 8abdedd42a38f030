//! Seeded synthetic corpora for demos and tests.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("invalid synth parameter: {0}")]
pub struct SynthError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SynthKind {
    Sine,
    Ar1,
    Noise,
    Trend,
}

/// Generator parameters; unused fields are ignored for a given kind.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub period_min: f64,
    pub period_max: f64,
    pub amplitude: f64,
    pub phi: f64,
    pub sigma: f64,
    pub slope: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self { period_min: 7.0, period_max: 30.0, amplitude: 1.0, phi: 0.7, sigma: 0.1, slope: 0.05 }
    }
}

impl SynthParams {
    /// Applies `key=value` overrides. Keys: `period_min`, `period_max`,
    /// `period` (both bounds), `amplitude`, `phi`, `sigma` (alias `noise`),
    /// `slope`.
    pub fn apply(&mut self, params: &[(String, String)]) -> Result<(), SynthError> {
        for (key, raw) in params {
            let v: f64 = raw
                .trim()
                .parse()
                .map_err(|_| SynthError(format!("{key}={raw} is not a number")))?;
            if !v.is_finite() {
                return Err(SynthError(format!("{key}={raw} is not finite")));
            }
            match key.as_str() {
                "period_min" => self.period_min = v,
                "period_max" => self.period_max = v,
                "period" => (self.period_min, self.period_max) = (v, v),
                "amplitude" => self.amplitude = v,
                "phi" => self.phi = v,
                "sigma" | "noise" => self.sigma = v,
                "slope" => self.slope = v,
                other => return Err(SynthError(format!("unknown parameter {other:?}"))),
            }
        }
        Ok(())
    }

    fn validate(&self, kind: SynthKind) -> Result<(), SynthError> {
        if self.sigma < 0.0 {
            return Err(SynthError("sigma must be non-negative".into()));
        }
        match kind {
            SynthKind::Sine if !(self.period_min > 0.0 && self.period_min <= self.period_max) => {
                Err(SynthError("need 0 < period_min <= period_max".into()))
            }
            SynthKind::Ar1 if self.phi.is_nan() || self.phi.abs() >= 1.0 => Err(SynthError("phi must satisfy |phi| < 1".into())),
            SynthKind::Ar1 | SynthKind::Noise if self.sigma == 0.0 => {
                Err(SynthError("sigma must be positive for this kind".into()))
            }
            _ => Ok(()),
        }
    }
}

const AR_BURN_IN: usize = 200;

/// `count` series of `length` values. The seed fully determines the output.
pub fn generate(
    kind: SynthKind,
    count: usize,
    length: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<Vec<Vec<f64>>, SynthError> {
    if count == 0 {
        return Err(SynthError("count must be at least 1".into()));
    }
    if length < 2 {
        return Err(SynthError("length must be at least 2".into()));
    }
    params.validate(kind)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, params.sigma.max(0.0)).map_err(|e| SynthError(e.to_string()))?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let series = match kind {
            SynthKind::Sine => {
                let period = if params.period_min == params.period_max {
                    params.period_min
                } else {
                    rng.random_range(params.period_min..params.period_max)
                };
                let phase = rng.random_range(0.0..TAU);
                (0..length)
                    .map(|t| params.amplitude * (TAU * t as f64 / period + phase).sin() + noise.sample(&mut rng))
                    .collect()
            }
            SynthKind::Ar1 => {
                let mut y = 0.0;
                for _ in 0..AR_BURN_IN {
                    y = params.phi * y + noise.sample(&mut rng);
                }
                (0..length)
                    .map(|_| {
                        y = params.phi * y + noise.sample(&mut rng);
                        y
                    })
                    .collect()
            }
            SynthKind::Noise => (0..length).map(|_| noise.sample(&mut rng)).collect(),
            SynthKind::Trend => {
                let intercept = rng.random_range(-1.0..1.0);
                (0..length)
                    .map(|t| intercept + params.slope * t as f64 + noise.sample(&mut rng))
                    .collect()
            }
        };
        out.push(series);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsmorph_core::features::whiten_timescale_values;

    #[test]
    fn same_seed_same_output() {
        let p = SynthParams::default();
        assert_eq!(generate(SynthKind::Sine, 3, 64, 7, &p), generate(SynthKind::Sine, 3, 64, 7, &p));
        assert_ne!(generate(SynthKind::Sine, 3, 64, 7, &p), generate(SynthKind::Sine, 3, 64, 8, &p));
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = SynthParams::default();
        assert!(generate(SynthKind::Noise, 0, 64, 1, &p).is_err());
        assert!(generate(SynthKind::Noise, 1, 1, 1, &p).is_err());
        let mut bad = p.clone();
        bad.phi = 1.0;
        assert!(generate(SynthKind::Ar1, 1, 64, 1, &bad).is_err());
        let mut q = SynthParams::default();
        assert!(q.apply(&[("bogus".into(), "1".into())]).is_err());
        assert!(q.apply(&[("phi".into(), "x".into())]).is_err());
    }

    #[test]
    fn persistent_ar1_has_short_whitened_timescale() {
        let mut p = SynthParams::default();
        p.apply(&[("phi".into(), "0.95".into()), ("sigma".into(), "1".into())]).unwrap();
        for s in generate(SynthKind::Ar1, 3, 2048, 5, &p).unwrap() {
            assert!(whiten_timescale_values(&s).unwrap() < 0.2);
        }
    }
}
