//! Gradual morphing between a source and a target series.
//!
//! Step `i` of an `n`-step morph is the convex combination
//! `alpha_i * target + (1 - alpha_i) * source` with `alpha_i = i / (n - 1)`,
//! so the sequence starts at the source, ends at the target, and `n` counts
//! every emitted series including both endpoints. Endpoints are copied rather
//! than recomputed and are therefore bit-identical to the inputs. Interior
//! steps are evaluated as `source + alpha_i * (target - source)`, which maps
//! identical inputs onto themselves exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// `[0, 1/(n-1), ..., 1]`.
pub fn alpha_schedule(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidCount(n));
    }
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { 1.0 } else { i as f64 / last })
        .collect())
}

fn check_pair<'a>(source: &'a TimeSeries, target: &'a TimeSeries) -> Result<(&'a [f64], &'a [f64])> {
    let (s, t) = (source.values()?, target.values()?);
    if s.len() != t.len() {
        return Err(Error::LengthMismatch { left: s.len(), right: t.len() });
    }
    Ok((s, t))
}

fn blend(s: &[f64], t: &[f64], alpha: f64) -> Vec<f64> {
    s.iter().zip(t).map(|(a, b)| a + alpha * (b - a)).collect()
}

/// A single morph step for an arbitrary `alpha` in `[0, 1]`.
pub fn morph_at(source: &TimeSeries, target: &TimeSeries, alpha: f64) -> Result<TimeSeries> {
    let (s, t) = check_pair(source, target)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if alpha == 0.0 {
        return Ok(source.clone());
    }
    if alpha == 1.0 {
        return Ok(target.clone());
    }
    Ok(TimeSeries::from_finite(blend(s, t, alpha), None))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphStep {
    pub alpha: f64,
    pub series: TimeSeries,
}

/// The `n` series obtained by morphing a source into a target.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphSequence {
    pub source_id: String,
    pub target_id: String,
    pub steps: Vec<MorphStep>,
}

impl MorphSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.alpha).collect()
    }

    pub fn series_len(&self) -> usize {
        self.steps.first().map_or(0, |s| s.series.len())
    }

    pub fn meta(&self) -> MorphMeta {
        MorphMeta {
            source_id: self.source_id.clone(),
            target_id: self.target_id.clone(),
            n: self.len(),
            length: self.series_len(),
            alphas: self.alphas(),
        }
    }
}

/// Serializable summary of a morph run (`morph_meta.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphMeta {
    pub source_id: String,
    pub target_id: String,
    pub n: usize,
    pub length: usize,
    pub alphas: Vec<f64>,
}

fn step_id(source_id: &str, target_id: &str, i: usize) -> String {
    format!("{source_id}->{target_id}#{i}")
}

/// Morphs `source` into `target` in `n` equally spaced steps. Work is `O(T * n)`.
pub fn morph_pair(source: &TimeSeries, target: &TimeSeries, n: usize) -> Result<MorphSequence> {
    let alphas = alpha_schedule(n)?;
    let (s, t) = check_pair(source, target)?;
    let source_id = source.id().unwrap_or("source").to_string();
    let target_id = target.id().unwrap_or("target").to_string();
    let steps = alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let values = if i == 0 {
                s.to_vec()
            } else if i == n - 1 {
                t.to_vec()
            } else {
                blend(s, t, alpha)
            };
            MorphStep {
                alpha,
                series: TimeSeries::from_finite(values, Some(step_id(&source_id, &target_id, i))),
            }
        })
        .collect();
    Ok(MorphSequence { source_id, target_id, steps })
}

/// Same result as [`morph_pair`], with steps generated in parallel.
pub fn morph_pair_par(source: &TimeSeries, target: &TimeSeries, n: usize) -> Result<MorphSequence> {
    let alphas = alpha_schedule(n)?;
    let (s, t) = check_pair(source, target)?;
    let source_id = source.id().unwrap_or("source").to_string();
    let target_id = target.id().unwrap_or("target").to_string();
    let steps = alphas
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let values = match i {
                0 => s.to_vec(),
                i if i == n - 1 => t.to_vec(),
                _ => blend(s, t, alpha),
            };
            MorphStep {
                alpha,
                series: TimeSeries::from_finite(values, Some(step_id(&source_id, &target_id, i))),
            }
        })
        .collect();
    Ok(MorphSequence { source_id, target_id, steps })
}
