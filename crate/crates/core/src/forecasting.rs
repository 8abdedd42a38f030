//! Baseline forecasters, the external-forecaster bridge and MASE evaluation.

use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use crate::error::{Error, Result};
use crate::series::{split, TimeSeries};

/// Environment variable carrying the horizon to an external forecaster.
pub const HORIZON_ENV: &str = "TSMORPH_HORIZON";
pub const DEFAULT_TIMEOUT_SECS: u64 = 300;

/// A forecasting method and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ForecasterSpec {
    Naive,
    SeasonalNaive { m: usize },
    LocalMean { k: usize },
    Ses { alpha: f64 },
    Ar { p: usize },
    External { command: String, timeout_secs: u64 },
}

impl ForecasterSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ForecasterSpec::Naive => "naive",
            ForecasterSpec::SeasonalNaive { .. } => "seasonal_naive",
            ForecasterSpec::LocalMean { .. } => "local_mean",
            ForecasterSpec::Ses { .. } => "ses",
            ForecasterSpec::Ar { .. } => "ar",
            ForecasterSpec::External { .. } => "external",
        }
    }

    /// Builds a spec from a kind name and `key=value` parameters.
    ///
    /// Keys: `m` (season), `k` (window), `alpha` (smoothing), `p` (AR order),
    /// `command` and `timeout` (external). Missing keys take defaults
    /// (`m=1`, `k=3`, `alpha=0.5`, `p=1`, `timeout=300`); `command` is required.
    pub fn from_params(kind: &str, params: &[(String, String)]) -> Result<Self> {
        let lookup = |key: &str| params.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let allowed: &[&str] = match kind {
            "naive" => &[],
            "seasonal_naive" => &["m"],
            "local_mean" => &["k"],
            "ses" => &["alpha"],
            "ar" => &["p"],
            "external" => &["command", "timeout"],
            other => return Err(Error::InvalidParameter(format!("unknown forecaster kind {other:?}"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("parameter {k:?} not accepted by {kind}")));
        }
        fn parse<T: std::str::FromStr>(key: &str, raw: Option<&str>, default: T) -> Result<T> {
            match raw {
                None => Ok(default),
                Some(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("{key}={v} is not a valid value"))),
            }
        }
        let spec = match kind {
            "naive" => ForecasterSpec::Naive,
            "seasonal_naive" => ForecasterSpec::SeasonalNaive { m: parse("m", lookup("m"), 1)? },
            "local_mean" => ForecasterSpec::LocalMean { k: parse("k", lookup("k"), 3)? },
            "ses" => ForecasterSpec::Ses { alpha: parse("alpha", lookup("alpha"), 0.5)? },
            "ar" => ForecasterSpec::Ar { p: parse("p", lookup("p"), 1)? },
            _ => ForecasterSpec::External {
                command: lookup("command")
                    .ok_or_else(|| Error::InvalidParameter("external forecaster needs command=<cmd>".into()))?
                    .to_string(),
                timeout_secs: parse("timeout", lookup("timeout"), DEFAULT_TIMEOUT_SECS)?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        match self {
            ForecasterSpec::SeasonalNaive { m } if *m < 1 => bad("season m must be >= 1"),
            ForecasterSpec::LocalMean { k } if *k < 1 => bad("window k must be >= 1"),
            ForecasterSpec::Ses { alpha } if !(*alpha > 0.0 && *alpha <= 1.0) => bad("alpha must lie in (0, 1]"),
            ForecasterSpec::Ar { p } if *p < 1 => bad("AR order p must be >= 1"),
            ForecasterSpec::External { command, timeout_secs } => {
                if command.trim().is_empty() {
                    bad("external command is empty")
                } else if *timeout_secs == 0 {
                    bad("timeout must be positive")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Result of forecasting the held-out tail of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub series_id: String,
    pub forecaster: ForecasterSpec,
    pub horizon: usize,
    pub season: usize,
    pub forecasts: Vec<f64>,
    pub mase: f64,
}

fn need(train: &[f64], needed: usize) -> Result<()> {
    if train.len() < needed {
        return Err(Error::TrainTooShort { needed, got: train.len() });
    }
    Ok(())
}

fn seasonal_naive(train: &[f64], m: usize, horizon: usize) -> Vec<f64> {
    let len = train.len();
    (1..=horizon)
        .map(|h| train[len + h - m * h.div_ceil(m) - 1])
        .collect()
}

fn ses(train: &[f64], alpha: f64, horizon: usize) -> Vec<f64> {
    let beta = 1.0 - alpha;
    let level = train[1..].iter().fold(train[0], |level, y| alpha * y + beta * level);
    vec![level; horizon]
}

/// Least-squares AR(p) fit with intercept. Returns `[c, phi_1, ..., phi_p]`.
pub fn fit_ar(train: &[f64], p: usize) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::InvalidParameter("AR order p must be >= 1".into()));
    }
    need(train, p + 1)?;
    let rows = train.len() - p;
    if rows < p + 1 {
        return Err(Error::SingularFit);
    }
    let design = DMatrix::from_fn(rows, p + 1, |r, c| if c == 0 { 1.0 } else { train[p + r - c] });
    let response = DVector::from_iterator(rows, train[p..].iter().copied());
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax.is_nan() || smax <= 0.0 || smin <= smax * 1e-10 {
        return Err(Error::SingularFit);
    }
    let coef = svd.solve(&response, 0.0).map_err(|_| Error::SingularFit)?;
    let coef: Vec<f64> = coef.iter().copied().collect();
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(Error::SingularFit);
    }
    Ok(coef)
}

fn ar(train: &[f64], p: usize, horizon: usize) -> Result<Vec<f64>> {
    let coef = fit_ar(train, p)?;
    let mut history: Vec<f64> = train[train.len() - p..].to_vec();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let len = history.len();
        let next = coef[0] + (1..=p).map(|j| coef[j] * history[len - j]).sum::<f64>();
        history.push(next);
        out.push(next);
    }
    Ok(out)
}

/// Forecasts `horizon` values after the end of `train`.
pub fn forecast(spec: &ForecasterSpec, train: &TimeSeries, horizon: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let y = train.values()?;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let out = match spec {
        ForecasterSpec::Naive => vec![y[y.len() - 1]; horizon],
        ForecasterSpec::SeasonalNaive { m } => {
            need(y, *m)?;
            seasonal_naive(y, *m, horizon)
        }
        ForecasterSpec::LocalMean { k } => {
            need(y, *k)?;
            let tail = &y[y.len() - k..];
            vec![tail.iter().sum::<f64>() / *k as f64; horizon]
        }
        ForecasterSpec::Ses { alpha } => ses(y, *alpha, horizon),
        ForecasterSpec::Ar { p } => ar(y, *p, horizon)?,
        ForecasterSpec::External { command, timeout_secs } => {
            external_forecast(command, train, horizon, Duration::from_secs(*timeout_secs))?
        }
    };
    if let Some((index, &value)) = out.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    Ok(out)
}

/// Mean absolute scaled error. The scale is the in-sample MAE of the
/// seasonal-naive forecast with period `m` on the training data.
pub fn mase(actual: &[f64], forecasts: &[f64], train: &[f64], m: usize) -> Result<f64> {
    if actual.len() != forecasts.len() {
        return Err(Error::LengthMismatch { left: actual.len(), right: forecasts.len() });
    }
    if actual.is_empty() {
        return Err(Error::InvalidParameter("no forecasts to score".into()));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("season m must be >= 1".into()));
    }
    if train.len() <= m {
        return Err(Error::TrainTooShort { needed: m + 1, got: train.len() });
    }
    let scale = train[m..]
        .iter()
        .zip(train)
        .map(|(now, before)| (now - before).abs())
        .sum::<f64>()
        / (train.len() - m) as f64;
    if scale == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let mae = actual
        .iter()
        .zip(forecasts)
        .map(|(a, f)| (a - f).abs())
        .sum::<f64>()
        / actual.len() as f64;
    let value = mae / scale;
    if !value.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    Ok(value)
}

/// Splits off the last `horizon` values, forecasts them from the remainder and
/// scores the forecast. The forecaster only ever sees the training part.
pub fn evaluate(spec: &ForecasterSpec, series: &TimeSeries, horizon: usize, season: usize) -> Result<EvaluationRecord> {
    let parts = split(series, horizon)?;
    let forecasts = forecast(spec, &parts.train, horizon)?;
    let score = mase(parts.test.values()?, &forecasts, parts.train.values()?, season)?;
    Ok(EvaluationRecord {
        series_id: series.id().unwrap_or("").to_string(),
        forecaster: spec.clone(),
        horizon,
        season,
        forecasts,
        mase: score,
    })
}

/// Training data as the `t,value` CSV sent to external forecasters.
pub fn train_csv(train: &[f64]) -> String {
    let mut out = String::with_capacity(8 + train.len() * 20);
    out.push_str("t,value\n");
    for (t, v) in train.iter().enumerate() {
        out.push_str(&format!("{t},{v}\n"));
    }
    out
}

/// Runs `command` through `sh -c`, feeding the training CSV on stdin and the
/// horizon in `TSMORPH_HORIZON`; expects exactly `horizon` numeric lines back.
pub fn external_forecast(command: &str, train: &TimeSeries, horizon: usize, timeout: Duration) -> Result<Vec<f64>> {
    let payload = train_csv(train.values()?);
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .env(HORIZON_ENV, horizon.to_string())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::ProcessFailure(format!("cannot spawn {command:?}: {e}")))?;

    let mut stdin = child.stdin.take().expect("stdin is piped");
    let writer = thread::spawn(move || {
        // The child may exit without reading; a broken pipe is not our error.
        let _ = stdin.write_all(payload.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let reader = thread::spawn(move || {
        let mut buf = String::new();
        stdout.read_to_string(&mut buf).map(|_| buf)
    });
    let mut stderr = child.stderr.take().expect("stderr is piped");
    let err_reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let status = match child
        .wait_timeout(timeout)
        .map_err(|e| Error::ProcessFailure(e.to_string()))?
    {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Timeout(timeout.as_secs()));
        }
    };
    let _ = writer.join();
    let output = reader
        .join()
        .map_err(|_| Error::ProcessFailure("stdout reader panicked".into()))?
        .map_err(|e| Error::ProtocolError(format!("unreadable output: {e}")))?;
    let diagnostics = err_reader.join().unwrap_or_default();
    if !status.success() {
        let tail = diagnostics.lines().last().unwrap_or("").trim();
        return Err(Error::ProcessFailure(format!("{status}{}{tail}", if tail.is_empty() { "" } else { ": " })));
    }
    parse_forecast_lines(output.as_bytes(), horizon)
}

fn parse_forecast_lines(output: &[u8], horizon: usize) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(horizon);
    let lines: Vec<String> = BufReader::new(output)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::ProtocolError(e.to_string()))?;
    let mut lines: &[String] = &lines;
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines = &lines[..lines.len() - 1];
    }
    if lines.len() != horizon {
        return Err(Error::ProtocolError(format!("expected {horizon} lines, got {}", lines.len())));
    }
    for (i, line) in lines.iter().enumerate() {
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::ProtocolError(format!("line {} is not a number: {line:?}", i + 1)))?;
        if !v.is_finite() {
            return Err(Error::ProtocolError(format!("line {} is not finite: {line:?}", i + 1)));
        }
        values.push(v);
    }
    Ok(values)
}
