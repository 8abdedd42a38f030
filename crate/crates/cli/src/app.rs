//! Argument parsing and subcommand implementations.
//!
//! Exit codes: 0 success, 2 usage or input validation, 3 runtime failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use thiserror::Error;
use tsmorph_core::analysis::{run_experiment, ExperimentConfig, MorphAnalysisReport};
use tsmorph_core::features::extract_features_values;
use tsmorph_core::{evaluate, interpolate_missing, morph_pair, split, EvaluationRecord, ForecasterSpec, TimeSeries};

use crate::corpus::{load_corpus, load_files, read_series_csv, write_series_csv, Corpus, CorpusError, CorpusFormat};
use crate::plot::{render_svg, PlotError, PlotSpec, Rgb};
use crate::synth::{generate, SynthKind, SynthParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PlotError> for CliError {
    fn from(e: PlotError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Core errors caused by bad input or configuration are validation errors;
/// the rest arise while running the pipeline.
impl From<tsmorph_core::Error> for CliError {
    fn from(e: tsmorph_core::Error) -> Self {
        use tsmorph_core::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::InvalidCount(_)
            | E::AlphaOutOfRange(_)
            | E::LengthMismatch { .. }
            | E::MixedLengths { .. }
            | E::Incomplete { .. }
            | E::AllMissing
            | E::EmptySeries
            | E::NonFinite { .. }
            | E::DuplicateId(_)
            | E::HorizonTooLarge { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "tsmorph", version, about = "Semi-synthetic time series by morphing, and forecasting performance analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Morph a source series into a target series.
    Morph(MorphArgs),
    /// Extract meta-features from series.
    Features(FeaturesArgs),
    /// Forecast and score the held-out tail of series.
    Evaluate(EvaluateArgs),
    /// Run the full ranking/morphing/correlation pipeline.
    Analyze(AnalyzeArgs),
    /// Render performance-understanding plots from a report.
    Plot(PlotArgs),
    /// Write a seeded synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    PerFile,
    Wide,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::PerFile => CorpusFormat::PerFile,
            FormatArg::Wide => CorpusFormat::Wide,
        }
    }
}

fn parse_kv(raw: &str) -> Result<(String, String), String> {
    let (k, v) = raw.split_once('=').ok_or_else(|| format!("expected key=value, got {raw:?}"))?;
    if k.trim().is_empty() {
        return Err(format!("empty key in {raw:?}"));
    }
    Ok((k.trim().to_string(), v.to_string()))
}

fn parse_rgb(raw: &str) -> Result<Rgb, String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected R,G,B, got {raw:?}"));
    }
    let mut out = [0u8; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.trim().parse().map_err(|_| format!("invalid colour component {p:?}"))?;
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Per-file CSV series (`t,value`).
    pub inputs: Vec<PathBuf>,
    /// Corpus directory (per-file) or wide CSV file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "per-file")]
    pub format: FormatArg,
    /// Fill missing values by linear interpolation.
    #[arg(long)]
    pub interpolate: bool,
}

impl InputArgs {
    fn load(&self) -> Result<Corpus, CliError> {
        let mut corpus = match &self.corpus {
            Some(path) => load_corpus(path, self.format.into(), self.interpolate)?,
            None if self.inputs.is_empty() => {
                return Err(CliError::Validation("no input series: pass files or --corpus".into()))
            }
            None => load_files(&self.inputs, self.interpolate)?,
        };
        if self.corpus.is_some() && !self.inputs.is_empty() {
            let extra = load_files(&self.inputs, self.interpolate)?;
            for (entry, s) in extra.manifest.entries.into_iter().zip(extra.series) {
                if corpus.manifest.entries.iter().any(|e| e.id == entry.id) {
                    return Err(CorpusError::DuplicateId(entry.id).into());
                }
                corpus.manifest.entries.push(entry);
                corpus.series.push(s);
            }
        }
        Ok(corpus)
    }
}

#[derive(Debug, Args)]
pub struct ForecasterArgs {
    /// naive | seasonal_naive | local_mean | ses | ar | external
    #[arg(long)]
    pub forecaster: String,
    /// Forecaster parameter, e.g. m=7, k=3, alpha=0.3, p=2, command=...
    #[arg(long = "param", value_parser = parse_kv)]
    pub params: Vec<(String, String)>,
}

impl ForecasterArgs {
    fn spec(&self) -> Result<ForecasterSpec, CliError> {
        Ok(ForecasterSpec::from_params(&self.forecaster, &self.params)?)
    }
}

#[derive(Debug, Args)]
pub struct MorphArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    /// Number of series to emit, endpoints included.
    #[arg(short = 'n')]
    pub n: usize,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    #[arg(long)]
    pub interpolate: bool,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Drop the last H values before extracting (features from the train part).
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub forecaster: ForecasterArgs,
    #[arg(long)]
    pub horizon: usize,
    /// MASE seasonal period of the scaling denominator.
    #[arg(long, default_value_t = 1)]
    pub season: usize,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "per-file")]
    pub format: FormatArg,
    #[command(flatten)]
    pub forecaster: ForecasterArgs,
    #[arg(long)]
    pub horizon: usize,
    #[arg(long)]
    pub season: usize,
    /// Morph steps per pair, endpoints included.
    #[arg(short = 'n')]
    pub n: usize,
    /// Number of source series paired with the target.
    #[arg(long)]
    pub pairs: usize,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per CPU).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub interpolate: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub report: PathBuf,
    /// Feature to plot; repeat for several. Defaults to every feature.
    #[arg(long)]
    pub feature: Vec<String>,
    /// Output directory; one `<feature>.svg` per feature.
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 420)]
    pub height: u32,
    #[arg(long, default_value_t = 4.0)]
    pub marker_size: f64,
    /// Marker fill for the lowest relative MASE, as R,G,B.
    #[arg(long, value_parser = parse_rgb, default_value = "68,1,84")]
    pub low_color: Rgb,
    /// Marker fill for the highest relative MASE, as R,G,B.
    #[arg(long, value_parser = parse_rgb, default_value = "253,231,37")]
    pub high_color: Rgb,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub length: usize,
    #[arg(long)]
    pub seed: u64,
    /// Generator parameter: period_min, period_max, period, amplitude, phi, sigma, slope.
    #[arg(long = "param", value_parser = parse_kv)]
    pub params: Vec<(String, String)>,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Runtime(e.to_string()))
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn prepare(series: TimeSeries, interpolate: bool) -> Result<TimeSeries, CliError> {
    Ok(if interpolate { interpolate_missing(&series)? } else { series })
}

pub fn cmd_morph(args: &MorphArgs) -> Result<(), CliError> {
    let source = prepare(read_series_csv(&args.source)?, args.interpolate)?;
    let target = prepare(read_series_csv(&args.target)?, args.interpolate)?;
    let sequence = morph_pair(&source, &target, args.n)?;
    ensure_dir(&args.output)?;
    for (i, step) in sequence.steps.iter().enumerate() {
        write_series_csv(&args.output.join(format!("step_{i:03}.csv")), &step.series)?;
    }
    let meta_path = args.output.join("morph_meta.json");
    fs::write(&meta_path, to_json(&sequence.meta())).map_err(|e| io_error(&meta_path, e))
}

pub fn cmd_features(args: &FeaturesArgs) -> Result<(), CliError> {
    let corpus = args.input.load()?;
    let mut out: IndexMap<String, tsmorph_core::FeatureVector> = IndexMap::new();
    for (entry, series) in corpus.manifest.entries.iter().zip(&corpus.series) {
        let part = match args.horizon {
            Some(h) => split(series, h)?.train,
            None => series.clone(),
        };
        let fv = extract_features_values(&entry.id, part.values()?)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", entry.id)))?;
        out.insert(entry.id.clone(), fv);
    }
    write_text(args.output.as_deref(), &to_json(&out))
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let spec = args.forecaster.spec()?;
    let corpus = args.input.load()?;
    let mut records: Vec<EvaluationRecord> = Vec::with_capacity(corpus.series.len());
    for series in &corpus.series {
        let id = series.id().unwrap_or_default().to_string();
        let rec = evaluate(&spec, series, args.horizon, args.season).map_err(|e| match CliError::from(e) {
            CliError::Validation(m) => CliError::Validation(format!("{id}: {m}")),
            CliError::Runtime(m) => CliError::Runtime(format!("{id}: {m}")),
        })?;
        records.push(rec);
    }
    write_text(args.output.as_deref(), &to_json(&records))
}

pub fn analyze(args: &AnalyzeArgs) -> Result<MorphAnalysisReport, CliError> {
    let spec = args.forecaster.spec()?;
    let corpus = load_corpus(&args.corpus, args.format.into(), args.interpolate)?;
    let config = ExperimentConfig {
        forecaster: spec,
        horizon: args.horizon,
        season: args.season,
        n: args.n,
        pairs: args.pairs,
        seed: args.seed,
    };
    Ok(run_experiment(&corpus.series, &config, args.jobs)?)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let report = analyze(args)?;
    write_text(Some(&args.output), &report.to_json())
}

/// File name used for a feature's plot.
pub fn plot_file_name(feature: &str) -> String {
    let safe: String = feature
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect();
    format!("{safe}.svg")
}

pub fn cmd_plot(args: &PlotArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.report).map_err(|e| io_error(&args.report, e))?;
    let report = MorphAnalysisReport::from_json(&text)
        .map_err(|e| CliError::from(PlotError::MalformedReport(e.to_string())))?;
    let features = if args.feature.is_empty() { report.feature_names() } else { args.feature.clone() };
    let mut rendered = Vec::with_capacity(features.len());
    for feature in features {
        let spec = PlotSpec {
            feature,
            marker_size: args.marker_size,
            width: args.width,
            height: args.height,
            low_color: args.low_color,
            high_color: args.high_color,
        };
        rendered.push((plot_file_name(&spec.feature), render_svg(&report, &spec)?));
    }
    ensure_dir(&args.output)?;
    for (name, svg) in rendered {
        let path = args.output.join(name);
        fs::write(&path, svg).map_err(|e| io_error(&path, e))?;
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let mut params = SynthParams::default();
    params.apply(&args.params).map_err(|e| CliError::Validation(e.to_string()))?;
    let corpus = generate(args.kind, args.count, args.length, args.seed, &params)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    ensure_dir(&args.output)?;
    for (i, values) in corpus.into_iter().enumerate() {
        let series = TimeSeries::new(values)?;
        write_series_csv(&args.output.join(format!("series_{i:03}.csv")), &series)?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Morph(a) => cmd_morph(a),
        Command::Features(a) => cmd_features(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
/// Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("tsmorph: {e}");
            e.exit_code()
        }
    }
}
