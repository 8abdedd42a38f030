//! Performance-understanding pipeline.
//!
//! A corpus is ranked by the MASE of one forecaster. The best `S` series
//! become sources and the worst becomes the target. Each source is morphed
//! into the target. Every step is then split into train and test: features
//! come from the train part and MASE from the test part. Per pair and per
//! feature, the Pearson correlation between feature values and MASE across
//! the steps is computed. These per-pair correlations are then summarised
//! by their mean and (population) standard deviation across pairs.

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features_values, FeatureVector, FEATURE_NAMES};
use crate::forecasting::{evaluate, EvaluationRecord, ForecasterSpec};
use crate::morph::{alpha_schedule, morph_pair};
use crate::series::{mean, pearson, split, TimeSeries};

pub const REPORT_SCHEMA: &str = "tsmorph-report/1";
/// Fewest valid steps for which a per-pair correlation is computed.
pub const MIN_VALID_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSeries {
    pub id: String,
    pub mase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFailure {
    pub id: String,
    pub kind: String,
    pub reason: String,
}

impl SeriesFailure {
    fn new(id: &str, err: &Error) -> Self {
        Self { id: id.to_string(), kind: err.kind().to_string(), reason: err.to_string() }
    }
}

/// Corpus ordered by ascending MASE, plus the series that could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub ranked: Vec<RankedSeries>,
    pub failures: Vec<SeriesFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSelection {
    pub sources: Vec<String>,
    pub target: String,
}

/// Id used for the series at `index` when it carries none.
pub fn series_label(series: &TimeSeries, index: usize) -> String {
    series.id().map_or_else(|| format!("series_{index:03}"), str::to_string)
}

fn labels(corpus: &[TimeSeries]) -> Result<Vec<String>> {
    let ids: Vec<String> = corpus.iter().enumerate().map(|(i, s)| series_label(s, i)).collect();
    let mut seen = std::collections::HashSet::new();
    for id in &ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(ids)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))
}

fn rank_with_ids(
    corpus: &[TimeSeries],
    ids: &[String],
    spec: &ForecasterSpec,
    horizon: usize,
    season: usize,
) -> Result<Ranking> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let results: Vec<Result<EvaluationRecord>> =
        corpus.par_iter().map(|s| evaluate(spec, s, horizon, season)).collect();
    let mut ranked = Vec::new();
    let mut failures = Vec::new();
    for (id, result) in ids.iter().zip(results) {
        match result {
            Ok(rec) => ranked.push(RankedSeries { id: id.clone(), mase: rec.mase }),
            Err(e) => failures.push(SeriesFailure::new(id, &e)),
        }
    }
    if ranked.is_empty() {
        return Err(Error::AllSeriesFailed);
    }
    ranked.sort_by(|a, b| a.mase.total_cmp(&b.mase).then_with(|| a.id.cmp(&b.id)));
    Ok(Ranking { ranked, failures })
}

/// Scores every series and sorts ascending by MASE (ties by id). Series that
/// fail to evaluate are reported in `failures` rather than aborting.
pub fn rank_by_mase(corpus: &[TimeSeries], spec: &ForecasterSpec, horizon: usize, season: usize) -> Result<Ranking> {
    let ids = labels(corpus)?;
    rank_with_ids(corpus, &ids, spec, horizon, season)
}

/// The `count` best-ranked series become sources, the worst the target.
pub fn select_pairs(ranking: &Ranking, count: usize) -> Result<PairSelection> {
    if count == 0 {
        return Err(Error::InvalidParameter("number of pairs must be at least 1".into()));
    }
    let ranked = &ranking.ranked;
    if ranked.len() < count + 1 {
        return Err(Error::CorpusTooSmall { needed: count + 1, got: ranked.len() });
    }
    Ok(PairSelection {
        sources: ranked[..count].iter().map(|r| r.id.clone()).collect(),
        target: ranked[ranked.len() - 1].id.clone(),
    })
}

/// An extra per-step measurement appended to the feature vector of each step.
///
/// Probes see the step's training values and its evaluation record. They are
/// how callers correlate custom quantities with MASE alongside the built-in
/// features.
pub trait StepProbe: Sync {
    fn name(&self) -> &str;
    fn measure(&self, train: &[f64], record: &EvaluationRecord) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub forecaster: ForecasterSpec,
    pub horizon: usize,
    pub season: usize,
    /// Number of morph steps per pair, endpoints included.
    pub n: usize,
    /// Number of source series (pairs).
    pub pairs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub step: usize,
    pub alpha: f64,
    pub features: FeatureVector,
    pub mase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepExclusion {
    pub step: usize,
    pub alpha: f64,
    pub kind: String,
    pub reason: String,
}

/// Rows of one source→target morph. `rows.len() + excluded_steps.len() == n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    pub source_id: String,
    pub target_id: String,
    pub rows: Vec<StepRow>,
    pub excluded_steps: Vec<StepExclusion>,
    /// Set when the pair has too few valid steps to correlate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excluded: Option<String>,
}

impl PairTable {
    pub fn mase_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mase).collect()
    }

    pub fn feature_values(&self, name: &str) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.features.get(name)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub source_id: String,
    pub pearson: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairExclusion {
    pub source_id: String,
    pub kind: String,
    pub reason: String,
}

/// Per-pair correlations of one feature with MASE and their summary across
/// pairs. `mean`/`std` are absent when no pair produced a correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub per_pair: Vec<PairCorrelation>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub exclusions: Vec<PairExclusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphAnalysisReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub series_length: usize,
    pub ranking: Ranking,
    pub selection: PairSelection,
    pub per_pair: Vec<PairTable>,
    pub correlations: IndexMap<String, FeatureCorrelation>,
    /// Feature names ordered by ascending correlation std, then descending
    /// |mean|, then name.
    pub selected_features: Vec<String>,
}

impl MorphAnalysisReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report is always serializable");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Names of every feature present in the report, in column order.
    pub fn feature_names(&self) -> Vec<String> {
        self.correlations.keys().cloned().collect()
    }
}

enum StepOutcome {
    Row(StepRow),
    Excluded(StepExclusion),
}

fn run_step(
    series: &TimeSeries,
    step: usize,
    alpha: f64,
    config: &ExperimentConfig,
    probes: &[&dyn StepProbe],
) -> StepOutcome {
    let attempt = || -> Result<StepRow> {
        let parts = split(series, config.horizon)?;
        let train = parts.train.values()?;
        let record = evaluate(&config.forecaster, series, config.horizon, config.season)?;
        let mut features = extract_features_values(series.id().unwrap_or(""), train)?;
        for probe in probes {
            let value = probe.measure(train, &record)?;
            if !value.is_finite() {
                return Err(Error::NonFinite { index: step, value });
            }
            features.insert(probe.name(), value);
        }
        Ok(StepRow { step, alpha, features, mase: record.mase })
    };
    match attempt() {
        Ok(row) => StepOutcome::Row(row),
        Err(e) => StepOutcome::Excluded(StepExclusion {
            step,
            alpha,
            kind: e.kind().to_string(),
            reason: e.to_string(),
        }),
    }
}

/// Runs the full pipeline with the built-in features only.
pub fn run_experiment(corpus: &[TimeSeries], config: &ExperimentConfig, jobs: usize) -> Result<MorphAnalysisReport> {
    run_experiment_with(corpus, config, jobs, &[])
}

/// Runs the full pipeline; `probes` add extra per-step columns. `jobs` bounds
/// worker threads (0 = one per CPU). Output does not depend on `jobs`.
pub fn run_experiment_with(
    corpus: &[TimeSeries],
    config: &ExperimentConfig,
    jobs: usize,
    probes: &[&dyn StepProbe],
) -> Result<MorphAnalysisReport> {
    config.forecaster.validate()?;
    if config.n < MIN_VALID_STEPS {
        return Err(Error::InvalidParameter(format!(
            "morph count n must be at least {MIN_VALID_STEPS}, got {}",
            config.n
        )));
    }
    if config.season == 0 {
        return Err(Error::InvalidParameter("season must be at least 1".into()));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let ids = labels(corpus)?;
    let first = corpus[0].len();
    if let Some(other) = corpus.iter().map(TimeSeries::len).find(|&l| l != first) {
        return Err(Error::MixedLengths { first, other });
    }
    for s in corpus {
        s.values()?;
    }
    let alphas = alpha_schedule(config.n)?;

    let workers = pool(jobs)?;
    workers.install(|| -> Result<MorphAnalysisReport> {
        let ranking = rank_with_ids(corpus, &ids, &config.forecaster, config.horizon, config.season)?;
        let selection = select_pairs(&ranking, config.pairs)?;
        let by_id = |id: &str| {
            let idx = ids.iter().position(|x| x == id).expect("selected ids come from the corpus");
            corpus[idx].clone().with_id(id)
        };
        let target = by_id(&selection.target);
        let sequences = selection
            .sources
            .iter()
            .map(|id| morph_pair(&by_id(id), &target, config.n))
            .collect::<Result<Vec<_>>>()?;

        let tasks: Vec<(usize, usize)> = (0..sequences.len())
            .flat_map(|p| (0..config.n).map(move |i| (p, i)))
            .collect();
        let outcomes: Vec<StepOutcome> = tasks
            .par_iter()
            .map(|&(p, i)| run_step(&sequences[p].steps[i].series, i, alphas[i], config, probes))
            .collect();

        let mut outcomes = outcomes.into_iter();
        let per_pair: Vec<PairTable> = sequences
            .iter()
            .map(|seq| {
                let mut table = PairTable {
                    source_id: seq.source_id.clone(),
                    target_id: seq.target_id.clone(),
                    rows: Vec::new(),
                    excluded_steps: Vec::new(),
                    excluded: None,
                };
                for outcome in outcomes.by_ref().take(config.n) {
                    match outcome {
                        StepOutcome::Row(r) => table.rows.push(r),
                        StepOutcome::Excluded(x) => table.excluded_steps.push(x),
                    }
                }
                if table.rows.len() < MIN_VALID_STEPS {
                    table.excluded = Some(
                        Error::TooShort { needed: MIN_VALID_STEPS, got: table.rows.len() }.to_string(),
                    );
                }
                table
            })
            .collect();

        let mut names: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
        names.extend(probes.iter().map(|p| p.name().to_string()));
        let (correlations, selected_features) = correlate(&per_pair, &names);

        Ok(MorphAnalysisReport {
            schema: REPORT_SCHEMA.to_string(),
            config: config.clone(),
            series_length: first,
            ranking,
            selection,
            per_pair,
            correlations,
            selected_features,
        })
    })
}

/// Per-pair Pearson correlations of each feature with MASE, their mean/std
/// across pairs, and the resulting feature ordering.
pub fn correlate(pairs: &[PairTable], names: &[String]) -> (IndexMap<String, FeatureCorrelation>, Vec<String>) {
    let mut correlations = IndexMap::new();
    for name in names {
        let mut fc = FeatureCorrelation { per_pair: Vec::new(), mean: None, std: None, exclusions: Vec::new() };
        for table in pairs {
            let exclude = |fc: &mut FeatureCorrelation, err: Error| {
                fc.exclusions.push(PairExclusion {
                    source_id: table.source_id.clone(),
                    kind: err.kind().to_string(),
                    reason: err.to_string(),
                })
            };
            if table.rows.len() < MIN_VALID_STEPS {
                exclude(&mut fc, Error::TooShort { needed: MIN_VALID_STEPS, got: table.rows.len() });
                continue;
            }
            let Some(values) = table.feature_values(name) else {
                exclude(&mut fc, Error::InvalidParameter(format!("feature {name:?} missing from rows")));
                continue;
            };
            match pearson(&values, &table.mase_values()) {
                Ok(r) => fc.per_pair.push(PairCorrelation { source_id: table.source_id.clone(), pearson: r }),
                Err(e) => exclude(&mut fc, e),
            }
        }
        if !fc.per_pair.is_empty() {
            let rs: Vec<f64> = fc.per_pair.iter().map(|c| c.pearson).collect();
            let m = mean(&rs);
            let var = rs.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / rs.len() as f64;
            fc.mean = Some(m);
            fc.std = Some(var.sqrt());
        }
        correlations.insert(name.clone(), fc);
    }
    let selected = rank_features(&correlations);
    (correlations, selected)
}

fn rank_features(correlations: &IndexMap<String, FeatureCorrelation>) -> Vec<String> {
    let mut scored: Vec<(&String, f64, f64)> = correlations
        .iter()
        .filter_map(|(name, fc)| Some((name, fc.mean?, fc.std?)))
        .collect();
    scored.sort_by(|a, b| {
        a.2.total_cmp(&b.2)
            .then_with(|| b.1.abs().total_cmp(&a.1.abs()))
            .then_with(|| a.0.cmp(b.0))
    });
    scored.into_iter().map(|(n, _, _)| n.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopFeature {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

/// The `k` features whose correlation with MASE is most stable across pairs.
pub fn top_features(report: &MorphAnalysisReport, k: usize) -> Result<Vec<TopFeature>> {
    if report.selected_features.len() < k {
        return Err(Error::NotEnoughFeatures { requested: k, available: report.selected_features.len() });
    }
    Ok(report.selected_features[..k]
        .iter()
        .map(|name| {
            let fc = &report.correlations[name];
            TopFeature {
                name: name.clone(),
                mean: fc.mean.expect("selected features have statistics"),
                std: fc.std.expect("selected features have statistics"),
            }
        })
        .collect())
}

/// Min-max normalised MASE over the valid steps of one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeMase {
    pub source_id: String,
    pub steps: Vec<usize>,
    pub values: Vec<f64>,
    /// All step MASEs were equal; every value is 0.5.
    pub degenerate: bool,
}

pub fn normalize_min_max(values: &[f64]) -> (Vec<f64>, bool) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || hi <= lo {
        return (vec![0.5; values.len()], true);
    }
    let span = hi - lo;
    (values.iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect(), false)
}

pub fn relative_mase(report: &MorphAnalysisReport) -> Vec<RelativeMase> {
    report
        .per_pair
        .iter()
        .map(|table| {
            let (values, degenerate) = normalize_min_max(&table.mase_values());
            RelativeMase {
                source_id: table.source_id.clone(),
                steps: table.rows.iter().map(|r| r.step).collect(),
                values,
                degenerate,
            }
        })
        .collect()
}
