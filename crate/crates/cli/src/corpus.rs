//! Corpus ingestion and CSV output.
//!
//! Two layouts are read:
//! * per-file: one CSV per series with header `t,value`; an empty value is a
//!   missing observation and the file stem is the series id;
//! * wide: a single CSV whose header lists series ids, one column per series.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tsmorph_core::{interpolate_missing, TimeSeries};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{file}:{line}:{column}: {message}")]
    Parse { file: PathBuf, line: u64, column: usize, message: String },
    #[error("duplicate series id {0:?}")]
    DuplicateId(String),
    #[error("{0}: file contains no observations")]
    EmptyFile(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Series(#[from] tsmorph_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    PerFile,
    Wide,
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::PerFile => "per-file",
            CorpusFormat::Wide => "wide",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    pub length: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub format: CorpusFormat,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest: CorpusManifest,
    pub series: Vec<TimeSeries>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

fn parse_err(file: &Path, line: u64, column: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Parse { file: file.to_path_buf(), line, column, message: message.into() }
}

fn csv_err(file: &Path, err: csv::Error) -> CorpusError {
    let line = err.position().map_or(0, |p| p.line());
    parse_err(file, line, 1, err.to_string())
}

fn parse_slot(file: &Path, line: u64, column: usize, raw: &str) -> Result<Option<f64>, CorpusError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) => Err(parse_err(file, line, column, format!("non-finite value {raw:?}"))),
        Err(_) => Err(parse_err(file, line, column, format!("invalid number {raw:?}"))),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>, CorpusError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file))
}

fn file_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Reads one per-file CSV (`t,value`).
pub fn read_series_csv(path: &Path) -> Result<TimeSeries, CorpusError> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.is_empty() {
        return Err(CorpusError::EmptyFile(path.to_path_buf()));
    }
    let names: Vec<&str> = headers.iter().collect();
    if names != ["t", "value"] {
        return Err(parse_err(path, 1, 1, format!("expected header `t,value`, found `{}`", names.join(","))));
    }
    let mut slots = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record[0].parse::<i64>().is_err() {
            return Err(parse_err(path, line, 1, format!("invalid time index {:?}", &record[0])));
        }
        slots.push(parse_slot(path, line, 2, &record[1])?);
    }
    if slots.is_empty() {
        return Err(CorpusError::EmptyFile(path.to_path_buf()));
    }
    Ok(TimeSeries::with_missing(slots)?.with_id(file_id(path)))
}

/// Reads a wide CSV: header row of ids, one column per series.
pub fn read_wide_csv(path: &Path) -> Result<Vec<TimeSeries>, CorpusError> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(CorpusError::EmptyFile(path.to_path_buf()));
    }
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); headers.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for (c, raw) in record.iter().enumerate() {
            columns[c].push(parse_slot(path, line, c + 1, raw)?);
        }
    }
    if columns[0].is_empty() {
        return Err(CorpusError::EmptyFile(path.to_path_buf()));
    }
    headers
        .iter()
        .zip(columns)
        .map(|(id, slots)| Ok(TimeSeries::with_missing(slots)?.with_id(id)))
        .collect()
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads a corpus. For `PerFile`, `path` is a directory (every `*.csv`, in
/// name order) or a single file. When `interpolate` is set, missing values are
/// filled; otherwise they are preserved.
pub fn load_corpus(path: &Path, format: CorpusFormat, interpolate: bool) -> Result<Corpus, CorpusError> {
    let loaded: Vec<(PathBuf, TimeSeries)> = match format {
        CorpusFormat::PerFile if path.is_dir() => csv_files(path)?
            .into_iter()
            .map(|f| read_series_csv(&f).map(|s| (f, s)))
            .collect::<Result<_, _>>()?,
        CorpusFormat::PerFile => vec![(path.to_path_buf(), read_series_csv(path)?)],
        CorpusFormat::Wide => read_wide_csv(path)?.into_iter().map(|s| (path.to_path_buf(), s)).collect(),
    };
    if loaded.is_empty() {
        return Err(CorpusError::EmptyFile(path.to_path_buf()));
    }
    let mut seen = std::collections::HashSet::new();
    let mut entries = Vec::with_capacity(loaded.len());
    let mut series = Vec::with_capacity(loaded.len());
    for (file, s) in loaded {
        let id = s.id().unwrap_or_default().to_string();
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        entries.push(ManifestEntry { id, path: file, length: s.len(), missing: s.missing_count() });
        series.push(if interpolate { interpolate_missing(&s)? } else { s });
    }
    Ok(Corpus { manifest: CorpusManifest { format, entries }, series })
}

/// Loads explicit per-file CSV paths.
pub fn load_files(paths: &[PathBuf], interpolate: bool) -> Result<Corpus, CorpusError> {
    let mut parts = Vec::with_capacity(paths.len());
    for p in paths {
        parts.push(load_corpus(p, CorpusFormat::PerFile, interpolate)?);
    }
    let mut seen = std::collections::HashSet::new();
    let mut manifest = CorpusManifest { format: CorpusFormat::PerFile, entries: Vec::new() };
    let mut series = Vec::new();
    for part in parts {
        for (entry, s) in part.manifest.entries.into_iter().zip(part.series) {
            if !seen.insert(entry.id.clone()) {
                return Err(CorpusError::DuplicateId(entry.id));
            }
            manifest.entries.push(entry);
            series.push(s);
        }
    }
    Ok(Corpus { manifest, series })
}

/// `t,value` CSV text. Values use the shortest decimal form that parses back
/// to the same binary64; missing slots are empty.
pub fn series_csv(series: &TimeSeries) -> String {
    let mut out = String::from("t,value\n");
    for (t, slot) in series.slots().enumerate() {
        match slot {
            Some(v) => out.push_str(&format!("{t},{v}\n")),
            None => out.push_str(&format!("{t},\n")),
        }
    }
    out
}

pub fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<(), CorpusError> {
    fs::write(path, series_csv(series)).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn loads_directory_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "b.csv", "t,value\n0,1\n1,2\n");
        write(dir.path(), "a.csv", "t,value\n0,3\n1,\n2,5\n");
        write(dir.path(), "c.csv", "t,value\n0,1.5\n");
        write(dir.path(), "notes.txt", "ignored");
        let c = load_corpus(dir.path(), CorpusFormat::PerFile, false).unwrap();
        let ids: Vec<&str> = c.manifest.entries.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(c.manifest.entries[0].missing, 1);
        assert_eq!(c.manifest.entries[0].length, 3);
        assert_eq!(c.series[0].get(1), None);

        let c = load_corpus(dir.path(), CorpusFormat::PerFile, true).unwrap();
        assert_eq!(c.series[0].values().unwrap(), &[3.0, 4.0, 5.0]);
    }

    #[test]
    fn parse_error_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.csv", "t,value\n1,1.0\n2,2.0\n3,3.0\n4,abc\n");
        let err = read_series_csv(&p).unwrap_err();
        match &err {
            CorpusError::Parse { line, column, .. } => assert_eq!((*line, *column), (5, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains(":5:2:"));
    }

    #[test]
    fn rejects_empty_and_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let empty = write(dir.path(), "e.csv", "");
        assert!(matches!(read_series_csv(&empty), Err(CorpusError::EmptyFile(_))));
        let only_header = write(dir.path(), "h.csv", "t,value\n");
        assert!(matches!(read_series_csv(&only_header), Err(CorpusError::EmptyFile(_))));
        let bad = write(dir.path(), "x.csv", "time,v\n0,1\n");
        assert!(matches!(read_series_csv(&bad), Err(CorpusError::Parse { line: 1, .. })));
    }

    #[test]
    fn wide_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "w.csv", "x,y,z\n1,2,3\n4,,6\n7,8,9\n");
        let c = load_corpus(&p, CorpusFormat::Wide, false).unwrap();
        assert_eq!(c.series.len(), 3);
        assert_eq!(c.series[1].id(), Some("y"));
        assert_eq!(c.manifest.entries[1].missing, 1);
        assert_eq!(c.series[2].values().unwrap(), &[3.0, 6.0, 9.0]);

        let dup = write(dir.path(), "d.csv", "x,x\n1,2\n");
        assert!(matches!(load_corpus(&dup, CorpusFormat::Wide, false), Err(CorpusError::DuplicateId(_))));
    }

    #[test]
    fn wide_nn5_shape() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = (0..111).map(|i| format!("NN5-{i:03}")).collect::<Vec<_>>().join(",");
        text.push('\n');
        for r in 0..735 {
            let row: Vec<String> = (0..111).map(|c| if (r + c) % 97 == 0 { String::new() } else { format!("{}", r * c) }).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let p = write(dir.path(), "nn5.csv", &text);
        let c = load_corpus(&p, CorpusFormat::Wide, true).unwrap();
        assert_eq!(c.series.len(), 111);
        assert!(c.series.iter().all(|s| s.len() == 735 && s.is_complete()));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let values = vec![0.1, 1.0 / 3.0, -2.5e-300, 1e21, 123456789.12345679, 0.0];
        let s = TimeSeries::with_missing(values.iter().map(|v| Some(*v)).chain([None]).collect()).unwrap();
        let p = dir.path().join("r.csv");
        write_series_csv(&p, &s).unwrap();
        let back = read_series_csv(&p).unwrap();
        let got: Vec<Option<u64>> = back.slots().map(|v| v.map(f64::to_bits)).collect();
        let want: Vec<Option<u64>> = s.slots().map(|v| v.map(f64::to_bits)).collect();
        assert_eq!(got, want);
    }
}
