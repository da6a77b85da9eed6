//! Report files: JSONL records, CSV exports, summary tables and scatter data.
//!
//! Everything is rendered in memory first so an unwritable destination fails
//! before any file is touched; each file is then written to a temporary name
//! and renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::ClassifierKind;
use crate::harness::record::ResultRecord;
use crate::sim::{ExperimentVersion, VersionKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Jsonl,
    Csv,
    Table,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(ReportFormat::Jsonl),
            "csv" => Ok(ReportFormat::Csv),
            "table" => Ok(ReportFormat::Table),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

pub fn sort_records(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn to_jsonl(records: &[ResultRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn from_jsonl(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

pub fn read_jsonl(path: &Path) -> Result<Vec<ResultRecord>> {
    if !path.is_file() {
        return Err(Error::NotFound(path.to_path_buf()));
    }
    from_jsonl(&std::fs::read_to_string(path)?)
}

/// Flat CSV form of a record; vectors are `;`-separated.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    dataset: String,
    version: String,
    kind: VersionKind,
    compression: bool,
    classifier: ClassifierKind,
    agents: usize,
    dim: usize,
    lambda: f64,
    kappa: u32,
    seeds: usize,
    master_seed: u64,
    mean: f64,
    std: f64,
    per_seed_accuracy: String,
    per_agent_accuracy: String,
    payload_values_per_producer: usize,
    payload_bytes: usize,
    wall_time_ms: Option<u64>,
    config_hash: String,
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn split_values(s: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|v| {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number '{v}' in CSV list")))
        })
        .collect()
}

pub fn to_csv(records: &[ResultRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow {
            dataset: r.dataset.clone(),
            version: r.version.clone(),
            kind: r.kind,
            compression: r.compression,
            classifier: r.classifier,
            agents: r.agents,
            dim: r.dim,
            lambda: r.lambda,
            kappa: r.kappa,
            seeds: r.seeds,
            master_seed: r.master_seed,
            mean: r.mean,
            std: r.std,
            per_seed_accuracy: join(&r.per_seed_accuracy),
            per_agent_accuracy: join(&r.per_agent_accuracy),
            payload_values_per_producer: r.payload_values_per_producer,
            payload_bytes: r.payload_bytes,
            wall_time_ms: r.wall_time_ms,
            config_hash: r.config_hash.clone(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize::<CsvRow>()
        .map(|row| {
            let r = row?;
            Ok(ResultRecord {
                dataset: r.dataset,
                version: r.version,
                kind: r.kind,
                compression: r.compression,
                classifier: r.classifier,
                agents: r.agents,
                dim: r.dim,
                lambda: r.lambda,
                kappa: r.kappa,
                seeds: r.seeds,
                master_seed: r.master_seed,
                per_seed_accuracy: split_values(&r.per_seed_accuracy)?,
                mean: r.mean,
                std: r.std,
                per_agent_accuracy: split_values(&r.per_agent_accuracy)?,
                payload_values_per_producer: r.payload_values_per_producer,
                payload_bytes: r.payload_bytes,
                wall_time_ms: r.wall_time_ms,
                config_hash: r.config_hash,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub classifier: ClassifierKind,
    pub version: String,
    /// Mean accuracy over datasets for each column; `None` if absent.
    pub cells: Vec<Option<f64>>,
    pub datasets: Vec<usize>,
}

/// Accuracy averaged over datasets, one row per (classifier, version) and
/// one column per agent count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTable {
    pub agents: Vec<usize>,
    pub rows: Vec<TableRow>,
}

pub fn summary_table(records: &[ResultRecord]) -> SummaryTable {
    let mut agents: Vec<usize> = records.iter().map(|r| r.agents).collect();
    agents.sort_unstable();
    agents.dedup();
    let mut groups: BTreeMap<(ClassifierKind, VersionKind, bool), BTreeMap<usize, Vec<f64>>> =
        BTreeMap::new();
    for r in records {
        groups
            .entry((r.classifier, r.kind, r.compression))
            .or_default()
            .entry(r.agents)
            .or_default()
            .push(r.mean);
    }
    let rows = groups
        .into_iter()
        .map(|((classifier, kind, compression), by_n)| {
            let cells = agents
                .iter()
                .map(|n| by_n.get(n).map(|v| v.iter().sum::<f64>() / v.len() as f64))
                .collect();
            let datasets = agents
                .iter()
                .map(|n| by_n.get(n).map_or(0, Vec::len))
                .collect();
            TableRow {
                classifier,
                version: ExperimentVersion {
                    kind,
                    compression,
                    classifier,
                }
                .label(),
                cells,
                datasets,
            }
        })
        .collect();
    SummaryTable { agents, rows }
}

pub fn render_table(table: &SummaryTable) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<10} {:<16}", "classifier", "version");
    for n in &table.agents {
        let _ = write!(out, " {:>8}", format!("N={n}"));
    }
    out.push('\n');
    for row in &table.rows {
        let _ = write!(
            out,
            "{:<10} {:<16}",
            row.classifier.to_string(),
            row.version
        );
        for cell in &row.cells {
            match cell {
                Some(v) => {
                    let _ = write!(out, " {v:>8.4}");
                }
                None => {
                    let _ = write!(out, " {:>8}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn table_csv(table: &SummaryTable) -> String {
    let mut out = String::from("classifier,version");
    for n in &table.agents {
        let _ = write!(out, ",N={n}");
    }
    out.push('\n');
    for row in &table.rows {
        let _ = write!(out, "{},{}", row.classifier, row.version);
        for cell in &row.cells {
            match cell {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Selects one side of a scatter plot: `<version>:<classifier>[@N]`, e.g.
/// `centralized:rls` or `distributed+hrr:rls@50`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatterSide {
    pub version: ExperimentVersion,
    pub agents: Option<usize>,
}

impl std::str::FromStr for ScatterSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, agents) =
            match s.split_once('@') {
                Some((b, n)) => (
                    b,
                    Some(n.parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad agent count in '{s}'"))
                    })?),
                ),
                None => (s, None),
            };
        let (version, classifier) = body.split_once(':').ok_or_else(|| {
            Error::InvalidParameter(format!("expected <version>:<classifier>, got '{s}'"))
        })?;
        let (kind, compression) = match version.strip_suffix("+hrr") {
            Some(k) => (k.parse()?, true),
            None => (version.parse()?, false),
        };
        Ok(Self {
            version: ExperimentVersion::new(kind, compression, classifier.parse()?)?,
            agents,
        })
    }
}

impl ScatterSide {
    fn matches(&self, r: &ResultRecord) -> bool {
        r.experiment_version() == self.version && self.agents.is_none_or(|n| n == r.agents)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub dataset: String,
    pub x: f64,
    pub y: f64,
}

/// Pairs each dataset's mean accuracy under two versions. Datasets missing
/// on either side, or matched ambiguously, are left out with a warning.
pub fn scatter_pairs(
    records: &[ResultRecord],
    x: &ScatterSide,
    y: &ScatterSide,
) -> (Vec<ScatterPoint>, Vec<String>) {
    let mut xs: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut ys: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        if x.matches(r) {
            xs.entry(&r.dataset).or_default().push(r.mean);
        }
        if y.matches(r) {
            ys.entry(&r.dataset).or_default().push(r.mean);
        }
    }
    let mut names: Vec<&str> = xs.keys().chain(ys.keys()).copied().collect();
    names.sort_unstable();
    names.dedup();
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for name in names {
        match (
            xs.get(name).map(Vec::as_slice),
            ys.get(name).map(Vec::as_slice),
        ) {
            (Some([a]), Some([b])) => points.push(ScatterPoint {
                dataset: name.to_owned(),
                x: *a,
                y: *b,
            }),
            (Some(_), Some(_)) => warnings.push(format!(
                "{name}: several records match; give an agent count"
            )),
            _ => warnings.push(format!(
                "{name}: missing under one of the compared versions"
            )),
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    (points, warnings)
}

pub fn scatter_csv(points: &[ScatterPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Writes `files` (name, contents) into `dir` with temp-file-and-rename.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, contents)?;
        std::fs::rename(&tmp, &target)?;
        written.push(target);
    }
    Ok(written)
}

/// Renders `records` in `format` and writes the files into `dir`:
/// `results.jsonl`; `results.csv` plus `table.csv`; or `table.txt`.
pub fn report(records: &[ResultRecord], format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to report".into()));
    }
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let files = match format {
        ReportFormat::Jsonl => vec![("results.jsonl".to_owned(), to_jsonl(&sorted)?)],
        ReportFormat::Csv => vec![
            ("results.csv".to_owned(), to_csv(&sorted)?),
            ("table.csv".to_owned(), table_csv(&summary_table(&sorted))),
        ],
        ReportFormat::Table => vec![(
            "table.txt".to_owned(),
            render_table(&summary_table(&sorted)),
        )],
    };
    write_files(dir, &files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(
        dataset: &str,
        kind: VersionKind,
        classifier: ClassifierKind,
        agents: usize,
        mean: f64,
    ) -> ResultRecord {
        let version = ExperimentVersion {
            kind,
            compression: false,
            classifier,
        };
        ResultRecord {
            dataset: dataset.into(),
            version: version.label(),
            kind,
            compression: false,
            classifier,
            agents,
            dim: 500,
            lambda: 0.1,
            kappa: 7,
            seeds: 2,
            master_seed: 1,
            per_seed_accuracy: vec![mean - 0.01, mean + 0.01],
            mean,
            std: 0.1 / 3.0,
            per_agent_accuracy: vec![mean; agents],
            payload_values_per_producer: 0,
            payload_bytes: 0,
            wall_time_ms: None,
            config_hash: "abc".into(),
        }
    }

    #[test]
    fn jsonl_and_csv_agree() {
        let mut recs = vec![
            record("b", VersionKind::Local, ClassifierKind::Rls, 10, 0.7),
            record(
                "a",
                VersionKind::Centralized,
                ClassifierKind::Centroid,
                1,
                1.0 / 3.0,
            ),
        ];
        recs[1].wall_time_ms = Some(12);
        let from_json = from_jsonl(&to_jsonl(&recs).unwrap()).unwrap();
        let from_csv = from_csv(&to_csv(&recs).unwrap()).unwrap();
        assert_eq!(from_json, recs);
        assert_eq!(from_csv, recs);
    }

    #[test]
    fn one_record_one_row() {
        let recs = vec![record(
            "a",
            VersionKind::Local,
            ClassifierKind::Rls,
            10,
            0.7,
        )];
        assert_eq!(to_csv(&recs).unwrap().lines().count(), 2);
        assert_eq!(to_jsonl(&recs).unwrap().lines().count(), 1);
    }

    #[test]
    fn table_layout() {
        let mut recs = Vec::new();
        for (d, off) in [("a", 0.0), ("b", 0.1)] {
            for classifier in [ClassifierKind::Centroid, ClassifierKind::Rls] {
                recs.push(record(
                    d,
                    VersionKind::Centralized,
                    classifier,
                    1,
                    0.8 + off,
                ));
                for n in [10, 50, 100] {
                    recs.push(record(d, VersionKind::Local, classifier, n, 0.7 + off));
                    recs.push(record(
                        d,
                        VersionKind::Distributed,
                        classifier,
                        n,
                        0.75 + off,
                    ));
                }
            }
        }
        let t = summary_table(&recs);
        assert_eq!(t.agents, vec![1, 10, 50, 100]);
        let labels: Vec<(ClassifierKind, &str)> = t
            .rows
            .iter()
            .map(|r| (r.classifier, r.version.as_str()))
            .collect();
        assert_eq!(
            labels,
            vec![
                (ClassifierKind::Rls, "centralized"),
                (ClassifierKind::Rls, "local"),
                (ClassifierKind::Rls, "distributed"),
                (ClassifierKind::Centroid, "centralized"),
                (ClassifierKind::Centroid, "local"),
                (ClassifierKind::Centroid, "distributed"),
            ]
        );
        assert!((t.rows[1].cells[1].unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(t.rows[1].cells[0], None);
        let text = render_table(&t);
        assert!(text.lines().next().unwrap().contains("N=100"));
        assert_eq!(table_csv(&t).lines().count(), 7);
    }

    #[test]
    fn scatter_is_symmetric_complete() {
        let recs = vec![
            record("a", VersionKind::Centralized, ClassifierKind::Rls, 1, 0.9),
            record(
                "a",
                VersionKind::Centralized,
                ClassifierKind::Centroid,
                1,
                0.8,
            ),
            record("b", VersionKind::Centralized, ClassifierKind::Rls, 1, 0.7),
        ];
        let x: ScatterSide = "centralized:centroid".parse().unwrap();
        let y: ScatterSide = "centralized:rls".parse().unwrap();
        let (points, warnings) = scatter_pairs(&recs, &x, &y);
        assert_eq!(
            points,
            vec![ScatterPoint {
                dataset: "a".into(),
                x: 0.8,
                y: 0.9
            }]
        );
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].starts_with("b:"));
    }

    #[test]
    fn scatter_side_parsing() {
        let s: ScatterSide = "distributed+hrr:rls@50".parse().unwrap();
        assert!(s.version.compression);
        assert_eq!(s.agents, Some(50));
        assert!("local+hrr:rls".parse::<ScatterSide>().is_err());
        assert!("local".parse::<ScatterSide>().is_err());
    }

    #[test]
    fn report_writes_sorted_files() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![
            record("b", VersionKind::Local, ClassifierKind::Rls, 10, 0.7),
            record("a", VersionKind::Local, ClassifierKind::Rls, 50, 0.6),
            record("a", VersionKind::Local, ClassifierKind::Rls, 10, 0.65),
        ];
        let paths = report(&recs, ReportFormat::Jsonl, dir.path()).unwrap();
        let back = read_jsonl(&paths[0]).unwrap();
        let order: Vec<(&str, usize)> = back
            .iter()
            .map(|r| (r.dataset.as_str(), r.agents))
            .collect();
        assert_eq!(order, vec![("a", 10), ("a", 50), ("b", 10)]);
        let csv_paths = report(&recs, ReportFormat::Csv, dir.path()).unwrap();
        assert_eq!(csv_paths.len(), 2);
        assert!(report(&[], ReportFormat::Csv, dir.path()).is_err());
    }

    #[test]
    fn unwritable_destination_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let recs = vec![record(
            "a",
            VersionKind::Local,
            ClassifierKind::Rls,
            10,
            0.7,
        )];
        assert!(matches!(
            report(&recs, ReportFormat::Jsonl, &blocker.join("out")),
            Err(Error::Io(_))
        ));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
