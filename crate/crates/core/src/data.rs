//! Tabular datasets: CSV ingestion, min-max normalization, seeded splits and
//! a synthetic Gaussian-blob generator.
//!
//! Labels are held 0-based in memory (`0..L`); the raw label strings are kept
//! in [`Dataset::class_names`] in sorted order.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    /// Maps into `[0, 1]`, clamping; a constant feature maps to 0.5.
    /// Returns the value and whether it had to be clamped.
    pub fn apply(&self, x: f64) -> (f64, bool) {
        let span = self.max - self.min;
        if span <= 0.0 {
            return (0.5, false);
        }
        let v = (x - self.min) / span;
        if v < 0.0 {
            (0.0, true)
        } else if v > 1.0 {
            (1.0, true)
        } else {
            (v, false)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: usize,
    samples: Vec<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    feature_ranges: Option<Vec<FeatureRange>>,
}

impl Dataset {
    /// `samples` is row-major `M x K`; labels index into `class_names`.
    pub fn new(
        name: impl Into<String>,
        features: usize,
        samples: Vec<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if features == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if samples.len() != features * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features * labels.len(),
                found: samples.len(),
            });
        }
        if class_names.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 classes, found {}",
                class_names.len()
            )));
        }
        if labels.iter().any(|&l| l >= class_names.len()) {
            return Err(Error::InvalidDataset("label index out of range".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        Ok(Self {
            name: name.into(),
            features,
            samples,
            labels,
            class_names,
            feature_ranges: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.features..(i + 1) * self.features]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_ranges(&self) -> Option<&[FeatureRange]> {
        self.feature_ranges.as_deref()
    }

    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.classes()];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }

    /// Rows at `indices` in the given order; class list and ranges are kept.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut samples = Vec::with_capacity(indices.len() * self.features);
        for &i in indices {
            samples.extend_from_slice(self.row(i));
        }
        Self {
            name: self.name.clone(),
            features: self.features,
            samples,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            feature_ranges: self.feature_ranges.clone(),
        }
    }

    /// Per-feature minimum and maximum over all rows.
    pub fn compute_ranges(&self) -> Vec<FeatureRange> {
        let mut ranges = vec![
            FeatureRange {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            };
            self.features
        ];
        for row in self.samples.chunks_exact(self.features) {
            for (r, &v) in ranges.iter_mut().zip(row) {
                r.min = r.min.min(v);
                r.max = r.max.max(v);
            }
        }
        ranges
    }

    /// Rescales with externally supplied ranges (normally the training
    /// split's), clamping to `[0, 1]`. Returns the number of clamped values.
    pub fn apply_ranges(&self, ranges: &[FeatureRange]) -> Result<(Self, usize)> {
        if ranges.len() != self.features {
            return Err(Error::DimensionMismatch {
                expected: self.features,
                found: ranges.len(),
            });
        }
        let mut clamped = 0;
        let mut samples = Vec::with_capacity(self.samples.len());
        for row in self.samples.chunks_exact(self.features) {
            for (r, &v) in ranges.iter().zip(row) {
                let (x, c) = r.apply(v);
                clamped += usize::from(c);
                samples.push(x);
            }
        }
        let mut out = self.clone();
        out.samples = samples;
        out.feature_ranges = Some(ranges.to_vec());
        Ok((out, clamped))
    }
}

/// Min-max normalization with ranges taken from `ds` itself.
pub fn normalize(ds: &Dataset) -> Dataset {
    let ranges = ds.compute_ranges();
    ds.apply_ranges(&ranges)
        .map(|(d, _)| d)
        .expect("ranges match feature count")
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    /// A header name, or `"last"`.
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("last".into())
    }
}

impl std::str::FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_owned()),
        })
    }
}

fn sort_label_values(values: &mut [String]) {
    let numeric: Option<Vec<f64>> = values.iter().map(|v| v.parse::<f64>().ok()).collect();
    if numeric.is_some() {
        values.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.total_cmp(&y)
        });
    } else {
        values.sort();
    }
}

pub fn load_csv(path: &Path, label_column: &LabelColumn, header: bool) -> Result<Dataset> {
    if !path.is_file() {
        return Err(Error::NotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header_names: Option<Vec<String>> = if header {
        Some(reader.headers()?.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record);
    }
    let width = rows
        .first()
        .map(|r| r.len())
        .ok_or_else(|| Error::InvalidDataset(format!("{} has no data rows", path.display())))?;
    if width < 2 {
        return Err(Error::InvalidDataset(
            "need at least one feature and a label".into(),
        ));
    }
    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => {
            return Err(Error::InvalidDataset(format!(
                "label column {i} out of range for {width} columns"
            )))
        }
        LabelColumn::Name(name) => match header_names
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
        {
            Some(i) => i,
            None if name == "last" => width - 1,
            None => {
                return Err(Error::InvalidDataset(format!("no column named '{name}'")));
            }
        },
    };

    let mut samples = Vec::with_capacity(rows.len() * (width - 1));
    let mut raw_labels = Vec::with_capacity(rows.len());
    for record in &rows {
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(Error::Parse {
                row: line,
                column: record.len(),
                message: format!("expected {width} fields"),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                raw_labels.push(cell.to_owned());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: line,
                column: col,
                message: format!("'{cell}' is not numeric"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: col,
                    message: "non-finite value".into(),
                });
            }
            samples.push(v);
        }
    }

    let mut class_names: Vec<String> = raw_labels.clone();
    sort_label_values(&mut class_names);
    class_names.dedup();
    if class_names.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "{} contains a single class",
            path.display()
        )));
    }
    let index: BTreeMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let labels = raw_labels.iter().map(|l| index[l.as_str()]).collect();
    let name = path.file_stem().map_or_else(
        || "dataset".to_owned(),
        |s| s.to_string_lossy().into_owned(),
    );
    let ds = Dataset::new(name, width - 1, samples, labels, class_names)?;
    log::debug!(
        "loaded {}: {} rows, class histogram {:?}",
        ds.name(),
        ds.len(),
        ds.class_histogram()
    );
    Ok(ds)
}

/// Reads one fold number per line (blank lines ignored).
pub fn load_fold_assignments(path: &Path) -> Result<Vec<usize>> {
    if !path.is_file() {
        return Err(Error::NotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<usize>().map_err(|_| Error::Parse {
                row: i + 1,
                column: 0,
                message: format!("'{}' is not a fold index", l.trim()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SplitMode {
    Holdout { test_fraction: f64 },
    Kfold { k: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub stratified: bool,
    pub seed: SeedSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    pub folds: Vec<Fold>,
    pub stratified: bool,
    pub warnings: Vec<String>,
}

fn folds_from_groups(groups: Vec<Vec<usize>>) -> Vec<Fold> {
    let k = groups.len();
    (0..k)
        .map(|f| {
            let mut test = groups[f].clone();
            test.sort_unstable();
            let mut train: Vec<usize> = groups
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            train.sort_unstable();
            Fold { train, test }
        })
        .collect()
}

/// Builds folds from a per-sample fold number.
pub fn folds_from_assignments(assignments: &[usize]) -> Result<Vec<Fold>> {
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    if k < 2 {
        return Err(Error::InvalidParameter(
            "fold file needs at least 2 folds".into(),
        ));
    }
    let mut groups = vec![Vec::new(); k];
    for (i, &f) in assignments.iter().enumerate() {
        groups[f].push(i);
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::InvalidParameter(
            "fold file skips a fold number".into(),
        ));
    }
    Ok(folds_from_groups(groups))
}

/// Seeded (optionally stratified) holdout or k-fold split. Index lists in
/// every fold are sorted ascending.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<SplitOutcome> {
    let m = ds.len();
    match spec.mode {
        SplitMode::Holdout { test_fraction } => {
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "holdout fraction must lie in (0, 1), got {test_fraction}"
                )));
            }
        }
        SplitMode::Kfold { k } => {
            if k < 2 || k > m {
                return Err(Error::InvalidParameter(format!(
                    "k must satisfy 2 <= k <= {m}, got {k}"
                )));
            }
        }
    }

    let mut warnings = Vec::new();
    let hist = ds.class_histogram();
    let mut stratified = spec.stratified;
    if stratified && hist.iter().any(|&c| c > 0 && c < 2) {
        let msg = format!(
            "{}: a class has fewer than 2 samples; falling back to an unstratified split",
            ds.name()
        );
        log::warn!("{msg}");
        warnings.push(msg);
        stratified = false;
    }

    let mut rng = spec.seed.rng();
    let strata: Vec<Vec<usize>> = if stratified {
        let mut by_class = vec![Vec::new(); ds.classes()];
        for (i, &l) in ds.labels().iter().enumerate() {
            by_class[l].push(i);
        }
        by_class
    } else {
        vec![(0..m).collect()]
    };

    let folds = match spec.mode {
        SplitMode::Holdout { test_fraction } => {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for mut group in strata {
                group.shuffle(&mut rng);
                let n_test = (group.len() as f64 * test_fraction).round() as usize;
                test.extend_from_slice(&group[..n_test]);
                train.extend_from_slice(&group[n_test..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            vec![Fold { train, test }]
        }
        SplitMode::Kfold { k } => {
            // Deal the shuffled strata round-robin, continuing the rotation
            // across classes so fold sizes differ by at most one.
            let mut groups = vec![Vec::new(); k];
            let mut next = 0;
            for mut group in strata {
                group.shuffle(&mut rng);
                for i in group {
                    groups[next].push(i);
                    next = (next + 1) % k;
                }
            }
            folds_from_groups(groups)
        }
    };
    Ok(SplitOutcome {
        folds,
        stratified,
        warnings,
    })
}

/// Keeps items whose training partition has strictly more than `threshold`
/// samples.
pub fn filter_min_train<T>(
    datasets: impl IntoIterator<Item = T>,
    threshold: usize,
    train_size: impl Fn(&T) -> usize,
) -> Vec<T> {
    datasets
        .into_iter()
        .filter(|d| train_size(d) > threshold)
        .collect()
}

/// Threshold used to select datasets large enough for distribution.
pub const MIN_TRAIN_SAMPLES: usize = 1000;

fn class_means(classes: usize, features: usize, separation: f64, seed: &SeedSpec) -> Vec<Vec<f64>> {
    let mut rng = seed.with("blob-means", 0).rng();
    let mut gaussian =
        |n: usize| -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    if classes <= features {
        // Random orthonormal frame, centered: a regular simplex whose vertices
        // are `separation` apart.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(classes);
        while basis.len() < classes {
            let mut v = gaussian(features);
            for b in &basis {
                let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
            let n = norm(&v);
            if n > 1e-9 {
                basis.push(v.into_iter().map(|x| x / n).collect());
            }
        }
        let centre: Vec<f64> = (0..features)
            .map(|j| basis.iter().map(|b| b[j]).sum::<f64>() / classes as f64)
            .collect();
        let scale = separation / std::f64::consts::SQRT_2;
        basis
            .into_iter()
            .map(|b| {
                b.iter()
                    .zip(&centre)
                    .map(|(x, c)| (x - c) * scale)
                    .collect()
            })
            .collect()
    } else {
        (0..classes)
            .map(|_| {
                let v = gaussian(features);
                let n = norm(&v).max(1e-12);
                v.into_iter().map(|x| x / n * separation / 2.0).collect()
            })
            .collect()
    }
}

/// Balanced Gaussian blobs with unit isotropic noise around class means
/// placed `separation` apart, normalized to `[0, 1]`. Sample `i` belongs to
/// class `i mod L`.
pub fn synth_blobs(
    classes: usize,
    features: usize,
    samples: usize,
    separation: f64,
    seed: &SeedSpec,
) -> Result<Dataset> {
    if classes < 2 {
        return Err(Error::InvalidParameter(
            "synthetic data needs L >= 2".into(),
        ));
    }
    if features < 1 || samples < 1 {
        return Err(Error::InvalidParameter("K and M must be >= 1".into()));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::InvalidParameter("separation must be >= 0".into()));
    }
    let means = class_means(classes, features, separation, seed);
    let mut rng = seed.with("blob-noise", 0).rng();
    let mut data = Vec::with_capacity(samples * features);
    let mut labels = Vec::with_capacity(samples);
    for i in 0..samples {
        let c = i % classes;
        labels.push(c);
        for &mu in &means[c] {
            let noise: f64 = StandardNormal.sample(&mut rng);
            data.push(mu + noise);
        }
    }
    let class_names = (1..=classes).map(|c| c.to_string()).collect();
    let name = format!("blobs-L{classes}-K{features}-M{samples}-s{separation}");
    Ok(normalize(&Dataset::new(
        name,
        features,
        data,
        labels,
        class_names,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn toy(m: usize, classes: usize) -> Dataset {
        let samples = (0..m).map(|i| i as f64).collect();
        let labels = (0..m).map(|i| i % classes).collect();
        let names = (0..classes).map(|c| c.to_string()).collect();
        Dataset::new("toy", 1, samples, labels, names).unwrap()
    }

    #[test]
    fn load_reindexes_labels() {
        let f = write_csv("1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n");
        let ds = load_csv(f.path(), &LabelColumn::default(), false).unwrap();
        assert_eq!(ds.classes(), 2);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.class_names(), &["a", "b"]);
        assert_eq!(ds.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn load_with_header_and_named_label() {
        let f = write_csv("cls,x,y\n2,0.5,1\n10,0.25,2\n2,0,3\n");
        let ds = load_csv(f.path(), &LabelColumn::Name("cls".into()), true).unwrap();
        assert_eq!(ds.len(), 3);
        // Numeric labels sort numerically: 2 < 10.
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.row(0), &[0.5, 1.0]);
    }

    #[test]
    fn load_errors() {
        let missing = Path::new("/definitely/not/here.csv");
        assert!(matches!(
            load_csv(missing, &LabelColumn::default(), false),
            Err(Error::NotFound(_))
        ));
        let f = write_csv("1.0,x,a\n2.0,3.0,b\n");
        match load_csv(f.path(), &LabelColumn::default(), false) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!((row, column), (1, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        let f = write_csv("1.0,a\n2.0,a\n");
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::default(), false),
            Err(Error::InvalidDataset(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let ds = Dataset::new(
            "n",
            2,
            vec![2.0, 7.0, 4.0, 7.0, 6.0, 7.0],
            vec![0, 1, 0],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let n = normalize(&ds);
        assert_eq!(n.samples(), &[0.0, 0.5, 0.5, 0.5, 1.0, 0.5]);
        let test = Dataset::new(
            "t",
            2,
            vec![8.0, 7.0],
            vec![0],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let (t, clamped) = test.apply_ranges(n.feature_ranges().unwrap()).unwrap();
        assert_eq!(t.samples(), &[1.0, 0.5]);
        assert_eq!(clamped, 1);
        assert_eq!(normalize(&n).samples(), n.samples());
    }

    #[test]
    fn stratified_holdout_arithmetic() {
        let ds = toy(100, 2);
        let spec = SplitSpec {
            mode: SplitMode::Holdout { test_fraction: 0.5 },
            stratified: true,
            seed: SeedSpec::new(1),
        };
        let out = split(&ds, &spec).unwrap();
        let fold = &out.folds[0];
        let count = |idx: &[usize], c: usize| idx.iter().filter(|&&i| ds.labels()[i] == c).count();
        assert_eq!(count(&fold.train, 0), 25);
        assert_eq!(count(&fold.train, 1), 25);
        assert_eq!(count(&fold.test, 0), 25);
        assert_eq!(count(&fold.test, 1), 25);
        assert_eq!(out, split(&ds, &spec).unwrap());
    }

    #[test]
    fn kfold_covers_disjointly() {
        let ds = toy(103, 3);
        let spec = SplitSpec {
            mode: SplitMode::Kfold { k: 4 },
            stratified: true,
            seed: SeedSpec::new(2),
        };
        let out = split(&ds, &spec).unwrap();
        assert_eq!(out.folds.len(), 4);
        let mut all: Vec<usize> = out.folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..103).collect::<Vec<_>>());
        for f in &out.folds {
            assert_eq!(f.train.len() + f.test.len(), 103);
            assert!((25..=26).contains(&f.test.len()));
            assert!(f.train.iter().all(|i| f.test.binary_search(i).is_err()));
        }
    }

    #[test]
    fn tiny_class_downgrades_stratification() {
        let ds = Dataset::new(
            "tiny",
            1,
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![0, 0, 0, 0, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let spec = SplitSpec {
            mode: SplitMode::Holdout { test_fraction: 0.4 },
            stratified: true,
            seed: SeedSpec::new(0),
        };
        let out = split(&ds, &spec).unwrap();
        assert!(!out.stratified);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn split_parameter_validation() {
        let ds = toy(10, 2);
        for mode in [
            SplitMode::Holdout { test_fraction: 0.0 },
            SplitMode::Holdout { test_fraction: 1.0 },
            SplitMode::Kfold { k: 1 },
            SplitMode::Kfold { k: 11 },
        ] {
            let spec = SplitSpec {
                mode,
                stratified: false,
                seed: SeedSpec::new(0),
            };
            assert!(split(&ds, &spec).is_err(), "{mode:?}");
        }
    }

    #[test]
    fn fold_assignments() {
        let folds = folds_from_assignments(&[0, 1, 0, 1, 2]).unwrap();
        assert_eq!(folds.len(), 3);
        assert_eq!(folds[2].test, vec![4]);
        assert_eq!(folds[0].train, vec![1, 3, 4]);
        assert!(folds_from_assignments(&[0, 0]).is_err());
        assert!(folds_from_assignments(&[0, 2]).is_err());
    }

    #[test]
    fn min_train_filter_is_strict() {
        let sizes = vec![("a", 1001), ("b", 1000), ("c", 5000)];
        let kept = filter_min_train(sizes, MIN_TRAIN_SAMPLES, |d| d.1);
        assert_eq!(kept, vec![("a", 1001), ("c", 5000)]);
        let empty: Vec<(&str, usize)> = vec![];
        assert!(filter_min_train(empty, MIN_TRAIN_SAMPLES, |d| d.1).is_empty());
    }

    #[test]
    fn blobs_are_deterministic_and_normalized() {
        let s = SeedSpec::new(5);
        let a = synth_blobs(3, 4, 300, 3.0, &s).unwrap();
        assert_eq!(a, synth_blobs(3, 4, 300, 3.0, &s).unwrap());
        assert!(a.samples().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(a.class_histogram(), vec![100, 100, 100]);
        assert_ne!(a, synth_blobs(3, 4, 300, 3.0, &SeedSpec::new(6)).unwrap());
    }

    #[test]
    fn simplex_means_are_equidistant() {
        let means = class_means(4, 10, 3.0, &SeedSpec::new(1));
        for i in 0..4 {
            for j in i + 1..4 {
                let d: f64 = means[i]
                    .iter()
                    .zip(&means[j])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!((d - 3.0).abs() < 1e-9);
            }
        }
    }
}
