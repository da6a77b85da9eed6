//! TOML experiment configuration and dataset manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::ClassifierKind;
use crate::data::LabelColumn;
use crate::harness::grid::{GridSpec, Selection};
use crate::hdc::InverseMode;
use crate::sim::{ExperimentVersion, ModelParams, TestEvaluation, VersionKind};
use crate::{Error, Result};

/// Synthetic Gaussian blobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub classes: usize,
    pub features: usize,
    pub samples: usize,
    pub separation: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn name(&self) -> String {
        format!(
            "synth-l{}-k{}-m{}-s{}-seed{}",
            self.classes, self.features, self.samples, self.separation, self.seed
        )
    }
}

impl std::str::FromStr for SynthSpec {
    type Err = Error;

    /// `synth:classes=3,features=10,samples=6000,separation=2.5,seed=1`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix("synth:")
            .ok_or_else(|| Error::Config(format!("'{s}' is not a synth spec")))?;
        let mut spec = SynthSpec {
            classes: 3,
            features: 10,
            samples: 3000,
            separation: 3.0,
            seed: 0,
        };
        for part in body.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got '{part}'")))?;
            let v = v.trim();
            match k.trim() {
                "classes" => spec.classes = parse_value(k, v)?,
                "features" => spec.features = parse_value(k, v)?,
                "samples" => spec.samples = parse_value(k, v)?,
                "seed" => spec.seed = parse_value(k, v)?,
                "separation" => spec.separation = parse_value(k, v)?,
                other => return Err(Error::Config(format!("unknown synth key '{other}'"))),
            }
        }
        Ok(spec)
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: '{value}'")))
}

/// One manifest entry: a CSV file and how to read it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub label_column: LabelColumn,
    #[serde(default)]
    pub header: bool,
    /// Optional file with one fold number per sample; overrides the
    /// configured protocol for this dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub folds: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, rename = "dataset")]
    pub datasets: Vec<DatasetEntry>,
}

impl Manifest {
    /// Reads a manifest; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let mut m: Manifest =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut m.datasets {
            d.path = base.join(&d.path);
            if let Some(f) = &mut d.folds {
                *f = base.join(&*f);
            }
        }
        Ok(m)
    }
}

/// Where the datasets come from; exactly one field is set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<DatasetEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProtocolSpec {
    Holdout { test_fraction: f64 },
    Kfold { k: usize },
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        ProtocolSpec::Kfold { k: 4 }
    }
}

/// Fixed hyperparameters, or a grid searched per dataset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<u32>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub selection: Selection,
    /// Accept fixed values outside the grid's span.
    #[serde(default)]
    pub allow_off_grid: bool,
}

impl Hyperparameters {
    /// `Some` when all three values are fixed, `None` for a grid search.
    pub fn fixed(&self) -> Result<Option<ModelParams>> {
        match (self.dim, self.lambda, self.kappa) {
            (Some(dim), Some(lambda), Some(kappa)) => Ok(Some(ModelParams { dim, lambda, kappa })),
            (None, None, None) => Ok(None),
            _ => Err(Error::Config(
                "set all of dim, lambda and kappa, or none of them for a grid search".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub versions: Vec<ExperimentVersion>,
    /// Agent counts; centralized versions always run with one.
    #[serde(default = "default_agents")]
    pub agents: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    #[serde(default)]
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub test_evaluation: TestEvaluation,
    #[serde(default)]
    pub inverse_mode: InverseMode,
    /// Keep only datasets whose training part exceeds this many samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_train_samples: Option<usize>,
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_agents() -> Vec<usize> {
    vec![1, 10, 50, 100]
}

fn default_seeds() -> usize {
    10
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(path.to_path_buf())
        } else {
            Error::Io(e)
        }
    })
}

impl ExperimentConfig {
    /// Parses a config file; relative dataset and output paths resolve
    /// against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&read(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(m) = &mut cfg.dataset.manifest {
            *m = base.join(&*m);
        }
        if let Some(o) = &mut cfg.output {
            *o = base.join(&*o);
        }
        if let Some(c) = &mut cfg.dataset.csv {
            c.path = base.join(&c.path);
            if let Some(f) = &mut c.folds {
                *f = base.join(&*f);
            }
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let sources = usize::from(self.dataset.manifest.is_some())
            + usize::from(self.dataset.csv.is_some())
            + usize::from(self.dataset.synth.is_some());
        if sources != 1 {
            return Err(Error::Config(
                "dataset needs exactly one of manifest, csv or synth".into(),
            ));
        }
        if self.versions.is_empty() {
            return Err(Error::Config("no versions configured".into()));
        }
        for v in &self.versions {
            v.validate()?;
        }
        let needs_agents = self
            .versions
            .iter()
            .any(|v| v.kind != VersionKind::Centralized);
        if needs_agents && (self.agents.is_empty() || self.agents.contains(&0)) {
            return Err(Error::Config("agent counts must be >= 1".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be >= 1".into()));
        }
        let hp = &self.hyperparameters;
        hp.grid.validate()?;
        if let Some(p) = hp.fixed()? {
            if p.dim == 0 || p.kappa == 0 || !(p.lambda.is_finite() && p.lambda >= 0.0) {
                return Err(Error::Config(format!("invalid hyperparameters {p:?}")));
            }
            if !hp.allow_off_grid && !hp.grid.spans(&p) {
                return Err(Error::Config(format!(
                    "hyperparameters {p:?} lie outside the grid; set allow_off_grid to accept"
                )));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form of the config. The output
    /// location is left out; it does not affect results.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn classifiers(&self) -> Vec<ClassifierKind> {
        let mut out: Vec<ClassifierKind> = self.versions.iter().map(|v| v.classifier).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
master_seed = 7
seeds = 3
agents = [1, 10]

[dataset.synth]
classes = 3
features = 10
samples = 600
separation = 2.0

[[versions]]
kind = "local"
compression = false
classifier = "rls"

[[versions]]
kind = "distributed"
compression = true
classifier = "centroid"

[hyperparameters]
dim = 500
lambda = 1.0
kappa = 7
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.seeds, 3);
        assert_eq!(cfg.protocol, ProtocolSpec::Kfold { k: 4 });
        assert_eq!(cfg.inverse_mode, InverseMode::Involution);
        assert_eq!(
            cfg.hyperparameters.fixed().unwrap(),
            Some(ModelParams {
                dim: 500,
                lambda: 1.0,
                kappa: 7
            })
        );
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.hash().len(), 64);
        let mut other = cfg.clone();
        other.master_seed = 8;
        assert_ne!(cfg.hash(), other.hash());
        let mut moved = cfg.clone();
        moved.output = Some(PathBuf::from("elsewhere"));
        assert_eq!(cfg.hash(), moved.hash());
    }

    #[test]
    fn rejects_bad_configs() {
        let off_grid = SAMPLE.replace("dim = 500", "dim = 5000");
        assert!(matches!(
            ExperimentConfig::from_toml(&off_grid),
            Err(Error::Config(_))
        ));
        let allowed = format!("{off_grid}allow_off_grid = true\n");
        assert!(ExperimentConfig::from_toml(&allowed).is_ok());
        let partial = SAMPLE.replace("kappa = 7", "");
        assert!(ExperimentConfig::from_toml(&partial).is_err());
        let compressed_local = SAMPLE.replace(
            "kind = \"local\"\ncompression = false",
            "kind = \"local\"\ncompression = true",
        );
        assert!(ExperimentConfig::from_toml(&compressed_local).is_err());
        let typo = SAMPLE.replace("seeds = 3", "sedes = 3");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
    }

    #[test]
    fn synth_spec_parsing() {
        let s: SynthSpec = "synth:classes=4,samples=100,separation=1.5"
            .parse()
            .unwrap();
        assert_eq!(
            (s.classes, s.features, s.samples, s.separation),
            (4, 10, 100, 1.5)
        );
        assert!("synth:colour=3".parse::<SynthSpec>().is_err());
        assert!("data.csv".parse::<SynthSpec>().is_err());
    }

    #[test]
    fn manifest_paths_are_relative_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        std::fs::write(
            &path,
            "[[dataset]]\nname = \"a\"\npath = \"a.csv\"\nheader = true\nfolds = \"a_folds.txt\"\n\n[[dataset]]\nname = \"b\"\npath = \"/abs/b.csv\"\nlabel_column = 0\n",
        )
        .unwrap();
        let m = Manifest::load(&path).unwrap();
        assert_eq!(m.datasets[0].path, dir.path().join("a.csv"));
        assert_eq!(m.datasets[0].folds, Some(dir.path().join("a_folds.txt")));
        assert_eq!(m.datasets[1].path, PathBuf::from("/abs/b.csv"));
        assert_eq!(m.datasets[1].label_column, LabelColumn::Index(0));
        assert!(matches!(
            Manifest::load(&dir.path().join("missing.toml")),
            Err(Error::NotFound(_))
        ));
    }
}
