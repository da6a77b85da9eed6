//! Multi-dataset, multi-version experiment runs.

use std::time::Instant;

use crate::data::{self, Dataset};
use crate::harness::config::{DatasetEntry, ExperimentConfig, Manifest, ProtocolSpec};
use crate::harness::grid::grid_search;
use crate::harness::record::ResultRecord;
use crate::sim::{
    self, ExperimentVersion, ModelParams, Protocol, RunConfig, SeedPlan, VersionKind,
};
use crate::{Error, Result, SeedSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub protocol: Protocol,
}

fn protocol_of(spec: ProtocolSpec) -> Protocol {
    match spec {
        ProtocolSpec::Holdout { test_fraction } => Protocol::Holdout { test_fraction },
        ProtocolSpec::Kfold { k } => Protocol::Kfold { k },
    }
}

pub fn load_entry(entry: &DatasetEntry, default: ProtocolSpec) -> Result<LoadedDataset> {
    let dataset = data::load_csv(&entry.path, &entry.label_column, entry.header)?
        .with_name(entry.name.clone());
    let protocol = match &entry.folds {
        Some(path) => {
            let assignments = data::load_fold_assignments(path)?;
            if assignments.len() != dataset.len() {
                return Err(Error::DimensionMismatch {
                    expected: dataset.len(),
                    found: assignments.len(),
                });
            }
            Protocol::Predefined(data::folds_from_assignments(&assignments)?)
        }
        None => protocol_of(default),
    };
    Ok(LoadedDataset { dataset, protocol })
}

/// Training-part size of the first fold under the first repetition.
pub fn train_size(ds: &LoadedDataset, master_seed: u64) -> Result<usize> {
    let (folds, _) = sim::folds_for(
        &ds.dataset,
        &ds.protocol,
        &SeedPlan::new(master_seed, 0).split(),
    )?;
    Ok(folds.first().map_or(0, |f| f.train.len()))
}

/// Materializes the configured datasets and applies the optional
/// minimum-training-size filter.
pub fn load_datasets(cfg: &ExperimentConfig) -> Result<Vec<LoadedDataset>> {
    let src = &cfg.dataset;
    let mut loaded = if let Some(spec) = &src.synth {
        let ds = data::synth_blobs(
            spec.classes,
            spec.features,
            spec.samples,
            spec.separation,
            &SeedSpec::new(spec.seed),
        )?
        .with_name(spec.name());
        vec![LoadedDataset {
            dataset: ds,
            protocol: protocol_of(cfg.protocol),
        }]
    } else if let Some(entry) = &src.csv {
        vec![load_entry(entry, cfg.protocol)?]
    } else if let Some(path) = &src.manifest {
        Manifest::load(path)?
            .datasets
            .iter()
            .map(|e| load_entry(e, cfg.protocol))
            .collect::<Result<Vec<_>>>()?
    } else {
        return Err(Error::Config("no dataset source".into()));
    };
    if let Some(threshold) = cfg.min_train_samples {
        let sizes = loaded
            .iter()
            .map(|d| train_size(d, cfg.master_seed))
            .collect::<Result<Vec<_>>>()?;
        let before = loaded.len();
        loaded = data::filter_min_train(loaded.into_iter().zip(sizes), threshold, |(_, n)| *n)
            .into_iter()
            .map(|(d, _)| d)
            .collect();
        log::info!(
            "kept {} of {before} datasets with more than {threshold} training samples",
            loaded.len()
        );
    }
    Ok(loaded)
}

/// Fixed hyperparameters, or the grid-search winner for `ds`.
pub fn select_hyperparameters(cfg: &ExperimentConfig, ds: &Dataset) -> Result<ModelParams> {
    let hp = &cfg.hyperparameters;
    match hp.fixed()? {
        Some(p) => Ok(p),
        None => {
            let result = grid_search(
                ds,
                &hp.grid,
                hp.selection,
                &SeedSpec::new(cfg.master_seed).with("grid", 0),
            )?;
            log::info!(
                "{}: selected D={} lambda={} kappa={} (accuracy {:.4})",
                ds.name(),
                result.best.dim,
                result.best.lambda,
                result.best.kappa,
                result.best_accuracy
            );
            Ok(result.best)
        }
    }
}

/// Runs one version at one agent count and summarizes it.
pub fn run_record(
    cfg: &ExperimentConfig,
    ds: &LoadedDataset,
    version: &ExperimentVersion,
    agents: usize,
    params: ModelParams,
    config_hash: &str,
) -> Result<ResultRecord> {
    let run = RunConfig {
        params,
        agents,
        seeds: cfg.seeds,
        master_seed: cfg.master_seed,
        protocol: ds.protocol.clone(),
        test_evaluation: cfg.test_evaluation,
        inverse_mode: cfg.inverse_mode,
    };
    let start = Instant::now();
    let result = sim::run_version(version, &ds.dataset, &run).inspect_err(|e| {
        log::error!(
            "{} / {} / N={agents}: {e}",
            ds.dataset.name(),
            version.label()
        );
    })?;
    let elapsed = start.elapsed();
    for w in &result.warnings {
        log::warn!("{w}");
    }
    Ok(ResultRecord {
        dataset: ds.dataset.name().to_owned(),
        version: version.label(),
        kind: version.kind,
        compression: version.compression,
        classifier: version.classifier,
        agents,
        dim: params.dim,
        lambda: params.lambda,
        kappa: params.kappa,
        seeds: cfg.seeds,
        master_seed: cfg.master_seed,
        per_seed_accuracy: result.per_seed_accuracy,
        mean: result.mean,
        std: result.std,
        per_agent_accuracy: result.per_agent_accuracy,
        payload_values_per_producer: result.payload_values_per_producer,
        payload_bytes: result.payload_bytes_total,
        wall_time_ms: cfg.record_wall_time.then_some(elapsed.as_millis() as u64),
        config_hash: config_hash.to_owned(),
    })
}

/// Every configured version at every agent count on every dataset; the
/// hyperparameters chosen for a dataset are shared by all its versions.
/// The first failure aborts the suite.
pub fn run_suite(cfg: &ExperimentConfig, datasets: &[LoadedDataset]) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let hash = cfg.hash();
    let mut records = Vec::new();
    for ds in datasets {
        let params = select_hyperparameters(cfg, &ds.dataset)?;
        for version in &cfg.versions {
            let agent_counts = match version.kind {
                VersionKind::Centralized => vec![1],
                _ => cfg.agents.clone(),
            };
            for agents in agent_counts {
                log::info!("{} / {} / N={agents}", ds.dataset.name(), version.label());
                records.push(run_record(cfg, ds, version, agents, params, &hash)?);
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ClassifierKind;

    fn config(versions: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!(
            r#"
seeds = 2
agents = [1, 4]
[dataset.synth]
classes = 3
features = 5
samples = 240
separation = 2.0
seed = 3
[hyperparameters]
dim = 100
lambda = 1.0
kappa = 3
{versions}
"#
        ))
        .unwrap()
    }

    #[test]
    fn centralized_and_single_agent_local_agree() {
        let cfg = config(
            "[[versions]]\nkind = \"centralized\"\ncompression = false\nclassifier = \"rls\"\n\
             [[versions]]\nkind = \"local\"\ncompression = false\nclassifier = \"rls\"\n",
        );
        let data = load_datasets(&cfg).unwrap();
        let recs = run_suite(&cfg, &data).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].agents, 1);
        assert_eq!(recs[0].per_seed_accuracy, recs[1].per_seed_accuracy);
        assert_eq!(recs[0].mean, recs[1].mean);
        assert_eq!(recs[2].per_agent_accuracy.len(), 4);
    }

    #[test]
    fn reruns_are_identical() {
        let cfg = config(
            "[[versions]]\nkind = \"distributed\"\ncompression = true\nclassifier = \"rls\"\n",
        );
        let data = load_datasets(&cfg).unwrap();
        assert_eq!(
            run_suite(&cfg, &data).unwrap(),
            run_suite(&cfg, &data).unwrap()
        );
    }

    #[test]
    fn centroid_distributed_matches_centralized() {
        let cfg = config(
            "[[versions]]\nkind = \"centralized\"\ncompression = false\nclassifier = \"centroid\"\n\
             [[versions]]\nkind = \"distributed\"\ncompression = false\nclassifier = \"centroid\"\n",
        );
        let data = load_datasets(&cfg).unwrap();
        let recs = run_suite(&cfg, &data).unwrap();
        for r in &recs[1..] {
            assert_eq!(r.classifier, ClassifierKind::Centroid);
            assert_eq!(r.per_seed_accuracy, recs[0].per_seed_accuracy);
        }
    }

    #[test]
    fn grid_selection_feeds_all_versions() {
        let mut cfg = config(
            "[[versions]]\nkind = \"local\"\ncompression = false\nclassifier = \"rls\"\n\
             [[versions]]\nkind = \"local\"\ncompression = false\nclassifier = \"centroid\"\n",
        );
        cfg.hyperparameters.dim = None;
        cfg.hyperparameters.lambda = None;
        cfg.hyperparameters.kappa = None;
        cfg.hyperparameters.grid = crate::harness::GridSpec {
            dims: vec![20, 40],
            lambdas: vec![0.5, 2.0],
            kappas: vec![1, 3],
        };
        let data = load_datasets(&cfg).unwrap();
        let recs = run_suite(&cfg, &data).unwrap();
        assert!(recs
            .windows(2)
            .all(|w| (w[0].dim, w[0].lambda, w[0].kappa) == (w[1].dim, w[1].lambda, w[1].kappa)));
    }

    #[test]
    fn min_train_filter() {
        let mut cfg =
            config("[[versions]]\nkind = \"local\"\ncompression = false\nclassifier = \"rls\"\n");
        // 4-fold CV on 240 samples leaves 180 for training.
        cfg.min_train_samples = Some(180);
        assert!(load_datasets(&cfg).unwrap().is_empty());
        cfg.min_train_samples = Some(179);
        assert_eq!(load_datasets(&cfg).unwrap().len(), 1);
    }

    #[test]
    fn failure_names_the_seed() {
        let mut cfg =
            config("[[versions]]\nkind = \"local\"\ncompression = false\nclassifier = \"rls\"\n");
        cfg.agents = vec![100];
        let data = load_datasets(&cfg).unwrap();
        assert!(matches!(
            run_suite(&cfg, &data),
            Err(Error::SeedFailed { seed: 0, .. })
        ));
    }
}
