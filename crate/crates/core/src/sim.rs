//! Agent network simulation.
//!
//! Every agent encodes its private shard with the shared input projection,
//! trains a local classifier and broadcasts it once to its neighbours, either
//! as a plain matrix or packed into one HRR hypervector. Each agent then sums
//! its own classifier with what it received. Only [`Envelope`]s cross agent
//! boundaries; raw samples never do.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{self, ActivationMatrix, CentroidStats, ClassifierKind, ClassifierMatrix};
use crate::data::{self, Dataset, Fold, SplitMode, SplitSpec};
use crate::hdc::InverseMode;
use crate::hrr::{self, CompressedClassifier};
use crate::rvfl::{self, InputProjection};
use crate::{Error, Result, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VersionKind {
    Centralized,
    Local,
    Distributed,
}

impl VersionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VersionKind::Centralized => "centralized",
            VersionKind::Local => "local",
            VersionKind::Distributed => "distributed",
        }
    }
}

impl std::str::FromStr for VersionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centralized" => Ok(VersionKind::Centralized),
            "local" => Ok(VersionKind::Local),
            "distributed" => Ok(VersionKind::Distributed),
            other => Err(Error::InvalidParameter(format!(
                "unknown version '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for VersionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExperimentVersion {
    pub kind: VersionKind,
    pub compression: bool,
    pub classifier: ClassifierKind,
}

impl ExperimentVersion {
    pub fn new(kind: VersionKind, compression: bool, classifier: ClassifierKind) -> Result<Self> {
        let v = Self {
            kind,
            compression,
            classifier,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.compression && self.kind != VersionKind::Distributed {
            return Err(Error::InvalidParameter(
                "compression requires the distributed version".into(),
            ));
        }
        Ok(())
    }

    /// Short label such as `distributed+hrr`.
    pub fn label(&self) -> String {
        if self.compression {
            format!("{}+hrr", self.kind)
        } else {
            self.kind.to_string()
        }
    }
}

/// Connectivity `omega` (row-major `N x N`, entries 0/1) plus agent IDs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentNetwork {
    omega: Vec<u8>,
    agent_ids: Vec<u64>,
}

impl AgentNetwork {
    pub fn fully_connected(agent_ids: Vec<u64>) -> Result<Self> {
        let n = agent_ids.len();
        Self::new(vec![1; n * n], agent_ids)
    }

    pub fn new(omega: Vec<u8>, agent_ids: Vec<u64>) -> Result<Self> {
        let n = agent_ids.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "network needs at least one agent".into(),
            ));
        }
        if omega.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: omega.len(),
            });
        }
        if omega.iter().any(|&v| v > 1) {
            return Err(Error::InvalidParameter(
                "adjacency entries must be 0 or 1".into(),
            ));
        }
        for p in 0..n {
            for q in p + 1..n {
                if omega[p * n + q] != omega[q * n + p] {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency is not symmetric at ({p}, {q})"
                    )));
                }
            }
        }
        let mut sorted = agent_ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("agent IDs must be distinct".into()));
        }
        Ok(Self { omega, agent_ids })
    }

    pub fn len(&self) -> usize {
        self.agent_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agent_ids.is_empty()
    }

    pub fn agent_ids(&self) -> &[u64] {
        &self.agent_ids
    }

    pub fn connected(&self, p: usize, q: usize) -> bool {
        self.omega[p * self.len() + q] != 0
    }

    /// Agents whose classifiers `p` sums: itself plus every connected agent,
    /// ordered by agent ID so the summation order is fixed.
    pub fn aggregation_set(&self, p: usize) -> Vec<usize> {
        let mut set: Vec<usize> = (0..self.len())
            .filter(|&s| s == p || self.connected(p, s))
            .collect();
        set.sort_by_key(|&s| self.agent_ids[s]);
        set
    }
}

/// `N` disjoint shards covering `0..M`; sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPartition {
    pub shards: Vec<Vec<usize>>,
    pub seed: SeedSpec,
}

/// Seeded shuffle split into near-equal contiguous blocks. Indices inside a
/// shard are sorted, so `N = 1` reproduces the unpartitioned order.
pub fn partition(samples: usize, agents: usize, seed: &SeedSpec) -> Result<DataPartition> {
    if agents < 1 {
        return Err(Error::InvalidParameter("agent count N must be >= 1".into()));
    }
    if samples < agents {
        return Err(Error::InsufficientData { samples, agents });
    }
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..samples).collect();
    order.shuffle(&mut seed.rng());
    let base = samples / agents;
    let extra = samples % agents;
    let mut shards = Vec::with_capacity(agents);
    let mut start = 0;
    for p in 0..agents {
        let len = base + usize::from(p < extra);
        let mut shard = order[start..start + len].to_vec();
        shard.sort_unstable();
        shards.push(shard);
        start += len;
    }
    Ok(DataPartition {
        shards,
        seed: seed.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: usize,
    pub lambda: f64,
    pub kappa: u32,
}

/// Trains the output layer on already-encoded activations.
pub fn train_on_activations(
    h: &ActivationMatrix,
    kind: ClassifierKind,
    lambda: f64,
) -> Result<ClassifierMatrix> {
    match kind {
        ClassifierKind::Rls => classifier::train_rls(h, lambda),
        ClassifierKind::Centroid => classifier::train_centroids(h),
    }
}

pub fn encode_dataset(
    ds: &Dataset,
    projection: &InputProjection,
    kappa: u32,
) -> Result<ActivationMatrix> {
    let acts = rvfl::encode_batch(ds.samples(), projection, kappa)?;
    ActivationMatrix::from_activations(&acts, ds.labels().to_vec(), ds.classes())
}

/// One agent's training: encode its (normalized) shard with the shared
/// projection, then fit the output layer.
pub fn train_local(
    shard: &Dataset,
    kind: ClassifierKind,
    projection: &InputProjection,
    kappa: u32,
    lambda: f64,
) -> Result<ClassifierMatrix> {
    if shard.is_empty() {
        return Err(Error::InvalidParameter("empty shard".into()));
    }
    train_on_activations(&encode_dataset(shard, projection, kappa)?, kind, lambda)
}

/// What a producer puts on the wire.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    /// The classifier matrix as is.
    Raw(ClassifierMatrix),
    /// Unnormalized class sums and counts (uncompressed centroid exchange).
    CentroidSums(CentroidStats),
    /// An HRR-compressed classifier in wire format.
    Compressed(Vec<u8>),
}

impl Message {
    /// `f64` payload values, excluding headers and counts.
    pub fn payload_values(&self) -> usize {
        match self {
            Message::Raw(w) => w.classes() * w.dim(),
            Message::CentroidSums(s) => s.sums.len(),
            Message::Compressed(bytes) => (bytes.len() - hrr::HEADER_LEN) / 8,
        }
    }

    pub fn payload_bytes(&self) -> usize {
        match self {
            Message::Raw(w) => 8 * w.classes() * w.dim(),
            Message::CentroidSums(s) => 8 * (s.sums.len() + s.counts.len()),
            Message::Compressed(bytes) => bytes.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub sender: u64,
    pub message: Message,
}

/// Builds the single broadcast message of one producer.
pub fn outgoing(
    sender: u64,
    local: &ClassifierMatrix,
    compression: Option<InverseMode>,
) -> Result<Envelope> {
    let message = match (compression, local.kind()) {
        (Some(mode), _) => {
            let keys = hrr::generate_keys_with_mode(sender, local.classes(), local.dim(), mode)?;
            Message::Compressed(hrr::compress(local, &keys)?.encode())
        }
        (None, ClassifierKind::Centroid) => {
            let stats = local
                .centroid_stats()
                .cloned()
                .ok_or_else(|| Error::Protocol("centroid classifier lacks class sums".into()))?;
            Message::CentroidSums(stats)
        }
        (None, ClassifierKind::Rls) => Message::Raw(local.clone()),
    };
    Ok(Envelope { sender, message })
}

/// Contribution of a received message to the receiver's sum.
enum Contribution {
    Weights(nalgebra::DMatrix<f64>),
    Sums(CentroidStats),
}

fn receive(
    envelope: &Envelope,
    kind: ClassifierKind,
    classes: usize,
    dim: usize,
) -> Result<Contribution> {
    match &envelope.message {
        Message::Raw(w) => {
            check_shape(w.classes(), w.dim(), classes, dim)?;
            Ok(Contribution::Weights(w.weights().clone()))
        }
        Message::CentroidSums(stats) => {
            check_shape(stats.sums.nrows(), stats.sums.ncols(), classes, dim)?;
            Ok(Contribution::Sums(stats.clone()))
        }
        Message::Compressed(bytes) => {
            let c = CompressedClassifier::decode(bytes, kind)?;
            if c.agent_id() != envelope.sender {
                return Err(Error::Protocol(format!(
                    "payload claims agent {} but was sent by {}",
                    c.agent_id(),
                    envelope.sender
                )));
            }
            check_shape(c.classes(), c.dim(), classes, dim)?;
            let keys = hrr::generate_keys_with_mode(c.agent_id(), c.classes(), c.dim(), c.mode())?;
            Ok(Contribution::Weights(
                hrr::decompress(&c, &keys)?.weights().clone(),
            ))
        }
    }
}

fn check_shape(classes: usize, dim: usize, want_classes: usize, want_dim: usize) -> Result<()> {
    if classes != want_classes || dim != want_dim {
        return Err(Error::Protocol(format!(
            "classifier shape {classes}x{dim} differs from {want_classes}x{want_dim}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeOutcome {
    /// Aggregated classifier of every agent, in network order.
    pub aggregated: Vec<ClassifierMatrix>,
    /// `f64` payload values in each producer's message.
    pub payload_values_per_producer: usize,
    /// Bytes of all point-to-point transmissions.
    pub payload_bytes_total: usize,
}

/// One-shot exchange: every agent sums its own classifier with those of its
/// neighbours. `compression = true` uses the default HRR inverse mode.
pub fn exchange_and_aggregate(
    network: &AgentNetwork,
    locals: &[ClassifierMatrix],
    compression: bool,
) -> Result<ExchangeOutcome> {
    exchange_and_aggregate_with(network, locals, compression.then(InverseMode::default))
}

pub fn exchange_and_aggregate_with(
    network: &AgentNetwork,
    locals: &[ClassifierMatrix],
    compression: Option<InverseMode>,
) -> Result<ExchangeOutcome> {
    if locals.len() != network.len() {
        return Err(Error::Protocol(format!(
            "{} classifiers for {} agents",
            locals.len(),
            network.len()
        )));
    }
    let first = &locals[0];
    let (kind, classes, dim) = (first.kind(), first.classes(), first.dim());
    for w in locals {
        check_shape(w.classes(), w.dim(), classes, dim)?;
        if w.kind() != kind {
            return Err(Error::Protocol("agents disagree on classifier kind".into()));
        }
    }

    let envelopes = locals
        .par_iter()
        .zip(network.agent_ids())
        .map(|(w, &id)| outgoing(id, w, compression))
        .collect::<Result<Vec<_>>>()?;

    // Every receiver reconstructs the same matrix from a given message, so a
    // message is unpacked once and shared.
    let needed: Vec<usize> = (0..network.len())
        .filter(|&s| (0..network.len()).any(|p| p != s && network.connected(p, s)))
        .collect();
    let received: HashMap<usize, Contribution> = needed
        .par_iter()
        .map(|&s| receive(&envelopes[s], kind, classes, dim).map(|c| (s, c)))
        .collect::<Result<_>>()?;

    let mut payload_bytes_total = 0;
    for (s, env) in envelopes.iter().enumerate() {
        let receivers = (0..network.len())
            .filter(|&p| p != s && network.connected(p, s))
            .count();
        payload_bytes_total += receivers * env.message.payload_bytes();
    }

    let aggregated = (0..network.len())
        .into_par_iter()
        .map(|p| aggregate_for(network, p, locals, &received, compression.is_some()))
        .collect::<Result<Vec<_>>>()?;

    Ok(ExchangeOutcome {
        aggregated,
        payload_values_per_producer: envelopes[0].message.payload_values(),
        payload_bytes_total,
    })
}

fn aggregate_for(
    network: &AgentNetwork,
    p: usize,
    locals: &[ClassifierMatrix],
    received: &HashMap<usize, Contribution>,
    compressed: bool,
) -> Result<ClassifierMatrix> {
    let own = &locals[p];
    let kind = own.kind();
    if kind == ClassifierKind::Centroid && !compressed {
        let own_stats = own
            .centroid_stats()
            .ok_or_else(|| Error::Protocol("centroid classifier lacks class sums".into()))?;
        let mut sums = nalgebra::DMatrix::zeros(own.classes(), own.dim());
        let mut counts = vec![0u64; own.classes()];
        for s in network.aggregation_set(p) {
            let stats = if s == p {
                own_stats
            } else {
                match &received[&s] {
                    Contribution::Sums(st) => st,
                    Contribution::Weights(_) => {
                        return Err(Error::Protocol("expected centroid sums".into()))
                    }
                }
            };
            sums += &stats.sums;
            for (c, n) in counts.iter_mut().zip(&stats.counts) {
                *c += n;
            }
        }
        return ClassifierMatrix::from_centroid_stats(CentroidStats { sums, counts });
    }

    let mut acc = nalgebra::DMatrix::zeros(own.classes(), own.dim());
    for s in network.aggregation_set(p) {
        if s == p {
            acc += own.weights();
        } else {
            match &received[&s] {
                Contribution::Weights(w) => acc += w,
                Contribution::Sums(_) => {
                    return Err(Error::Protocol("unexpected centroid sums".into()))
                }
            }
        }
    }
    ClassifierMatrix::from_weights(acc, kind)
}

/// Which test samples an agent is scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestEvaluation {
    /// Each agent holds a disjoint shard of the test split.
    #[default]
    LocalShards,
    /// Each agent is scored on the whole test split.
    FullTestSet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Protocol {
    Holdout {
        test_fraction: f64,
    },
    Kfold {
        k: usize,
    },
    /// Folds supplied by the caller (e.g. from a fold file).
    Predefined(Vec<Fold>),
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol::Kfold { k: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub agents: usize,
    pub seeds: usize,
    pub master_seed: u64,
    pub protocol: Protocol,
    pub test_evaluation: TestEvaluation,
    pub inverse_mode: InverseMode,
}

/// Correct/total counts of one agent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub correct: usize,
    pub total: usize,
}

impl Score {
    pub fn add(&mut self, other: Score) {
        self.correct += other.correct;
        self.total += other.total;
    }

    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub per_agent: Vec<Score>,
    pub payload_values_per_producer: usize,
    pub payload_bytes_total: usize,
    pub clamped_test_values: usize,
    /// Predictions on the full test split by agent 0 (centralized: the model).
    pub predictions: Vec<usize>,
}

/// Seed streams of one experiment repetition.
#[derive(Debug, Clone)]
pub struct SeedPlan {
    root: SeedSpec,
}

impl SeedPlan {
    pub fn new(master_seed: u64, seed_index: usize) -> Self {
        Self {
            root: SeedSpec::new(master_seed).with("repetition", seed_index as u64),
        }
    }

    pub fn split(&self) -> SeedSpec {
        self.root.with("split", 0)
    }

    pub fn projection(&self) -> SeedSpec {
        self.root.with("projection", 0)
    }

    pub fn train_partition(&self, fold: usize, agents: usize) -> SeedSpec {
        self.root
            .with("train-partition", fold as u64)
            .with("agents", agents as u64)
    }

    pub fn test_partition(&self, fold: usize, agents: usize) -> SeedSpec {
        self.root
            .with("test-partition", fold as u64)
            .with("agents", agents as u64)
    }

    /// `agents` distinct IDs; they seed the HRR keys.
    pub fn agent_ids(&self, agents: usize) -> Vec<u64> {
        let base = self.root.with("agent-ids", 0).derive_u64();
        (0..agents as u64).map(|p| base.wrapping_add(p)).collect()
    }
}

/// Trains and scores one version on one train/test split.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_fold(
    version: &ExperimentVersion,
    train: &Dataset,
    test: &Dataset,
    params: &ModelParams,
    agents: usize,
    plan: &SeedPlan,
    fold_index: usize,
    test_evaluation: TestEvaluation,
    inverse_mode: InverseMode,
) -> Result<FoldOutcome> {
    version.validate()?;
    let ranges = train.compute_ranges();
    let (train_n, _) = train.apply_ranges(&ranges)?;
    let (test_n, clamped_test_values) = test.apply_ranges(&ranges)?;

    let projection = rvfl::init_projection(train.features(), params.dim, &plan.projection())?;
    let h_train = encode_dataset(&train_n, &projection, params.kappa)?;
    let h_test = encode_dataset(&test_n, &projection, params.kappa)?;

    if version.kind == VersionKind::Centralized {
        let w = train_on_activations(&h_train, version.classifier, params.lambda)?;
        let predictions = classifier::predict_batch(&w, &h_test)?;
        let correct = predictions
            .iter()
            .zip(h_test.labels())
            .filter(|(a, b)| a == b)
            .count();
        return Ok(FoldOutcome {
            per_agent: vec![Score {
                correct,
                total: h_test.len(),
            }],
            payload_values_per_producer: 0,
            payload_bytes_total: 0,
            clamped_test_values,
            predictions,
        });
    }

    let train_parts = partition(
        h_train.len(),
        agents,
        &plan.train_partition(fold_index, agents),
    )?;
    let locals = train_parts
        .shards
        .par_iter()
        .map(|shard| {
            train_on_activations(&h_train.select(shard), version.classifier, params.lambda)
        })
        .collect::<Result<Vec<_>>>()?;

    let (models, payload_values_per_producer, payload_bytes_total) = match version.kind {
        VersionKind::Local => (locals, 0, 0),
        _ => {
            let network = AgentNetwork::fully_connected(plan.agent_ids(agents))?;
            let mode = version.compression.then_some(inverse_mode);
            let out = exchange_and_aggregate_with(&network, &locals, mode)?;
            (
                out.aggregated,
                out.payload_values_per_producer,
                out.payload_bytes_total,
            )
        }
    };

    let test_shards: Vec<Vec<usize>> = match test_evaluation {
        TestEvaluation::LocalShards => {
            partition(
                h_test.len(),
                agents,
                &plan.test_partition(fold_index, agents),
            )?
            .shards
        }
        TestEvaluation::FullTestSet => vec![(0..h_test.len()).collect(); agents],
    };
    let per_agent = models
        .par_iter()
        .zip(&test_shards)
        .map(|(w, shard)| {
            let t = h_test.select(shard);
            Ok(Score {
                correct: classifier::count_correct(w, &t)?,
                total: t.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let predictions = classifier::predict_batch(&models[0], &h_test)?;
    Ok(FoldOutcome {
        per_agent,
        payload_values_per_producer,
        payload_bytes_total,
        clamped_test_values,
        predictions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionResult {
    /// Pooled accuracy (all agents and folds) of each repetition.
    pub per_seed_accuracy: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Accuracy of each agent pooled over folds and repetitions.
    pub per_agent_accuracy: Vec<f64>,
    pub payload_values_per_producer: usize,
    pub payload_bytes_total: usize,
    pub clamped_test_values: usize,
    pub warnings: Vec<String>,
}

pub fn folds_for(
    dataset: &Dataset,
    protocol: &Protocol,
    seed: &SeedSpec,
) -> Result<(Vec<Fold>, Vec<String>)> {
    let mode = match protocol {
        Protocol::Predefined(folds) => return Ok((folds.clone(), Vec::new())),
        Protocol::Holdout { test_fraction } => SplitMode::Holdout {
            test_fraction: *test_fraction,
        },
        Protocol::Kfold { k } => SplitMode::Kfold { k: *k },
    };
    let out = data::split(
        dataset,
        &SplitSpec {
            mode,
            stratified: true,
            seed: seed.clone(),
        },
    )?;
    Ok((out.folds, out.warnings))
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `version` over `config.seeds` repetitions; a failing repetition
/// aborts the run and is reported by index.
pub fn run_version(
    version: &ExperimentVersion,
    dataset: &Dataset,
    config: &RunConfig,
) -> Result<VersionResult> {
    version.validate()?;
    if config.seeds < 1 {
        return Err(Error::InvalidParameter("need at least one seed".into()));
    }
    let agents = match version.kind {
        VersionKind::Centralized => 1,
        _ => config.agents,
    };
    if agents < 1 {
        return Err(Error::InvalidParameter("agent count N must be >= 1".into()));
    }

    let mut per_seed_accuracy = Vec::with_capacity(config.seeds);
    let mut per_agent = vec![Score::default(); agents];
    let mut payload_values_per_producer = 0;
    let mut payload_bytes_total = 0;
    let mut clamped_test_values = 0;
    let mut warnings = Vec::new();

    for seed in 0..config.seeds {
        let plan = SeedPlan::new(config.master_seed, seed);
        let mut run = || -> Result<Score> {
            let (folds, w) = folds_for(dataset, &config.protocol, &plan.split())?;
            warnings.extend(w);
            let mut pooled = Score::default();
            for (f, fold) in folds.iter().enumerate() {
                let train = dataset.subset(&fold.train);
                let test = dataset.subset(&fold.test);
                if train.len() < agents || test.len() < agents {
                    return Err(Error::InsufficientData {
                        samples: train.len().min(test.len()),
                        agents,
                    });
                }
                let out = evaluate_fold(
                    version,
                    &train,
                    &test,
                    &config.params,
                    agents,
                    &plan,
                    f,
                    config.test_evaluation,
                    config.inverse_mode,
                )?;
                for (acc, s) in per_agent.iter_mut().zip(&out.per_agent) {
                    acc.add(*s);
                    pooled.add(*s);
                }
                payload_values_per_producer = out.payload_values_per_producer;
                payload_bytes_total += out.payload_bytes_total;
                clamped_test_values += out.clamped_test_values;
            }
            Ok(pooled)
        };
        let pooled = run().map_err(|e| Error::SeedFailed {
            seed,
            source: Box::new(e),
        })?;
        per_seed_accuracy.push(pooled.accuracy());
    }

    let (mean, std) = mean_std(&per_seed_accuracy);
    warnings.sort();
    warnings.dedup();
    Ok(VersionResult {
        per_seed_accuracy,
        mean,
        std,
        per_agent_accuracy: per_agent.iter().map(Score::accuracy).collect(),
        payload_values_per_producer,
        payload_bytes_total,
        clamped_test_values,
        warnings,
    })
}
