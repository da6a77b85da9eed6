use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use distrvfl::classifier::ClassifierKind;
use distrvfl::data::LabelColumn;
use distrvfl::harness::config::{
    DatasetEntry, DatasetSource, ExperimentConfig, Hyperparameters, ProtocolSpec, SynthSpec,
};
use distrvfl::harness::report::{self, ReportFormat, ScatterSide};
use distrvfl::harness::{grid, stats, suite, GridSpec, Selection};
use distrvfl::hdc::InverseMode;
use distrvfl::sim::{ExperimentVersion, TestEvaluation, VersionKind};

/// Simulates distributed RVFL classification over a network of agents.
#[derive(Debug, Parser)]
#[command(name = "distrvfl")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select (D, lambda, kappa) by grid search with centralized RLS.
    Grid(GridArgs),
    /// Run experiment versions and write result records.
    Run(RunArgs),
    /// Re-render saved result records as tables, CSV or scatter data.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// CSV file, or a synthetic spec such as
    /// `synth:classes=3,features=10,samples=6000,separation=2.5,seed=1`.
    #[arg(long, conflicts_with = "manifest")]
    dataset: Option<String>,
    /// TOML manifest listing several CSV datasets.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Label column: zero-based index, header name, or `last`.
    #[arg(long, default_value = "last")]
    label_column: String,
    /// The CSV file starts with a header row.
    #[arg(long)]
    header: bool,
    /// File with one fold number per sample.
    #[arg(long)]
    folds: Option<PathBuf>,
}

impl DataArgs {
    fn source(&self) -> Result<DatasetSource> {
        match (&self.dataset, &self.manifest) {
            (Some(d), None) if d.starts_with("synth:") => Ok(DatasetSource {
                synth: Some(d.parse::<SynthSpec>()?),
                ..Default::default()
            }),
            (Some(d), None) => {
                let path = PathBuf::from(d);
                let name = path
                    .file_stem()
                    .map_or_else(|| d.clone(), |s| s.to_string_lossy().into_owned());
                Ok(DatasetSource {
                    csv: Some(DatasetEntry {
                        name,
                        path,
                        label_column: self.label_column.parse::<LabelColumn>()?,
                        header: self.header,
                        folds: self.folds.clone(),
                    }),
                    ..Default::default()
                })
            }
            (None, Some(m)) => Ok(DatasetSource {
                manifest: Some(m.clone()),
                ..Default::default()
            }),
            _ => bail!("give one of --dataset or --manifest"),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SelectionArg {
    Holdout,
    Cv,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Score candidates on a stratified 50% holdout or by cross-validation.
    #[arg(long, value_enum, default_value = "holdout")]
    selection: SelectionArg,
    /// Folds for `--selection cv`.
    #[arg(long, default_value_t = 4)]
    cv_folds: usize,
    /// Restrict the dimension axis (comma-separated).
    #[arg(long, value_delimiter = ',')]
    dim: Vec<usize>,
    /// Restrict the lambda axis (comma-separated).
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    /// Restrict the kappa axis (comma-separated).
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<u32>,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write every evaluated grid point as JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InverseArg {
    Involution,
    Exact,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML experiment config; the flags below build one otherwise.
    #[arg(long, conflicts_with_all = ["dataset", "manifest"])]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    /// Versions to run: centralized, local, distributed, distributed+hrr.
    #[arg(
        long = "version",
        value_delimiter = ',',
        default_value = "centralized,local,distributed"
    )]
    versions: Vec<String>,
    /// Exchange HRR-compressed classifiers in the distributed version.
    #[arg(long)]
    compress: bool,
    /// Classifiers: rls, centroid.
    #[arg(long, value_delimiter = ',', default_value = "rls")]
    classifier: Vec<ClassifierKind>,
    /// Agent counts N (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "10")]
    agents: Vec<usize>,
    /// Repetitions with independent projections, partitions and keys.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hidden dimension D; with --lambda and --kappa skips the grid search.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    kappa: Option<u32>,
    /// Accept fixed hyperparameters outside the default grid.
    #[arg(long)]
    allow_off_grid: bool,
    /// Folds for stratified cross-validation.
    #[arg(long, default_value_t = 4)]
    kfold: usize,
    /// Score every agent on the whole test split instead of a local shard.
    #[arg(long)]
    full_test: bool,
    /// HRR unbinding inverse.
    #[arg(long, value_enum, default_value = "involution")]
    inverse: InverseArg,
    /// Keep only datasets with more than this many training samples.
    #[arg(long)]
    min_train: Option<usize>,
    /// Record wall time (reruns are then no longer byte-identical).
    #[arg(long)]
    wall_time: bool,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Report formats (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "jsonl,csv,table")]
    format: Vec<ReportFormat>,
}

impl RunArgs {
    fn versions(&self) -> Result<Vec<ExperimentVersion>> {
        let mut out = Vec::new();
        for name in &self.versions {
            let (kind, compressed) = match name.as_str() {
                "distributed+hrr" => (VersionKind::Distributed, true),
                other => {
                    let kind: VersionKind = other.parse()?;
                    (kind, self.compress && kind == VersionKind::Distributed)
                }
            };
            for &classifier in &self.classifier {
                out.push(ExperimentVersion::new(kind, compressed, classifier)?);
            }
        }
        out.dedup();
        Ok(out)
    }

    fn config(&self) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            return Ok(ExperimentConfig::load(path)?);
        }
        let cfg = ExperimentConfig {
            dataset: self.data.source()?,
            versions: self.versions()?,
            agents: self.agents.clone(),
            seeds: self.seeds,
            master_seed: self.seed,
            hyperparameters: Hyperparameters {
                dim: self.dim,
                lambda: self.lambda,
                kappa: self.kappa,
                allow_off_grid: self.allow_off_grid,
                ..Default::default()
            },
            protocol: ProtocolSpec::Kfold { k: self.kfold },
            test_evaluation: if self.full_test {
                TestEvaluation::FullTestSet
            } else {
                TestEvaluation::LocalShards
            },
            inverse_mode: match self.inverse {
                InverseArg::Involution => InverseMode::Involution,
                InverseArg::Exact => InverseMode::Exact,
            },
            min_train_samples: self.min_train,
            record_wall_time: self.wall_time,
            output: Some(self.out.clone()),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// JSONL file written by `run`.
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "report")]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "table")]
    format: Vec<ReportFormat>,
    /// Scatter pair `X,Y`, each `<version>:<classifier>[@N]`, e.g.
    /// `centralized:centroid,centralized:rls`. Repeatable.
    #[arg(long)]
    scatter: Vec<String>,
    /// Print the relative improvement of distributed over local per N.
    #[arg(long)]
    improvement: bool,
}

fn grid_cmd(args: &GridArgs) -> Result<()> {
    let mut spec = GridSpec::default();
    if !args.dim.is_empty() {
        spec.dims = args.dim.clone();
    }
    if !args.lambda.is_empty() {
        spec.lambdas = args.lambda.clone();
    }
    if !args.kappa.is_empty() {
        spec.kappas = args.kappa.clone();
    }
    let selection = match args.selection {
        SelectionArg::Holdout => Selection::Holdout { test_fraction: 0.5 },
        SelectionArg::Cv => Selection::CrossValidated { k: args.cv_folds },
    };
    let cfg = ExperimentConfig {
        dataset: args.data.source()?,
        versions: vec![ExperimentVersion::new(
            VersionKind::Centralized,
            false,
            ClassifierKind::Rls,
        )?],
        agents: vec![1],
        seeds: 1,
        master_seed: args.seed,
        hyperparameters: Hyperparameters {
            grid: spec.clone(),
            selection,
            ..Default::default()
        },
        protocol: ProtocolSpec::default(),
        test_evaluation: TestEvaluation::default(),
        inverse_mode: InverseMode::default(),
        min_train_samples: None,
        record_wall_time: false,
        output: None,
    };
    let mut results = Vec::new();
    for ds in suite::load_datasets(&cfg)? {
        let r = grid::grid_search(
            &ds.dataset,
            &spec,
            selection,
            &distrvfl::SeedSpec::new(args.seed).with("grid", 0),
        )?;
        println!(
            "{}\tD={}\tlambda={}\tkappa={}\taccuracy={:.4}",
            ds.dataset.name(),
            r.best.dim,
            r.best.lambda,
            r.best.kappa,
            r.best_accuracy
        );
        results.push((ds.dataset.name().to_owned(), r));
    }
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&results)?;
        write_file(path, &json)?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .context("output path has no file name")?
        .to_string_lossy()
        .into_owned();
    report::write_files(dir, &[(name, contents.to_owned())])?;
    Ok(())
}

fn run_cmd(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let out = cfg.output.clone().unwrap_or_else(|| args.out.clone());
    let datasets = suite::load_datasets(&cfg)?;
    if datasets.is_empty() {
        bail!("no datasets left to run");
    }
    let mut records = suite::run_suite(&cfg, &datasets)?;
    report::sort_records(&mut records);
    for &format in &args.format {
        for path in report::report(&records, format, &out)? {
            log::info!("wrote {}", path.display());
        }
    }
    print!("{}", report::render_table(&report::summary_table(&records)));
    Ok(())
}

fn report_cmd(args: &ReportArgs) -> Result<()> {
    let records = report::read_jsonl(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    for &format in &args.format {
        report::report(&records, format, &args.out)?;
    }
    for pair in &args.scatter {
        let (x, y) = pair.split_once(',').context("scatter pair must be X,Y")?;
        let (xs, ys): (ScatterSide, ScatterSide) = (x.parse()?, y.parse()?);
        // Unmatched or ambiguous sides are already logged by the library.
        let (points, _) = report::scatter_pairs(&records, &xs, &ys);
        let name = format!("scatter_{x}_vs_{y}.csv").replace([':', '+', '@'], "-");
        report::write_files(&args.out, &[(name, report::scatter_csv(&points)?)])?;
        if points.len() >= 2 {
            let xv: Vec<f64> = points.iter().map(|p| p.x).collect();
            let yv: Vec<f64> = points.iter().map(|p| p.y).collect();
            match stats::pearson(&xv, &yv) {
                Ok(r) => println!("{x} vs {y}: {} datasets, pearson r = {r:.4}", points.len()),
                Err(e) => println!("{x} vs {y}: {} datasets, {e}", points.len()),
            }
        }
    }
    if args.improvement {
        for compressed in [false, true] {
            let Ok(rows) = stats::relative_improvement(&records, compressed) else {
                continue;
            };
            for r in rows {
                println!(
                    "{}\t{}\tN={}\t{}\tlocal={:.4}\tdistributed={:.4}\timprovement={:.1}%",
                    r.dataset,
                    r.classifier,
                    r.agents,
                    if compressed { "hrr" } else { "raw" },
                    r.local,
                    r.distributed,
                    r.percent
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Grid(a) => grid_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
