//! Subcommand definitions and handlers.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hhl_depth::dataset::{
    attach_depths, build_corpus, bundled_iris, derive_seed, featurize, label_corpus, parse_iris,
    positive_fraction, read_jsonl, split, write_histogram_csv, write_jsonl, CorpusSpec,
    DepthCutoff, FeatureTable, Sample,
};
use hhl_depth::features::Variant;
use hhl_depth::metrics::{default_grid, learning_curve, write_curve_csv, write_report_csv, ReportRow};
use hhl_depth::mlp::{Mlp, MlpClassifier};

use crate::config::{PipelineConfig, CONFIG_ENV};
use crate::error::CliError;
use crate::study::{evaluate, fit, iris_study};

#[derive(Debug, Parser)]
#[command(name = "hhl-depth", version, about = "Label linear systems by HHL circuit depth and learn the labels from matrix features")]
pub struct Cli {
    /// key = value config file (defaults to the file named by HHL_DEPTH_CONFIG)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable, applied after the config file
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads for corpus generation, depth and feature extraction
    /// (default: logical CPU count)
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the random matrix corpus as JSONL
    Generate(GenerateArgs),
    /// Attach eigen-register size and HHL circuit depth to every matrix
    Depth(DepthArgs),
    /// Label by depth cutoff and write a feature CSV
    Featurize(FeaturizeArgs),
    /// Train the classifier on a feature CSV
    Train(TrainArgs),
    /// Score a trained model on a labeled feature CSV
    Evaluate(EvaluateArgs),
    /// Iris case study: sample, label, histogram, match and retrain
    Iris(IrisArgs),
    /// Cross-validated learning curve
    Curve(CurveArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output corpus (JSONL)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Base seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Matrix sizes, comma separated (subset of 2,4,8,16)
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Matrices per (size, sparsity) configuration
    #[arg(long)]
    pub per_config: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    /// Input corpus (JSONL)
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Output corpus with depths (JSONL)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    /// Corpus with depths (JSONL)
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Output feature table (CSV)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Feature variant: d1, d2, d3 or d4
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Depth cutoff: absolute:<layers> or quantile:<positive fraction>
    #[arg(long)]
    pub cutoff: Option<DepthCutoff>,
    /// Also write the stratified training part here
    #[arg(long, value_name = "PATH", requires = "test_out")]
    pub train_out: Option<PathBuf>,
    /// Also write the stratified test part here
    #[arg(long, value_name = "PATH", requires = "train_out")]
    pub test_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled feature table (CSV)
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Output model (JSON)
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Pick the decision threshold maximizing balanced accuracy on the
    /// validation hold-out
    #[arg(long)]
    pub tune_threshold: bool,
    /// Training seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Trained model (JSON)
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Labeled feature table (CSV)
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Output report (CSV)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Value of the dataset_variant column (default: the configured variant)
    #[arg(long)]
    pub name: Option<String>,
    /// Value of the split_name column
    #[arg(long, default_value = "Test")]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct IrisArgs {
    /// Iris table (CSV); the bundled copy is used when absent
    #[arg(long, value_name = "PATH")]
    pub iris: Option<PathBuf>,
    /// Generic corpus with depths (JSONL); calibrates the cutoff and trains
    /// the generic d4 model
    #[arg(long, value_name = "PATH")]
    pub pool: PathBuf,
    /// Number of Iris matrices to sample
    #[arg(long)]
    pub count: Option<usize>,
    /// Build the distribution-matched set and retrain on it
    #[arg(long = "match")]
    pub with_match: bool,
    /// Directory for report.csv, histogram.csv, iris.jsonl and selected.jsonl
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Labeled feature table (CSV)
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Output curve (CSV)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Number of cross-validation folds
    #[arg(long)]
    pub folds: Option<usize>,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))
}

fn read_corpus(path: &Path) -> Result<Vec<Sample>, CliError> {
    let samples = read_jsonl(open(path)?)?;
    if samples.is_empty() {
        return Err(CliError::Data(format!("{} holds no samples", path.display())));
    }
    Ok(samples)
}

fn read_table(path: &Path) -> Result<FeatureTable, CliError> {
    let t = FeatureTable::read_csv(open(path)?)?;
    if t.is_empty() {
        return Err(CliError::Data(format!("{} holds no rows", path.display())));
    }
    Ok(t)
}

fn write_table(t: &FeatureTable, path: &Path) -> Result<(), CliError> {
    t.write_csv(create(path)?)?;
    Ok(())
}

pub fn config_for(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    cfg.apply_overrides(&cli.overrides)?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let mut cfg = config_for(&cli).map_err(|e| match e {
        CliError::Usage(m) if cli.config.is_none() && std::env::var_os(CONFIG_ENV).is_some() => {
            CliError::Usage(format!("{m} (from {CONFIG_ENV})"))
        }
        other => other,
    })?;
    match cli.command {
        Command::Generate(a) => {
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            if let Some(s) = a.sizes {
                cfg.sizes = s;
            }
            if let Some(p) = a.per_config {
                cfg.per_config = p;
            }
            generate(&cfg, &a.out)
        }
        Command::Depth(a) => depth(&a.input, &a.out),
        Command::Featurize(a) => {
            if let Some(v) = a.variant {
                cfg.variant = v;
            }
            if let Some(c) = a.cutoff {
                cfg.cutoff = c;
            }
            featurize_cmd(&cfg, &a)
        }
        Command::Train(a) => {
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            cfg.tune_threshold |= a.tune_threshold;
            train(&cfg, &a.input, &a.model)
        }
        Command::Evaluate(a) => {
            let name = a.name.clone().unwrap_or_else(|| cfg.variant.to_string());
            evaluate_cmd(&a.model, &a.input, &a.out, &name, &a.split)
        }
        Command::Iris(a) => {
            if let Some(c) = a.count {
                cfg.iris_count = c;
                cfg.match_total = c;
            }
            iris(&cfg, &a)
        }
        Command::Curve(a) => {
            if let Some(f) = a.folds {
                cfg.folds = f;
            }
            curve(&cfg, &a.input, &a.out)
        }
    }
}

pub fn generate(cfg: &PipelineConfig, out: &Path) -> Result<(), CliError> {
    let spec = CorpusSpec {
        sizes: cfg.sizes.clone(),
        per_config: cfg.per_config,
        kappa_max: cfg.kappa_max,
        seed: cfg.seed,
    };
    let corpus = build_corpus(&spec)?;
    write_jsonl(&corpus, create(out)?)?;
    eprintln!("generated {} matrices", corpus.len());
    Ok(())
}

pub fn depth(input: &Path, out: &Path) -> Result<(), CliError> {
    let mut corpus = read_corpus(input)?;
    attach_depths(&mut corpus)?;
    write_jsonl(&corpus, create(out)?)?;
    Ok(())
}

fn featurize_cmd(cfg: &PipelineConfig, a: &FeaturizeArgs) -> Result<(), CliError> {
    let mut corpus = read_corpus(&a.input)?;
    let threshold = label_corpus(&mut corpus, cfg.cutoff)?;
    let table = featurize(&corpus, cfg.variant)?;
    let labels = table.labels()?;
    eprintln!(
        "depth threshold {threshold}, positive fraction {:.4}",
        positive_fraction(&labels)
    );
    write_table(&table, &a.out)?;
    if let (Some(tr_path), Some(te_path)) = (&a.train_out, &a.test_out) {
        let (tr, te) = split(&labels, cfg.test_fraction, derive_seed(cfg.seed, &[0x5917]))?;
        write_table(&table.subset(&tr), tr_path)?;
        write_table(&table.subset(&te), te_path)?;
    }
    Ok(())
}

pub fn train(cfg: &PipelineConfig, input: &Path, model_path: &Path) -> Result<(), CliError> {
    let table = read_table(input)?;
    let model = fit(&table, cfg)?;
    let mut w = create(model_path)?;
    model.save(&mut w)?;
    w.flush()?;
    eprintln!(
        "trained {} epochs ({}), threshold {}",
        model.train_meta.epochs_run, model.train_meta.stop_reason, model.threshold
    );
    Ok(())
}

fn evaluate_cmd(model_path: &Path, input: &Path, out: &Path, name: &str, split_name: &str) -> Result<(), CliError> {
    let model = Mlp::load(open(model_path)?)?;
    let table = read_table(input)?;
    let report = evaluate(&model, &table)?;
    let row = ReportRow {
        dataset_variant: name.to_string(),
        split_name: split_name.to_string(),
        report,
    };
    write_report_csv(std::slice::from_ref(&row), create(out)?)?;
    eprintln!("accuracy {:.4}", row.report.accuracy);
    Ok(())
}

fn iris(cfg: &PipelineConfig, a: &IrisArgs) -> Result<(), CliError> {
    let rows = match &a.iris {
        Some(p) => parse_iris(open(p)?)?,
        None => bundled_iris(),
    };
    let corpus = read_corpus(&a.pool)?;
    let study = iris_study(&corpus, &rows, a.with_match, cfg)?;
    std::fs::create_dir_all(&a.out_dir)?;
    write_report_csv(&study.report_rows(), create(&a.out_dir.join("report.csv"))?)?;
    write_jsonl(&study.iris, create(&a.out_dir.join("iris.jsonl"))?)?;
    let mut sets = vec![("iris", &study.iris_hist), ("random", &study.random_hist)];
    if let Some(m) = &study.matched {
        sets.push(("selected", &m.selected_hist));
        sets.push(("unselected", &m.unselected_hist));
        write_jsonl(&m.selected, create(&a.out_dir.join("selected.jsonl"))?)?;
    }
    write_histogram_csv(&sets, create(&a.out_dir.join("histogram.csv"))?)?;
    eprintln!(
        "depth threshold {}, iris positive fraction {:.4}",
        study.threshold,
        study.positive_fraction()
    );
    Ok(())
}

fn curve(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<(), CliError> {
    let table = read_table(input)?;
    let y = table.labels()?;
    let base = cfg.train_config();
    let val_fraction = cfg.val_fraction;
    let tune = cfg.tune_threshold;
    let factory = move |seed: u64| {
        let mut c = MlpClassifier::new(hhl_depth::mlp::TrainConfig { seed, ..base });
        c.val_fraction = val_fraction;
        c.tune = tune;
        c
    };
    let points = learning_curve(factory, &table.rows, &y, cfg.folds, &default_grid(), cfg.seed)?;
    write_curve_csv(&points, create(out)?)?;
    Ok(())
}
