//! `key = value` pipeline configuration.
//!
//! Layering is defaults, then the config file, then `--set` pairs and
//! dedicated flags, each later layer overriding the earlier ones.

use std::fmt::Write as _;
use std::path::Path;

use hhl_depth::dataset::DepthCutoff;
use hhl_depth::features::Variant;
use hhl_depth::mlp::TrainConfig;

use crate::error::CliError;

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "HHL_DEPTH_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub per_config: usize,
    pub kappa_max: f64,
    pub cutoff: DepthCutoff,
    pub variant: Variant,
    pub test_fraction: f64,
    pub val_fraction: f64,
    pub tune_threshold: bool,
    pub folds: usize,
    pub iris_count: usize,
    pub match_total: usize,
    pub pool_max_draws: usize,
    pub train: TrainConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            sizes: vec![2, 4, 8, 16],
            per_config: 200,
            kappa_max: 1000.0,
            cutoff: DepthCutoff::Quantile(0.476),
            variant: Variant::D1,
            test_fraction: 0.2,
            val_fraction: 0.1,
            tune_threshold: false,
            folds: 5,
            iris_count: 500,
            match_total: 500,
            pool_max_draws: 5_000_000,
            train: TrainConfig::default(),
        }
    }
}

pub const KEYS: &[&str] = &[
    "seed",
    "sizes",
    "per_config",
    "kappa_max",
    "cutoff",
    "variant",
    "test_fraction",
    "val_fraction",
    "tune_threshold",
    "folds",
    "iris_count",
    "match_total",
    "pool_max_draws",
    "lr0",
    "momentum",
    "patience",
    "lr_decay_divisor",
    "min_lr",
    "max_epochs",
    "batch_size",
    "early_stop_tolerance",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value {value:?} for {key}")))
}

impl PipelineConfig {
    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(key, v)?,
            "sizes" => {
                self.sizes = v
                    .split(',')
                    .map(|p| parse(key, p.trim()))
                    .collect::<Result<_, _>>()?
            }
            "per_config" => self.per_config = parse(key, v)?,
            "kappa_max" => self.kappa_max = parse(key, v)?,
            "cutoff" => {
                self.cutoff = v.parse().map_err(|e| CliError::Usage(format!("{e}")))?
            }
            "variant" => {
                self.variant = v.parse().map_err(|e| CliError::Usage(format!("{e}")))?
            }
            "test_fraction" => self.test_fraction = parse(key, v)?,
            "val_fraction" => self.val_fraction = parse(key, v)?,
            "tune_threshold" => self.tune_threshold = parse(key, v)?,
            "folds" => self.folds = parse(key, v)?,
            "iris_count" => self.iris_count = parse(key, v)?,
            "match_total" => self.match_total = parse(key, v)?,
            "pool_max_draws" => self.pool_max_draws = parse(key, v)?,
            "lr0" => self.train.lr0 = parse(key, v)?,
            "momentum" => self.train.momentum = parse(key, v)?,
            "patience" => self.train.patience = parse(key, v)?,
            "lr_decay_divisor" => self.train.lr_decay_divisor = parse(key, v)?,
            "min_lr" => self.train.min_lr = parse(key, v)?,
            "max_epochs" => self.train.max_epochs = parse(key, v)?,
            "batch_size" => self.train.batch_size = parse(key, v)?,
            "early_stop_tolerance" => self.train.early_stop_tolerance = parse(key, v)?,
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every pair of a config text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::Usage(format!("config line {}: {}", i + 1, e.message())))?;
        }
        Ok(())
    }

    /// Defaults overlaid with `path`, or with the file named by
    /// [`CONFIG_ENV`] when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let env = std::env::var_os(CONFIG_ENV).filter(|p| !p.is_empty());
        let path = path.map(Path::to_path_buf).or_else(|| env.map(Into::into));
        if let Some(p) = path {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            cfg.apply_text(&text)?;
        }
        Ok(cfg)
    }

    /// Applies `KEY=VALUE` overrides.
    pub fn apply_overrides(&mut self, pairs: &[String]) -> Result<(), CliError> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {p:?}")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train
        }
    }

    /// Renders every key, in a form [`PipelineConfig::apply_text`] reads back.
    pub fn render(&self) -> String {
        let t = &self.train;
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        let cutoff = match self.cutoff {
            DepthCutoff::Absolute(x) => format!("absolute:{x}"),
            DepthCutoff::Quantile(q) => format!("quantile:{q}"),
        };
        let mut s = String::new();
        let pairs: [(&str, String); 21] = [
            ("seed", self.seed.to_string()),
            ("sizes", sizes.join(",")),
            ("per_config", self.per_config.to_string()),
            ("kappa_max", self.kappa_max.to_string()),
            ("cutoff", cutoff),
            ("variant", self.variant.to_string()),
            ("test_fraction", self.test_fraction.to_string()),
            ("val_fraction", self.val_fraction.to_string()),
            ("tune_threshold", self.tune_threshold.to_string()),
            ("folds", self.folds.to_string()),
            ("iris_count", self.iris_count.to_string()),
            ("match_total", self.match_total.to_string()),
            ("pool_max_draws", self.pool_max_draws.to_string()),
            ("lr0", t.lr0.to_string()),
            ("momentum", t.momentum.to_string()),
            ("patience", t.patience.to_string()),
            ("lr_decay_divisor", t.lr_decay_divisor.to_string()),
            ("min_lr", t.min_lr.to_string()),
            ("max_epochs", t.max_epochs.to_string()),
            ("batch_size", t.batch_size.to_string()),
            ("early_stop_tolerance", t.early_stop_tolerance.to_string()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
