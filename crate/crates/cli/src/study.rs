//! Experiment orchestration shared by the subcommands and the acceptance
//! suite: variant comparisons on a labeled corpus and the Iris case study.

use hhl_depth::dataset::{
    attach_dilated_depths, derive_seed, distribution_match, featurize, iris_matrices,
    kappa_histogram, label_corpus, label_depth, matching_pool, resolve_cutoff, split,
    DepthCutoff, FeatureTable, KappaHistogram, Sample,
};
use hhl_depth::features::Variant;
use hhl_depth::metrics::{score, ReportRow, ScoreReport};
use hhl_depth::mlp::{fit_with_holdout, Mlp, HIDDEN_LAYERS};

use crate::config::PipelineConfig;
use crate::error::CliError;

/// A trained model with its held-out scores.
#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Mlp,
    pub test: ScoreReport,
    pub train_size: usize,
    pub test_size: usize,
}

pub fn fit(table: &FeatureTable, cfg: &PipelineConfig) -> Result<Mlp, CliError> {
    let y = table.labels()?;
    fit_with_holdout(
        &table.rows,
        &y,
        &HIDDEN_LAYERS,
        cfg.val_fraction,
        cfg.tune_threshold,
        &cfg.train_config(),
    )
    .map_err(CliError::Numeric)
}

pub fn evaluate(model: &Mlp, table: &FeatureTable) -> Result<ScoreReport, CliError> {
    let preds = model.predict(&table.rows)?;
    Ok(score(&preds, &table.labels()?)?)
}

/// Stratified train/test split of a labeled table, fit on train, score on test.
pub fn train_test(table: &FeatureTable, cfg: &PipelineConfig) -> Result<Trained, CliError> {
    let (tr, te) = split(&table.labels()?, cfg.test_fraction, derive_seed(cfg.seed, &[0x5917]))?;
    let train = table.subset(&tr);
    let test = table.subset(&te);
    let model = fit(&train, cfg)?;
    let report = evaluate(&model, &test)?;
    Ok(Trained {
        model,
        test: report,
        train_size: tr.len(),
        test_size: te.len(),
    })
}

/// Labeled feature table for `variant`. The raw-element variant only exists
/// for 4x4 matrices, so it uses the 4x4 part of the corpus relabeled with the
/// same cutoff rule; the other variants use the whole corpus.
pub fn variant_table(
    corpus: &[Sample],
    variant: Variant,
    cutoff: DepthCutoff,
) -> Result<(FeatureTable, f64), CliError> {
    let mut samples: Vec<Sample> = if variant == Variant::D4 {
        corpus.iter().filter(|s| s.n == 4).cloned().collect()
    } else {
        corpus.to_vec()
    };
    let threshold = label_corpus(&mut samples, cutoff)?;
    Ok((featurize(&samples, variant)?, threshold))
}

#[derive(Debug, Clone)]
pub struct VariantResult {
    pub variant: Variant,
    pub threshold: f64,
    pub trained: Trained,
}

/// Trains and scores each variant on the depth-annotated corpus.
pub fn compare_variants(
    corpus: &[Sample],
    variants: &[Variant],
    cfg: &PipelineConfig,
) -> Result<Vec<VariantResult>, CliError> {
    variants
        .iter()
        .map(|&variant| {
            let (table, threshold) = variant_table(corpus, variant, cfg.cutoff)?;
            Ok(VariantResult {
                variant,
                threshold,
                trained: train_test(&table, cfg)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct IrisStudy {
    /// Absolute depth threshold induced by the configured cutoff on the corpus.
    pub threshold: f64,
    pub iris: Vec<Sample>,
    pub iris_hist: KappaHistogram,
    /// Histogram of the 4x4, s=4 corpus matrices before augmentation.
    pub random_hist: KappaHistogram,
    pub pool_size: usize,
    /// Present when matching was requested.
    pub matched: Option<MatchedStudy>,
    /// Generic-corpus d4 model scored on the Iris matrices.
    pub generic_iris: ScoreReport,
    pub generic: Trained,
}

#[derive(Debug, Clone)]
pub struct MatchedStudy {
    pub selected: Vec<Sample>,
    /// The pool minus the selected set.
    pub unselected_hist: KappaHistogram,
    pub selected_hist: KappaHistogram,
    pub trained: Trained,
    pub iris_test: ScoreReport,
}

impl IrisStudy {
    pub fn positive_fraction(&self) -> f64 {
        let pos = self.iris.iter().filter(|s| s.label == Some(1)).count();
        pos as f64 / self.iris.len() as f64
    }

    /// Rows in the order of the Iris score tables.
    pub fn report_rows(&self) -> Vec<ReportRow> {
        let mut rows = vec![
            ReportRow {
                dataset_variant: "generic-d4".into(),
                split_name: "Validation".into(),
                report: self.generic.test.clone(),
            },
            ReportRow {
                dataset_variant: "generic-d4".into(),
                split_name: "Test (iris)".into(),
                report: self.generic_iris.clone(),
            },
        ];
        if let Some(m) = &self.matched {
            rows.push(ReportRow {
                dataset_variant: "matched-d4".into(),
                split_name: "Validation".into(),
                report: m.trained.test.clone(),
            });
            rows.push(ReportRow {
                dataset_variant: "matched-d4".into(),
                split_name: "Test (iris)".into(),
                report: m.iris_test.clone(),
            });
        }
        rows
    }
}

fn label_all(samples: &mut [Sample], threshold: f64) -> Result<(), CliError> {
    for s in samples.iter_mut() {
        s.label = Some(label_depth(s.depth()?, threshold));
    }
    Ok(())
}

/// Runs the Iris case study against a depth-annotated generic corpus.
///
/// Iris matrices are labeled by the depth of their dilation under the
/// threshold the cutoff induces on the corpus. The generic d4 model is the
/// one from [`variant_table`]; the matched model trains on a pool subset
/// whose condition-number histogram follows the Iris one, labeled the same
/// way as the Iris matrices.
pub fn iris_study(
    corpus: &[Sample],
    iris_rows: &[[f64; 4]],
    with_match: bool,
    cfg: &PipelineConfig,
) -> Result<IrisStudy, CliError> {
    let depths: Vec<usize> = corpus.iter().map(Sample::depth).collect::<Result<_, _>>()?;
    let threshold = resolve_cutoff(cfg.cutoff, &depths)?;

    let mut iris = iris_matrices(iris_rows, cfg.iris_count, derive_seed(cfg.seed, &[0x1815]))?;
    attach_dilated_depths(&mut iris)?;
    label_all(&mut iris, threshold)?;
    let iris_kappas: Vec<f64> = iris.iter().map(|s| s.kappa).collect();
    let iris_hist = kappa_histogram(&iris_kappas)?;
    let iris_table = featurize(&iris, Variant::D4)?;

    let random: Vec<f64> = corpus
        .iter()
        .filter(|s| s.n == 4 && s.s == 4)
        .map(|s| s.kappa)
        .collect();
    let random_hist = kappa_histogram(&random)?;

    let (generic_table, _) = variant_table(corpus, Variant::D4, cfg.cutoff)?;
    let generic = train_test(&generic_table, cfg)?;
    let generic_iris = evaluate(&generic.model, &iris_table)?;

    let mut pool_size = random.len();
    let matched = if with_match {
        let pool = matching_pool(
            corpus,
            &iris_hist,
            cfg.match_total,
            cfg.kappa_max,
            derive_seed(cfg.seed, &[0x9001]),
            cfg.pool_max_draws,
        )?;
        pool_size = pool.len();
        let pool_kappas: Vec<f64> = pool.iter().map(|s| s.kappa).collect();
        let idx = distribution_match(
            &pool_kappas,
            &iris_hist,
            cfg.match_total,
            derive_seed(cfg.seed, &[0x3A7C]),
        )?;
        let mut chosen = vec![false; pool.len()];
        idx.iter().for_each(|&i| chosen[i] = true);
        let unselected: Vec<f64> = (0..pool.len()).filter(|&i| !chosen[i]).map(|i| pool_kappas[i]).collect();
        let mut selected: Vec<Sample> = idx.iter().map(|&i| pool[i].clone()).collect();
        attach_dilated_depths(&mut selected)?;
        label_all(&mut selected, threshold)?;
        let selected_hist = kappa_histogram(&idx.iter().map(|&i| pool_kappas[i]).collect::<Vec<_>>())?;
        let unselected_hist = kappa_histogram(&unselected)?;
        let table = featurize(&selected, Variant::D4)?;
        let trained = train_test(&table, cfg)?;
        let iris_test = evaluate(&trained.model, &iris_table)?;
        Some(MatchedStudy {
            selected,
            unselected_hist,
            selected_hist,
            trained,
            iris_test,
        })
    } else {
        None
    };

    Ok(IrisStudy {
        threshold,
        iris,
        iris_hist,
        random_hist,
        pool_size,
        matched,
        generic_iris,
        generic,
    })
}
