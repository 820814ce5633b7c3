//! Held-out scoring and k-fold cross-validation of competing estimators.
//!
//! Cross-validation reports, per estimator, the scores on each test fold and
//! the overall scores obtained by summing fold scores in fold order. With k
//! equal to the corpus size this is leave-one-out. Fold fitting is
//! embarrassingly parallel; results do not depend on the number of worker
//! threads.

use serde::Serialize;

use crate::anneal::{self, AnnealConfig};
use crate::cg::{self, CgConfig};
use crate::corpus::{Corpus, FeatureCatalog};
use crate::error::{Error, Result};
use crate::loglinear::{self, ParameterVector};
use crate::parallel;

/// Scores of one parameter vector on one corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalScores {
    /// Tie-aware count of correctly ranked sentences.
    pub correct_count: f64,
    /// `correct_count / n × 100`.
    pub correct_percent: f64,
    /// Negative log pseudo-likelihood; lower is better, 0 is perfect.
    pub neg_log_pl: f64,
}

/// Scores θ on a corpus. The count follows [`anneal::correct_count`]'s tie
/// rule; the likelihood term is the negation of
/// [`loglinear::log_pseudo_likelihood`].
pub fn evaluate(theta: &ParameterVector, test: &Corpus) -> Result<EvalScores> {
    if theta.len() != test.catalog().len() {
        return Err(Error::CatalogMismatch {
            expected: test.catalog().len(),
            got: theta.len(),
        });
    }
    let correct_count = anneal::correct_count(theta, test);
    Ok(EvalScores {
        correct_count,
        correct_percent: correct_count / test.len() as f64 * 100.0,
        neg_log_pl: -loglinear::log_pseudo_likelihood(theta, test),
    })
}

/// The uninformed reference point: every weight zero, so all parses of a
/// sentence tie.
pub fn baseline_params(catalog: &FeatureCatalog) -> ParameterVector {
    ParameterVector::zeros(catalog.len())
}

/// A training procedure to compare under cross-validation.
#[derive(Debug, Clone)]
pub enum EstimatorSpec {
    /// All-zero weights.
    Baseline,
    /// Penalized pseudo-likelihood trained by conjugate gradients.
    PseudoLikelihood { sigma_multiplier: f64, cg: CgConfig },
    /// Correct-count maximization by simulated annealing. Fold i runs with
    /// seed `anneal.seed + i`, so folds stay decoupled but reproducible.
    MaxCorrect { anneal: AnnealConfig },
}

impl EstimatorSpec {
    /// Row label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorSpec::Baseline => "Baseline estimator",
            EstimatorSpec::PseudoLikelihood { .. } => "Pseudo-likelihood estimator",
            EstimatorSpec::MaxCorrect { .. } => "Correct-parses estimator",
        }
    }

    fn fit(&self, train: &Corpus, fold: usize) -> Result<ParameterVector> {
        match self {
            EstimatorSpec::Baseline => Ok(baseline_params(train.catalog())),
            EstimatorSpec::PseudoLikelihood {
                sigma_multiplier,
                cg,
            } => Ok(cg::train_pl(train, cg, *sigma_multiplier)?.0),
            EstimatorSpec::MaxCorrect { anneal } => {
                let mut config = anneal.clone();
                config.seed = config.seed.wrapping_add(fold as u64);
                let start = ParameterVector::zeros(train.catalog().len());
                Ok(anneal::maximize_correct(train, &start, &config)?.0)
            }
        }
    }
}

/// One estimator's cross-validation results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorRow {
    pub estimator: String,
    /// Test-fold scores in fold order.
    pub per_fold: Vec<EvalScores>,
    /// Fold scores summed in fold order (percent recomputed from the total).
    pub overall: EvalScores,
}

/// Full cross-validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValReport {
    pub k: usize,
    pub seed: u64,
    pub n_sentences: usize,
    pub rows: Vec<EstimatorRow>,
}

/// K-fold cross-validation of the given estimators.
pub fn cross_validate(
    corpus: &Corpus,
    k: usize,
    estimators: &[EstimatorSpec],
    seed: u64,
) -> Result<CrossValReport> {
    cross_validate_jobs(corpus, k, estimators, seed, 1)
}

/// [`cross_validate`] with (estimator, fold) units fanned out over `jobs`
/// threads. The report is bit-identical for every thread count.
pub fn cross_validate_jobs(
    corpus: &Corpus,
    k: usize,
    estimators: &[EstimatorSpec],
    seed: u64,
    jobs: usize,
) -> Result<CrossValReport> {
    if estimators.is_empty() {
        return Err(Error::config("no estimators selected"));
    }
    let folds = corpus.kfold(k, seed)?;

    let results: Vec<Result<EvalScores>> =
        parallel::run_indexed(estimators.len() * k, jobs, |unit| {
            let (e, f) = (unit / k, unit % k);
            let (train, test) = &folds[f];
            let theta = estimators[e].fit(train, f)?;
            evaluate(&theta, test)
        });

    let mut results = results.into_iter();
    let mut rows = Vec::with_capacity(estimators.len());
    for estimator in estimators {
        let mut per_fold = Vec::with_capacity(k);
        for _ in 0..k {
            per_fold.push(results.next().expect("one result per unit")?);
        }
        let mut correct_count = 0.0;
        let mut neg_log_pl = 0.0;
        for scores in &per_fold {
            correct_count += scores.correct_count;
            neg_log_pl += scores.neg_log_pl;
        }
        rows.push(EstimatorRow {
            estimator: estimator.label().to_string(),
            per_fold,
            overall: EvalScores {
                correct_count,
                correct_percent: correct_count / corpus.len() as f64 * 100.0,
                neg_log_pl,
            },
        });
    }
    Ok(CrossValReport {
        k,
        seed,
        n_sentences: corpus.len(),
        rows,
    })
}
