//! Conditional log-linear model over candidate parse sets.
//!
//! A parse with feature vector f gets score θ·f; within one sentence the
//! candidates are weighted in proportion to exp(θ·f). The product of the
//! correct parses' conditional probabilities is the pseudo-likelihood of θ,
//! the training objective used throughout, optionally with a quadratic
//! penalty Σ_j θ_j²/(2σ_j²).
//!
//! All per-sentence computations shift scores by the sentence maximum before
//! exponentiating, so scores of magnitude 1e4 and beyond are safe. Sums over
//! sentences always run in corpus order; results are deterministic.
//!
//! Conditional expectations are accumulated relative to the sentence's first
//! parse. Besides stabilizing the sum, this makes the pseudo-likelihood
//! gradient of a feature that is constant within every sentence's parse set
//! come out as exactly 0.0, not merely small.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, FeatureCatalog, Sentence};
use crate::error::{Error, Result};

/// Dense parameter vector θ, one weight per catalog feature. Entries are
/// always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    values: Vec<f64>,
}

impl ParameterVector {
    /// The all-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    /// Validates that every entry is finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (j, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "non-finite parameter {v} at index {j}"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }
}

/// Value and gradient of an objective at one point.
#[derive(Debug, Clone)]
pub struct ObjectiveReport {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Score θ·f(ω) of one parse: the log of its unnormalized weight.
///
/// Panics if the parse stores a feature index outside θ.
pub fn score(theta: &ParameterVector, parse: &crate::corpus::FeatureVector) -> f64 {
    score_at(theta.values(), parse)
}

pub(crate) fn score_at(theta: &[f64], parse: &crate::corpus::FeatureVector) -> f64 {
    parse.iter().map(|(j, v)| theta[j] * v).sum()
}

/// Scores of one sentence's parses together with max-shifted weights.
struct Softmax {
    scores: Vec<f64>,
    max_score: f64,
    weights: Vec<f64>,
    weight_sum: f64,
}

fn softmax(theta: &[f64], sentence: &Sentence) -> Softmax {
    let scores: Vec<f64> = sentence
        .parses()
        .iter()
        .map(|p| score_at(theta, p))
        .collect();
    let max_score = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|&s| (s - max_score).exp()).collect();
    let weight_sum = weights.iter().sum();
    Softmax {
        scores,
        max_score,
        weights,
        weight_sum,
    }
}

/// Log conditional probabilities of a sentence's parses under θ, in parse
/// order. The exponentials sum to 1; a lone parse gets exactly 0.
pub fn conditional_log_probs(theta: &ParameterVector, sentence: &Sentence) -> Vec<f64> {
    let sm = softmax(theta.values(), sentence);
    let log_z = sm.max_score + sm.weight_sum.ln();
    sm.scores.iter().map(|&s| s - log_z).collect()
}

/// Adds each sentence parse's weighted offset from the first parse into
/// `acc` (dense, one slot per feature): acc[j] += Σ_k w_k (f_k[j] − f_0[j]) / W.
fn accumulate_weighted_offsets(sm: &Softmax, sentence: &Sentence, acc: &mut [f64]) {
    let anchor = &sentence.parses()[0];
    for (parse, &w) in sentence.parses().iter().zip(&sm.weights).skip(1) {
        parse.for_each_difference(anchor, |j, d| {
            acc[j] += w * d;
        });
    }
    if sm.weight_sum != 0.0 {
        for a in acc.iter_mut() {
            *a /= sm.weight_sum;
        }
    }
}

/// Conditional expectation E_θ(f_j | sentence) for every feature, dense.
///
/// A feature with the same value c in all of the sentence's parses gets
/// exactly c.
pub fn conditional_expectations(theta: &ParameterVector, sentence: &Sentence) -> Vec<f64> {
    let mut acc = vec![0.0; theta.len()];
    let sm = softmax(theta.values(), sentence);
    accumulate_weighted_offsets(&sm, sentence, &mut acc);
    for (j, v) in sentence.parses()[0].iter() {
        acc[j] += v;
    }
    acc
}

/// Log pseudo-likelihood: Σ_i log Pr_θ(correct parse | sentence i).
///
/// Each term is ≤ 0; a sentence with a single parse contributes exactly 0.
pub fn log_pseudo_likelihood(theta: &ParameterVector, corpus: &Corpus) -> f64 {
    log_pl_at(theta.values(), corpus)
}

pub(crate) fn log_pl_at(theta: &[f64], corpus: &Corpus) -> f64 {
    corpus
        .sentences()
        .iter()
        .map(|sentence| {
            let sm = softmax(theta, sentence);
            sm.scores[sentence.correct_index()] - sm.max_score - sm.weight_sum.ln()
        })
        .sum()
}

/// Gradient of the log pseudo-likelihood:
/// ∂/∂θ_j = Σ_i ( f_j(correct_i) − E_θ(f_j | sentence i) ).
///
/// Components for features constant within every sentence's parse set are
/// exactly 0.0.
pub fn pl_gradient(theta: &ParameterVector, corpus: &Corpus) -> Vec<f64> {
    pl_gradient_at(theta.values(), corpus)
}

pub(crate) fn pl_gradient_at(theta: &[f64], corpus: &Corpus) -> Vec<f64> {
    let m = theta.len();
    let mut grad = vec![0.0; m];
    let mut offsets = vec![0.0; m];
    for sentence in corpus.sentences() {
        let sm = softmax(theta, sentence);
        offsets.fill(0.0);
        accumulate_weighted_offsets(&sm, sentence, &mut offsets);
        // (f(correct) − f(anchor)) − (E − f(anchor)); the anchor cancels.
        let anchor = &sentence.parses()[0];
        sentence
            .correct_parse()
            .for_each_difference(anchor, |j, d| {
                grad[j] += d;
            });
        for (g, o) in grad.iter_mut().zip(&offsets) {
            *g -= o;
        }
    }
    grad
}

/// Per-feature regularization scales σ_j together with the set of features
/// the penalty applies to.
///
/// σ_j is `multiplier` times the largest value feature j takes over every
/// parse in the corpus (absent entries count as 0). Features whose largest
/// value is not positive have no usable scale; they are inactive and their
/// parameters stay frozen at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerSpec {
    sigmas: Vec<f64>,
    active: Vec<bool>,
}

impl RegularizerSpec {
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn is_active(&self, index: usize) -> bool {
        self.active[index]
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    pub fn sigma(&self, index: usize) -> f64 {
        self.sigmas[index]
    }

    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Indices of inactive (frozen) features.
    pub fn frozen(&self) -> Vec<usize> {
        (0..self.active.len())
            .filter(|&j| !self.active[j])
            .collect()
    }
}

/// Computes σ_j = multiplier × max_ω f_j(ω) over all parses of all
/// sentences, marking features without a positive maximum as inactive.
pub fn compute_sigmas(corpus: &Corpus, multiplier: f64) -> Result<RegularizerSpec> {
    // NaN must fail this check too, hence no plain `<=`.
    if multiplier.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::config(format!(
            "sigma multiplier must be positive, got {multiplier}"
        )));
    }
    let m = corpus.catalog().len();
    let mut stored_max = vec![f64::NEG_INFINITY; m];
    let mut stored_count = vec![0usize; m];
    let mut total_parses = 0usize;
    for sentence in corpus.sentences() {
        for parse in sentence.parses() {
            total_parses += 1;
            for (j, v) in parse.iter() {
                stored_count[j] += 1;
                if v > stored_max[j] {
                    stored_max[j] = v;
                }
            }
        }
    }
    let mut sigmas = vec![0.0; m];
    let mut active = vec![false; m];
    for j in 0..m {
        // A parse that does not store feature j has value 0 there.
        let max_j = if stored_count[j] < total_parses {
            stored_max[j].max(0.0)
        } else {
            stored_max[j]
        };
        if max_j > 0.0 {
            sigmas[j] = multiplier * max_j;
            active[j] = true;
        }
    }
    Ok(RegularizerSpec { sigmas, active })
}

/// Penalized training objective log PL(θ) − Σ_{j active} θ_j²/(2σ_j²) and
/// its gradient.
///
/// Frozen features must have θ_j = 0; anything else is an error.
pub fn regularized_objective(
    theta: &ParameterVector,
    corpus: &Corpus,
    reg: &RegularizerSpec,
) -> Result<ObjectiveReport> {
    let m = corpus.catalog().len();
    if theta.len() != m {
        return Err(Error::CatalogMismatch {
            expected: m,
            got: theta.len(),
        });
    }
    if reg.len() != m {
        return Err(Error::data(format!(
            "regularizer covers {} features but the catalog has {m}",
            reg.len()
        )));
    }
    for j in 0..m {
        if !reg.is_active(j) && theta.get(j) != 0.0 {
            return Err(Error::data(format!(
                "frozen feature {:?} has nonzero parameter {}",
                corpus.catalog().name(j),
                theta.get(j)
            )));
        }
    }
    Ok(regularized_at(theta.values(), corpus, reg))
}

pub(crate) fn regularized_value_at(theta: &[f64], corpus: &Corpus, reg: &RegularizerSpec) -> f64 {
    let mut value = log_pl_at(theta, corpus);
    for (j, &t) in theta.iter().enumerate() {
        if reg.is_active(j) {
            let s = reg.sigma(j);
            value -= t * t / (2.0 * s * s);
        }
    }
    value
}

pub(crate) fn regularized_at(
    theta: &[f64],
    corpus: &Corpus,
    reg: &RegularizerSpec,
) -> ObjectiveReport {
    let value = regularized_value_at(theta, corpus, reg);
    let mut gradient = pl_gradient_at(theta, corpus);
    for (j, g) in gradient.iter_mut().enumerate() {
        if reg.is_active(j) {
            let s = reg.sigma(j);
            *g -= theta[j] / (s * s);
        }
    }
    ObjectiveReport { value, gradient }
}

/// Parameter file contents: weights keyed by feature name plus the list of
/// frozen features.
#[derive(Serialize, Deserialize)]
struct ParamsFile {
    theta: BTreeMap<String, f64>,
    #[serde(default)]
    frozen: Vec<String>,
}

/// Writes θ as JSON keyed by feature name (zeros omitted), along with the
/// names of frozen features. Output is deterministic.
pub fn write_params(
    path: impl AsRef<Path>,
    catalog: &FeatureCatalog,
    theta: &ParameterVector,
    frozen: &[String],
) -> Result<()> {
    let path = path.as_ref();
    if theta.len() != catalog.len() {
        return Err(Error::CatalogMismatch {
            expected: catalog.len(),
            got: theta.len(),
        });
    }
    let mut map = BTreeMap::new();
    for (j, &v) in theta.values().iter().enumerate() {
        if v != 0.0 {
            map.insert(catalog.name(j).to_string(), v);
        }
    }
    let mut frozen: Vec<String> = frozen.to_vec();
    frozen.sort();
    let file = ParamsFile { theta: map, frozen };
    let out = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut out, &file)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a parameter file against a catalog. Features missing from the file
/// get weight 0; names not in the catalog are an error. Returns θ and the
/// frozen feature names.
pub fn read_params(
    path: impl AsRef<Path>,
    catalog: &FeatureCatalog,
) -> Result<(ParameterVector, Vec<String>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    BufReader::new(file)
        .read_to_string(&mut text)
        .map_err(|e| Error::io(path, e))?;
    read_params_str(&text, &path.display().to_string(), catalog)
}

pub(crate) fn read_params_str(
    text: &str,
    label: &str,
    catalog: &FeatureCatalog,
) -> Result<(ParameterVector, Vec<String>)> {
    let file: ParamsFile = serde_json::from_str(text).map_err(|e| Error::Format {
        path: label.to_string(),
        line: 0,
        message: format!("malformed parameter file: {e}"),
    })?;
    let mut values = vec![0.0; catalog.len()];
    for (name, value) in &file.theta {
        let j = catalog.index_of(name).ok_or_else(|| Error::Format {
            path: label.to_string(),
            line: 0,
            message: format!("unknown feature {name:?} in parameter file"),
        })?;
        values[j] = *value;
    }
    for name in &file.frozen {
        if catalog.index_of(name).is_none() {
            return Err(Error::Format {
                path: label.to_string(),
                line: 0,
                message: format!("unknown frozen feature {name:?} in parameter file"),
            });
        }
    }
    Ok((ParameterVector::new(values)?, file.frozen))
}
