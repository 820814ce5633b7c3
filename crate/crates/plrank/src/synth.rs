//! Small enumerable parse universes: exact likelihoods, divergences, and
//! synthetic corpus generation.
//!
//! A finite universe lists every analysis (parse) that exists, each tagged
//! with the yield (surface string) it realizes. Everything the model says
//! about such a universe can be computed exactly by enumeration: the
//! partition function, the full log likelihood of a corpus, its gradient,
//! and KL divergences between parameter settings. These closed forms are
//! the reference implementations the fast per-sentence code is tested
//! against, and seeded sampling from a ground-truth θ* produces corpora
//! with a known generating distribution.
//!
//! Enumeration is refused above [`ENUMERATION_CAP`] analyses.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, FeatureCatalog, FeatureVector, Sentence};
use crate::error::{Error, Result};
use crate::loglinear::{score_at, ParameterVector};

/// Largest universe any enumerating operation accepts.
pub const ENUMERATION_CAP: usize = 1_000_000;

/// One analysis: a feature vector realizing a particular yield.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    features: FeatureVector,
    yield_label: String,
}

impl Analysis {
    pub fn new(features: FeatureVector, yield_label: impl Into<String>) -> Self {
        Self {
            features,
            yield_label: yield_label.into(),
        }
    }

    pub fn features(&self) -> &FeatureVector {
        &self.features
    }

    pub fn yield_label(&self) -> &str {
        &self.yield_label
    }
}

/// The complete, finite set of analyses over a feature catalog, grouped by
/// yield.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteUniverse {
    catalog: FeatureCatalog,
    analyses: Vec<Analysis>,
    /// Yield label → analysis indices, in first-appearance order.
    classes: Vec<(String, Vec<usize>)>,
}

impl FiniteUniverse {
    pub fn new(catalog: FeatureCatalog, analyses: Vec<Analysis>) -> Result<Self> {
        if analyses.is_empty() {
            return Err(Error::data("universe has no analyses"));
        }
        for (ix, analysis) in analyses.iter().enumerate() {
            if let Some(j) = analysis.features().max_index() {
                if j >= catalog.len() {
                    return Err(Error::data(format!(
                        "analysis {ix}: feature index {j} out of range ({} features)",
                        catalog.len()
                    )));
                }
            }
        }
        let mut classes: Vec<(String, Vec<usize>)> = Vec::new();
        let mut class_of: HashMap<&str, usize> = HashMap::new();
        for (ix, analysis) in analyses.iter().enumerate() {
            match class_of.get(analysis.yield_label()) {
                Some(&c) => classes[c].1.push(ix),
                None => {
                    class_of.insert(analysis.yield_label(), classes.len());
                    classes.push((analysis.yield_label().to_string(), vec![ix]));
                }
            }
        }
        // The borrow of `analyses` through class_of ends here.
        let classes = classes;
        Ok(Self {
            catalog,
            analyses,
            classes,
        })
    }

    pub fn catalog(&self) -> &FeatureCatalog {
        &self.catalog
    }

    pub fn analyses(&self) -> &[Analysis] {
        &self.analyses
    }

    /// Number of analyses.
    pub fn len(&self) -> usize {
        self.analyses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.analyses.is_empty()
    }

    /// Yield classes in first-appearance order, each with its analysis
    /// indices.
    pub fn classes(&self) -> &[(String, Vec<usize>)] {
        &self.classes
    }

    pub fn n_yields(&self) -> usize {
        self.classes.len()
    }

    /// Analysis indices of one yield.
    pub fn class(&self, yield_label: &str) -> Option<&[usize]> {
        self.classes
            .iter()
            .find(|(label, _)| label == yield_label)
            .map(|(_, members)| members.as_slice())
    }

    /// Reads a universe from its JSON file format.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::new();
        BufReader::new(file)
            .read_to_string(&mut text)
            .map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub(crate) fn from_json(text: &str, label: &str) -> Result<Self> {
        let format = |message: String| Error::Format {
            path: label.to_string(),
            line: 0,
            message,
        };
        let file: UniverseFile =
            serde_json::from_str(text).map_err(|e| format(format!("malformed universe: {e}")))?;
        let catalog = FeatureCatalog::new(file.features).map_err(|e| format(e.to_string()))?;
        let mut analyses = Vec::with_capacity(file.analyses.len());
        for (ix, record) in file.analyses.into_iter().enumerate() {
            let mut pairs = Vec::with_capacity(record.features.len());
            for (name, value) in &record.features {
                let j = catalog
                    .index_of(name)
                    .ok_or_else(|| format(format!("analysis {ix}: unknown feature {name:?}")))?;
                pairs.push((j, *value));
            }
            let features = FeatureVector::from_pairs(pairs).map_err(|e| format(e.to_string()))?;
            analyses.push(Analysis::new(features, record.yield_label));
        }
        Self::new(catalog, analyses)
    }

    /// Writes the universe in the format accepted by [`FiniteUniverse::load`].
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = UniverseFile {
            features: self.catalog.names().to_vec(),
            analyses: self
                .analyses
                .iter()
                .map(|a| AnalysisRecord {
                    yield_label: a.yield_label().to_string(),
                    features: a
                        .features()
                        .iter()
                        .map(|(j, v)| (self.catalog.name(j).to_string(), v))
                        .collect(),
                })
                .collect(),
        };
        let out = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(out);
        serde_json::to_writer_pretty(&mut out, &file)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Serialize, Deserialize)]
struct UniverseFile {
    features: Vec<String>,
    analyses: Vec<AnalysisRecord>,
}

#[derive(Serialize, Deserialize)]
struct AnalysisRecord {
    #[serde(rename = "yield")]
    yield_label: String,
    features: std::collections::BTreeMap<String, f64>,
}

/// Ground truth for synthetic experiments: a universe plus the true θ*.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    theta_star: ParameterVector,
    universe: FiniteUniverse,
}

impl GroundTruth {
    pub fn new(theta_star: ParameterVector, universe: FiniteUniverse) -> Result<Self> {
        if theta_star.len() != universe.catalog().len() {
            return Err(Error::CatalogMismatch {
                expected: universe.catalog().len(),
                got: theta_star.len(),
            });
        }
        Ok(Self {
            theta_star,
            universe,
        })
    }

    pub fn theta_star(&self) -> &ParameterVector {
        &self.theta_star
    }

    pub fn universe(&self) -> &FiniteUniverse {
        &self.universe
    }
}

fn check_cap(universe: &FiniteUniverse, cap: usize) -> Result<()> {
    if universe.len() > cap {
        return Err(Error::UniverseTooLarge {
            size: universe.len(),
            cap,
        });
    }
    Ok(())
}

fn check_theta(theta: &ParameterVector, universe: &FiniteUniverse) -> Result<()> {
    if theta.len() != universe.catalog().len() {
        return Err(Error::CatalogMismatch {
            expected: universe.catalog().len(),
            got: theta.len(),
        });
    }
    Ok(())
}

fn logsumexp(scores: &[f64]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|&s| (s - max).exp()).sum::<f64>().ln()
}

fn universe_scores(theta: &ParameterVector, universe: &FiniteUniverse) -> Vec<f64> {
    universe
        .analyses()
        .iter()
        .map(|a| score_at(theta.values(), a.features()))
        .collect()
}

/// Log partition function log Z(θ) = log Σ_ω exp(θ·f(ω)) over the whole
/// universe.
pub fn log_partition_function(theta: &ParameterVector, universe: &FiniteUniverse) -> Result<f64> {
    log_partition_function_capped(theta, universe, ENUMERATION_CAP)
}

/// [`log_partition_function`] with an explicit enumeration cap.
pub fn log_partition_function_capped(
    theta: &ParameterVector,
    universe: &FiniteUniverse,
    cap: usize,
) -> Result<f64> {
    check_theta(theta, universe)?;
    check_cap(universe, cap)?;
    Ok(logsumexp(&universe_scores(theta, universe)))
}

fn bit_key(v: &FeatureVector) -> Vec<(usize, u64)> {
    v.iter().map(|(j, x)| (j, x.to_bits())).collect()
}

fn check_corpus_in_universe(corpus: &Corpus, universe: &FiniteUniverse) -> Result<()> {
    if corpus.catalog() != universe.catalog() {
        return Err(Error::data(
            "corpus and universe use different feature catalogs",
        ));
    }
    let known: HashSet<Vec<(usize, u64)>> = universe
        .analyses()
        .iter()
        .map(|a| bit_key(a.features()))
        .collect();
    for sentence in corpus.sentences() {
        for parse in sentence.parses() {
            if !known.contains(&bit_key(parse)) {
                return Err(Error::AnalysisNotInUniverse {
                    sentence: sentence.id().to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Exact log likelihood of a corpus under the full model over the universe:
/// Σ_i θ·f(ω̃_i) − n·log Z(θ). Every corpus parse must appear in the
/// universe.
pub fn full_log_likelihood(
    theta: &ParameterVector,
    corpus: &Corpus,
    universe: &FiniteUniverse,
) -> Result<f64> {
    check_theta(theta, universe)?;
    check_cap(universe, ENUMERATION_CAP)?;
    check_corpus_in_universe(corpus, universe)?;
    let log_z = logsumexp(&universe_scores(theta, universe));
    let total: f64 = corpus
        .sentences()
        .iter()
        .map(|s| score_at(theta.values(), s.correct_parse()))
        .sum();
    Ok(total - corpus.len() as f64 * log_z)
}

/// Gradient of [`full_log_likelihood`]:
/// ∂/∂θ_j = Σ_i f_j(ω̃_i) − n·E_θ(f_j), with the expectation over the whole
/// universe.
pub fn full_likelihood_gradient(
    theta: &ParameterVector,
    corpus: &Corpus,
    universe: &FiniteUniverse,
) -> Result<Vec<f64>> {
    check_theta(theta, universe)?;
    check_cap(universe, ENUMERATION_CAP)?;
    check_corpus_in_universe(corpus, universe)?;
    let m = theta.len();
    let scores = universe_scores(theta, universe);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = vec![0.0; m];
    let mut weight_sum = 0.0;
    for (analysis, &s) in universe.analyses().iter().zip(&scores) {
        let w = (s - max).exp();
        weight_sum += w;
        for (j, v) in analysis.features().iter() {
            acc[j] += w * v;
        }
    }
    let n = corpus.len() as f64;
    let totals = corpus.feature_totals();
    Ok((0..m)
        .map(|j| totals[j] - n * (acc[j] / weight_sum))
        .collect())
}

/// KL divergence KL(p_θp ‖ p_θq) between the two joint distributions over
/// the universe. Nonnegative; zero exactly when the distributions coincide.
pub fn kl_divergence(
    theta_p: &ParameterVector,
    theta_q: &ParameterVector,
    universe: &FiniteUniverse,
) -> Result<f64> {
    check_theta(theta_p, universe)?;
    check_theta(theta_q, universe)?;
    check_cap(universe, ENUMERATION_CAP)?;
    let sp = universe_scores(theta_p, universe);
    let sq = universe_scores(theta_q, universe);
    let zp = logsumexp(&sp);
    let zq = logsumexp(&sq);
    let mut kl = 0.0;
    for (a, b) in sp.iter().zip(&sq) {
        let lp = a - zp;
        let lq = b - zq;
        kl += lp.exp() * (lp - lq);
    }
    Ok(kl.max(0.0))
}

/// Yield-averaged conditional KL divergence:
/// Σ_y P_θ*(y) · KL( p_θ*(·|y) ‖ p_θ̂(·|y) ), the loss that matters for
/// ranking parses within a sentence.
pub fn expected_conditional_kl(
    theta_star: &ParameterVector,
    theta_hat: &ParameterVector,
    universe: &FiniteUniverse,
) -> Result<f64> {
    check_theta(theta_star, universe)?;
    check_theta(theta_hat, universe)?;
    check_cap(universe, ENUMERATION_CAP)?;
    let s_star = universe_scores(theta_star, universe);
    let s_hat = universe_scores(theta_hat, universe);
    let z_star = logsumexp(&s_star);
    let mut total = 0.0;
    for (_, members) in universe.classes() {
        let class_star: Vec<f64> = members.iter().map(|&ix| s_star[ix]).collect();
        let class_hat: Vec<f64> = members.iter().map(|&ix| s_hat[ix]).collect();
        let lse_star = logsumexp(&class_star);
        let lse_hat = logsumexp(&class_hat);
        let class_weight = (lse_star - z_star).exp();
        let mut kl = 0.0;
        for (a, b) in class_star.iter().zip(&class_hat) {
            let lp = a - lse_star;
            let lq = b - lse_hat;
            kl += lp.exp() * (lp - lq);
        }
        total += class_weight * kl.max(0.0);
    }
    Ok(total)
}

/// Samples a corpus of `n` sentences from the ground truth: yields are
/// drawn uniformly, then an analysis within the yield class according to
/// the conditional distribution under θ*. Each sentence's parse list is its
/// full yield class, in universe order, and the drawn analysis is marked
/// correct. Identical (truth, n, seed) inputs give identical corpora.
pub fn generate_corpus(truth: &GroundTruth, n: usize, seed: u64) -> Result<Corpus> {
    let uniform = vec![1.0; truth.universe().n_yields()];
    generate_with_class_weights(truth, n, seed, &uniform)
}

/// [`generate_corpus`] with a non-uniform yield distribution given as
/// weights keyed by yield label. Labels missing from the map get weight 0;
/// unknown labels in the map are an error.
pub fn generate_corpus_weighted(
    truth: &GroundTruth,
    n: usize,
    seed: u64,
    weights: &HashMap<String, f64>,
) -> Result<Corpus> {
    for (label, &w) in weights {
        if truth.universe().class(label).is_none() {
            return Err(Error::data(format!("unknown yield {label:?} in weights")));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::config(format!(
                "weight of yield {label:?} must be finite and nonnegative, got {w}"
            )));
        }
    }
    let class_weights: Vec<f64> = truth
        .universe()
        .classes()
        .iter()
        .map(|(label, _)| weights.get(label).copied().unwrap_or(0.0))
        .collect();
    generate_with_class_weights(truth, n, seed, &class_weights)
}

fn generate_with_class_weights(
    truth: &GroundTruth,
    n: usize,
    seed: u64,
    class_weights: &[f64],
) -> Result<Corpus> {
    if n == 0 {
        return Err(Error::config("cannot generate an empty corpus"));
    }
    let universe = truth.universe();
    check_cap(universe, ENUMERATION_CAP)?;
    let total: f64 = class_weights.iter().sum();
    if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::config("yield weights sum to zero"));
    }

    // Per-class parse lists and conditional CDFs under θ*.
    struct ClassDraw {
        parses: Vec<FeatureVector>,
        cdf: Vec<f64>,
    }
    let theta = truth.theta_star();
    let classes: Vec<ClassDraw> = universe
        .classes()
        .iter()
        .map(|(_, members)| {
            let scores: Vec<f64> = members
                .iter()
                .map(|&ix| score_at(theta.values(), universe.analyses()[ix].features()))
                .collect();
            let lse = logsumexp(&scores);
            let mut cum = 0.0;
            let cdf = scores
                .iter()
                .map(|&s| {
                    cum += (s - lse).exp();
                    cum
                })
                .collect();
            ClassDraw {
                parses: members
                    .iter()
                    .map(|&ix| universe.analyses()[ix].features().clone())
                    .collect(),
                cdf,
            }
        })
        .collect();
    let mut class_cdf = Vec::with_capacity(class_weights.len());
    let mut cum = 0.0;
    for &w in class_weights {
        cum += w / total;
        class_cdf.push(cum);
    }

    fn draw(cdf: &[f64], u: f64) -> usize {
        for (i, &c) in cdf.iter().enumerate() {
            if u < c {
                return i;
            }
        }
        cdf.len() - 1
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sentences = Vec::with_capacity(n);
    for i in 0..n {
        let class_ix = draw(&class_cdf, rng.gen::<f64>());
        let class = &classes[class_ix];
        let correct = draw(&class.cdf, rng.gen::<f64>());
        sentences.push(Sentence::new(
            format!("s{i:06}"),
            class.parses.clone(),
            correct,
        )?);
    }
    Corpus::new(universe.catalog().clone(), sentences)
}
