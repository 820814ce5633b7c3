//! Detection of degenerate feature geometry in a corpus.
//!
//! Three pathologies matter before training. A feature that is constant
//! within every sentence's parse set cancels from all conditional
//! probabilities: its pseudo-likelihood gradient is identically zero and its
//! weight is never identified by the data. A feature whose value on the
//! correct parse is ≥ (resp. ≤) its value on every candidate of the same
//! sentence pushes the unpenalized optimum to +∞ (resp. −∞), since growing
//! the weight can only help. Constants trivially satisfy both comparisons,
//! so the maximal/minimal classes exclude them; the classes are then
//! mutually exclusive, because a feature that is both maximal and minimal
//! would have to be constant on every parse set.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::corpus::Corpus;

/// Classification of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiagnosisKind {
    /// Same value in every parse of each sentence; carries no ranking
    /// information.
    #[serde(rename = "pseudo-constant")]
    PseudoConstant,
    /// Correct parse's value is never beaten within its sentence; the
    /// unpenalized optimum sends the weight to +∞.
    #[serde(rename = "pseudo-maximal")]
    PseudoMaximal,
    /// Correct parse's value never beats a candidate within its sentence;
    /// the unpenalized optimum sends the weight to −∞.
    #[serde(rename = "pseudo-minimal")]
    PseudoMinimal,
    /// None of the above.
    #[serde(rename = "none")]
    Unremarkable,
}

impl DiagnosisKind {
    /// Human-readable label, identical to the serialized form.
    pub fn label(self) -> &'static str {
        match self {
            DiagnosisKind::PseudoConstant => "pseudo-constant",
            DiagnosisKind::PseudoMaximal => "pseudo-maximal",
            DiagnosisKind::PseudoMinimal => "pseudo-minimal",
            DiagnosisKind::Unremarkable => "none",
        }
    }
}

/// One feature's classification, with a witness sentence where applicable.
#[derive(Debug, Clone, Serialize)]
pub struct FeatureDiagnosis {
    /// Feature index in the catalog.
    pub feature: usize,
    pub name: String,
    pub kind: DiagnosisKind,
    /// For maximal/minimal: a sentence where the comparison is strict. For
    /// unremarkable: a sentence where some candidate beats the correct
    /// parse. Constants have no witness.
    pub witness: Option<String>,
}

/// Full diagnostics over a corpus.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub n_features: usize,
    pub n_pseudo_constant: usize,
    pub n_pseudo_maximal: usize,
    pub n_pseudo_minimal: usize,
    pub n_unremarkable: usize,
    /// One entry per feature, in catalog order.
    pub diagnoses: Vec<FeatureDiagnosis>,
}

fn is_constant_within_sentences(corpus: &Corpus, j: usize) -> bool {
    corpus.sentences().iter().all(|s| {
        let v0 = s.parses()[0].get(j);
        s.parses()[1..].iter().all(|p| p.get(j) == v0)
    })
}

fn correct_never_beaten(corpus: &Corpus, j: usize) -> bool {
    corpus.sentences().iter().all(|s| {
        let c = s.correct_parse().get(j);
        s.parses().iter().all(|p| c >= p.get(j))
    })
}

fn correct_never_beats(corpus: &Corpus, j: usize) -> bool {
    corpus.sentences().iter().all(|s| {
        let c = s.correct_parse().get(j);
        s.parses().iter().all(|p| c <= p.get(j))
    })
}

/// Features whose value is the same across every sentence's parse set.
pub fn pseudo_constant_features(corpus: &Corpus) -> BTreeSet<usize> {
    (0..corpus.catalog().len())
        .filter(|&j| is_constant_within_sentences(corpus, j))
        .collect()
}

/// Non-constant features whose correct-parse value is a maximum within
/// every sentence.
pub fn pseudo_maximal_features(corpus: &Corpus) -> BTreeSet<usize> {
    (0..corpus.catalog().len())
        .filter(|&j| !is_constant_within_sentences(corpus, j) && correct_never_beaten(corpus, j))
        .collect()
}

/// Non-constant features whose correct-parse value is a minimum within
/// every sentence.
pub fn pseudo_minimal_features(corpus: &Corpus) -> BTreeSet<usize> {
    (0..corpus.catalog().len())
        .filter(|&j| !is_constant_within_sentences(corpus, j) && correct_never_beats(corpus, j))
        .collect()
}

/// First sentence where the correct parse strictly beats some candidate on
/// feature `j`.
fn strict_max_witness(corpus: &Corpus, j: usize) -> Option<String> {
    corpus
        .sentences()
        .iter()
        .find(|s| {
            let c = s.correct_parse().get(j);
            s.parses().iter().any(|p| c > p.get(j))
        })
        .map(|s| s.id().to_string())
}

/// First sentence where some candidate strictly beats the correct parse on
/// feature `j`.
fn strict_min_witness(corpus: &Corpus, j: usize) -> Option<String> {
    corpus
        .sentences()
        .iter()
        .find(|s| {
            let c = s.correct_parse().get(j);
            s.parses().iter().any(|p| c < p.get(j))
        })
        .map(|s| s.id().to_string())
}

/// Classifies every feature and returns the counts plus per-feature
/// diagnoses in catalog order.
pub fn diagnose(corpus: &Corpus) -> DiagnosticsReport {
    let m = corpus.catalog().len();
    let mut diagnoses = Vec::with_capacity(m);
    let mut n_constant = 0;
    let mut n_maximal = 0;
    let mut n_minimal = 0;
    let mut n_unremarkable = 0;
    for j in 0..m {
        let name = corpus.catalog().name(j).to_string();
        let (kind, witness) = if is_constant_within_sentences(corpus, j) {
            n_constant += 1;
            (DiagnosisKind::PseudoConstant, None)
        } else if correct_never_beaten(corpus, j) {
            n_maximal += 1;
            (DiagnosisKind::PseudoMaximal, strict_max_witness(corpus, j))
        } else if correct_never_beats(corpus, j) {
            n_minimal += 1;
            (DiagnosisKind::PseudoMinimal, strict_min_witness(corpus, j))
        } else {
            n_unremarkable += 1;
            (DiagnosisKind::Unremarkable, strict_min_witness(corpus, j))
        };
        diagnoses.push(FeatureDiagnosis {
            feature: j,
            name,
            kind,
            witness,
        });
    }
    DiagnosticsReport {
        n_features: m,
        n_pseudo_constant: n_constant,
        n_pseudo_maximal: n_maximal,
        n_pseudo_minimal: n_minimal,
        n_unremarkable,
        diagnoses,
    }
}
