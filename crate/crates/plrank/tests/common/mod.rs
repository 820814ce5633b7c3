//! Fixtures shared by the integration suites.
#![allow(dead_code)]

use plrank::loglinear::ParameterVector;
use plrank::synth::{Analysis, FiniteUniverse, GroundTruth};
use plrank::{Corpus, FeatureCatalog, FeatureVector, Sentence};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fv(values: &[f64]) -> FeatureVector {
    FeatureVector::from_dense(values)
}

pub fn catalog(m: usize) -> FeatureCatalog {
    FeatureCatalog::new((0..m).map(|j| format!("f{j}"))).unwrap()
}

pub fn sentence(id: &str, parses: &[&[f64]], correct: usize) -> Sentence {
    Sentence::new(id, parses.iter().map(|p| fv(p)).collect(), correct).unwrap()
}

pub fn theta(values: &[f64]) -> ParameterVector {
    ParameterVector::new(values.to_vec()).unwrap()
}

/// Relative error with an absolute floor of 1, so tiny quantities are
/// compared absolutely.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / f64::max(1.0, f64::max(a.abs(), b.abs()))
}

/// Corpus where feature 0 separates correct from wrong in every sentence.
pub fn separable_corpus(n: usize) -> Corpus {
    let sentences = (0..n)
        .map(|i| {
            sentence(
                &format!("s{i}"),
                &[&[2.0, 1.0], &[0.0, 1.0], &[1.0, 1.0]],
                0,
            )
        })
        .collect();
    Corpus::new(catalog(2), sentences).unwrap()
}

/// Six features with known pathologies: f0 and f1 pseudo-constant, f2
/// pseudo-maximal, f3 pseudo-minimal, f4 and f5 unremarkable.
pub fn pathology_corpus() -> Corpus {
    Corpus::new(
        catalog(6),
        vec![
            sentence(
                "s1",
                &[
                    &[1.0, 2.0, 3.0, 0.0, 1.0, 0.0],
                    &[1.0, 2.0, 1.0, 2.0, 0.0, 1.0],
                    &[1.0, 2.0, 0.0, 1.0, 2.0, 0.0],
                ],
                0,
            ),
            sentence(
                "s2",
                &[
                    &[4.0, 0.0, 2.0, 1.0, 0.0, 2.0],
                    &[4.0, 0.0, 2.0, 3.0, 1.0, 0.0],
                ],
                0,
            ),
        ],
    )
    .unwrap()
}

/// Random corpus with integer feature counts in 0..5, the shape used by the
/// gradient sweeps.
pub fn random_corpus(rng: &mut ChaCha8Rng, max_features: usize, max_sentences: usize) -> Corpus {
    let m = rng.gen_range(1..=max_features);
    let n = rng.gen_range(1..=max_sentences);
    let sentences = (0..n)
        .map(|i| {
            let parses: Vec<FeatureVector> = (0..rng.gen_range(1..=5))
                .map(|_| {
                    FeatureVector::from_dense(
                        &(0..m)
                            .map(|_| rng.gen_range(0..5) as f64)
                            .collect::<Vec<_>>(),
                    )
                })
                .collect();
            let correct = rng.gen_range(0..parses.len());
            Sentence::new(format!("s{i:03}"), parses, correct).unwrap()
        })
        .collect();
    Corpus::new(catalog(m), sentences).unwrap()
}

pub fn random_theta(rng: &mut ChaCha8Rng, m: usize) -> ParameterVector {
    theta(&(0..m).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>())
}

/// Fixed five-feature universe for recovery experiments: three yields with
/// four analyses each, every feature varying within every yield class.
pub fn recovery_universe() -> FiniteUniverse {
    let rows: [(&str, [f64; 5]); 12] = [
        ("y0", [1.0, 0.0, 2.0, 0.0, 1.0]),
        ("y0", [0.0, 1.0, 0.0, 1.0, 2.0]),
        ("y0", [2.0, 1.0, 1.0, 0.0, 0.0]),
        ("y0", [0.0, 2.0, 1.0, 2.0, 1.0]),
        ("y1", [2.0, 0.0, 0.0, 1.0, 0.0]),
        ("y1", [1.0, 2.0, 1.0, 0.0, 1.0]),
        ("y1", [0.0, 1.0, 3.0, 1.0, 2.0]),
        ("y1", [1.0, 1.0, 0.0, 2.0, 0.0]),
        ("y2", [0.0, 0.0, 1.0, 1.0, 1.0]),
        ("y2", [3.0, 1.0, 0.0, 0.0, 2.0]),
        ("y2", [1.0, 2.0, 2.0, 1.0, 0.0]),
        ("y2", [0.0, 1.0, 1.0, 3.0, 1.0]),
    ];
    FiniteUniverse::new(
        catalog(5),
        rows.iter()
            .map(|(label, values)| Analysis::new(fv(values), *label))
            .collect(),
    )
    .unwrap()
}

pub fn recovery_theta_star() -> ParameterVector {
    theta(&[0.8, -0.5, 0.3, -0.9, 0.6])
}

pub fn recovery_truth() -> GroundTruth {
    GroundTruth::new(recovery_theta_star(), recovery_universe()).unwrap()
}
