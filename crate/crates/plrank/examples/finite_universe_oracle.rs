//! Exact answers on a small enumerable parse universe: the partition
//! function, the full joint likelihood and its gradient, and KL
//! divergences, all computed by brute force over every analysis.
//!
//! A universe this small is useless for modeling but perfect for checking
//! the fast conditional machinery against ground truth.

use plrank::loglinear::{self, ParameterVector};
use plrank::synth::{self, Analysis, FiniteUniverse};
use plrank::{Corpus, FeatureCatalog, FeatureVector, Sentence};

fn main() -> plrank::Result<()> {
    let catalog = FeatureCatalog::new(["a", "b"])?;
    let universe = FiniteUniverse::new(
        catalog.clone(),
        vec![
            Analysis::new(FeatureVector::from_dense(&[1.0, 0.0]), "y0"),
            Analysis::new(FeatureVector::from_dense(&[0.0, 1.0]), "y0"),
            Analysis::new(FeatureVector::from_dense(&[2.0, 1.0]), "y1"),
            Analysis::new(FeatureVector::from_dense(&[1.0, 1.0]), "y1"),
            Analysis::new(FeatureVector::from_dense(&[0.0, 2.0]), "y1"),
        ],
    )?;
    let theta = ParameterVector::new(vec![0.5, -0.3])?;

    // The log partition function is a 5-term log-sum-exp here; verify it
    // against a direct sum of exponentials.
    let log_z = synth::log_partition_function(&theta, &universe)?;
    let direct: f64 = universe
        .analyses()
        .iter()
        .map(|a| loglinear::score(&theta, a.features()).exp())
        .sum();
    println!("log Z = {log_z:.12}, direct ln(sum) = {:.12}", direct.ln());

    // Joint probabilities of all analyses sum to one.
    let total: f64 = universe
        .analyses()
        .iter()
        .map(|a| (loglinear::score(&theta, a.features()) - log_z).exp())
        .sum();
    println!("sum of joint probabilities = {total}");

    // A corpus whose parse sets are the yield classes of the universe.
    let class = |label: &str| -> Vec<FeatureVector> {
        universe
            .class(label)
            .unwrap()
            .iter()
            .map(|&i| universe.analyses()[i].features().clone())
            .collect()
    };
    let corpus = Corpus::new(
        catalog,
        vec![
            Sentence::new("u0", class("y0"), 0)?,
            Sentence::new("u1", class("y1"), 2)?,
        ],
    )?;

    let ll = synth::full_log_likelihood(&theta, &corpus, &universe)?;
    let grad = synth::full_likelihood_gradient(&theta, &corpus, &universe)?;
    println!("\nfull joint log likelihood = {ll:.10}");
    println!("analytic gradient         = {grad:?}");

    // Central finite differences reproduce the gradient.
    let h = 1e-6;
    let fd: Vec<f64> = (0..2)
        .map(|j| {
            let mut hi = theta.values().to_vec();
            let mut lo = theta.values().to_vec();
            hi[j] += h;
            lo[j] -= h;
            let f = |v: Vec<f64>| {
                synth::full_log_likelihood(&ParameterVector::new(v).unwrap(), &corpus, &universe)
                    .unwrap()
            };
            (f(hi) - f(lo)) / (2.0 * h)
        })
        .collect();
    println!("finite differences        = {fd:?}");

    // KL identities: zero against itself, positive and asymmetric
    // otherwise.
    let other = ParameterVector::new(vec![-0.2, 0.4])?;
    println!(
        "\nKL(theta || theta) = {}",
        synth::kl_divergence(&theta, &theta, &universe)?
    );
    println!(
        "KL(theta || other) = {:.6}, KL(other || theta) = {:.6}",
        synth::kl_divergence(&theta, &other, &universe)?,
        synth::kl_divergence(&other, &theta, &universe)?
    );

    // The yield-averaged conditional KL ignores anything constant within
    // every class; it is the right distance for ranking quality.
    println!(
        "expected conditional KL(theta, other) = {:.6}",
        synth::expected_conditional_kl(&theta, &other, &universe)?
    );
    Ok(())
}
