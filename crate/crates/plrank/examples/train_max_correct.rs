//! Maximize the number of correctly ranked sentences directly with
//! simulated annealing, instead of going through a smooth surrogate.
//!
//! The count credits a sentence 1/l when the correct parse ties with l-1
//! others at the top, so the all-zero start already earns partial credit.
//! The objective is piecewise constant, which is why a derivative-free
//! annealer does the searching.

use plrank::anneal::{self, AnnealConfig};
use plrank::loglinear::ParameterVector;
use plrank::{Corpus, FeatureCatalog, FeatureVector, Sentence};

fn sentence(id: &str, rows: &[&[f64]], correct: usize) -> Sentence {
    let parses = rows.iter().map(|r| FeatureVector::from_dense(r)).collect();
    Sentence::new(id, parses, correct).unwrap()
}

fn main() -> plrank::Result<()> {
    let catalog = FeatureCatalog::new(["attach_low", "coord"])?;
    let corpus = Corpus::new(
        catalog,
        vec![
            sentence("s1", &[&[2.0, 1.0], &[0.0, 1.0], &[1.0, 1.0]], 0),
            sentence("s2", &[&[0.0, 2.0], &[1.0, 0.0]], 0),
            sentence("s3", &[&[1.0, 1.0], &[2.0, 0.0], &[0.0, 2.0]], 0),
            sentence("s4", &[&[1.0, 0.0], &[0.0, 1.0]], 1),
            sentence("s5", &[&[2.0, 2.0], &[2.0, 2.0], &[1.0, 0.0]], 0),
        ],
    )?;

    let start = ParameterVector::zeros(2);
    println!(
        "all-zero start: C = {:.4} of {} (ties share credit)",
        anneal::correct_count(&start, &corpus),
        corpus.len()
    );

    let config = AnnealConfig {
        parameter_box: 5.0, // weights stay inside [-5, 5]
        seed: 42,
        ..AnnealConfig::default()
    };
    let (theta, trace) = anneal::maximize_correct(&corpus, &start, &config)?;

    println!("\ntemperature    best C    acceptance");
    let every = (trace.steps.len() / 8).max(1);
    for step in trace.steps.iter().step_by(every) {
        println!(
            "{:>11.6}  {:>8.4}  {:>10.2}",
            step.temperature, step.best_correct, step.acceptance_rate
        );
    }
    println!("termination: {:?}", trace.termination);

    println!("\nbest weights: {:?}", theta.values());
    println!("final C = {:.4}", anneal::correct_count(&theta, &corpus));

    // Ranking depends only on score order, so scaling the weights cannot
    // change the count.
    let doubled = ParameterVector::new(theta.values().iter().map(|v| 2.0 * v).collect())?;
    assert_eq!(
        anneal::correct_count(&theta, &corpus),
        anneal::correct_count(&doubled, &corpus)
    );
    println!("doubling the weights leaves C unchanged, as it must");
    Ok(())
}
