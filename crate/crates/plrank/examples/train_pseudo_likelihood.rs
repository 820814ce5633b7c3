//! Fit ranking weights by penalized pseudo-likelihood with conjugate
//! gradients, then inspect the optimizer trace and the fitted model.
//!
//! The objective sums each sentence's conditional log probability of the
//! correct parse given its candidate set, minus a quadratic penalty whose
//! per-feature width scales with the feature's largest observed value.
//! The penalty is what keeps runaway features finite, so this example
//! deliberately includes one.

use plrank::cg::{self, CgConfig};
use plrank::loglinear;
use plrank::{eval, Corpus, FeatureCatalog, FeatureVector, Sentence};

fn sentence(id: &str, rows: &[&[f64]], correct: usize) -> Sentence {
    let parses = rows.iter().map(|r| FeatureVector::from_dense(r)).collect();
    Sentence::new(id, parses, correct).unwrap()
}

fn main() -> plrank::Result<()> {
    let catalog = FeatureCatalog::new(["gold_margin", "attach_low", "coord"])?;
    let corpus = Corpus::new(
        catalog,
        vec![
            sentence(
                "s1",
                &[&[2.0, 1.0, 0.0], &[1.0, 0.0, 2.0], &[0.0, 2.0, 1.0]],
                0,
            ),
            sentence("s2", &[&[1.0, 0.0, 1.0], &[0.0, 3.0, 0.0]], 0),
            sentence(
                "s3",
                &[&[3.0, 1.0, 1.0], &[3.0, 0.0, 2.0], &[1.0, 1.0, 0.0]],
                0,
            ),
            sentence("s4", &[&[0.0, 2.0, 1.0], &[1.0, 1.0, 1.0]], 1),
            sentence("s5", &[&[2.0, 0.0, 2.0], &[0.0, 1.0, 3.0]], 0),
        ],
    )?;

    // sigma_j = multiplier * max observed value of feature j. Smaller
    // multipliers pull harder toward zero.
    let multiplier = 7.0;
    let reg = loglinear::compute_sigmas(&corpus, multiplier)?;
    println!("penalty widths: {:?}", reg.sigmas());

    let config = CgConfig::default();
    let (theta, trace) = cg::train_pl(&corpus, &config, multiplier)?;

    println!("\niter  objective        gradient norm");
    for (i, it) in trace.iterations.iter().enumerate() {
        // The line search never accepts a worse point, so this column is
        // non-decreasing.
        println!("{i:>4}  {:>15.10}  {:.3e}", it.objective, it.gradient_norm);
    }
    println!("termination: {:?}", trace.termination);

    println!("\nfitted weights:");
    for (name, w) in corpus.catalog().names().iter().zip(theta.values()) {
        println!("  {name:<12} {w:+.6}");
    }

    let scores = eval::evaluate(&theta, &corpus)?;
    println!(
        "\ntraining-set fit: {:.2} of {} correct ({:.1}%), -log PL {:.4}",
        scores.correct_count,
        corpus.len(),
        scores.correct_percent,
        scores.neg_log_pl
    );
    Ok(())
}
