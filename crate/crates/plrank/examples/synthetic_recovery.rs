//! Consistency check in miniature: sample corpora of growing size from a
//! known model, refit from scratch, and watch the fitted conditionals
//! converge to the truth.
//!
//! The distance reported is the expected conditional KL divergence: the
//! KL between true and fitted parse distributions within each yield class,
//! averaged over yields drawn from the true model. It ignores directions
//! the ranking task cannot observe, which is exactly what a conditional
//! estimator can and cannot recover.

use plrank::cg::{self, CgConfig};
use plrank::loglinear::ParameterVector;
use plrank::synth::{self, Analysis, FiniteUniverse, GroundTruth};
use plrank::{FeatureCatalog, FeatureVector};

fn analysis(yield_label: &str, values: &[f64]) -> Analysis {
    Analysis::new(FeatureVector::from_dense(values), yield_label)
}

fn main() -> plrank::Result<()> {
    let universe = FiniteUniverse::new(
        FeatureCatalog::new(["f0", "f1", "f2"])?,
        vec![
            analysis("y0", &[1.0, 0.0, 2.0]),
            analysis("y0", &[0.0, 1.0, 0.0]),
            analysis("y0", &[2.0, 1.0, 1.0]),
            analysis("y1", &[2.0, 0.0, 0.0]),
            analysis("y1", &[1.0, 2.0, 1.0]),
            analysis("y1", &[0.0, 1.0, 3.0]),
            analysis("y2", &[0.0, 0.0, 1.0]),
            analysis("y2", &[3.0, 1.0, 0.0]),
            analysis("y2", &[1.0, 2.0, 2.0]),
        ],
    )?;
    let star = ParameterVector::new(vec![0.8, -0.5, 0.3])?;
    let truth = GroundTruth::new(star.clone(), universe)?;

    println!("true weights: {:?}\n", star.values());
    println!(
        "{:>8}  {:>22}  fitted weights",
        "n", "conditional KL to truth"
    );
    for n in [50usize, 200, 1000, 5000] {
        let corpus = synth::generate_corpus(&truth, n, 123)?;
        let (fitted, _) = cg::train_pl(&corpus, &CgConfig::default(), 7.0)?;
        let kl = synth::expected_conditional_kl(&star, &fitted, truth.universe())?;
        let w: Vec<String> = fitted.values().iter().map(|v| format!("{v:+.3}")).collect();
        println!("{n:>8}  {kl:>22.6}  [{}]", w.join(", "));
    }

    println!("\nthe fitted weights need not match the true ones exactly;");
    println!("only within-class score differences are identifiable, and the");
    println!("penalty biases small corpora toward zero. The KL column is the");
    println!("meaningful convergence measure.");
    Ok(())
}
