//! Screen a corpus for features the training objective cannot see or cannot
//! bound, before any optimizer runs.
//!
//! Three pathologies matter:
//! - pseudo-constant: the value never varies within any sentence's parse
//!   set, so the conditional model is blind to it and its gradient
//!   component is exactly zero;
//! - pseudo-maximal: the correct parse attains the within-sentence maximum
//!   everywhere, so without a penalty its weight runs to +infinity;
//! - pseudo-minimal: the mirror image, running to -infinity.

use plrank::diagnostics::{self, DiagnosisKind};
use plrank::loglinear::{self, ParameterVector};
use plrank::{Corpus, FeatureCatalog, FeatureVector, Sentence};

fn sentence(id: &str, rows: &[&[f64]], correct: usize) -> Sentence {
    let parses = rows.iter().map(|r| FeatureVector::from_dense(r)).collect();
    Sentence::new(id, parses, correct).unwrap()
}

fn main() -> plrank::Result<()> {
    let catalog = FeatureCatalog::new([
        "sentence_len", // identical across each parse set: pseudo-constant
        "gold_margin",  // always maximal on the correct parse
        "crossing",     // always minimal on the correct parse
        "attach_low",   // ordinary
    ])?;
    let corpus = Corpus::new(
        catalog,
        vec![
            sentence(
                "s1",
                &[
                    &[5.0, 3.0, 0.0, 1.0],
                    &[5.0, 1.0, 2.0, 2.0],
                    &[5.0, 3.0, 1.0, 0.0],
                ],
                0,
            ),
            sentence("s2", &[&[7.0, 2.0, 1.0, 2.0], &[7.0, 2.0, 1.0, 0.0]], 0),
        ],
    )?;

    let report = diagnostics::diagnose(&corpus);
    println!(
        "{} features: {} pseudo-constant, {} pseudo-maximal, {} pseudo-minimal, {} unremarkable\n",
        report.n_features,
        report.n_pseudo_constant,
        report.n_pseudo_maximal,
        report.n_pseudo_minimal,
        report.n_unremarkable
    );
    for d in &report.diagnoses {
        match &d.witness {
            Some(id) => println!("  {:<14} {:<16} (witness: {id})", d.name, d.kind.label()),
            None => println!("  {:<14} {}", d.name, d.kind.label()),
        }
    }

    // The blindness is exact, not approximate: the gradient component of a
    // pseudo-constant feature is 0.0 to the last bit, at any weights.
    let constant: Vec<usize> = report
        .diagnoses
        .iter()
        .filter(|d| d.kind == DiagnosisKind::PseudoConstant)
        .map(|d| d.feature)
        .collect();
    let theta = ParameterVector::new(vec![0.31, -1.7, 0.05, 2.4])?;
    let gradient = loglinear::pl_gradient(&theta, &corpus);
    println!("\ngradient at an arbitrary point: {gradient:?}");
    for j in constant {
        assert_eq!(gradient[j], 0.0);
        println!("component {j} is exactly zero, as diagnosed");
    }
    Ok(())
}
