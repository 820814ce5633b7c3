//! Build a small treebank-style corpus in code, round-trip it through the
//! line-oriented file format, and print summary statistics.
//!
//! Each sentence carries every candidate parse as a feature vector plus the
//! index of the hand-annotated correct one. The file format is JSON Lines:
//! a header object naming the features, then one object per sentence.

use plrank::{Corpus, FeatureCatalog, FeatureVector, Sentence};

fn main() -> plrank::Result<()> {
    let catalog = FeatureCatalog::new(["attach_low", "coord_parallel", "lex_head"])?;

    // Sparse construction: only nonzero features are listed.
    let s1 = Sentence::new(
        "the old man the boats",
        vec![
            FeatureVector::from_pairs([(0, 2.0), (2, 1.0)])?,
            FeatureVector::from_pairs([(1, 1.0)])?,
            FeatureVector::from_pairs([(0, 1.0), (1, 1.0), (2, 2.0)])?,
        ],
        2,
    )?;
    // Dense construction: one value per catalog slot.
    let s2 = Sentence::new(
        "time flies like an arrow",
        vec![
            FeatureVector::from_dense(&[1.0, 0.0, 3.0]),
            FeatureVector::from_dense(&[2.0, 1.0, 0.0]),
        ],
        0,
    )?;
    // Unambiguous sentences are legal; they contribute nothing to training
    // because their single parse always wins.
    let s3 = Sentence::new(
        "he slept",
        vec![FeatureVector::from_dense(&[0.0, 0.0, 1.0])],
        0,
    )?;

    let corpus = Corpus::new(catalog, vec![s1, s2, s3])?;

    let path = std::env::temp_dir().join("corpus_stats_demo.jsonl");
    corpus.save(&path)?;
    let reloaded = Corpus::load(&path)?;
    assert_eq!(corpus, reloaded, "the file format is lossless");

    let stats = reloaded.stats();
    println!("file:                 {}", path.display());
    println!("sentences:            {}", stats.n_sentences);
    println!("ambiguous sentences:  {}", stats.n_ambiguous);
    println!("parses of ambiguous:  {}", stats.n_parses_of_ambiguous);

    println!("\nper-feature sums over the correct parses:");
    for (name, total) in reloaded
        .catalog()
        .names()
        .iter()
        .zip(reloaded.feature_totals())
    {
        println!("  {name:<16} {total}");
    }
    Ok(())
}
