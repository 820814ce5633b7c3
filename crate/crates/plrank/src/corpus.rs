//! Treebank corpora for parse ranking: feature catalogs, sparse feature
//! vectors, sentences with enumerated candidate parses, and the JSON Lines
//! file format.
//!
//! A corpus file starts with a header object naming the features, followed
//! by one record per sentence:
//!
//! ```text
//! {"features": ["f_adjunct", "f_coord"]}
//! {"id": "s1", "correct": 0, "parses": [{"f_adjunct": 2.0}, {"f_coord": 1.0}]}
//! ```
//!
//! Feature values are sparse: absent names mean 0. All types here are
//! immutable after construction, so shared references can be used freely
//! across threads.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of feature names. Feature indices throughout the crate refer
/// to positions in a catalog.
#[derive(Debug, Clone)]
pub struct FeatureCatalog {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl FeatureCatalog {
    /// Builds a catalog from names, which must be unique and non-empty.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::data("empty feature name"));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::data(format!("duplicate feature name {name:?}")));
            }
        }
        Ok(Self { names, index })
    }

    /// Number of features.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

impl PartialEq for FeatureCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for FeatureCatalog {}

/// Sparse feature-value vector for one parse. Entries are kept sorted by
/// feature index; zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    /// The all-zero vector.
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Builds a vector from (index, value) pairs. Values must be finite and
    /// indices unique; explicit zeros are dropped.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for (j, v) in pairs {
            if !v.is_finite() {
                return Err(Error::data(format!("non-finite value {v} for feature {j}")));
            }
            if v != 0.0 {
                entries.push((j, v));
            }
        }
        entries.sort_by_key(|&(j, _)| j);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::data(format!(
                    "duplicate feature index {}",
                    pair[0].0
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Builds a vector from a dense slice; zeros are dropped.
    ///
    /// Panics on non-finite values, which only a caller bug can produce.
    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|&(_, &v)| {
                assert!(v.is_finite(), "non-finite feature value {v}");
                v != 0.0
            })
            .map(|(j, &v)| (j, v))
            .collect();
        Self { entries }
    }

    /// Value of feature `index`, 0 when absent.
    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(j, _)| j) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    /// Stored (index, value) entries in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest stored feature index, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(j, _)| j)
    }

    /// Calls `f(j, self[j] - other[j])` for every index stored in either
    /// vector, in increasing index order.
    pub(crate) fn for_each_difference<F>(&self, other: &FeatureVector, mut f: F)
    where
        F: FnMut(usize, f64),
    {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut k) = (0, 0);
        while i < a.len() && k < b.len() {
            let (ja, va) = a[i];
            let (jb, vb) = b[k];
            if ja < jb {
                f(ja, va);
                i += 1;
            } else if jb < ja {
                f(jb, -vb);
                k += 1;
            } else {
                f(ja, va - vb);
                i += 1;
                k += 1;
            }
        }
        for &(j, v) in &a[i..] {
            f(j, v);
        }
        for &(j, v) in &b[k..] {
            f(j, -v);
        }
    }
}

/// One yield (surface string) with its enumerated candidate parses and the
/// index of the hand-annotated correct parse.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    id: String,
    parses: Vec<FeatureVector>,
    correct: usize,
}

impl Sentence {
    pub fn new(id: impl Into<String>, parses: Vec<FeatureVector>, correct: usize) -> Result<Self> {
        let id = id.into();
        if parses.is_empty() {
            return Err(Error::data(format!("sentence {id:?}: empty parse list")));
        }
        if correct >= parses.len() {
            return Err(Error::data(format!(
                "sentence {id:?}: correct index {correct} out of range ({} parses)",
                parses.len()
            )));
        }
        Ok(Self {
            id,
            parses,
            correct,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn parses(&self) -> &[FeatureVector] {
        &self.parses
    }

    pub fn correct_index(&self) -> usize {
        self.correct
    }

    pub fn correct_parse(&self) -> &FeatureVector {
        &self.parses[self.correct]
    }

    /// True when the sentence has at least two candidate parses.
    pub fn is_ambiguous(&self) -> bool {
        self.parses.len() >= 2
    }
}

/// Headline statistics of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    /// Total number of sentences.
    pub n_sentences: usize,
    /// Sentences with at least two candidate parses.
    pub n_ambiguous: usize,
    /// Total parse count over the ambiguous sentences only.
    pub n_parses_of_ambiguous: usize,
}

/// An immutable collection of sentences over a shared feature catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    catalog: FeatureCatalog,
    sentences: Vec<Sentence>,
}

impl Corpus {
    /// Validates that sentence ids are unique and every stored feature index
    /// fits the catalog.
    pub fn new(catalog: FeatureCatalog, sentences: Vec<Sentence>) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::data("corpus has no sentences"));
        }
        let mut seen: HashSet<&str> = HashSet::with_capacity(sentences.len());
        for sentence in &sentences {
            if !seen.insert(sentence.id()) {
                return Err(Error::data(format!(
                    "duplicate sentence id {:?}",
                    sentence.id()
                )));
            }
            for parse in sentence.parses() {
                if let Some(j) = parse.max_index() {
                    if j >= catalog.len() {
                        return Err(Error::data(format!(
                            "sentence {:?}: feature index {j} out of range ({} features)",
                            sentence.id(),
                            catalog.len()
                        )));
                    }
                }
            }
        }
        Ok(Self { catalog, sentences })
    }

    pub fn catalog(&self) -> &FeatureCatalog {
        &self.catalog
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    /// Number of sentences.
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Reads a corpus from a JSON Lines file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), &path.display().to_string())
    }

    /// Reads a corpus from any buffered reader; `label` names the source in
    /// errors.
    pub fn read<R: BufRead>(reader: R, label: &str) -> Result<Self> {
        let format = |line: usize, message: String| Error::Format {
            path: label.to_string(),
            line,
            message,
        };

        let mut catalog: Option<FeatureCatalog> = None;
        let mut sentences: Vec<Sentence> = Vec::new();
        let mut first_line_of: HashMap<String, usize> = HashMap::new();

        for (ix, line) in reader.lines().enumerate() {
            let line_no = ix + 1;
            let line = line.map_err(|e| Error::io(label, e))?;
            if line.trim().is_empty() {
                continue;
            }
            match &catalog {
                None => {
                    let header: Header = serde_json::from_str(&line).map_err(|e| {
                        format(
                            line_no,
                            format!("expected header object with \"features\": {e}"),
                        )
                    })?;
                    catalog = Some(match FeatureCatalog::new(header.features) {
                        Ok(c) => c,
                        Err(e) => return Err(format(line_no, e.to_string())),
                    });
                }
                Some(cat) => {
                    let record: SentenceRecord = serde_json::from_str(&line)
                        .map_err(|e| format(line_no, format!("malformed record: {e}")))?;
                    if let Some(first) = first_line_of.get(&record.id) {
                        return Err(format(
                            line_no,
                            format!(
                                "duplicate sentence id {:?} (first seen at line {first})",
                                record.id
                            ),
                        ));
                    }
                    first_line_of.insert(record.id.clone(), line_no);

                    let mut parses = Vec::with_capacity(record.parses.len());
                    for values in &record.parses {
                        let mut pairs = Vec::with_capacity(values.len());
                        for (name, &value) in values {
                            let j = cat.index_of(name).ok_or_else(|| {
                                format(
                                    line_no,
                                    format!("sentence {:?}: unknown feature {name:?}", record.id),
                                )
                            })?;
                            if !value.is_finite() {
                                return Err(format(
                                    line_no,
                                    format!(
                                        "sentence {:?}: non-finite value for feature {name:?}",
                                        record.id
                                    ),
                                ));
                            }
                            pairs.push((j, value));
                        }
                        match FeatureVector::from_pairs(pairs) {
                            Ok(v) => parses.push(v),
                            Err(e) => return Err(format(line_no, e.to_string())),
                        }
                    }
                    match Sentence::new(record.id, parses, record.correct) {
                        Ok(s) => sentences.push(s),
                        Err(e) => return Err(format(line_no, e.to_string())),
                    }
                }
            }
        }

        let catalog =
            catalog.ok_or_else(|| format(0, "empty file: missing header line".to_string()))?;
        if sentences.is_empty() {
            return Err(format(0, "corpus has no sentences".to_string()));
        }
        Self::new(catalog, sentences)
    }

    /// Writes the corpus in the JSON Lines format accepted by [`Corpus::load`].
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Writes the corpus to any writer; output is deterministic.
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let header = Header {
            features: self.catalog.names().to_vec(),
        };
        serde_json::to_writer(&mut *out, &header)?;
        out.write_all(b"\n")?;
        for sentence in &self.sentences {
            let record = SentenceRecord {
                id: sentence.id().to_string(),
                correct: sentence.correct_index(),
                parses: sentence
                    .parses()
                    .iter()
                    .map(|p| {
                        p.iter()
                            .map(|(j, v)| (self.catalog.name(j).to_string(), v))
                            .collect()
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut *out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Sentence counts and ambiguity statistics.
    pub fn stats(&self) -> CorpusStats {
        let mut stats = CorpusStats {
            n_sentences: self.sentences.len(),
            n_ambiguous: 0,
            n_parses_of_ambiguous: 0,
        };
        for sentence in &self.sentences {
            if sentence.is_ambiguous() {
                stats.n_ambiguous += 1;
                stats.n_parses_of_ambiguous += sentence.parses().len();
            }
        }
        stats
    }

    /// Per-feature sums of the correct parses' values: the sufficient
    /// statistics of the annotation.
    pub fn feature_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.catalog.len()];
        for sentence in &self.sentences {
            for (j, v) in sentence.correct_parse().iter() {
                totals[j] += v;
            }
        }
        totals
    }

    /// Splits the corpus into `k` (train, test) pairs for cross-validation.
    ///
    /// Fold assignment is a seeded shuffle of the sentences sorted by id, so
    /// the same (corpus, k, seed) yields the same folds regardless of the
    /// order sentences were loaded in. Test folds are disjoint, cover the
    /// corpus, and differ in size by at most one; within each half sentences
    /// are ordered by id.
    pub fn kfold(&self, k: usize, seed: u64) -> Result<Vec<(Corpus, Corpus)>> {
        let n = self.sentences.len();
        if k < 2 || k > n {
            return Err(Error::config(format!(
                "fold count must be between 2 and the number of sentences (k={k}, n={n})"
            )));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.sentences[a].id().cmp(self.sentences[b].id()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);

        let base = n / k;
        let extra = n % k;
        let mut pairs = Vec::with_capacity(k);
        let mut cursor = 0;
        for fold in 0..k {
            let size = base + usize::from(fold < extra);
            let test_ix: HashSet<usize> = order[cursor..cursor + size].iter().copied().collect();
            cursor += size;

            let mut test = Vec::with_capacity(size);
            let mut train = Vec::with_capacity(n - size);
            let mut by_id: Vec<usize> = (0..n).collect();
            by_id.sort_by(|&a, &b| self.sentences[a].id().cmp(self.sentences[b].id()));
            for ix in by_id {
                let sentence = self.sentences[ix].clone();
                if test_ix.contains(&ix) {
                    test.push(sentence);
                } else {
                    train.push(sentence);
                }
            }
            pairs.push((
                Corpus::new(self.catalog.clone(), train)?,
                Corpus::new(self.catalog.clone(), test)?,
            ));
        }
        Ok(pairs)
    }

    /// Returns a copy with the named features removed from the catalog and
    /// from every parse. Remaining features are renumbered in their original
    /// order.
    pub fn drop_features(&self, names: &[String]) -> Result<Corpus> {
        let mut dropped = vec![false; self.catalog.len()];
        for name in names {
            let j = self
                .catalog
                .index_of(name)
                .ok_or_else(|| Error::data(format!("unknown feature {name:?}")))?;
            dropped[j] = true;
        }
        let mut remap = vec![usize::MAX; self.catalog.len()];
        let mut kept_names = Vec::new();
        for j in 0..self.catalog.len() {
            if !dropped[j] {
                remap[j] = kept_names.len();
                kept_names.push(self.catalog.name(j).to_string());
            }
        }
        let catalog = FeatureCatalog::new(kept_names)?;
        let sentences = self
            .sentences
            .iter()
            .map(|s| {
                let parses = s
                    .parses()
                    .iter()
                    .map(|p| {
                        FeatureVector::from_pairs(
                            p.iter()
                                .filter(|&(j, _)| !dropped[j])
                                .map(|(j, v)| (remap[j], v)),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Sentence::new(s.id(), parses, s.correct_index())
            })
            .collect::<Result<Vec<_>>>()?;
        Corpus::new(catalog, sentences)
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    features: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct SentenceRecord {
    id: String,
    correct: usize,
    parses: Vec<std::collections::BTreeMap<String, f64>>,
}
