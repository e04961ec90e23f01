//! Classical n-gram histogram classifier: one dense count vector of size
//! `|alphabet|^n` per language, compared by cosine similarity.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{HdcError, Result};
use crate::langid::corpus::Corpus;
use crate::langid::eval::EvalReport;

/// Dense n-gram count vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaselineProfile {
    n: usize,
    counts: Vec<u32>,
    total: u64,
}

/// Maps characters to alphabet indices and n-grams to bucket numbers.
#[derive(Clone, Debug)]
pub struct NgramIndexer {
    n: usize,
    index: HashMap<char, usize>,
}

impl NgramIndexer {
    pub fn new(n: usize, alphabet: &[char]) -> Result<Self> {
        if n == 0 || alphabet.is_empty() {
            return Err(HdcError::InvalidArgument(
                "n and the alphabet must be non-empty".into(),
            ));
        }
        let index: HashMap<char, usize> =
            alphabet.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        if index.len() != alphabet.len() {
            return Err(HdcError::InvalidArgument("alphabet symbols repeat".into()));
        }
        let buckets = (alphabet.len() as u64).checked_pow(n as u32);
        if buckets.is_none_or(|b| b > u32::MAX as u64) {
            return Err(HdcError::InvalidArgument(format!(
                "{}^{n} buckets is too many for a dense profile",
                alphabet.len()
            )));
        }
        Ok(Self { n, index })
    }

    pub fn buckets(&self) -> usize {
        self.index.len().pow(self.n as u32)
    }

    /// Bucket of every n-gram in `text`, first symbol most significant.
    pub fn ngrams(&self, text: &str) -> Result<Vec<usize>> {
        let k = self.index.len();
        let modulus = k.pow(self.n as u32 - 1);
        let mut out = Vec::new();
        let mut code = 0usize;
        for (i, c) in text.chars().enumerate() {
            let s = *self
                .index
                .get(&c)
                .ok_or_else(|| HdcError::NotFound(format!("symbol {c:?} not in alphabet")))?;
            code = (code % modulus) * k + s;
            if i + 1 >= self.n {
                out.push(code);
            }
        }
        if out.is_empty() {
            return Err(HdcError::TextTooShort {
                needed: self.n,
                got: text.chars().count(),
            });
        }
        Ok(out)
    }
}

impl BaselineProfile {
    pub fn new(indexer: &NgramIndexer) -> Self {
        Self {
            n: indexer.n,
            counts: vec![0; indexer.buckets()],
            total: 0,
        }
    }

    pub fn add_text(&mut self, indexer: &NgramIndexer, text: &str) -> Result<()> {
        for b in indexer.ngrams(text)? {
            self.counts[b] += 1;
            self.total += 1;
        }
        Ok(())
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn norm(&self) -> f64 {
        self.counts
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }

    /// Heap bytes held by the count vector.
    pub fn footprint_bytes(&self) -> usize {
        self.counts.capacity() * std::mem::size_of::<u32>()
    }
}

/// One profile per label, in label order.
#[derive(Clone, Debug)]
pub struct BaselineModel {
    indexer: NgramIndexer,
    labels: Vec<String>,
    profiles: Vec<BaselineProfile>,
    norms: Vec<f64>,
}

impl BaselineModel {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn profiles(&self) -> &[BaselineProfile] {
        &self.profiles
    }

    /// Cosine similarity of `text`'s n-gram counts to every profile.
    pub fn similarities(&self, text: &str) -> Result<Vec<f64>> {
        let mut grams = self.indexer.ngrams(text)?;
        grams.sort_unstable();
        let mut sparse: Vec<(usize, f64)> = Vec::new();
        for g in grams {
            match sparse.last_mut() {
                Some((b, c)) if *b == g => *c += 1.0,
                _ => sparse.push((g, 1.0)),
            }
        }
        let qnorm = sparse.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
        Ok(self
            .profiles
            .iter()
            .zip(&self.norms)
            .map(|(p, &pn)| {
                if pn == 0.0 {
                    return 0.0;
                }
                let dot: f64 = sparse.iter().map(|&(b, c)| c * p.counts[b] as f64).sum();
                dot / (pn * qnorm)
            })
            .collect())
    }

    /// Index of the most similar profile; ties go to the lowest index.
    pub fn classify(&self, text: &str) -> Result<usize> {
        let sims = self.similarities(text)?;
        let mut best = 0;
        for (i, &s) in sims.iter().enumerate() {
            if s > sims[best] {
                best = i;
            }
        }
        Ok(best)
    }
}

pub fn baseline_train(corpus: &Corpus, n: usize, alphabet: &[char]) -> Result<BaselineModel> {
    let indexer = NgramIndexer::new(n, alphabet)?;
    let profiles = corpus
        .labels()
        .par_iter()
        .map(|label| {
            let mut p = BaselineProfile::new(&indexer);
            for s in corpus.train().iter().filter(|s| &s.label == label) {
                p.add_text(&indexer, &s.text)
                    .map_err(|e| e.context(format!("training sample for {label:?}")))?;
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let norms = profiles.iter().map(BaselineProfile::norm).collect();
    Ok(BaselineModel {
        indexer,
        labels: corpus.labels().to_vec(),
        profiles,
        norms,
    })
}

pub fn baseline_classify<'m>(model: &'m BaselineModel, text: &str) -> Result<&'m str> {
    Ok(&model.labels[model.classify(text)?])
}

/// Multiclass evaluation of the baseline over the corpus test sentences.
pub fn baseline_evaluate(model: &BaselineModel, corpus: &Corpus) -> Result<EvalReport> {
    let results = corpus
        .test()
        .par_iter()
        .map(|s| {
            let t = model
                .labels
                .iter()
                .position(|l| *l == s.label)
                .ok_or_else(|| HdcError::Config(format!("test label {:?} not trained", s.label)))?;
            match model.classify(&s.text) {
                Ok(p) => Ok(Some((t, p))),
                Err(HdcError::TextTooShort { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let (truth, predicted): (Vec<usize>, Vec<usize>) = results.into_iter().flatten().unzip();
    if truth.is_empty() {
        return Err(HdcError::Config(
            "corpus has no usable test sentences".into(),
        ));
    }
    Ok(EvalReport::from_predictions(
        "baseline",
        &model.labels,
        &truth,
        &predicted,
        skipped,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::LATIN_ALPHABET;
    use crate::hdvec::{Hypervector, DEFAULT_DIM};
    use crate::langid::corpus::IngestOptions;

    fn latin() -> Vec<char> {
        LATIN_ALPHABET.chars().collect()
    }

    #[test]
    fn single_trigram_profile() {
        let ix = NgramIndexer::new(3, &latin()).unwrap();
        assert_eq!(ix.buckets(), 19_683);
        let mut p = BaselineProfile::new(&ix);
        p.add_text(&ix, "aaa").unwrap();
        assert_eq!(p.total(), 1);
        let nonzero: Vec<_> = p
            .counts()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .collect();
        assert_eq!(nonzero, vec![(0, &1)]);
    }

    #[test]
    fn bucket_numbering() {
        let ix = NgramIndexer::new(3, &latin()).unwrap();
        // "ab " -> 0*729 + 1*27 + 26
        assert_eq!(ix.ngrams("ab ").unwrap(), vec![53]);
        assert_eq!(
            ix.ngrams("abcd").unwrap(),
            vec![27 + 2, 27 * 27 + 2 * 27 + 3]
        );
        assert!(matches!(
            ix.ngrams("ab"),
            Err(HdcError::TextTooShort { .. })
        ));
        assert!(matches!(ix.ngrams("abé"), Err(HdcError::NotFound(_))));
    }

    #[test]
    fn profile_invariants() {
        let ix = NgramIndexer::new(2, &latin()).unwrap();
        let mut p = BaselineProfile::new(&ix);
        p.add_text(&ix, "hello world and more").unwrap();
        assert_eq!(p.total(), p.counts().iter().map(|&c| c as u64).sum::<u64>());
        assert_eq!(p.total(), 19);
    }

    #[test]
    fn footprint_grows_exponentially_while_hd_is_fixed() {
        let hd_bytes = Hypervector::zeros(DEFAULT_DIM).unwrap().words().len() * 8;
        let mut prev = 0;
        for n in [3, 4, 5] {
            let ix = NgramIndexer::new(n, &latin()).unwrap();
            let p = BaselineProfile::new(&ix);
            assert_eq!(p.footprint_bytes(), 27usize.pow(n as u32) * 4);
            assert!(p.footprint_bytes() > 20 * prev.max(1) || prev == 0);
            assert!(p.footprint_bytes() > hd_bytes);
            prev = p.footprint_bytes();
        }
        assert_eq!(prev, 14_348_907 * 4);
        assert_eq!(hd_bytes, 1256);
    }

    #[test]
    fn classify_and_tie_rule() {
        let c = Corpus::from_texts(
            vec![
                ("a".into(), "abab abab abab".into()),
                ("b".into(), "xyxy xyxy xyxy".into()),
                ("c".into(), "xyxy xyxy xyxy".into()),
            ],
            vec![("a".into(), "ababa".into()), ("b".into(), "yxyxy".into())],
            &IngestOptions::default(),
        )
        .unwrap();
        let m = baseline_train(&c, 3, &latin()).unwrap();
        assert_eq!(baseline_classify(&m, "abab").unwrap(), "a");
        // b and c have identical profiles: the lower index wins.
        assert_eq!(baseline_classify(&m, "xyx").unwrap(), "b");
        // No overlap with any profile: all similarities zero -> index 0.
        assert_eq!(baseline_classify(&m, "qqq").unwrap(), "a");
        let r = baseline_evaluate(&m, &c).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.classifier, "baseline");
    }

    #[test]
    fn too_large_alphabet_power_rejected() {
        assert!(NgramIndexer::new(9, &latin()).is_err());
        assert!(NgramIndexer::new(0, &latin()).is_err());
    }
}
