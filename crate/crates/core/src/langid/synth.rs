//! Synthetic multi-language corpus for running the pipeline without
//! downloaded text.
//!
//! Each "language" is a first-order Markov chain over the 27-symbol Latin
//! alphabet. Languages are grouped into families that share a base chain, so
//! some pairs are much harder to tell apart than others.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::encoder::LATIN_ALPHABET;
use crate::error::{HdcError, Result};
use crate::langid::corpus::{Corpus, IngestOptions};
use crate::rng::RandomSource;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub languages: usize,
    pub families: usize,
    /// Characters of training text per language.
    pub train_chars: usize,
    pub test_sentences: usize,
    pub sentence_min: usize,
    pub sentence_max: usize,
    /// Dirichlet concentration of each transition row; smaller is peakier.
    pub concentration: f64,
    /// Weight of the family chain in each language's chain.
    pub family_weight: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            languages: 21,
            families: 7,
            train_chars: 100_000,
            test_sentences: 100,
            sentence_min: 60,
            sentence_max: 200,
            concentration: 0.2,
            family_weight: 0.7,
            seed: 2024,
        }
    }
}

/// First-order chain; row `i` is the distribution of the symbol after `i`.
#[derive(Clone, Debug)]
pub struct MarkovChain {
    cumulative: Vec<Vec<f64>>,
}

const SPACE: usize = 26;

impl MarkovChain {
    fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cumulative = rows
            .into_iter()
            .map(|row| {
                let total: f64 = row.iter().sum();
                let mut acc = 0.0;
                row.iter()
                    .map(|p| {
                        acc += p / total;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { cumulative }
    }

    fn next(&self, state: usize, rng: &mut RandomSource) -> usize {
        let u: f64 = rng.random();
        let row = &self.cumulative[state];
        row.iter().position(|&c| u < c).unwrap_or(row.len() - 1)
    }

    /// `len` symbols starting after a space, never emitting two spaces in a
    /// row, without leading or trailing space.
    pub fn generate(&self, len: usize, rng: &mut RandomSource) -> String {
        let alphabet: Vec<char> = LATIN_ALPHABET.chars().collect();
        let mut out = String::with_capacity(len);
        let mut state = SPACE;
        let mut produced = 0;
        while produced < len {
            let s = self.next(state, rng);
            if s == SPACE && (produced == 0 || produced + 1 == len) {
                continue;
            }
            out.push(alphabet[s]);
            state = s;
            produced += 1;
        }
        out
    }
}

fn dirichlet_row(alpha: f64, rng: &mut RandomSource) -> Result<Vec<f64>> {
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| HdcError::InvalidArgument(e.to_string()))?;
    Ok((0..27).map(|_| gamma.sample(rng) + 1e-12).collect())
}

fn normalized(row: Vec<f64>) -> Vec<f64> {
    let t: f64 = row.iter().sum();
    row.into_iter().map(|x| x / t).collect()
}

fn chain_rows(alpha: f64, rng: &mut RandomSource) -> Result<Vec<Vec<f64>>> {
    (0..27)
        .map(|i| {
            let mut row = normalized(dirichlet_row(alpha, rng)?);
            if i == SPACE {
                row[SPACE] = 0.0;
            }
            Ok(row)
        })
        .collect()
}

/// Chains for every language, in label order.
pub fn language_chains(config: &SynthConfig) -> Result<Vec<MarkovChain>> {
    if config.languages == 0 || config.families == 0 {
        return Err(HdcError::InvalidArgument(
            "need at least one language and one family".into(),
        ));
    }
    if !(0.0..=1.0).contains(&config.family_weight) || config.concentration <= 0.0 {
        return Err(HdcError::InvalidArgument(
            "family weight must be in [0, 1] and concentration positive".into(),
        ));
    }
    let mut rng = RandomSource::new(config.seed);
    let families = (0..config.families)
        .map(|_| chain_rows(config.concentration, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    (0..config.languages)
        .map(|l| {
            let own = chain_rows(config.concentration, &mut rng)?;
            let fam = &families[l % config.families];
            let w = config.family_weight;
            let rows = own
                .into_iter()
                .zip(fam)
                .map(|(o, f)| {
                    o.iter()
                        .zip(f)
                        .map(|(a, b)| (1.0 - w) * a + w * b)
                        .collect()
                })
                .collect();
            Ok(MarkovChain::from_rows(rows))
        })
        .collect()
}

pub fn label_for(index: usize) -> String {
    format!("lang{index:02}")
}

/// Raw `(label, text)` pairs for training and test.
pub type Texts = Vec<(String, String)>;

pub fn synthetic_texts(config: &SynthConfig) -> Result<(Texts, Texts)> {
    if config.sentence_min == 0 || config.sentence_min > config.sentence_max {
        return Err(HdcError::InvalidArgument(
            "invalid sentence length range".into(),
        ));
    }
    let chains = language_chains(config)?;
    let mut train = Vec::with_capacity(chains.len());
    let mut test = Vec::with_capacity(chains.len() * config.test_sentences);
    for (i, chain) in chains.iter().enumerate() {
        let label = label_for(i);
        let mut rng = RandomSource::derive(config.seed, 1 + 2 * i as u64);
        train.push((label.clone(), chain.generate(config.train_chars, &mut rng)));
        let mut rng = RandomSource::derive(config.seed, 2 + 2 * i as u64);
        for _ in 0..config.test_sentences {
            let len = rng.random_range(config.sentence_min..=config.sentence_max);
            test.push((label.clone(), chain.generate(len, &mut rng)));
        }
    }
    Ok((train, test))
}

pub fn synthetic_corpus(config: &SynthConfig) -> Result<Corpus> {
    let (train, test) = synthetic_texts(config)?;
    Corpus::from_texts(train, test, &IngestOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::normalize_text;

    fn small() -> SynthConfig {
        SynthConfig {
            languages: 4,
            families: 2,
            train_chars: 2000,
            test_sentences: 5,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn texts_are_already_normalized() {
        let (train, test) = synthetic_texts(&small()).unwrap();
        assert_eq!(train.len(), 4);
        assert_eq!(test.len(), 20);
        for (_, t) in train.iter().chain(&test) {
            assert_eq!(&normalize_text(t), t);
        }
        assert_eq!(train[0].1.chars().count(), 2000);
        for (_, t) in &test {
            let n = t.chars().count();
            assert!((60..=200).contains(&n));
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            synthetic_texts(&small()).unwrap(),
            synthetic_texts(&small()).unwrap()
        );
        let other = SynthConfig { seed: 1, ..small() };
        assert_ne!(
            synthetic_texts(&small()).unwrap(),
            synthetic_texts(&other).unwrap()
        );
    }

    #[test]
    fn corpus_labels() {
        let c = synthetic_corpus(&small()).unwrap();
        assert_eq!(c.labels(), &["lang00", "lang01", "lang02", "lang03"]);
        assert!(c.warnings().is_empty());
    }

    #[test]
    fn bad_configs() {
        assert!(synthetic_texts(&SynthConfig {
            languages: 0,
            ..small()
        })
        .is_err());
        assert!(synthetic_texts(&SynthConfig {
            sentence_min: 0,
            ..small()
        })
        .is_err());
        assert!(synthetic_texts(&SynthConfig {
            family_weight: 2.0,
            ..small()
        })
        .is_err());
    }
}
