use rayon::prelude::*;

use crate::assocmem::AssociativeMemory;
use crate::encoder::{EncoderConfig, TieMode};
use crate::error::{HdcError, Result};
use crate::hdvec::TieBreak;
use crate::langid::corpus::Corpus;
use crate::langid::model::Model;
use crate::rng::RandomSource;

/// Tie-break stream used when a label has several training samples.
const FINALIZE_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrainStats {
    pub samples: usize,
    /// Symbols pushed through the encoder; equals the normalized training
    /// character count (every character is read exactly once).
    pub symbols: u64,
    pub ngrams: u64,
}

/// Builds the item memory, encodes every training sample in one pass and
/// stores one class per label.
pub fn train_pipeline(corpus: &Corpus, config: &EncoderConfig) -> Result<(Model, TrainStats)> {
    config.validate()?;
    let items = config.build_item_memory()?;
    let encoder = crate::encoder::TextEncoder::new(config, &items)?;
    let encoded = corpus
        .train()
        .par_iter()
        .map(|s| {
            encoder.encode_with_stats(&s.text).map_err(|e| {
                e.context(format!(
                    "training sample for {:?} ({})",
                    s.label,
                    s.source.display()
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut classes = AssociativeMemory::new(config.dim)?;
    let mut stats = TrainStats::default();
    // Train in label order so the stored row order matches `corpus.labels()`.
    for label in corpus.labels() {
        for (s, (hv, st)) in corpus.train().iter().zip(&encoded) {
            if &s.label == label {
                classes.train(label, hv.clone())?;
                stats.samples += 1;
                stats.symbols += st.symbols;
                stats.ngrams += st.ngrams;
            }
        }
    }
    if classes.is_empty() {
        return Err(HdcError::Config("no training samples".into()));
    }
    match config.tie_mode {
        TieMode::One => classes.finalize(TieBreak::One)?,
        TieMode::Random => {
            let mut rng = RandomSource::derive(config.tie_seed, FINALIZE_STREAM);
            classes.finalize(TieBreak::Random(&mut rng))?
        }
    }
    let model = Model::new(config.clone(), items, classes)?;
    Ok((model, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langid::corpus::IngestOptions;

    fn corpus() -> Corpus {
        Corpus::from_texts(
            vec![
                (
                    "en".into(),
                    "the quick brown fox jumps over the lazy dog".into(),
                ),
                ("xx".into(), "zzz qqq zzz qqq zzz".into()),
                ("en".into(), "and then some more english text".into()),
            ],
            vec![],
            &IngestOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn one_class_per_label_and_single_pass() {
        let c = corpus();
        let cfg = EncoderConfig {
            dim: 512,
            ..EncoderConfig::default()
        };
        let (m, stats) = train_pipeline(&c, &cfg).unwrap();
        assert_eq!(m.classes().labels(), &["en".to_string(), "xx".to_string()]);
        assert_eq!(stats.samples, 3);
        assert_eq!(stats.symbols as usize, c.train_chars());
        assert_eq!(stats.ngrams as usize, c.train_chars() - 3 * 2);
    }

    #[test]
    fn deterministic_model_bytes() {
        let c = corpus();
        let cfg = EncoderConfig {
            dim: 700,
            ..EncoderConfig::default()
        };
        let (a, _) = train_pipeline(&c, &cfg).unwrap();
        let (b, _) = train_pipeline(&c, &cfg).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn short_training_text_reports_label() {
        let c = Corpus::from_texts(
            vec![("en".into(), "ab".into())],
            vec![],
            &IngestOptions::default(),
        )
        .unwrap();
        let err = train_pipeline(
            &c,
            &EncoderConfig {
                dim: 64,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err.root(), HdcError::TextTooShort { .. }));
        assert!(err.to_string().contains("\"en\""));
    }
}
