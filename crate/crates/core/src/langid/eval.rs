//! Per-sentence evaluation and its JSON report.

use rayon::prelude::*;
use serde::Serialize;

use crate::assocmem::{ratio, DistanceTable, EvalMode};
use crate::error::{HdcError, Result};
use crate::hdvec::Hypervector;
use crate::langid::corpus::Corpus;
use crate::langid::model::Model;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LanguageScore {
    pub label: String,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairReport {
    pub a: String,
    pub b: String,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub classifier: String,
    pub mode: EvalMode,
    /// Headline figure for `mode`: multiclass accuracy, or the mean of the
    /// per-pair accuracies.
    pub accuracy: f64,
    pub multiclass_accuracy: f64,
    pub sentences: usize,
    pub correct: usize,
    /// Test sentences shorter than one n-gram, left out of every figure.
    pub skipped: usize,
    pub labels: Vec<String>,
    pub per_language: Vec<LanguageScore>,
    /// `confusion[true][predicted]`, indexed like `labels`.
    pub confusion: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairReport>>,
}

impl EvalReport {
    /// Builds the multiclass part of a report from predictions.
    pub(crate) fn from_predictions(
        classifier: &str,
        labels: &[String],
        truth: &[usize],
        predicted: &[usize],
        skipped: usize,
    ) -> Self {
        let k = labels.len();
        let mut confusion = vec![vec![0usize; k]; k];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t][p] += 1;
        }
        let per_language = labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let total: usize = confusion[i].iter().sum();
                LanguageScore {
                    label: l.clone(),
                    total,
                    correct: confusion[i][i],
                    accuracy: ratio(confusion[i][i], total),
                }
            })
            .collect();
        let correct = (0..k).map(|i| confusion[i][i]).sum();
        let acc = ratio(correct, truth.len());
        Self {
            classifier: classifier.to_owned(),
            mode: EvalMode::Multiclass,
            accuracy: acc,
            multiclass_accuracy: acc,
            sentences: truth.len(),
            correct,
            skipped,
            labels: labels.to_vec(),
            per_language,
            confusion,
            pairs: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Encoded test sentences with their class indices in the model.
#[derive(Clone, Debug)]
pub struct EncodedTestSet {
    pub queries: Vec<Hypervector>,
    pub truth: Vec<usize>,
    pub skipped: usize,
}

/// Encodes every test sentence of `corpus` with `model`. Sentences shorter
/// than one n-gram are counted as skipped.
pub fn encode_test_set(model: &Model, corpus: &Corpus) -> Result<EncodedTestSet> {
    let classes = model.classes();
    let truth_of = |label: &str| {
        classes
            .index_of(label)
            .ok_or_else(|| HdcError::Config(format!("test label {label:?} is not in the model")))
    };
    let encoded = corpus
        .test()
        .par_iter()
        .map(|s| {
            let t = truth_of(&s.label)?;
            match model.encoder().encode(&s.text) {
                Ok(hv) => Ok(Some((hv, t))),
                Err(HdcError::TextTooShort { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = EncodedTestSet {
        queries: Vec::with_capacity(encoded.len()),
        truth: Vec::with_capacity(encoded.len()),
        skipped: 0,
    };
    for e in encoded {
        match e {
            Some((hv, t)) => {
                out.queries.push(hv);
                out.truth.push(t);
            }
            None => out.skipped += 1,
        }
    }
    if out.queries.is_empty() {
        return Err(HdcError::Config(
            "corpus has no usable test sentences".into(),
        ));
    }
    Ok(out)
}

/// Classifies every test sentence and summarizes the results.
pub fn evaluate(model: &Model, corpus: &Corpus, mode: EvalMode) -> Result<EvalReport> {
    let set = encode_test_set(model, corpus)?;
    let table = DistanceTable::compute(model.classes(), &set.queries)?;
    Ok(report_from_table(
        model.classes().labels(),
        &table,
        &set.truth,
        set.skipped,
        mode,
    ))
}

pub fn report_from_table(
    labels: &[String],
    table: &DistanceTable,
    truth: &[usize],
    skipped: usize,
    mode: EvalMode,
) -> EvalReport {
    let mut report =
        EvalReport::from_predictions("hd", labels, truth, &table.predictions(), skipped);
    report.mode = mode;
    if mode == EvalMode::Pairwise {
        let pairs: Vec<PairReport> = table
            .pairwise_scores(truth)
            .into_iter()
            .map(|p| PairReport {
                a: labels[p.a].clone(),
                b: labels[p.b].clone(),
                total: p.total,
                correct: p.correct,
                accuracy: p.accuracy(),
            })
            .collect();
        report.accuracy = if pairs.is_empty() {
            0.0
        } else {
            pairs.iter().map(|p| p.accuracy).sum::<f64>() / pairs.len() as f64
        };
        report.pairs = Some(pairs);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::EncoderConfig;
    use crate::langid::corpus::IngestOptions;
    use crate::langid::pipeline::train_pipeline;

    fn texts() -> Vec<(String, String)> {
        vec![
            ("aa".into(), "abab abba baab abab bbaa abab abba".into()),
            ("cc".into(), "cdcd dccd cdcd ddcc cdcd dcdc cddc".into()),
            ("ee".into(), "efef fefe effe efef feef effe fefe".into()),
        ]
    }

    fn cfg() -> EncoderConfig {
        EncoderConfig {
            dim: 2048,
            ..EncoderConfig::default()
        }
    }

    #[test]
    fn training_texts_classify_as_themselves() {
        let c = Corpus::from_texts(texts(), texts(), &IngestOptions::default()).unwrap();
        let (m, _) = train_pipeline(&c, &cfg()).unwrap();
        for mode in [EvalMode::Multiclass, EvalMode::Pairwise] {
            let r = evaluate(&m, &c, mode).unwrap();
            assert_eq!(r.accuracy, 1.0);
            assert_eq!(r.sentences, 3);
            assert_eq!(
                r.confusion,
                vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
            );
        }
    }

    #[test]
    fn single_sentence_report() {
        let c = Corpus::from_texts(
            texts(),
            vec![("cc".into(), "cdc dcd".into())],
            &IngestOptions::default(),
        )
        .unwrap();
        let (m, _) = train_pipeline(&c, &cfg()).unwrap();
        let r = evaluate(&m, &c, EvalMode::Multiclass).unwrap();
        assert_eq!(r.sentences, 1);
        assert!(r.accuracy == 0.0 || r.accuracy == 1.0);
        let r = evaluate(&m, &c, EvalMode::Pairwise).unwrap();
        // Only pairs containing "cc" have sentences.
        assert_eq!(r.pairs.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn short_sentences_are_skipped() {
        let c = Corpus::from_texts(
            texts(),
            vec![("aa".into(), "ab".into()), ("aa".into(), "abab".into())],
            &IngestOptions::default(),
        )
        .unwrap();
        let (m, _) = train_pipeline(&c, &cfg()).unwrap();
        let r = evaluate(&m, &c, EvalMode::Multiclass).unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.sentences, 1);
    }

    #[test]
    fn unknown_test_label_is_config_error() {
        let train = Corpus::from_texts(texts(), vec![], &IngestOptions::default()).unwrap();
        let (m, _) = train_pipeline(&train, &cfg()).unwrap();
        let mut more = texts();
        more.push(("zz".into(), "zzz zzz".into()));
        let test = Corpus::from_texts(
            more,
            vec![("zz".into(), "zzz zz".into())],
            &IngestOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            evaluate(&m, &test, EvalMode::Multiclass),
            Err(HdcError::Config(_))
        ));
    }
}
