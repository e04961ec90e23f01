//! Language identification on top of the hypervector primitives: corpus
//! ingest, training, evaluation, persistence and an n-gram histogram
//! baseline.

pub mod baseline;
pub mod corpus;
pub mod eval;
pub mod model;
pub mod pipeline;
pub mod synth;

pub use baseline::{baseline_classify, baseline_evaluate, baseline_train, BaselineModel};
pub use corpus::{ingest, write_layout, Corpus, IngestOptions, Role, Sample};
pub use eval::{encode_test_set, evaluate, EncodedTestSet, EvalReport};
pub use model::Model;
pub use pipeline::{train_pipeline, TrainStats};
pub use synth::{synthetic_corpus, synthetic_texts, SynthConfig};
