//! Binary hyperdimensional computing: the Multiply-Add-Permute algebra over
//! bit-packed hypervectors, an n-gram language identifier built on it, and
//! behavioral fault models for studying its robustness.

pub mod assocmem;
pub mod encoder;
pub mod error;
pub mod faultlab;
pub mod hdvec;
pub mod itemmem;
pub mod langid;
pub mod rng;

pub use assocmem::{AssociativeMemory, ClassificationResult, DistanceTable, EvalMode};
pub use encoder::{EncoderConfig, RecordField, TextEncoder, TieMode};
pub use error::{HdcError, Result};
pub use hdvec::{Accumulator, Hypervector, TieBreak};
pub use itemmem::ItemMemory;
pub use langid::{Corpus, EvalReport, Model};
pub use rng::RandomSource;
