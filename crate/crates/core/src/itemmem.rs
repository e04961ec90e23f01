//! Item memory: the fixed seed hypervector for every input symbol, doubling
//! as a clean-up memory for noisy vectors.

use std::collections::HashMap;

use crate::error::{HdcError, Result};
use crate::hdvec::{check_same, Hypervector};
use crate::rng::RandomSource;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemMemory {
    dim: usize,
    seed: u64,
    symbols: Vec<String>,
    vectors: Vec<Hypervector>,
    index: HashMap<String, usize>,
}

impl ItemMemory {
    /// One random vector per symbol, drawn in list order from a single
    /// stream seeded with `seed`.
    pub fn build<S: AsRef<str>>(symbols: &[S], dim: usize, seed: u64) -> Result<Self> {
        if symbols.is_empty() {
            return Err(HdcError::InvalidArgument(
                "item memory needs at least one symbol".into(),
            ));
        }
        let mut rng = RandomSource::new(seed);
        let mut vectors = Vec::with_capacity(symbols.len());
        for _ in symbols {
            vectors.push(Hypervector::random(dim, &mut rng)?);
        }
        Self::from_parts(
            symbols.iter().map(|s| s.as_ref().to_owned()).collect(),
            vectors,
            seed,
        )
    }

    /// Reassembles a memory from stored vectors (used when loading models).
    pub fn from_parts(symbols: Vec<String>, vectors: Vec<Hypervector>, seed: u64) -> Result<Self> {
        if symbols.is_empty() || symbols.len() != vectors.len() {
            return Err(HdcError::InvalidArgument(format!(
                "{} symbols but {} vectors",
                symbols.len(),
                vectors.len()
            )));
        }
        let dim = vectors[0].dim();
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, (s, v)) in symbols.iter().zip(&vectors).enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(HdcError::InvalidArgument(format!("duplicate symbol {s:?}")));
            }
            if v.dim() != dim {
                return Err(HdcError::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
        }
        Ok(Self {
            dim,
            seed,
            symbols,
            vectors,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn vectors(&self) -> &[Hypervector] {
        &self.vectors
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn lookup(&self, symbol: &str) -> Result<&Hypervector> {
        self.index_of(symbol)
            .map(|i| &self.vectors[i])
            .ok_or_else(|| HdcError::NotFound(format!("symbol {symbol:?} not in item memory")))
    }

    /// Nearest stored symbol by Hamming distance; ties go to the lowest index.
    pub fn cleanup(&self, query: &Hypervector) -> Result<(&str, usize)> {
        check_same(&self.vectors[0], query)?;
        let mut best = (0, usize::MAX);
        for (i, v) in self.vectors.iter().enumerate() {
            let d = v.hamming(query)?;
            if d < best.1 {
                best = (i, d);
            }
        }
        Ok((&self.symbols[best.0], best.1))
    }
}

pub fn build_item_memory<S: AsRef<str>>(
    symbols: &[S],
    dim: usize,
    seed: u64,
) -> Result<ItemMemory> {
    ItemMemory::build(symbols, dim, seed)
}
