//! Trained model and its binary container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "HDCM"                      magic
//! u32                         format version (1)
//! u32 D, u32 n
//! u32 len, [u8; len]          alphabet, UTF-8
//! u64 item seed, u64 tie seed
//! u8                          tie mode (0 random, 1 ties-to-one)
//! u32 count, count x vector   item memory, in alphabet order
//! u32 count, count x (u32 len, [u8; len] label, vector)
//! ```
//!
//! A vector is `ceil(D / 64)` u64 words, bit `i` in word `i / 64` at bit
//! `i % 64`, padding bits zero. A JSON sidecar with the same metadata is
//! written next to the binary for inspection; loading ignores it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::assocmem::{AssociativeMemory, ClassificationResult};
use crate::encoder::{normalize_with, EncoderConfig, TextEncoder, TieMode};
use crate::error::{HdcError, Result};
use crate::hdvec::{words_for, Hypervector};
use crate::itemmem::ItemMemory;

pub const MAGIC: &[u8; 4] = b"HDCM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Model {
    config: EncoderConfig,
    items: ItemMemory,
    classes: AssociativeMemory,
    encoder: TextEncoder,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    format_version: u32,
    dim: usize,
    n: usize,
    alphabet: String,
    item_seed: u64,
    tie_seed: u64,
    tie_mode: TieMode,
    words_per_vector: usize,
    labels: &'a [String],
}

impl Model {
    pub fn new(
        config: EncoderConfig,
        items: ItemMemory,
        classes: AssociativeMemory,
    ) -> Result<Self> {
        config.validate()?;
        if items.symbols() != config.alphabet_symbols().as_slice() {
            return Err(HdcError::InvalidArgument(
                "item memory symbols do not match the alphabet".into(),
            ));
        }
        if classes.dim() != config.dim {
            return Err(HdcError::DimensionMismatch {
                expected: config.dim,
                got: classes.dim(),
            });
        }
        if !classes.is_finalized() {
            return Err(HdcError::InvalidArgument(
                "associative memory has unfinalized training".into(),
            ));
        }
        let encoder = TextEncoder::new(&config, &items)?;
        Ok(Self {
            config,
            items,
            classes,
            encoder,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn item_memory(&self) -> &ItemMemory {
        &self.items
    }

    pub fn classes(&self) -> &AssociativeMemory {
        &self.classes
    }

    pub fn encoder(&self) -> &TextEncoder {
        &self.encoder
    }

    /// Normalizes raw text with the model's alphabet and encodes it.
    pub fn encode_raw(&self, raw: &str) -> Result<Hypervector> {
        self.encoder
            .encode(&normalize_with(raw, &self.config.alphabet))
    }

    pub fn classify_raw(&self, raw: &str) -> Result<ClassificationResult> {
        self.classes.classify(&self.encode_raw(raw)?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let c = &self.config;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, FORMAT_VERSION);
        put_u32(&mut out, c.dim as u32);
        put_u32(&mut out, c.n as u32);
        put_str(&mut out, &c.alphabet.iter().collect::<String>());
        out.extend_from_slice(&c.item_seed.to_le_bytes());
        out.extend_from_slice(&c.tie_seed.to_le_bytes());
        out.push(match c.tie_mode {
            TieMode::Random => 0,
            TieMode::One => 1,
        });
        put_u32(&mut out, self.items.len() as u32);
        for v in self.items.vectors() {
            put_vector(&mut out, v);
        }
        put_u32(&mut out, self.classes.len() as u32);
        for (label, v) in self.classes.labels().iter().zip(self.classes.vectors()) {
            put_str(&mut out, label);
            put_vector(&mut out, v);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(HdcError::Format("not a model file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(HdcError::Format(format!(
                "unsupported model format version {version}"
            )));
        }
        let dim = r.u32()? as usize;
        let n = r.u32()? as usize;
        if dim == 0 || n == 0 {
            return Err(HdcError::Format("dimension and n must be non-zero".into()));
        }
        let alphabet: Vec<char> = r.string()?.chars().collect();
        let item_seed = r.u64()?;
        let tie_seed = r.u64()?;
        let tie_mode = match r.u8()? {
            0 => TieMode::Random,
            1 => TieMode::One,
            other => return Err(HdcError::Format(format!("unknown tie mode {other}"))),
        };
        let config = EncoderConfig {
            n,
            dim,
            alphabet,
            item_seed,
            tie_seed,
            tie_mode,
        };
        config
            .validate()
            .map_err(|e| HdcError::Format(format!("invalid stored configuration: {e}")))?;
        let items_count = r.u32()? as usize;
        if items_count != config.alphabet.len() {
            return Err(HdcError::Format(format!(
                "{items_count} item vectors for a {}-symbol alphabet",
                config.alphabet.len()
            )));
        }
        let item_vectors = (0..items_count)
            .map(|_| r.vector(dim))
            .collect::<Result<Vec<_>>>()?;
        let items = ItemMemory::from_parts(config.alphabet_symbols(), item_vectors, item_seed)
            .map_err(|e| HdcError::Format(e.to_string()))?;
        let class_count = r.u32()? as usize;
        let mut labels = Vec::with_capacity(class_count.min(1 << 16));
        let mut vectors = Vec::with_capacity(class_count.min(1 << 16));
        for _ in 0..class_count {
            labels.push(r.string()?);
            vectors.push(r.vector(dim)?);
        }
        if r.pos != bytes.len() {
            return Err(HdcError::Format(format!(
                "{} trailing bytes after model",
                bytes.len() - r.pos
            )));
        }
        let classes = AssociativeMemory::from_parts(dim, labels, vectors)
            .map_err(|e| HdcError::Format(e.to_string()))?;
        Self::new(config, items, classes)
    }

    pub fn sidecar_json(&self) -> String {
        let c = &self.config;
        let side = Sidecar {
            format_version: FORMAT_VERSION,
            dim: c.dim,
            n: c.n,
            alphabet: c.alphabet.iter().collect(),
            item_seed: c.item_seed,
            tie_seed: c.tie_seed,
            tie_mode: c.tie_mode,
            words_per_vector: words_for(c.dim),
            labels: self.classes.labels(),
        };
        let mut s = serde_json::to_string_pretty(&side).expect("sidecar serializes");
        s.push('\n');
        s
    }

    /// Writes the binary model to `path` and the sidecar to `<path>.json`.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| HdcError::io(path, e))?;
        let side = sidecar_path(path);
        fs::write(&side, self.sidecar_json()).map_err(|e| HdcError::io(&side, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| HdcError::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| e.context(format!("loading {}", path.display())))
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn put_vector(out: &mut Vec<u8>, v: &Hypervector) {
    for w in v.words() {
        out.extend_from_slice(&w.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| HdcError::Format("model file is truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| HdcError::Format("string is not valid UTF-8".into()))
    }

    fn vector(&mut self, dim: usize) -> Result<Hypervector> {
        let n = words_for(dim);
        let raw = self.take(n * 8)?;
        let words = raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Hypervector::from_words(dim, words)
    }
}
