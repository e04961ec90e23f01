//! Mapping and encoding: text to n-gram hypervectors to a single text
//! hypervector, plus key/value record encoding.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{HdcError, Result};
use crate::hdvec::{bundle, Accumulator, Hypervector, TieBreak, DEFAULT_DIM};
use crate::itemmem::ItemMemory;
use crate::rng::RandomSource;

/// The 26 Latin letters followed by the space.
pub const LATIN_ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieMode {
    /// Ties drawn from a stream seeded with the configured tie seed.
    Random,
    /// Ties resolve to 1.
    One,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub n: usize,
    pub dim: usize,
    pub alphabet: Vec<char>,
    pub item_seed: u64,
    pub tie_seed: u64,
    pub tie_mode: TieMode,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            n: 3,
            dim: DEFAULT_DIM,
            alphabet: LATIN_ALPHABET.chars().collect(),
            item_seed: 1,
            tie_seed: 2,
            tie_mode: TieMode::Random,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(HdcError::InvalidArgument(
                "n-gram order must be >= 1".into(),
            ));
        }
        if self.dim == 0 {
            return Err(HdcError::InvalidArgument("dimension must be >= 1".into()));
        }
        if self.alphabet.is_empty() {
            return Err(HdcError::InvalidArgument("alphabet is empty".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.alphabet {
            if !seen.insert(c) {
                return Err(HdcError::InvalidArgument(format!(
                    "alphabet symbol {c:?} repeated"
                )));
            }
        }
        Ok(())
    }

    pub fn alphabet_symbols(&self) -> Vec<String> {
        self.alphabet.iter().map(|c| c.to_string()).collect()
    }

    /// Item memory for this configuration's alphabet and seed.
    pub fn build_item_memory(&self) -> Result<ItemMemory> {
        self.validate()?;
        ItemMemory::build(&self.alphabet_symbols(), self.dim, self.item_seed)
    }
}

/// Normalizes against the Latin alphabet: see [`normalize_with`].
pub fn normalize_text(raw: &str) -> String {
    normalize_with(raw, &LATIN_ALPHABET.chars().collect::<Vec<_>>())
}

/// Folds ASCII capitals to lower case, keeps alphabet symbols, and turns each
/// maximal run of anything else into a single space (when the alphabet has
/// one). Leading and trailing separators are dropped.
pub fn normalize_with(raw: &str, alphabet: &[char]) -> String {
    let has_space = alphabet.contains(&' ');
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        let c = c.to_ascii_lowercase();
        if c != ' ' && alphabet.contains(&c) {
            if pending_space && has_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

/// Hypervector of one n-gram: the first letter rotated `n-1` times, the next
/// `n-2` times, down to the last letter unrotated, all bound together.
pub fn encode_ngram<S: AsRef<str>>(
    letters: &[S],
    n: usize,
    mem: &ItemMemory,
) -> Result<Hypervector> {
    if letters.len() != n || n == 0 {
        return Err(HdcError::InvalidArgument(format!(
            "expected {n} symbols, got {}",
            letters.len()
        )));
    }
    let mut out = Hypervector::zeros(mem.dim())?;
    for (j, letter) in letters.iter().enumerate() {
        let v = mem.lookup(letter.as_ref())?.permute(n - 1 - j);
        out.bind_assign(&v)?;
    }
    Ok(out)
}

/// Counters gathered while encoding one text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EncodeStats {
    pub symbols: u64,
    pub ngrams: u64,
}

/// Streaming text encoder with the rotated letter vectors precomputed.
///
/// `rotated[s][j]` is the item vector of symbol `j` permuted `s` times, so an
/// n-gram costs `n` word-wise XORs instead of `n` rotations.
#[derive(Clone, Debug)]
pub struct TextEncoder {
    n: usize,
    dim: usize,
    tie_mode: TieMode,
    tie_seed: u64,
    rotated: Vec<Vec<Hypervector>>,
    ascii: [Option<u16>; 128],
    other: HashMap<char, u16>,
}

impl TextEncoder {
    pub fn new(config: &EncoderConfig, mem: &ItemMemory) -> Result<Self> {
        config.validate()?;
        if mem.dim() != config.dim {
            return Err(HdcError::DimensionMismatch {
                expected: config.dim,
                got: mem.dim(),
            });
        }
        let mut ascii = [None; 128];
        let mut other = HashMap::new();
        let mut base = Vec::with_capacity(config.alphabet.len());
        for (i, c) in config.alphabet.iter().enumerate() {
            base.push(mem.lookup(&c.to_string())?.clone());
            if c.is_ascii() {
                ascii[*c as usize] = Some(i as u16);
            } else {
                other.insert(*c, i as u16);
            }
        }
        let rotated = (0..config.n)
            .map(|s| base.iter().map(|v| v.permute(s)).collect())
            .collect();
        Ok(Self {
            n: config.n,
            dim: config.dim,
            tie_mode: config.tie_mode,
            tie_seed: config.tie_seed,
            rotated,
            ascii,
            other,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn symbol_index(&self, c: char) -> Option<usize> {
        if c.is_ascii() {
            self.ascii[c as usize].map(usize::from)
        } else {
            self.other.get(&c).copied().map(usize::from)
        }
    }

    pub fn session(&self) -> Result<EncodeSession<'_>> {
        Ok(EncodeSession {
            encoder: self,
            window: vec![0; self.n],
            filled: 0,
            head: 0,
            scratch: vec![0; self.rotated[0][0].words().len()],
            acc: Accumulator::new(self.dim)?,
            stats: EncodeStats::default(),
        })
    }

    /// Encodes already-normalized text; every character must be in the alphabet.
    pub fn encode(&self, text: &str) -> Result<Hypervector> {
        Ok(self.encode_with_stats(text)?.0)
    }

    pub fn encode_with_stats(&self, text: &str) -> Result<(Hypervector, EncodeStats)> {
        let mut session = self.session()?;
        for c in text.chars() {
            session.push(c)?;
        }
        session.finish()
    }
}

/// One in-flight encoding. Memory use is independent of the text length.
pub struct EncodeSession<'e> {
    encoder: &'e TextEncoder,
    window: Vec<usize>,
    filled: usize,
    head: usize,
    scratch: Vec<u64>,
    acc: Accumulator,
    stats: EncodeStats,
}

impl EncodeSession<'_> {
    pub fn push(&mut self, c: char) -> Result<()> {
        let enc = self.encoder;
        let sym = enc
            .symbol_index(c)
            .ok_or_else(|| HdcError::NotFound(format!("symbol {c:?} not in alphabet")))?;
        let n = enc.n;
        self.window[self.head] = sym;
        self.head = (self.head + 1) % n;
        self.filled = (self.filled + 1).min(n);
        self.stats.symbols += 1;
        if self.filled < n {
            return Ok(());
        }
        // `head` now points at the oldest symbol.
        self.scratch.fill(0);
        for j in 0..n {
            let s = self.window[(self.head + j) % n];
            let v = &enc.rotated[n - 1 - j][s];
            for (o, w) in self.scratch.iter_mut().zip(v.words()) {
                *o ^= w;
            }
        }
        self.acc.add_words(&self.scratch)?;
        self.stats.ngrams += 1;
        Ok(())
    }

    pub fn stats(&self) -> EncodeStats {
        self.stats
    }

    pub fn finish(self) -> Result<(Hypervector, EncodeStats)> {
        let enc = self.encoder;
        if self.stats.ngrams == 0 {
            return Err(HdcError::TextTooShort {
                needed: enc.n,
                got: self.stats.symbols as usize,
            });
        }
        let hv = match enc.tie_mode {
            TieMode::One => self.acc.threshold(TieBreak::One)?,
            TieMode::Random => {
                let mut rng = RandomSource::new(enc.tie_seed);
                self.acc.threshold(TieBreak::Random(&mut rng))?
            }
        };
        Ok((hv, self.stats))
    }
}

/// One-shot form of [`TextEncoder::encode`].
pub fn encode_text(text: &str, config: &EncoderConfig, mem: &ItemMemory) -> Result<Hypervector> {
    TextEncoder::new(config, mem)?.encode(text)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordField {
    pub key: String,
    pub value: String,
}

impl RecordField {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            value: value.into(),
        }
    }
}

/// Bundle of `key XOR value` over all fields.
pub fn encode_record(
    fields: &[RecordField],
    mem: &ItemMemory,
    ties: TieBreak<'_>,
) -> Result<Hypervector> {
    if fields.is_empty() {
        return Err(HdcError::InvalidArgument("record has no fields".into()));
    }
    let mut keys = HashSet::new();
    let mut bound = Vec::with_capacity(fields.len());
    for f in fields {
        if !keys.insert(f.key.as_str()) {
            return Err(HdcError::InvalidArgument(format!(
                "key {:?} repeated in record",
                f.key
            )));
        }
        bound.push(mem.lookup(&f.key)?.bind(mem.lookup(&f.value)?)?);
    }
    bundle(&bound, ties)
}

/// Unbinds `key` from the record and cleans the result up against `mem`.
pub fn decode_field(record: &Hypervector, key: &str, mem: &ItemMemory) -> Result<(String, usize)> {
    let noisy = mem.lookup(key)?.bind(record)?;
    let (sym, d) = mem.cleanup(&noisy)?;
    Ok((sym.to_owned(), d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dim: usize, n: usize) -> EncoderConfig {
        EncoderConfig {
            n,
            dim,
            tie_mode: TieMode::One,
            ..EncoderConfig::default()
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_text("Hello, World!"), "hello world");
        assert_eq!(normalize_text("Ça va"), "a va");
        assert_eq!(normalize_text("  a  "), "a");
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("!!!"), "");
        assert_eq!(normalize_text("a\n\tb\u{FFFD}c"), "a b c");
    }

    #[test]
    fn normalize_without_space_symbol() {
        assert_eq!(normalize_with("ab, ba", &['a', 'b']), "abba");
    }

    #[test]
    fn ngram_structure() {
        let c = cfg(1000, 3);
        let mem = c.build_item_memory().unwrap();
        let a = mem.lookup("a").unwrap();
        let b = mem.lookup("b").unwrap();
        let cc = mem.lookup("c").unwrap();
        let expected = a.permute(2).bind(&b.permute(1)).unwrap().bind(cc).unwrap();
        assert_eq!(encode_ngram(&["a", "b", "c"], 3, &mem).unwrap(), expected);
        // rho(rho(A) ^ B) ^ C form
        let nested = a.permute(1).bind(b).unwrap().permute(1).bind(cc).unwrap();
        assert_eq!(expected, nested);
    }

    #[test]
    fn ngram_order_matters() {
        let mem = cfg(10_000, 3).build_item_memory().unwrap();
        let abc = encode_ngram(&["a", "b", "c"], 3, &mem).unwrap();
        let acb = encode_ngram(&["a", "c", "b"], 3, &mem).unwrap();
        let d = abc.normalized_hamming(&acb).unwrap();
        assert!((0.45..=0.55).contains(&d), "{d}");
    }

    #[test]
    fn ngram_errors_and_unigram() {
        let mem = cfg(64, 1).build_item_memory().unwrap();
        assert_eq!(
            &encode_ngram(&["a"], 1, &mem).unwrap(),
            mem.lookup("a").unwrap()
        );
        assert!(matches!(
            encode_ngram(&["a", "b"], 3, &mem),
            Err(HdcError::InvalidArgument(_))
        ));
        assert!(matches!(
            encode_ngram(&["a", "b", "é"], 3, &mem),
            Err(HdcError::NotFound(_))
        ));
    }

    #[test]
    fn exact_window_text_equals_ngram() {
        let c = cfg(500, 3);
        let mem = c.build_item_memory().unwrap();
        let enc = TextEncoder::new(&c, &mem).unwrap();
        assert_eq!(
            enc.encode("q z").unwrap(),
            encode_ngram(&["q", " ", "z"], 3, &mem).unwrap()
        );
    }

    #[test]
    fn window_count() {
        let c = cfg(128, 3);
        let mem = c.build_item_memory().unwrap();
        let enc = TextEncoder::new(&c, &mem).unwrap();
        let (_, stats) = enc.encode_with_stats("the quick brown fox").unwrap();
        assert_eq!(stats.symbols, 19);
        assert_eq!(stats.ngrams, 17);
    }

    #[test]
    fn too_short_and_unknown_symbol() {
        let c = cfg(128, 3);
        let mem = c.build_item_memory().unwrap();
        let enc = TextEncoder::new(&c, &mem).unwrap();
        assert!(matches!(
            enc.encode("ab"),
            Err(HdcError::TextTooShort { needed: 3, got: 2 })
        ));
        assert!(matches!(enc.encode("abC"), Err(HdcError::NotFound(_))));
    }

    #[test]
    fn random_ties_are_reproducible() {
        let c = EncoderConfig {
            dim: 256,
            ..EncoderConfig::default()
        };
        let mem = c.build_item_memory().unwrap();
        let enc = TextEncoder::new(&c, &mem).unwrap();
        // "abcd" has two trigrams, so ties are frequent.
        assert_eq!(enc.encode("abcd").unwrap(), enc.encode("abcd").unwrap());
    }

    #[test]
    fn record_single_field_is_exact() {
        let mem = ItemMemory::build(&["x", "y", "z", "a", "b", "c"], 10_000, 3).unwrap();
        let h = encode_record(&[RecordField::new("x", "a")], &mem, TieBreak::One).unwrap();
        assert_eq!(
            h,
            mem.lookup("x")
                .unwrap()
                .bind(mem.lookup("a").unwrap())
                .unwrap()
        );
        assert_eq!(decode_field(&h, "x", &mem).unwrap(), ("a".to_string(), 0));
    }

    #[test]
    fn record_three_fields_decode() {
        let mem = ItemMemory::build(&["x", "y", "z", "a", "b", "c"], 10_000, 4).unwrap();
        let fields = [
            RecordField::new("x", "a"),
            RecordField::new("y", "b"),
            RecordField::new("z", "c"),
        ];
        let h = encode_record(&fields, &mem, TieBreak::One).unwrap();
        for f in &fields {
            assert_eq!(decode_field(&h, &f.key, &mem).unwrap().0, f.value);
        }
        assert!(matches!(
            decode_field(&h, "w", &mem),
            Err(HdcError::NotFound(_))
        ));
    }

    #[test]
    fn record_matches_majority_oracle_d16() {
        let mem = ItemMemory::build(&["x", "y", "z", "a", "b", "c"], 16, 5).unwrap();
        let fields = [
            RecordField::new("x", "a"),
            RecordField::new("y", "b"),
            RecordField::new("z", "c"),
        ];
        let pairs: Vec<Hypervector> = fields
            .iter()
            .map(|f| {
                mem.lookup(&f.key)
                    .unwrap()
                    .bind(mem.lookup(&f.value).unwrap())
                    .unwrap()
            })
            .collect();
        let h = encode_record(&fields, &mem, TieBreak::One).unwrap();
        for i in 0..16 {
            let ones = pairs.iter().filter(|p| p.get(i)).count();
            assert_eq!(h.get(i), ones >= 2);
        }
    }

    #[test]
    fn record_rejects_duplicate_keys() {
        let mem = ItemMemory::build(&["x", "a", "b"], 64, 1).unwrap();
        let fields = [RecordField::new("x", "a"), RecordField::new("x", "b")];
        assert!(encode_record(&fields, &mem, TieBreak::One).is_err());
        assert!(encode_record(&[], &mem, TieBreak::One).is_err());
    }

    #[test]
    fn absent_key_looks_random() {
        // An unbound key unbinds to noise: distance to every entry ~ D/2,
        // sigma = 50 at D = 10000, so the minimum over 7 entries stays well
        // above D/2 - 5 sigma.
        let mem = ItemMemory::build(&["x", "y", "z", "w", "a", "b", "c"], 10_000, 6).unwrap();
        let fields = [
            RecordField::new("x", "a"),
            RecordField::new("y", "b"),
            RecordField::new("z", "c"),
        ];
        let h = encode_record(&fields, &mem, TieBreak::One).unwrap();
        let (_, d) = decode_field(&h, "w", &mem).unwrap();
        assert!(d > 5000 - 250, "{d}");
        let (_, d_present) = decode_field(&h, "x", &mem).unwrap();
        assert!(d_present < 3000, "{d_present}");
    }
}
