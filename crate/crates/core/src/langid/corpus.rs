//! Corpus ingestion from `<root>/<train|test>/<label>/*.txt`.
//!
//! Each training file is one sample. Each line of a test file is one test
//! sentence.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use crate::encoder::{normalize_with, LATIN_ALPHABET};
use crate::error::{HdcError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Train,
    Test,
}

impl Role {
    pub fn dir_name(&self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Test => "test",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub label: String,
    /// Normalized text.
    pub text: String,
    pub source: PathBuf,
    /// 1-based line number for test sentences.
    pub line: Option<usize>,
    /// Character count before normalization.
    pub raw_chars: usize,
}

#[derive(Clone, Debug)]
pub struct IngestOptions {
    pub alphabet: Vec<char>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            alphabet: LATIN_ALPHABET.chars().collect(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    labels: Vec<String>,
    train: Vec<Sample>,
    test: Vec<Sample>,
    warnings: Vec<String>,
}

impl Corpus {
    /// Labels in sorted order; every label has at least one training sample.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn train(&self) -> &[Sample] {
        &self.train
    }

    pub fn test(&self) -> &[Sample] {
        &self.test
    }

    /// Rejected samples and other ingestion notes.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn train_chars(&self) -> usize {
        self.train.iter().map(|s| s.text.chars().count()).sum()
    }

    /// Builds a corpus from in-memory texts, normalizing each one.
    pub fn from_texts(
        train: Vec<(String, String)>,
        test: Vec<(String, String)>,
        options: &IngestOptions,
    ) -> Result<Self> {
        let mut corpus = Corpus::default();
        for (role, items) in [(Role::Train, train), (Role::Test, test)] {
            for (i, (label, raw)) in items.into_iter().enumerate() {
                let source = PathBuf::from(format!("<memory:{}:{i}>", role.dir_name()));
                corpus.push(role, label, &raw, source, None, options);
            }
        }
        corpus.finish()
    }

    fn push(
        &mut self,
        role: Role,
        label: String,
        raw: &str,
        source: PathBuf,
        line: Option<usize>,
        options: &IngestOptions,
    ) {
        let text = normalize_with(raw, &options.alphabet);
        if text.is_empty() {
            let at = match line {
                Some(l) => format!("{}:{l}", source.display()),
                None => source.display().to_string(),
            };
            let msg = format!("rejected empty sample {at} ({label})");
            warn!("{msg}");
            self.warnings.push(msg);
            return;
        }
        let sample = Sample {
            label,
            text,
            source,
            line,
            raw_chars: raw.chars().count(),
        };
        match role {
            Role::Train => self.train.push(sample),
            Role::Test => self.test.push(sample),
        }
    }

    fn finish(mut self) -> Result<Self> {
        let declared: BTreeSet<&str> = self
            .train
            .iter()
            .chain(&self.test)
            .map(|s| s.label.as_str())
            .collect();
        if declared.is_empty() {
            return Err(HdcError::Config("corpus contains no usable samples".into()));
        }
        let trained: BTreeSet<&str> = self.train.iter().map(|s| s.label.as_str()).collect();
        if let Some(missing) = declared.difference(&trained).next() {
            return Err(HdcError::Config(format!(
                "label {missing:?} has no training sample"
            )));
        }
        self.labels = declared.into_iter().map(str::to_owned).collect();
        Ok(self)
    }
}

/// Reads `<root>/train/<label>/*.txt` and, when present, `<root>/test/<label>/*.txt`.
pub fn ingest(root: &Path, options: &IngestOptions) -> Result<Corpus> {
    let train_dir = root.join(Role::Train.dir_name());
    if !train_dir.is_dir() {
        return Err(HdcError::Config(format!(
            "{} has no train/ directory",
            root.display()
        )));
    }
    let mut corpus = Corpus::default();
    for role in [Role::Train, Role::Test] {
        let dir = root.join(role.dir_name());
        if !dir.is_dir() {
            continue;
        }
        for label_dir in sorted_entries(&dir)? {
            if !label_dir.is_dir() {
                continue;
            }
            let label = label_dir
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| {
                    HdcError::Config(format!("non UTF-8 label directory {}", label_dir.display()))
                })?
                .to_owned();
            for file in sorted_entries(&label_dir)? {
                if file.extension().and_then(|e| e.to_str()) != Some("txt") {
                    continue;
                }
                let bytes = fs::read(&file).map_err(|e| HdcError::io(&file, e))?;
                let raw = String::from_utf8_lossy(&bytes);
                match role {
                    Role::Train => corpus.push(role, label.clone(), &raw, file, None, options),
                    Role::Test => {
                        for (i, line) in raw.lines().enumerate() {
                            corpus.push(
                                role,
                                label.clone(),
                                line,
                                file.clone(),
                                Some(i + 1),
                                options,
                            );
                        }
                    }
                }
            }
        }
    }
    corpus.finish()
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = fs::read_dir(dir)
        .map_err(|e| HdcError::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| HdcError::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

/// Writes texts into the directory layout understood by [`ingest`]; test
/// texts become one line each of `<root>/test/<label>/sentences.txt`.
pub fn write_layout(
    root: &Path,
    train: &[(String, String)],
    test: &[(String, String)],
) -> Result<()> {
    for (label, text) in train {
        let dir = root.join("train").join(label);
        fs::create_dir_all(&dir).map_err(|e| HdcError::io(&dir, e))?;
        let path = dir.join("train.txt");
        fs::write(&path, text).map_err(|e| HdcError::io(&path, e))?;
    }
    let mut by_label: std::collections::BTreeMap<&str, String> = Default::default();
    for (label, text) in test {
        let buf = by_label.entry(label).or_default();
        buf.push_str(text);
        buf.push('\n');
    }
    for (label, body) in by_label {
        let dir = root.join("test").join(label);
        fs::create_dir_all(&dir).map_err(|e| HdcError::io(&dir, e))?;
        let path = dir.join("sentences.txt");
        fs::write(&path, body).map_err(|e| HdcError::io(&path, e))?;
    }
    Ok(())
}
