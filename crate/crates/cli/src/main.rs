//! `hdc`: train, evaluate and stress-test a hyperdimensional language
//! identifier from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use hdc_core::assocmem::EvalMode;
use hdc_core::encoder::{EncoderConfig, TieMode};
use hdc_core::faultlab::{curve_csv, fault_sweep, noise_curve, MaskSharing, SweepConfig};
use hdc_core::itemmem::ItemMemory;
use hdc_core::langid::{
    baseline_evaluate, baseline_train, encode_test_set, evaluate, ingest, synthetic_texts,
    train_pipeline, write_layout, IngestOptions, Model, SynthConfig,
};
use hdc_core::{HdcError, Result};
use log::{info, warn};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "hdc",
    version,
    about = "Binary hyperdimensional language identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Multiclass,
    Pairwise,
}

impl From<Mode> for EvalMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Multiclass => EvalMode::Multiclass,
            Mode::Pairwise => EvalMode::Pairwise,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    Random,
    One,
}

#[derive(Clone, Copy, ValueEnum)]
enum Masks {
    Shared,
    Independent,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from `<corpus>/train/<label>/*.txt`.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// How bundling ties are broken.
        #[arg(long, value_enum, default_value = "random")]
        ties: Ties,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify one text; prints label and distances as JSON.
    #[command(group(ArgGroup::new("input").required(true).args(["text", "file"])))]
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        text: Option<String>,
        /// Whole file classified as one text.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Evaluate a model on `<corpus>/test/<label>/*.txt`, one sentence per line.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value = "multiclass")]
        mode: Mode,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Train and evaluate the n-gram histogram baseline.
    Baseline {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Accuracy under stuck-at faults; writes CSV plus a JSON summary next to it.
    FaultSweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.78,0.9")]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, value_enum, default_value = "pairwise")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "shared")]
        masks: Masks,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Item-memory recovery rate against flip noise.
    NoiseCurve {
        #[arg(long, default_value_t = 10_000)]
        dim: usize,
        #[arg(long, default_value_t = 27)]
        symbols: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
        flips: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic Markov-chain corpus in the layout `train` and `eval` read.
    SynthCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 21)]
        languages: usize,
        #[arg(long, default_value_t = 100_000)]
        train_chars: usize,
        #[arg(long, default_value_t = 100)]
        test_sentences: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| HdcError::io(path, e))
}

fn emit(report: Option<&Path>, body: &str) -> Result<()> {
    match report {
        Some(p) => {
            write_file(p, body)?;
            info!("wrote {}", p.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn load_corpus(dir: &Path) -> Result<hdc_core::Corpus> {
    let corpus = ingest(dir, &IngestOptions::default())?;
    for w in corpus.warnings() {
        warn!("{w}");
    }
    Ok(corpus)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            corpus,
            dim,
            n,
            seed,
            ties,
            out,
        } => {
            let corpus = load_corpus(&corpus)?;
            let config = EncoderConfig {
                n,
                dim,
                item_seed: seed,
                tie_seed: seed.wrapping_add(1),
                tie_mode: match ties {
                    Ties::Random => TieMode::Random,
                    Ties::One => TieMode::One,
                },
                ..EncoderConfig::default()
            };
            let (model, stats) = train_pipeline(&corpus, &config)?;
            model.save(&out)?;
            info!("wrote {} and its .json sidecar", out.display());
            println!(
                "{}",
                json!({
                    "model": out,
                    "labels": model.classes().labels(),
                    "samples": stats.samples,
                    "symbols": stats.symbols,
                    "ngrams": stats.ngrams,
                })
            );
        }
        Command::Classify { model, text, file } => {
            let model = Model::load(&model)?;
            let text = match (text, file) {
                (Some(t), _) => t,
                (None, Some(f)) => fs::read_to_string(&f).map_err(|e| HdcError::io(&f, e))?,
                (None, None) => unreachable!("clap enforces one input"),
            };
            let r = model.classify_raw(&text)?;
            let distances: Vec<_> = r
                .all_distances
                .iter()
                .map(|(l, d)| json!({ "label": l, "distance": d }))
                .collect();
            print!(
                "{}",
                pretty(&json!({
                    "label": r.label,
                    "distance": r.distance,
                    "dim": model.config().dim,
                    "distances": distances,
                }))
            );
        }
        Command::Eval {
            model,
            corpus,
            mode,
            report,
        } => {
            let model = Model::load(&model)?;
            let corpus = load_corpus(&corpus)?;
            let r = evaluate(&model, &corpus, mode.into())?;
            info!(
                "{} accuracy {:.4} over {} sentences ({} skipped)",
                r.mode.as_str(),
                r.accuracy,
                r.sentences,
                r.skipped
            );
            emit(report.as_deref(), &r.to_json())?;
        }
        Command::Baseline { corpus, n, report } => {
            let corpus = load_corpus(&corpus)?;
            let alphabet = EncoderConfig::default().alphabet;
            let model = baseline_train(&corpus, n, &alphabet)?;
            let r = baseline_evaluate(&model, &corpus)?;
            info!(
                "baseline accuracy {:.4} over {} sentences",
                r.accuracy, r.sentences
            );
            emit(report.as_deref(), &r.to_json())?;
        }
        Command::FaultSweep {
            model,
            corpus,
            fractions,
            trials,
            mode,
            masks,
            seed,
            out,
        } => {
            let model = Model::load(&model)?;
            let corpus = load_corpus(&corpus)?;
            let set = encode_test_set(&model, &corpus)?;
            let result = fault_sweep(
                model.classes(),
                &set.queries,
                &set.truth,
                &SweepConfig {
                    fractions,
                    trials,
                    mode: mode.into(),
                    sharing: match masks {
                        Masks::Shared => MaskSharing::Shared,
                        Masks::Independent => MaskSharing::Independent,
                    },
                    seed,
                },
            )?;
            write_file(&out, &result.to_csv())?;
            let summary_path = out.with_extension("json");
            write_file(
                &summary_path,
                &pretty(&json!({
                    "mode": result.mode,
                    "masks": result.sharing,
                    "seed": seed,
                    "sentences": set.queries.len(),
                    "skipped": set.skipped,
                    "summary": result.summary,
                })),
            )?;
            for s in &result.summary {
                info!(
                    "fraction {}: mean {:.4} std {:.4}",
                    s.fraction, s.mean, s.std
                );
            }
            info!("wrote {} and {}", out.display(), summary_path.display());
        }
        Command::NoiseCurve {
            dim,
            symbols,
            flips,
            trials,
            seed,
            out,
        } => {
            let names: Vec<String> = (0..symbols).map(|i| format!("s{i}")).collect();
            let mem = ItemMemory::build(&names, dim, seed)?;
            let points = noise_curve(&mem, &flips, trials, seed)?;
            write_file(&out, &curve_csv(&points))?;
            info!("wrote {}", out.display());
        }
        Command::SynthCorpus {
            out,
            languages,
            train_chars,
            test_sentences,
            seed,
        } => {
            let config = SynthConfig {
                languages,
                families: SynthConfig::default().families.min(languages),
                train_chars,
                test_sentences,
                seed,
                ..SynthConfig::default()
            };
            let (train, test) = synthetic_texts(&config)?;
            write_layout(&out, &train, &test)?;
            info!("wrote {languages} languages under {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
