//! Behavioral fault models: stuck-at components, random bit flips and
//! write-endurance wear-out, plus accuracy sweeps under those faults.
//!
//! Only the error patterns are modeled. A stuck component reads a fixed 0 or
//! 1 whatever is written to it; a worn-out cell becomes stuck once its write
//! budget is exhausted.

use rand::seq::index::sample;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assocmem::{AssociativeMemory, DistanceTable, EvalMode};
use crate::error::{HdcError, Result};
use crate::hdvec::{check_same, Hypervector};
use crate::itemmem::ItemMemory;
use crate::rng::RandomSource;

fn check_fraction(fraction: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(HdcError::InvalidArgument(format!(
            "fraction {fraction} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Number of affected components for a fraction: `round(fraction * dim)`.
pub fn fault_count(dim: usize, fraction: f64) -> usize {
    ((fraction * dim as f64).round() as usize).min(dim)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultState {
    Pass,
    Stuck0,
    Stuck1,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaultMask {
    fraction: f64,
    faulty: Hypervector,
    stuck_ones: Hypervector,
}

impl FaultMask {
    pub fn from_states(states: &[FaultState]) -> Result<Self> {
        let faulty: Vec<bool> = states.iter().map(|s| *s != FaultState::Pass).collect();
        let ones: Vec<bool> = states.iter().map(|s| *s == FaultState::Stuck1).collect();
        let faulty = Hypervector::from_bits(&faulty)?;
        let fraction = faulty.count_ones() as f64 / states.len() as f64;
        Ok(Self {
            fraction,
            faulty,
            stuck_ones: Hypervector::from_bits(&ones)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.faulty.dim()
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn faulty_count(&self) -> usize {
        self.faulty.count_ones()
    }

    pub fn state(&self, i: usize) -> FaultState {
        match (self.faulty.get(i), self.stuck_ones.get(i)) {
            (false, _) => FaultState::Pass,
            (true, false) => FaultState::Stuck0,
            (true, true) => FaultState::Stuck1,
        }
    }

    pub fn states(&self) -> Vec<FaultState> {
        (0..self.dim()).map(|i| self.state(i)).collect()
    }

    /// Forces stuck components to their stuck value; idempotent.
    pub fn apply(&self, hv: &Hypervector) -> Result<Hypervector> {
        check_same(&self.faulty, hv)?;
        let words = hv
            .words()
            .iter()
            .zip(self.faulty.words())
            .zip(self.stuck_ones.words())
            .map(|((&w, &f), &s)| (w & !f) | (s & f))
            .collect();
        Hypervector::from_words(hv.dim(), words)
    }
}

/// A random ordering of components with a stuck value per component. The
/// mask for fraction `f` marks the first `round(f * D)` components of the
/// ordering as faulty, so masks of one order are nested as `f` grows.
#[derive(Clone, Debug)]
pub struct FaultOrder {
    order: Vec<usize>,
    stuck_ones: Hypervector,
}

impl FaultOrder {
    pub fn new(dim: usize, rng: &mut RandomSource) -> Result<Self> {
        let order = sample(rng, dim, dim).into_vec();
        let stuck_ones = Hypervector::random(dim, rng)?;
        Ok(Self { order, stuck_ones })
    }

    pub fn mask(&self, fraction: f64) -> Result<FaultMask> {
        check_fraction(fraction)?;
        let dim = self.order.len();
        let mut faulty = Hypervector::zeros(dim)?;
        for &i in &self.order[..fault_count(dim, fraction)] {
            faulty.set(i, true);
        }
        let stuck_ones = Hypervector::from_words(
            dim,
            self.stuck_ones
                .words()
                .iter()
                .zip(faulty.words())
                .map(|(s, f)| s & f)
                .collect(),
        )?;
        Ok(FaultMask {
            fraction,
            faulty,
            stuck_ones,
        })
    }
}

/// Uniformly placed stuck components, each stuck at 0 or 1 with probability 1/2.
pub fn make_mask(dim: usize, fraction: f64, rng: &mut RandomSource) -> Result<FaultMask> {
    check_fraction(fraction)?;
    if dim == 0 {
        return Err(HdcError::InvalidArgument("dimension must be >= 1".into()));
    }
    FaultOrder::new(dim, rng)?.mask(fraction)
}

pub fn apply_mask(hv: &Hypervector, mask: &FaultMask) -> Result<Hypervector> {
    mask.apply(hv)
}

/// Inverts exactly `round(fraction * D)` distinct, uniformly chosen components.
pub fn flip_noise(hv: &Hypervector, fraction: f64, rng: &mut RandomSource) -> Result<Hypervector> {
    check_fraction(fraction)?;
    let mut out = hv.clone();
    for i in sample(rng, hv.dim(), fault_count(hv.dim(), fraction)) {
        out.flip(i);
    }
    Ok(out)
}

/// How per-cell write budgets are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BudgetDistribution {
    Constant {
        cycles: u64,
    },
    /// Lognormal with the given median and log-space standard deviation;
    /// samples are rounded and floored at one cycle.
    LogNormal {
        median: f64,
        sigma: f64,
    },
}

/// Write-endurance model of a `dim`-cell array.
#[derive(Clone, Debug)]
pub struct EnduranceModel {
    budgets: Vec<u64>,
    writes: Vec<u64>,
    stuck_values: Hypervector,
}

impl EnduranceModel {
    pub fn new(dim: usize, budget: BudgetDistribution, seed: u64) -> Result<Self> {
        let mut rng = RandomSource::new(seed);
        let stuck_values = Hypervector::random(dim, &mut rng)?;
        let budgets = match budget {
            BudgetDistribution::Constant { cycles } => {
                if cycles == 0 {
                    return Err(HdcError::InvalidArgument(
                        "write budget must be >= 1".into(),
                    ));
                }
                vec![cycles; dim]
            }
            BudgetDistribution::LogNormal { median, sigma } => {
                if median <= 0.0 || sigma < 0.0 || !median.is_finite() || !sigma.is_finite() {
                    return Err(HdcError::InvalidArgument(format!(
                        "invalid lognormal budget (median {median}, sigma {sigma})"
                    )));
                }
                let dist = LogNormal::new(median.ln(), sigma)
                    .map_err(|e| HdcError::InvalidArgument(e.to_string()))?;
                (0..dim)
                    .map(|_| (dist.sample(&mut rng).round() as u64).max(1))
                    .collect()
            }
        };
        Ok(Self {
            budgets,
            writes: vec![0; dim],
            stuck_values,
        })
    }

    pub fn dim(&self) -> usize {
        self.budgets.len()
    }

    pub fn budget(&self, position: usize) -> u64 {
        self.budgets[position]
    }

    pub fn writes(&self, position: usize) -> u64 {
        self.writes[position]
    }

    pub fn stuck_value(&self, position: usize) -> bool {
        self.stuck_values.get(position)
    }

    pub fn is_failed(&self, position: usize) -> bool {
        self.writes[position] > self.budgets[position]
    }

    pub fn failed_count(&self) -> usize {
        (0..self.dim()).filter(|&i| self.is_failed(i)).count()
    }

    /// Records one write and returns the value the cell now holds.
    pub fn wear_write(&mut self, position: usize, value: bool) -> bool {
        self.writes[position] += 1;
        if self.is_failed(position) {
            self.stuck_values.get(position)
        } else {
            value
        }
    }

    /// Writes every component of `hv` and returns what the array reads back.
    pub fn write_vector(&mut self, hv: &Hypervector) -> Result<Hypervector> {
        if hv.dim() != self.dim() {
            return Err(HdcError::DimensionMismatch {
                expected: self.dim(),
                got: hv.dim(),
            });
        }
        let mut out = hv.clone();
        for i in 0..hv.dim() {
            let stored = self.wear_write(i, hv.get(i));
            out.set(i, stored);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnduranceReport {
    pub mode: EvalMode,
    pub accuracy: f64,
    pub failed_query_cells: usize,
}

/// Classifies `queries` after writing each, in order, into one shared query
/// register with the given endurance model. Class rows are written once into
/// their own arrays drawn from the same distribution.
pub fn endurance_run(
    mem: &AssociativeMemory,
    queries: &[Hypervector],
    truth: &[usize],
    budget: BudgetDistribution,
    seed: u64,
    mode: EvalMode,
) -> Result<EnduranceReport> {
    let dim = mem.dim();
    let worn = mem.map_rows(|i, v| {
        EnduranceModel::new(dim, budget, seed.wrapping_add(1 + i as u64))?.write_vector(v)
    })?;
    let mut register = EnduranceModel::new(dim, budget, seed)?;
    let observed = queries
        .iter()
        .map(|q| register.write_vector(q))
        .collect::<Result<Vec<_>>>()?;
    let table = DistanceTable::compute(&worn, &observed)?;
    Ok(EnduranceReport {
        mode,
        accuracy: table.accuracy(mode, truth),
        failed_query_cells: register.failed_count(),
    })
}

/// Whether class rows and queries see the same stuck components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskSharing {
    /// One mask for the stored rows and the query: one physical array.
    Shared,
    /// Each stored row and the query register get their own mask.
    Independent,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub fractions: Vec<f64>,
    pub trials: usize,
    pub mode: EvalMode,
    pub sharing: MaskSharing,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub trial: usize,
    pub mode: EvalMode,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub fraction: f64,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub mode: EvalMode,
    pub sharing: MaskSharing,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
}

impl SweepResult {
    /// `fraction,trial,mode,accuracy` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,trial,mode,accuracy\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.6}\n",
                r.fraction,
                r.trial,
                r.mode.as_str(),
                r.accuracy
            ));
        }
        out
    }

    pub fn summary_for(&self, fraction: f64) -> Option<&SweepSummary> {
        self.summary.iter().find(|s| s.fraction == fraction)
    }
}

/// Accuracy under stuck-at masks for every (fraction, trial) pair.
///
/// Trial `t` derives its fault orders from stream `t` of `config.seed`, so
/// within a trial the masks for increasing fractions are nested.
pub fn fault_sweep(
    mem: &AssociativeMemory,
    queries: &[Hypervector],
    truth: &[usize],
    config: &SweepConfig,
) -> Result<SweepResult> {
    for &f in &config.fractions {
        check_fraction(f)?;
    }
    if config.trials == 0 {
        return Err(HdcError::InvalidArgument("trials must be >= 1".into()));
    }
    if queries.len() != truth.len() {
        return Err(HdcError::InvalidArgument(format!(
            "{} queries but {} labels",
            queries.len(),
            truth.len()
        )));
    }
    let dim = mem.dim();
    let orders: Vec<Vec<FaultOrder>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let count = match config.sharing {
                MaskSharing::Shared => 1,
                MaskSharing::Independent => mem.len() + 1,
            };
            (0..count)
                .map(|k| {
                    let stream = (t as u64) * (mem.len() as u64 + 1) + k as u64;
                    FaultOrder::new(dim, &mut RandomSource::derive(config.seed, stream))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..config.fractions.len())
        .flat_map(|fi| (0..config.trials).map(move |t| (fi, t)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(fi, t)| {
            let fraction = config.fractions[fi];
            let masks = orders[t]
                .iter()
                .map(|o| o.mask(fraction))
                .collect::<Result<Vec<_>>>()?;
            let query_mask = &masks[0];
            let faulty_mem = mem.map_rows(|i, v| {
                let m = match config.sharing {
                    MaskSharing::Shared => &masks[0],
                    MaskSharing::Independent => &masks[i + 1],
                };
                m.apply(v)
            })?;
            let faulty_queries = queries
                .iter()
                .map(|q| query_mask.apply(q))
                .collect::<Result<Vec<_>>>()?;
            let table = DistanceTable::compute(&faulty_mem, &faulty_queries)?;
            Ok(SweepRow {
                fraction,
                trial: t,
                mode: config.mode,
                accuracy: table.accuracy(config.mode, truth),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = config
        .fractions
        .iter()
        .map(|&fraction| {
            let accs: Vec<f64> = rows
                .iter()
                .filter(|r| r.fraction == fraction)
                .map(|r| r.accuracy)
                .collect();
            let (mean, std) = mean_std(&accs);
            SweepSummary {
                fraction,
                trials: accs.len(),
                mean,
                std,
            }
        })
        .collect();
    Ok(SweepResult {
        mode: config.mode,
        sharing: config.sharing,
        rows,
        summary,
    })
}

/// Item-memory recovery at one flip fraction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub flip_fraction: f64,
    pub trials: usize,
    pub recovered: usize,
    pub rate: f64,
}

/// Recovery rate of clean-up memory under exact-count flip noise: for each
/// fraction, `trials` noisy copies of items (cycling through the memory) are
/// cleaned up and compared with the original symbol. Fraction `k` draws
/// from stream `k` of `seed`.
pub fn noise_curve(
    mem: &ItemMemory,
    flips: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    for &f in flips {
        check_fraction(f)?;
    }
    if trials == 0 || mem.is_empty() {
        return Err(HdcError::InvalidArgument(
            "need at least one trial and one item".into(),
        ));
    }
    flips
        .par_iter()
        .enumerate()
        .map(|(k, &f)| {
            let mut rng = RandomSource::derive(seed, k as u64);
            let mut recovered = 0;
            for t in 0..trials {
                let target = t % mem.len();
                let noisy = flip_noise(&mem.vectors()[target], f, &mut rng)?;
                if mem.cleanup(&noisy)?.0 == mem.symbols()[target] {
                    recovered += 1;
                }
            }
            Ok(CurvePoint {
                flip_fraction: f,
                trials,
                recovered,
                rate: recovered as f64 / trials as f64,
            })
        })
        .collect()
}

/// `flip_fraction,trials,recovered,rate` with a header line.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("flip_fraction,trials,recovered,rate\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{:.6}\n",
            p.flip_fraction, p.trials, p.recovered, p.rate
        ));
    }
    out
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
