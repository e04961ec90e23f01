//! Associative memory: learned class hypervectors searched by minimum
//! Hamming distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HdcError, Result};
use crate::hdvec::{Accumulator, Hypervector, TieBreak};

#[derive(Clone, Debug)]
pub struct AssociativeMemory {
    dim: usize,
    labels: Vec<String>,
    vectors: Vec<Hypervector>,
    // Present only for labels trained more than once and not yet finalized.
    pending: Vec<Option<Accumulator>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationResult {
    pub label: String,
    pub distance: usize,
    pub all_distances: Vec<(String, usize)>,
}

impl AssociativeMemory {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(HdcError::InvalidArgument("dimension must be >= 1".into()));
        }
        Ok(Self {
            dim,
            labels: Vec::new(),
            vectors: Vec::new(),
            pending: Vec::new(),
        })
    }

    /// Rebuilds a trained memory from stored rows.
    pub fn from_parts(dim: usize, labels: Vec<String>, vectors: Vec<Hypervector>) -> Result<Self> {
        if labels.len() != vectors.len() {
            return Err(HdcError::InvalidArgument(format!(
                "{} labels but {} vectors",
                labels.len(),
                vectors.len()
            )));
        }
        let mut mem = Self::new(dim)?;
        for (l, v) in labels.into_iter().zip(vectors) {
            if mem.index_of(&l).is_some() {
                return Err(HdcError::InvalidArgument(format!("duplicate label {l:?}")));
            }
            mem.train(&l, v)?;
        }
        Ok(mem)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &[Hypervector] {
        &self.vectors
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Stores `text_hv` for a new label; for a known label, adds it to that
    /// label's counters. Call [`AssociativeMemory::finalize`] after repeated
    /// training so the stored row is re-thresholded.
    pub fn train(&mut self, label: &str, text_hv: Hypervector) -> Result<()> {
        if text_hv.dim() != self.dim {
            return Err(HdcError::DimensionMismatch {
                expected: self.dim,
                got: text_hv.dim(),
            });
        }
        match self.index_of(label) {
            None => {
                self.labels.push(label.to_owned());
                self.vectors.push(text_hv);
                self.pending.push(None);
            }
            Some(i) => {
                let acc = match &mut self.pending[i] {
                    Some(acc) => acc,
                    slot => {
                        let mut acc = Accumulator::new(self.dim)?;
                        acc.add(&self.vectors[i])?;
                        slot.insert(acc)
                    }
                };
                acc.add(&text_hv)?;
            }
        }
        Ok(())
    }

    pub fn is_finalized(&self) -> bool {
        self.pending.iter().all(Option::is_none)
    }

    /// Re-thresholds every label that was trained more than once.
    pub fn finalize(&mut self, ties: TieBreak<'_>) -> Result<()> {
        let mut ties = ties;
        for (i, slot) in self.pending.iter_mut().enumerate() {
            if let Some(acc) = slot.take() {
                let t = match &mut ties {
                    TieBreak::One => TieBreak::One,
                    TieBreak::Random(rng) => TieBreak::Random(rng),
                };
                self.vectors[i] = acc.threshold(t)?;
            }
        }
        Ok(())
    }

    /// Hamming distance from `query` to every stored row, in stored order.
    pub fn distances(&self, query: &Hypervector) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(HdcError::NotTrained);
        }
        self.vectors.iter().map(|v| v.hamming(query)).collect()
    }

    /// Nearest stored class; ties go to the lowest stored index.
    pub fn classify(&self, query: &Hypervector) -> Result<ClassificationResult> {
        let ds = self.distances(query)?;
        let best = argmin(&ds);
        Ok(ClassificationResult {
            label: self.labels[best].clone(),
            distance: ds[best],
            all_distances: self.labels.iter().cloned().zip(ds).collect(),
        })
    }

    /// The closer of two named classes; a tie goes to whichever is stored first.
    pub fn pairwise_classify(
        &self,
        query: &Hypervector,
        label_a: &str,
        label_b: &str,
    ) -> Result<&str> {
        let ia = self
            .index_of(label_a)
            .ok_or_else(|| HdcError::NotFound(format!("label {label_a:?}")))?;
        let ib = self
            .index_of(label_b)
            .ok_or_else(|| HdcError::NotFound(format!("label {label_b:?}")))?;
        let da = self.vectors[ia].hamming(query)?;
        let db = self.vectors[ib].hamming(query)?;
        let pick = if da < db || (da == db && ia <= ib) {
            ia
        } else {
            ib
        };
        Ok(&self.labels[pick])
    }

    /// Copy of the memory with every row passed through `f`.
    pub fn map_rows<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &Hypervector) -> Result<Hypervector>,
    {
        let vectors = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| f(i, v))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(self.dim, self.labels.clone(), vectors)
    }
}

fn argmin(ds: &[usize]) -> usize {
    let mut best = 0;
    for (i, &d) in ds.iter().enumerate() {
        if d < ds[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Nearest class among all stored classes.
    Multiclass,
    /// Mean accuracy over every two-class sub-problem.
    Pairwise,
}

impl EvalMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvalMode::Multiclass => "multiclass",
            EvalMode::Pairwise => "pairwise",
        }
    }
}

impl std::str::FromStr for EvalMode {
    type Err = HdcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiclass" => Ok(EvalMode::Multiclass),
            "pairwise" => Ok(EvalMode::Pairwise),
            other => Err(HdcError::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

/// Query-by-class distance matrix, the common input of every accuracy metric.
#[derive(Clone, Debug)]
pub struct DistanceTable {
    classes: usize,
    rows: Vec<Vec<usize>>,
}

impl DistanceTable {
    pub fn compute(mem: &AssociativeMemory, queries: &[Hypervector]) -> Result<Self> {
        if mem.is_empty() {
            return Err(HdcError::NotTrained);
        }
        let rows = queries
            .par_iter()
            .map(|q| mem.distances(q))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            classes: mem.len(),
            rows,
        })
    }

    pub fn from_rows(classes: usize, rows: Vec<Vec<usize>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == classes));
        Self { classes, rows }
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Multiclass prediction (stored class index) for each query.
    pub fn predictions(&self) -> Vec<usize> {
        self.rows.iter().map(|r| argmin(r)).collect()
    }

    pub fn multiclass_accuracy(&self, truth: &[usize]) -> f64 {
        let preds = self.predictions();
        let correct = preds.iter().zip(truth).filter(|(p, t)| p == t).count();
        ratio(correct, truth.len())
    }

    /// Accuracy for every class pair `(a, b)`, `a < b`, over the queries whose
    /// true class is `a` or `b`. Pairs without such queries are omitted.
    pub fn pairwise_scores(&self, truth: &[usize]) -> Vec<PairScore> {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); self.classes];
        for (q, &t) in truth.iter().enumerate() {
            by_class[t].push(q);
        }
        let mut out = Vec::new();
        for a in 0..self.classes {
            for b in a + 1..self.classes {
                let total = by_class[a].len() + by_class[b].len();
                if total == 0 {
                    continue;
                }
                let mut correct = 0;
                for cls in [a, b] {
                    for &q in &by_class[cls] {
                        let r = &self.rows[q];
                        let pick = if r[a] <= r[b] { a } else { b };
                        if pick == cls {
                            correct += 1;
                        }
                    }
                }
                out.push(PairScore {
                    a,
                    b,
                    total,
                    correct,
                });
            }
        }
        out
    }

    pub fn accuracy(&self, mode: EvalMode, truth: &[usize]) -> f64 {
        match mode {
            EvalMode::Multiclass => self.multiclass_accuracy(truth),
            EvalMode::Pairwise => self.pairwise_accuracy(truth),
        }
    }

    /// Mean of the per-pair accuracies.
    pub fn pairwise_accuracy(&self, truth: &[usize]) -> f64 {
        let scores = self.pairwise_scores(truth);
        if scores.is_empty() {
            return 0.0;
        }
        scores.iter().map(PairScore::accuracy).sum::<f64>() / scores.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairScore {
    pub a: usize,
    pub b: usize,
    pub total: usize,
    pub correct: usize,
}

impl PairScore {
    pub fn accuracy(&self) -> f64 {
        ratio(self.correct, self.total)
    }
}

pub(crate) fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faultlab::flip_noise;
    use crate::rng::RandomSource;

    fn random_memory(classes: usize, dim: usize, seed: u64) -> AssociativeMemory {
        let mut rng = RandomSource::new(seed);
        let mut mem = AssociativeMemory::new(dim).unwrap();
        for c in 0..classes {
            mem.train(
                &format!("L{c}"),
                Hypervector::random(dim, &mut rng).unwrap(),
            )
            .unwrap();
        }
        mem
    }

    #[test]
    fn classify_stored_vector() {
        let mem = random_memory(21, 2000, 1);
        assert_eq!(mem.len(), 21);
        let r = mem.classify(&mem.vectors()[7]).unwrap();
        assert_eq!(r.label, "L7");
        assert_eq!(r.distance, 0);
        assert_eq!(r.all_distances.len(), 21);
        assert_eq!(
            r.distance,
            r.all_distances.iter().map(|x| x.1).min().unwrap()
        );
        for (i, (l, d)) in r.all_distances.iter().enumerate() {
            assert_eq!(l, &mem.labels()[i]);
            assert_eq!(*d, mem.vectors()[i].hamming(&mem.vectors()[7]).unwrap());
        }
    }

    #[test]
    fn empty_memory_not_trained() {
        let mem = AssociativeMemory::new(64).unwrap();
        assert!(matches!(
            mem.classify(&Hypervector::zeros(64).unwrap()),
            Err(HdcError::NotTrained)
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let mut mem = AssociativeMemory::new(64).unwrap();
        assert!(mem.train("a", Hypervector::zeros(65).unwrap()).is_err());
        mem.train("a", Hypervector::zeros(64).unwrap()).unwrap();
        assert!(mem.classify(&Hypervector::zeros(65).unwrap()).is_err());
    }

    #[test]
    fn identical_rows_tie_to_first() {
        let v = Hypervector::random(128, &mut RandomSource::new(2)).unwrap();
        let mem = AssociativeMemory::from_parts(
            128,
            vec!["x".into(), "y".into()],
            vec![v.clone(), v.clone()],
        )
        .unwrap();
        assert_eq!(mem.classify(&v).unwrap().label, "x");
        assert_eq!(mem.pairwise_classify(&v, "y", "x").unwrap(), "x");
        assert_eq!(mem.pairwise_classify(&v, "x", "y").unwrap(), "x");
    }

    #[test]
    fn retraining_identical_vector_keeps_row() {
        let v = Hypervector::random(300, &mut RandomSource::new(3)).unwrap();
        let mut mem = AssociativeMemory::new(300).unwrap();
        mem.train("a", v.clone()).unwrap();
        mem.train("a", v.clone()).unwrap();
        assert!(!mem.is_finalized());
        mem.finalize(TieBreak::One).unwrap();
        assert!(mem.is_finalized());
        assert_eq!(mem.vectors()[0], v);
        assert_eq!(mem.len(), 1);
    }

    #[test]
    fn multi_example_training_is_majority() {
        let mut rng = RandomSource::new(4);
        let vs: Vec<_> = (0..3)
            .map(|_| Hypervector::random(200, &mut rng).unwrap())
            .collect();
        let mut mem = AssociativeMemory::new(200).unwrap();
        for v in &vs {
            mem.train("a", v.clone()).unwrap();
        }
        mem.finalize(TieBreak::One).unwrap();
        assert_eq!(
            mem.vectors()[0],
            crate::hdvec::bundle(&vs, TieBreak::One).unwrap()
        );
    }

    #[test]
    fn pairwise_unknown_label() {
        let mem = random_memory(3, 64, 5);
        let q = mem.vectors()[0].clone();
        assert!(matches!(
            mem.pairwise_classify(&q, "L0", "nope"),
            Err(HdcError::NotFound(_))
        ));
        assert_eq!(mem.pairwise_classify(&q, "L0", "L2").unwrap(), "L0");
    }

    #[test]
    fn restriction_agrees_with_full_winner() {
        let mem = random_memory(6, 500, 6);
        let mut rng = RandomSource::new(7);
        for _ in 0..100 {
            let q = Hypervector::random(500, &mut rng).unwrap();
            let full = mem.classify(&q).unwrap().label;
            for other in mem.labels() {
                if *other != full {
                    assert_eq!(mem.pairwise_classify(&q, &full, other).unwrap(), full);
                    assert_eq!(mem.pairwise_classify(&q, other, &full).unwrap(), full);
                }
            }
        }
    }

    #[test]
    fn noisy_query_recovers_class() {
        let mem = random_memory(21, 10_000, 8);
        let mut rng = RandomSource::new(9);
        for t in 0..200 {
            let c = t % 21;
            let q = flip_noise(&mem.vectors()[c], 0.1, &mut rng).unwrap();
            assert_eq!(mem.classify(&q).unwrap().label, mem.labels()[c]);
        }
    }

    #[test]
    fn storage_order_invariance() {
        let mem = random_memory(8, 1000, 10);
        let mut rev_labels = mem.labels().to_vec();
        let mut rev_vectors = mem.vectors().to_vec();
        rev_labels.reverse();
        rev_vectors.reverse();
        let rev = AssociativeMemory::from_parts(1000, rev_labels, rev_vectors).unwrap();
        let mut rng = RandomSource::new(11);
        for _ in 0..100 {
            let q = Hypervector::random(1000, &mut rng).unwrap();
            let r = mem.classify(&q).unwrap();
            let ties = r.all_distances.iter().filter(|x| x.1 == r.distance).count();
            if ties == 1 {
                assert_eq!(rev.classify(&q).unwrap().label, r.label);
            }
        }
    }

    #[test]
    fn binding_invariance() {
        let mem = random_memory(8, 1000, 12);
        let mut rng = RandomSource::new(13);
        let key = Hypervector::random(1000, &mut rng).unwrap();
        let bound = mem.map_rows(|_, v| v.bind(&key)).unwrap();
        for _ in 0..50 {
            let q = Hypervector::random(1000, &mut rng).unwrap();
            let a = mem.classify(&q).unwrap();
            let b = bound.classify(&q.bind(&key).unwrap()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn distance_table_scores() {
        // Two classes, three queries with hand-set distances.
        let table = DistanceTable::from_rows(3, vec![vec![1, 5, 0], vec![4, 2, 9], vec![3, 3, 1]]);
        assert_eq!(table.predictions(), vec![2, 1, 2]);
        let truth = [0, 1, 0];
        assert!((table.multiclass_accuracy(&truth) - 1.0 / 3.0).abs() < 1e-12);
        let scores = table.pairwise_scores(&truth);
        // pair (0,1): q0 -> 0 ok, q1 -> 1 ok, q2 -> 0 (tie, lower) ok
        assert_eq!(
            scores[0],
            PairScore {
                a: 0,
                b: 1,
                total: 3,
                correct: 3
            }
        );
        // pair (0,2): q0 -> 2 wrong, q2 -> 2 wrong
        assert_eq!(
            scores[1],
            PairScore {
                a: 0,
                b: 2,
                total: 2,
                correct: 0
            }
        );
        // pair (1,2): q1 -> 1 ok
        assert_eq!(
            scores[2],
            PairScore {
                a: 1,
                b: 2,
                total: 1,
                correct: 1
            }
        );
        assert!((table.pairwise_accuracy(&truth) - 2.0 / 3.0).abs() < 1e-12);
    }
}
