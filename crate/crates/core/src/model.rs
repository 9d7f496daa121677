//! Scored test sets and their empirical score distributions.
//!
//! Class 0 is the positive class and scores grow with the estimated probability
//! of class 1. An example is predicted class 0 when its score is `<= t`, so every
//! cumulative function here is right-continuous.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Loss scale factor shared by cost and skew losses.
pub const LOSS_SCALE: f64 = 2.0;

/// Offset used to place the all-class-1 threshold below the smallest score.
pub const BELOW_MIN_OFFSET: f64 = 1.0;

/// Raw scored samples in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDataset {
    scores: Vec<f64>,
    labels: Vec<u8>,
}

impl ScoredDataset {
    pub fn new(scores: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if let Some(row) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteScore { row });
        }
        if let Some(row) = labels.iter().position(|&y| y > 1) {
            return Err(Error::InvalidLabel { row, value: labels[row].to_string() });
        }
        Ok(Self { scores, labels })
    }

    pub fn from_pairs(pairs: &[(f64, u8)]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Same labels, new scores.
    pub fn with_scores(&self, scores: Vec<f64>) -> Result<Self> {
        Self::new(scores, self.labels.clone())
    }

    /// Same scores, labels 0 and 1 exchanged.
    pub fn swapped_labels(&self) -> Self {
        Self { scores: self.scores.clone(), labels: self.labels.iter().map(|y| 1 - y).collect() }
    }

    pub fn build(&self) -> Result<EmpiricalModel> {
        EmpiricalModel::from_dataset(self)
    }
}

/// Which parametrisation of the operating condition is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionKind {
    /// Cost proportion `c`, priors taken from the data.
    Cost,
    /// Skew `z`, equivalent to cost with balanced priors.
    Skew,
}

impl ConditionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionKind::Cost => "cost",
            ConditionKind::Skew => "skew",
        }
    }
}

impl std::str::FromStr for ConditionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cost" => Ok(ConditionKind::Cost),
            "skew" => Ok(ConditionKind::Skew),
            other => Err(Error::InvalidParameter(format!("condition must be cost or skew, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingCondition {
    pub kind: ConditionKind,
    pub value: f64,
}

impl OperatingCondition {
    pub fn new(kind: ConditionKind, value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidCondition(value));
        }
        Ok(Self { kind, value })
    }

    pub fn cost(value: f64) -> Result<Self> {
        Self::new(ConditionKind::Cost, value)
    }

    pub fn skew(value: f64) -> Result<Self> {
        Self::new(ConditionKind::Skew, value)
    }
}

/// Class priors used when evaluating a loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    pub pi0: f64,
    pub pi1: f64,
}

impl Priors {
    pub const BALANCED: Priors = Priors { pi0: 0.5, pi1: 0.5 };
}

/// Sorted, tie-compressed view of a scored dataset.
///
/// Cut `k` (for `k` in `0..=m`, `m` distinct scores) predicts class 0 for the
/// `k` lowest distinct scores. Cut 0 predicts everything as class 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel {
    values: Vec<f64>,
    counts: Vec<[u64; 2]>,
    cum: Vec<[u64; 2]>,
    n: [u64; 2],
    score_sum: [f64; 2],
    min_score: f64,
    max_score: f64,
}

impl EmpiricalModel {
    pub fn from_dataset(data: &ScoredDataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut pairs: Vec<(f64, u8)> = data.scores.iter().copied().zip(data.labels.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut values = Vec::new();
        let mut counts: Vec<[u64; 2]> = Vec::new();
        let mut n = [0u64; 2];
        let mut score_sum = [0.0f64; 2];
        for &(s, y) in &pairs {
            // -0.0 and 0.0 are the same score.
            let s = if s == 0.0 { 0.0 } else { s };
            if values.last() != Some(&s) {
                values.push(s);
                counts.push([0, 0]);
            }
            counts.last_mut().unwrap()[y as usize] += 1;
            n[y as usize] += 1;
            score_sum[y as usize] += s;
        }
        if n[0] == 0 || n[1] == 0 {
            return Err(Error::SingleClassDataset { present: if n[0] == 0 { 1 } else { 0 } });
        }
        let mut cum = Vec::with_capacity(values.len() + 1);
        let mut acc = [0u64; 2];
        cum.push(acc);
        for c in &counts {
            acc[0] += c[0];
            acc[1] += c[1];
            cum.push(acc);
        }
        let min_score = values[0];
        let max_score = *values.last().unwrap();
        Ok(Self { values, counts, cum, n, score_sum, min_score, max_score })
    }

    /// Sample size.
    pub fn n(&self) -> u64 {
        self.n[0] + self.n[1]
    }

    pub fn class_count(&self, k: usize) -> u64 {
        self.n[k]
    }

    pub fn priors(&self) -> Priors {
        let n = self.n() as f64;
        Priors { pi0: self.n[0] as f64 / n, pi1: self.n[1] as f64 / n }
    }

    pub fn priors_for(&self, kind: ConditionKind) -> Priors {
        match kind {
            ConditionKind::Cost => self.priors(),
            ConditionKind::Skew => Priors::BALANCED,
        }
    }

    pub fn pi0(&self) -> f64 {
        self.priors().pi0
    }

    pub fn pi1(&self) -> f64 {
        self.priors().pi1
    }

    /// Distinct scores in ascending order.
    pub fn distinct_scores(&self) -> &[f64] {
        &self.values
    }

    /// Per distinct score, the number of class-0 and class-1 samples.
    pub fn group_counts(&self) -> &[[u64; 2]] {
        &self.counts
    }

    /// Number of cuts, `m + 1`.
    pub fn cut_count(&self) -> usize {
        self.values.len() + 1
    }

    /// Cumulative class counts at cut `k`.
    pub fn cut_counts(&self, k: usize) -> [u64; 2] {
        self.cum[k]
    }

    /// `(F0, F1)` at cut `k`.
    pub fn cut_cdf(&self, k: usize) -> (f64, f64) {
        let c = self.cum[k];
        (c[0] as f64 / self.n[0] as f64, c[1] as f64 / self.n[1] as f64)
    }

    /// Rate at cut `k` under the given priors.
    pub fn cut_rate(&self, k: usize, priors: Priors) -> f64 {
        if k + 1 == self.cut_count() {
            return 1.0;
        }
        let (f0, f1) = self.cut_cdf(k);
        priors.pi0 * f0 + priors.pi1 * f1
    }

    /// Representative threshold of cut `k`: below the minimum for cut 0, the
    /// maximum score for the last cut, and the midpoint of the plateau otherwise.
    pub fn cut_threshold(&self, k: usize) -> f64 {
        let m = self.values.len();
        if k == 0 {
            self.min_score - BELOW_MIN_OFFSET
        } else if k == m {
            self.max_score
        } else {
            0.5 * (self.values[k - 1] + self.values[k])
        }
    }

    /// Cut index realised by threshold `t`: the number of distinct scores `<= t`.
    pub fn cut_of(&self, t: f64) -> usize {
        self.values.partition_point(|&v| v <= t)
    }

    pub fn cdf(&self, k: usize, t: f64) -> f64 {
        let c = self.cum[self.cut_of(t)][k];
        c as f64 / self.n[k] as f64
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.rate_with(t, self.priors())
    }

    pub fn rate_with(&self, t: f64, priors: Priors) -> f64 {
        self.cut_rate(self.cut_of(t), priors)
    }

    /// Threshold whose rate is closest to `r` from above, with the achieved rate.
    ///
    /// Exactly achievable rates return the plateau midpoint; otherwise the
    /// smallest score whose rate reaches `r`.
    pub fn inverse_rate(&self, r: f64) -> Result<(f64, f64)> {
        self.inverse_rate_with(r, self.priors())
    }

    pub fn inverse_rate_with(&self, r: f64, priors: Priors) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidRate(r));
        }
        let k = self.inverse_rate_cut(r, priors);
        let achieved = self.cut_rate(k, priors);
        if achieved == r {
            Ok((self.cut_threshold(k), achieved))
        } else {
            Ok((self.values[k - 1], achieved))
        }
    }

    /// Smallest cut whose rate is at least `r`.
    pub(crate) fn inverse_rate_cut(&self, r: f64, priors: Priors) -> usize {
        let m = self.values.len();
        let (mut lo, mut hi) = (0usize, m);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.cut_rate(mid, priors) >= r {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    pub fn class_score_mean(&self, k: usize) -> f64 {
        self.score_sum[k] / self.n[k] as f64
    }

    pub fn min_score(&self) -> f64 {
        self.min_score
    }

    pub fn max_score(&self) -> f64 {
        self.max_score
    }

    /// Fails unless every score lies in `[lo, hi]`.
    pub fn check_score_range(&self, lo: f64, hi: f64) -> Result<()> {
        for &found in [self.min_score, self.max_score].iter() {
            if found < lo || found > hi {
                return Err(Error::ScoresOutOfUnitRange { lo, hi, found });
            }
        }
        Ok(())
    }

    /// Rebuild from per-group data, mapping each distinct score through `f`.
    ///
    /// `f` must be non-decreasing; groups mapped to the same value merge.
    pub fn map_scores<F: Fn(usize, f64) -> f64>(&self, f: F) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        let mut counts: Vec<[u64; 2]> = Vec::with_capacity(self.values.len());
        let mut score_sum = [0.0f64; 2];
        for (i, (&v, c)) in self.values.iter().zip(&self.counts).enumerate() {
            let s = f(i, v);
            debug_assert!(values.last().is_none_or(|&p: &f64| p <= s));
            if values.last() != Some(&s) {
                values.push(s);
                counts.push([0, 0]);
            }
            let last = counts.last_mut().unwrap();
            last[0] += c[0];
            last[1] += c[1];
            score_sum[0] += s * c[0] as f64;
            score_sum[1] += s * c[1] as f64;
        }
        let mut cum = Vec::with_capacity(values.len() + 1);
        let mut acc = [0u64; 2];
        cum.push(acc);
        for c in &counts {
            acc[0] += c[0];
            acc[1] += c[1];
            cum.push(acc);
        }
        let min_score = values[0];
        let max_score = *values.last().unwrap();
        Self { values, counts, cum, n: self.n, score_sum, min_score, max_score }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d4() -> EmpiricalModel {
        ScoredDataset::from_pairs(&[(0.2, 0), (0.4, 0), (0.6, 1), (0.8, 1)]).unwrap().build().unwrap()
    }

    #[test]
    fn build_priors_and_means() {
        let m = d4();
        assert_eq!(m.priors(), Priors { pi0: 0.5, pi1: 0.5 });
        assert!((m.class_score_mean(0) - 0.3).abs() < 1e-15);
        assert!((m.class_score_mean(1) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn build_errors() {
        let single = ScoredDataset::from_pairs(&[(0.5, 0)]).unwrap();
        assert_eq!(single.build(), Err(Error::SingleClassDataset { present: 0 }));
        let empty = ScoredDataset::new(vec![], vec![]).unwrap();
        assert_eq!(empty.build(), Err(Error::EmptyDataset));
        assert_eq!(ScoredDataset::new(vec![f64::NAN], vec![0]), Err(Error::NonFiniteScore { row: 0 }));
        assert!(matches!(ScoredDataset::new(vec![0.1], vec![2]), Err(Error::InvalidLabel { .. })));
    }

    #[test]
    fn tied_pair_steps_at_the_score() {
        let m = ScoredDataset::from_pairs(&[(0.5, 0), (0.5, 1)]).unwrap().build().unwrap();
        assert_eq!(m.cdf(0, 0.5), 1.0);
        assert_eq!(m.cdf(1, 0.5), 1.0);
        assert_eq!(m.rate(0.5), 1.0);
        assert_eq!(m.rate(0.49), 0.0);
    }

    #[test]
    fn cdf_and_rate() {
        let m = d4();
        assert_eq!(m.cdf(0, 0.3), 0.5);
        assert_eq!(m.cdf(0, f64::INFINITY), 1.0);
        assert_eq!(m.cdf(1, 0.0), 0.0);
        assert_eq!(m.rate(0.5), 0.5);
        assert_eq!(m.rate(f64::INFINITY), 1.0);
        assert_eq!(m.rate(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn inverse_rate_plateaus_and_steps() {
        let m = d4();
        assert_eq!(m.inverse_rate(0.5).unwrap(), (0.5, 0.5));
        assert_eq!(m.inverse_rate(0.0).unwrap(), (0.2 - BELOW_MIN_OFFSET, 0.0));
        assert_eq!(m.inverse_rate(1.0).unwrap(), (0.8, 1.0));
        assert_eq!(m.inverse_rate(0.6).unwrap(), (0.6, 0.75));
        assert_eq!(m.inverse_rate(1.2), Err(Error::InvalidRate(1.2)));
        assert_eq!(m.inverse_rate(-0.1), Err(Error::InvalidRate(-0.1)));
    }

    #[test]
    fn single_score_class_mean() {
        let m = ScoredDataset::from_pairs(&[(0.5, 0), (0.1, 1), (0.9, 1)]).unwrap().build().unwrap();
        assert_eq!(m.class_score_mean(0), 0.5);
    }

    #[test]
    fn map_scores_merges_groups() {
        let m = d4().map_scores(|i, _| if i < 2 { 0.0 } else { 1.0 });
        assert_eq!(m.distinct_scores(), &[0.0, 1.0]);
        assert_eq!(m.group_counts(), &[[2, 0], [0, 2]]);
    }
}
