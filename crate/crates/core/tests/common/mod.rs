#![allow(dead_code)]

use costspace::{EmpiricalModel, ScoredDataset};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

/// Random dataset with `n` in [2, 200], random class balance and class-dependent
/// Beta scores in [0, 1]. With `ties`, scores are rounded to a coarse grid.
pub fn random_dataset(seed: u64, ties: bool) -> ScoredDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=200usize);
    let pi1 = rng.random_range(0.05..0.95);
    let params: Vec<(f64, f64)> = (0..2).map(|_| (rng.random_range(0.5..5.0), rng.random_range(0.5..5.0))).collect();
    let step = [0.05, 0.1, 0.25][rng.random_range(0..3)];
    let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < pi1)).collect();
    if labels.iter().all(|&l| l == labels[0]) {
        labels[0] = 1 - labels[0];
    }
    let scores = labels
        .iter()
        .map(|&l| {
            let (a, b) = params[l as usize];
            let s: f64 = Beta::new(a, b).unwrap().sample(&mut rng);
            if ties {
                (s / step).round() * step
            } else {
                s
            }
        })
        .collect();
    ScoredDataset::new(scores, labels).unwrap()
}

pub fn random_model(seed: u64, ties: bool) -> EmpiricalModel {
    random_dataset(seed, ties).build().unwrap()
}

pub fn dataset_strategy() -> impl Strategy<Value = ScoredDataset> {
    (any::<u64>(), any::<bool>()).prop_map(|(seed, ties)| random_dataset(seed, ties))
}

pub fn model_strategy() -> impl Strategy<Value = EmpiricalModel> {
    dataset_strategy().prop_map(|d| d.build().unwrap())
}

/// `n0` class-0 examples followed by `n1` class-1 examples on evenly spaced scores,
/// then `swaps` adjacent label swaps, each lowering the count of correctly ordered pairs by one.
pub fn ranked_with_swaps(n0: usize, n1: usize, swaps: usize) -> EmpiricalModel {
    let mut labels: Vec<u8> = std::iter::repeat_n(0, n0).chain(std::iter::repeat_n(1, n1)).collect();
    for _ in 0..swaps {
        let i = labels.windows(2).position(|w| w == [0, 1]).expect("no swap left");
        labels.swap(i, i + 1);
    }
    let n = labels.len();
    let scores = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    ScoredDataset::new(scores, labels).unwrap().build().unwrap()
}

/// Balanced sample of `n` examples with scores drawn from two Beta densities.
pub fn balanced_beta_sample(n: usize, seed: u64, class0: (f64, f64), class1: (f64, f64)) -> EmpiricalModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d0 = Beta::new(class0.0, class0.1).unwrap();
    let d1 = Beta::new(class1.0, class1.1).unwrap();
    let mut pairs: Vec<(f64, u8)> = (0..n / 2).map(|_| (d0.sample(&mut rng), 0)).collect();
    pairs.extend((0..n - n / 2).map(|_| (d1.sample(&mut rng), 1)));
    ScoredDataset::from_pairs(&pairs).unwrap().build().unwrap()
}

/// Balanced sample whose scores ignore the labels: crisp scores in {0, 1}, or uniform in [0, 1].
pub fn balanced_random(n: usize, seed: u64, crisp: bool) -> EmpiricalModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n / 2)).collect();
    labels.shuffle(&mut rng);
    let scores = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            if crisp {
                u.round()
            } else {
                u
            }
        })
        .collect();
    ScoredDataset::new(scores, labels).unwrap().build().unwrap()
}

/// Pairwise AUC with half credit for ties, counted directly.
pub fn brute_force_auc(data: &ScoredDataset) -> f64 {
    let (s, l) = (data.scores(), data.labels());
    let mut num = 0.0;
    let mut pairs = 0.0;
    for i in 0..s.len() {
        for j in 0..s.len() {
            if l[i] == 0 && l[j] == 1 {
                pairs += 1.0;
                if s[i] < s[j] {
                    num += 1.0;
                } else if s[i] == s[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / pairs
}

pub fn has_distinct_scores(model: &EmpiricalModel) -> bool {
    model.distinct_scores().len() as u64 == model.n()
}
