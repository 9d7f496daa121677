//! Synthetic inputs shared by the benchmarks.

use costspace::{EmpiricalModel, ScoredDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Balanced dataset of `n` samples with overlapping class score ranges.
pub fn synthetic_model(n: usize, seed: u64) -> EmpiricalModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = (i % 2) as u8;
        let u: f64 = rng.random();
        scores.push(if y == 0 { u * 0.7 } else { 0.3 + u * 0.7 });
        labels.push(y);
    }
    ScoredDataset::new(scores, labels).and_then(|d| d.build()).expect("both classes present")
}
