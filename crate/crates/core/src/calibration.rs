//! Order-preserving score transforms: isotonic calibration (PAV) and the
//! evenly spaced rank transform.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::EmpiricalModel;
use crate::roc::roc_partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Pav,
    Est,
    Identity,
}

/// A model whose scores went through a monotone map, plus the map itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedModel {
    pub model: EmpiricalModel,
    pub transform: Transform,
    /// `(original distinct score, new score)` in ascending order.
    mapping: Vec<(f64, f64)>,
}

impl CalibratedModel {
    /// New score of an original score seen in the fitted data.
    pub fn apply(&self, score: f64) -> Option<f64> {
        self.mapping
            .binary_search_by(|(s, _)| s.total_cmp(&score))
            .ok()
            .map(|i| self.mapping[i].1)
    }

    pub fn mapping(&self) -> &[(f64, f64)] {
        &self.mapping
    }
}

fn calibrated(model: &EmpiricalModel, new_scores: Vec<f64>, transform: Transform) -> CalibratedModel {
    let mapping = model.distinct_scores().iter().copied().zip(new_scores.iter().copied()).collect();
    CalibratedModel { model: model.map_scores(|i, _| new_scores[i]), transform, mapping }
}

pub fn identity(model: &EmpiricalModel) -> CalibratedModel {
    calibrated(model, model.distinct_scores().to_vec(), Transform::Identity)
}

/// Pool-adjacent-violators fit of the class-1 indicator against score order.
///
/// Tied scores start in one block, and blocks with equal means are pooled, so
/// the blocks coincide with the segments of the ROC convex hull.
pub fn pav(model: &EmpiricalModel) -> CalibratedModel {
    // block: (first group, class-0 count, class-1 count)
    let mut blocks: Vec<(usize, u64, u64)> = Vec::new();
    for (g, c) in model.group_counts().iter().enumerate() {
        let mut cur = (g, c[0], c[1]);
        while let Some(&prev) = blocks.last() {
            // prev mean >= cur mean, compared exactly on counts
            let lhs = prev.2 as u128 * (cur.1 + cur.2) as u128;
            let rhs = cur.2 as u128 * (prev.1 + prev.2) as u128;
            if lhs >= rhs {
                blocks.pop();
                cur = (prev.0, prev.1 + cur.1, prev.2 + cur.2);
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let m = model.group_counts().len();
    let mut new_scores = vec![0.0; m];
    for (i, b) in blocks.iter().enumerate() {
        let end = blocks.get(i + 1).map_or(m, |n| n.0);
        let mean = b.2 as f64 / (b.1 + b.2) as f64;
        new_scores[b.0..end].fill(mean);
    }
    calibrated(model, new_scores, Transform::Pav)
}

/// Rank transform sending the i-th distinct score to `(i - 1) / (m - 1)`.
pub fn est(model: &EmpiricalModel) -> Result<CalibratedModel> {
    let m = model.distinct_scores().len();
    if m < 2 {
        return Err(Error::DegenerateSingleScore);
    }
    let last = (m - 1) as f64;
    let new_scores = (0..m).map(|i| i as f64 / last).collect();
    Ok(calibrated(model, new_scores, Transform::Est))
}

/// `pi0 * mean0 - pi1 * (1 - mean1)`, zero for perfectly calibrated models.
pub fn perfect_calibration_residual(model: &EmpiricalModel) -> Result<f64> {
    model.check_score_range(0.0, 1.0)?;
    let p = model.priors();
    Ok(p.pi0 * model.class_score_mean(0) - p.pi1 * (1.0 - model.class_score_mean(1)))
}

/// True when every distinct score equals the class-1 fraction among its samples.
pub fn is_partitionwise_calibrated(model: &EmpiricalModel, tol: f64) -> bool {
    roc_partition(model).bins.iter().all(|b| (b.mean_score - b.mean_label()).abs() <= tol)
}
