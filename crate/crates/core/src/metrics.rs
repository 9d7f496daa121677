//! Error rates, absolute and squared error, and the area under the ROC curve.

use serde::Serialize;

use crate::error::Result;
use crate::model::{EmpiricalModel, Priors};

/// Accuracy at threshold `t`.
pub fn accuracy(model: &EmpiricalModel, t: f64) -> f64 {
    1.0 - error_rate(model, t)
}

pub fn error_rate(model: &EmpiricalModel, t: f64) -> f64 {
    error_rate_with(model, t, model.priors())
}

pub fn macro_error_rate(model: &EmpiricalModel, t: f64) -> f64 {
    error_rate_with(model, t, Priors::BALANCED)
}

pub fn error_rate_with(model: &EmpiricalModel, t: f64, priors: Priors) -> f64 {
    let k = model.cut_of(t);
    cut_error_rate(model, k, priors)
}

pub(crate) fn cut_error_rate(model: &EmpiricalModel, k: usize, priors: Priors) -> f64 {
    let (f0, f1) = model.cut_cdf(k);
    priors.pi0 * (1.0 - f0) + priors.pi1 * f1
}

/// Mean absolute error of class `k`: mean distance from the class label.
pub fn mae_class(model: &EmpiricalModel, k: usize) -> Result<f64> {
    model.check_score_range(0.0, 1.0)?;
    let m = model.class_score_mean(k);
    Ok(if k == 0 { m } else { 1.0 - m })
}

pub fn mae(model: &EmpiricalModel) -> Result<f64> {
    mae_with(model, model.priors())
}

pub fn mmae(model: &EmpiricalModel) -> Result<f64> {
    mae_with(model, Priors::BALANCED)
}

pub fn mae_with(model: &EmpiricalModel, priors: Priors) -> Result<f64> {
    Ok(priors.pi0 * mae_class(model, 0)? + priors.pi1 * mae_class(model, 1)?)
}

/// Mean squared distance of class-`k` scores from the class label.
pub fn brier_class(model: &EmpiricalModel, k: usize) -> Result<f64> {
    model.check_score_range(0.0, 1.0)?;
    let mut sum = 0.0;
    for (&s, c) in model.distinct_scores().iter().zip(model.group_counts()) {
        let r = if k == 0 { s } else { 1.0 - s };
        sum += c[k] as f64 * r * r;
    }
    Ok(sum / model.class_count(k) as f64)
}

pub fn brier(model: &EmpiricalModel) -> Result<f64> {
    brier_with(model, model.priors())
}

pub fn mbrier(model: &EmpiricalModel) -> Result<f64> {
    brier_with(model, Priors::BALANCED)
}

pub fn brier_with(model: &EmpiricalModel, priors: Priors) -> Result<f64> {
    Ok(priors.pi0 * brier_class(model, 0)? + priors.pi1 * brier_class(model, 1)?)
}

/// Twice the number of ordered class-0/class-1 pairs, counting ties once.
pub(crate) fn auc_numerator(model: &EmpiricalModel) -> u128 {
    let n1 = model.class_count(1) as u128;
    let mut above1 = n1;
    let mut num = 0u128;
    for c in model.group_counts() {
        let (a, b) = (c[0] as u128, c[1] as u128);
        above1 -= b;
        num += a * (2 * above1 + b);
    }
    num
}

/// Probability that a class-0 score is below a class-1 score, ties counting half.
pub fn auc(model: &EmpiricalModel) -> f64 {
    let denom = 2 * model.class_count(0) as u128 * model.class_count(1) as u128;
    auc_numerator(model) as f64 / denom as f64
}

/// All scalar metrics of a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macc: Option<f64>,
    pub mae: f64,
    pub mmae: f64,
    pub mae0: f64,
    pub mae1: f64,
    pub bs: f64,
    pub mbs: f64,
    pub bs0: f64,
    pub bs1: f64,
    pub auc: f64,
}

impl MetricReport {
    /// Accuracies are filled in only when a threshold is given.
    pub fn compute(model: &EmpiricalModel, threshold: Option<f64>) -> Result<Self> {
        let mae0 = mae_class(model, 0)?;
        let mae1 = mae_class(model, 1)?;
        let bs0 = brier_class(model, 0)?;
        let bs1 = brier_class(model, 1)?;
        let p = model.priors();
        Ok(Self {
            threshold,
            acc: threshold.map(|t| accuracy(model, t)),
            macc: threshold.map(|t| 1.0 - macro_error_rate(model, t)),
            mae: p.pi0 * mae0 + p.pi1 * mae1,
            mmae: 0.5 * (mae0 + mae1),
            mae0,
            mae1,
            bs: p.pi0 * bs0 + p.pi1 * bs1,
            mbs: 0.5 * (bs0 + bs1),
            bs0,
            bs1,
            auc: auc(model),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScoredDataset;

    fn build(pairs: &[(f64, u8)]) -> EmpiricalModel {
        ScoredDataset::from_pairs(pairs).unwrap().build().unwrap()
    }

    fn d4() -> EmpiricalModel {
        build(&[(0.2, 0), (0.4, 0), (0.6, 1), (0.8, 1)])
    }

    #[test]
    fn error_rates() {
        let m = d4();
        assert_eq!(error_rate(&m, 0.5), 0.0);
        assert_eq!(error_rate(&m, 0.1), 0.5);
        assert_eq!(error_rate(&m, f64::INFINITY), m.pi1());
        let skewed = build(&[(0.1, 0), (0.9, 1), (0.95, 1)]);
        assert_eq!(macro_error_rate(&skewed, 0.5), 0.0);
        assert_eq!(macro_error_rate(&skewed, f64::NEG_INFINITY), 0.5);
        assert_eq!(macro_error_rate(&m, 0.3), error_rate(&m, 0.3));
    }

    #[test]
    fn mae_and_brier() {
        let m = d4();
        assert!((mae(&m).unwrap() - 0.3).abs() < 1e-15);
        assert!((brier(&m).unwrap() - 0.10).abs() < 1e-15);
        let crisp = build(&[(0.0, 0), (1.0, 1)]);
        assert_eq!(mae(&crisp).unwrap(), 0.0);
        assert_eq!(brier(&crisp).unwrap(), 0.0);
        let flat = build(&[(0.5, 0), (0.5, 1), (0.5, 0), (0.5, 1)]);
        assert_eq!(mae(&flat).unwrap(), 0.5);
        assert_eq!(brier(&flat).unwrap(), 0.25);
        let wide = build(&[(-0.5, 0), (0.5, 1)]);
        assert!(mae(&wide).is_err());
        assert!(brier(&wide).is_err());
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&build(&[(0.1, 0), (0.2, 0), (0.8, 1), (0.9, 1)])), 1.0);
        assert_eq!(auc(&build(&[(0.4, 0), (0.8, 0), (0.2, 1), (0.6, 1)])), 0.25);
        assert_eq!(auc(&build(&[(0.3, 0), (0.3, 1), (0.3, 1)])), 0.5);
    }

    #[test]
    fn report_keys() {
        let r = MetricReport::compute(&d4(), Some(0.5)).unwrap();
        assert_eq!(r.acc, Some(1.0));
        assert_eq!(r.macc, Some(1.0));
        assert_eq!(r.auc, 1.0);
        assert!(r.bs <= r.mae);
    }
}
