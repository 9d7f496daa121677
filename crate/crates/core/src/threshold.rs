//! Threshold choice methods: policies mapping an operating condition to a threshold.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EmpiricalModel, OperatingCondition, Priors};
use crate::roc::{convex_hull, segment_cost};

/// How the rate-uniform method spreads its thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateUniformVariant {
    /// Uniform over the `n + 1` sample positions, interpolating inside tied groups.
    #[default]
    Cutpoints,
    /// Uniform over the `n` sample scores, each predicted class 0 at its own threshold.
    Examples,
}

/// How the rate-driven method inverts the rate function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateDrivenVariant {
    /// Mixture of the two adjacent cuts reproducing the rate in expectation.
    #[default]
    Interpolated,
    /// The smallest cut whose rate reaches the requested one.
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ThresholdChoiceMethod {
    ScoreFixed { t: f64 },
    RateFixed { r: f64 },
    ScoreUniform { lo: f64, hi: f64 },
    ScoreDriven,
    RateUniform { variant: RateUniformVariant },
    RateDriven { variant: RateDrivenVariant },
    Optimal,
}

impl ThresholdChoiceMethod {
    pub fn score_fixed(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("score-fixed threshold {t} is not finite")));
        }
        Ok(Self::ScoreFixed { t })
    }

    pub fn rate_fixed(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidRate(r));
        }
        Ok(Self::RateFixed { r })
    }

    pub fn score_uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!("score-uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self::ScoreUniform { lo, hi })
    }

    pub const SCORE_UNIFORM: Self = Self::ScoreUniform { lo: 0.0, hi: 1.0 };
    pub const RATE_UNIFORM: Self = Self::RateUniform { variant: RateUniformVariant::Cutpoints };
    pub const RATE_DRIVEN: Self = Self::RateDriven { variant: RateDrivenVariant::Interpolated };

    /// Short name used in reports and on the command line.
    pub fn code(&self) -> &'static str {
        match self {
            Self::ScoreFixed { .. } => "sf",
            Self::RateFixed { .. } => "rf",
            Self::ScoreUniform { .. } => "su",
            Self::ScoreDriven => "sd",
            Self::RateUniform { .. } => "ru",
            Self::RateDriven { .. } => "rd",
            Self::Optimal => "opt",
        }
    }
}

impl fmt::Display for ThresholdChoiceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ScoreFixed { t } => write!(f, "sf={t}"),
            Self::RateFixed { r } => write!(f, "rf={r}"),
            Self::ScoreUniform { lo, hi } if *lo == 0.0 && *hi == 1.0 => write!(f, "su"),
            Self::ScoreUniform { lo, hi } => write!(f, "su={lo},{hi}"),
            Self::ScoreDriven => write!(f, "sd"),
            Self::RateUniform { variant: RateUniformVariant::Cutpoints } => write!(f, "ru"),
            Self::RateUniform { variant: RateUniformVariant::Examples } => write!(f, "ru:examples"),
            Self::RateDriven { variant: RateDrivenVariant::Interpolated } => write!(f, "rd"),
            Self::RateDriven { variant: RateDrivenVariant::Step } => write!(f, "rd:step"),
            Self::Optimal => write!(f, "opt"),
        }
    }
}

/// Parses `sf=T`, `rf=R`, `su`, `su=L,U`, `sd`, `ru`, `ru:examples`, `rd`, `rd:step`, `opt`.
impl FromStr for ThresholdChoiceMethod {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = || Error::InvalidMethodSpec(spec.to_string());
        let s = spec.trim().to_ascii_lowercase();
        let (head, arg) = match s.split_once('=') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s.as_str(), None),
        };
        let num = |a: &str| a.parse::<f64>().map_err(|_| bad());
        match (head, arg) {
            ("sf", Some(a)) => Self::score_fixed(num(a)?),
            ("rf", Some(a)) => Self::rate_fixed(num(a)?),
            ("su", None) => Ok(Self::SCORE_UNIFORM),
            ("su", Some(a)) => {
                let (lo, hi) = a.split_once(',').ok_or_else(bad)?;
                Self::score_uniform(num(lo.trim())?, num(hi.trim())?)
            }
            ("sd", None) => Ok(Self::ScoreDriven),
            ("ru", None) => Ok(Self::RATE_UNIFORM),
            ("ru:examples", None) => Ok(Self::RateUniform { variant: RateUniformVariant::Examples }),
            ("rd", None) => Ok(Self::RATE_DRIVEN),
            ("rd:step", None) => Ok(Self::RateDriven { variant: RateDrivenVariant::Step }),
            ("opt", None) => Ok(Self::Optimal),
            _ => Err(bad()),
        }
    }
}

/// Threshold returned by a method: one value, a finite mixture, or a uniform range.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdSelection {
    Single(f64),
    /// `(threshold, weight)` pairs with positive weights summing to one.
    Mixture(Vec<(f64, f64)>),
    UniformRange { lo: f64, hi: f64 },
}

impl ThresholdSelection {
    /// The threshold itself when the selection is deterministic.
    pub fn single(&self) -> Option<f64> {
        match self {
            Self::Single(t) => Some(*t),
            _ => None,
        }
    }
}

/// Weighted cuts, the internal form of every selection except score ranges.
pub(crate) type CutMixture = Vec<(usize, f64)>;

fn cuts_to_selection(model: &EmpiricalModel, cuts: CutMixture) -> ThresholdSelection {
    if cuts.len() == 1 {
        ThresholdSelection::Single(model.cut_threshold(cuts[0].0))
    } else {
        ThresholdSelection::Mixture(cuts.into_iter().map(|(k, w)| (model.cut_threshold(k), w)).collect())
    }
}

pub fn choose_threshold(
    method: &ThresholdChoiceMethod,
    model: &EmpiricalModel,
    condition: OperatingCondition,
) -> Result<ThresholdSelection> {
    let priors = model.priors_for(condition.kind);
    let c = condition.value;
    use ThresholdChoiceMethod as M;
    Ok(match *method {
        M::ScoreFixed { t } => ThresholdSelection::Single(t),
        M::RateFixed { r } => ThresholdSelection::Single(model.inverse_rate_with(r, priors)?.0),
        M::ScoreUniform { lo, hi } => {
            model.check_score_range(lo, hi)?;
            ThresholdSelection::UniformRange { lo, hi }
        }
        M::ScoreDriven => {
            model.check_score_range(0.0, 1.0)?;
            ThresholdSelection::Single(c)
        }
        M::RateUniform { variant } => cuts_to_selection(model, rate_uniform_cuts(model, variant)),
        M::RateDriven { variant: RateDrivenVariant::Step } => {
            ThresholdSelection::Single(model.inverse_rate_with(c, priors)?.0)
        }
        M::RateDriven { variant } => cuts_to_selection(model, rate_driven_cuts(model, c, priors, variant)),
        M::Optimal => cuts_to_selection(model, vec![(optimal_cut(model, c, priors), 1.0)]),
    })
}

/// Weights of the rate-uniform mixture, indexed by cut.
pub(crate) fn rate_uniform_cuts(model: &EmpiricalModel, variant: RateUniformVariant) -> CutMixture {
    let groups = model.group_counts();
    let n = model.n() as f64;
    match variant {
        RateUniformVariant::Cutpoints => {
            // Each cut is one position; positions inside a tied group of size g
            // split between its two bounding cuts, (g - 1) / 2 to each side.
            let mut w = vec![1.0; model.cut_count()];
            for (j, g) in groups.iter().enumerate() {
                let half = ((g[0] + g[1]) as f64 - 1.0) * 0.5;
                w[j] += half;
                w[j + 1] += half;
            }
            w.into_iter().enumerate().map(|(k, x)| (k, x / (n + 1.0))).collect()
        }
        RateUniformVariant::Examples => {
            groups.iter().enumerate().map(|(j, g)| (j + 1, (g[0] + g[1]) as f64 / n)).collect()
        }
    }
}

pub(crate) fn rate_driven_cuts(
    model: &EmpiricalModel,
    rate: f64,
    priors: Priors,
    variant: RateDrivenVariant,
) -> CutMixture {
    let k = model.inverse_rate_cut(rate, priors);
    let hit = model.cut_rate(k, priors);
    if hit == rate || variant == RateDrivenVariant::Step {
        return vec![(k, 1.0)];
    }
    let below = model.cut_rate(k - 1, priors);
    let lam = (rate - below) / (hit - below);
    vec![(k - 1, 1.0 - lam), (k, lam)]
}

/// Hull vertex minimising the loss at cost `c`, preferring the lower threshold on ties.
pub(crate) fn optimal_cut(model: &EmpiricalModel, c: f64, priors: Priors) -> usize {
    let hull = convex_hull(model);
    let n = [model.class_count(0), model.class_count(1)];
    let cuts = hull.cuts();
    let steps = hull.segment_counts.iter().take_while(|&&d| segment_cost(d, n, priors) < c).count();
    cuts[steps]
}

pub fn optimal_threshold(model: &EmpiricalModel, c: f64) -> Result<ThresholdSelection> {
    optimal_threshold_with(model, OperatingCondition::cost(c)?)
}

pub fn optimal_threshold_with(model: &EmpiricalModel, condition: OperatingCondition) -> Result<ThresholdSelection> {
    choose_threshold(&ThresholdChoiceMethod::Optimal, model, condition)
}
