//! Pointwise losses, expected losses over operating-condition distributions,
//! closed-form identities, and cost-space curves.
//!
//! Every method's loss as a function of the operating condition is piecewise
//! polynomial of degree at most two, so uniform-weight integrals are exact sums.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use statrs::distribution::{Beta, Continuous};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::metrics::{self, cut_error_rate};
use crate::model::{ConditionKind, EmpiricalModel, OperatingCondition, Priors, LOSS_SCALE};
use crate::roc::{self, convex_hull, csv_err, hull_partition};
use crate::threshold::{
    choose_threshold, rate_driven_cuts, rate_uniform_cuts, RateDrivenVariant, RateUniformVariant,
    ThresholdChoiceMethod, ThresholdSelection,
};

/// Loss at threshold `t` under cost proportion `c`.
pub fn pointwise_loss_cost(model: &EmpiricalModel, t: f64, c: f64) -> f64 {
    pointwise_loss_with(model, t, c, model.priors())
}

/// Loss at threshold `t` under skew `z`.
pub fn pointwise_loss_skew(model: &EmpiricalModel, t: f64, z: f64) -> f64 {
    pointwise_loss_with(model, t, z, Priors::BALANCED)
}

pub fn pointwise_loss_with(model: &EmpiricalModel, t: f64, c: f64, priors: Priors) -> f64 {
    cut_loss(model, model.cut_of(t), c, priors)
}

pub fn pointwise_loss(model: &EmpiricalModel, t: f64, condition: OperatingCondition) -> f64 {
    pointwise_loss_with(model, t, condition.value, model.priors_for(condition.kind))
}

fn cut_loss(model: &EmpiricalModel, k: usize, c: f64, p: Priors) -> f64 {
    let (a, b) = cut_line(model, k, p);
    a + b * c
}

/// Intercept and slope in `c` of the loss at cut `k`.
fn cut_line(model: &EmpiricalModel, k: usize, p: Priors) -> (f64, f64) {
    let (f0, f1) = model.cut_cdf(k);
    let a = LOSS_SCALE * p.pi1 * f1;
    (a, LOSS_SCALE * p.pi0 * (1.0 - f0) - a)
}

/// Expected loss of a threshold selection at one operating condition.
pub fn selection_loss(model: &EmpiricalModel, sel: &ThresholdSelection, condition: OperatingCondition) -> f64 {
    let p = model.priors_for(condition.kind);
    let c = condition.value;
    match sel {
        ThresholdSelection::Single(t) => pointwise_loss_with(model, *t, c, p),
        ThresholdSelection::Mixture(v) => v.iter().map(|(t, w)| w * pointwise_loss_with(model, *t, c, p)).sum(),
        ThresholdSelection::UniformRange { lo, hi } => {
            let (i0, i1) = cdf_integrals(model, *lo, *hi);
            let w = hi - lo;
            LOSS_SCALE * (c * p.pi0 * (1.0 - i0 / w) + (1.0 - c) * p.pi1 * i1 / w)
        }
    }
}

/// `(integral of F0, integral of F1)` over `[lo, hi]`.
fn cdf_integrals(model: &EmpiricalModel, lo: f64, hi: f64) -> (f64, f64) {
    let v = model.distinct_scores();
    let mut acc = (0.0, 0.0);
    for k in 1..model.cut_count() {
        let start = v[k - 1].max(lo);
        let end = if k < v.len() { v[k].min(hi) } else { hi };
        if end > start {
            let (f0, f1) = model.cut_cdf(k);
            acc.0 += f0 * (end - start);
            acc.1 += f1 * (end - start);
        }
    }
    acc
}

/// Distribution of operating conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightFamily {
    Uniform,
    Beta { alpha: f64, beta: f64 },
}

impl WeightFamily {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidWeightSpec(format!("beta:{alpha},{beta}")));
        }
        Ok(Self::Beta { alpha, beta })
    }

    /// Density on `[0, 1]`.
    pub fn density(&self) -> Box<dyn Fn(f64) -> f64> {
        match *self {
            WeightFamily::Uniform => Box::new(|_| 1.0),
            WeightFamily::Beta { alpha, beta } => {
                let d = Beta::new(alpha, beta).expect("validated parameters");
                Box::new(move |x| d.pdf(x))
            }
        }
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Uniform => write!(f, "uniform"),
            WeightFamily::Beta { alpha, beta } => write!(f, "beta:{alpha},{beta}"),
        }
    }
}

/// Parses `uniform` or `beta:A,B`.
impl FromStr for WeightFamily {
    type Err = Error;
    fn from_str(spec: &str) -> Result<Self> {
        let s = spec.trim().to_ascii_lowercase();
        if s == "uniform" {
            return Ok(Self::Uniform);
        }
        let bad = || Error::InvalidWeightSpec(spec.to_string());
        let rest = s.strip_prefix("beta:").ok_or_else(bad)?;
        let (a, b) = rest.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        Self::beta(a, b).map_err(|_| bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingWeight {
    pub family: WeightFamily,
    pub kind: ConditionKind,
}

impl OperatingWeight {
    pub fn uniform(kind: ConditionKind) -> Self {
        Self { family: WeightFamily::Uniform, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossQuery {
    pub method: ThresholdChoiceMethod,
    pub weight: OperatingWeight,
}

impl LossQuery {
    pub fn new(method: ThresholdChoiceMethod, family: WeightFamily, kind: ConditionKind) -> Self {
        Self { method, weight: OperatingWeight { family, kind } }
    }

    pub fn uniform(method: ThresholdChoiceMethod, kind: ConditionKind) -> Self {
        Self::new(method, WeightFamily::Uniform, kind)
    }

    pub fn kind(&self) -> ConditionKind {
        self.weight.kind
    }
}

/// Polynomial `q0 + q1 u + q2 u^2` in `u = c - lo` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossPiece {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: [f64; 3],
}

impl LossPiece {
    fn linear(lo: f64, hi: f64, (a, b): (f64, f64)) -> Self {
        Self { lo, hi, coeffs: [a + b * lo, b, 0.0] }
    }

    pub fn eval(&self, c: f64) -> f64 {
        let u = c - self.lo;
        self.coeffs[0] + u * (self.coeffs[1] + u * self.coeffs[2])
    }

    /// Exact integral over the piece.
    pub fn integral(&self) -> f64 {
        let w = self.hi - self.lo;
        w * (self.coeffs[0] + w * (self.coeffs[1] / 2.0 + w * self.coeffs[2] / 3.0))
    }
}

fn mix_lines(model: &EmpiricalModel, cuts: &[(usize, f64)], p: Priors) -> (f64, f64) {
    cuts.iter().fold((0.0, 0.0), |acc, &(k, w)| {
        let (a, b) = cut_line(model, k, p);
        (acc.0 + w * a, acc.1 + w * b)
    })
}

/// The loss of `method` as a piecewise polynomial over `[0, 1]`.
pub fn loss_pieces(model: &EmpiricalModel, method: &ThresholdChoiceMethod, kind: ConditionKind) -> Result<Vec<LossPiece>> {
    let p = model.priors_for(kind);
    use ThresholdChoiceMethod as M;
    let pieces = match *method {
        M::ScoreFixed { t } => vec![LossPiece::linear(0.0, 1.0, cut_line(model, model.cut_of(t), p))],
        M::RateFixed { r } => {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidRate(r));
            }
            let k = model.inverse_rate_cut(r, p);
            vec![LossPiece::linear(0.0, 1.0, cut_line(model, k, p))]
        }
        M::ScoreUniform { lo, hi } => {
            model.check_score_range(lo, hi)?;
            let (i0, i1) = cdf_integrals(model, lo, hi);
            let w = hi - lo;
            let a = LOSS_SCALE * p.pi1 * i1 / w;
            let b = LOSS_SCALE * p.pi0 * (1.0 - i0 / w) - a;
            vec![LossPiece::linear(0.0, 1.0, (a, b))]
        }
        M::ScoreDriven => {
            model.check_score_range(0.0, 1.0)?;
            let mut breaks = vec![0.0];
            breaks.extend(model.distinct_scores().iter().copied().filter(|&s| s > 0.0 && s < 1.0));
            breaks.push(1.0);
            breaks
                .windows(2)
                .map(|w| LossPiece::linear(w[0], w[1], cut_line(model, model.cut_of(w[0]), p)))
                .collect()
        }
        M::RateUniform { variant } => {
            vec![LossPiece::linear(0.0, 1.0, mix_lines(model, &rate_uniform_cuts(model, variant), p))]
        }
        M::RateDriven { variant } => {
            let rates: Vec<f64> = (0..model.cut_count()).map(|k| model.cut_rate(k, p)).collect();
            let mut out = Vec::with_capacity(rates.len());
            for k in 0..rates.len() - 1 {
                let (lo, hi) = (rates[k], rates[k + 1]);
                match variant {
                    RateDrivenVariant::Step => out.push(LossPiece::linear(lo, hi, cut_line(model, k + 1, p))),
                    RateDrivenVariant::Interpolated => {
                        // weight on cut k+1 grows as (c - lo) / (hi - lo)
                        let (a0, b0) = cut_line(model, k, p);
                        let (a1, b1) = cut_line(model, k + 1, p);
                        let q_lo = a0 + b0 * lo;
                        let d_lo = (a1 - a0) + (b1 - b0) * lo;
                        let span = hi - lo;
                        out.push(LossPiece { lo, hi, coeffs: [q_lo, b0 + d_lo / span, (b1 - b0) / span] });
                    }
                }
            }
            out
        }
        M::Optimal => {
            let hull = convex_hull(model);
            let cuts = hull.cuts();
            let mut bounds = vec![0.0];
            bounds.extend(hull.c_values_with(model, p));
            bounds.push(1.0);
            cuts.iter()
                .enumerate()
                .filter(|(j, _)| bounds[j + 1] > bounds[*j])
                .map(|(j, &k)| LossPiece::linear(bounds[j], bounds[j + 1], cut_line(model, k, p)))
                .collect()
        }
    };
    Ok(pieces)
}

/// Expected loss of a method under an operating-condition distribution.
///
/// Each piece is a polynomial of degree at most two, so both weight families
/// integrate in closed form: uniform weights directly, Beta weights through the
/// first three incomplete moments of the Beta distribution.
pub fn expected_loss(model: &EmpiricalModel, query: &LossQuery) -> Result<f64> {
    let pieces = loss_pieces(model, &query.method, query.kind())?;
    Ok(match query.weight.family {
        WeightFamily::Uniform => pieces.iter().map(LossPiece::integral).sum(),
        WeightFamily::Beta { alpha, beta } => pieces.iter().map(|p| beta_weighted_integral(p, alpha, beta)).sum(),
    })
}

/// Integral of a piece against the Beta(alpha, beta) density.
fn beta_weighted_integral(piece: &LossPiece, alpha: f64, beta: f64) -> f64 {
    let cdf = |a: f64, x: f64| {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            beta_reg(a, beta, x)
        }
    };
    // ratios B(alpha + j, beta) / B(alpha, beta)
    let s = alpha + beta;
    let ratio = [1.0, alpha / s, alpha * (alpha + 1.0) / (s * (s + 1.0))];
    let mut m = [0.0; 3];
    for (j, mj) in m.iter_mut().enumerate() {
        let a = alpha + j as f64;
        *mj = ratio[j] * (cdf(a, piece.hi) - cdf(a, piece.lo));
    }
    let lo = piece.lo;
    let [q0, q1, q2] = piece.coeffs;
    q0 * m[0] + q1 * (m[1] - lo * m[0]) + q2 * (m[2] - 2.0 * lo * m[1] + lo * lo * m[0])
}

/// Population form of the rate-uniform loss given an AUC.
pub fn rate_uniform_closed_form(auc: f64, priors: Priors) -> f64 {
    priors.pi0 * priors.pi1 * (1.0 - 2.0 * auc) + 0.5
}

/// Finite-sample rate-uniform loss over `n + 1` cutpoints.
pub fn rate_uniform_finite_closed_form(auc: f64, priors: Priors, n: u64) -> f64 {
    let n = n as f64;
    priors.pi0 * priors.pi1 * (1.0 - 2.0 * auc) * n / (n + 1.0) + 0.5
}

pub fn rate_driven_closed_form(auc: f64, priors: Priors) -> f64 {
    priors.pi0 * priors.pi1 * (1.0 - 2.0 * auc) + 1.0 / 3.0
}

/// The metric each method's uniform-weight expected loss reduces to.
pub fn closed_form_loss(model: &EmpiricalModel, method: &ThresholdChoiceMethod, kind: ConditionKind) -> Result<f64> {
    let p = model.priors_for(kind);
    use ThresholdChoiceMethod as M;
    Ok(match *method {
        M::ScoreFixed { t } => metrics::error_rate_with(model, t, p),
        M::RateFixed { r } => metrics::error_rate_with(model, model.inverse_rate_with(r, p)?.0, p),
        M::ScoreUniform { lo, hi } if lo == 0.0 && hi == 1.0 => metrics::mae_with(model, p)?,
        M::ScoreUniform { lo, hi } => {
            model.check_score_range(lo, hi)?;
            (p.pi0 * (model.class_score_mean(0) - lo) + p.pi1 * (hi - model.class_score_mean(1))) / (hi - lo)
        }
        M::ScoreDriven => metrics::brier_with(model, p)?,
        M::RateUniform { variant: RateUniformVariant::Cutpoints } => {
            rate_uniform_finite_closed_form(metrics::auc(model), p, model.n())
        }
        M::RateUniform { variant: RateUniformVariant::Examples } => rate_uniform_closed_form(metrics::auc(model), p),
        M::RateDriven { .. } => rate_driven_closed_form(metrics::auc(model), p),
        M::Optimal => roc::refinement_with(model, &hull_partition(model), p),
    })
}

/// Expected loss next to its closed form, as reported by the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub method: String,
    pub weight: String,
    pub kind: ConditionKind,
    pub loss: f64,
    /// Only defined for uniform weights.
    pub closed_form: Option<f64>,
    pub abs_gap: Option<f64>,
}

impl LossReport {
    pub fn compute(model: &EmpiricalModel, query: &LossQuery) -> Result<Self> {
        let loss = expected_loss(model, query)?;
        let closed_form = match query.weight.family {
            WeightFamily::Uniform => Some(closed_form_loss(model, &query.method, query.kind())?),
            WeightFamily::Beta { .. } => None,
        };
        Ok(Self {
            method: query.method.to_string(),
            weight: query.weight.family.to_string(),
            kind: query.kind(),
            loss,
            closed_form,
            abs_gap: closed_form.map(|c| (loss - c).abs()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    CostCurve,
    BrierCurve,
    OptimalEnvelope,
    RefinementCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
}

impl CurveSeries {
    /// Trapezoidal area under the points.
    pub fn area(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * 0.5).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y"]).map_err(csv_err)?;
        for &(x, y) in &self.points {
            w.write_record([sig(x, 9), sig(y, 9)]).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// Loss curve on a uniform grid of `grid_size` points plus every breakpoint.
pub fn cost_curve_points(
    model: &EmpiricalModel,
    method: &ThresholdChoiceMethod,
    kind: ConditionKind,
    grid_size: usize,
) -> Result<CurveSeries> {
    if grid_size < 2 {
        return Err(Error::InvalidParameter(format!("grid size must be at least 2, got {grid_size}")));
    }
    let pieces = loss_pieces(model, method, kind)?;
    let mut xs: Vec<f64> = (0..grid_size).map(|i| i as f64 / (grid_size - 1) as f64).collect();
    xs.extend(pieces.iter().map(|p| p.lo));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut points = Vec::with_capacity(xs.len());
    let mut j = 0;
    for x in xs {
        while j + 1 < pieces.len() && pieces[j].hi <= x {
            j += 1;
        }
        points.push((x, pieces[j].eval(x)));
    }
    let curve_kind = match method {
        ThresholdChoiceMethod::ScoreDriven => CurveKind::BrierCurve,
        ThresholdChoiceMethod::Optimal => CurveKind::OptimalEnvelope,
        _ => CurveKind::CostCurve,
    };
    Ok(CurveSeries { kind: curve_kind, points })
}

/// Trapezoid estimate of the expected loss on a `samples`-point grid, built
/// only from threshold selections and pointwise losses.
pub fn expected_loss_oracle(model: &EmpiricalModel, query: &LossQuery, samples: usize) -> Result<f64> {
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!("oracle needs at least 1000 samples, got {samples}")));
    }
    let w = query.weight.family.density();
    let h = 1.0 / (samples - 1) as f64;
    let mut sum = 0.0;
    for i in 0..samples {
        let c = i as f64 * h;
        let cond = OperatingCondition::new(query.kind(), c)?;
        let sel = choose_threshold(&query.method, model, cond)?;
        let wc = w(c);
        if !wc.is_finite() {
            continue;
        }
        let end = if i == 0 || i + 1 == samples { 0.5 } else { 1.0 };
        sum += end * wc * selection_loss(model, &sel, cond);
    }
    Ok(sum * h)
}

/// Error rate at each cut, used by oracles and tests.
pub fn cut_error_rates(model: &EmpiricalModel, kind: ConditionKind) -> Vec<f64> {
    let p = model.priors_for(kind);
    (0..model.cut_count()).map(|k| cut_error_rate(model, k, p)).collect()
}

/// Selection for the rate-driven method, exposed for property tests.
pub fn rate_driven_selection(model: &EmpiricalModel, rate: f64, kind: ConditionKind) -> Vec<(f64, f64)> {
    rate_driven_cuts(model, rate, model.priors_for(kind), RateDrivenVariant::Interpolated)
        .into_iter()
        .map(|(k, w)| (model.cut_threshold(k), w))
        .collect()
}
