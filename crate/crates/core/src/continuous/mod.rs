//! Population-level models given by a pair of class-conditional score densities.

mod builtin;
mod convexify;
mod intervals;
mod optimal;
mod poly;
mod transform;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{ConditionKind, Priors};
use crate::quadrature::{bisect, integrate_pieces, QuadOptions};
use crate::threshold::ThresholdChoiceMethod;

pub use builtin::{builtin_model, builtin_names, builtin_catalog, BuiltinInfo};
pub use convexify::convexify;
pub use intervals::{classify_intervals, lambda_components, lambda_curve, Interval, IntervalKind, IntervalMap, DEFAULT_TOL};
pub use poly::{ratio_limit, PiecewisePolynomial, Polynomial};
pub use transform::{cal_transform, Atom, CalibratedContinuousModel};

pub(crate) const QUAD: QuadOptions = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 4000 };

/// Density given by an arbitrary function on a bounded support.
#[derive(Clone)]
pub struct CustomDensity {
    pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    breaks: Vec<f64>,
}

impl CustomDensity {
    /// `breaks` must start and end at the support bounds; interior entries mark kinks.
    pub fn new<F>(breaks: Vec<f64>, pdf: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if breaks.len() < 2 || breaks.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidDensity("breakpoints must be finite and strictly increasing".into()));
        }
        Ok(Self { pdf: Arc::new(pdf), breaks })
    }
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity").field("breaks", &self.breaks).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Density {
    Piecewise(PiecewisePolynomial),
    Custom(CustomDensity),
}

impl Density {
    pub fn breaks(&self) -> &[f64] {
        match self {
            Density::Piecewise(p) => p.breaks(),
            Density::Custom(c) => &c.breaks,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let b = self.breaks();
        (b[0], b[b.len() - 1])
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Density::Piecewise(p) => p.pdf(x),
            Density::Custom(c) => {
                let (lo, hi) = (c.breaks[0], c.breaks[c.breaks.len() - 1]);
                if x < lo || x > hi {
                    0.0
                } else {
                    (c.pdf)(x)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Density::Piecewise(p) => p.cdf(x),
            Density::Custom(c) => {
                let (lo, hi) = self.support();
                let x = x.min(hi);
                if x <= lo {
                    return 0.0;
                }
                let mut pts: Vec<f64> = c.breaks.iter().copied().filter(|&b| b < x).collect();
                pts.push(x);
                // a failed quadrature here leaves the value NaN, which every caller rejects
                integrate_pieces(|t| (c.pdf)(t), &pts, QUAD).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn as_piecewise(&self) -> Option<&PiecewisePolynomial> {
        match self {
            Density::Piecewise(p) => Some(p),
            Density::Custom(_) => None,
        }
    }

    fn mass(&self) -> Result<f64> {
        match self {
            Density::Piecewise(p) => Ok(p.mass()),
            Density::Custom(c) => integrate_pieces(|t| (c.pdf)(t), &c.breaks, QUAD),
        }
    }
}

impl From<PiecewisePolynomial> for Density {
    fn from(p: PiecewisePolynomial) -> Self {
        Density::Piecewise(p)
    }
}

impl From<CustomDensity> for Density {
    fn from(c: CustomDensity) -> Self {
        Density::Custom(c)
    }
}

/// Two class-conditional score densities with class priors.
#[derive(Debug, Clone)]
pub struct ContinuousModel {
    name: String,
    priors: Priors,
    densities: [Density; 2],
    breaks: Vec<f64>,
}

const MASS_TOL: f64 = 1e-9;

impl ContinuousModel {
    pub fn new(name: impl Into<String>, f0: impl Into<Density>, f1: impl Into<Density>, priors: Priors) -> Result<Self> {
        if !(priors.pi0 > 0.0 && priors.pi1 > 0.0 && (priors.pi0 + priors.pi1 - 1.0).abs() < 1e-12) {
            return Err(Error::InvalidParameter(format!("priors ({}, {}) must be positive and sum to 1", priors.pi0, priors.pi1)));
        }
        let densities = [f0.into(), f1.into()];
        for (k, d) in densities.iter().enumerate() {
            let mass = d.mass()?;
            if (mass - 1.0).abs() > MASS_TOL {
                return Err(Error::InvalidDensity(format!("class {k} density integrates to {mass}")));
            }
            for w in d.breaks().windows(2) {
                for i in 0..=32 {
                    let x = w[0] + (w[1] - w[0]) * i as f64 / 32.0;
                    let v = d.pdf(x);
                    if v.is_nan() || v < -1e-12 {
                        return Err(Error::InvalidDensity(format!("class {k} density is {v} at {x}")));
                    }
                }
            }
        }
        let mut breaks: Vec<f64> = densities.iter().flat_map(|d| d.breaks().iter().copied()).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Ok(Self { name: name.into(), priors, densities, breaks })
    }

    /// Equal priors.
    pub fn balanced(name: impl Into<String>, f0: impl Into<Density>, f1: impl Into<Density>) -> Result<Self> {
        Self::new(name, f0, f1, Priors::BALANCED)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn priors(&self) -> Priors {
        self.priors
    }

    pub fn priors_for(&self, kind: ConditionKind) -> Priors {
        match kind {
            ConditionKind::Cost => self.priors,
            ConditionKind::Skew => Priors::BALANCED,
        }
    }

    pub fn with_priors(&self, priors: Priors) -> Result<Self> {
        Self::new(self.name.clone(), self.densities[0].clone(), self.densities[1].clone(), priors)
    }

    pub fn density(&self, k: usize) -> &Density {
        &self.densities[k]
    }

    pub fn is_piecewise(&self) -> bool {
        self.densities.iter().all(|d| d.as_piecewise().is_some())
    }

    /// Union of both densities' breakpoints, support ends included.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breaks[0], self.breaks[self.breaks.len() - 1])
    }

    pub fn pdf(&self, k: usize, t: f64) -> f64 {
        self.densities[k].pdf(t)
    }

    pub fn cdf(&self, k: usize, t: f64) -> f64 {
        self.densities[k].cdf(t)
    }

    /// Polynomial pieces of both densities on a segment between consecutive breakpoints.
    pub(crate) fn polys_on(&self, lo: f64, hi: f64) -> Option<[Polynomial; 2]> {
        let p0 = self.densities[0].as_piecewise()?.poly_on(lo, hi);
        let p1 = self.densities[1].as_piecewise()?.poly_on(lo, hi);
        Some([p0, p1])
    }

    /// Fraction of examples predicted class 0 at threshold `t`.
    pub fn rate(&self, t: f64) -> f64 {
        self.rate_with(t, self.priors)
    }

    pub fn rate_with(&self, t: f64, p: Priors) -> f64 {
        p.pi0 * self.cdf(0, t) + p.pi1 * self.cdf(1, t)
    }

    /// Smallest threshold reaching rate `r`.
    pub fn inverse_rate_with(&self, r: f64, p: Priors) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidRate(r));
        }
        let (lo, hi) = self.support();
        if r <= 0.0 {
            return Ok(lo);
        }
        if r >= 1.0 {
            return Ok(hi);
        }
        Ok(bisect(|t| self.rate_with(t, p) - r, lo, hi))
    }

    /// Calibration function: posterior of class 1 at score `t`.
    pub fn c_of_t(&self, t: f64) -> Result<f64> {
        let (a, b) = (self.priors.pi0 * self.pdf(0, t), self.priors.pi1 * self.pdf(1, t));
        if a + b == 0.0 {
            return Err(Error::ZeroDensityPoint(t));
        }
        Ok(b / (a + b))
    }

    /// ROC slope `f0 / f1` at `t`, infinite where only class 0 has density.
    pub fn slope_of_t(&self, t: f64) -> Result<f64> {
        let (a, b) = (self.pdf(0, t), self.pdf(1, t));
        if a + b == 0.0 {
            return Err(Error::ZeroDensityPoint(t));
        }
        Ok(if b == 0.0 { f64::INFINITY } else { a / b })
    }

    pub(crate) fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        integrate_pieces(f, &self.breaks, QUAD)
    }

    /// Integral over `[lo, hi]` split at the model's breakpoints.
    pub(crate) fn integrate_on<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        let mut pts = vec![lo];
        pts.extend(self.breaks.iter().copied().filter(|&b| b > lo && b < hi));
        pts.push(hi);
        integrate_pieces(f, &pts, QUAD)
    }

    fn check_unit_support(&self) -> Result<()> {
        let (lo, hi) = self.support();
        if lo < 0.0 || hi > 1.0 {
            let found = if lo < 0.0 { lo } else { hi };
            return Err(Error::ScoresOutOfUnitRange { lo: 0.0, hi: 1.0, found });
        }
        Ok(())
    }

    /// Probability that a class-1 score exceeds a class-0 score.
    pub fn auc(&self) -> Result<f64> {
        self.integrate(|t| self.cdf(0, t) * self.pdf(1, t))
    }

    pub fn class_score_mean(&self, k: usize) -> Result<f64> {
        self.integrate(|t| t * self.pdf(k, t))
    }

    pub fn mae(&self) -> Result<f64> {
        self.check_unit_support()?;
        let p = self.priors;
        self.integrate(|t| p.pi0 * t * self.pdf(0, t) + p.pi1 * (1.0 - t) * self.pdf(1, t))
    }

    pub fn brier(&self) -> Result<f64> {
        self.check_unit_support()?;
        let p = self.priors;
        self.integrate(|t| p.pi0 * t * t * self.pdf(0, t) + p.pi1 * (1.0 - t) * (1.0 - t) * self.pdf(1, t))
    }

    /// Calibration and refinement parts of the Brier score.
    pub fn decomposition(&self) -> Result<(f64, f64)> {
        self.check_unit_support()?;
        let p = self.priors;
        let calibration = |t: f64| {
            let (a, b) = (p.pi0 * self.pdf(0, t), p.pi1 * self.pdf(1, t));
            if a + b > 0.0 {
                (t * (a + b) - b).powi(2) / (a + b)
            } else {
                0.0
            }
        };
        Ok((self.integrate(calibration)?, self.integrate(|t| self.refinement_density(t))?))
    }

    /// Integrand of the refinement loss at score `t`.
    pub fn refinement_density(&self, t: f64) -> f64 {
        let p = self.priors;
        let (a, b) = (p.pi0 * self.pdf(0, t), p.pi1 * self.pdf(1, t));
        if a + b > 0.0 {
            a * b / (a + b)
        } else {
            0.0
        }
    }

    /// Loss at threshold `t` and operating condition `c`.
    pub fn loss_at(&self, t: f64, c: f64, p: Priors) -> f64 {
        2.0 * (c * p.pi0 * (1.0 - self.cdf(0, t)) + (1.0 - c) * p.pi1 * self.cdf(1, t))
    }

    /// Loss at condition `c` when thresholds follow `method`.
    pub fn loss_at_condition(&self, method: &ThresholdChoiceMethod, c: f64, kind: ConditionKind) -> Result<f64> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidCondition(c));
        }
        let p = self.priors_for(kind);
        use ThresholdChoiceMethod as M;
        match *method {
            M::ScoreFixed { t } => Ok(self.loss_at(t, c, p)),
            M::RateFixed { r } => Ok(self.loss_at(self.inverse_rate_with(r, p)?, c, p)),
            M::ScoreUniform { lo, hi } => {
                self.check_support_within(lo, hi)?;
                Ok(self.integrate_on(|t| self.loss_at(t, c, p), lo, hi)? / (hi - lo))
            }
            M::ScoreDriven => {
                self.check_unit_support()?;
                Ok(self.loss_at(c, c, p))
            }
            M::RateUniform { .. } => {
                self.integrate(|t| self.loss_at(t, c, p) * (p.pi0 * self.pdf(0, t) + p.pi1 * self.pdf(1, t)))
            }
            M::RateDriven { .. } => Ok(self.loss_at(self.inverse_rate_with(c, p)?, c, p)),
            M::Optimal => Ok(optimal::min_loss(self, c, p)?.1),
        }
    }

    fn check_support_within(&self, lo: f64, hi: f64) -> Result<()> {
        let (a, b) = self.support();
        if a < lo || b > hi {
            return Err(Error::ScoresOutOfUnitRange { lo, hi, found: if a < lo { a } else { b } });
        }
        Ok(())
    }

    /// Expected loss under uniformly distributed operating conditions.
    pub fn expected_loss(&self, method: &ThresholdChoiceMethod, kind: ConditionKind) -> Result<f64> {
        let p = self.priors_for(kind);
        let avg = |t: f64| p.pi0 * (1.0 - self.cdf(0, t)) + p.pi1 * self.cdf(1, t);
        let dens = |t: f64| p.pi0 * self.pdf(0, t) + p.pi1 * self.pdf(1, t);
        use ThresholdChoiceMethod as M;
        match *method {
            M::ScoreFixed { t } => Ok(avg(t)),
            M::RateFixed { r } => Ok(avg(self.inverse_rate_with(r, p)?)),
            M::ScoreUniform { lo, hi } => {
                self.check_support_within(lo, hi)?;
                Ok(self.integrate_on(avg, lo, hi)? / (hi - lo))
            }
            M::ScoreDriven => {
                self.check_unit_support()?;
                self.integrate_on(|c| self.loss_at(c, c, p), 0.0, 1.0)
            }
            M::RateUniform { .. } => self.integrate(|t| avg(t) * dens(t)),
            M::RateDriven { .. } => self.integrate(|t| {
                let r = self.rate_with(t, p);
                2.0 * (r * p.pi0 * (1.0 - self.cdf(0, t)) + (1.0 - r) * p.pi1 * self.cdf(1, t)) * dens(t)
            }),
            M::Optimal => optimal::optimal_loss(self, p),
        }
    }

    /// Expected loss of the optimal threshold choice under the model priors.
    pub fn optimal_loss(&self) -> Result<f64> {
        optimal::optimal_loss(self, self.priors)
    }

    /// Optimal threshold and loss at condition `c`.
    pub fn optimal_threshold(&self, c: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidCondition(c));
        }
        optimal::min_loss(self, c, self.priors)
    }

    /// `(c, loss)` pairs on `grid + 1` evenly spaced conditions.
    pub fn cost_curve(&self, method: &ThresholdChoiceMethod, kind: ConditionKind, grid: usize) -> Result<Vec<(f64, f64)>> {
        let grid = grid.max(1);
        (0..=grid)
            .map(|i| {
                let c = i as f64 / grid as f64;
                Ok((c, self.loss_at_condition(method, c, kind)?))
            })
            .collect()
    }
}

/// Expected loss under uniform cost proportions.
pub fn population_expected_loss(model: &ContinuousModel, method: &ThresholdChoiceMethod) -> Result<f64> {
    model.expected_loss(method, ConditionKind::Cost)
}

/// Calibration and refinement parts of the Brier score.
pub fn continuous_decomposition(model: &ContinuousModel) -> Result<(f64, f64)> {
    model.decomposition()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> ContinuousModel {
        builtin_model("calibrated-triangular").unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn validates_densities() {
        let half = PiecewisePolynomial::single(0.0, 1.0, Polynomial::constant(0.5)).unwrap();
        let one = PiecewisePolynomial::single(0.0, 1.0, Polynomial::constant(1.0)).unwrap();
        assert!(matches!(ContinuousModel::balanced("x", half, one.clone()), Err(Error::InvalidDensity(_))));
        let neg = PiecewisePolynomial::single(0.0, 1.0, Polynomial::linear(2.0, -2.0).scale(1.0)).unwrap();
        assert!(ContinuousModel::balanced("ok", neg, one.clone()).is_ok());
        let bad = PiecewisePolynomial::single(0.0, 1.0, Polynomial::linear(-1.0, 4.0)).unwrap();
        assert!(matches!(ContinuousModel::balanced("x", bad, one.clone()), Err(Error::InvalidDensity(_))));
        let p = Priors { pi0: 0.0, pi1: 1.0 };
        assert!(ContinuousModel::new("x", one.clone(), one, p).is_err());
    }

    #[test]
    fn calibration_function_and_slope() {
        let m = tri();
        assert!(close(m.c_of_t(0.3).unwrap(), 0.3, 1e-15));
        assert!(close(m.slope_of_t(0.25).unwrap(), 3.0, 1e-15));
        assert_eq!(m.slope_of_t(0.0).unwrap(), f64::INFINITY);
        let narrow = builtin_model("diagonal-narrow").unwrap();
        assert_eq!(narrow.c_of_t(0.2), Err(Error::ZeroDensityPoint(0.2)));
    }

    #[test]
    fn triangular_metrics() {
        let m = tri();
        assert!(close(m.auc().unwrap(), 5.0 / 6.0, 1e-12));
        assert!(close(m.mae().unwrap(), 1.0 / 3.0, 1e-12));
        assert!(close(m.brier().unwrap(), 1.0 / 6.0, 1e-12));
        let (cl, rl) = m.decomposition().unwrap();
        assert!(cl.abs() < 1e-12);
        assert!(close(rl, 1.0 / 6.0, 1e-12));
        assert!(close(m.optimal_loss().unwrap(), 1.0 / 6.0, 1e-10));
    }

    #[test]
    fn population_losses_match_averaged_curves() {
        use crate::threshold::ThresholdChoiceMethod as M;
        let methods = [
            M::ScoreFixed { t: 0.4 },
            M::SCORE_UNIFORM,
            M::ScoreDriven,
            M::RATE_UNIFORM,
            M::RATE_DRIVEN,
            M::Optimal,
        ];
        for name in ["calibrated-triangular", "piecewise-convex", "discontinuous"] {
            let m = builtin_model(name).unwrap();
            for kind in [ConditionKind::Cost, ConditionKind::Skew] {
                for method in &methods {
                    let direct = m.expected_loss(method, kind).unwrap();
                    let averaged = crate::quadrature::integrate(
                        |c| m.loss_at_condition(method, c, kind).unwrap(),
                        0.0,
                        1.0,
                        QuadOptions::abs(1e-9),
                    )
                    .unwrap();
                    assert!(close(direct, averaged, 1e-7), "{name} {method} {kind:?}: {direct} vs {averaged}");
                }
            }
        }
    }

    #[test]
    fn closed_forms_on_population() {
        use crate::threshold::ThresholdChoiceMethod as M;
        for name in ["calibrated-triangular", "strictly-convex", "shifted-triangular"] {
            let m = builtin_model(name).unwrap();
            let auc = m.auc().unwrap();
            let (_, rl) = m.decomposition().unwrap();
            let ru = m.expected_loss(&M::RATE_UNIFORM, ConditionKind::Cost).unwrap();
            assert!(close(ru, 0.25 * (1.0 - 2.0 * auc) + 0.5, 1e-10), "{name}");
            let rd = m.expected_loss(&M::RATE_DRIVEN, ConditionKind::Cost).unwrap();
            assert!(close(rd, 0.25 * (1.0 - 2.0 * auc) + 1.0 / 3.0, 1e-10), "{name}");
            let sd = m.expected_loss(&M::ScoreDriven, ConditionKind::Cost).unwrap();
            assert!(close(sd, m.brier().unwrap(), 1e-10), "{name}");
            let opt = m.optimal_loss().unwrap();
            assert!(close(opt, rl, 1e-8), "{name}: {opt} vs {rl}");
        }
    }

    #[test]
    fn custom_density_metrics() {
        let f0 = CustomDensity::new(vec![0.0, 1.0], |t| 2.0 * (1.0 - t)).unwrap();
        let f1 = CustomDensity::new(vec![0.0, 1.0], |t| 2.0 * t).unwrap();
        let m = ContinuousModel::balanced("custom", f0, f1).unwrap();
        assert!(!m.is_piecewise());
        assert!(close(m.cdf(0, 0.5), 0.75, 1e-12));
        assert!(close(m.auc().unwrap(), 5.0 / 6.0, 1e-10));
        assert!(close(m.brier().unwrap(), 1.0 / 6.0, 1e-10));
        assert!(close(m.optimal_loss().unwrap(), 1.0 / 6.0, 1e-6));
        assert_eq!(classify_intervals(&m, DEFAULT_TOL), Err(Error::UnsupportedDensity));
    }
}
