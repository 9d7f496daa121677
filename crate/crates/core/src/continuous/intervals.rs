//! Splitting a convex model's score range by the shape of its calibration function.

use serde::Serialize;

use super::poly::{ratio_limit, Polynomial};
use super::{ContinuousModel, QUAD};
use crate::error::{Error, Result};
use crate::quadrature::integrate_pieces;

/// Tolerance on decreases of the calibration function.
pub const DEFAULT_TOL: f64 = 1e-10;

const SAMPLES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    /// `c` strictly increases with the score.
    Bijective,
    /// `c` is flat over a score range.
    Constant,
    /// `c` jumps at a single score.
    Singular,
}

/// A score range `tau` and the calibration values `sigma` it covers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub kind: IntervalKind,
    pub tau: (f64, f64),
    pub sigma: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalMap {
    pub intervals: Vec<Interval>,
}

impl IntervalMap {
    pub fn count(&self, kind: IntervalKind) -> usize {
        self.intervals.iter().filter(|i| i.kind == kind).count()
    }
}

/// Prior-weighted density pieces on one segment.
pub(crate) struct SegmentPolys {
    pub p1: Polynomial,
    pub den: Polynomial,
    /// `den^2` times the derivative of the calibration function.
    pub wronskian: Polynomial,
}

pub(crate) fn segment_polys(model: &ContinuousModel, lo: f64, hi: f64) -> Result<SegmentPolys> {
    let [p0, p1] = model.polys_on(lo, hi).ok_or(Error::UnsupportedDensity)?;
    let p = model.priors();
    let (p0, p1) = (p0.scale(p.pi0), p1.scale(p.pi1));
    let den = &p0 + &p1;
    let wronskian = &(&p1.derivative() * &p0) - &(&p1 * &p0.derivative());
    Ok(SegmentPolys { p1, den, wronskian })
}

fn push_merged(out: &mut Vec<Interval>, next: Interval, tol: f64) {
    if let Some(last) = out.last_mut() {
        let touching = last.tau.1 == next.tau.0 && (last.sigma.1 - next.sigma.0).abs() <= tol;
        let same_level = next.kind == IntervalKind::Constant && (last.sigma.0 - next.sigma.0).abs() <= tol;
        if touching && last.kind == next.kind && (next.kind == IntervalKind::Bijective || same_level) {
            last.tau.1 = next.tau.1;
            last.sigma.1 = next.sigma.1;
            return;
        }
    }
    out.push(next);
}

/// Classifies the score range of a convex piecewise-polynomial model.
///
/// Fails with [`Error::NonConvexModel`] where the calibration function decreases
/// by more than `tol`.
pub fn classify_intervals(model: &ContinuousModel, tol: f64) -> Result<IntervalMap> {
    if !model.is_piecewise() {
        return Err(Error::UnsupportedDensity);
    }
    let mut out: Vec<Interval> = Vec::new();
    let mut prev_c = 0.0;
    let mut last_end = model.support().0;
    for w in model.breakpoints().windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let sp = segment_polys(model, lo, hi)?;
        if sp.den.is_zero() {
            continue;
        }
        let c_lo = ratio_limit(&sp.p1, &sp.den, lo).ok_or(Error::ZeroDensityPoint(lo))?;
        let c_hi = ratio_limit(&sp.p1, &sp.den, hi).ok_or(Error::ZeroDensityPoint(hi))?;
        let constant = sp.wronskian.max_abs_coeff() <= tol * sp.den.max_abs_coeff().powi(2);
        if !constant {
            for i in 0..=SAMPLES {
                let x = lo + (hi - lo) * i as f64 / SAMPLES as f64;
                let d = sp.den.eval(x);
                if d > 0.0 && sp.wronskian.eval(x) / (d * d) < -tol {
                    return Err(Error::NonConvexModel { at: x });
                }
            }
            if c_hi < c_lo - tol {
                return Err(Error::NonConvexModel { at: hi });
            }
        }
        if c_lo < prev_c - tol {
            return Err(Error::NonConvexModel { at: lo });
        }
        if c_lo > prev_c + tol {
            out.push(Interval { kind: IntervalKind::Singular, tau: (lo, lo), sigma: (prev_c, c_lo) });
        }
        let kind = if constant { IntervalKind::Constant } else { IntervalKind::Bijective };
        let c_hi = if constant { c_lo } else { c_hi };
        push_merged(&mut out, Interval { kind, tau: (lo, hi), sigma: (c_lo, c_hi) }, tol);
        prev_c = c_hi;
        last_end = hi;
    }
    if prev_c < 1.0 - tol {
        out.push(Interval { kind: IntervalKind::Singular, tau: (last_end, last_end), sigma: (prev_c, 1.0) });
    }
    Ok(IntervalMap { intervals: out })
}

/// Optimal expected loss of a convex model split into the part collected over
/// bijective intervals and the part collected at jumps of the calibration function.
pub fn lambda_components(model: &ContinuousModel) -> Result<(f64, f64)> {
    let map = classify_intervals(model, DEFAULT_TOL)?;
    let p = model.priors();
    let mut smooth = 0.0;
    let mut jumps = 0.0;
    for iv in &map.intervals {
        match iv.kind {
            IntervalKind::Bijective => {
                let mut pts = vec![iv.tau.0];
                pts.extend(model.breakpoints().iter().copied().filter(|&b| b > iv.tau.0 && b < iv.tau.1));
                pts.push(iv.tau.1);
                for w in pts.windows(2) {
                    let sp = segment_polys(model, w[0], w[1])?;
                    smooth += integrate_pieces(
                        |t| {
                            let d = sp.den.eval(t);
                            if d <= 0.0 {
                                return 0.0;
                            }
                            let c = sp.p1.eval(t) / d;
                            model.loss_at(t, c, p) * sp.wronskian.eval(t) / (d * d)
                        },
                        w,
                        QUAD,
                    )?;
                }
            }
            IntervalKind::Singular => {
                let t = iv.tau.0;
                let (s0, s1) = iv.sigma;
                jumps += p.pi0 * (1.0 - model.cdf(0, t)) * (s1 * s1 - s0 * s0)
                    + p.pi1 * model.cdf(1, t) * (s1 - s0) * (2.0 - s0 - s1);
            }
            IntervalKind::Constant => {}
        }
    }
    Ok((smooth, jumps))
}

/// `(T, integrand)` of the bijective part of the optimal loss on `grid + 1`
/// scores spanning the support; zero outside bijective intervals.
pub fn lambda_curve(model: &ContinuousModel, grid: usize) -> Result<Vec<(f64, f64)>> {
    let map = classify_intervals(model, DEFAULT_TOL)?;
    let p = model.priors();
    let (lo, hi) = model.support();
    let b = model.breakpoints();
    let grid = grid.max(1);
    (0..=grid)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / grid as f64;
            let inside = map
                .intervals
                .iter()
                .any(|iv| iv.kind == IntervalKind::Bijective && t >= iv.tau.0 && t <= iv.tau.1);
            if !inside {
                return Ok((t, 0.0));
            }
            let j = b.partition_point(|&x| x <= t).clamp(1, b.len() - 1);
            let sp = segment_polys(model, b[j - 1], b[j])?;
            let d = sp.den.eval(t);
            if d <= 0.0 {
                return Ok((t, 0.0));
            }
            let c = sp.p1.eval(t) / d;
            Ok((t, model.loss_at(t, c, p) * sp.wronskian.eval(t) / (d * d)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::builtin_model;
    use super::*;
    use IntervalKind::*;

    fn kinds(name: &str) -> Vec<IntervalKind> {
        let m = builtin_model(name).unwrap();
        classify_intervals(&m, DEFAULT_TOL).unwrap().intervals.iter().map(|i| i.kind).collect()
    }

    #[test]
    fn classifications() {
        assert_eq!(kinds("calibrated-triangular"), vec![Bijective]);
        assert_eq!(kinds("strictly-convex"), vec![Bijective]);
        assert_eq!(kinds("diagonal"), vec![Singular, Constant, Singular]);
        assert_eq!(kinds("shifted-triangular"), vec![Singular, Bijective, Singular]);
        assert_eq!(kinds("discontinuous"), vec![Constant, Singular, Constant, Singular, Constant]);
        assert_eq!(kinds("piecewise-convex"), vec![Bijective, Constant, Bijective]);
        for name in ["u-shaped", "alternating-steps", "parabola-wiggle"] {
            let m = builtin_model(name).unwrap();
            assert!(matches!(classify_intervals(&m, DEFAULT_TOL), Err(Error::NonConvexModel { .. })), "{name}");
        }
    }

    #[test]
    fn piecewise_convex_levels() {
        let m = builtin_model("piecewise-convex").unwrap();
        let map = classify_intervals(&m, DEFAULT_TOL).unwrap();
        let flat = map.intervals[1];
        assert!((flat.sigma.0 - 0.512195121951).abs() < 1e-9, "{flat:?}");
        assert_eq!(flat.tau, (1.0 / 3.0, 0.75));
    }

    #[test]
    fn components_sum_to_optimal_loss() {
        for name in [
            "calibrated-triangular",
            "noncalibrated-quadratic",
            "strictly-convex",
            "piecewise-convex",
            "diagonal",
            "shifted-triangular",
            "discontinuous",
            "separable",
        ] {
            let m = builtin_model(name).unwrap();
            let (a, b) = lambda_components(&m).unwrap();
            let opt = m.optimal_loss().unwrap();
            assert!((a + b - opt).abs() < 1e-9, "{name}: {a} + {b} vs {opt}");
        }
        let m = builtin_model("discontinuous").unwrap();
        let (a, b) = lambda_components(&m).unwrap();
        assert!(a.abs() < 1e-15);
        assert!((b - 1.0 / 22.0).abs() < 1e-12);
    }
}
