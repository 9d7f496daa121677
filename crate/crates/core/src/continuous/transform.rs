//! Calibration of a convex model by mapping each score to its calibration value.

use serde::Serialize;

use super::intervals::{classify_intervals, segment_polys, Interval, IntervalKind, IntervalMap, DEFAULT_TOL};
use super::ContinuousModel;
use crate::error::Result;
use crate::quadrature::bisect;

/// Probability mass piled on one calibrated score by a flat stretch of the
/// calibration function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub location: f64,
    /// Class-conditional masses.
    pub mass: [f64; 2],
}

/// Distribution of calibrated scores `c(T)` under a convex model.
#[derive(Debug, Clone)]
pub struct CalibratedContinuousModel {
    source: ContinuousModel,
    map: IntervalMap,
    atoms: Vec<Atom>,
}

pub fn cal_transform(model: &ContinuousModel) -> Result<CalibratedContinuousModel> {
    let map = classify_intervals(model, DEFAULT_TOL)?;
    let atoms = map
        .intervals
        .iter()
        .filter(|iv| iv.kind == IntervalKind::Constant)
        .map(|iv| Atom {
            location: iv.sigma.0,
            mass: [0, 1].map(|k| model.cdf(k, iv.tau.1) - model.cdf(k, iv.tau.0)),
        })
        .collect();
    Ok(CalibratedContinuousModel { source: model.clone(), map, atoms })
}

impl CalibratedContinuousModel {
    pub fn source(&self) -> &ContinuousModel {
        &self.source
    }

    pub fn intervals(&self) -> &IntervalMap {
        &self.map
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    fn c_within(&self, iv: &Interval, t: f64) -> f64 {
        match self.source.c_of_t(t) {
            Ok(c) => c.clamp(iv.sigma.0, iv.sigma.1),
            Err(_) if t - iv.tau.0 < iv.tau.1 - t => iv.sigma.0,
            Err(_) => iv.sigma.1,
        }
    }

    /// Largest original score whose calibration value is `<= s`.
    fn preimage(&self, s: f64) -> f64 {
        let (lo, hi) = self.source.support();
        for iv in &self.map.intervals {
            match iv.kind {
                IntervalKind::Bijective if s < iv.sigma.1 => {
                    if s < iv.sigma.0 {
                        return iv.tau.0;
                    }
                    return bisect(|t| self.c_within(iv, t) - s, iv.tau.0, iv.tau.1);
                }
                IntervalKind::Constant if s < iv.sigma.0 => return iv.tau.0,
                IntervalKind::Singular if s < iv.sigma.1 => return iv.tau.0,
                _ => {}
            }
        }
        if self.map.intervals.is_empty() {
            lo
        } else {
            hi
        }
    }

    /// Class-conditional distribution function of the calibrated score.
    pub fn cdf(&self, k: usize, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        self.source.cdf(k, self.preimage(s))
    }

    /// Density of the continuous part at `s`, zero off the bijective ranges.
    pub fn pdf(&self, k: usize, s: f64) -> Result<f64> {
        for iv in &self.map.intervals {
            if iv.kind == IntervalKind::Bijective && s > iv.sigma.0 && s < iv.sigma.1 {
                let t = self.preimage(s);
                let b = self.source.breakpoints();
                let i = b.partition_point(|&x| x <= t).clamp(1, b.len() - 1);
                let sp = segment_polys(&self.source, b[i - 1], b[i])?;
                let d = sp.den.eval(t);
                let slope = sp.wronskian.eval(t) / (d * d);
                return Ok(self.source.pdf(k, t) / slope);
            }
        }
        Ok(0.0)
    }

    fn bijective_integral<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut sum = 0.0;
        for iv in self.map.intervals.iter().filter(|iv| iv.kind == IntervalKind::Bijective) {
            sum += self.source.integrate_on(|t| f(t, self.c_within(iv, t)), iv.tau.0, iv.tau.1)?;
        }
        Ok(sum)
    }

    pub fn brier(&self) -> Result<f64> {
        let p = self.source.priors();
        let smooth = self.bijective_integral(|t, c| {
            p.pi0 * self.source.pdf(0, t) * c * c + p.pi1 * self.source.pdf(1, t) * (1.0 - c) * (1.0 - c)
        })?;
        let atoms: f64 = self
            .atoms
            .iter()
            .map(|a| p.pi0 * a.mass[0] * a.location.powi(2) + p.pi1 * a.mass[1] * (1.0 - a.location).powi(2))
            .sum();
        Ok(smooth + atoms)
    }

    /// Calibration and refinement parts of the Brier score of the calibrated scores.
    pub fn decomposition(&self) -> Result<(f64, f64)> {
        let p = self.source.priors();
        let smooth = self.bijective_integral(|t, _| {
            let (a, b) = (p.pi0 * self.source.pdf(0, t), p.pi1 * self.source.pdf(1, t));
            if a + b > 0.0 {
                a * b / (a + b)
            } else {
                0.0
            }
        })?;
        let atoms: f64 = self
            .atoms
            .iter()
            .map(|a| {
                let (m0, m1) = (p.pi0 * a.mass[0], p.pi1 * a.mass[1]);
                if m0 + m1 > 0.0 {
                    m0 * m1 / (m0 + m1)
                } else {
                    0.0
                }
            })
            .sum();
        let rl = smooth + atoms;
        Ok(((self.brier()? - rl).max(0.0), rl))
    }
}
