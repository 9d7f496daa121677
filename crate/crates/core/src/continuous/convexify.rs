//! Replacing non-convex stretches of a model by the ROC convex hull.

use super::optimal::min_loss_in;
use super::{ContinuousModel, Density};
use crate::error::{Error, Result};
use crate::quadrature::bisect;

const SAMPLES_PER_SEGMENT: usize = 256;
const DEPTH_TOL: f64 = 1e-9;

struct RocSample {
    x: f64,
    y: f64,
    t: f64,
}

fn cross(o: &RocSample, a: &RocSample, b: &RocSample) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn roc_samples(model: &ContinuousModel) -> Vec<RocSample> {
    let mut ts = Vec::new();
    for w in model.breakpoints().windows(2) {
        for i in 0..SAMPLES_PER_SEGMENT {
            ts.push(w[0] + (w[1] - w[0]) * i as f64 / SAMPLES_PER_SEGMENT as f64);
        }
    }
    ts.push(model.support().1);
    ts.into_iter().map(|t| RocSample { x: model.cdf(1, t), y: model.cdf(0, t), t }).collect()
}

/// Thresholds inside each stretch that lies strictly below the ROC upper hull.
fn concave_stretches(samples: &[RocSample]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..samples.len() {
        while hull.len() >= 2 && cross(&samples[hull[hull.len() - 2]], &samples[hull[hull.len() - 1]], &samples[i]) >= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    let mut splits = Vec::new();
    for w in hull.windows(2) {
        let (a, b) = (&samples[w[0]], &samples[w[1]]);
        let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        let deepest = (w[0] + 1..w[1])
            .map(|k| (k, -cross(a, b, &samples[k]) / len))
            .max_by(|p, q| p.1.total_cmp(&q.1));
        if let Some((k, depth)) = deepest {
            if depth > DEPTH_TOL {
                splits.push(samples[k].t);
            }
        }
    }
    splits
}

/// Same ROC hull, with every stretch below the hull replaced by constant
/// densities along the hull chord; the result is convex.
pub fn convexify(model: &ContinuousModel) -> Result<ContinuousModel> {
    if !model.is_piecewise() {
        return Err(Error::UnsupportedDensity);
    }
    let p = model.priors();
    let (lo, hi) = model.support();
    let mut bridges: Vec<(f64, f64)> = Vec::new();
    for split in concave_stretches(&roc_samples(model)) {
        let gap = |c: f64| min_loss_in(model, c, p, lo, split, false).1 - min_loss_in(model, c, p, split, hi, false).1;
        let c_star = bisect(gap, 0.0, 1.0);
        let a = min_loss_in(model, c_star, p, lo, split, true).0;
        let b = min_loss_in(model, c_star, p, split, hi, false).0;
        if b > a {
            bridges.push((a, b));
        }
    }
    bridges.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in bridges {
        match merged.last_mut() {
            Some(last) if a < last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    let mut dens = [model.density(0).as_piecewise().unwrap().clone(), model.density(1).as_piecewise().unwrap().clone()];
    for (a, b) in merged {
        for d in dens.iter_mut() {
            let level = (d.cdf(b) - d.cdf(a)) / (b - a);
            *d = d.splice_constant(a, b, level)?;
        }
    }
    let [f0, f1] = dens;
    ContinuousModel::new(format!("{}-convexified", model.name()), Density::Piecewise(f0), Density::Piecewise(f1), p)
}
