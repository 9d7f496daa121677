//! Loss-minimising thresholds on continuous models.

use super::{classify_intervals, convexify, ContinuousModel, DEFAULT_TOL, QUAD};
use crate::error::Result;
use crate::model::Priors;
use crate::quadrature::{bisect, integrate_pieces};

const SAMPLES_PER_SEGMENT: usize = 32;
const CUSTOM_GRID: usize = 2000;

/// Candidate thresholds in `[tmin, tmax]` containing every local minimum of the loss at `c`.
pub(crate) fn candidates(model: &ContinuousModel, c: f64, p: Priors, tmin: f64, tmax: f64) -> Vec<f64> {
    let mut out = vec![tmin, tmax];
    out.extend(model.breakpoints().iter().copied().filter(|&b| b > tmin && b < tmax));
    let segments: Vec<(f64, f64)> = model
        .breakpoints()
        .windows(2)
        .map(|w| (w[0].max(tmin), w[1].min(tmax)))
        .filter(|(a, b)| a < b)
        .collect();
    if model.is_piecewise() {
        for &(a, b) in &segments {
            let [p0, p1] = model.polys_on(a, b).unwrap();
            // derivative of the loss in t, up to a factor 2
            let h = |t: f64| (1.0 - c) * p.pi1 * p1.eval(t) - c * p.pi0 * p0.eval(t);
            let mut x0 = a;
            let mut h0 = h(a);
            for i in 1..=SAMPLES_PER_SEGMENT {
                let x1 = a + (b - a) * i as f64 / SAMPLES_PER_SEGMENT as f64;
                let h1 = h(x1);
                if h0 < 0.0 && h1 >= 0.0 {
                    out.push(if h1 == 0.0 { x1 } else { bisect(h, x0, x1) });
                }
                x0 = x1;
                h0 = h1;
            }
        }
    } else {
        let loss = |t: f64| model.loss_at(t, c, p);
        let grid: Vec<f64> = (0..=CUSTOM_GRID).map(|i| tmin + (tmax - tmin) * i as f64 / CUSTOM_GRID as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| loss(t)).collect();
        for i in 1..CUSTOM_GRID {
            if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
                out.push(golden_min(&loss, grid[i - 1], grid[i + 1]));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Minimum of the loss over thresholds in `[tmin, tmax]`; `largest` picks the
/// largest minimiser among ties instead of the smallest.
pub(crate) fn min_loss_in(model: &ContinuousModel, c: f64, p: Priors, tmin: f64, tmax: f64, largest: bool) -> (f64, f64) {
    let scored: Vec<(f64, f64)> = candidates(model, c, p, tmin, tmax).into_iter().map(|t| (t, model.loss_at(t, c, p))).collect();
    let best = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let tie = best + 1e-15 * best.abs().max(1e-300);
    let mut ties = scored.into_iter().filter(|s| s.1 <= tie);
    let pick = if largest { ties.next_back() } else { ties.next() };
    let (t, _) = pick.unwrap();
    (t, best)
}

/// Smallest loss-minimising threshold on the whole support and its loss.
pub(crate) fn min_loss(model: &ContinuousModel, c: f64, p: Priors) -> Result<(f64, f64)> {
    let (lo, hi) = model.support();
    Ok(min_loss_in(model, c, p, lo, hi, false))
}

/// Conditions where the loss envelope may bend sharply: the ends of every
/// interval of the convexified model, straight hull stretches included.
fn envelope_breaks(model: &ContinuousModel, p: Priors) -> Vec<f64> {
    let mut breaks = vec![0.0, 1.0];
    if model.is_piecewise() {
        let map = model
            .with_priors(p)
            .and_then(|m| convexify(&m))
            .and_then(|m| classify_intervals(&m, DEFAULT_TOL));
        if let Ok(map) = map {
            breaks.extend(map.intervals.iter().flat_map(|iv| [iv.sigma.0, iv.sigma.1]));
        }
    }
    breaks.retain(|c| (0.0..=1.0).contains(c));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

pub(crate) fn optimal_loss(model: &ContinuousModel, p: Priors) -> Result<f64> {
    let (lo, hi) = model.support();
    integrate_pieces(|c| min_loss_in(model, c, p, lo, hi, false).1, &envelope_breaks(model, p), QUAD)
}
