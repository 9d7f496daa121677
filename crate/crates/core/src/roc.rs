//! ROC curves, their upper convex hull, and binned Brier decompositions.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::model::{EmpiricalModel, Priors};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    /// `F1(t)`, the fraction of class 1 predicted class 0.
    pub fpr: f64,
    /// `F0(t)`, the fraction of class 0 predicted class 0.
    pub tpr: f64,
    pub threshold: f64,
    /// Index of the cut that produced this vertex.
    pub cut: usize,
}

/// One vertex per cut, from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

pub fn roc_curve(model: &EmpiricalModel) -> RocCurve {
    let points = (0..model.cut_count())
        .map(|k| {
            let (tpr, fpr) = model.cut_cdf(k);
            RocPoint { fpr, tpr, threshold: model.cut_threshold(k), cut: k }
        })
        .collect();
    RocCurve { points }
}

impl RocCurve {
    /// Trapezoidal area under the curve.
    pub fn area(&self) -> f64 {
        trapezoid_area(&self.points)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fpr", "tpr", "threshold"]).map_err(csv_err)?;
        for p in &self.points {
            w.write_record([sig(p.fpr, 9), sig(p.tpr, 9), sig(p.threshold, 9)]).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) * 0.5).sum()
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Upper convex envelope of a ROC curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    /// Hull vertices, a subsequence of the ROC vertices.
    pub vertices: Vec<RocPoint>,
    /// Class counts gained along each segment, `[class 0, class 1]`.
    pub segment_counts: Vec<[u64; 2]>,
    /// Slope `d tpr / d fpr` of each segment (infinite for vertical ones).
    pub slopes: Vec<f64>,
    /// Cost proportion at which both endpoints of a segment have equal loss.
    pub c_values: Vec<f64>,
}

/// Upper hull by monotone chain on integer count coordinates, so collinear
/// vertices are detected exactly and merged into a single segment.
pub fn convex_hull(model: &EmpiricalModel) -> ConvexHull {
    let curve = roc_curve(model);
    let n = [model.class_count(0), model.class_count(1)];
    let mut idx: Vec<usize> = Vec::new();
    for k in 0..model.cut_count() {
        let p = model.cut_counts(k);
        while idx.len() >= 2 {
            let a = model.cut_counts(idx[idx.len() - 2]);
            let b = model.cut_counts(idx[idx.len() - 1]);
            // x = class-1 count, y = class-0 count
            let cross = (b[1] as i128 - a[1] as i128) * (p[0] as i128 - a[0] as i128)
                - (b[0] as i128 - a[0] as i128) * (p[1] as i128 - a[1] as i128);
            if cross >= 0 {
                idx.pop();
            } else {
                break;
            }
        }
        idx.push(k);
    }
    let vertices: Vec<RocPoint> = idx.iter().map(|&k| curve.points[k]).collect();
    let mut segment_counts = Vec::new();
    let mut slopes = Vec::new();
    let mut c_values = Vec::new();
    let priors = model.priors();
    for w in idx.windows(2) {
        let a = model.cut_counts(w[0]);
        let b = model.cut_counts(w[1]);
        let d = [b[0] - a[0], b[1] - a[1]];
        segment_counts.push(d);
        let d0 = d[0] as f64 / n[0] as f64;
        let d1 = d[1] as f64 / n[1] as f64;
        slopes.push(if d1 == 0.0 { f64::INFINITY } else { d0 / d1 });
        c_values.push(segment_cost(d, n, priors));
    }
    ConvexHull { vertices, segment_counts, slopes, c_values }
}

/// Cost proportion where a hull segment's two endpoints tie.
pub(crate) fn segment_cost(d: [u64; 2], n: [u64; 2], priors: Priors) -> f64 {
    let w0 = priors.pi0 * d[0] as f64 / n[0] as f64;
    let w1 = priors.pi1 * d[1] as f64 / n[1] as f64;
    w1 / (w0 + w1)
}

impl ConvexHull {
    pub fn area(&self) -> f64 {
        trapezoid_area(&self.vertices)
    }

    /// Cut indices of the hull vertices.
    pub fn cuts(&self) -> Vec<usize> {
        self.vertices.iter().map(|v| v.cut).collect()
    }

    /// Segment cost values under other priors, e.g. balanced for skew.
    pub fn c_values_with(&self, model: &EmpiricalModel, priors: Priors) -> Vec<f64> {
        let n = [model.class_count(0), model.class_count(1)];
        self.segment_counts.iter().map(|&d| segment_cost(d, n, priors)).collect()
    }

    /// Vertex rows carry the slope and cost value of the segment that ends there.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fpr", "tpr", "threshold", "segment_slope", "c_value"]).map_err(csv_err)?;
        for (i, p) in self.vertices.iter().enumerate() {
            let (slope, c) = if i == 0 {
                (String::new(), String::new())
            } else {
                (sig(self.slopes[i - 1], 9), sig(self.c_values[i - 1], 9))
            };
            w.write_record([sig(p.fpr, 9), sig(p.tpr, 9), sig(p.threshold, 9), slope, c]).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// Contiguous bins over the distinct-score groups of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub bins: Vec<Bin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bin {
    /// First distinct-score group in the bin.
    pub first: usize,
    /// One past the last group.
    pub end: usize,
    pub counts: [u64; 2],
    pub mean_score: f64,
}

impl Bin {
    pub fn size(&self) -> u64 {
        self.counts[0] + self.counts[1]
    }

    /// Fraction of class 1 in the bin.
    pub fn mean_label(&self) -> f64 {
        self.counts[1] as f64 / self.size() as f64
    }
}

impl Partition {
    /// Bins spanning the given cut boundaries, e.g. `[0, ..., m]`.
    pub fn from_cuts(model: &EmpiricalModel, cuts: &[usize]) -> Self {
        let groups = model.group_counts();
        let values = model.distinct_scores();
        let bins = cuts
            .windows(2)
            .map(|w| {
                let mut counts = [0u64; 2];
                let mut sum = 0.0;
                for g in w[0]..w[1] {
                    counts[0] += groups[g][0];
                    counts[1] += groups[g][1];
                    sum += values[g] * (groups[g][0] + groups[g][1]) as f64;
                }
                let size = (counts[0] + counts[1]) as f64;
                Bin { first: w[0], end: w[1], counts, mean_score: sum / size }
            })
            .collect();
        Self { bins }
    }
}

/// One bin per distinct score.
pub fn roc_partition(model: &EmpiricalModel) -> Partition {
    let cuts: Vec<usize> = (0..model.cut_count()).collect();
    Partition::from_cuts(model, &cuts)
}

/// One bin per convex hull segment.
pub fn hull_partition(model: &EmpiricalModel) -> Partition {
    Partition::from_cuts(model, &convex_hull(model).cuts())
}

/// Calibration and refinement terms of the binned Brier decomposition.
pub fn decomposition(model: &EmpiricalModel, partition: &Partition) -> (f64, f64) {
    let n = model.n() as f64;
    let mut cl = 0.0;
    let mut rl = 0.0;
    for b in &partition.bins {
        let size = b.size() as f64;
        let y = b.mean_label();
        cl += size * (b.mean_score - y).powi(2);
        rl += size * y * (1.0 - y);
    }
    (cl / n, rl / n)
}

/// Refinement term with the class mass of each bin reweighted to the given priors.
pub fn refinement_with(model: &EmpiricalModel, partition: &Partition, priors: Priors) -> f64 {
    let n0 = model.class_count(0) as f64;
    let n1 = model.class_count(1) as f64;
    partition
        .bins
        .iter()
        .map(|b| {
            let m0 = priors.pi0 * b.counts[0] as f64 / n0;
            let m1 = priors.pi1 * b.counts[1] as f64 / n1;
            if m0 + m1 > 0.0 {
                m0 * m1 / (m0 + m1)
            } else {
                0.0
            }
        })
        .sum()
}

/// Refinement loss over the convex hull bins.
pub fn refinement_loss_hull(model: &EmpiricalModel) -> f64 {
    decomposition(model, &hull_partition(model)).1
}

/// Hull refinement loss with balanced priors.
pub fn macro_refinement_loss_hull(model: &EmpiricalModel) -> f64 {
    refinement_with(model, &hull_partition(model), Priors::BALANCED)
}
