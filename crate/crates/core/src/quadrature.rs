//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }
}

/// Kronrod estimate and `|Kronrod - Gauss|` on one interval.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integral of `f` over `[a, b]`, bisecting the worst interval until the
/// summed error estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, opts).map(|v| -v);
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        if !total.is_finite() {
            return Err(Error::QuadratureFailure { a, b, error: f64::INFINITY });
        }
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(total);
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure { a, b, error: total_err });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(Segment { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        if heap.len() % 64 == 0 {
            // resum to shed accumulated rounding in the running totals
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Integral over consecutive breakpoints, each piece with its own tolerance.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], opts: QuadOptions) -> Result<f64> {
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            sum += integrate(&f, w[0], w[1], opts)?;
        }
    }
    Ok(sum)
}

/// Root of `f` on `[a, b]` by bisection; `f(a)` and `f(b)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    if f(b) == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
