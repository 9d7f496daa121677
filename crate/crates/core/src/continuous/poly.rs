//! Polynomials and piecewise-polynomial densities.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Dense polynomial with coefficients in ascending powers of `x`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// `a + b x`.
    pub fn linear(a: f64, b: f64) -> Self {
        Self { coeffs: vec![a, b] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self { coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect() }
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = vec![0.0];
        coeffs.extend(self.coeffs.iter().enumerate().map(|(i, &c)| c / (i + 1) as f64));
        Self { coeffs }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Coefficients in powers of `(x - x0)`.
    pub fn taylor_at(&self, x0: f64) -> Vec<f64> {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                a[j] += x0 * a[j + 1];
            }
        }
        a
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Polynomial, i: usize| p.coeffs.get(i).copied().unwrap_or(0.0);
        Polynomial { coeffs: (0..n).map(|i| get(self, i) + get(rhs, i)).collect() }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs }
    }
}

/// Limit of `num / den` as `x -> x0`, cancelling common roots at `x0`.
pub fn ratio_limit(num: &Polynomial, den: &Polynomial, x0: f64) -> Option<f64> {
    let tn = num.taylor_at(x0);
    let td = den.taylor_at(x0);
    let eps = 1e-13 * den.max_abs_coeff().max(num.max_abs_coeff());
    for (j, &d) in td.iter().enumerate() {
        if d.abs() > eps {
            return Some(tn.get(j).copied().unwrap_or(0.0) / d);
        }
    }
    None
}

/// Density made of polynomial pieces on consecutive breakpoints, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    pieces: Vec<Polynomial>,
    antiderivs: Vec<Polynomial>,
    cum: Vec<f64>,
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Polynomial>) -> Result<Self> {
        if breaks.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::InvalidDensity(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                pieces.len()
            )));
        }
        if breaks.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidDensity("breakpoints must be finite and strictly increasing".into()));
        }
        let antiderivs: Vec<Polynomial> = pieces.iter().map(Polynomial::antiderivative).collect();
        let mut cum = vec![0.0];
        for (i, a) in antiderivs.iter().enumerate() {
            let last = *cum.last().unwrap();
            cum.push(last + a.eval(breaks[i + 1]) - a.eval(breaks[i]));
        }
        Ok(Self { breaks, pieces, antiderivs, cum })
    }

    /// A single polynomial on `[lo, hi]`.
    pub fn single(lo: f64, hi: f64, poly: Polynomial) -> Result<Self> {
        Self::new(vec![lo, hi], vec![poly])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn mass(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn piece_index(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return None;
        }
        let i = self.breaks.partition_point(|&b| b <= x);
        Some(i.saturating_sub(1).min(self.pieces.len() - 1))
    }

    /// Density value; pieces own their left endpoint, the last piece also its right one.
    pub fn pdf(&self, x: f64) -> f64 {
        self.piece_index(x).map_or(0.0, |i| self.pieces[i].eval(x))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return self.mass();
        }
        let i = self.piece_index(x).unwrap();
        self.cum[i] + self.antiderivs[i].eval(x) - self.antiderivs[i].eval(self.breaks[i])
    }

    /// The polynomial in force on the open interval `(lo, hi)`, which must not
    /// straddle a breakpoint.
    pub fn poly_on(&self, lo: f64, hi: f64) -> Polynomial {
        let mid = 0.5 * (lo + hi);
        match self.piece_index(mid) {
            Some(i) if mid > self.breaks[0] && mid < *self.breaks.last().unwrap() => self.pieces[i].clone(),
            _ => Polynomial::zero(),
        }
    }

    /// Same density with `value` on `[a, b]`.
    pub fn splice_constant(&self, a: f64, b: f64, value: f64) -> Result<Self> {
        let mut breaks = Vec::new();
        let mut pieces = Vec::new();
        let (lo, hi) = self.support();
        let mut push = |x0: f64, x1: f64, p: Polynomial| {
            if x1 > x0 {
                if breaks.last() != Some(&x0) {
                    if !breaks.is_empty() {
                        // bridge a gap with an explicit zero piece
                        pieces.push(Polynomial::zero());
                    }
                    breaks.push(x0);
                }
                breaks.push(x1);
                pieces.push(p);
            }
        };
        let start = lo.min(a);
        let end = hi.max(b);
        let mut cuts: Vec<f64> = self.breaks.iter().copied().filter(|&x| x < a || x > b).collect();
        cuts.extend([a, b, start, end]);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if x0 >= a && x1 <= b {
                push(x0, x1, Polynomial::constant(value));
            } else {
                push(x0, x1, self.poly_on(x0, x1));
            }
        }
        Self::new(breaks, pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let p = Polynomial::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative().coeffs(), &[2.0, 6.0]);
        assert_eq!(p.antiderivative().eval(1.0), 3.0);
        let q = Polynomial::linear(1.0, -1.0);
        assert_eq!((&p * &q).eval(2.0), -17.0);
        assert_eq!((&p - &q).eval(2.0), 18.0);
        let t = p.taylor_at(1.0);
        assert_eq!(t, vec![6.0, 8.0, 3.0]);
    }

    #[test]
    fn ratio_limits_cancel_common_roots() {
        // x^3 / (x - x^3 + x^3) at 0
        let num = Polynomial::new(vec![0.0, 0.0, 0.0, 4.0]);
        let den = Polynomial::new(vec![0.0, 4.0, 0.0, 0.0]);
        assert_eq!(ratio_limit(&num, &den, 0.0), Some(0.0));
        let num = Polynomial::new(vec![0.0, 2.0]);
        let den = Polynomial::new(vec![0.0, 4.0, 1.0]);
        assert_eq!(ratio_limit(&num, &den, 0.0), Some(0.5));
        assert_eq!(ratio_limit(&Polynomial::zero(), &Polynomial::zero(), 0.0), None);
    }

    #[test]
    fn piecewise_cdf_and_splice() {
        let f = PiecewisePolynomial::new(
            vec![0.0, 0.5, 1.0],
            vec![Polynomial::constant(0.5), Polynomial::constant(1.5)],
        )
        .unwrap();
        assert_eq!(f.mass(), 1.0);
        assert_eq!(f.cdf(0.25), 0.125);
        assert_eq!(f.cdf(0.75), 0.625);
        assert_eq!(f.pdf(0.5), 1.5);
        assert_eq!(f.pdf(1.0), 1.5);
        assert_eq!(f.pdf(1.5), 0.0);
        let g = f.splice_constant(0.25, 0.75, 1.0).unwrap();
        assert_eq!(g.breaks(), &[0.0, 0.25, 0.75, 1.0]);
        assert!((g.mass() - 1.0).abs() < 1e-15);
        assert_eq!(g.pdf(0.6), 1.0);
        let narrow = PiecewisePolynomial::single(0.4, 0.6, Polynomial::constant(5.0)).unwrap();
        assert_eq!(narrow.poly_on(0.0, 0.4), Polynomial::zero());
        assert!(PiecewisePolynomial::new(vec![0.0, 0.0], vec![Polynomial::zero()]).is_err());
    }
}
