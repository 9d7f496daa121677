//! Named example models.

use serde::Serialize;

use super::poly::{PiecewisePolynomial, Polynomial};
use super::ContinuousModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BuiltinInfo {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub description: &'static str,
    pub convex: bool,
}

const CATALOG: &[BuiltinInfo] = &[
    BuiltinInfo {
        name: "calibrated-triangular",
        aliases: &["fig5"],
        description: "f0 = 2(1-x), f1 = 2x on [0,1]; perfectly calibrated",
        convex: true,
    },
    BuiltinInfo {
        name: "noncalibrated-quadratic",
        aliases: &["fig6"],
        description: "f0 = 4x(1-x^2), f1 = 4x^3; c(x) = x^2",
        convex: true,
    },
    BuiltinInfo {
        name: "noncalibrated-cubic",
        aliases: &["fig7"],
        description: "f0 = 6x^2(1-x^3), f1 = 6x^5; c(x) = x^3",
        convex: true,
    },
    BuiltinInfo {
        name: "strictly-convex",
        aliases: &["fig9", "cubic"],
        description: "f0 = 2(1-x), f1 = 4x^3; c strictly increasing",
        convex: true,
    },
    BuiltinInfo {
        name: "piecewise-convex",
        aliases: &["fig10", "piecewise-straight"],
        description: "piecewise linear densities with a flat stretch of c on [1/3, 3/4]",
        convex: true,
    },
    BuiltinInfo {
        name: "parabola-wiggle",
        aliases: &["fig11"],
        description: "f0 = 6x(1-x), f1 = 1 + 0.8 P4(2x-1); not convex",
        convex: false,
    },
    BuiltinInfo { name: "diagonal", aliases: &["fig12"], description: "f0 = f1 = 1 on [0,1]", convex: true },
    BuiltinInfo {
        name: "diagonal-narrow",
        aliases: &[],
        description: "f0 = f1 = 100 on [0.495, 0.505]",
        convex: true,
    },
    BuiltinInfo {
        name: "shifted-triangular",
        aliases: &["fig13"],
        description: "f0 = 1, f1 = 0.5 + x on [0,1]; jumps of c at both ends",
        convex: true,
    },
    BuiltinInfo {
        name: "discontinuous",
        aliases: &["fig16"],
        description: "f0 = 5/3 on [0, 0.6], f1 = 2 on [0.5, 1]",
        convex: true,
    },
    BuiltinInfo {
        name: "separable",
        aliases: &[],
        description: "f0 = 2 on [0, 0.5], f1 = 2 on [0.5, 1]",
        convex: true,
    },
    BuiltinInfo { name: "u-shaped", aliases: &[], description: "f0 = 1, f1 = 12(x-0.5)^2; not convex", convex: false },
    BuiltinInfo {
        name: "alternating-steps",
        aliases: &[],
        description: "step densities alternating 1.5/0.5 by quarters; not convex",
        convex: false,
    },
];

pub fn builtin_catalog() -> &'static [BuiltinInfo] {
    CATALOG
}

pub fn builtin_names() -> Vec<&'static str> {
    CATALOG.iter().map(|b| b.name).collect()
}

fn poly(coeffs: &[f64]) -> Polynomial {
    Polynomial::new(coeffs.to_vec())
}

fn unit(coeffs: &[f64]) -> PiecewisePolynomial {
    PiecewisePolynomial::single(0.0, 1.0, poly(coeffs)).unwrap()
}

fn steps(breaks: &[f64], levels: &[f64]) -> PiecewisePolynomial {
    PiecewisePolynomial::new(breaks.to_vec(), levels.iter().map(|&v| Polynomial::constant(v)).collect()).unwrap()
}

/// Looks a model up by name or alias.
pub fn builtin_model(name: &str) -> Result<ContinuousModel> {
    let info = CATALOG
        .iter()
        .find(|b| b.name == name || b.aliases.contains(&name))
        .ok_or_else(|| Error::UnknownModelName(name.to_string()))?;
    let (f0, f1) = match info.name {
        "calibrated-triangular" => (unit(&[2.0, -2.0]), unit(&[0.0, 2.0])),
        "noncalibrated-quadratic" => (unit(&[0.0, 4.0, 0.0, -4.0]), unit(&[0.0, 0.0, 0.0, 4.0])),
        "noncalibrated-cubic" => (
            unit(&[0.0, 0.0, 6.0, 0.0, 0.0, -6.0]),
            unit(&[0.0, 0.0, 0.0, 0.0, 0.0, 6.0]),
        ),
        "strictly-convex" => (unit(&[2.0, -2.0]), unit(&[0.0, 0.0, 0.0, 4.0])),
        "piecewise-convex" => (
            PiecewisePolynomial::new(
                vec![0.0, 0.75, 1.0],
                vec![Polynomial::constant(8.0 / 7.0), Polynomial::linear(32.0 / 7.0, -32.0 / 7.0)],
            )?,
            PiecewisePolynomial::new(
                vec![0.0, 1.0 / 3.0, 1.0],
                vec![Polynomial::linear(0.0, 18.0 / 5.0), Polynomial::constant(6.0 / 5.0)],
            )?,
        ),
        "parabola-wiggle" => {
            // 1 + 0.8 P4(2x - 1) expanded in powers of x
            let p4 = [1.0, -20.0, 90.0, -140.0, 70.0];
            let f1: Vec<f64> = p4.iter().enumerate().map(|(i, c)| 0.8 * c + if i == 0 { 1.0 } else { 0.0 }).collect();
            (unit(&[0.0, 6.0, -6.0]), unit(&f1))
        }
        "diagonal" => (unit(&[1.0]), unit(&[1.0])),
        "diagonal-narrow" => (steps(&[0.495, 0.505], &[100.0]), steps(&[0.495, 0.505], &[100.0])),
        "shifted-triangular" => (unit(&[1.0]), unit(&[0.5, 1.0])),
        "discontinuous" => (steps(&[0.0, 0.6], &[5.0 / 3.0]), steps(&[0.5, 1.0], &[2.0])),
        "separable" => (steps(&[0.0, 0.5], &[2.0]), steps(&[0.5, 1.0], &[2.0])),
        "u-shaped" => (unit(&[1.0]), unit(&[3.0, -12.0, 12.0])),
        "alternating-steps" => (
            steps(&[0.0, 0.25, 0.5, 0.75, 1.0], &[1.5, 0.5, 1.5, 0.5]),
            steps(&[0.0, 0.25, 0.5, 0.75, 1.0], &[0.5, 1.5, 0.5, 1.5]),
        ),
        _ => unreachable!(),
    };
    ContinuousModel::balanced(info.name, f0, f1)
}

#[cfg(test)]
mod tests {
    use super::super::{classify_intervals, DEFAULT_TOL};
    use super::*;

    #[test]
    fn every_builtin_is_valid_and_flagged_correctly() {
        for info in builtin_catalog() {
            let m = builtin_model(info.name).unwrap();
            assert_eq!(classify_intervals(&m, DEFAULT_TOL).is_ok(), info.convex, "{}", info.name);
            for alias in info.aliases {
                assert_eq!(builtin_model(alias).unwrap().name(), info.name);
            }
        }
        assert!(matches!(builtin_model("nope"), Err(Error::UnknownModelName(_))));
    }

    #[test]
    fn reference_values() {
        let m = builtin_model("strictly-convex").unwrap();
        assert!((m.optimal_loss().unwrap() - 0.102562).abs() < 5e-7);
        let m = builtin_model("piecewise-convex").unwrap();
        assert!((m.decomposition().unwrap().1 - 0.226832).abs() < 5e-7);
        assert!((builtin_model("diagonal").unwrap().optimal_loss().unwrap() - 0.25).abs() < 1e-12);
        assert!(builtin_model("separable").unwrap().optimal_loss().unwrap().abs() < 1e-12);
        let d = builtin_model("discontinuous").unwrap();
        assert!((d.optimal_loss().unwrap() - 1.0 / 22.0).abs() < 1e-10);
    }
}
