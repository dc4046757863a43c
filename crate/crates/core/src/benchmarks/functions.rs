use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Objective, Optimum};
use crate::error::{config_err, Result};
use crate::geometry::DomainBounds;

/// `Σ 100 (x_{i+1} - x_i²)² + (1 - x_i)²`, minimum 0 at `(1, …, 1)`.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    bounds: DomainBounds,
    optimum: Optimum,
}

/// Rosenbrock on `[-2, 6]²` for `d = 2` (wide enough for the `(2, 4)` valley
/// entry point) and `[-2.048, 2.048]^d` otherwise.
pub fn rosenbrock(d: usize) -> Result<Rosenbrock> {
    if d < 2 {
        return Err(config_err("rosenbrock needs d >= 2"));
    }
    let bounds = if d == 2 {
        DomainBounds::hypercube(2, -2.0, 6.0)?
    } else {
        DomainBounds::hypercube(d, -2.048, 2.048)?
    };
    Ok(Rosenbrock {
        bounds,
        optimum: Optimum {
            point: vec![1.0; d],
            value: 0.0,
        },
    })
}

impl Objective for Rosenbrock {
    fn name(&self) -> &str {
        "rosenbrock"
    }
    fn bounds(&self) -> &DomainBounds {
        &self.bounds
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| {
                let a = w[1] - w[0] * w[0];
                let b = 1.0 - w[0];
                100.0 * a * a + b * b
            })
            .sum()
    }
    fn optimum(&self) -> Option<&Optimum> {
        Some(&self.optimum)
    }
}

/// `‖x‖²` on `[-1.5, 1.5]^d`.
#[derive(Debug, Clone)]
pub struct Paraboloid {
    bounds: DomainBounds,
    optimum: Optimum,
}

pub fn paraboloid(d: usize) -> Result<Paraboloid> {
    if d < 1 {
        return Err(config_err("paraboloid needs d >= 1"));
    }
    Ok(Paraboloid {
        bounds: DomainBounds::hypercube(d, -1.5, 1.5)?,
        optimum: Optimum {
            point: vec![0.0; d],
            value: 0.0,
        },
    })
}

impl Objective for Paraboloid {
    fn name(&self) -> &str {
        "paraboloid"
    }
    fn bounds(&self) -> &DomainBounds {
        &self.bounds
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }
    fn optimum(&self) -> Option<&Optimum> {
        Some(&self.optimum)
    }
}

/// Classical Branin on `[-5, 10] × [0, 15]`.
#[derive(Debug, Clone)]
pub struct Branin {
    bounds: DomainBounds,
    optimum: Optimum,
}

impl Branin {
    /// The three global minimizers.
    pub const MINIMIZERS: [[f64; 2]; 3] = [[-PI, 12.275], [PI, 2.275], [3.0 * PI, 2.475]];

    /// `s·t = 10 / (8π)`.
    pub const MIN_VALUE: f64 = 5.0 / (4.0 * PI);
}

pub fn branin2() -> Branin {
    Branin {
        bounds: DomainBounds::new(vec![-5.0, 0.0], vec![10.0, 15.0]).expect("static bounds"),
        optimum: Optimum {
            point: vec![PI, 2.275],
            value: Branin::MIN_VALUE,
        },
    }
}

impl Objective for Branin {
    fn name(&self) -> &str {
        "branin2"
    }
    fn bounds(&self) -> &DomainBounds {
        &self.bounds
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        let b = 5.1 / (4.0 * PI * PI);
        let c = 5.0 / PI;
        let t = 1.0 / (8.0 * PI);
        let q = x2 - b * x1 * x1 + c * x1 - 6.0;
        q * q + 10.0 * (1.0 - t) * libm::cos(x1) + 10.0
    }
    fn optimum(&self) -> Option<&Optimum> {
        Some(&self.optimum)
    }
}

const HARTMANN6_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

const HARTMANN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];

const HARTMANN6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

/// Global minimizer of Hartmann6, refined to ~1e-10 by local descent.
pub const HARTMANN6_MINIMIZER: [f64; 6] = [
    0.201_689_509_093_657_5,
    0.150_010_693_541_113_7,
    0.476_873_972_925_099_8,
    0.275_332_427_522_078_2,
    0.311_651_617_239_568_6,
    0.657_300_534_553_670_2,
];

pub const HARTMANN6_MIN_VALUE: f64 = -3.322_368_011_415_515;

/// Value of the strongest non-global local minimum, near
/// `(0.405, 0.882, 0.846, 0.574, 0.139, 0.038)`.
pub const HARTMANN6_LOCAL_MIN: f64 = -3.203_161_918_396_231;

/// Six-dimensional Hartmann function on `[0, 1]^6`.
#[derive(Debug, Clone)]
pub struct Hartmann6 {
    bounds: DomainBounds,
    optimum: Optimum,
}

pub fn hartmann6() -> Hartmann6 {
    Hartmann6 {
        bounds: DomainBounds::hypercube(6, 0.0, 1.0).expect("static bounds"),
        optimum: Optimum {
            point: Vec::from(HARTMANN6_MINIMIZER),
            value: HARTMANN6_MIN_VALUE,
        },
    }
}

impl Objective for Hartmann6 {
    fn name(&self) -> &str {
        "hartmann6"
    }
    fn bounds(&self) -> &DomainBounds {
        &self.bounds
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..4 {
            let inner: f64 = (0..6)
                .map(|j| {
                    let d = x[j] - HARTMANN6_P[i][j];
                    HARTMANN6_A[i][j] * d * d
                })
                .sum();
            total -= HARTMANN6_ALPHA[i] * libm::exp(-inner);
        }
        total
    }
    fn optimum(&self) -> Option<&Optimum> {
        Some(&self.optimum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_values() {
        let f = rosenbrock(2).unwrap();
        assert_eq!(f.evaluate(&[1.0, 1.0]), 0.0);
        assert_eq!(f.evaluate(&[0.0, 0.0]), 1.0);
        assert_eq!(f.evaluate(&[2.0, 4.0]), 1.0);
        assert!(f.bounds().contains(&[2.0, 4.0]));
        assert!(rosenbrock(1).is_err());
        let f5 = rosenbrock(5).unwrap();
        assert_eq!(f5.bounds().upper()[0], 2.048);
        assert_eq!(f5.evaluate(&[1.0; 5]), 0.0);
    }

    #[test]
    fn paraboloid_values() {
        let f = paraboloid(100).unwrap();
        assert_eq!(f.evaluate(&[0.0; 100]), 0.0);
        let mut e = [0.0; 100];
        e[17] = 1.0;
        assert_eq!(f.evaluate(&e), 1.0);
        assert_eq!(f.evaluate(&[1.5; 100]), 225.0);
        assert!(paraboloid(0).is_err());
    }

    #[test]
    fn branin_minimizers_agree() {
        let f = branin2();
        let a = f.evaluate(&[PI, 2.275]);
        assert!((a - 0.397887).abs() < 1e-6);
        assert!((f.evaluate(&[-PI, 12.275]) - a).abs() < 1e-9);
        for m in Branin::MINIMIZERS {
            assert!((f.evaluate(&m) - Branin::MIN_VALUE).abs() < 1e-4);
        }
        // a r² + s (1 - t) + s with r = 6
        let origin = 36.0 + 10.0 * (1.0 - 1.0 / (8.0 * PI)) + 10.0;
        assert!((f.evaluate(&[0.0, 0.0]) - origin).abs() < 1e-12);
    }

    #[test]
    fn hartmann_center_is_above_minimum() {
        let f = hartmann6();
        let c = f.evaluate(&[0.5; 6]);
        assert!((c - -0.505_314_991_702_233_3).abs() < 1e-12);
        assert!(c > HARTMANN6_MIN_VALUE);
        let published = [0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573];
        assert!((f.evaluate(&published) - -3.32237).abs() < 1e-5);
    }
}
