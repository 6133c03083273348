//! Gauss–Legendre rules and tensor-product integration on rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
///
/// Roots are found by Newton iteration on the three-term recurrence,
/// starting from Tricomi's asymptotic guess; symmetric pairs are mirrored.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A rule mapped onto a finite interval.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn on_interval(n: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self {
            nodes: x.iter().map(|&t| mid + half * t).collect(),
            weights: w.iter().map(|&wi| half * wi).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Tensor-product rule with itself.
    pub fn integrate_2d(&self, other: &Rule, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &wx)| {
                wx * other
                    .nodes
                    .iter()
                    .zip(&other.weights)
                    .map(|(&y, &wy)| wy * f(x, y))
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Node count and acceptance tolerance for adaptive tensor quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    pub abs_tol: f64,
}

impl QuadratureSpec {
    pub fn new(nodes_per_axis: usize, abs_tol: f64) -> Result<Self> {
        if nodes_per_axis < 8 {
            return Err(domain(
                "QuadratureSpec::new",
                "nodes_per_axis must be at least 8",
            ));
        }
        if !(abs_tol > 0.0) {
            return Err(domain("QuadratureSpec::new", "abs_tol must be positive"));
        }
        Ok(Self {
            nodes_per_axis,
            abs_tol,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_axis: 128,
            abs_tol: 1e-10,
        }
    }
}

/// Most node doublings attempted before giving up.
const MAX_DOUBLINGS: u32 = 3;

/// Evaluates `eval(rule)` at `spec.nodes_per_axis` nodes and again at twice
/// as many, doubling until two successive results agree within `abs_tol`.
/// Returns the finer result.
pub fn refine<const K: usize>(
    spec: &QuadratureSpec,
    a: f64,
    b: f64,
    eval: impl Fn(&Rule) -> [f64; K],
) -> Result<[f64; K]> {
    let mut n = spec.nodes_per_axis;
    let mut coarse = eval(&Rule::on_interval(n, a, b));
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        n *= 2;
        let fine = eval(&Rule::on_interval(n, a, b));
        change = coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| (c - f).abs())
            .fold(0.0, f64::max);
        if change <= spec.abs_tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::ToleranceNotReached {
        abs_tol: spec.abs_tol,
        change,
        nodes: n,
    })
}
