//! The exponential-kernel copula
//!
//! ```text
//! C(u, v) = uv + δ (1 − e^{α(u−u²)}) (1 − e^{α(v−v²)})
//! ```
//!
//! with its density, conditional distribution, conditional quantile and a
//! conditional-inversion sampler. The Farlie–Gumbel–Morgenstern copula is
//! included as a baseline for dependence-range comparisons.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest |α| accepted; keeps e^{α/4} and the erfi arguments in range.
pub const ALPHA_LIMIT: f64 = 100.0;

/// Slack on |δ| ≤ δ*(α) so that a boundary value survives a round trip.
pub const DELTA_SLACK: f64 = 1e-12;

/// Sharp feasibility bound on |δ| for a given α ≠ 0.
///
/// `1/α²` for α ≤ 2 and `e^{1−α/2}/(2α)` for α > 2; both branches equal 1/4
/// at α = 2.
pub fn delta_star(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha.abs() > ALPHA_LIMIT {
        return Err(domain(
            "delta_star",
            format!("|alpha| must be at most {ALPHA_LIMIT}, got {alpha}"),
        ));
    }
    if alpha == 0.0 {
        return Err(domain(
            "delta_star",
            "alpha = 0 gives the product copula for every delta; the bound is undefined",
        ));
    }
    Ok(if alpha <= 2.0 {
        1.0 / (alpha * alpha)
    } else {
        (1.0 - alpha / 2.0).exp() / (2.0 * alpha)
    })
}

/// A validated `(α, δ)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaParams {
    alpha: f64,
    delta: f64,
}

impl CopulaParams {
    /// Validates `(alpha, delta)`. At α = 0 the copula is the product copula
    /// whatever δ is, so δ is normalized to 0.
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha.abs() > ALPHA_LIMIT {
            return Err(domain(
                "CopulaParams::new",
                format!("|alpha| must be at most {ALPHA_LIMIT}, got {alpha}"),
            ));
        }
        if !delta.is_finite() {
            return Err(domain(
                "CopulaParams::new",
                format!("delta must be finite, got {delta}"),
            ));
        }
        if alpha == 0.0 {
            return Ok(Self { alpha, delta: 0.0 });
        }
        let bound = delta_star(alpha)?;
        if delta.abs() > bound + DELTA_SLACK {
            return Err(Error::Infeasible {
                alpha,
                delta_abs: delta.abs(),
                bound,
            });
        }
        Ok(Self { alpha, delta })
    }

    /// The product copula.
    pub fn independence() -> Self {
        Self {
            alpha: 0.0,
            delta: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `1 − e^{α t(1−t)}`; vanishes at t = 0 and t = 1.
    #[inline]
    pub(crate) fn kernel(&self, t: f64) -> f64 {
        -(self.alpha * t * (1.0 - t)).exp_m1()
    }

    /// `(1 − 2t) e^{α t(1−t)}`, the factor whose product gives the density.
    #[inline]
    pub(crate) fn density_factor(&self, t: f64) -> f64 {
        (1.0 - 2.0 * t) * (self.alpha * t * (1.0 - t)).exp()
    }

    /// `δα²`, the amplitude of the density correction.
    #[inline]
    pub(crate) fn amplitude(&self) -> f64 {
        self.delta * self.alpha * self.alpha
    }
}

/// A point of the closed unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSquarePoint {
    pub u: f64,
    pub v: f64,
}

impl UnitSquarePoint {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(domain(
                "UnitSquarePoint::new",
                format!("coordinates must lie in [0, 1], got ({u}, {v})"),
            ));
        }
        Ok(Self { u, v })
    }
}

/// Copula distribution function C(u, v).
pub fn cdf(p: &CopulaParams, pt: UnitSquarePoint) -> f64 {
    pt.u * pt.v + p.delta * (p.kernel(pt.u) * p.kernel(pt.v))
}

/// Copula density `1 + δα²(1−2u)(1−2v)e^{α(u−u²+v−v²)}`.
pub fn pdf(p: &CopulaParams, pt: UnitSquarePoint) -> f64 {
    1.0 + p.amplitude() * (p.density_factor(pt.u) * p.density_factor(pt.v))
}

/// `P(V ≤ v | U = u) = ∂C/∂u`.
///
/// The formula is valid on the closed square; it equals 0 at v = 0 and 1 at
/// v = 1 for every u.
pub fn conditional_cdf(p: &CopulaParams, u: f64, v: f64) -> f64 {
    v - p.delta * p.alpha * p.density_factor(u) * p.kernel(v)
}

/// Inverse of [`conditional_cdf`] in `v`, by bisection on [0, 1].
///
/// Bisection rather than Newton because the derivative (the density) has
/// isolated zeros when |δ| = δ*(α).
pub fn conditional_quantile(p: &CopulaParams, u: f64, q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    if p.delta == 0.0 {
        return q;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if conditional_cdf(p, u, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick whichever end of the final bracket is closer in probability.
    let flo = (conditional_cdf(p, u, lo) - q).abs();
    let fhi = (conditional_cdf(p, u, hi) - q).abs();
    if flo < fhi {
        lo
    } else {
        hi
    }
}

/// Draws `n` i.i.d. points by conditional inversion: `u ~ U(0,1)`, then
/// `v = conditional_quantile(u, w)` with an independent `w ~ U(0,1)`.
///
/// Output is a deterministic function of `(p, n, seed)`.
pub fn sample(p: &CopulaParams, n: usize, seed: u64) -> Vec<UnitSquarePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            let w: f64 = rng.sample(Open01);
            UnitSquarePoint {
                u,
                v: conditional_quantile(p, u, w),
            }
        })
        .collect()
}

/// Farlie–Gumbel–Morgenstern copula `uv + θuv(1−u)(1−v)`, |θ| ≤ 1.
pub fn fgm_cdf(theta: f64, pt: UnitSquarePoint) -> Result<f64> {
    if !(theta.abs() <= 1.0) {
        return Err(domain(
            "fgm_cdf",
            format!("|theta| must be at most 1, got {theta}"),
        ));
    }
    let uv = pt.u * pt.v;
    Ok(uv + theta * uv * (1.0 - pt.u) * (1.0 - pt.v))
}
