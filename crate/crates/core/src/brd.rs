//! Bivariate Rayleigh distribution: Rayleigh(λ₁) and Rayleigh(λ₂) marginals
//! joined by the exponential-kernel copula.
//!
//! Most formulas here are written in terms of the marginal survival
//! `S = e^{−x²/2λ²}` rather than the CDF `F = 1 − S`, which keeps the upper
//! tail accurate: the copula kernel `u(1−u)` becomes `(1−S)S` and
//! `1 − 2u` becomes `2S − 1`.

use serde::{Deserialize, Serialize};

use crate::copula::{self, CopulaParams};
use crate::error::{domain, Error, Result};
use crate::special::{ln_gamma, AccuracyBudget};

fn check_scale(func: &'static str, lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(
            func,
            format!("scale must be positive and finite, got {lambda}"),
        ));
    }
    Ok(())
}

fn check_support(func: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(domain(
            func,
            format!("argument must be nonnegative, got {x}"),
        ));
    }
    Ok(())
}

#[inline]
fn survival(x: f64, lambda: f64) -> f64 {
    let z = x / lambda;
    (-0.5 * z * z).exp()
}

/// Rayleigh CDF `1 − e^{−x²/2λ²}`.
pub fn rayleigh_cdf(x: f64, lambda: f64) -> Result<f64> {
    check_scale("rayleigh_cdf", lambda)?;
    check_support("rayleigh_cdf", x)?;
    let z = x / lambda;
    Ok(-(-0.5 * z * z).exp_m1())
}

/// Rayleigh density `(x/λ²) e^{−x²/2λ²}`.
pub fn rayleigh_pdf(x: f64, lambda: f64) -> Result<f64> {
    check_scale("rayleigh_pdf", lambda)?;
    check_support("rayleigh_pdf", x)?;
    Ok(x / (lambda * lambda) * survival(x, lambda))
}

/// Rayleigh quantile `λ √(−2 ln(1 − p))` for p in [0, 1).
pub fn rayleigh_quantile(prob: f64, lambda: f64) -> Result<f64> {
    check_scale("rayleigh_quantile", lambda)?;
    if !(0.0..1.0).contains(&prob) {
        return Err(domain(
            "rayleigh_quantile",
            format!("probability must lie in [0, 1), got {prob}"),
        ));
    }
    Ok(lambda * (-2.0 * (-prob).ln_1p()).sqrt())
}

/// Log-density of Rayleigh(λ), `ln x − 2 ln λ − x²/2λ²`.
fn rayleigh_ln_pdf(x: f64, lambda: f64) -> f64 {
    let z = x / lambda;
    x.ln() - 2.0 * lambda.ln() - 0.5 * z * z
}

/// Validated `(λ₁, λ₂, α, δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrdParams {
    lambda1: f64,
    lambda2: f64,
    copula: CopulaParams,
}

impl BrdParams {
    pub fn new(lambda1: f64, lambda2: f64, alpha: f64, delta: f64) -> Result<Self> {
        check_scale("BrdParams::new", lambda1)?;
        check_scale("BrdParams::new", lambda2)?;
        Ok(Self {
            lambda1,
            lambda2,
            copula: CopulaParams::new(alpha, delta)?,
        })
    }

    pub fn from_copula(lambda1: f64, lambda2: f64, copula: CopulaParams) -> Result<Self> {
        check_scale("BrdParams::from_copula", lambda1)?;
        check_scale("BrdParams::from_copula", lambda2)?;
        Ok(Self {
            lambda1,
            lambda2,
            copula,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn alpha(&self) -> f64 {
        self.copula.alpha()
    }

    pub fn delta(&self) -> f64 {
        self.copula.delta()
    }

    pub fn copula(&self) -> &CopulaParams {
        &self.copula
    }

    /// `δα²(2S₁−1)(2S₂−1) e^{α(S₁(1−S₁) + S₂(1−S₂))}`, the copula density minus one.
    fn density_correction(&self, s1: f64, s2: f64) -> f64 {
        let a = self.alpha();
        let g1 = (2.0 * s1 - 1.0) * (a * s1 * (1.0 - s1)).exp();
        let g2 = (2.0 * s2 - 1.0) * (a * s2 * (1.0 - s2)).exp();
        self.delta() * a * a * g1 * g2
    }

    /// `1 − e^{α F S}` for a marginal with CDF F and survival S.
    fn kernel(&self, s: f64) -> f64 {
        -(self.alpha() * (1.0 - s) * s).exp_m1()
    }
}

/// Orders `(r, s)` of the product moment `E[XʳYˢ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentOrder {
    r: u32,
    s: u32,
}

impl MomentOrder {
    pub fn new(r: u32, s: u32) -> Result<Self> {
        if r + s == 0 {
            return Err(domain("MomentOrder::new", "r + s must be at least 1"));
        }
        Ok(Self { r, s })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }
}

/// Joint CDF `C(F₁(x), F₂(y))`.
pub fn joint_cdf(p: &BrdParams, x: f64, y: f64) -> Result<f64> {
    check_support("joint_cdf", x)?;
    check_support("joint_cdf", y)?;
    let (s1, s2) = (survival(x, p.lambda1), survival(y, p.lambda2));
    let (f1, f2) = (rayleigh_cdf(x, p.lambda1)?, rayleigh_cdf(y, p.lambda2)?);
    Ok(f1 * f2 + p.delta() * p.kernel(s1) * p.kernel(s2))
}

/// Joint density: product of the marginal densities times the copula density.
pub fn joint_pdf(p: &BrdParams, x: f64, y: f64) -> Result<f64> {
    check_support("joint_pdf", x)?;
    check_support("joint_pdf", y)?;
    let (s1, s2) = (survival(x, p.lambda1), survival(y, p.lambda2));
    let marg = x / (p.lambda1 * p.lambda1) * s1 * y / (p.lambda2 * p.lambda2) * s2;
    Ok((marg * (1.0 + p.density_correction(s1, s2))).max(0.0))
}

/// Log of [`joint_pdf`], formed from log-marginals and `ln_1p` of the copula
/// correction so that it stays finite far into the tails. Returns −∞ where
/// the density vanishes.
pub fn joint_log_pdf(p: &BrdParams, x: f64, y: f64) -> Result<f64> {
    check_support("joint_log_pdf", x)?;
    check_support("joint_log_pdf", y)?;
    if x == 0.0 || y == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let (s1, s2) = (survival(x, p.lambda1), survival(y, p.lambda2));
    let corr = p.density_correction(s1, s2);
    if corr <= -1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(rayleigh_ln_pdf(x, p.lambda1) + rayleigh_ln_pdf(y, p.lambda2) + corr.ln_1p())
}

/// Conditional density of X given Y = y.
pub fn conditional_pdf(p: &BrdParams, x: f64, given_y: f64) -> Result<f64> {
    check_support("conditional_pdf", x)?;
    if !(given_y > 0.0) {
        return Err(domain(
            "conditional_pdf",
            format!("given_y must be positive, got {given_y}"),
        ));
    }
    let (s1, s2) = (survival(x, p.lambda1), survival(given_y, p.lambda2));
    let marg = x / (p.lambda1 * p.lambda1) * s1;
    Ok((marg * (1.0 + p.density_correction(s1, s2))).max(0.0))
}

/// Conditional distribution function of X given Y = y,
/// `F₁(x) + δα(e^{αF₁S₁} − 1)(2S₂ − 1)e^{αF₂S₂}`.
pub fn conditional_cdf_brd(p: &BrdParams, x: f64, given_y: f64) -> Result<f64> {
    check_support("conditional_cdf_brd", x)?;
    if !(given_y > 0.0) {
        return Err(domain(
            "conditional_cdf_brd",
            format!("given_y must be positive, got {given_y}"),
        ));
    }
    let (s1, s2) = (survival(x, p.lambda1), survival(given_y, p.lambda2));
    let f1 = rayleigh_cdf(x, p.lambda1)?;
    let a = p.alpha();
    let tilt = (2.0 * s2 - 1.0) * (a * (1.0 - s2) * s2).exp();
    Ok(f1 - p.delta() * a * p.kernel(s1) * tilt)
}

/// `Σ_k (α^k/k!) Σ_t (−1)^t C(k,t) [2(k+t+2)^{−(m+2)/2} − (k+t+1)^{−(m+2)/2}]`,
/// equal to `∫₀¹ (−ln S)^{m/2} (2S − 1) e^{αS(1−S)} dS / Γ(1 + m/2)`.
///
/// The inner alternating sums cancel heavily once |α| grows; the summed
/// magnitudes are tracked and the result is rejected when rounding could
/// exceed the budget.
pub fn moment_series(alpha: f64, m: u32, budget: &AccuracyBudget) -> Result<f64> {
    let q = (f64::from(m) + 2.0) / 2.0;
    let mut total = 0.0;
    let mut magnitude = 0.0;
    // coef = α^k / k!
    let mut coef = 1.0;
    let mut small_run = 0;
    for k in 0..budget.max_terms {
        if k > 0 {
            coef *= alpha / k as f64;
        }
        let mut inner = 0.0;
        let mut inner_mag = 0.0;
        let mut binom = 1.0;
        for t in 0..=k {
            if t > 0 {
                binom *= (k - t + 1) as f64 / t as f64;
            }
            let base = (k + t) as f64;
            let piece = binom * (2.0 * (base + 2.0).powf(-q) - (base + 1.0).powf(-q));
            inner += if t % 2 == 0 { piece } else { -piece };
            inner_mag += piece.abs();
        }
        let term = coef * inner;
        total += term;
        magnitude += (coef * inner_mag).abs();
        if term.abs() < budget.abs_tol {
            small_run += 1;
            if small_run >= 2 {
                let rounding = 8.0 * f64::EPSILON * magnitude;
                if rounding > budget.abs_tol.max(1e-12 * total.abs()) {
                    return Err(Error::Truncation(format!(
                        "moment series for alpha = {alpha}, m = {m} lost precision \
                         (rounding bound {rounding:e})"
                    )));
                }
                return Ok(total);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::Truncation(format!(
        "moment series for alpha = {alpha}, m = {m} still above {:e} after {} terms",
        budget.abs_tol, budget.max_terms
    )))
}

/// `E[Xʳ]` for Rayleigh(λ): `λʳ 2^{r/2} Γ(1 + r/2)`.
fn marginal_moment(lambda: f64, r: u32) -> Result<f64> {
    let rf = f64::from(r);
    Ok(lambda.powf(rf) * 2f64.powf(rf / 2.0) * ln_gamma(1.0 + rf / 2.0)?.exp())
}

/// Product moment
/// `E[XʳYˢ] = λ₁ʳλ₂ˢ 2^{(r+s)/2} Γ(1+r/2) Γ(1+s/2) [1 + δα² S_r S_s]`,
/// with `S_m` from [`moment_series`]. The scales enter only through the
/// prefactor.
pub fn product_moment(p: &BrdParams, ord: MomentOrder, budget: &AccuracyBudget) -> Result<f64> {
    let base = marginal_moment(p.lambda1, ord.r)? * marginal_moment(p.lambda2, ord.s)?;
    let amp = p.delta() * p.alpha() * p.alpha();
    // S_0 vanishes identically (the integrand is odd about S = 1/2).
    if amp == 0.0 || ord.r == 0 || ord.s == 0 {
        return Ok(base);
    }
    let sr = moment_series(p.alpha(), ord.r, budget)?;
    let ss = moment_series(p.alpha(), ord.s, budget)?;
    Ok(base * (1.0 + amp * sr * ss))
}

/// Draws `n` pairs by pushing copula draws through the marginal quantiles.
/// Deterministic per seed; shares its uniforms with [`copula::sample`].
pub fn sample_brd(p: &BrdParams, n: usize, seed: u64) -> Vec<(f64, f64)> {
    copula::sample(&p.copula, n, seed)
        .into_iter()
        .map(|pt| {
            (
                p.lambda1 * (-2.0 * (-pt.u).ln_1p()).sqrt(),
                p.lambda2 * (-2.0 * (-pt.v).ln_1p()).sqrt(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Rule;

    fn brd(l1: f64, l2: f64, a: f64, d: f64) -> BrdParams {
        BrdParams::new(l1, l2, a, d).unwrap()
    }

    #[test]
    fn rayleigh_marginal_basics() {
        assert_eq!(rayleigh_cdf(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(rayleigh_quantile(0.0, 3.0).unwrap(), 0.0);
        let median = 3.0 * (2.0 * 2f64.ln()).sqrt();
        assert!((rayleigh_cdf(median, 3.0).unwrap() - 0.5).abs() < 1e-15);
        for p in [1e-9, 0.1, 0.5, 0.9, 0.999_999] {
            let x = rayleigh_quantile(p, 2.5).unwrap();
            assert!((rayleigh_cdf(x, 2.5).unwrap() - p).abs() < 1e-12);
        }
        assert!(rayleigh_cdf(-1.0, 1.0).is_err());
        assert!(rayleigh_pdf(1.0, 0.0).is_err());
        assert!(rayleigh_quantile(1.0, 1.0).is_err());
        let r = Rule::on_interval(128, 0.0, 12.0 * 1.7);
        let mean = r.integrate(|x| x * rayleigh_pdf(x, 1.7).unwrap());
        assert!((mean - 1.7 * (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn joint_cdf_properties() {
        let p = brd(3.0, 2.0, 2.0, 0.2);
        let x = 2.2;
        assert!((joint_cdf(&p, x, 1e9).unwrap() - rayleigh_cdf(x, 3.0).unwrap()).abs() < 1e-12);
        let ind = brd(3.0, 2.0, 2.0, 0.0);
        let want = rayleigh_cdf(1.0, 3.0).unwrap() * rayleigh_cdf(1.5, 2.0).unwrap();
        assert_eq!(joint_cdf(&ind, 1.0, 1.5).unwrap(), want);
        assert!(BrdParams::new(3.0, 2.0, 3.8, 0.5).is_err());
        assert!(joint_cdf(&p, -1.0, 1.0).is_err());
        // Same value as the copula at the marginal CDFs.
        let u = rayleigh_cdf(2.0, 3.0).unwrap();
        let v = rayleigh_cdf(1.0, 2.0).unwrap();
        let c = copula::cdf(p.copula(), copula::UnitSquarePoint { u, v });
        assert!((joint_cdf(&p, 2.0, 1.0).unwrap() - c).abs() < 1e-15);
    }

    #[test]
    fn joint_pdf_basics() {
        let ind = brd(1.5, 0.5, -2.0, 0.0);
        let want = rayleigh_pdf(1.0, 1.5).unwrap() * rayleigh_pdf(0.4, 0.5).unwrap();
        assert!((joint_pdf(&ind, 1.0, 0.4).unwrap() - want).abs() < 1e-15);
        let p = brd(1.5, 0.5, -2.0, 0.2);
        let xm = 1.5 * (2.0 * 2f64.ln()).sqrt();
        let want = rayleigh_pdf(xm, 1.5).unwrap() * rayleigh_pdf(0.3, 0.5).unwrap();
        assert!((joint_pdf(&p, xm, 0.3).unwrap() - want).abs() < 1e-15);
        let lp = joint_log_pdf(&p, 1.1, 0.7).unwrap();
        assert!((lp - joint_pdf(&p, 1.1, 0.7).unwrap().ln()).abs() < 1e-13);
        // Deep tail stays finite in log form.
        assert!(joint_log_pdf(&p, 40.0 * 1.5, 40.0 * 0.5)
            .unwrap()
            .is_finite());
        assert_eq!(joint_log_pdf(&p, 0.0, 1.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn conditional_forms() {
        let p = brd(2.0, 3.0, 1.5, 0.4);
        let ind = brd(2.0, 3.0, 1.5, 0.0);
        assert_eq!(
            conditional_pdf(&ind, 1.3, 2.0).unwrap(),
            rayleigh_pdf(1.3, 2.0).unwrap()
        );
        assert_eq!(
            conditional_cdf_brd(&ind, 1.3, 2.0).unwrap(),
            rayleigh_cdf(1.3, 2.0).unwrap()
        );
        assert!(conditional_pdf(&p, 1.0, 0.0).is_err());
        // Matches the symmetric copula's conditional distribution.
        let u = rayleigh_cdf(1.3, 2.0).unwrap();
        let v = rayleigh_cdf(2.5, 3.0).unwrap();
        let want = copula::conditional_cdf(p.copula(), v, u);
        assert!((conditional_cdf_brd(&p, 1.3, 2.5).unwrap() - want).abs() < 1e-14);
        let mut prev = 0.0;
        for i in 0..=200 {
            let x = i as f64 * 0.1;
            let f = conditional_cdf_brd(&p, x, 2.5).unwrap();
            assert!(f >= prev - 1e-15);
            prev = f;
        }
        assert!((prev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_series_zero_order_vanishes() {
        let b = AccuracyBudget::default();
        for a in [-5.0, -1.0, 0.3, 2.0, 5.0] {
            assert!(moment_series(a, 0, &b).unwrap().abs() < 1e-12, "alpha {a}");
        }
    }

    #[test]
    fn moment_series_matches_integral() {
        // ∫₀¹ (−ln S)^{m/2} (2S − 1) e^{αS(1−S)} dS / Γ(1 + m/2), with S = e^{−z²/2}.
        let b = AccuracyBudget::default();
        let r = Rule::on_interval(200, 0.0, 12.0);
        for (a, m) in [(2.0, 1u32), (-3.0, 2), (3.8, 3), (0.287, 1)] {
            let mf = f64::from(m);
            let integral = r.integrate(|z| {
                let s = (-0.5 * z * z).exp();
                (0.5 * z * z).powf(mf / 2.0) * (2.0 * s - 1.0) * (a * s * (1.0 - s)).exp() * z * s
            });
            let want = integral / ln_gamma(1.0 + mf / 2.0).unwrap().exp();
            let got = moment_series(a, m, &b).unwrap();
            assert!(
                (got - want).abs() < 1e-11,
                "alpha {a}, m {m}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn moment_series_rejects_hopeless_cancellation() {
        let b = AccuracyBudget::default();
        assert!(matches!(
            moment_series(-80.0, 2, &b),
            Err(Error::Truncation(_))
        ));
        let tight = AccuracyBudget::new(1e-12, 3).unwrap();
        assert!(matches!(
            moment_series(4.0, 2, &tight),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn product_moment_special_cases() {
        let b = AccuracyBudget::default();
        let ind = brd(2.0, 3.0, 1.0, 0.0);
        let m11 = product_moment(&ind, MomentOrder::new(1, 1).unwrap(), &b).unwrap();
        assert!((m11 - 6.0 * std::f64::consts::PI / 2.0).abs() < 1e-12);
        let p = brd(2.0, 3.0, 1.0, 0.7);
        let m20 = product_moment(&p, MomentOrder::new(2, 0).unwrap(), &b).unwrap();
        assert!((m20 - 2.0 * 4.0).abs() < 1e-12);
        assert!(MomentOrder::new(0, 0).is_err());
    }

    #[test]
    fn sampler_maps_copula_draws() {
        let p = brd(3.0, 2.0, -1.0, 0.9);
        let xy = sample_brd(&p, 100, 4);
        let uv = copula::sample(p.copula(), 100, 4);
        for ((x, y), pt) in xy.iter().zip(&uv) {
            assert!((rayleigh_cdf(*x, 3.0).unwrap() - pt.u).abs() < 1e-12);
            assert!((rayleigh_cdf(*y, 2.0).unwrap() - pt.v).abs() < 1e-12);
        }
    }
}
