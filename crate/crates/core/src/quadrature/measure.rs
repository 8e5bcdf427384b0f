use std::f64::consts::PI;

use super::jacobi::{gauss_jacobi_cached, jacobi_mass};
use super::QuadratureRule;
use crate::error::{domain, Result};

/// `Γ(ν+1) / (√π Γ(ν+1/2))`, the normalizer of `G_ν`.
pub fn g_normalizer(nu: f64) -> f64 {
    (libm::lgamma(nu + 1.0) - libm::lgamma(nu + 0.5) - 0.5 * PI.ln()).exp()
}

/// `2 Γ(λ+1/2) / (Γ(ν+1/2) Γ(λ-ν))`, the normalizer of `H_ν^λ`.
pub fn h_normalizer(lambda: f64, nu: f64) -> f64 {
    2.0 * (libm::lgamma(lambda + 0.5) - libm::lgamma(nu + 0.5) - libm::lgamma(lambda - nu)).exp()
}

/// Density of `G_ν(dy) ∝ (1-y²)^{ν-1/2} dy` on `(-1, 1)`.
///
/// Any `ν > -1/2` gives a probability measure; `ν = 0` is the arcsine law.
pub fn density_g(nu: f64, y: f64) -> Result<f64> {
    GMeasure::new(nu)?.density(y)
}

/// Density of the Sonine law `H_ν^λ(du) ∝ u^{2ν} (1-u²)^{λ-ν-1} du` on `(0, 1)`.
pub fn density_h(lambda: f64, nu: f64, u: f64) -> Result<f64> {
    HMeasure::new(lambda, nu)?.density(u)
}

/// The probability measure `G_ν` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMeasure {
    index: f64,
}

impl GMeasure {
    pub fn new(index: f64) -> Result<Self> {
        if index > -0.5 && index.is_finite() {
            Ok(Self { index })
        } else {
            Err(domain("GMeasure", format!("index must be > -1/2, got {index}")))
        }
    }

    pub fn index(&self) -> f64 {
        self.index
    }

    fn exponent(&self) -> f64 {
        self.index - 0.5
    }

    pub fn density(&self, y: f64) -> Result<f64> {
        let e = self.exponent();
        let inside = y.abs() < 1.0 || (y.abs() == 1.0 && e >= 0.0);
        if !inside {
            return Err(domain(
                "density_g",
                format!("y = {y} outside the support of G_{} (density exponent {e})", self.index),
            ));
        }
        let base = (1.0 - y) * (1.0 + y);
        Ok(g_normalizer(self.index) * if e == 0.0 { 1.0 } else { base.powf(e) })
    }

    /// `q`-point Gauss rule whose weights sum to one.
    pub fn rule(&self, q: usize) -> Result<QuadratureRule> {
        let e = self.exponent();
        let base = gauss_jacobi_cached(e, e, q)?;
        let c = g_normalizer(self.index);
        let mut rule = base.rule.clone();
        for w in &mut rule.weights {
            *w *= c;
        }
        Ok(rule)
    }
}

/// The Sonine law `H_ν^λ` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HMeasure {
    lower: f64,
    upper: f64,
}

impl HMeasure {
    pub fn new(lambda: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(domain("HMeasure", format!("lower index must be > 0, got {nu}")));
        }
        if !(lambda > nu && lambda.is_finite()) {
            return Err(domain(
                "HMeasure",
                format!("upper index must exceed the lower one, got lambda = {lambda}, nu = {nu}"),
            ));
        }
        Ok(Self {
            lower: nu,
            upper: lambda,
        })
    }

    pub fn lower_index(&self) -> f64 {
        self.lower
    }

    pub fn upper_index(&self) -> f64 {
        self.upper
    }

    /// Exponent of `(1 - u²)`.
    pub fn tail_exponent(&self) -> f64 {
        self.upper - self.lower - 1.0
    }

    pub fn density(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain("density_h", format!("u must lie in (0, 1), got {u}")));
        }
        let c = h_normalizer(self.upper, self.lower);
        Ok(c * u.powf(2.0 * self.lower) * ((1.0 - u) * (1.0 + u)).powf(self.tail_exponent()))
    }

    /// `q`-point rule for `∫ f dH_ν^λ`, exact for polynomials in `u²` of
    /// degree `2q - 1`.
    pub fn rule(&self, q: usize) -> Result<QuadratureRule> {
        sonine_rule(self.lower, self.tail_exponent(), q, true)
    }
}

/// Rule for `∫_0^1 u^{2ν} (1-u²)^s f(u) du` built from the substitution
/// `w = u²`, i.e. a Gauss-Jacobi rule with `α = s`, `β = ν - 1/2` in
/// `t = 2w - 1`. With `normalized`, the weights sum to one.
pub fn sonine_rule(nu: f64, s: f64, q: usize, normalized: bool) -> Result<QuadratureRule> {
    let (alpha, beta) = (s, nu - 0.5);
    let base = gauss_jacobi_cached(alpha, beta, q)?;
    // ∫_0^1 u^{2ν}(1-u²)^s f du = 2^{-(α+β+2)} ∫ (1-t)^α (1+t)^β f(√((1+t)/2)) dt
    let scale = if normalized {
        1.0 / jacobi_mass(alpha, beta)
    } else {
        (-(alpha + beta + 2.0) * std::f64::consts::LN_2).exp()
    };
    Ok(QuadratureRule {
        nodes: base.from_lo.iter().map(|d| (0.5 * d).sqrt()).collect(),
        weights: base.rule.weights.iter().map(|w| w * scale).collect(),
        exactness_degree: base.rule.exactness_degree,
        interval: (0.0, 1.0),
    })
}
