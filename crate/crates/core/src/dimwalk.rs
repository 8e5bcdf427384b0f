//! Schoenberg mixtures `f = Σ a_n W_n^ν` and the walk between sphere
//! dimensions, which keeps the coefficients and raises the index.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gegenbauer::{weight_omega, Index, WSequence};
use crate::identities::ValidationReport;
use crate::kernel::{KernelProjection, ProjectionOptions};
use crate::quadrature::GMeasure;
use crate::sum::Neumaier;

/// Slack allowed on `Σ a_n` for rounding in the coefficients themselves.
const SUM_SLACK: f64 = 1e-12;

/// Nonnegative coefficients `a_0..a_N` with `Σ a_n = 1` up to the declared
/// tail mass `epsilon = Σ_{n>N} a_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchoenbergSeq {
    coefficients: Vec<f64>,
    index: Index,
    epsilon: f64,
}

impl SchoenbergSeq {
    pub fn new(coefficients: Vec<f64>, index: impl Into<Index>, epsilon: f64) -> Result<Self> {
        const OP: &str = "SchoenbergSeq";
        let index = index.into().validate(OP)?;
        if !(0.0..1.0).contains(&epsilon) {
            return Err(domain(OP, format!("tail mass must lie in [0, 1), got {epsilon}")));
        }
        if coefficients.is_empty() {
            return Err(domain(OP, "at least one coefficient is required"));
        }
        if let Some((n, a)) = coefficients
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a >= 0.0 && a.is_finite()))
        {
            return Err(domain(OP, format!("coefficient a_{n} = {a} is not a finite nonnegative number")));
        }
        let total: f64 = coefficients.iter().copied().collect::<Neumaier>().sum();
        if total > 1.0 + SUM_SLACK || total + epsilon < 1.0 - SUM_SLACK {
            return Err(domain(
                OP,
                format!("coefficients sum to {total}, which is not 1 within tail mass {epsilon}"),
            ));
        }
        Ok(Self {
            coefficients,
            index,
            epsilon,
        })
    }

    /// The point mass at degree `k`.
    pub fn dirac(k: usize, index: impl Into<Index>) -> Result<Self> {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self::new(c, index, 0.0)
    }

    /// `a_n = (1-q) q^n`, truncated once the tail `q^{N+1}` is at most `tail`.
    pub fn geometric(q: f64, index: impl Into<Index>, tail: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(domain("SchoenbergSeq::geometric", format!("ratio must lie in [0, 1), got {q}")));
        }
        if !(tail > 0.0) {
            return Err(domain("SchoenbergSeq::geometric", format!("tail must be > 0, got {tail}")));
        }
        let mut coefficients = Vec::new();
        let mut power = 1.0;
        while power > tail {
            coefficients.push((1.0 - q) * power);
            power *= q;
        }
        if coefficients.is_empty() {
            coefficients.push(1.0 - q);
        }
        Self::new(coefficients, index, power)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SchoenbergSeq = serde_json::from_str(text)
            .map_err(|e| domain("SchoenbergSeq::from_json", e.to_string()))?;
        Self::new(raw.coefficients, raw.index, raw.epsilon)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sequence fields are plain numbers")
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn index(&self) -> Index {
        self.index
    }

    /// Declared bound on the mass beyond the stored coefficients.
    pub fn tail_mass(&self) -> f64 {
        self.epsilon
    }

    /// Highest stored degree `N`.
    pub fn truncation(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// Dimension `d` of the sphere `S^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereDim(u32);

impl SphereDim {
    pub fn new(d: u32) -> Result<Self> {
        if d >= 1 {
            Ok(Self(d))
        } else {
            Err(domain("SphereDim", "dimension must be >= 1"))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// `ν = (d - 1) / 2`.
pub fn dim_to_index(s: SphereDim) -> f64 {
    (f64::from(s.0) - 1.0) / 2.0
}

/// `d = 2ν + 1` when that is a positive integer.
pub fn index_to_dim(nu: f64) -> Option<SphereDim> {
    if !(nu > 0.0) {
        return None;
    }
    let d = 2.0 * nu + 1.0;
    if d.fract() == 0.0 && d <= f64::from(u32::MAX) {
        SphereDim::new(d as u32).ok()
    } else {
        None
    }
}

/// `Σ_{n<=N} a_n W_n^ν(x)`; the absolute error is at most the tail mass.
pub fn eval_mixture(seq: &SchoenbergSeq, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(domain("eval_mixture", format!("x must lie in [-1, 1], got {x}")));
    }
    Ok(match seq.index {
        Index::Finite(nu) => seq
            .coefficients
            .iter()
            .zip(WSequence::new(nu, x))
            .map(|(a, w)| a * w)
            .collect::<Neumaier>()
            .sum(),
        Index::Infinity => seq.coefficients.iter().rev().fold(0.0, |acc, a| acc * x + a),
    })
}

/// Re-tags the coefficients with the higher index `λ`.
pub fn lift(seq: &SchoenbergSeq, lambda: impl Into<Index>) -> Result<SchoenbergSeq> {
    let lambda = lambda.into().validate("lift")?;
    if !lambda.greater_than(seq.index) {
        return Err(domain(
            "lift",
            format!("target index {lambda} must exceed the current index {}", seq.index),
        ));
    }
    Ok(SchoenbergSeq {
        index: lambda,
        ..seq.clone()
    })
}

/// Compares `eval_mixture(lift(seq, λ), x)` with the integral of the original
/// mixture against the projection measure `M_ν^λ(x; dy)`.
pub fn verify_lift(
    seq: &SchoenbergSeq,
    lambda: f64,
    x: f64,
    opts: &ProjectionOptions,
    tolerance: f64,
) -> Result<ValidationReport> {
    const OP: &str = "verify_lift";
    let nu = seq
        .index
        .finite()
        .ok_or_else(|| domain(OP, "the sequence index must be finite"))?;
    if !(lambda > nu) {
        return Err(domain(OP, format!("lambda = {lambda} must exceed nu = {nu}")));
    }
    if lambda <= nu + 1.0 {
        return Err(Error::SingularRange { op: OP, lambda, nu });
    }
    let lhs = eval_mixture(&lift(seq, lambda)?, x)?;
    let projection = KernelProjection::new(lambda, nu, x, opts)?;
    let rhs = projection.integrate(|y| eval_mixture(seq, y).unwrap_or(f64::NAN));
    Ok(ValidationReport::new(
        "dimension_walk",
        &[
            ("lambda", lambda),
            ("nu", nu),
            ("x", x),
            ("terms", seq.coefficients.len() as f64),
            ("tail_mass", seq.epsilon),
        ],
        lhs,
        rhs,
        tolerance,
    ))
}

/// Coefficients `b_n = ω_n^ν ∫ f W_n^ν dG_ν`, `n <= n_max`, of a function on
/// `[-1, 1]` in the `ν` basis, by a `q`-point rule.
pub fn expand<F: Fn(f64) -> f64>(f: F, nu: f64, n_max: usize, q: usize) -> Result<Vec<f64>> {
    let rule = GMeasure::new(nu)?.rule(q)?;
    let values: Vec<(f64, Vec<f64>)> = rule
        .iter()
        .map(|(y, w)| (w * f(y), WSequence::new(nu, y).take(n_max + 1).collect()))
        .collect();
    (0..=n_max)
        .map(|n| {
            let inner: Neumaier = values.iter().map(|(fw, ws)| fw * ws[n]).collect();
            Ok(weight_omega(n, nu)? * inner.sum())
        })
        .collect()
}
