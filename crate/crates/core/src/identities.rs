//! Numerical certificates for the classical integrals behind the kernel:
//! Gegenbauer's multiplication theorem, the Feldheim-Vilenkin integral and
//! Sonine's first finite integral.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::eval_lambda;
use crate::error::{domain, Result};
use crate::gegenbauer::{eval_w, w_unchecked};
use crate::quadrature::{GMeasure, HMeasure};

/// Default tolerance of the randomized sweep.
pub const SWEEP_TOLERANCE: f64 = 1e-8;

/// Outcome of comparing the two sides of an identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub identity: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ValidationReport {
    pub fn new(
        identity: impl Into<String>,
        params: &[(&str, f64)],
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let residual = (lhs - rhs).abs();
        Self {
            identity: identity.into(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            lhs,
            rhs,
            residual,
            tolerance,
            // NaN residuals fail
            passed: residual <= tolerance,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report fields are plain numbers and strings")
    }
}

fn check_unit(op: &'static str, name: &str, v: f64) -> Result<()> {
    if v.abs() <= 1.0 {
        Ok(())
    } else {
        Err(domain(op, format!("{name} must lie in [-1, 1], got {v}")))
    }
}

/// `W_n^ν(x) W_n^ν(y) = ∫ W_n^ν(xy + σ √(1-x²) √(1-y²)) G_{ν-1/2}(dσ)`.
pub fn check_multiplication(
    nu: f64,
    n: usize,
    x: f64,
    y: f64,
    q_sigma: usize,
    tolerance: f64,
) -> Result<ValidationReport> {
    const OP: &str = "check_multiplication";
    check_unit(OP, "x", x)?;
    check_unit(OP, "y", y)?;
    if !(nu > 0.0) {
        return Err(domain(OP, format!("nu must be > 0, got {nu}")));
    }
    let rule = GMeasure::new(nu - 0.5)?.rule(q_sigma)?;
    let lhs = eval_w(n, nu, x)? * eval_w(n, nu, y)?;
    let ab = ((1.0 - x) * (1.0 + x) * (1.0 - y) * (1.0 + y)).sqrt();
    let rhs = rule.integrate(|s| w_unchecked(n, nu, (x * y + s * ab).clamp(-1.0, 1.0)));
    Ok(ValidationReport::new(
        "multiplication",
        &[("nu", nu), ("n", n as f64), ("x", x), ("y", y), ("q", q_sigma as f64)],
        lhs,
        rhs,
        tolerance,
    ))
}

/// `∫ s^{n/2} W_n^ν(x / √s) H_ν^λ(du)` with `s = x² + u² (1-x²)`, which equals
/// `W_n^λ(x)`. The integrand is a polynomial of degree `n/2` in `u²`, so a
/// rule with more than `n/4` nodes is exact.
pub fn feldheim_vilenkin_integral(lambda: f64, nu: f64, n: usize, x: f64, q_u: usize) -> Result<f64> {
    check_unit("feldheim_vilenkin", "x", x)?;
    let rule = HMeasure::new(lambda, nu)?.rule(q_u)?;
    let a2 = (1.0 - x) * (1.0 + x);
    Ok(rule.integrate(|u| {
        let s = x * x + u * u * a2;
        let root = s.sqrt();
        let arg = (x / root).clamp(-1.0, 1.0);
        root.powi(n as i32) * w_unchecked(n, nu, arg)
    }))
}

pub fn feldheim_vilenkin(
    lambda: f64,
    nu: f64,
    n: usize,
    x: f64,
    q_u: usize,
    tolerance: f64,
) -> Result<ValidationReport> {
    let rhs = feldheim_vilenkin_integral(lambda, nu, n, x, q_u)?;
    let lhs = eval_w(n, lambda, x)?;
    Ok(ValidationReport::new(
        "feldheim_vilenkin",
        &[("lambda", lambda), ("nu", nu), ("n", n as f64), ("x", x), ("q", q_u as f64)],
        lhs,
        rhs,
        tolerance,
    ))
}

/// `Λ_{λ-1/2}(t) = ∫ Λ_{ν-1/2}(u t) H_ν^λ(du)`.
pub fn sonine(lambda: f64, nu: f64, t: f64, q_u: usize, tolerance: f64) -> Result<ValidationReport> {
    let rule = HMeasure::new(lambda, nu)?.rule(q_u)?;
    let lhs = eval_lambda(lambda - 0.5, t)?;
    let mut failure = None;
    let rhs = rule.integrate(|u| match eval_lambda(nu - 0.5, u * t) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ValidationReport::new(
        "sonine",
        &[("lambda", lambda), ("nu", nu), ("t", t), ("q", q_u as f64)],
        lhs,
        rhs,
        tolerance,
    ))
}

/// One randomly drawn parameter tuple of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepTuple {
    pub lambda: f64,
    pub nu: f64,
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// Draws `count` tuples with `ν ∈ (0, 4]`, `λ ∈ (ν, ν+5]`, `n <= 20`,
/// `x, y ∈ (-1, 1)` and `t ∈ [0, 20]`.
pub fn sweep_tuples(seed: u64, count: usize) -> Vec<SweepTuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let open = |rng: &mut ChaCha8Rng| loop {
        let v: f64 = rng.random_range(-1.0..1.0);
        if v > -1.0 {
            return v;
        }
    };
    (0..count)
        .map(|_| {
            let nu = 4.0 * (1.0 - rng.random::<f64>());
            let lambda = nu + 5.0 * (1.0 - rng.random::<f64>());
            let n = rng.random_range(0..=20);
            let x = open(&mut rng);
            let y = open(&mut rng);
            let t = rng.random_range(0.0..=20.0);
            SweepTuple { lambda, nu, n, x, y, t }
        })
        .collect()
}

/// Quadrature size used by the sweep for degree `n`.
fn sweep_nodes(n: usize) -> usize {
    n / 2 + 24
}

/// Runs all three identities on every tuple. Reports come back in tuple order,
/// multiplication first, independent of the thread count.
pub fn sweep(seed: u64, count: usize, tolerance: f64) -> Result<Vec<ValidationReport>> {
    let tuples = sweep_tuples(seed, count);
    let per_tuple = tuples
        .par_iter()
        .map(|p| {
            let q = sweep_nodes(p.n);
            Ok([
                check_multiplication(p.nu, p.n, p.x, p.y, q, tolerance)?,
                feldheim_vilenkin(p.lambda, p.nu, p.n, p.x, q, tolerance)?,
                sonine(p.lambda, p.nu, p.t, 64, tolerance)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_tuple.into_iter().flatten().collect())
}
