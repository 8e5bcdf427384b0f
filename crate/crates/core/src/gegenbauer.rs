//! Bochner-normalized ultraspherical polynomials `W_n^λ(x) = C_n^λ(x) / C_n^λ(1)`
//! and the orthogonality weights `ω_n^ν`.
//!
//! The polynomials are evaluated with the three-term recurrence of `C_n^λ`
//! divided through by `C_n^λ(1)`:
//!
//! ```text
//! (n + 2λ - 1) W_n = 2 (n + λ - 1) x W_{n-1} - (n - 1) W_{n-2}
//! ```
//!
//! so every intermediate stays on the `[-1, 1]` scale. `C_n^λ(1)` itself grows
//! like `n^{2λ-1}` and is never formed.
//!
//! With this normalization `W_n^ν` is orthogonal under the probability measure
//! `G_ν` with `∫ W_m^ν W_n^ν dG_ν = δ_mn / ω_n^ν`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// Index `λ` of an ultraspherical family: a positive real, or the limit
/// `λ → ∞` in which `W_n^∞(x) = x^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Index {
    Finite(f64),
    Infinity,
}

impl Index {
    pub fn finite(self) -> Option<f64> {
        match self {
            Index::Finite(v) => Some(v),
            Index::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Index::Infinity)
    }

    /// Strict order with `Infinity` above every finite index.
    pub fn greater_than(self, other: Index) -> bool {
        match (self, other) {
            (Index::Infinity, Index::Finite(_)) => true,
            (Index::Finite(a), Index::Finite(b)) => a > b,
            _ => false,
        }
    }

    pub fn validate(self, op: &'static str) -> Result<Self> {
        match self {
            Index::Finite(v) if !(v > 0.0 && v.is_finite()) => {
                Err(domain(op, format!("index must be > 0 or infinity, got {v}")))
            }
            _ => Ok(self),
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(v) => write!(f, "{v}"),
            Index::Infinity => f.write_str("infinity"),
        }
    }
}

impl From<f64> for Index {
    fn from(v: f64) -> Self {
        Index::Finite(v)
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Index::Finite(v) => s.serialize_f64(*v),
            Index::Infinity => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Index::Finite(v)),
            Raw::Text(t) if t.eq_ignore_ascii_case("infinity") || t.eq_ignore_ascii_case("inf") => {
                Ok(Index::Infinity)
            }
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "index must be a number or \"infinity\", got {t:?}"
            ))),
        }
    }
}

/// A request for `W_n^λ(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyQuery {
    pub degree: usize,
    pub index: Index,
    pub argument: f64,
}

impl PolyQuery {
    pub fn new(degree: usize, index: impl Into<Index>, argument: f64) -> Result<Self> {
        let index = index.into().validate("PolyQuery")?;
        check_argument("PolyQuery", argument)?;
        Ok(Self {
            degree,
            index,
            argument,
        })
    }

    pub fn eval(&self) -> Result<f64> {
        eval_w_index(self.degree, self.index, self.argument)
    }
}

fn check_argument(op: &'static str, x: f64) -> Result<()> {
    if x.abs() <= 1.0 {
        Ok(())
    } else {
        Err(domain(op, format!("argument must lie in [-1, 1], got {x}")))
    }
}

fn check_lambda(op: &'static str, lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain(
            op,
            format!("index must be a finite real > 0, got {lambda} (use eval_w_infinity for the limit)"),
        ))
    }
}

/// `W_n^λ(x)` for a finite index `λ > 0` and `|x| <= 1`.
pub fn eval_w(n: usize, lambda: f64, x: f64) -> Result<f64> {
    check_lambda("eval_w", lambda)?;
    check_argument("eval_w", x)?;
    Ok(w_unchecked(n, lambda, x))
}

/// `W_n^∞(x) = x^n`.
pub fn eval_w_infinity(n: usize, x: f64) -> Result<f64> {
    check_argument("eval_w_infinity", x)?;
    Ok(powu(x, n))
}

/// Dispatches on the index: finite indices use the recurrence, the limit uses `x^n`.
pub fn eval_w_index(n: usize, index: Index, x: f64) -> Result<f64> {
    match index {
        Index::Finite(lambda) => eval_w(n, lambda, x),
        Index::Infinity => eval_w_infinity(n, x),
    }
}

fn powu(x: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(k) => x.powi(k),
        Err(_) => x.powf(n as f64),
    }
}

pub(crate) fn w_unchecked(n: usize, lambda: f64, x: f64) -> f64 {
    WSequence::new(lambda, x).nth(n).unwrap_or(0.0)
}

/// The infinite sequence `W_0^λ(x), W_1^λ(x), ...` produced by the normalized
/// recurrence. No argument checks are made.
#[derive(Debug, Clone)]
pub struct WSequence {
    lambda: f64,
    x: f64,
    next_degree: usize,
    prev: f64,
    cur: f64,
}

impl WSequence {
    pub fn new(lambda: f64, x: f64) -> Self {
        Self {
            lambda,
            x,
            next_degree: 0,
            prev: 0.0,
            cur: 1.0,
        }
    }
}

impl Iterator for WSequence {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let n = self.next_degree;
        let value = match n {
            0 => 1.0,
            1 => self.x,
            _ => {
                let nf = n as f64;
                let lam = self.lambda;
                (2.0 * (nf + lam - 1.0) * self.x * self.cur - (nf - 1.0) * self.prev)
                    / (nf + 2.0 * lam - 1.0)
            }
        };
        if n >= 1 {
            self.prev = self.cur;
        }
        self.cur = value;
        self.next_degree += 1;
        Some(value)
    }
}

/// `W_0^λ(x), ..., W_{n_max}^λ(x)` in one recurrence pass.
pub fn w_table(n_max: usize, index: Index, x: f64) -> Result<Vec<f64>> {
    let index = index.validate("w_table")?;
    check_argument("w_table", x)?;
    Ok(match index {
        Index::Finite(lambda) => WSequence::new(lambda, x).take(n_max + 1).collect(),
        Index::Infinity => std::iter::successors(Some(1.0), |p| Some(p * x))
            .take(n_max + 1)
            .collect(),
    })
}

/// A request for `ω_n^ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaQuery {
    pub degree: usize,
    pub index: f64,
}

impl OmegaQuery {
    pub fn new(degree: usize, index: f64) -> Result<Self> {
        check_nu("OmegaQuery", index)?;
        Ok(Self { degree, index })
    }

    pub fn eval(&self) -> Result<f64> {
        weight_omega(self.degree, self.index)
    }
}

fn check_nu(op: &'static str, nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("index must be a finite real > 0, got {nu}")))
    }
}

/// `ln ω_n^ν = ln((n+ν)/ν) + lnΓ(n+2ν) - ln n! - lnΓ(2ν)`.
pub fn ln_weight_omega(n: usize, nu: f64) -> Result<f64> {
    check_nu("ln_weight_omega", nu)?;
    if n == 0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    Ok(((nf + nu) / nu).ln() + libm::lgamma(nf + 2.0 * nu)
        - libm::lgamma(nf + 1.0)
        - libm::lgamma(2.0 * nu))
}

/// `ω_n^ν = (n+ν)/ν · Γ(n+2ν) / (n! Γ(2ν))`, evaluated through log-Gamma and
/// exponentiated once.
pub fn weight_omega(n: usize, nu: f64) -> Result<f64> {
    let ln_w = ln_weight_omega(n, nu)?;
    let w = ln_w.exp();
    if w.is_finite() {
        Ok(w)
    } else {
        Err(Error::Range {
            op: "weight_omega",
            reason: format!("omega_{n}^{nu} = exp({ln_w}) overflows f64"),
        })
    }
}

/// `ω_n^ν / ω_{n-1}^ν` for `n >= 1`.
pub(crate) fn omega_step(n: usize, nu: f64) -> f64 {
    let nf = n as f64;
    (nf + nu) / (nf - 1.0 + nu) * (nf - 1.0 + 2.0 * nu) / nf
}
