//! Gauss-Jacobi rules for `∫_{-1}^{1} (1-t)^α (1+t)^β f(t) dt`.
//!
//! Nodes come from the eigenvalues of the symmetric tridiagonal Jacobi matrix
//! (Golub-Welsch). Each node is then polished by Newton steps on the
//! orthonormal recurrence, and the weights are taken as Christoffel numbers
//! `μ0 / Σ_k p̃_k(t_i)²`, which keeps small endpoint weights accurate to full
//! relative precision.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use super::QuadratureRule;
use crate::error::{domain, Error, Result};

/// Largest number of nodes a single rule may carry.
pub const MAX_NODES: usize = 512;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Recurrence coefficients of the orthonormal Jacobi polynomials,
/// `t p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}`, with `1 + a_k` and
/// `1 - a_k` formed without cancellation.
struct Recurrence {
    diag: Vec<f64>,
    diag_plus: Vec<f64>,
    diag_minus: Vec<f64>,
    // off[k] holds b_{k+1}
    off: Vec<f64>,
}

fn recurrence(alpha: f64, beta: f64, q: usize) -> Recurrence {
    let ab = alpha + beta;
    let mut r = Recurrence {
        diag: Vec::with_capacity(q),
        diag_plus: Vec::with_capacity(q),
        diag_minus: Vec::with_capacity(q),
        off: Vec::with_capacity(q),
    };
    for k in 0..q {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        if k == 0 {
            r.diag.push((beta - alpha) / (ab + 2.0));
            r.diag_plus.push(2.0 * (beta + 1.0) / (ab + 2.0));
            r.diag_minus.push(2.0 * (alpha + 1.0) / (ab + 2.0));
        } else {
            let den = s * (s + 2.0);
            let common = 4.0 * kf * (kf + ab + 1.0);
            r.diag.push((beta - alpha) * (beta + alpha) / den);
            r.diag_plus.push((common + 2.0 * ab * (beta + 1.0)) / den);
            r.diag_minus.push((common + 2.0 * ab * (alpha + 1.0)) / den);
        }

        let j = kf + 1.0;
        let s = 2.0 * j + ab;
        let b2 = if k == 0 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        r.off.push(b2.sqrt());
    }
    r
}

/// Where a node is measured from.
#[derive(Clone, Copy)]
enum Anchor {
    /// `d = 1 + t`
    Lower,
    /// `d = 1 - t`
    Upper,
}

impl Recurrence {
    /// `t - a_k` for the node at distance `d` from the anchor.
    fn centered(&self, anchor: Anchor, k: usize, d: f64) -> f64 {
        match anchor {
            Anchor::Lower => d - self.diag_plus[k],
            Anchor::Upper => self.diag_minus[k] - d,
        }
    }

    /// `p̃_q`, `dp̃_q/dt` and `Σ_{k<q} p̃_k²` with `p̃_0 = 1`.
    fn eval(&self, anchor: Anchor, q: usize, d: f64) -> (f64, f64, f64) {
        let (mut p_prev, mut p) = (0.0, 1.0);
        let (mut d_prev, mut dp) = (0.0, 0.0);
        let mut sumsq = 0.0;
        for k in 0..q {
            sumsq += p * p;
            let c = self.centered(anchor, k, d);
            let b_prev = if k == 0 { 0.0 } else { self.off[k - 1] };
            let p_next = (c * p - b_prev * p_prev) / self.off[k];
            let d_next = (p + c * dp - b_prev * d_prev) / self.off[k];
            p_prev = p;
            p = p_next;
            d_prev = dp;
            dp = d_next;
        }
        (p, dp, sumsq)
    }
}

/// `∫_{-1}^{1} (1-t)^α (1+t)^β dt = 2^{α+β+1} Γ(α+1) Γ(β+1) / Γ(α+β+2)`.
pub fn jacobi_mass(alpha: f64, beta: f64) -> f64 {
    let ln = (alpha + beta + 1.0) * std::f64::consts::LN_2 + libm::lgamma(alpha + 1.0)
        + libm::lgamma(beta + 1.0)
        - libm::lgamma(alpha + beta + 2.0);
    ln.exp()
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v > -1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(
            "gauss_jacobi",
            format!("{name} must be a finite real > -1, got {v}"),
        ))
    }
}

/// A Gauss-Jacobi rule together with each node's distance to both ends,
/// `1 + t` and `1 - t`, accurate to full relative precision.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    pub rule: QuadratureRule,
    pub from_lo: Vec<f64>,
    pub to_hi: Vec<f64>,
}

/// Builds the `q`-point Gauss-Jacobi rule on `[-1, 1]`.
pub fn gauss_jacobi(alpha: f64, beta: f64, q: usize) -> Result<QuadratureRule> {
    jacobi_rule(alpha, beta, q).map(|r| r.rule)
}

pub fn jacobi_rule(alpha: f64, beta: f64, q: usize) -> Result<JacobiRule> {
    check_exponent("alpha", alpha)?;
    check_exponent("beta", beta)?;
    if q == 0 || q > MAX_NODES {
        return Err(domain(
            "gauss_jacobi",
            format!("number of nodes must lie in 1..={MAX_NODES}, got {q}"),
        ));
    }
    let mass = jacobi_mass(alpha, beta);
    let rec = recurrence(alpha, beta, q);

    let matrix = DMatrix::from_fn(q, q, |i, j| {
        if i == j {
            rec.diag[i]
        } else if i + 1 == j {
            rec.off[i]
        } else if j + 1 == i {
            rec.off[j]
        } else {
            0.0
        }
    });
    let eigen =
        nalgebra::SymmetricEigen::try_new(matrix, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
            Error::Internal {
                op: "gauss_jacobi",
                reason: format!(
                    "tridiagonal eigen-solver did not converge in {EIGEN_MAX_ITER} sweeps \
                     (alpha = {alpha}, beta = {beta}, q = {q})"
                ),
            }
        })?;
    let mut guess: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    guess.sort_by(|a, b| a.total_cmp(b));

    let mut nodes = Vec::with_capacity(q);
    let mut from_lo = Vec::with_capacity(q);
    let mut to_hi = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    for i in 0..q {
        let t0 = guess[i];
        let lo = if i == 0 { -1.0 } else { guess[i - 1] };
        let hi = if i + 1 == q { 1.0 } else { guess[i + 1] };
        // Newton on the distance to the nearer end
        let (anchor, sign) = if t0 <= 0.0 { (Anchor::Lower, 1.0) } else { (Anchor::Upper, -1.0) };
        let max_step = 0.5 * (t0 - lo).min(hi - t0);
        let mut d = match anchor {
            Anchor::Lower => 1.0 + t0,
            Anchor::Upper => 1.0 - t0,
        };
        for _ in 0..4 {
            let (p, dp, _) = rec.eval(anchor, q, d);
            if dp == 0.0 || !dp.is_finite() {
                break;
            }
            let step = sign * p / dp;
            if !(step.abs() < max_step) || d - step <= 0.0 || d - step == d {
                break;
            }
            d -= step;
        }
        let (_, _, sumsq) = rec.eval(anchor, q, d);
        weights.push(mass / sumsq);
        let (dl, dh) = match anchor {
            Anchor::Lower => (d, 2.0 - d),
            Anchor::Upper => (2.0 - d, d),
        };
        nodes.push(match anchor {
            Anchor::Lower => d - 1.0,
            Anchor::Upper => 1.0 - d,
        });
        from_lo.push(dl);
        to_hi.push(dh);
    }

    for w in nodes.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Internal {
                op: "gauss_jacobi",
                reason: format!("nodes not strictly increasing (alpha = {alpha}, beta = {beta}, q = {q})"),
            });
        }
    }
    let interior = from_lo.iter().chain(&to_hi).all(|d| *d > 0.0);
    if !interior || nodes[0] <= -1.0 || nodes[q - 1] >= 1.0 || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Internal {
            op: "gauss_jacobi",
            reason: format!("degenerate rule (alpha = {alpha}, beta = {beta}, q = {q})"),
        });
    }

    Ok(JacobiRule {
        rule: QuadratureRule {
            nodes,
            weights,
            exactness_degree: 2 * q - 1,
            interval: (-1.0, 1.0),
        },
        from_lo,
        to_hi,
    })
}

type RuleKey = (u64, u64, usize);

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<JacobiRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<JacobiRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized [`jacobi_rule`]. Rules are deterministic, so sharing them across
/// threads cannot change any result.
pub fn gauss_jacobi_cached(alpha: f64, beta: f64, q: usize) -> Result<Arc<JacobiRule>> {
    let key = (alpha.to_bits(), beta.to_bits(), q);
    if let Some(rule) = cache().lock().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(jacobi_rule(alpha, beta, q)?);
    cache()
        .lock()
        .expect("rule cache poisoned")
        .insert(key, Arc::clone(&rule));
    Ok(rule)
}
