//! Normalized Bessel function `Λ_μ(t) = Γ(μ+1) J_μ(t) (t/2)^{-μ}`.
//!
//! Expanding `J_μ` gives an entire series in `t`:
//!
//! ```text
//! Λ_μ(t) = Σ_k (-t²/4)^k / (k! (μ+1)_k)
//! ```
//!
//! with `Λ_μ(0) = 1`. The terms grow to roughly `cosh t` before decaying, so the
//! alternating sum is accumulated in double-double arithmetic, and the absolute
//! rounding error is tracked from the sum of term magnitudes.

use twofloat::TwoFloat;

use crate::error::{domain, Error, Result};

/// Largest absolute rounding error accepted from the series before the
/// evaluation is refused.
pub const MAX_SERIES_ERROR: f64 = 1e-9;

/// Double-double unit roundoff with headroom for the running products.
const DD_EPS: f64 = 4.0 * 1.232595164407831e-32;

const MAX_TERMS: usize = 2000;

/// A request for `Λ_μ(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselQuery {
    pub order: f64,
    pub argument: f64,
}

impl BesselQuery {
    pub fn new(order: f64, argument: f64) -> Result<Self> {
        if !(order >= -0.5 && order.is_finite()) {
            return Err(domain("BesselQuery", format!("order must be >= -1/2, got {order}")));
        }
        if !(argument >= 0.0 && argument.is_finite()) {
            return Err(domain(
                "BesselQuery",
                format!("argument must be finite and >= 0, got {argument}"),
            ));
        }
        Ok(Self { order, argument })
    }

    pub fn eval(&self) -> Result<f64> {
        eval_lambda(self.order, self.argument)
    }
}

/// Value of `Λ_μ(t)` together with the estimated absolute rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue {
    pub value: f64,
    pub error_bound: f64,
    pub terms: usize,
}

/// Double-double quotient. `TwoFloat / TwoFloat` only carries f64 accuracy,
/// so one correction step is applied to the quotient by the leading part.
fn div_dd(a: TwoFloat, d: TwoFloat) -> TwoFloat {
    let q = a / d.hi();
    q + (a - q * d) / d.hi()
}

/// `Λ_μ(t)` for `μ >= -1/2`, `t >= 0`.
pub fn eval_lambda(order: f64, t: f64) -> Result<f64> {
    eval_lambda_detailed(order, t).map(|v| v.value)
}

pub fn eval_lambda_detailed(order: f64, t: f64) -> Result<BesselValue> {
    let q = BesselQuery::new(order, t)?;
    if q.argument == 0.0 {
        return Ok(BesselValue {
            value: 1.0,
            error_bound: 0.0,
            terms: 1,
        });
    }
    // t² and the denominators are kept exact: a rounded factor would be
    // amplified by the cancellation
    let z = -0.25 * TwoFloat::new_mul(t, t);

    let mut term = TwoFloat::from(1.0);
    let mut sum = TwoFloat::from(1.0);
    let mut magnitude = 1.0_f64;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        term = div_dd(term * z / (kf + 1.0), TwoFloat::new_add(q.order, kf + 1.0));
        k += 1;
        sum += term;
        let t_abs = term.hi().abs();
        magnitude += t_abs;
        // past the peak the terms shrink factorially
        if kf + 1.0 > 0.5 * t && t_abs <= 1e-17 * sum.hi().abs().max(1e-300) {
            break;
        }
        if k >= MAX_TERMS {
            return Err(Error::Accuracy {
                op: "eval_lambda",
                reason: format!("series for order {order}, t = {t} did not settle in {MAX_TERMS} terms"),
            });
        }
    }

    let error_bound = magnitude * DD_EPS;
    if error_bound > MAX_SERIES_ERROR {
        return Err(Error::Accuracy {
            op: "eval_lambda",
            reason: format!(
                "ascending series at t = {t} (order {order}) carries term magnitudes up to \
                 {magnitude:.3e}; estimated rounding error {error_bound:.3e} exceeds {MAX_SERIES_ERROR:e}"
            ),
        });
    }
    Ok(BesselValue {
        value: f64::from(sum),
        error_bound,
        terms: k + 1,
    })
}
