//! Composite Gauss-Jacobi rules on geometrically graded panels.
//!
//! Integrands that are analytic except near one known point (an algebraic
//! singularity, or a peak of width `h`) are integrated by splitting the interval
//! at that point and refining panels geometrically toward it until the panel
//! size drops below `h_min`. Endpoint weights are carried by Jacobi rules on the
//! panels that touch the interval ends; everything else uses Gauss-Legendre.
//!
//! Every node records its distance to the focus and to both interval ends,
//! each computed without cancellation, so integrands can form differences such
//! as `1 - u` or `y - x` to full relative precision.

use super::jacobi::gauss_jacobi_cached;
use crate::error::{domain, Result};

/// Ratio between successive panel sizes.
pub const GRADING_RATIO: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedNode {
    pub x: f64,
    /// `x - focus`.
    pub offset: f64,
    /// `x - lo`.
    pub to_lo: f64,
    /// `hi - x`.
    pub to_hi: f64,
    pub weight: f64,
}

/// Composite rule for `∫_lo^hi (x-lo)^a (hi-x)^b f(x) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedRule {
    pub nodes: Vec<GradedNode>,
    pub focus: f64,
    pub interval: (f64, f64),
    pub panels: usize,
}

/// `(d, len - d, w)`
type SideNode = (f64, f64, f64);

/// One side of the focus, in the distance coordinate `d ∈ (0, len)`, weight
/// `d^near (len - d)^far`.
fn side(
    len: f64,
    near_exp: f64,
    far_exp: f64,
    order: usize,
    h_min: f64,
) -> Result<(Vec<SideNode>, usize)> {
    let mut breaks = vec![len];
    let mut d = len;
    while d > h_min {
        d *= GRADING_RATIO;
        breaks.push(d);
    }
    breaks.push(0.0);
    breaks.reverse();

    let mut out = Vec::with_capacity(order * (breaks.len() - 1));
    let panels = breaks.len() - 1;
    for k in 0..panels {
        let (a, b) = (breaks[k], breaks[k + 1]);
        let touches_near = k == 0;
        let touches_far = k + 1 == panels;
        let e_l = if touches_near { near_exp } else { 0.0 };
        let e_r = if touches_far { far_exp } else { 0.0 };
        let rule = gauss_jacobi_cached(e_r, e_l, order)?;
        let h = 0.5 * (b - a);
        let scale = h.powf(1.0 + e_l + e_r);
        for ((w, dl), dr) in rule.rule.weights.iter().zip(&rule.from_lo).zip(&rule.to_hi) {
            let from_a = h * dl;
            let to_b = h * dr;
            let dist = if touches_near { from_a } else { a + from_a };
            let rest = if touches_far { to_b } else { (len - b) + to_b };
            let mut weight = w * scale;
            if !touches_near && near_exp != 0.0 {
                weight *= dist.powf(near_exp);
            }
            if !touches_far && far_exp != 0.0 {
                weight *= rest.powf(far_exp);
            }
            out.push((dist, rest, weight));
        }
    }
    Ok((out, panels))
}

impl GradedRule {
    /// `order` nodes per panel, refined toward `focus ∈ [lo, hi]` down to
    /// panels of width `h_min`.
    pub fn new(
        (lo, hi): (f64, f64),
        focus: f64,
        (lo_exp, hi_exp): (f64, f64),
        order: usize,
        h_min: f64,
    ) -> Result<Self> {
        if !(lo < hi) || !(focus >= lo && focus <= hi) {
            return Err(domain(
                "GradedRule",
                format!("focus {focus} must lie in a nonempty interval [{lo}, {hi}]"),
            ));
        }
        if !(h_min > 0.0) {
            return Err(domain("GradedRule", format!("h_min must be > 0, got {h_min}")));
        }
        let mut nodes = Vec::new();
        let mut panels = 0;

        if focus > lo {
            let len = focus - lo;
            let near = if focus == hi { hi_exp } else { 0.0 };
            let (pts, n) = side(len, near, lo_exp, order, h_min)?;
            panels += n;
            // walk outward-to-inward so the nodes end up in increasing x
            for &(d, rest, w) in pts.iter().rev() {
                let to_hi = (hi - focus) + d;
                let weight = if focus < hi && hi_exp != 0.0 {
                    w * to_hi.powf(hi_exp)
                } else {
                    w
                };
                nodes.push(GradedNode {
                    x: focus - d,
                    offset: -d,
                    to_lo: rest,
                    to_hi,
                    weight,
                });
            }
        }
        if focus < hi {
            let len = hi - focus;
            let near = if focus == lo { lo_exp } else { 0.0 };
            let (pts, n) = side(len, near, hi_exp, order, h_min)?;
            panels += n;
            for &(d, rest, w) in &pts {
                let to_lo = (focus - lo) + d;
                let weight = if focus > lo && lo_exp != 0.0 {
                    w * to_lo.powf(lo_exp)
                } else {
                    w
                };
                nodes.push(GradedNode {
                    x: focus + d,
                    offset: d,
                    to_lo,
                    to_hi: rest,
                    weight,
                });
            }
        }
        Ok(Self {
            nodes,
            focus,
            interval: (lo, hi),
            panels,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn scale_weights(&mut self, c: f64) {
        for n in &mut self.nodes {
            n.weight *= c;
        }
    }
}
