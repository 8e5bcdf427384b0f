//! The Askey-Fitch kernel
//!
//! ```text
//! m_ν^λ(x; y) = Σ_n ω_n^ν r^n W_n^λ(x) W_n^ν(y)
//! ```
//!
//! evaluated three ways: the truncated series, the closed-form generating
//! function (when `λ = ν`), and the double integral
//!
//! ```text
//! ∫_0^1 H_ν^λ(du) ∫_{-1}^{1} G_{ν-1/2}(dv) (1 - r² s) / D^{ν+1}
//!   s = x² + u² (1 - x²)
//!   B = x y + u v √(1-x²) √(1-y²)
//!   D = 1 - 2 r B + r² s
//! ```
//!
//! obtained by dropping the index with the Feldheim-Vilenkin integral, merging
//! the two polynomial factors with Gegenbauer's multiplication theorem, and
//! summing the resulting Poisson series in closed form. With `a = √(1-x²)`,
//! `b = √(1-y²)`, `ρ = |r|` and `q = 1 - sign(r) v`, the denominator is a sum
//! of nonnegative terms
//!
//! ```text
//! D = (y - r x)² + (b - ρ u a)² + 2 ρ u a b q
//! ```
//!
//! which is what the integrator evaluates. It vanishes only at `|r| = 1`,
//! `u = 1`, `q = 0` when `y = r x`; near that corner the tensor Gauss rules are
//! replaced by panels graded toward the peak.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gegenbauer::{omega_step, WSequence};
use crate::quadrature::{g_normalizer, h_normalizer, GMeasure, GradedNode, GradedRule, HMeasure};
use crate::sum::Neumaier;

/// Below this minimum of `D`, the integrator switches from a single tensor
/// Gauss-Jacobi rule to graded panels.
pub const GRADED_THRESHOLD: f64 = 0.1;

/// Smallest panel produced when grading toward a peak.
const PANEL_FLOOR: f64 = 1e-14;

/// Default tensor size of [`kernel_integral`].
pub const DEFAULT_NODES: usize = 64;

/// Quadrature size cap for the adaptive evaluator.
pub const MAX_ADAPTIVE_NODES: usize = 512;

/// Parameters of one kernel evaluation `m_ν^λ(x; y)` at radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams {
    pub lambda: f64,
    pub nu: f64,
    pub r: f64,
    pub x: f64,
    pub y: f64,
}

impl KernelParams {
    pub fn new(lambda: f64, nu: f64, r: f64, x: f64, y: f64) -> Result<Self> {
        const OP: &str = "KernelParams";
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(domain(OP, format!("nu must be a finite real > 0, got {nu}")));
        }
        if !lambda.is_finite() {
            return Err(domain(OP, format!("lambda must be finite, got {lambda}")));
        }
        if lambda == nu {
            return Err(Error::Dirac {
                op: OP,
                reason: format!("lambda = nu = {nu}: the projection measure is the point mass at x"),
            });
        }
        if lambda < nu {
            return Err(domain(OP, format!("need 0 < nu < lambda, got lambda = {lambda}, nu = {nu}")));
        }
        if !(r.abs() <= 1.0) {
            return Err(domain(OP, format!("r must lie in [-1, 1], got {r}")));
        }
        if x.abs() == 1.0 {
            return Err(Error::Dirac {
                op: OP,
                reason: format!("x = {x}: the projection measure is the point mass at {x}"),
            });
        }
        if !(x.abs() < 1.0) {
            return Err(domain(OP, format!("x must lie in (-1, 1), got {x}")));
        }
        if !(y.abs() < 1.0) {
            return Err(domain(OP, format!("y must lie in (-1, 1), got {y}")));
        }
        Ok(Self { lambda, nu, r, x, y })
    }

    pub fn with_y(&self, y: f64) -> Result<Self> {
        Self::new(self.lambda, self.nu, self.r, self.x, y)
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.lambda, self.nu, r, self.x, self.y)
    }

    /// `|r| = 1` with `ν < λ <= ν + 1`.
    pub fn in_singular_range(&self) -> bool {
        self.r.abs() == 1.0 && self.lambda <= self.nu + 1.0
    }

    /// True where the kernel value is `+∞`: inside the singular range with
    /// `y = r x`.
    pub fn diverges(&self) -> bool {
        self.in_singular_range() && self.y == self.r * self.x
    }

    fn require_admissible(&self, op: &'static str) -> Result<()> {
        if self.in_singular_range() {
            Err(Error::SingularRange {
                op,
                lambda: self.lambda,
                nu: self.nu,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    Integral,
    ClosedForm,
}

/// Resolution used to obtain a kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    /// Series truncated after degree `n`.
    Terms(usize),
    /// Quadrature with the requested sizes and the number of integrand calls.
    Nodes { qu: usize, qv: usize, evaluations: usize },
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEvaluation {
    pub value: f64,
    pub method: Method,
    pub resolution: Resolution,
    pub est_error: f64,
}

/// `Σ ω_n^ν r^n W_n^ν(x) = (1 - r²) / (1 - 2 r x + r²)^{ν+1}` for `|r| < 1`.
pub fn poisson_closed_form(nu: f64, r: f64, x: f64) -> Result<f64> {
    check_poisson("poisson_closed_form", nu, r, x)?;
    let d = (x - r) * (x - r) + (1.0 - x) * (1.0 + x);
    let d = if (r * x).abs() < 0.5 { 1.0 - 2.0 * r * x + r * r } else { d };
    Ok((1.0 - r) * (1.0 + r) / d.powf(nu + 1.0))
}

/// The generating function with denominator `(1 - 2 r x + x²)^{ν+1}`.
/// Diagnostic only: it does not agree with the series.
pub fn poisson_printed_form(nu: f64, r: f64, x: f64) -> Result<f64> {
    check_poisson("poisson_printed_form", nu, r, x)?;
    Ok((1.0 - r * r) / (1.0 - 2.0 * r * x + x * x).powf(nu + 1.0))
}

fn check_poisson(op: &'static str, nu: f64, r: f64, x: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(domain(op, format!("nu must be > 0, got {nu}")));
    }
    if !(r.abs() < 1.0) {
        return Err(domain(op, format!("|r| must be < 1, got {r}")));
    }
    if !(x.abs() <= 1.0) {
        return Err(domain(op, format!("x must lie in [-1, 1], got {x}")));
    }
    Ok(())
}

/// `Σ_{n <= N} ω_n^ν |r|^n`, the majorant of the series at `x = y = 1`.
fn omega_partial(nu: f64, rho: f64, n_max: usize) -> f64 {
    let mut c = 1.0;
    let mut acc = Neumaier::new();
    acc.add(1.0);
    for n in 1..=n_max {
        c *= omega_step(n, nu) * rho;
        acc.add(c);
    }
    acc.sum()
}

/// Truncated series `Σ_{n=0}^{N} ω_n^ν r^n W_n^λ(x) W_n^ν(y)`.
///
/// For `|r| < 1` the error estimate is the rigorous tail bound
/// `Σ_{n>N} ω_n |r|^n` (from `|W| <= 1`). At `|r| = 1` the series converges
/// only for `λ > ν + 1`, with terms of order `n^{ν-λ}`; the estimate fits
/// that envelope to the last half of the computed terms.
pub fn kernel_series(p: &KernelParams, n_max: usize) -> Result<KernelEvaluation> {
    if p.r.abs() == 1.0 && p.lambda <= p.nu + 1.0 {
        return Err(Error::Convergence {
            op: "kernel_series",
            reason: format!(
                "at |r| = 1 the series is not absolutely summable for nu < lambda <= nu + 1 \
                 (lambda = {}, nu = {})",
                p.lambda, p.nu
            ),
        });
    }
    let mut wl = WSequence::new(p.lambda, p.x);
    let mut wn = WSequence::new(p.nu, p.y);
    let mut coeff = 1.0;
    let mut acc = Neumaier::new();
    let mut envelope: f64 = 0.0;
    for n in 0..=n_max {
        if n > 0 {
            coeff *= omega_step(n, p.nu) * p.r;
        }
        let term = coeff * wl.next().unwrap_or(0.0) * wn.next().unwrap_or(0.0);
        acc.add(term);
        if 2 * n >= n_max && n > 0 {
            envelope = envelope.max(term.abs() * (n as f64).powf(p.lambda - p.nu));
        }
    }

    let rho = p.r.abs();
    let est_error = if rho == 0.0 {
        0.0
    } else if rho < 1.0 {
        let total = (1.0 + rho) / (1.0 - rho).powf(2.0 * p.nu + 1.0);
        (total - omega_partial(p.nu, rho, n_max)).max(f64::EPSILON * total)
    } else {
        let decay = p.lambda - p.nu - 1.0;
        envelope * (n_max.max(1) as f64).powf(-decay) / decay
    };
    Ok(KernelEvaluation {
        value: acc.sum(),
        method: Method::Series,
        resolution: Resolution::Terms(n_max),
        est_error,
    })
}

/// Denominator used inside the double integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrandForm {
    /// `D = 1 - 2 r B + r² s`, the closed form of the Poisson series.
    #[default]
    Corrected,
    /// `I = 1 - 2 r B / √s + B² / s`, kept for comparison only; tensor rules.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Graded panels when `min D < GRADED_THRESHOLD`, tensor rule otherwise.
    #[default]
    Auto,
    Tensor,
    Graded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralOptions {
    /// Tensor rule sizes. Graded rules use `⌈q/4⌉` nodes per panel.
    pub qu: usize,
    pub qv: usize,
    pub scheme: Scheme,
    pub form: IntegrandForm,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        Self {
            qu: DEFAULT_NODES,
            qv: DEFAULT_NODES,
            scheme: Scheme::Auto,
            form: IntegrandForm::Corrected,
        }
    }
}

impl IntegralOptions {
    pub fn with_nodes(qu: usize, qv: usize) -> Self {
        Self {
            qu,
            qv,
            ..Self::default()
        }
    }

    fn halved(&self) -> Self {
        Self {
            qu: (self.qu / 2).max(2),
            qv: (self.qv / 2).max(2),
            ..*self
        }
    }

    fn doubled(&self) -> Self {
        Self {
            qu: (self.qu * 2).min(MAX_ADAPTIVE_NODES),
            qv: (self.qv * 2).min(MAX_ADAPTIVE_NODES),
            ..*self
        }
    }
}

fn panel_order(q: usize) -> usize {
    q.div_ceil(4).max(4)
}

/// Geometry of one `(x, y)` pair with the differences kept exact.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    /// `√(1-x²)`
    a: f64,
    /// `√(1-y²)`
    b: f64,
    /// `y - r x`
    dy: f64,
}

impl Geometry {
    fn of(p: &KernelParams) -> Self {
        Self {
            a: ((1.0 - p.x) * (1.0 + p.x)).sqrt(),
            b: ((1.0 - p.y) * (1.0 + p.y)).sqrt(),
            dy: p.y - p.r * p.x,
        }
    }

    /// `u*` where `D(u, q = 0)` is smallest, and that minimum over `[0, 1]`.
    fn peak(&self, rho: f64) -> (f64, f64) {
        let u_star = self.b / (rho * self.a);
        let excess = if u_star > 1.0 { self.b - rho * self.a } else { 0.0 };
        (u_star, self.dy * self.dy + excess * excess)
    }
}

/// Evaluates the double integral once. Returns the value and the number of
/// integrand calls.
fn integral_once(
    p: &KernelParams,
    g: Geometry,
    opts: &IntegralOptions,
) -> Result<(f64, usize)> {
    if opts.qu < 2 || opts.qv < 2 {
        return Err(domain(
            "kernel_integral",
            format!("quadrature sizes must be >= 2, got ({}, {})", opts.qu, opts.qv),
        ));
    }
    if p.r == 0.0 && opts.form == IntegrandForm::Corrected {
        // integrand is identically one against two probability measures
        return Ok((1.0, 0));
    }
    let rho = p.r.abs();
    let (u_star, d_min) = g.peak(rho);
    let graded = match (opts.form, opts.scheme) {
        (IntegrandForm::Printed, _) => false,
        (_, Scheme::Tensor) => false,
        (_, Scheme::Graded) => true,
        (_, Scheme::Auto) => d_min < GRADED_THRESHOLD,
    };
    if graded {
        graded_integral(p, g, u_star, d_min, opts)
    } else {
        tensor_integral(p, g, opts)
    }
}

fn tensor_integral(p: &KernelParams, g: Geometry, opts: &IntegralOptions) -> Result<(f64, usize)> {
    let u_rule = HMeasure::new(p.lambda, p.nu)?.rule(opts.qu)?;
    let v_rule = GMeasure::new(p.nu - 0.5)?.rule(opts.qv)?;
    let (r, rho) = (p.r, p.r.abs());
    let sign = if r < 0.0 { -1.0 } else { 1.0 };
    let power = -(p.nu + 1.0);
    let a2 = g.a * g.a;

    let mut outer = Neumaier::new();
    for (u, wu) in u_rule.iter() {
        let one_minus_u2 = (1.0 - u) * (1.0 + u);
        let s = p.x * p.x + u * u * a2;
        let num = match opts.form {
            IntegrandForm::Corrected => (1.0 - r) * (1.0 + r) + r * r * a2 * one_minus_u2,
            IntegrandForm::Printed => 1.0 - r * r * s,
        };
        let gap = g.b - rho * u * g.a;
        let fixed = g.dy * g.dy + gap * gap;
        let slope = 2.0 * rho * u * g.a * g.b;
        let mut inner = Neumaier::new();
        for (v, wv) in v_rule.iter() {
            let denom = match opts.form {
                IntegrandForm::Corrected => fixed + slope * (1.0 - sign * v),
                IntegrandForm::Printed => {
                    let big_b = p.x * p.y + u * v * g.a * g.b;
                    1.0 - 2.0 * r * big_b / s.sqrt() + big_b * big_b / s
                }
            };
            inner.add(wv * denom.powf(power));
        }
        outer.add(wu * num * inner.sum());
    }
    Ok((outer.sum(), u_rule.len() * v_rule.len()))
}

fn graded_integral(
    p: &KernelParams,
    g: Geometry,
    u_star: f64,
    d_min: f64,
    opts: &IntegralOptions,
) -> Result<(f64, usize)> {
    let (r, rho, nu) = (p.r, p.r.abs(), p.nu);
    let tail = p.lambda - nu - 1.0;
    let focus = u_star.min(1.0);
    let h_u = (0.1 * d_min.sqrt() / (rho * g.a)).max(PANEL_FLOOR);
    let h_v = (0.1 * d_min / (2.0 * rho * g.a * g.b)).max(PANEL_FLOOR);

    let mut u_rule = GradedRule::new(
        (0.0, 1.0),
        focus,
        (2.0 * nu, tail),
        panel_order(opts.qu),
        h_u,
    )?;
    u_rule.scale_weights(h_normalizer(p.lambda, nu));
    let mut q_rule = GradedRule::new((0.0, 2.0), 0.0, (nu - 1.0, nu - 1.0), panel_order(opts.qv), h_v)?;
    q_rule.scale_weights(g_normalizer(nu - 0.5));

    let power = -(nu + 1.0);
    let a2 = g.a * g.a;
    let mut outer = Neumaier::new();
    for un in &u_rule.nodes {
        let u = un.x;
        let one_minus_u = un.to_hi;
        let weight = un.weight * if tail != 0.0 { (1.0 + u).powf(tail) } else { 1.0 };
        let star_gap = if u_star <= 1.0 {
            -un.offset
        } else {
            (u_star - 1.0) + one_minus_u
        };
        let gap = rho * g.a * star_gap;
        let fixed = g.dy * g.dy + gap * gap;
        let slope = 2.0 * rho * u * g.a * g.b;
        let num = (1.0 - r) * (1.0 + r) + r * r * a2 * one_minus_u * (1.0 + u);
        let inner: Neumaier = q_rule
            .nodes
            .iter()
            .map(|qn: &GradedNode| qn.weight * (fixed + slope * qn.offset).powf(power))
            .collect();
        outer.add(weight * num * inner.sum());
    }
    Ok((outer.sum(), u_rule.len() * q_rule.len()))
}

/// Double-integral evaluation with tensor sizes `(qu, qv)`. The error estimate
/// is the change from the rule with half as many nodes in each direction.
pub fn kernel_integral(p: &KernelParams, qu: usize, qv: usize) -> Result<KernelEvaluation> {
    kernel_integral_with(p, &IntegralOptions::with_nodes(qu, qv))
}

pub fn kernel_integral_with(p: &KernelParams, opts: &IntegralOptions) -> Result<KernelEvaluation> {
    p.require_admissible("kernel_integral")?;
    let g = Geometry::of(p);
    let (value, evaluations) = integral_once(p, g, opts)?;
    let est_error = if evaluations == 0 {
        0.0
    } else {
        (value - integral_once(p, g, &opts.halved())?.0).abs()
    };
    Ok(KernelEvaluation {
        value,
        method: Method::Integral,
        resolution: Resolution::Nodes {
            qu: opts.qu,
            qv: opts.qv,
            evaluations,
        },
        est_error,
    })
}

/// Doubles the quadrature sizes from `opts` until two successive values differ
/// by less than `tol` or the sizes reach [`MAX_ADAPTIVE_NODES`]; the last
/// difference is reported as the error estimate.
pub fn kernel_integral_adaptive(
    p: &KernelParams,
    opts: &IntegralOptions,
    tol: f64,
) -> Result<KernelEvaluation> {
    p.require_admissible("kernel_integral")?;
    let g = Geometry::of(p);
    let mut current = *opts;
    let (mut value, mut evaluations) = integral_once(p, g, &current)?;
    let mut est_error = 0.0;
    while evaluations > 0 {
        let next = current.doubled();
        if next == current {
            break;
        }
        let (v, e) = integral_once(p, g, &next)?;
        est_error = (v - value).abs();
        value = v;
        evaluations = e;
        current = next;
        if est_error < tol {
            break;
        }
    }
    Ok(KernelEvaluation {
        value,
        method: Method::Integral,
        resolution: Resolution::Nodes {
            qu: current.qu,
            qv: current.qv,
            evaluations,
        },
        est_error,
    })
}

/// Options for integrating against `M_ν^λ(x; dy) = m_ν^λ(x; y) G_ν(dy)` at `r = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    /// Nodes per panel of the `y` rule, which is graded toward `y = x`.
    pub qy: usize,
    /// Smallest `y` panel next to `x`.
    pub y_floor: f64,
    pub kernel: IntegralOptions,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            qy: 12,
            y_floor: 1e-10,
            kernel: IntegralOptions::default(),
        }
    }
}

/// The kernel density `y ↦ m_ν^λ(x; y)` tabulated at the nodes of a `G_ν` rule
/// graded toward `y = x`, where the density has an algebraic cusp of order
/// `λ - ν - 1`.
#[derive(Debug, Clone)]
pub struct KernelProjection {
    pub lambda: f64,
    pub nu: f64,
    pub x: f64,
    /// `(y, G_ν weight, m(x; y))`
    pub table: Vec<(f64, f64, f64)>,
}

impl KernelProjection {
    pub fn new(lambda: f64, nu: f64, x: f64, opts: &ProjectionOptions) -> Result<Self> {
        let p = KernelParams::new(lambda, nu, 1.0, x, 0.0)?;
        p.require_admissible("kernel_projection")?;
        if opts.qy < 1 {
            return Err(domain("kernel_projection", "qy must be >= 1"));
        }
        let e = nu - 0.5;
        let mut y_rule = GradedRule::new((-1.0, 1.0), x, (e, e), opts.qy, opts.y_floor)?;
        y_rule.scale_weights(g_normalizer(nu));
        let a = ((1.0 - x) * (1.0 + x)).sqrt();

        let table = y_rule
            .nodes
            .par_iter()
            .map(|n| {
                let g = Geometry {
                    a,
                    b: (n.to_lo * n.to_hi).sqrt(),
                    dy: n.offset,
                };
                let py = KernelParams { y: n.x, ..p };
                integral_once(&py, g, &opts.kernel).map(|(m, _)| (n.x, n.weight, m))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambda,
            nu,
            x,
            table,
        })
    }

    /// `∫ f(y) M_ν^λ(x; dy)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.table
            .iter()
            .map(|&(y, w, m)| w * m * f(y))
            .collect::<Neumaier>()
            .sum()
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    /// `∫ W_n^ν(y) M_ν^λ(x; dy)`, which should reproduce `W_n^λ(x)`.
    pub fn project(&self, n: usize) -> f64 {
        let nu = self.nu;
        self.integrate(|y| crate::gegenbauer::w_unchecked(n, nu, y))
    }

    pub fn min_density(&self) -> f64 {
        self.table.iter().map(|t| t.2).fold(f64::INFINITY, f64::min)
    }
}

fn require_unit_radius(op: &'static str, p: &KernelParams) -> Result<()> {
    if p.r == 1.0 {
        Ok(())
    } else {
        Err(domain(op, format!("defined for r = 1, got r = {}", p.r)))
    }
}

/// `∫ m_ν^λ(x; y) G_ν(dy)`, which equals one. Needs `r = 1` and `λ > ν + 1`;
/// `p.y` is ignored.
pub fn kernel_mass(p: &KernelParams, qy: usize) -> Result<f64> {
    require_unit_radius("kernel_mass", p)?;
    let opts = ProjectionOptions {
        qy,
        ..ProjectionOptions::default()
    };
    Ok(KernelProjection::new(p.lambda, p.nu, p.x, &opts)?.mass())
}

/// `∫ W_n^ν(y) M_ν^λ(x; dy)`. For `λ > ν + 1` this integrates the kernel
/// density; inside `ν < λ <= ν + 1` it falls back to the Feldheim-Vilenkin
/// integral, which needs no density. `p.y` is ignored.
pub fn project(n: usize, p: &KernelParams) -> Result<f64> {
    require_unit_radius("project", p)?;
    if p.in_singular_range() {
        return crate::identities::feldheim_vilenkin_integral(p.lambda, p.nu, n, p.x, n / 2 + 16);
    }
    Ok(KernelProjection::new(p.lambda, p.nu, p.x, &ProjectionOptions::default())?.project(n))
}

/// [`project`] for every degree `0..=n_max`, sharing one density table.
pub fn project_up_to(n_max: usize, p: &KernelParams) -> Result<Vec<f64>> {
    require_unit_radius("project", p)?;
    if p.in_singular_range() {
        return (0..=n_max)
            .map(|n| crate::identities::feldheim_vilenkin_integral(p.lambda, p.nu, n, p.x, n / 2 + 16))
            .collect();
    }
    let table = KernelProjection::new(p.lambda, p.nu, p.x, &ProjectionOptions::default())?;
    Ok((0..=n_max).map(|n| table.project(n)).collect())
}
