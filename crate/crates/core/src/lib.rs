//! Bochner-normalized ultraspherical polynomials `W_n^λ`, the Askey-Fitch
//! projection kernel between two indices, and dimension walks of
//! positive-definite functions on spheres.
//!
//! ```
//! use ultrakernel::{eval_w, kernel_integral, kernel_series, KernelParams};
//!
//! assert_eq!(eval_w(7, 1.25, 1.0).unwrap(), 1.0);
//!
//! let p = KernelParams::new(3.0, 0.5, 0.9, 0.2, -0.4).unwrap();
//! let series = kernel_series(&p, 400).unwrap();
//! let integral = kernel_integral(&p, 64, 64).unwrap();
//! assert!((series.value - integral.value).abs() < 1e-8);
//! ```

// `!(a < b)` is used on purpose so that NaN fails every check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod dimwalk;
mod error;
pub mod gegenbauer;
pub mod identities;
pub mod kernel;
pub mod quadrature;
mod sum;

pub use bessel::{eval_lambda, BesselQuery};
pub use dimwalk::{
    dim_to_index, eval_mixture, index_to_dim, lift, verify_lift, SchoenbergSeq, SphereDim,
};
pub use error::{Error, Result};
pub use gegenbauer::{
    eval_w, eval_w_index, eval_w_infinity, weight_omega, Index, OmegaQuery, PolyQuery,
};
pub use identities::{check_multiplication, feldheim_vilenkin, sonine, ValidationReport};
pub use kernel::{
    kernel_integral, kernel_mass, kernel_series, poisson_closed_form, project, project_up_to,
    KernelEvaluation, KernelParams, Method,
};
pub use quadrature::{density_g, density_h, gauss_jacobi, GMeasure, HMeasure, QuadratureRule};
pub use sum::Neumaier;
