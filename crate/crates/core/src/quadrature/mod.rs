//! Probability measures `G_ν` and `H_ν^λ`, and the quadrature rules that
//! integrate against them.

mod graded;
mod jacobi;
mod measure;

pub use graded::{GradedNode, GradedRule, GRADING_RATIO};
pub use jacobi::{gauss_jacobi, gauss_jacobi_cached, jacobi_mass, jacobi_rule, JacobiRule, MAX_NODES};
pub use measure::{density_g, density_h, g_normalizer, h_normalizer, sonine_rule, GMeasure, HMeasure};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::sum::Neumaier;

/// Nodes and positive weights on a fixed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Highest polynomial degree integrated exactly against the weight
    /// (for the `[0, 1]` Sonine rules: degree in `u²`).
    pub exactness_degree: usize,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().copied().collect::<Neumaier>().sum()
    }

    /// `Σ w_i f(x_i)` with compensated summation in node order.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect::<Neumaier>()
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `node,weight` lines, header first, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,weight\n");
        for (x, w) in self.iter() {
            let _ = writeln!(out, "{x:.16e},{w:.16e}");
        }
        out
    }
}
