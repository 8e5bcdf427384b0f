use thiserror::Error;

/// Errors raised by the evaluators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// The result is not representable as a finite `f64`.
    #[error("range error in {op}: {reason}")]
    Range { op: &'static str, reason: String },

    /// The evaluation scheme cannot deliver a meaningful number of digits.
    #[error("accuracy error in {op}: {reason}")]
    Accuracy { op: &'static str, reason: String },

    /// A series was asked to sum where it is not absolutely convergent.
    #[error("convergence error in {op}: {reason}")]
    Convergence { op: &'static str, reason: String },

    /// `|r| = 1` with `nu < lambda <= nu + 1`: the kernel has no usable
    /// density evaluation there and diverges on the diagonal.
    #[error(
        "singular configuration in {op}: |r| = 1 requires lambda > nu + 1, \
         got lambda = {lambda}, nu = {nu} (excluded range nu < lambda <= nu + 1)"
    )]
    SingularRange {
        op: &'static str,
        lambda: f64,
        nu: f64,
    },

    /// The projection measure is a point mass, so no density exists.
    #[error("Dirac case in {op}: {reason}")]
    Dirac { op: &'static str, reason: String },

    /// Something went wrong inside a numerical building block.
    #[error("internal error in {op}: {reason}")]
    Internal { op: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        op,
        reason: reason.into(),
    }
}
