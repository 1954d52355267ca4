//! Topological entropy of suspension flows over countable-state Markov
//! chains.
//!
//! The input is a countable directed graph with a positive height attached
//! to every vertex, described by finitely many vertex classes (explicit
//! finite classes and integer-indexed infinite families) plus a finite set
//! of forbidden edges. When the follower and leading sets are constant on a
//! finite partition of the vertices, the suspension flow over the shift
//! with that height function has entropy `-ln(x_hat)`, where `x_hat` is the
//! point at which the generating function of first-return cycles through a
//! fixed root reaches one, or the radius of convergence of that function if
//! it never does.
//!
//! The pipeline:
//!
//! 1. [`parser`] reads the on-disk format into a validated [`RftSpec`].
//! 2. [`quotient`] refines the declared classes by follower/leading
//!    signatures and builds the finite quotient graph for a root vertex.
//! 3. [`series`] evaluates the per-class weight series with rigorous
//!    truncation bounds and computes the radius of the vertex series.
//! 4. [`genfun`] assembles the weighted class system and evaluates the
//!    cycle generating function, through a dense linear solve and through
//!    two independent closed forms used as cross-checks.
//! 5. [`solver`] locates the first singularity, finds `x_hat`, and decides
//!    whether the flow carries a measure of maximal entropy.
//! 6. [`oracle`] brute-forces cycles on finite truncations as ground truth.
//!
//! Grid scans and the enumeration fan-out run data-parallel under the
//! `parallel` feature (on by default); disabling it yields a dependency-free
//! sequential build with identical results.

pub mod expr;
pub mod genfun;
mod linalg;
pub mod model;
pub mod oracle;
pub mod par;
pub mod parser;
pub mod quotient;
pub mod report;
pub mod series;
pub mod solver;

pub use expr::{ExprError, WeightExpr};
pub use genfun::{EvalStatus, GenFunError, GenFunEval, WeightedSystem};
pub use model::{ClassDecl, ClassKind, EdgeDecl, EdgeMode, ModelError, RftSpec, VertexRef};
pub use oracle::{CyclePoly, OracleError, TruncatedGraph};
pub use parser::{parse_spec, ParseError};
pub use quotient::{build_quotient, refine_partition, tree_level_check, QuotientGraph};
pub use series::{RadiusEstimate, SeriesError, SeriesValue};
pub use solver::{solve_entropy, EntropyReport, EvalPath, Mme, SolveError, SolverConfig};

use thiserror::Error;

/// Umbrella error for the whole pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    GenFun(#[from] GenFunError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Coarse classification used by the command-line front end to pick exit
/// codes: specification problems, numerical conditions, or blown budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Spec,
    Numerical,
    Budget,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_) | Error::Model(_) => ErrorKind::Spec,
            Error::Series(SeriesError::Budget { .. }) => ErrorKind::Budget,
            Error::Series(_) => ErrorKind::Numerical,
            Error::GenFun(GenFunError::Series(SeriesError::Budget { .. })) => ErrorKind::Budget,
            Error::GenFun(GenFunError::Model(_)) => ErrorKind::Spec,
            Error::GenFun(_) => ErrorKind::Numerical,
            Error::Solve(SolveError::Series(SeriesError::Budget { .. })) => ErrorKind::Budget,
            Error::Solve(SolveError::GenFun(GenFunError::Series(SeriesError::Budget {
                ..
            }))) => ErrorKind::Budget,
            Error::Solve(_) => ErrorKind::Numerical,
            Error::Oracle(OracleError::BudgetExceeded { .. })
            | Error::Oracle(OracleError::TruncationTooLarge { .. }) => ErrorKind::Budget,
            Error::Oracle(OracleError::Model(_)) | Error::Oracle(OracleError::UnknownVertex(_)) => {
                ErrorKind::Spec
            }
        }
    }
}
