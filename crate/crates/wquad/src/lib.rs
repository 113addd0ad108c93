//! Weighted Gaussian quadrature for uniform B-spline spaces, and row-wise
//! isogeometric mass/stiffness assembly built on those rules.
//!
//! The crate derives weighted quadrature rules whose weight function is an
//! interior B-spline basis function (mass terms) or its derivative
//! (stiffness terms), for uniform C^1 quadratic and C^2 cubic spaces. A
//! Gaussian rule needs only p+1 nodes, one per element of the weight's
//! support; the classical fixed-node (Newton-Cotes-type) weighted rules
//! need 2p+1. Matrices assembled row by row with these rules agree with
//! exact integration to machine precision for affine geometry, at roughly
//! half the basis-evaluation cost of the fixed-node weighted scheme.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release --example derive_rules
//! cargo run --release --example newton_failure
//! cargo run --release --example matrix_equivalence
//! cargo run --release --example evaluation_counts
//! cargo run --release --example spectrum_overlay
//! cargo run --release --example eigen_convergence
//! cargo run --release --example poisson_convergence
//! ```
//!
//! The same functionality is scriptable through the `wquad` binary
//! (`derive-rules`, `assemble`, `study` subcommands).

pub mod assemble;
pub mod commands;
pub mod config;
pub mod eig;
pub mod error;
pub mod export;
pub mod oracle;
pub mod rules;
pub mod spline;
pub mod validate;

pub use error::{Error, Result};
pub use oracle::RuleKind;
pub use rules::{RuleFamily, WeightedRule};
pub use spline::{CardinalPatch, KnotVector, SplineSpace};
