//! Geodesics of homogeneous spaces `G/H` whose metric is a chain deformation
//! of a naturally reductive one. Through the origin such a geodesic is the
//! orbit of a product of `N` one-parameter subgroups,
//! `γ(t) = exp(tX_1) ⋯ exp(tX_N) H`, with generators determined by the
//! initial velocity and the metric eigenvalues.
//!
//! The crate is layered bottom-up:
//!
//! * [`numkernel`]: dense matrix numerics (exponential, logarithm, symmetric
//!   eigenproblems, finite differences).
//! * [`liealgebra`]: the `so(n)` catalog, brackets, adjoint maps and
//!   invariant forms.
//! * [`homogeneous`]: reductive splits, chain metrics and hypothesis checkers.
//! * [`geodesic`]: generators, product curves, transport maps and residuals.
//! * [`oracle`]: an independent RK4 integration of the horizontal geodesic
//!   equation and coset comparison.

pub mod error;
pub mod geodesic;
pub mod homogeneous;
pub mod liealgebra;
pub mod numkernel;
pub mod oracle;

pub use error::{Error, Result};
pub use geodesic::{generators_from_velocity, GeneratorSet, LaxResidual, LiftSample, ProductCurve};
pub use homogeneous::{build_chain_metric, reductive_split, ChainMetric, ReductiveSplit, SubalgebraChain};
pub use liealgebra::{AlgebraVector, GroupElement, InvariantForm, LieAlgebraBasis};
pub use numkernel::Matrix;
pub use oracle::{compare_paths, integrate_horizontal, OdeConfig, OdePath, OrbitMap};
