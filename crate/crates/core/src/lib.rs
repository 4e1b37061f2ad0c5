//! Weighted rearrangements on convex cones and the Moser variational problem.
//!
//! The crate is organised bottom-up:
//!
//! - [`weights`]: monomial weights `w(x) = prod x_j^{A_j}` on orthant-type cones and
//!   the geometric constants `C_D = mu(B_1 ∩ Σ)` and `P_w` they induce.
//! - [`grid`]: sampled, compactly supported functions on boxes inside the cone.
//! - [`rearrange`]: distribution functions, the nonincreasing rearrangement and the
//!   radial rearrangement with respect to `mu`, with numerical checks of
//!   equimeasurability and of the Pólya–Szegő inequality.
//! - [`reduction`]: the change of variables `r = R e^{-t/D}` that turns a radial profile
//!   into a nondecreasing profile `phi` on `[0, inf)`, and both integral identities.
//! - [`moser`]: discretised maximisation of `int exp(beta phi^{q'} - t) dt` under
//!   `int (phi')^q dt <= 1`, and the lift of the maximiser back to the cone.
//!
//! Data-parallel loops go through [`parallel`]; disabling the default `parallel`
//! feature gives a purely sequential build with bit-identical results.

pub mod error;
pub mod fixtures;
pub mod grid;
pub mod io;
pub mod moser;
pub mod parallel;
pub mod quadrature;
pub mod rearrange;
pub mod reduction;
pub mod weights;

pub use error::{Error, Result};
pub use grid::GridFunction;
pub use moser::{MoserProblem, MoserReport, OptimizerSettings};
pub use rearrange::{RadialProfile, StepDistribution};
pub use reduction::{OneDProfile, ReductionReport};
pub use weights::{ConeSpec, GeometricConstants, HomogeneousWeight, WeightSpec};
