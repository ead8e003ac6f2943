//! Skew-symmetric graphs and their Lotka-Volterra systems.
//!
//! A skew-symmetric graph is a finite vertex set together with a
//! skew-symmetric arc-value matrix. Each such graph determines a quadratic
//! Poisson structure `{x_s, x_t} = a_{s,t} x_s x_t` and the Lotka-Volterra
//! vector field `ẋ_s = x_s Σ_t a_{s,t} x_t`. This crate implements both
//! sides of that correspondence:
//!
//! * [`graph`]: exact graph structure: construction, cloning, decloning
//!   (quotient by equal adjacency rows), morphism checks, isomorphism and
//!   automorphism search, and the product formula for automorphism orders.
//! * [`lv`]: the LV systems themselves: bracket and vector-field
//!   evaluation, exact rank and Casimir bases, linear LV-morphism checking
//!   with normal forms and decloning, and the column-stochastic block
//!   automorphisms of reducible systems.
//! * [`families`]: the classical examples: Kac-van Moerbeke circuits,
//!   Bogoyavlenskij systems `B(n,k)`, maximal-interaction tournaments and
//!   open chains.
//! * [`lax`]: Lax pairs with spectral parameter for `B(n,k)`, their
//!   pullbacks to cloned systems, the block Lax pair in which every clone
//!   coordinate appears, and numerical residual certification.
//! * [`dynamics`]: fixed-step RK4 integration with drift reports for
//!   first integrals, clone-ratio Casimirs, flow commutation with the
//!   decloning map, and numerical independence/involutivity certificates.
//!
//! Structural computations (row equality, ranks, nullspaces, morphism
//! conditions) are exact over the rationals; only trajectory integration
//! and Lax residuals use floating point. The linear algebra kernel is
//! generic over the scalar, with the concrete choices pinned by the
//! [`Rat`] and [`Real`] aliases below.

pub mod dynamics;
pub mod families;
pub mod graph;
pub mod io;
pub mod lax;
pub mod lv;
pub mod matrix;
pub mod sampling;
pub mod scalar;

/// Exact scalar used for all structural data (arc values, morphism
/// matrices, Casimir exponents).
pub type Rat = num::BigRational;

/// Floating-point scalar used by the numeric layer (integration, Lax
/// residuals, drift measurement).
pub type Real = f64;

pub use graph::{DecloneResult, GraphError, GraphMap, PermutationGroup, SkewGraph, WeightVector};
pub use lv::{CasimirMonomial, LinearMap, LvSystem};
pub use matrix::Matrix;
pub use scalar::{rat, ratq, Scalar};
