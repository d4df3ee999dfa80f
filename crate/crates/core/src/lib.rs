//! Invariants, Cartan connections and Einstein-Weyl data for third-order
//! ODEs `y''' = F(x, y, y', y'')`.
//!
//! Symbolic work is exact over the rationals; numeric work is generic over
//! `num_traits::Float` with `f64` as the default scalar.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod extcalc;
pub mod invariants;
pub mod oracle;
pub mod prolong;
pub mod symkernel;

pub use error::{Error, Result};
pub use prolong::{prolong, transform_ode, verify_equivalence, MapKind, ProlongedMap, VariableMap};
pub use invariants::{scalar_invariant, total_derivative, InvariantName, Jet, Ode3};
pub use symkernel::{Expr, Frac, Point, ProbeConfig, Var, ZeroVerdict};

/// Default floating scalar.
pub type Real = f64;
/// Exact scalar used by the symbolic kernel.
pub type Rational = num_rational::BigRational;
