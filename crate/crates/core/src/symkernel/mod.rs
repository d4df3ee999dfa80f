//! Exact symbolic kernel: expression trees, canonical rational forms with
//! radical and transcendental kernels, numeric evaluation and zero testing.

mod error;
mod eval;
mod expr;
mod frac;
mod modgcd;
mod parse;
mod poly;
mod probe;
mod var;

pub use error::KernelError;
pub use eval::{eval_numeric, q_to_float, Point};
pub use expr::{Expr, Func, Node};
pub use frac::Frac;
pub use parse::{parse, parse_with};
pub use poly::{Mono, Poly, Q};
pub use probe::{
    constancy, is_constant, is_zero, is_zero_frac, sample_points, Constancy, ProbeConfig, ProbeSummary, Sampler,
    Witness, ZeroVerdict,
};
pub use var::{Gen, Var};

use std::collections::BTreeMap;

/// Partial derivative of an expression, normalised.
pub fn diff(e: &Expr, v: Var) -> Result<Expr, KernelError> {
    Ok(e.to_frac()?.diff(v).to_expr())
}

/// Simultaneous substitution, normalised.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Var, Expr>) -> Result<Expr, KernelError> {
    e.substitute(bindings)
}

/// Exact rational `n/d`.
pub fn rat(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}
