//! Floating-point evaluation, generic over the scalar type.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Float, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::error::KernelError;
use super::expr::{Expr, Func, Node};
use super::frac::{AtomKind, Frac};
use super::poly::{Poly, Q};
use super::var::{Atom, Gen, Var};

/// Assignment of values to variables and parameters.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub vars: BTreeMap<Var, T>,
    pub params: BTreeMap<String, T>,
}

impl<T: Copy> Point<T> {
    pub fn new() -> Self {
        Point {
            vars: BTreeMap::new(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, v: Var, x: T) -> Self {
        self.vars.insert(v, x);
        self
    }

    pub fn with_param(mut self, name: &str, x: T) -> Self {
        self.params.insert(name.to_string(), x);
        self
    }

    pub fn var(&self, v: Var) -> Result<T, KernelError> {
        self.vars
            .get(&v)
            .copied()
            .ok_or_else(|| KernelError::Unbound(v.name().to_string()))
    }

    pub fn param(&self, p: &str) -> Result<T, KernelError> {
        self.params
            .get(p)
            .copied()
            .ok_or_else(|| KernelError::Unbound(p.to_string()))
    }
}

impl<T: fmt::Display> fmt::Display for Point<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, x) in &self.vars {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{v}={x}")?;
        }
        for (p, x) in &self.params {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{p}={x}")?;
        }
        Ok(())
    }
}

/// Exact rational to float, converting once.
pub fn q_to_float<T: Float>(c: &Q) -> T {
    T::from(c.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(T::nan)
}

fn real_root<T: Float>(b: T, d: u32) -> Result<T, KernelError> {
    if b < T::zero() && d % 2 == 0 {
        return Err(KernelError::Domain("even root of a negative number".into()));
    }
    let r = match d {
        2 => b.sqrt(),
        3 => b.cbrt(),
        _ => {
            let inv = T::one() / T::from(d).expect("small integer");
            b.abs().powf(inv).copysign(b)
        }
    };
    Ok(r)
}

fn apply_func<T: Float>(f: Func, a: T) -> Result<T, KernelError> {
    Ok(match f {
        Func::Exp => a.exp(),
        Func::Ln => {
            if a <= T::zero() {
                return Err(KernelError::Domain("ln of a non-positive number".into()));
            }
            a.ln()
        }
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
    })
}

fn rational_power<T: Float>(b: T, e: &Q) -> Result<T, KernelError> {
    let n = e.numer().to_i32().ok_or_else(|| KernelError::Domain("exponent too large".into()))?;
    let d = e.denom().to_u32().ok_or_else(|| KernelError::Domain("exponent too large".into()))?;
    if d == 1 {
        if n < 0 && b == T::zero() {
            return Err(KernelError::DivisionByZero);
        }
        return Ok(b.powi(n));
    }
    let r = real_root(b, d)?;
    if n < 0 && r == T::zero() {
        return Err(KernelError::DivisionByZero);
    }
    Ok(r.powi(n))
}

impl Expr {
    /// Evaluate at a point in the scalar type `T`.
    pub fn eval<T: Float>(&self, at: &Point<T>) -> Result<T, KernelError> {
        Ok(match self.node() {
            Node::Num(c) => q_to_float(c),
            Node::Var(v) => at.var(*v)?,
            Node::Param(p) => at.param(p)?,
            Node::Sum(ts) => {
                let mut acc = T::zero();
                for t in ts {
                    acc = acc + t.eval(at)?;
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = T::one();
                for f in fs {
                    acc = acc * f.eval(at)?;
                }
                acc
            }
            Node::Quotient(a, b) => {
                let d = b.eval(at)?;
                if d == T::zero() {
                    return Err(KernelError::DivisionByZero);
                }
                a.eval(at)? / d
            }
            Node::Power(b, e) => rational_power(b.eval(at)?, e)?,
            Node::Apply(f, a) => apply_func(*f, a.eval(at)?)?,
        })
    }
}

pub(crate) struct Evaluator<'a, T> {
    at: &'a Point<T>,
    atoms: HashMap<Atom, T>,
}

impl<'a, T: Float> Evaluator<'a, T> {
    pub(crate) fn new(at: &'a Point<T>) -> Self {
        Evaluator {
            at,
            atoms: HashMap::new(),
        }
    }

    fn gen(&mut self, g: &Gen) -> Result<T, KernelError> {
        match g {
            Gen::Var(v) => self.at.var(*v),
            Gen::Param(p) => self.at.param(p),
            Gen::Atom(a) => {
                if let Some(x) = self.atoms.get(a) {
                    return Ok(*x);
                }
                let x = match &a.0.kind {
                    AtomKind::Root { base, deg } => real_root(self.frac(base)?.0, *deg)?,
                    AtomKind::Func { func, arg } => apply_func(*func, self.frac(arg)?.0)?,
                };
                self.atoms.insert(a.clone(), x);
                Ok(x)
            }
        }
    }

    /// Value and largest term magnitude.
    fn poly(&mut self, p: &Poly) -> Result<(T, T), KernelError> {
        let mut acc = T::zero();
        let mut mag = T::zero();
        for (m, c) in p.terms() {
            let mut t: T = q_to_float(c);
            for (g, e) in &m.0 {
                t = t * self.gen(g)?.powi(*e as i32);
            }
            mag = mag.max(t.abs());
            acc = acc + t;
        }
        Ok((acc, mag))
    }

    pub(crate) fn frac(&mut self, f: &Frac) -> Result<(T, T), KernelError> {
        let (n, nm) = self.poly(&f.num)?;
        if f.den.is_one() {
            return Ok((n, nm));
        }
        let (d, _) = self.poly(&f.den)?;
        if d == T::zero() || !d.is_finite() {
            return Err(KernelError::DivisionByZero);
        }
        Ok((n / d, nm / d.abs()))
    }
}

impl Frac {
    pub fn eval<T: Float>(&self, at: &Point<T>) -> Result<T, KernelError> {
        Evaluator::new(at).frac(self).map(|v| v.0)
    }

    /// Value together with the magnitude of the largest numerator term.
    pub fn eval_with_scale<T: Float>(&self, at: &Point<T>) -> Result<(T, T), KernelError> {
        Evaluator::new(at).frac(self)
    }
}

/// Free function form of [`Expr::eval`].
pub fn eval_numeric<T: Float>(e: &Expr, at: &Point<T>) -> Result<T, KernelError> {
    e.eval(at)
}
