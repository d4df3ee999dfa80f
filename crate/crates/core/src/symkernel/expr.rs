use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::error::KernelError;
use super::frac::{AtomKind, Frac};
use super::poly::{Mono, Poly, Q};
use super::var::{Gen, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Num(Q),
    Var(Var),
    Param(Arc<str>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quotient(Expr, Expr),
    Power(Expr, Q),
    Apply(Func, Expr),
}

/// Immutable expression tree with exact rational constants.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expr(Arc<Node>);

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(c: Q) -> Expr {
        Expr(Arc::new(Node::Num(c)))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(Q::from_integer(BigInt::from(n)))
    }

    pub fn var(v: Var) -> Expr {
        Expr(Arc::new(Node::Var(v)))
    }

    pub fn param(name: &str) -> Expr {
        Expr(Arc::new(Node::Param(Arc::from(name))))
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        match terms.len() {
            0 => Expr::int(0),
            1 => terms.into_iter().next().expect("one term"),
            _ => Expr(Arc::new(Node::Sum(terms))),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        match factors.len() {
            0 => Expr::int(1),
            1 => factors.into_iter().next().expect("one factor"),
            _ => Expr(Arc::new(Node::Product(factors))),
        }
    }

    pub fn quotient(a: Expr, b: Expr) -> Expr {
        Expr(Arc::new(Node::Quotient(a, b)))
    }

    pub fn power(b: Expr, e: Q) -> Expr {
        Expr(Arc::new(Node::Power(b, e)))
    }

    pub fn apply(f: Func, a: Expr) -> Expr {
        Expr(Arc::new(Node::Apply(f, a)))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::product(vec![Expr::int(-1), a])
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node(), Node::Num(c) if c.is_zero())
    }

    /// Canonical rational-function representation.
    pub fn to_frac(&self) -> Result<Frac, KernelError> {
        Ok(match self.node() {
            Node::Num(c) => Frac::constant(c.clone()),
            Node::Var(v) => Frac::var(*v),
            Node::Param(p) => Frac::param(p),
            Node::Sum(ts) => {
                let mut acc = Frac::zero();
                for t in ts {
                    acc = &acc + &t.to_frac()?;
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = Frac::one();
                for f in fs {
                    acc = &acc * &f.to_frac()?;
                }
                acc
            }
            Node::Quotient(a, b) => a.to_frac()?.try_div(&b.to_frac()?)?,
            Node::Power(b, e) => b.to_frac()?.pow_q(e)?,
            Node::Apply(f, a) => Frac::apply(*f, a.to_frac()?)?,
        })
    }

    pub fn normalize(&self) -> Result<Expr, KernelError> {
        Ok(self.to_frac()?.to_expr())
    }

    /// Derivative on the tree, without normalisation.
    pub fn diff(&self, v: Var) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Param(_) => Expr::int(0),
            Node::Var(w) => Expr::int(if *w == v { 1 } else { 0 }),
            Node::Sum(ts) => Expr::sum(
                ts.iter()
                    .map(|t| t.diff(v))
                    .filter(|t| !t.is_zero_literal())
                    .collect(),
            ),
            Node::Product(fs) => {
                let mut terms = Vec::new();
                for i in 0..fs.len() {
                    let d = fs[i].diff(v);
                    if d.is_zero_literal() {
                        continue;
                    }
                    let mut fac: Vec<Expr> = Vec::with_capacity(fs.len());
                    for (j, f) in fs.iter().enumerate() {
                        fac.push(if i == j { d.clone() } else { f.clone() });
                    }
                    terms.push(Expr::product(fac));
                }
                Expr::sum(terms)
            }
            Node::Quotient(a, b) => {
                let da = a.diff(v);
                let db = b.diff(v);
                let mut top = Vec::new();
                if !da.is_zero_literal() {
                    top.push(Expr::product(vec![da, b.clone()]));
                }
                if !db.is_zero_literal() {
                    top.push(Expr::product(vec![Expr::int(-1), a.clone(), db]));
                }
                if top.is_empty() {
                    return Expr::int(0);
                }
                Expr::quotient(Expr::sum(top), Expr::power(b.clone(), Q::from_integer(2.into())))
            }
            Node::Power(b, e) => {
                let db = b.diff(v);
                if db.is_zero_literal() {
                    return Expr::int(0);
                }
                Expr::product(vec![
                    Expr::num(e.clone()),
                    Expr::power(b.clone(), e - Q::one()),
                    db,
                ])
            }
            Node::Apply(f, a) => {
                let da = a.diff(v);
                if da.is_zero_literal() {
                    return Expr::int(0);
                }
                match f {
                    Func::Exp => Expr::product(vec![self.clone(), da]),
                    Func::Ln => Expr::quotient(da, a.clone()),
                    Func::Sin => Expr::product(vec![Expr::apply(Func::Cos, a.clone()), da]),
                    Func::Cos => Expr::product(vec![
                        Expr::int(-1),
                        Expr::apply(Func::Sin, a.clone()),
                        da,
                    ]),
                }
            }
        }
    }

    /// Simultaneous substitution followed by normalisation.
    pub fn substitute(&self, bindings: &BTreeMap<Var, Expr>) -> Result<Expr, KernelError> {
        let mut m = BTreeMap::new();
        for (k, v) in bindings {
            m.insert(*k, v.to_frac()?);
        }
        Ok(self.to_frac()?.subst_vars(&m)?.to_expr())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk(&mut |n| {
            if let Node::Var(v) = n {
                out.insert(*v);
            }
        });
        out
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |n| {
            if let Node::Param(p) = n {
                out.insert(p.to_string());
            }
        });
        out
    }

    fn walk(&self, f: &mut dyn FnMut(&Node)) {
        f(self.node());
        match self.node() {
            Node::Sum(xs) | Node::Product(xs) => xs.iter().for_each(|x| x.walk(f)),
            Node::Quotient(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Node::Power(b, _) => b.walk(f),
            Node::Apply(_, a) => a.walk(f),
            _ => {}
        }
    }

    pub fn to_latex(&self) -> String {
        let mut s = String::new();
        latex(self, &mut s);
        s
    }
}

impl Frac {
    /// Tree form of the canonical representation; parsing it back reproduces `self`.
    pub fn to_expr(&self) -> Expr {
        let num = poly_expr(&self.num);
        if self.den.is_one() {
            num
        } else {
            Expr::quotient(num, poly_expr(&self.den))
        }
    }
}

fn gen_power(g: &Gen, e: u32) -> Expr {
    match g {
        Gen::Var(v) => pow_int(Expr::var(*v), e),
        Gen::Param(p) => pow_int(Expr::param(p), e),
        Gen::Atom(a) => match &a.0.kind {
            AtomKind::Root { base, deg } => {
                let b = base.to_expr();
                let k = u64::from(e).gcd(&u64::from(*deg));
                if k == 1 {
                    Expr::power(b, q(i64::from(e), i64::from(*deg)))
                } else {
                    pow_int(Expr::power(b, q(1, i64::from(*deg))), e)
                }
            }
            AtomKind::Func { func, arg } => pow_int(Expr::apply(*func, arg.to_expr()), e),
        },
    }
}

fn pow_int(b: Expr, e: u32) -> Expr {
    if e == 1 {
        b
    } else {
        Expr::power(b, Q::from_integer(BigInt::from(e)))
    }
}

fn poly_expr(p: &Poly) -> Expr {
    if p.is_zero() {
        return Expr::int(0);
    }
    let terms = p
        .terms()
        .iter()
        .map(|(m, c)| term_expr(m, c))
        .collect();
    Expr::sum(terms)
}

fn term_expr(m: &Mono, c: &Q) -> Expr {
    if m.is_one() {
        return Expr::num(c.clone());
    }
    let mut fs = Vec::new();
    if !c.is_one() {
        fs.push(Expr::num(c.clone()));
    }
    for (g, e) in &m.0 {
        fs.push(gen_power(g, *e));
    }
    Expr::product(fs)
}

/// Splits a leading negative sign for pretty printing.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e.node() {
        Node::Num(c) if c.is_negative() => (true, Expr::num(-c)),
        Node::Product(fs) => {
            if let Node::Num(c) = fs[0].node() {
                if c.is_negative() {
                    let c = -c;
                    let mut rest: Vec<Expr> = fs[1..].to_vec();
                    if !c.is_one() {
                        rest.insert(0, Expr::num(c));
                    }
                    return (true, Expr::product(rest));
                }
            }
            (false, e.clone())
        }
        Node::Quotient(a, b) => {
            let (neg, a2) = split_sign(a);
            if neg {
                (true, Expr::quotient(a2, b.clone()))
            } else {
                (false, e.clone())
            }
        }
        _ => (false, e.clone()),
    }
}

fn is_atomic(e: &Expr) -> bool {
    match e.node() {
        Node::Num(c) => c.is_integer() && !c.is_negative(),
        Node::Var(_) | Node::Param(_) | Node::Apply(..) => true,
        _ => false,
    }
}

fn fmt_num(c: &Q, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn fmt_factor(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Sum(_) | Node::Quotient(..) => write!(f, "({e})"),
        Node::Num(c) if c.is_negative() => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(c) => fmt_num(c, f),
            Node::Var(v) => write!(f, "{v}"),
            Node::Param(p) => write!(f, "{p}"),
            Node::Sum(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    let (neg, abs) = split_sign(t);
                    match (i, neg) {
                        (0, true) => f.write_str("-")?,
                        (0, false) => {}
                        (_, true) => f.write_str(" - ")?,
                        (_, false) => f.write_str(" + ")?,
                    }
                    write!(f, "{abs}")?;
                }
                Ok(())
            }
            Node::Product(fs) => {
                let (neg, abs) = split_sign(self);
                if neg {
                    f.write_str("-")?;
                    return match abs.node() {
                        Node::Product(fs) => {
                            for (i, x) in fs.iter().enumerate() {
                                if i > 0 {
                                    f.write_str("*")?;
                                }
                                fmt_factor(x, f)?;
                            }
                            Ok(())
                        }
                        _ => fmt_factor(&abs, f),
                    };
                }
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    fmt_factor(x, f)?;
                }
                Ok(())
            }
            Node::Quotient(a, b) => {
                match a.node() {
                    Node::Sum(_) | Node::Quotient(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                f.write_str("/")?;
                match b.node() {
                    Node::Power(..) => write!(f, "{b}"),
                    _ if is_atomic(b) => write!(f, "{b}"),
                    _ => write!(f, "({b})"),
                }
            }
            Node::Power(b, e) => {
                if is_atomic(b) {
                    write!(f, "{b}")?;
                } else {
                    write!(f, "({b})")?;
                }
                if e.is_integer() && !e.is_negative() {
                    write!(f, "^{}", e.numer())
                } else {
                    f.write_str("^(")?;
                    fmt_num(e, f)?;
                    f.write_str(")")
                }
            }
            Node::Apply(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

fn latex_name(s: &str) -> String {
    const GREEK: [&str; 12] = [
        "alpha", "beta", "gamma", "delta", "epsilon", "lambda", "mu", "nu", "rho", "sigma",
        "tau", "omega",
    ];
    if GREEK.contains(&s) {
        format!("\\{s}")
    } else if s.len() == 1 {
        s.to_string()
    } else if let Some(idx) = s.strip_prefix('c').filter(|r| r.chars().all(|c| c.is_ascii_digit())) {
        format!("c_{{{idx}}}")
    } else {
        format!("\\mathrm{{{s}}}")
    }
}

fn latex_num(c: &Q, out: &mut String) {
    if c.is_integer() {
        out.push_str(&c.numer().to_string());
    } else {
        out.push_str(&format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom()));
    }
}

fn latex(e: &Expr, out: &mut String) {
    match e.node() {
        Node::Num(c) => latex_num(c, out),
        Node::Var(v) => out.push_str(&latex_name(v.name())),
        Node::Param(p) => out.push_str(&latex_name(p)),
        Node::Sum(ts) => {
            for (i, t) in ts.iter().enumerate() {
                let (neg, abs) = split_sign(t);
                match (i, neg) {
                    (0, true) => out.push('-'),
                    (0, false) => {}
                    (_, true) => out.push_str(" - "),
                    (_, false) => out.push_str(" + "),
                }
                latex(&abs, out);
            }
        }
        Node::Product(_) => {
            let (neg, abs) = split_sign(e);
            if neg {
                out.push('-');
            }
            let fs = match abs.node() {
                Node::Product(fs) => fs.clone(),
                _ => vec![abs.clone()],
            };
            for (i, x) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" \\, ");
                }
                if matches!(x.node(), Node::Sum(_)) {
                    out.push_str("\\left(");
                    latex(x, out);
                    out.push_str("\\right)");
                } else {
                    latex(x, out);
                }
            }
        }
        Node::Quotient(a, b) => {
            let (neg, a) = split_sign(a);
            if neg {
                out.push('-');
            }
            out.push_str("\\frac{");
            latex(&a, out);
            out.push_str("}{");
            latex(b, out);
            out.push('}');
        }
        Node::Power(b, ex) => {
            if *ex == q(1, 2) {
                out.push_str("\\sqrt{");
                latex(b, out);
                out.push('}');
                return;
            }
            if is_atomic(b) && !matches!(b.node(), Node::Apply(..)) {
                latex(b, out);
            } else {
                out.push_str("\\left(");
                latex(b, out);
                out.push_str("\\right)");
            }
            out.push_str("^{");
            if ex.is_integer() {
                out.push_str(&ex.numer().to_string());
            } else {
                out.push_str(&format!("{}/{}", ex.numer(), ex.denom()));
            }
            out.push('}');
        }
        Node::Apply(f, a) => {
            out.push_str(&format!("\\{}\\left(", f.name()));
            latex(a, out);
            out.push_str("\\right)");
        }
    }
}

impl From<&Frac> for Expr {
    fn from(f: &Frac) -> Expr {
        f.to_expr()
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl serde::Serialize for Frac {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
