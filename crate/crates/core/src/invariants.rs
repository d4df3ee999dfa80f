//! Total derivative and the named scalar invariants of `y''' = F`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symkernel::{parse_with, Expr, Frac, Gen, Q, Var};

const X: Var = Var::X;
const Y: Var = Var::Y;
const P: Var = Var::P;
const QQ: Var = Var::Q;

fn r(n: i64, d: i64) -> Frac {
    Frac::ratio(n, d)
}

/// Third-order ODE given by its right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct Ode3 {
    f: Frac,
    params: BTreeSet<String>,
}

impl Ode3 {
    pub fn new(f: Frac, params: BTreeSet<String>) -> Result<Ode3> {
        for v in f.vars() {
            if !Var::JET.contains(&v) {
                return Err(Error::ForeignVariable(v.name().to_string()));
            }
        }
        for p in f.params() {
            if !params.contains(&p) {
                return Err(Error::ForeignVariable(p));
            }
        }
        Ok(Ode3 { f, params })
    }

    pub fn parse(text: &str, params: &[&str]) -> Result<Ode3> {
        let ps: BTreeSet<String> = params.iter().map(|s| s.to_string()).collect();
        let e = parse_with(text, &ps)?;
        Ode3::new(e.to_frac()?, ps)
    }

    pub fn from_expr(e: &Expr, params: &BTreeSet<String>) -> Result<Ode3> {
        Ode3::new(e.to_frac()?, params.clone())
    }

    pub fn rhs(&self) -> &Frac {
        &self.f
    }

    pub fn params(&self) -> &BTreeSet<String> {
        &self.params
    }

    /// `e_x + p e_y + q e_p + F e_q`.
    pub fn total_derivative(&self, e: &Frac) -> Frac {
        let mut acc = e.diff(X);
        for (coef, v) in [(Frac::var(P), Y), (Frac::var(QQ), P), (self.f.clone(), QQ)] {
            if e.depends_on(v) {
                acc = &acc + &(&coef * &e.diff(v));
            }
        }
        acc
    }

    /// Replace parameters by exact values.
    pub fn pin(&self, values: &BTreeMap<String, Q>) -> Result<Ode3> {
        let map: BTreeMap<Gen, Frac> = values
            .iter()
            .map(|(k, v)| (Gen::Param(k.as_str().into()), Frac::constant(v.clone())))
            .collect();
        let f = self.f.subst(&map)?;
        let params = self
            .params
            .iter()
            .filter(|p| !values.contains_key(*p))
            .cloned()
            .collect();
        Ok(Ode3 { f, params })
    }
}

/// Free function form of [`Ode3::total_derivative`].
pub fn total_derivative(ode: &Ode3, e: &Frac) -> Frac {
    ode.total_derivative(e)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Base {
    F,
    K,
    L,
    M,
    W,
    Z,
}

/// Memoised partial derivatives of F and the notation-block scalars.
pub struct Jet<'a> {
    ode: &'a Ode3,
    cache: RefCell<HashMap<(Base, Vec<Var>), Frac>>,
}

impl<'a> Jet<'a> {
    pub fn new(ode: &'a Ode3) -> Self {
        Jet {
            ode,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn ode(&self) -> &Ode3 {
        self.ode
    }

    pub fn total(&self, e: &Frac) -> Frac {
        self.ode.total_derivative(e)
    }

    fn base(&self, b: Base) -> Result<Frac> {
        Ok(match b {
            Base::F => self.ode.f.clone(),
            Base::K => {
                let fq = self.f(&[QQ]);
                &(&(&r(1, 6) * &self.total(&fq)) - &(&r(1, 9) * &(&fq * &fq)))
                    - &(&r(1, 2) * &self.f(&[P]))
            }
            Base::L => {
                let k = self.k(&[]);
                &(&(&(&r(1, 3) * &(&self.f(&[QQ, QQ]) * &k))
                    - &(&r(1, 3) * &(&self.f(&[QQ]) * &self.k(&[QQ]))))
                    - &self.k(&[P]))
                    - &(&r(1, 3) * &self.f(&[Y, QQ]))
            }
            Base::M => {
                let k = self.k(&[]);
                let l = self.l(&[]);
                let t1 = &r(2, 1) * &(&self.k(&[QQ, QQ]) * &k);
                let t2 = &r(-2, 1) * &self.k(&[Y, QQ]);
                let t3 = &r(1, 3) * &(&self.f(&[QQ, QQ]) * &l);
                let t4 = &r(-2, 3) * &(&self.f(&[QQ]) * &self.l(&[QQ]));
                let t5 = &r(-2, 1) * &self.l(&[P]);
                sum(&[t1, t2, t3, t4, t5])
            }
            Base::W => {
                let k = self.k(&[]);
                &(&self.total(&k) - &(&r(2, 3) * &(&self.f(&[QQ]) * &k))) + &self.f(&[Y])
            }
            Base::Z => {
                let w = self.w(&[]);
                if w.is_zero() {
                    return Err(Error::WunschmannZero("Z".into()));
                }
                &self.total(&w).try_div(&w)? - &self.f(&[QQ])
            }
        })
    }

    fn get(&self, b: Base, d: &[Var]) -> Result<Frac> {
        let mut key: Vec<Var> = d.to_vec();
        key.sort();
        if let Some(v) = self.cache.borrow().get(&(b, key.clone())) {
            return Ok(v.clone());
        }
        let val = match key.split_last() {
            None => self.base(b)?,
            Some((last, rest)) => self.get(b, rest)?.diff(*last),
        };
        self.cache.borrow_mut().insert((b, key), val.clone());
        Ok(val)
    }

    /// Partial derivative of F, e.g. `f(&[Q, Q])` is F_qq.
    pub fn f(&self, d: &[Var]) -> Frac {
        self.get(Base::F, d).expect("F partials are total")
    }
    pub fn k(&self, d: &[Var]) -> Frac {
        self.get(Base::K, d).expect("K partials are total")
    }
    pub fn l(&self, d: &[Var]) -> Frac {
        self.get(Base::L, d).expect("L partials are total")
    }
    pub fn m(&self, d: &[Var]) -> Frac {
        self.get(Base::M, d).expect("M partials are total")
    }
    pub fn w(&self, d: &[Var]) -> Frac {
        self.get(Base::W, d).expect("W partials are total")
    }
    pub fn z(&self, d: &[Var]) -> Result<Frac> {
        self.get(Base::Z, d)
    }

    /// `W^(n/3)`, failing when W vanishes identically.
    pub fn w_third(&self, n: i64, what: &str) -> Result<Frac> {
        let w = self.w(&[]);
        if w.is_zero() {
            return Err(Error::WunschmannZero(what.into()));
        }
        Ok(w.pow_q(&crate::symkernel::rat(n, 3))?)
    }
}

pub(crate) fn sum(xs: &[Frac]) -> Frac {
    let mut acc = Frac::zero();
    for x in xs {
        acc = &acc + x;
    }
    acc
}

/// Names of the scalar invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InvariantName {
    K,
    L,
    M,
    W,
    Z,
    A1c,
    B1c,
    A1p,
    B1p,
    B2p,
    B3p,
    B4p,
    C1p,
    /// C1 read off from the curvature of the point connection.
    C1pCurv,
    A1f,
    B1f,
    C1f,
    B5f,
    #[serde(rename = "a5")]
    A5,
    #[serde(rename = "b5")]
    B5,
    #[serde(rename = "e5")]
    E5,
    #[serde(rename = "h5")]
    H5,
    #[serde(rename = "k5")]
    K5,
    EWcartan,
    RicciScalarDensity,
    LorentzObstruction,
}

impl InvariantName {
    pub const ALL: [InvariantName; 26] = [
        InvariantName::K,
        InvariantName::L,
        InvariantName::M,
        InvariantName::W,
        InvariantName::Z,
        InvariantName::A1c,
        InvariantName::B1c,
        InvariantName::A1p,
        InvariantName::B1p,
        InvariantName::B2p,
        InvariantName::B3p,
        InvariantName::B4p,
        InvariantName::C1p,
        InvariantName::C1pCurv,
        InvariantName::A1f,
        InvariantName::B1f,
        InvariantName::C1f,
        InvariantName::B5f,
        InvariantName::A5,
        InvariantName::B5,
        InvariantName::E5,
        InvariantName::H5,
        InvariantName::K5,
        InvariantName::EWcartan,
        InvariantName::RicciScalarDensity,
        InvariantName::LorentzObstruction,
    ];

    pub fn as_str(self) -> &'static str {
        use InvariantName::*;
        match self {
            K => "K",
            L => "L",
            M => "M",
            W => "W",
            Z => "Z",
            A1c => "A1c",
            B1c => "B1c",
            A1p => "A1p",
            B1p => "B1p",
            B2p => "B2p",
            B3p => "B3p",
            B4p => "B4p",
            C1p => "C1p",
            C1pCurv => "C1pCurv",
            A1f => "A1f",
            B1f => "B1f",
            C1f => "C1f",
            B5f => "B5f",
            A5 => "a5",
            B5 => "b5",
            E5 => "e5",
            H5 => "h5",
            K5 => "k5",
            EWcartan => "EWcartan",
            RicciScalarDensity => "RicciScalarDensity",
            LorentzObstruction => "LorentzObstruction",
        }
    }

    /// Whether the formula divides by W or a root of it.
    pub fn needs_nonzero_w(self) -> bool {
        use InvariantName::*;
        matches!(self, Z | A5 | B5 | E5 | H5 | K5)
    }
}

impl fmt::Display for InvariantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InvariantName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InvariantName::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownInvariant(s.to_string()))
    }
}

/// The named invariant at the identity section (with `u` left free for the
/// five-dimensional family).
pub fn scalar_invariant(ode: &Ode3, name: InvariantName) -> Result<Frac> {
    invariant_with(&Jet::new(ode), name)
}

/// Like [`scalar_invariant`] but reusing a derivative cache.
pub fn invariant_with(j: &Jet<'_>, name: InvariantName) -> Result<Frac> {
    use InvariantName::*;
    let fq = || j.f(&[QQ]);
    let fqq = || j.f(&[QQ, QQ]);
    let fqqq = || j.f(&[QQ, QQ, QQ]);
    let fqqp = || j.f(&[P, QQ, QQ]);
    if name.needs_nonzero_w() && j.w(&[]).is_zero() {
        return Err(Error::WunschmannZero(name.as_str().into()));
    }
    Ok(match name {
        K => j.k(&[]),
        L => j.l(&[]),
        M => j.m(&[]),
        W | A1c | A1p | A1f => j.w(&[]),
        Z => j.z(&[])?,
        B1c => &r(1, 6) * &j.f(&[QQ, QQ, QQ, QQ]),
        B1p => sum(&[
            &r(1, 18) * &(&fqqq() * &fq()),
            &r(1, 36) * &(&fqq() * &fqq()),
            &r(1, 6) * &fqqp(),
        ]),
        B2p => &r(1, 6) * &fqqq(),
        B3p => sum(&[
            &r(1, 6) * &j.f(&[Y, QQ, QQ]),
            &r(-1, 3) * &(&fqq() * &j.k(&[QQ])),
            &r(-1, 6) * &(&fqqq() * &j.k(&[])),
            &r(-1, 18) * &(&fqq() * &j.f(&[P, QQ])),
            &r(-1, 54) * &(&(&fqq() * &fqq()) * &fq()),
            -j.l(&[QQ]),
        ]),
        B4p => b4p(j),
        C1p => c1p_printed(j),
        C1pCurv => &c1p_printed(j) + &(&r(1, 9) * &(&(&fq() * &fq()) * &fqq())),
        B1f => &r(1, 3) * &fqq(),
        C1f => sum(&[
            &r(2, 3) * &(&fqq() * &j.k(&[])),
            &r(-1, 3) * &(&j.k(&[QQ]) * &fq()),
            -j.k(&[P]),
            &r(-2, 3) * &j.f(&[Y, QQ]),
        ]),
        B5f => &r(-1, 3) * &(&j.total(&fqq()) + &(&r(1, 3) * &(&fqq() * &fq()))),
        A5 => five_a(j)?,
        B5 => five_b(j)?,
        E5 => five_e(j)?,
        H5 => five_h(j)?,
        K5 => five_k(j)?,
        EWcartan => {
            let c = sum(&[
                &r(1, 3) * &j.total(&fq()),
                &r(-2, 9) * &(&fq() * &fq()),
                -j.f(&[P]),
            ]);
            sum(&[
                &c * &fqq(),
                &r(2, 3) * &(&fq() * &j.f(&[P, QQ])),
                &r(-2, 1) * &j.f(&[Y, QQ]),
                j.f(&[P, P]),
            ])
        }
        RicciScalarDensity => &r(6, 1) * &b4p(j),
        LorentzObstruction => {
            let x = lorentz_x(j);
            &j.total(&x) + &(&r(2, 3) * &(&fq() * &x))
        }
    })
}

fn b4p(j: &Jet<'_>) -> Frac {
    let fq = j.f(&[QQ]);
    let fqq = j.f(&[QQ, QQ]);
    sum(&[
        j.k(&[QQ, QQ]),
        &r(1, 9) * &(&j.f(&[QQ, QQ, QQ]) * &fq),
        &r(1, 3) * &j.f(&[P, QQ, QQ]),
        &r(1, 12) * &(&fqq * &fqq),
    ])
}

fn c1p_printed(j: &Jet<'_>) -> Frac {
    sum(&[
        &r(2, 1) * &(&j.f(&[QQ, QQ]) * &j.k(&[])),
        &r(2, 3) * &(&j.f(&[QQ]) * &j.f(&[P, QQ])),
        &r(-2, 1) * &j.f(&[Y, QQ]),
        j.f(&[P, P]),
        &r(2, 1) * &j.w(&[QQ]),
    ])
}

/// `6K_qq + (2/3)F_qqq F_q + 2F_qqp + (1/2)F_qq^2`.
pub fn lorentz_x(j: &Jet<'_>) -> Frac {
    let fqq = j.f(&[QQ, QQ]);
    sum(&[
        &r(6, 1) * &j.k(&[QQ, QQ]),
        &r(2, 3) * &(&j.f(&[QQ, QQ, QQ]) * &j.f(&[QQ])),
        &r(2, 1) * &j.f(&[P, QQ, QQ]),
        &r(1, 2) * &(&fqq * &fqq),
    ])
}

fn u() -> Frac {
    Frac::var(Var::U)
}

fn five_a(j: &Jet<'_>) -> Result<Frac> {
    let z = j.z(&[])?;
    let num = sum(&[
        j.k(&[]),
        &r(1, 18) * &(&z * &z),
        &r(1, 9) * &(&z * &j.f(&[QQ])),
        &r(-1, 3) * &j.total(&z),
    ]);
    Ok(num.try_div(&j.w_third(2, "a5")?)?)
}

fn five_b(j: &Jet<'_>) -> Result<Frac> {
    let z = j.z(&[])?;
    let zq = j.z(&[QQ])?;
    let fq = j.f(&[QQ]);
    let k = j.k(&[]);
    let inner = sum(&[
        &r(1, 27) * &(&j.f(&[QQ, QQ]) * &(&z * &z)),
        &sum(&[j.k(&[QQ]), &r(-1, 3) * &j.z(&[P])?, &r(-2, 9) * &(&fq * &zq)]) * &z,
        &(&(&r(1, 3) * &j.total(&z)) - &(&r(2, 1) * &k)) * &zq,
        j.z(&[Y])?,
        &j.f(&[QQ, QQ]) * &k,
        &r(-3, 1) * &j.k(&[P]),
        -(&j.k(&[QQ]) * &fq),
        -j.f(&[Y, QQ]),
        j.w(&[QQ]),
    ]);
    let den = &(&r(3, 1) * &u()) * &j.w_third(2, "b5")?;
    Ok(inner.try_div(&den)?)
}

fn five_e(j: &Jet<'_>) -> Result<Frac> {
    let z = j.z(&[])?;
    let w = j.w(&[]);
    let wq = j.w(&[QQ]);
    let inner = sum(&[
        &r(2, 9) * &(&wq * &z),
        &r(-2, 3) * &j.w(&[P]),
        &r(-2, 9) * &(&wq * &j.f(&[QQ])),
    ]);
    let body = &(&r(1, 3) * &j.f(&[QQ, QQ])) + &inner.try_div(&w)?;
    Ok(body.try_div(&u())?)
}

fn five_h(j: &Jet<'_>) -> Result<Frac> {
    let z = j.z(&[])?;
    let w = j.w(&[]);
    let wq = j.w(&[QQ]);
    let zq = j.z(&[QQ])?;
    let first = sum(&[
        &r(1, 9) * &(&wq * &(&z * &z)),
        &r(-1, 3) * &(&j.w(&[P]) * &z),
        j.w(&[Y]),
        &r(-1, 3) * &(&wq * &j.total(&z)),
    ])
    .try_div(&w)?;
    let body = sum(&[first, j.total(&zq), &r(1, 3) * &(&j.f(&[QQ]) * &zq)]);
    let den = &(&r(3, 1) * &u()) * &j.w_third(1, "h5")?;
    Ok(body.try_div(&den)?)
}

fn five_k(j: &Jet<'_>) -> Result<Frac> {
    let w = j.w(&[]);
    let wq = j.w(&[QQ]);
    let body = &(&r(2, 9) * &(&wq * &wq)).try_div(&w)? - &(&r(1, 3) * &j.w(&[QQ, QQ]));
    let den = &(&u() * &u()) * &j.w_third(1, "k5")?;
    Ok(body.try_div(&den)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ode(s: &str) -> Ode3 {
        Ode3::parse(s, &["mu"]).unwrap()
    }

    fn f(s: &str) -> Frac {
        Ode3::parse(s, &["mu"]).unwrap().rhs().clone()
    }

    #[test]
    fn total_derivative_examples() {
        assert_eq!(ode("0").total_derivative(&f("y")), f("p"));
        assert_eq!(
            ode("q^(3/2)").total_derivative(&f("3/2*q^(1/2)")),
            f("3/4*q")
        );
        assert_eq!(
            ode("3*q^2/(2*p)").total_derivative(&f("3*q/p")),
            f("3/2*q^2/p^2")
        );
    }

    #[test]
    fn names_round_trip() {
        for n in InvariantName::ALL {
            assert_eq!(n.as_str().parse::<InvariantName>().unwrap(), n);
        }
        assert!("nope".parse::<InvariantName>().is_err());
    }
}
