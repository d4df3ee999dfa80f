//! Canonical rational functions in variables, parameters and opaque kernels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::error::KernelError;
use super::expr::Func;
use super::poly::{gcd, Mono, Poly, Q};
use super::var::{Atom, Fnv, Gen, Var};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) enum AtomKind {
    /// `base^(1/deg)`, reduced by `t^deg = base`.
    Root { base: Frac, deg: u32 },
    Func { func: Func, arg: Frac },
}

pub(crate) struct AtomNode {
    pub(crate) kind: AtomKind,
    pub(crate) depth: u32,
    pub(crate) hash: u64,
    /// Free variables and parameters below this atom.
    pub(crate) free: BTreeSet<Gen>,
}

fn make_atom(kind: AtomKind) -> Atom {
    let inner: Vec<&Frac> = match &kind {
        AtomKind::Root { base, .. } => vec![base],
        AtomKind::Func { arg, .. } => vec![arg],
    };
    let mut depth = 0;
    let mut free = BTreeSet::new();
    for f in inner {
        for p in [&f.num, &f.den] {
            for g in p.gens() {
                depth = depth.max(g.depth());
                match &g {
                    Gen::Atom(a) => free.extend(a.0.free.iter().cloned()),
                    _ => {
                        free.insert(g.clone());
                    }
                }
            }
        }
    }
    let mut h = Fnv::default();
    kind.hash(&mut h);
    Atom(Arc::new(AtomNode {
        kind,
        depth: depth + 1,
        hash: h.finish(),
        free,
    }))
}

/// Quotient of polynomials over Q. Canonical: the denominator is monic and free
/// of radical atoms, radical exponents in the numerator are below their degree,
/// and numerator and denominator are coprime.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Frac {
    pub(crate) num: Poly,
    pub(crate) den: Poly,
}

impl Default for Frac {
    fn default() -> Self {
        Frac::zero()
    }
}

fn root_of(g: &Gen) -> Option<(&Frac, u32)> {
    match g {
        Gen::Atom(a) => match &a.0.kind {
            AtomKind::Root { base, deg } => Some((base, *deg)),
            _ => None,
        },
        _ => None,
    }
}

fn has_overflow(p: &Poly) -> bool {
    p.terms
        .iter()
        .any(|(m, _)| m.0.iter().any(|(g, e)| root_of(g).is_some_and(|(_, d)| *e >= d)))
}

fn has_root(p: &Poly) -> bool {
    p.terms
        .iter()
        .any(|(m, _)| m.0.iter().any(|(g, _)| root_of(g).is_some()))
}

/// Exact d-th root of a non-negative integer, if any.
fn int_root(n: &BigInt, d: u32) -> Option<BigInt> {
    let r = n.nth_root(d);
    if num_traits::pow(r.clone(), d as usize) == *n {
        Some(r)
    } else {
        None
    }
}

impl Frac {
    pub fn zero() -> Frac {
        Frac {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Frac {
        Frac::constant(Q::one())
    }

    pub fn constant(c: Q) -> Frac {
        Frac {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn int(n: i64) -> Frac {
        Frac::constant(Q::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Frac {
        Frac::constant(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(v: Var) -> Frac {
        Frac {
            num: Poly::gen(Gen::Var(v)),
            den: Poly::one(),
        }
    }

    pub fn param(name: &str) -> Frac {
        Frac {
            num: Poly::gen(Gen::Param(Arc::from(name))),
            den: Poly::one(),
        }
    }

    pub(crate) fn from_gen(g: Gen) -> Frac {
        Frac {
            num: Poly::gen(g),
            den: Poly::one(),
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Rational value when the normal form has no generators.
    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Polynomial (possibly with radicals) to canonical form.
    pub(crate) fn from_poly(p: Poly) -> Frac {
        if !has_overflow(&p) {
            return Frac {
                num: p,
                den: Poly::one(),
            };
        }
        let mut plain = Vec::new();
        let mut acc = Frac::zero();
        for (m, c) in p.terms {
            let mut mono = Vec::with_capacity(m.0.len());
            let mut factor = Frac::one();
            let mut over = false;
            for (g, e) in m.0.iter() {
                if let Some((base, d)) = root_of(g) {
                    if *e >= d {
                        over = true;
                        factor = &factor * &base.pow_u(e / d);
                        if e % d > 0 {
                            mono.push((g.clone(), e % d));
                        }
                        continue;
                    }
                }
                mono.push((g.clone(), *e));
            }
            if over {
                let rest = Frac {
                    num: Poly::monomial(Mono(mono), c),
                    den: Poly::one(),
                };
                acc = &acc + &(&factor * &rest);
            } else {
                plain.push((m, c));
            }
        }
        &acc + &Frac {
            num: Poly { terms: plain },
            den: Poly::one(),
        }
    }

    /// `num/den` with `num` reduced and `den` nonzero and radical-free.
    fn make(num: Poly, den: Poly) -> Frac {
        if num.is_zero() {
            return Frac::zero();
        }
        if let Some(c) = den.as_constant() {
            return Frac {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.as_constant().is_some() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides numerator"),
                den.exact_div(&g).expect("gcd divides denominator"),
            )
        };
        let (lc, den) = den.monic();
        Frac {
            num: num.scale(&lc.recip()),
            den,
        }
    }

    pub fn scale(&self, k: &Q) -> Frac {
        if k.is_zero() {
            return Frac::zero();
        }
        Frac {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    fn add_impl(&self, other: &Frac) -> Frac {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Frac::make(self.num.add(&other.num), self.den.clone());
        }
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            let den = self.den.mul(&other.den);
            return Frac::make_coprime(num, den);
        }
        let bd = other.den.exact_div(&g).expect("gcd");
        let ad = self.den.exact_div(&g).expect("gcd");
        let num = self.num.mul(&bd).add(&other.num.mul(&ad));
        if num.is_zero() {
            return Frac::zero();
        }
        let h = gcd(&num, &g);
        let (num, g) = if h.is_one() {
            (num, g)
        } else {
            (num.exact_div(&h).expect("gcd"), g.exact_div(&h).expect("gcd"))
        };
        Frac::make_coprime(num, ad.mul(&bd).mul(&g))
    }

    fn make_coprime(num: Poly, den: Poly) -> Frac {
        if num.is_zero() {
            return Frac::zero();
        }
        let (lc, den) = den.monic();
        Frac {
            num: num.scale(&lc.recip()),
            den,
        }
    }

    fn mul_impl(&self, other: &Frac) -> Frac {
        if self.is_zero() || other.is_zero() {
            return Frac::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let (an, bd) = cancel(&self.num, &other.den);
        let (bn, ad) = cancel(&other.num, &self.den);
        let num = an.mul(&bn);
        let den = ad.mul(&bd);
        if has_overflow(&num) {
            let r = Frac::from_poly(num);
            Frac::make(r.num, r.den.mul(&den))
        } else {
            Frac::make_coprime(num, den)
        }
    }

    pub fn pow_u(&self, n: u32) -> Frac {
        let mut acc = Frac::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn recip(&self) -> Result<Frac, KernelError> {
        if self.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        let den = Frac::from_poly(self.den.clone());
        if !has_root(&self.num) {
            return Ok(Frac::make(self.den.clone(), self.num.clone()));
        }
        Ok(&den * &invert_radical_poly(&self.num)?)
    }

    pub fn try_div(&self, other: &Frac) -> Result<Frac, KernelError> {
        if other.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        if let Some(c) = other.as_constant() {
            return Ok(self.scale(&c.recip()));
        }
        Ok(self * &other.recip()?)
    }

    pub fn pow_i(&self, n: i64) -> Result<Frac, KernelError> {
        if n >= 0 {
            Ok(self.pow_u(n as u32))
        } else {
            Ok(self.recip()?.pow_u((-n) as u32))
        }
    }

    /// `self^r` for rational `r`; non-integer powers introduce radical atoms.
    pub fn pow_q(&self, r: &Q) -> Result<Frac, KernelError> {
        if r.is_integer() {
            let n: i64 = r
                .to_integer()
                .try_into()
                .map_err(|_| KernelError::Domain("exponent too large".into()))?;
            return self.pow_i(n);
        }
        if self.is_zero() {
            return if r.is_positive() {
                Ok(Frac::zero())
            } else {
                Err(KernelError::DivisionByZero)
            };
        }
        let d: u32 = r
            .denom()
            .try_into()
            .map_err(|_| KernelError::Domain("root degree too large".into()))?;
        let n: i64 = r
            .numer()
            .try_into()
            .map_err(|_| KernelError::Domain("exponent too large".into()))?;
        if let Some(c) = self.as_constant() {
            if c.is_one() {
                return Ok(Frac::one());
            }
            if c.is_negative() && d % 2 == 0 {
                return Err(KernelError::Domain(format!(
                    "even root of negative constant {c}"
                )));
            }
            let (a, b) = (c.numer().abs(), c.denom().clone());
            if let (Some(ra), Some(rb)) = (int_root(&a, d), int_root(&b, d)) {
                let mut root = Q::new(ra, rb);
                if c.is_negative() {
                    root = -root;
                }
                return Frac::constant(root).pow_i(n);
            }
        }
        let mut base = self.clone();
        let mut sign = Q::one();
        if d % 2 == 1 && base.num.leading_coeff().is_negative() {
            base = -&base;
            if n % 2 != 0 {
                sign = -sign;
            }
        }
        let k = Integer::div_floor(&n, &(d as i64));
        let rem = Integer::mod_floor(&n, &(d as i64)) as u32;
        let t = make_atom(AtomKind::Root {
            base: base.clone(),
            deg: d,
        });
        let tpow = Frac {
            num: Poly::monomial(Mono::gen(Gen::Atom(t), rem), Q::one()),
            den: Poly::one(),
        };
        Ok((&base.pow_i(k)? * &tpow).scale(&sign))
    }

    /// Elementary function application with trivial constant folding.
    pub fn apply(func: Func, arg: Frac) -> Result<Frac, KernelError> {
        if let Some(c) = arg.as_constant() {
            match func {
                Func::Exp | Func::Cos if c.is_zero() => return Ok(Frac::one()),
                Func::Sin if c.is_zero() => return Ok(Frac::zero()),
                Func::Ln if c.is_one() => return Ok(Frac::zero()),
                Func::Ln if !c.is_positive() => {
                    return Err(KernelError::Domain(format!("ln of {c}")))
                }
                _ => {}
            }
        }
        Ok(Frac::from_gen(Gen::Atom(make_atom(AtomKind::Func {
            func,
            arg,
        }))))
    }

    /// Variables occurring anywhere, including inside atoms.
    pub fn vars(&self) -> BTreeSet<Var> {
        self.free_gens()
            .into_iter()
            .filter_map(|g| match g {
                Gen::Var(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    pub fn params(&self) -> BTreeSet<String> {
        self.free_gens()
            .into_iter()
            .filter_map(|g| match g {
                Gen::Param(p) => Some(p.to_string()),
                _ => None,
            })
            .collect()
    }

    pub(crate) fn free_gens(&self) -> BTreeSet<Gen> {
        let mut out = BTreeSet::new();
        for p in [&self.num, &self.den] {
            for g in p.gens() {
                match &g {
                    Gen::Atom(a) => out.extend(a.0.free.iter().cloned()),
                    _ => {
                        out.insert(g);
                    }
                }
            }
        }
        out
    }

    pub(crate) fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for p in [&self.num, &self.den] {
            for g in p.gens() {
                if let Gen::Atom(a) = g {
                    out.insert(a);
                }
            }
        }
        out
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.free_gens().contains(&Gen::Var(v))
    }

    /// Exact partial derivative.
    pub fn diff(&self, v: Var) -> Frac {
        self.diff_gen(&Gen::Var(v))
    }

    pub fn diff_param(&self, name: &str) -> Frac {
        self.diff_gen(&Gen::Param(Arc::from(name)))
    }

    pub(crate) fn diff_gen(&self, g: &Gen) -> Frac {
        let mut cache = HashMap::new();
        let dn = poly_diff(&self.num, g, &mut cache);
        if self.den.is_one() {
            return dn;
        }
        let dd = poly_diff(&self.den, g, &mut cache);
        if dd.is_zero() {
            return &dn * &Frac::make(Poly::one(), self.den.clone());
        }
        let n = Frac {
            num: self.num.clone(),
            den: Poly::one(),
        };
        let d = Frac {
            num: self.den.clone(),
            den: Poly::one(),
        };
        let top = &(&dn * &d) - &(&n * &dd);
        // top has a radical-free denominator, so dividing by den^2 stays cheap
        let den2 = self.den.mul(&self.den);
        Frac::make(top.num, top.den.mul(&den2))
    }

    /// Simultaneous substitution of variables and parameters.
    pub fn subst(&self, map: &BTreeMap<Gen, Frac>) -> Result<Frac, KernelError> {
        if map.is_empty() {
            return Ok(self.clone());
        }
        let free = self.free_gens();
        if !map.keys().any(|k| free.contains(k)) {
            return Ok(self.clone());
        }
        let mut cache: HashMap<Gen, Frac> = HashMap::new();
        let n = subst_poly(&self.num, map, &mut cache)?;
        let d = subst_poly(&self.den, map, &mut cache)?;
        n.try_div(&d)
    }

    pub fn subst_vars(&self, map: &BTreeMap<Var, Frac>) -> Result<Frac, KernelError> {
        let m: BTreeMap<Gen, Frac> = map
            .iter()
            .map(|(k, v)| (Gen::Var(*k), v.clone()))
            .collect();
        self.subst(&m)
    }
}

fn cancel(a: &Poly, b: &Poly) -> (Poly, Poly) {
    if b.is_one() || a.as_constant().is_some() {
        return (a.clone(), b.clone());
    }
    let g = gcd(a, b);
    if g.is_one() {
        (a.clone(), b.clone())
    } else {
        (
            a.exact_div(&g).expect("gcd"),
            b.exact_div(&g).expect("gcd"),
        )
    }
}

/// Inverse of a polynomial containing radical atoms, by solving with the
/// multiplication matrix of the highest radical over the field below it.
fn invert_radical_poly(p: &Poly) -> Result<Frac, KernelError> {
    let t = p
        .gens()
        .into_iter()
        .filter(|g| root_of(g).is_some())
        .max()
        .expect("has a radical");
    let (base, d) = root_of(&t).map(|(b, d)| (b.clone(), d)).expect("radical");
    let d = d as usize;
    let coeffs = p.coeffs_in(&t);
    let c: Vec<Frac> = (0..d)
        .map(|i| Frac {
            num: coeffs.get(&(i as u32)).cloned().unwrap_or_else(Poly::zero),
            den: Poly::one(),
        })
        .collect();
    let mut m: Vec<Vec<Frac>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i >= j {
                        c[i - j].clone()
                    } else {
                        &c[i + d - j] * &base
                    }
                })
                .collect()
        })
        .collect();
    let mut rhs: Vec<Frac> = (0..d)
        .map(|i| if i == 0 { Frac::one() } else { Frac::zero() })
        .collect();
    for col in 0..d {
        let piv = (col..d)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(KernelError::DivisionByZero)?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].recip()?;
        for j in col..d {
            m[col][j] = &m[col][j] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for r in 0..d {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in col..d {
                let v = &m[r][j] - &(&f * &m[col][j]);
                m[r][j] = v;
            }
            rhs[r] = &rhs[r] - &(&f * &rhs[col]);
        }
    }
    let mut out = Frac::zero();
    for (i, x) in rhs.into_iter().enumerate() {
        let ti = Frac {
            num: Poly::monomial(Mono::gen(t.clone(), i as u32), Q::one()),
            den: Poly::one(),
        };
        out = &out + &(&x * &ti);
    }
    Ok(out)
}

fn atom_diff(a: &Atom, g: &Gen) -> Frac {
    if !a.0.free.contains(g) {
        return Frac::zero();
    }
    let me = Frac::from_gen(Gen::Atom(a.clone()));
    match &a.0.kind {
        AtomKind::Root { base, deg } => {
            let db = base.diff_gen(g);
            let q = db
                .try_div(&base.scale(&Q::from_integer(BigInt::from(*deg))))
                .expect("radical base is invertible");
            &me * &q
        }
        AtomKind::Func { func, arg } => {
            let da = arg.diff_gen(g);
            match func {
                Func::Exp => &me * &da,
                Func::Ln => da.try_div(arg).expect("log argument is invertible"),
                Func::Sin => {
                    &Frac::apply(Func::Cos, arg.clone()).expect("cos is total") * &da
                }
                Func::Cos => {
                    -&(&Frac::apply(Func::Sin, arg.clone()).expect("sin is total") * &da)
                }
            }
        }
    }
}

fn poly_diff(p: &Poly, g: &Gen, cache: &mut HashMap<Atom, Frac>) -> Frac {
    let mut acc = Frac::from_poly(p.diff_gen(g));
    for h in p.gens() {
        if let Gen::Atom(a) = &h {
            if !a.0.free.contains(g) {
                continue;
            }
            let da = cache
                .entry(a.clone())
                .or_insert_with(|| atom_diff(a, g))
                .clone();
            if da.is_zero() {
                continue;
            }
            let dp = Frac::from_poly(p.diff_gen(&h));
            acc = &acc + &(&dp * &da);
        }
    }
    acc
}

fn subst_gen(
    g: &Gen,
    map: &BTreeMap<Gen, Frac>,
    cache: &mut HashMap<Gen, Frac>,
) -> Result<Frac, KernelError> {
    if let Some(v) = cache.get(g) {
        return Ok(v.clone());
    }
    let out = match g {
        Gen::Var(_) | Gen::Param(_) => map.get(g).cloned().unwrap_or_else(|| Frac::from_gen(g.clone())),
        Gen::Atom(a) => {
            if !map.keys().any(|k| a.0.free.contains(k)) {
                Frac::from_gen(g.clone())
            } else {
                match &a.0.kind {
                    AtomKind::Root { base, deg } => base
                        .subst(map)?
                        .pow_q(&Q::new(BigInt::one(), BigInt::from(*deg)))?,
                    AtomKind::Func { func, arg } => Frac::apply(*func, arg.subst(map)?)?,
                }
            }
        }
    };
    cache.insert(g.clone(), out.clone());
    Ok(out)
}

fn subst_poly(
    p: &Poly,
    map: &BTreeMap<Gen, Frac>,
    cache: &mut HashMap<Gen, Frac>,
) -> Result<Frac, KernelError> {
    let mut acc = Frac::zero();
    for (m, c) in &p.terms {
        let mut t = Frac::constant(c.clone());
        for (g, e) in &m.0 {
            let v = subst_gen(g, map, cache)?;
            t = &t * &v.pow_u(*e);
        }
        acc = &acc + &t;
    }
    Ok(acc)
}

impl<'a> Add<&'a Frac> for &'a Frac {
    type Output = Frac;
    fn add(self, rhs: &Frac) -> Frac {
        self.add_impl(rhs)
    }
}
impl<'a> Sub<&'a Frac> for &'a Frac {
    type Output = Frac;
    fn sub(self, rhs: &Frac) -> Frac {
        self.add_impl(&-rhs)
    }
}
impl<'a> Mul<&'a Frac> for &'a Frac {
    type Output = Frac;
    fn mul(self, rhs: &Frac) -> Frac {
        self.mul_impl(rhs)
    }
}
impl Neg for &Frac {
    type Output = Frac;
    fn neg(self) -> Frac {
        Frac {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}
impl Neg for Frac {
    type Output = Frac;
    fn neg(self) -> Frac {
        -&self
    }
}
impl Add for Frac {
    type Output = Frac;
    fn add(self, rhs: Frac) -> Frac {
        self.add_impl(&rhs)
    }
}
impl Sub for Frac {
    type Output = Frac;
    fn sub(self, rhs: Frac) -> Frac {
        &self - &rhs
    }
}
impl Mul for Frac {
    type Output = Frac;
    fn mul(self, rhs: Frac) -> Frac {
        self.mul_impl(&rhs)
    }
}

impl From<Var> for Frac {
    fn from(v: Var) -> Frac {
        Frac::var(v)
    }
}

impl From<i64> for Frac {
    fn from(n: i64) -> Frac {
        Frac::int(n)
    }
}

impl From<Q> for Frac {
    fn from(c: Q) -> Frac {
        Frac::constant(c)
    }
}
