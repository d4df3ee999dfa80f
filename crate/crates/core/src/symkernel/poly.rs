//! Sparse multivariate polynomials over Q with lexicographic term order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::var::Gen;

pub type Q = BigRational;

/// Monomial as a sorted list of (generator, positive exponent).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono(pub(crate) Vec<(Gen, u32)>);

impl Mono {
    pub fn one() -> Mono {
        Mono(Vec::new())
    }

    pub fn gen(g: Gen, e: u32) -> Mono {
        if e == 0 {
            Mono::one()
        } else {
            Mono(vec![(g, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree_in(&self, g: &Gen) -> u32 {
        self.0
            .iter()
            .find(|(h, _)| h == g)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// `self / other` if divisible.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (g, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < *g {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == *g {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((g.clone(), e - f)),
                }
            } else {
                out.push((g.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    /// Componentwise minimum.
    pub fn gcd(&self, other: &Mono) -> Mono {
        let mut out = Vec::new();
        let mut j = 0;
        for (g, e) in &self.0 {
            while j < other.0.len() && other.0[j].0 < *g {
                j += 1;
            }
            if j < other.0.len() && other.0[j].0 == *g {
                out.push((g.clone(), (*e).min(other.0[j].1)));
            }
        }
        Mono(out)
    }

    /// Split off the power of `g`.
    pub fn split(&self, g: &Gen) -> (u32, Mono) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(h, f)| {
                if h == g {
                    e = *f;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (e, Mono(rest))
    }

    pub fn gens(&self) -> impl Iterator<Item = &Gen> {
        self.0.iter().map(|(g, _)| g)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }
}

impl Ord for Mono {
    /// Lexicographic order: the first generator where exponents differ decides,
    /// with the larger exponent being the larger monomial.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let n = a.len().min(b.len());
        for k in 0..n {
            if a[k].0 != b[k].0 {
                return if a[k].0 < b[k].0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
            }
            if a[k].1 != b[k].1 {
                return a[k].1.cmp(&b[k].1);
            }
        }
        a.len().cmp(&b.len())
    }
}
impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Terms sorted by descending monomial, no zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Poly {
    pub(crate) terms: Vec<(Mono, Q)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Mono::one(), c)],
            }
        }
    }

    pub fn gen(g: Gen) -> Poly {
        Poly {
            terms: vec![(Mono::gen(g, 1), Q::one())],
        }
    }

    pub fn monomial(m: Mono, c: Q) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    fn from_map(map: BTreeMap<Mono, Q>) -> Poly {
        Poly {
            terms: map.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, Q)>) -> Poly {
        let mut map: BTreeMap<Mono, Q> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(Q::zero) += c;
        }
        Poly::from_map(map)
    }

    pub fn terms(&self) -> &[(Mono, Q)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 if self.terms[0].0.is_one() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&(Mono, Q)> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> Q {
        self.terms
            .first()
            .map(|t| t.1.clone())
            .unwrap_or_else(Q::zero)
    }

    pub fn gens(&self) -> BTreeSet<Gen> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for g in m.gens() {
                s.insert(g.clone());
            }
        }
        s
    }

    pub fn contains(&self, g: &Gen) -> bool {
        self.terms.iter().any(|(m, _)| m.degree_in(g) > 0)
    }

    pub fn degree_in(&self, g: &Gen) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree_in(g))
            .max()
            .unwrap_or(0)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * k))
                .collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.mul(m), c * k))
                .collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut map: BTreeMap<Mono, Q> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *map.entry(ma.mul(mb)).or_insert_with(Q::zero) += ca * cb;
            }
        }
        Poly::from_map(map)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (lm, lc) = d.leading().cloned()?;
        let mut r = self.clone();
        let mut q: Vec<(Mono, Q)> = Vec::new();
        while let Some((rm, rc)) = r.leading().cloned() {
            let m = rm.div(&lm)?;
            let c = rc / &lc;
            r = r.sub(&d.mul_mono(&m, &c));
            q.push((m, c));
        }
        Some(Poly::from_terms(q))
    }

    /// Normalise so the leading coefficient is 1; returns (leading coefficient, monic).
    pub fn monic(&self) -> (Q, Poly) {
        let lc = self.leading_coeff();
        if lc.is_zero() || lc.is_one() {
            return (if lc.is_zero() { Q::one() } else { lc }, self.clone());
        }
        let inv = lc.recip();
        (lc, self.scale(&inv))
    }

    /// Coefficients with respect to `g`, keyed by exponent.
    pub fn coeffs_in(&self, g: &Gen) -> BTreeMap<u32, Poly> {
        let mut buckets: BTreeMap<u32, Vec<(Mono, Q)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(g);
            buckets.entry(e).or_default().push((rest, c.clone()));
        }
        buckets
            .into_iter()
            .map(|(e, ts)| (e, Poly::from_terms(ts)))
            .collect()
    }

    pub fn from_coeffs(g: &Gen, coeffs: &BTreeMap<u32, Poly>) -> Poly {
        let mut acc = Poly::zero();
        for (e, c) in coeffs {
            acc = acc.add(&c.mul_mono(&Mono::gen(g.clone(), *e), &Q::one()));
        }
        acc
    }

    /// Largest monomial dividing every term.
    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Mono::one();
        };
        let mut g = first.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Evaluate by substituting generator values from a callback in a ring `R`.
    pub fn map_terms<R, FG, FC>(&self, mut gen_val: FG, coeff: FC, zero: R) -> R
    where
        R: Clone + std::ops::Add<Output = R> + std::ops::Mul<Output = R>,
        FG: FnMut(&Gen, u32) -> R,
        FC: Fn(&Q) -> R,
    {
        let mut acc = zero;
        for (m, c) in &self.terms {
            let mut t = coeff(c);
            for (g, e) in &m.0 {
                t = t * gen_val(g, *e);
            }
            acc = acc + t;
        }
        acc
    }

    /// Partial derivative treating every generator as independent.
    pub fn diff_gen(&self, g: &Gen) -> Poly {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(g);
            if e == 0 {
                continue;
            }
            let m2 = rest.mul(&Mono::gen(g.clone(), e - 1));
            out.push((m2, c * Q::from_integer(BigInt::from(e))));
        }
        Poly::from_terms(out)
    }

    /// Content over Q made integral: returns the poly scaled to have integer
    /// coprime coefficients with positive leading coefficient.
    pub(crate) fn integer_primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut den_lcm = BigInt::one();
        for (_, c) in &self.terms {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for (_, c) in &self.terms {
            let n = c.numer() * (&den_lcm / c.denom());
            num_gcd = num_gcd.gcd(&n);
        }
        let mut k = Q::new(den_lcm, num_gcd);
        if self.leading_coeff().is_negative() {
            k = -k;
        }
        self.scale(&k)
    }
}

/// Monic gcd of two polynomials over Q (all generators treated as indeterminates).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic().1;
    }
    if b.is_zero() {
        return a.monic().1;
    }
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a == b {
        return a.monic().1;
    }
    let ma = a.mono_content();
    let mb = b.mono_content();
    let common = ma.gcd(&mb);
    let a1 = if ma.is_one() {
        a.clone()
    } else {
        a.exact_div(&Poly::monomial(ma, Q::one())).expect("monomial content")
    };
    let b1 = if mb.is_one() {
        b.clone()
    } else {
        b.exact_div(&Poly::monomial(mb, Q::one())).expect("monomial content")
    };
    let g = if modular::coprime(&a1, &b1) {
        Poly::one()
    } else if let Some(g) = super::modgcd::gcd(&a1, &b1) {
        g
    } else {
        gcd_rec(&a1, &b1)
    };
    let out = g.mul_mono(&common, &Q::one());
    out.monic().1
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.integer_primitive();
    }
    if b.is_zero() {
        return a.integer_primitive();
    }
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a.terms.len() == 1 && b.terms.len() == 1 {
        return Poly::monomial(a.terms[0].0.gcd(&b.terms[0].0), Q::one());
    }
    let ga = a.gens();
    let gb = b.gens();
    // a generator present in only one operand can only contribute through content
    if let Some(g) = ga.symmetric_difference(&gb).next().cloned() {
        let (only, other) = if ga.contains(&g) { (a, b) } else { (b, a) };
        let mut acc = other.clone();
        for (_, c) in only.coeffs_in(&g) {
            acc = gcd_rec(&acc, &c);
            if acc.as_constant().is_some() {
                return Poly::one();
            }
        }
        return acc.integer_primitive();
    }
    let v = ga.iter().next().cloned().expect("non-constant");
    let ca = content(a, &v);
    let cb = content(b, &v);
    let c = gcd_rec(&ca, &cb);
    let mut p = a.exact_div(&ca).expect("content divides");
    let mut r = b.exact_div(&cb).expect("content divides");
    if p.degree_in(&v) < r.degree_in(&v) {
        std::mem::swap(&mut p, &mut r);
    }
    loop {
        let rem = prem(&p, &r, &v);
        if rem.is_zero() {
            break;
        }
        if rem.degree_in(&v) == 0 {
            r = Poly::one();
            break;
        }
        p = r;
        r = primitive_part(&rem, &v);
    }
    let g = primitive_part(&r, &v);
    c.mul(&g).integer_primitive()
}

fn content(p: &Poly, v: &Gen) -> Poly {
    let mut acc = Poly::zero();
    for (_, c) in p.coeffs_in(v) {
        acc = gcd_rec(&acc, &c);
        if acc.as_constant().is_some() {
            return Poly::one();
        }
    }
    acc
}

fn primitive_part(p: &Poly, v: &Gen) -> Poly {
    let c = content(p, v);
    p.exact_div(&c).expect("content divides").integer_primitive()
}

/// Pseudo-remainder of `a` by `b` with respect to `v`.
fn prem(a: &Poly, b: &Poly, v: &Gen) -> Poly {
    let db = b.degree_in(v);
    let bc = b.coeffs_in(v);
    let lb = bc.get(&db).cloned().unwrap_or_else(Poly::zero);
    let mut r = a.clone();
    loop {
        let dr = r.degree_in(v);
        if r.is_zero() || dr < db {
            return r;
        }
        let lr = r.coeffs_in(v).remove(&dr).unwrap_or_else(Poly::zero);
        let shift = Mono::gen(v.clone(), dr - db);
        r = r.mul(&lb).sub(&b.mul(&lr).mul_mono(&shift, &Q::one()));
    }
}

/// Cheap certificate that two polynomials have constant gcd.
///
/// Both are reduced modulo a prime with every generator but one specialised.
/// When the leading coefficients in that generator survive, the degree of
/// the specialised gcd bounds the degree of the true gcd from above, so a
/// degree-zero image for every shared generator proves the gcd constant.
/// A `false` answer means nothing.
mod modular {
    use std::collections::{BTreeMap, BTreeSet};

    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::ToPrimitive;

    use super::{Gen, Poly};

    const P: u64 = (1 << 61) - 1;

    fn mul(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % P as u128) as u64
    }

    fn add(a: u64, b: u64) -> u64 {
        (a + b) % P
    }

    fn sub(a: u64, b: u64) -> u64 {
        (a + P - b) % P
    }

    fn pow(mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    }

    fn inv(a: u64) -> u64 {
        pow(a, P - 2)
    }

    fn reduce(n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(P)).to_u64().expect("reduced mod P")
    }

    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Image of `p` as a univariate polynomial in `v`, low degree first.
    fn image(p: &Poly, v: &Gen, vals: &BTreeMap<&Gen, u64>) -> Option<Vec<u64>> {
        let mut out: Vec<u64> = Vec::new();
        for (m, c) in &p.terms {
            let d = reduce(c.denom());
            if d == 0 {
                return None;
            }
            let mut t = mul(reduce(c.numer()), inv(d));
            let mut deg = 0usize;
            for (g, e) in &m.0 {
                if g == v {
                    deg = *e as usize;
                } else {
                    t = mul(t, pow(vals[g], *e as u64));
                }
            }
            if out.len() <= deg {
                out.resize(deg + 1, 0);
            }
            out[deg] = add(out[deg], t);
        }
        Some(out)
    }

    fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn gcd_degree(a: Vec<u64>, b: Vec<u64>) -> usize {
        let (mut a, mut b) = (trim(a), trim(b));
        while !b.is_empty() {
            // a mod b
            let lb = inv(*b.last().expect("nonempty"));
            while a.len() >= b.len() {
                let k = mul(*a.last().expect("nonempty"), lb);
                let shift = a.len() - b.len();
                for (i, bi) in b.iter().enumerate() {
                    a[shift + i] = sub(a[shift + i], mul(k, *bi));
                }
                a = trim(a);
                if a.is_empty() {
                    break;
                }
            }
            std::mem::swap(&mut a, &mut b);
        }
        a.len().saturating_sub(1)
    }

    pub(super) fn coprime(a: &Poly, b: &Poly) -> bool {
        let ga = a.gens();
        let gb = b.gens();
        let all: BTreeSet<&Gen> = ga.iter().chain(gb.iter()).collect();
        let vals: BTreeMap<&Gen, u64> = all
            .iter()
            .enumerate()
            .map(|(i, g)| (*g, splitmix(i as u64 + 0x5eed) % P))
            .collect();
        for v in ga.intersection(&gb) {
            let (Some(ia), Some(ib)) = (image(a, v, &vals), image(b, v, &vals)) else {
                return false;
            };
            if trim(ia.clone()).len() != a.degree_in(v) as usize + 1
                || trim(ib.clone()).len() != b.degree_in(v) as usize + 1
            {
                return false;
            }
            if gcd_degree(ia, ib) > 0 {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::var::Var;

    fn v(x: Var) -> Poly {
        Poly::gen(Gen::Var(x))
    }
    fn k(n: i64) -> Poly {
        Poly::constant(Q::from_integer(n.into()))
    }

    #[test]
    fn gcd_of_products() {
        let x = v(Var::X);
        let y = v(Var::Y);
        let a = x.add(&y).mul(&x.sub(&k(2)));
        let b = x.add(&y).mul(&y.add(&k(3)));
        assert_eq!(gcd(&a, &b), x.add(&y));
        let c = a.mul(&b);
        assert_eq!(c.exact_div(&a).unwrap(), b);
    }

    #[test]
    fn gcd_with_rational_coefficients() {
        let p = v(Var::P);
        let q = v(Var::Q);
        let a = p.scale(&Q::new(3.into(), 2.into())).mul(&q);
        let b = p.mul(&p).scale(&Q::new(5.into(), 7.into()));
        assert_eq!(gcd(&a, &b), p);
    }

    #[test]
    fn lex_order_leads_with_x() {
        let x = v(Var::X);
        let q = v(Var::Q);
        let s = q.pow(5).add(&x);
        assert_eq!(s.leading().unwrap().0, Mono::gen(Gen::Var(Var::X), 1));
    }
}
