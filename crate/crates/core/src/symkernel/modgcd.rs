//! Dense modular gcd over `Z[x_1..x_n]`: images modulo word-size primes,
//! evaluation and Newton interpolation one variable at a time, Chinese
//! remaindering across primes, and a final trial division over `Q`.
//!
//! Returns `None` when it runs out of primes or evaluation points; the
//! caller then falls back to the remainder-sequence gcd.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::poly::{Mono, Poly, Q};
use super::var::Gen;

type Exp = Vec<u32>;
/// Polynomial modulo a prime, dense exponent vectors in lex order.
type Mp = BTreeMap<Exp, u64>;
/// Univariate polynomial modulo a prime, constant term first.
type Up = Vec<u64>;

const MAX_PRIMES: usize = 64;

struct Field {
    p: u64,
}

impl Field {
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }

    fn reduce(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.p)).to_u64().expect("reduced")
    }

    // univariate helpers

    fn utrim(&self, mut a: Up) -> Up {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn umonic(&self, a: Up) -> Up {
        let a = self.utrim(a);
        match a.last() {
            None => a,
            Some(&l) => {
                let li = self.inv(l);
                a.into_iter().map(|c| self.mul(c, li)).collect()
            }
        }
    }

    fn urem(&self, mut a: Up, b: &Up) -> Up {
        let li = self.inv(*b.last().expect("nonzero divisor"));
        a = self.utrim(a);
        while a.len() >= b.len() {
            let k = self.mul(*a.last().expect("nonempty"), li);
            let shift = a.len() - b.len();
            for (i, bi) in b.iter().enumerate() {
                a[shift + i] = self.sub(a[shift + i], self.mul(k, *bi));
            }
            a = self.utrim(a);
        }
        a
    }

    fn ugcd(&self, a: &Up, b: &Up) -> Up {
        let (mut a, mut b) = (self.utrim(a.clone()), self.utrim(b.clone()));
        while !b.is_empty() {
            let r = self.urem(a, &b);
            a = b;
            b = r;
        }
        self.umonic(a)
    }

    /// Exact quotient, `None` if the remainder is nonzero.
    fn udiv(&self, a: &Up, b: &Up) -> Option<Up> {
        let b = self.utrim(b.clone());
        let mut a = self.utrim(a.clone());
        if a.len() < b.len() {
            return if a.is_empty() { Some(vec![]) } else { None };
        }
        let li = self.inv(*b.last()?);
        let mut q = vec![0; a.len() - b.len() + 1];
        while a.len() >= b.len() && !a.is_empty() {
            let k = self.mul(*a.last().expect("nonempty"), li);
            let shift = a.len() - b.len();
            q[shift] = k;
            for (i, bi) in b.iter().enumerate() {
                a[shift + i] = self.sub(a[shift + i], self.mul(k, *bi));
            }
            a = self.utrim(a);
        }
        if a.is_empty() {
            Some(self.utrim(q))
        } else {
            None
        }
    }

    fn ueval(&self, a: &Up, x: u64) -> u64 {
        a.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    fn umul(&self, a: &Up, b: &Up) -> Up {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        out
    }

    // multivariate helpers; variable `k` is the evaluation variable and
    // `0..k` are the main variables

    fn eval(&self, a: &Mp, k: usize, x: u64) -> Mp {
        let mut out = Mp::new();
        for (e, &c) in a {
            let v = self.mul(c, self.pow(x, e[k] as u64));
            if v == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] = 0;
            let slot = out.entry(e2).or_insert(0);
            *slot = self.add(*slot, v);
        }
        out.retain(|_, c| *c != 0);
        out
    }

    /// Coefficients in `x_k` grouped by the main-variable exponent.
    fn groups(&self, a: &Mp, k: usize) -> BTreeMap<Exp, Up> {
        let mut out: BTreeMap<Exp, Up> = BTreeMap::new();
        for (e, &c) in a {
            let key = e[..k].to_vec();
            let u = out.entry(key).or_default();
            let d = e[k] as usize;
            if u.len() <= d {
                u.resize(d + 1, 0);
            }
            u[d] = c;
        }
        out
    }

    fn ungroup(&self, g: &BTreeMap<Exp, Up>, n: usize, k: usize) -> Mp {
        let mut out = Mp::new();
        for (key, u) in g {
            for (d, &c) in u.iter().enumerate() {
                if c != 0 {
                    let mut e = key.clone();
                    e.resize(n, 0);
                    e[k] = d as u32;
                    out.insert(e, c);
                }
            }
        }
        out
    }

    fn content(&self, g: &BTreeMap<Exp, Up>) -> Up {
        let mut acc: Up = vec![];
        for u in g.values() {
            acc = self.ugcd(&acc, u);
            if acc.len() == 1 {
                break;
            }
        }
        acc
    }

    fn divide_content(&self, g: &BTreeMap<Exp, Up>, c: &Up) -> BTreeMap<Exp, Up> {
        g.iter()
            .map(|(k, u)| (k.clone(), self.udiv(u, c).expect("content divides")))
            .collect()
    }

    /// Multiply every coefficient by a univariate polynomial in `x_k`.
    fn mul_univariate(&self, a: &Mp, u: &Up, n: usize, k: usize) -> Mp {
        let g = self.groups(a, k);
        let g2 = g
            .into_iter()
            .map(|(key, v)| (key, self.umul(&v, u)))
            .collect();
        self.ungroup(&g2, n, k)
    }

    fn scale(&self, a: &Mp, s: u64) -> Mp {
        a.iter()
            .filter_map(|(e, &c)| {
                let v = self.mul(c, s);
                (v != 0).then(|| (e.clone(), v))
            })
            .collect()
    }

    fn sub_mp(&self, a: &Mp, b: &Mp) -> Mp {
        let mut out = a.clone();
        for (e, &c) in b {
            let slot = out.entry(e.clone()).or_insert(0);
            *slot = self.sub(*slot, c);
        }
        out.retain(|_, c| *c != 0);
        out
    }

    fn add_mp(&self, a: &Mp, b: &Mp) -> Mp {
        let mut out = a.clone();
        for (e, &c) in b {
            let slot = out.entry(e.clone()).or_insert(0);
            *slot = self.add(*slot, c);
        }
        out.retain(|_, c| *c != 0);
        out
    }

    /// Exact multivariate division in lex order.
    fn divides(&self, a: &Mp, b: &Mp) -> bool {
        let Some((lb, &lc)) = b.iter().next_back() else {
            return false;
        };
        let li = self.inv(lc);
        let mut r = a.clone();
        let mut steps = 0usize;
        while let Some((lr, &rc)) = r.iter().next_back() {
            if lr.iter().zip(lb).any(|(x, y)| x < y) {
                return false;
            }
            let shift: Exp = lr.iter().zip(lb).map(|(x, y)| x - y).collect();
            let k = self.mul(rc, li);
            for (e, &c) in b {
                let e2: Exp = e.iter().zip(&shift).map(|(x, y)| x + y).collect();
                let slot = r.entry(e2).or_insert(0);
                *slot = self.sub(*slot, self.mul(k, c));
                if *slot == 0 {
                    let key: Exp = e.iter().zip(&shift).map(|(x, y)| x + y).collect();
                    r.remove(&key);
                }
            }
            steps += 1;
            if steps > 1_000_000 {
                return false;
            }
        }
        true
    }

    fn leading_main(&self, a: &Mp, k: usize) -> Option<Exp> {
        a.keys().map(|e| e[..k].to_vec()).max()
    }

    /// Monic gcd in `Z_p[x_0..x_k]` (all other exponents zero).
    fn pgcd(&self, a: &Mp, b: &Mp, n: usize, k: usize) -> Option<Mp> {
        if k == 0 {
            let ua = self.to_univariate(a, 0);
            let ub = self.to_univariate(b, 0);
            return Some(self.from_univariate(&self.ugcd(&ua, &ub), n, 0));
        }
        let ga = self.groups(a, k);
        let gb = self.groups(b, k);
        let ca = self.content(&ga);
        let cb = self.content(&gb);
        let c = self.ugcd(&ca, &cb);
        let ga = self.divide_content(&ga, &ca);
        let gb = self.divide_content(&gb, &cb);
        let la = ga.values().next_back()?.clone();
        let lb = gb.values().next_back()?.clone();
        let gamma = self.ugcd(&la, &lb);
        let a = self.ungroup(&ga, n, k);
        let b = self.ungroup(&gb, n, k);
        let deg_k = |m: &Mp| m.keys().map(|e| e[k]).max().unwrap_or(0) as usize;
        let bound = (gamma.len().saturating_sub(1)) + deg_k(&a).min(deg_k(&b)) + 1;

        let mut interp: Option<(Mp, Up, Exp)> = None; // (h, prod (x - a_i), leading main)
        let mut points = 0usize;
        let mut alpha = 0u64;
        let mut tries = 0usize;
        loop {
            alpha += 1;
            tries += 1;
            if tries > 4 * bound + 64 || alpha >= self.p {
                return None;
            }
            let gv = self.ueval(&gamma, alpha);
            if gv == 0 || self.ueval(&la, alpha) == 0 || self.ueval(&lb, alpha) == 0 {
                continue;
            }
            let av = self.eval(&a, k, alpha);
            let bv = self.eval(&b, k, alpha);
            let g = self.pgcd(&av, &bv, n, k - 1)?;
            let lm = self.leading_main(&g, k).unwrap_or_default();
            if lm.iter().all(|&e| e == 0) {
                // the primitive parts are coprime
                return Some(self.from_univariate(&c, n, k));
            }
            let g = self.scale(&g, gv);
            match &mut interp {
                Some((_, _, cur)) if lm > *cur => continue,
                Some((h, q, cur)) if lm == *cur => {
                    let hv = self.eval(h, k, alpha);
                    let diff = self.sub_mp(&g, &hv);
                    let qa = self.ueval(q, alpha);
                    if diff.is_empty() {
                        // unchanged: try the candidate
                        if let Some(r) = self.finish(h, &a, &b, &c, n, k) {
                            return Some(r);
                        }
                    } else {
                        let s = self.inv(qa);
                        let corr = self.mul_univariate(&self.scale(&diff, s), q, n, k);
                        *h = self.add_mp(h, &corr);
                    }
                    *q = self.umul(q, &vec![self.sub(0, alpha), 1]);
                    points += 1;
                }
                _ => {
                    interp = Some((g, vec![self.sub(0, alpha), 1], lm));
                    points = 1;
                }
            }
            if points > bound {
                let (h, _, _) = interp.as_ref().expect("set");
                if let Some(r) = self.finish(h, &a, &b, &c, n, k) {
                    return Some(r);
                }
                interp = None;
                points = 0;
            }
        }
    }

    fn finish(&self, h: &Mp, a: &Mp, b: &Mp, c: &Up, n: usize, k: usize) -> Option<Mp> {
        let gh = self.groups(h, k);
        let ch = self.content(&gh);
        let pp = self.ungroup(&self.divide_content(&gh, &ch), n, k);
        if self.divides(a, &pp) && self.divides(b, &pp) {
            let r = self.mul_univariate(&pp, c, n, k);
            let lc = *r.values().next_back()?;
            Some(self.scale(&r, self.inv(lc)))
        } else {
            None
        }
    }

    fn to_univariate(&self, a: &Mp, k: usize) -> Up {
        let mut u = Up::new();
        for (e, &c) in a {
            let d = e[k] as usize;
            if u.len() <= d {
                u.resize(d + 1, 0);
            }
            u[d] = c;
        }
        u
    }

    fn from_univariate(&self, u: &Up, n: usize, k: usize) -> Mp {
        let mut out = Mp::new();
        for (d, &c) in u.iter().enumerate() {
            if c != 0 {
                let mut e = vec![0; n];
                e[k] = d as u32;
                out.insert(e, c);
            }
        }
        out
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn primes() -> &'static [u64] {
    static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| {
        ((1u64 << 30)..(1u64 << 31))
            .rev()
            .filter(|&n| is_prime(n))
            .take(MAX_PRIMES)
            .collect()
    })
}

/// Integer polynomial on dense exponent vectors.
type Zp = BTreeMap<Exp, BigInt>;

fn to_dense(p: &Poly, gens: &[Gen]) -> Zp {
    p.terms
        .iter()
        .map(|(m, c)| {
            let e = gens.iter().map(|g| m.degree_in(g)).collect();
            (e, c.numer().clone())
        })
        .collect()
}

fn from_dense(z: &Zp, gens: &[Gen]) -> Poly {
    Poly::from_terms(z.iter().map(|(e, c)| {
        let m = gens
            .iter()
            .zip(e)
            .filter(|(_, &d)| d > 0)
            .fold(Mono::default(), |acc, (g, &d)| acc.mul(&Mono::gen(g.clone(), d)));
        (m, Q::from_integer(c.clone()))
    }))
}

fn symmetric(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Gcd of two polynomials over `Q`, up to a constant, or `None` if the
/// modular method gives up.
pub(crate) fn gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    let a = a.integer_primitive();
    let b = b.integer_primitive();
    let gens: Vec<Gen> = a.gens().union(&b.gens()).cloned().collect();
    if gens.is_empty() {
        return Some(Poly::one());
    }
    let n = gens.len();
    let za = to_dense(&a, &gens);
    let zb = to_dense(&b, &gens);
    let lca = za.values().next_back()?.clone();
    let lcb = zb.values().next_back()?.clone();
    let gamma = lca.gcd(&lcb);

    let mut acc: Option<(Zp, BigInt, Exp)> = None;
    let mut last: Option<Zp> = None;
    for &p in primes() {
        let f = Field { p };
        let gp = f.reduce(&gamma);
        if gp == 0 || f.reduce(&lca) == 0 || f.reduce(&lcb) == 0 {
            continue;
        }
        let ma: Mp = za
            .iter()
            .map(|(e, c)| (e.clone(), f.reduce(c)))
            .filter(|(_, c)| *c != 0)
            .collect();
        let mb: Mp = zb
            .iter()
            .map(|(e, c)| (e.clone(), f.reduce(c)))
            .filter(|(_, c)| *c != 0)
            .collect();
        let Some(g) = f.pgcd(&ma, &mb, n, n - 1) else {
            continue;
        };
        let lm = g.keys().next_back()?.clone();
        if lm.iter().all(|&e| e == 0) {
            return Some(Poly::one());
        }
        let g = f.scale(&g, gp);
        let pb = BigInt::from(p);
        match &mut acc {
            Some((_, _, cur)) if lm.cmp(cur) == Ordering::Greater => continue,
            Some((h, m, cur)) if lm == *cur => {
                // Chinese remaindering coefficient by coefficient
                let minv = BigInt::from(f.inv(f.reduce(m)));
                let keys: Vec<Exp> = h.keys().chain(g.keys()).cloned().collect();
                let mut next = Zp::new();
                let mm = &*m * &pb;
                for e in keys {
                    if next.contains_key(&e) {
                        continue;
                    }
                    let hc = h.get(&e).cloned().unwrap_or_else(BigInt::zero);
                    let gc = BigInt::from(*g.get(&e).unwrap_or(&0));
                    let t = ((gc - &hc).mod_floor(&pb) * &minv).mod_floor(&pb);
                    let v = symmetric(&(hc + t * &*m), &mm);
                    if !v.is_zero() {
                        next.insert(e, v);
                    }
                }
                *h = next;
                *m = mm;
            }
            _ => {
                let h: Zp = g
                    .iter()
                    .map(|(e, &c)| (e.clone(), symmetric(&BigInt::from(c), &pb)))
                    .collect();
                acc = Some((h, pb, lm));
                last = None;
                continue;
            }
        }
        let (h, _, _) = acc.as_ref().expect("set");
        if last.as_ref() == Some(h) {
            let cand = from_dense(h, &gens).integer_primitive();
            if a.exact_div(&cand).is_some() && b.exact_div(&cand).is_some() {
                return Some(cand);
            }
        }
        last = Some(h.clone());
    }
    None
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
    fn recovers_common_factor() {
        let (x, y, p) = (v(Var::X), v(Var::Y), v(Var::P));
        let g = x.mul(&y).add(&k(3)).add(&p.mul(&p));
        let a = g.mul(&x.add(&k(1))).mul(&g);
        let b = g.mul(&y.sub(&p)).mul(&k(7));
        let h = gcd(&a, &b).expect("modular gcd");
        assert!(h.exact_div(&g).is_some() && g.exact_div(&h).is_some());
    }

    #[test]
    fn coprime_inputs_give_one() {
        let (x, y) = (v(Var::X), v(Var::Y));
        let a = x.mul(&x).add(&y);
        let b = y.mul(&y).add(&x).add(&k(1));
        assert!(gcd(&a, &b).expect("modular gcd").is_one());
    }

    #[test]
    fn powers_of_a_cubic() {
        let (y, p, q) = (v(Var::Y), v(Var::P), v(Var::Q));
        let w = y.mul(&q).sub(&p.scale(&Q::new(1.into(), 2.into()))).add(&q.mul(&q).mul(&q).scale(&Q::new(1.into(), 9.into())));
        let w2 = w.mul(&w);
        let w6 = w2.mul(&w2).mul(&w2);
        let a = w6.clone();
        let b = w2.mul(&w).mul(&q.add(&y));
        let h = gcd(&a, &b).expect("modular gcd");
        let w3 = w2.mul(&w);
        assert!(h.exact_div(&w3).is_some() && w3.exact_div(&h).is_some());
    }

    fn small_poly(coeffs: &[i64]) -> Poly {
        // coefficients over the monomials 1, x, y, p, x y, y p, x^2, p^2
        let (x, y, p) = (v(Var::X), v(Var::Y), v(Var::P));
        let monos = [k(1), x.clone(), y.clone(), p.clone(), x.mul(&y), y.mul(&p), x.mul(&x), p.mul(&p)];
        monos
            .iter()
            .zip(coeffs)
            .fold(Poly::zero(), |acc, (m, &c)| acc.add(&m.scale(&Q::from_integer(c.into()))))
    }

    proptest::proptest! {
        #[test]
        fn common_factor_divides_the_gcd(
            a in proptest::collection::vec(-4i64..=4, 8),
            b in proptest::collection::vec(-4i64..=4, 8),
            g in proptest::collection::vec(-4i64..=4, 8),
        ) {
            let (a, b, g) = (small_poly(&a), small_poly(&b), small_poly(&g));
            proptest::prop_assume!(!a.is_zero() && !b.is_zero() && !g.is_zero());
            let (ag, bg) = (a.mul(&g), b.mul(&g));
            let h = gcd(&ag, &bg).expect("modular gcd");
            proptest::prop_assert!(h.exact_div(&g).is_some());
            proptest::prop_assert!(ag.exact_div(&h).is_some() && bg.exact_div(&h).is_some());
        }
    }
}
