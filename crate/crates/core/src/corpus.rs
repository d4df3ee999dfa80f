//! Named example equations and seeded random right-hand sides.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::invariants::Ode3;
use crate::symkernel::{Frac, Var};

/// Equations with four-dimensional contact symmetry and `W = 0`; `mu` is a
/// free parameter.
pub const CONFORMAL_EXAMPLES: [&str; 6] = [
    "mu*(q^2/(1-p^2) - p^2 + 1)^(3/2) - 3*q^2*p/(1-p^2) + p^3 - p^2",
    "mu*(2*q*y - p^2)^(3/2)/y^2",
    "4*mu*(q - p^2)^(3/2) + 6*q*p - 4*p^3",
    "mu*(q^2/p^2 + p^2)^(3/2) + 3*q^2/p + p^3",
    "(q^2 + 1)^(3/2)",
    "q^(3/2)",
];

/// The first conformal example with its last term `p^3 - p` instead of
/// `p^3 - p^2`. As listed, that example has `W != 0`; with this change `W`
/// vanishes identically in `mu`.
pub const CONFORMAL_FIRST_CORRECTED: &str =
    "mu*(q^2/(1-p^2) - p^2 + 1)^(3/2) - 3*q^2*p/(1-p^2) + p^3 - p";

/// Equations with an Einstein-Weyl structure on the solution space.
pub const EINSTEIN_WEYL_EXAMPLES: [&str; 4] = [
    "3*q^2/(2*p)",
    "3*q^2*p/(p^2 + 1)",
    "mu*(2*q*y - p^2)^(3/2)/y^2",
    "q^(3/2)",
];

/// The image of `y''' = 0` under the swap `x <-> y`.
pub const SWAP_OF_ZERO: &str = "3*q^2/p";

/// Parse with `mu` declared.
pub fn ode(text: &str) -> Result<Ode3> {
    Ode3::parse(text, &["mu"])
}

fn monomials(vars: &[Var], max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in vars {
        let mut next = Vec::new();
        for m in &out {
            let used: u32 = m.iter().sum();
            for e in 0..=(max_degree - used) {
                let mut m2 = m.clone();
                m2.push(e);
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &[Var], max_degree: u32) -> Frac {
    let mut acc = Frac::zero();
    for m in monomials(vars, max_degree) {
        // roughly half the monomials, small integer coefficients
        if rng.gen_bool(0.5) {
            continue;
        }
        let c: i64 = rng.gen_range(-3..=3);
        if c == 0 {
            continue;
        }
        let mut t = Frac::int(c);
        for (v, e) in vars.iter().zip(&m) {
            t = &t * &Frac::var(*v).pow_u(*e);
        }
        acc = &acc + &t;
    }
    acc
}

/// Random polynomial `F(x, y, p, q)` of total degree at most `max_degree`.
pub fn random_polynomial(seed: u64, max_degree: u32) -> Ode3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_poly(&mut rng, &Var::JET, max_degree);
    Ode3::new(f, Default::default()).expect("jet variables only")
}

/// Random `a3 q^3 + a2 q^2 + a1 q + a0` with polynomial `a_i(x, y, p)`,
/// returned with the coefficients as `[a0, a1, a2, a3]`.
pub fn random_cubic(seed: u64) -> (Ode3, [Frac; 4]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = [Var::X, Var::Y, Var::P];
    let a: [Frac; 4] = std::array::from_fn(|_| random_poly(&mut rng, &base, 2));
    let q = Frac::var(Var::Q);
    let mut f = Frac::zero();
    for (k, ak) in a.iter().enumerate() {
        f = &f + &(ak * &q.pow_u(k as u32));
    }
    (Ode3::new(f, Default::default()).expect("jet variables only"), a)
}

/// The ten seeded polynomial right-hand sides used as a regression corpus.
pub fn random_corpus() -> Vec<Ode3> {
    (0..10).map(|s| random_polynomial(1000 + s, 2)).collect()
}
