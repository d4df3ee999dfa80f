//! The five-dimensional coframe for `W != 0`, its structure functions and the
//! linear connection of the constant-`a` family.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::{Jet, Ode3};
use crate::symkernel::{constancy, Constancy, Frac, Point, ProbeConfig, Var};

use super::forms::{worst, Coords, Form};
use super::frame::Coframe;
use super::pictures::{Algebra, ConnectionMatrix, FormMatrix};

fn r(n: i64, d: i64) -> Frac {
    Frac::ratio(n, d)
}

/// `(x, y, p, q, u)`.
pub fn five_coords() -> Coords {
    Arc::from(&[Var::X, Var::Y, Var::P, Var::Q, Var::U][..])
}

/// `theta^1 .. theta^4, Omega` on `(x, y, p, q, u)`.
pub fn five_dim_coframe(ode: &Ode3) -> Result<[Form; 5]> {
    let m = five_dim_matrix(ode)?;
    let base = adapted_forms(ode);
    Ok(std::array::from_fn(|a| {
        let mut acc = Form::zero(&five_coords(), 1);
        for (c, b) in m[a].iter().zip(&base) {
            if !c.is_zero() {
                acc = &acc + &(c * b);
            }
        }
        acc
    }))
}

/// Rows are the coframe, columns `omega^1, omega^2, omega^3, dx, du`.
fn five_dim_matrix(ode: &Ode3) -> Result<Vec<Vec<Frac>>> {
    let j = Jet::new(ode);
    let w = j.w(&[]);
    if w.is_zero() {
        return Err(Error::WunschmannZero("five-dimensional coframe".into()));
    }
    let (p, q) = (Var::P, Var::Q);
    let uu = Frac::var(Var::U);
    let w13 = j.w_third(1, "five-dimensional coframe")?;
    let w23 = j.w_third(2, "five-dimensional coframe")?;
    let z = j.z(&[])?;
    let zq = j.z(&[q])?;
    let fq = j.f(&[q]);
    let wq = j.w(&[q]);
    let wp = j.w(&[p]);
    let zero = Frac::zero;
    let u_w = uu.try_div(&w13)?;
    let wq_w23 = wq.try_div(&w23)?;
    let dz = j.total(&z);
    let om1 = &crate::invariants::sum(&[
        &r(1, 9) * &(&wq * &dz),
        &r(-1, 27) * &(&wq * &(&z * &z)),
        &r(1, 9) * &(&wp * &z),
    ])
    .try_div(&w)?
        - &(&(&r(1, 3) * &j.z(&[p])?) + &(&r(1, 9) * &(&fq * &zq)));
    Ok(vec![
        vec![&w13 * &uu, zero(), zero(), zero(), zero()],
        vec![&(&r(1, 3) * &z) * &uu, uu.clone(), zero(), zero(), zero()],
        vec![
            &u_w * &(&j.k(&[]) + &(&r(1, 18) * &(&z * &z))),
            &(&r(1, 3) * &u_w) * &(&z - &fq),
            u_w.clone(),
            zero(),
            zero(),
        ],
        vec![
            &(&r(1, 9) * &(&wq_w23 * &z)) - &(&r(1, 3) * &(&w13 * &zq)),
            &r(1, 3) * &wq_w23,
            zero(),
            w13.clone(),
            zero(),
        ],
        vec![
            om1,
            &wp.try_div(&(&r(3, 1) * &w))? - &(&r(1, 3) * &zq),
            wq.try_div(&(&r(3, 1) * &w))?,
            &r(1, 3) * &fq,
            uu.recip()?,
        ],
    ])
}

/// `omega^1, omega^2, omega^3, dx, du` on `(x, y, p, q, u)`.
fn adapted_forms(ode: &Ode3) -> [Form; 5] {
    let c = five_coords();
    let dx = Form::d_coord(&c, Var::X);
    let w1 = &Form::d_coord(&c, Var::Y) - &(&Frac::var(Var::P) * &dx);
    let w2 = &Form::d_coord(&c, Var::P) - &(&Frac::var(Var::Q) * &dx);
    let w3 = &Form::d_coord(&c, Var::Q) - &(ode.rhs() * &dx);
    [w1, w2, w3, dx, Form::d_coord(&c, Var::U)]
}

/// `(omega^1, omega^2, omega^3, dx, du)`, the frame the coframe is
/// triangular in.
fn five_frame(ode: &Ode3, th: &[Form; 5], cfg: &ProbeConfig) -> Result<Coframe> {
    let base = Coframe::new(adapted_forms(ode).to_vec(), cfg)?;
    Coframe::over_matrix(th.to_vec(), &base, &five_dim_matrix(ode)?, cfg)
}

/// Which `d theta` and which wedge pair each structure function is read from.
const STRUCTURE_SLOTS: [(&str, usize, usize, usize); 10] = [
    ("a", 1, 0, 3),
    ("b", 2, 0, 1),
    ("c", 2, 0, 2),
    ("e", 2, 1, 2),
    ("f", 3, 0, 1),
    ("g", 3, 0, 2),
    ("h", 3, 0, 3),
    ("k", 3, 1, 2),
    ("l", 4, 0, 1),
    ("m", 4, 0, 3),
];

/// The structure functions evaluated at one point of `(x, y, p, q, u)`.
///
/// The exact dual frame of a coframe with cube roots of `W` grows quickly,
/// so this evaluates the coframe and its exterior derivative first and
/// inverts numerically.
pub fn five_dim_structure_at(ode: &Ode3, at: &Point<f64>) -> Result<BTreeMap<String, f64>> {
    let th = five_dim_coframe(ode)?;
    let n = 5;
    let mut a = dense::zeros(n);
    for (r, f) in th.iter().enumerate() {
        for (i, c) in f.components().iter().enumerate() {
            a[r][i] = c.eval(at)?;
        }
    }
    let e = dense::invert(&a).ok_or_else(|| {
        Error::SingularCoframe(format!("coframe matrix is singular at {at}"))
    })?;
    let mut out = BTreeMap::new();
    let mut dth: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
    for &(name, k, b, c) in &STRUCTURE_SLOTS {
        let terms = match dth.get(&k) {
            Some(t) => t.clone(),
            None => {
                let mut t = Vec::new();
                for (idx, coeff) in th[k].d().terms() {
                    t.push((idx[0], idx[1], coeff.eval(at)?));
                }
                dth.insert(k, t.clone());
                t
            }
        };
        // d theta(e_b, e_c) with e_b the b-th column of the inverse
        let v = terms
            .iter()
            .map(|&(i, j, d)| d * (e[i][b] * e[j][c] - e[j][b] * e[i][c]))
            .sum();
        out.insert(name.to_string(), v);
    }
    Ok(out)
}

mod dense {
    pub fn zeros(n: usize) -> Vec<Vec<f64>> {
        vec![vec![0.0; n]; n]
    }

    /// Gauss-Jordan with partial pivoting.
    pub fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
        let n = m.len();
        let mut a = m.to_vec();
        let mut inv: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for col in 0..n {
            let p = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
            if a[p][col].abs() < 1e-300 {
                return None;
            }
            a.swap(col, p);
            inv.swap(col, p);
            let d = a[col][col];
            for j in 0..n {
                a[col][j] /= d;
                inv[col][j] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = a[r][col];
                    for j in 0..n {
                        a[r][j] -= f * a[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
        Some(inv)
    }
}

/// Structure functions named as in the displayed equations, with the
/// residual of each equation after substituting them back.
#[derive(Clone, Debug, Serialize)]
pub struct FiveDimStructure {
    pub functions: BTreeMap<String, Frac>,
    pub residuals: Vec<Form>,
}

impl FiveDimStructure {
    pub fn residual_verdict(&self, cfg: &ProbeConfig) -> crate::symkernel::ZeroVerdict {
        worst(self.residuals.iter().map(|f| f.zero_verdict(cfg)))
    }
}

/// Extract `a, b, c, e, f, g, h, k, l, m` and check the five structure
/// equations.
pub fn five_dim_structure(ode: &Ode3, cfg: &ProbeConfig) -> Result<FiveDimStructure> {
    let th = five_dim_coframe(ode)?;
    let frame = five_frame(ode, &th, cfg)?;
    let dth: Vec<Form> = th.iter().map(Form::d).collect();
    let comp = |a: usize, b: usize, c: usize| frame.component(&dth[a], &[b, c]);
    // indices: theta^1..theta^4 -> 0..3, Omega -> 4
    let mut fns = BTreeMap::new();
    for &(name, k, b, c) in &STRUCTURE_SLOTS {
        fns.insert(name.to_string(), comp(k, b, c)?);
    }
    let get = |n: &str| fns[n].clone();
    let w = |a: usize, b: usize| &th[a] ^ &th[b];
    let om = &th[4];
    let t = |f: Frac, form: Form| form.scale(&f);
    let rhs = [
        &(om ^ &th[0]) - &w(1, 3),
        &(&(om ^ &th[1]) + &t(get("a"), w(0, 3))) - &w(2, 3),
        crate::extcalc::forms::sum_forms(
            &five_coords(),
            2,
            &[
                om ^ &th[2],
                t(get("b"), w(0, 1)),
                t(get("c"), w(0, 2)),
                -&w(0, 3),
                t(get("e"), w(1, 2)),
                t(get("a"), w(1, 3)),
            ],
        ),
        crate::extcalc::forms::sum_forms(
            &five_coords(),
            2,
            &[
                t(get("f"), w(0, 1)),
                t(get("g"), w(0, 2)),
                t(get("h"), w(0, 3)),
                t(get("k"), w(1, 2)),
                t(-get("e"), w(1, 3)),
            ],
        ),
        crate::extcalc::forms::sum_forms(
            &five_coords(),
            2,
            &[
                t(get("l"), w(0, 1)),
                t(&get("f") - &(&get("a") * &get("k")), w(0, 2)),
                t(get("m"), w(0, 3)),
                t(get("g"), w(1, 2)),
                t(get("h"), w(1, 3)),
            ],
        ),
    ];
    let residuals = dth.iter().zip(rhs.iter()).map(|(a, b)| a - b).collect();
    Ok(FiveDimStructure {
        functions: fns,
        residuals,
    })
}

/// The linear connection of the constant-`a` family with its curvature.
#[derive(Clone, Debug, Serialize)]
pub struct MuConnection {
    pub mu: Frac,
    pub connection: ConnectionMatrix,
    pub curvature: FormMatrix,
    /// Components of `R^1_1` on `theta^1^theta^2, theta^1^theta^3, theta^2^theta^3`.
    pub r11: [Frac; 3],
    /// Components of `R^1_2` on the same basis.
    pub r12: [Frac; 3],
    /// `f, g, k` read off from `d theta^4`.
    pub fgk: [Frac; 3],
}

pub fn mu_connection(ode: &Ode3, cfg: &ProbeConfig) -> Result<MuConnection> {
    let a = match crate::invariants::scalar_invariant(ode, crate::invariants::InvariantName::A5) {
        Ok(a) => a,
        Err(Error::WunschmannZero(_)) => {
            return Err(Error::NotConstant(
                "a5".into(),
                "W vanishes identically, so a5 is undefined".into(),
            ))
        }
        Err(e) => return Err(e),
    };
    let mu = match constancy(&a, cfg) {
        Constancy::Constant(c) => c,
        Constancy::NotConstant { var, verdict } | Constancy::Unknown { var, verdict } => {
            return Err(Error::NotConstant(
                "a5".into(),
                format!("d/d{var} is {}", verdict.label()),
            ))
        }
    };
    let th = five_dim_coframe(ode)?;
    let c = five_coords();
    let z = Form::zero(&c, 1);
    let om = &th[4];
    let t4 = &th[3];
    let entries = vec![
        vec![-om, -t4, z.clone()],
        vec![t4.scale(&mu), -om, -t4],
        vec![-t4, t4.scale(&mu), -om],
    ];
    let connection = ConnectionMatrix {
        algebra: Algebra::R2Mu,
        entries,
    };
    let curvature = connection.curvature();
    let frame = five_frame(ode, &th, cfg)?;
    let pick = |f: &Form| -> Result<[Frac; 3]> {
        Ok([
            frame.component(f, &[0, 1])?,
            frame.component(f, &[0, 2])?,
            frame.component(f, &[1, 2])?,
        ])
    };
    let r11 = pick(&curvature.0[0][0])?;
    let r12 = pick(&curvature.0[0][1])?;
    let d4 = th[3].d();
    let fgk = [
        frame.component(&d4, &[0, 1])?,
        frame.component(&d4, &[0, 2])?,
        frame.component(&d4, &[1, 2])?,
    ];
    Ok(MuConnection {
        mu,
        connection,
        curvature,
        r11,
        r12,
        fgk,
    })
}
