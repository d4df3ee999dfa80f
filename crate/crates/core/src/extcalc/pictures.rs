//! Coframes, Cartan connections and derived tensors of the contact, point
//! and fibre-preserving pictures at the identity section.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::invariants::{sum, Jet, Ode3};
use crate::symkernel::{Frac, ProbeConfig, Var, ZeroVerdict};

use super::forms::{jet_coords, worst, Coords, Form, SymTensor2, VectorField};

const X: Var = Var::X;
const Y: Var = Var::Y;
const P: Var = Var::P;
const Q: Var = Var::Q;

fn r(n: i64, d: i64) -> Frac {
    Frac::ratio(n, d)
}

/// Which transformation pseudogroup the construction is adapted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Contact,
    Point,
    Fibre,
}

impl Picture {
    pub const ALL: [Picture; 3] = [Picture::Contact, Picture::Point, Picture::Fibre];

    pub fn name(self) -> &'static str {
        match self {
            Picture::Contact => "contact",
            Picture::Point => "point",
            Picture::Fibre => "fibre",
        }
    }
}

impl std::str::FromStr for Picture {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "contact" => Ok(Picture::Contact),
            "point" => Ok(Picture::Point),
            "fibre" | "fiber" => Ok(Picture::Fibre),
            _ => Err(format!("unknown picture `{s}` (expected contact, point or fibre)")),
        }
    }
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lie algebra a connection matrix takes values in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algebra {
    Sp4,
    Co21Semidirect,
    R2Mu,
}

/// Square matrix of one-forms.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionMatrix {
    pub algebra: Algebra,
    pub entries: Vec<Vec<Form>>,
}

/// Matrix of two-forms.
#[derive(Clone, Debug, PartialEq)]
pub struct FormMatrix(pub Vec<Vec<Form>>);

impl ConnectionMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// `d omega + omega ^ omega`.
    pub fn curvature(&self) -> FormMatrix {
        curvature(self)
    }
}

pub fn curvature(c: &ConnectionMatrix) -> FormMatrix {
    let n = c.dim();
    let coords = c.entries[0][0].coords().clone();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = c.entries[i][j].d();
            for k in 0..n {
                let (a, b) = (&c.entries[i][k], &c.entries[k][j]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = &acc + &(a ^ b);
            }
            row.push(acc);
        }
        out.push(row);
    }
    let _ = coords;
    FormMatrix(out)
}

impl FormMatrix {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|r| r.iter().all(Form::is_zero))
    }

    pub fn zero_verdict(&self, cfg: &ProbeConfig) -> ZeroVerdict {
        worst(self.0.iter().flat_map(|r| r.iter().map(|f| f.zero_verdict(cfg))))
    }

    pub fn to_latex(&self) -> String {
        matrix_latex(&self.0)
    }
}

fn matrix_latex(m: &[Vec<Form>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| r.iter().map(Form::to_latex).collect::<Vec<_>>().join(" & "))
        .collect();
    format!("\\begin{{pmatrix}}\n{}\n\\end{{pmatrix}}", rows.join(" \\\\\n"))
}

impl ConnectionMatrix {
    pub fn to_latex(&self) -> String {
        matrix_latex(&self.entries)
    }
}

impl Serialize for ConnectionMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ConnectionMatrix", 2)?;
        st.serialize_field("algebra", &self.algebra)?;
        st.serialize_field("entries", &self.entries)?;
        st.end()
    }
}

impl Serialize for FormMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// The plain jet coframe `dy - p dx, dp - q dx, dq - F dx, dx`.
pub fn plain_coframe(ode: &Ode3) -> [Form; 4] {
    let c = jet_coords();
    let dx = Form::d_coord(&c, X);
    [
        &Form::d_coord(&c, Y) - &(&Frac::var(P) * &dx),
        &Form::d_coord(&c, P) - &(&Frac::var(Q) * &dx),
        &Form::d_coord(&c, Q) - &(ode.rhs() * &dx),
        dx,
    ]
}

/// The total derivative as a vector field on J².
pub fn total_derivative_field(ode: &Ode3) -> VectorField {
    VectorField::new(
        &jet_coords(),
        vec![Frac::one(), Frac::var(P), Frac::var(Q), ode.rhs().clone()],
    )
}

/// `omega^1, omega^2, omega~^3` and the picture's fourth form.
pub fn coframe(ode: &Ode3, picture: Picture) -> [Form; 4] {
    coframe_with(&Jet::new(ode), picture)
}

pub fn coframe_with(j: &Jet<'_>, picture: Picture) -> [Form; 4] {
    let [w1, w2, w3, dx] = plain_coframe(j.ode());
    let w3t = &(&w3 - &(&(&r(1, 3) * &j.f(&[Q])) * &w2)) + &(&j.k(&[]) * &w1);
    let w4 = match picture {
        Picture::Point => &dx + &(&(&r(1, 6) * &j.f(&[Q, Q])) * &w1),
        Picture::Contact | Picture::Fibre => dx,
    };
    [w1, w2, w3t, w4]
}

fn lin(c: &Coords, parts: &[(Frac, &Form)]) -> Form {
    let mut acc = Form::zero(c, 1);
    for (f, w) in parts {
        if !f.is_zero() {
            acc = &acc + &(f * *w);
        }
    }
    acc
}

/// The printed identity-section forms Omega_i^0 (six for contact, three
/// otherwise).
pub fn omega0(ode: &Ode3, picture: Picture) -> Vec<Form> {
    omega0_with(&Jet::new(ode), picture)
}

pub fn omega0_with(j: &Jet<'_>, picture: Picture) -> Vec<Form> {
    let c = jet_coords();
    let [w1, w2, w3, w4] = coframe_with(j, picture);
    let (fq, fqq, fqp) = (j.f(&[Q]), j.f(&[Q, Q]), j.f(&[P, Q]));
    let (k, kq, l) = (j.k(&[]), j.k(&[Q]), j.l(&[]));
    match picture {
        Picture::Contact => {
            let wq = j.w(&[Q]);
            let wqq = j.w(&[Q, Q]);
            let kqq = j.k(&[Q, Q]);
            let o1 = lin(&c, &[(-&kq, &w1)]);
            let o2 = lin(
                &c,
                &[(&(&r(1, 3) * &wq) + &l, &w1), (-&kq, &w2), (-&k, &w4)],
            );
            let o3 = lin(
                &c,
                &[(-&kq, &w1), (&r(1, 6) * &fqq, &w2), (&r(1, 3) * &fq, &w4)],
            );
            let o4 = lin(
                &c,
                &[
                    (-(&(&r(1, 3) * &wqq) + &j.l(&[Q])), &w1),
                    (&r(1, 2) * &kqq, &w2),
                ],
            );
            let o5 = lin(
                &c,
                &[
                    (&r(1, 2) * &kqq, &w1),
                    (&r(-1, 6) * &j.f(&[Q, Q, Q]), &w2),
                    (&r(-1, 6) * &fqq, &w4),
                ],
            );
            let a1 = sum(&[
                &r(1, 3) * &j.total(&wqq),
                &r(-4, 3) * &j.w(&[P, Q]),
                &r(-1, 3) * &(&fq * &wqq),
                &r(1, 3) * &(&j.f(&[Q, Q, Q]) * &j.w(&[])),
                j.m(&[]),
            ]);
            let a2 = &r(1, 3)
                * &sum(&[
                    j.f(&[Y, Q, Q]),
                    -(&j.f(&[Q, Q, Q]) * &k),
                    -wqq.clone(),
                ]);
            let a4 = sum(&[
                &r(2, 3) * &j.f(&[Y, Q]),
                &r(-1, 3) * &(&fqq * &k),
                &r(-2, 1) * &l,
                &r(-4, 3) * &wq,
            ]);
            let o6 = lin(&c, &[(a1, &w1), (a2, &w2), (-&kqq, &w3), (a4, &w4)]);
            vec![o1, o2, o3, o4, o5, o6]
        }
        Picture::Point => {
            let o1 = lin(
                &c,
                &[
                    (
                        -sum(&[
                            &r(3, 1) * &kq,
                            &r(2, 9) * &(&fqq * &fq),
                            &r(2, 3) * &fqp,
                        ]),
                        &w1,
                    ),
                    (&r(1, 6) * &fqq, &w2),
                ],
            );
            let o2 = lin(
                &c,
                &[
                    (&l + &(&r(1, 6) * &(&fqq * &k)), &w1),
                    (
                        -sum(&[
                            &r(2, 1) * &kq,
                            &r(1, 9) * &(&fqq * &fq),
                            &r(1, 3) * &fqp,
                        ]),
                        &w2,
                    ),
                    (&r(1, 6) * &fqq, &w3),
                    (-&k, &w4),
                ],
            );
            let o3 = lin(
                &c,
                &[
                    (
                        -sum(&[
                            &r(2, 1) * &kq,
                            &r(1, 6) * &(&fqq * &fq),
                            &r(1, 3) * &fqp,
                        ]),
                        &w1,
                    ),
                    (&r(1, 3) * &fqq, &w2),
                    (&r(1, 3) * &fq, &w4),
                ],
            );
            vec![o1, o2, o3]
        }
        Picture::Fibre => {
            let o1 = lin(&c, &[(-&kq, &w1), (&r(1, 3) * &fqq, &w2)]);
            let o2 = lin(
                &c,
                &[(l, &w1), (-&kq, &w2), (&r(1, 3) * &fqq, &w3), (-&k, &w4)],
            );
            let o3 = lin(
                &c,
                &[(-&kq, &w1), (&r(1, 3) * &fqq, &w2), (&r(1, 3) * &fq, &w4)],
            );
            vec![o1, o2, o3]
        }
    }
}

/// The identity-section connection matrix of the picture.
pub fn connection(ode: &Ode3, picture: Picture) -> ConnectionMatrix {
    let j = Jet::new(ode);
    let [w1, w2, w3, w4] = coframe_with(&j, picture);
    let om = omega0_with(&j, picture);
    let c = jet_coords();
    let z = Form::zero(&c, 1);
    let h = |f: &Form| f.scale(&r(1, 2));
    let (o1, o2, o3) = (&om[0], &om[1], &om[2]);
    let (o4, o5, o6) = if picture == Picture::Contact {
        (om[3].clone(), om[4].clone(), om[5].clone())
    } else {
        (z.clone(), z.clone(), z.clone())
    };
    let entries = vec![
        vec![h(o1), h(o2), -&h(&o4), o6.scale(&r(-1, 4))],
        vec![w4.clone(), o3 - &h(o1), -&o5, -&h(&o4)],
        vec![w2.clone(), w3, &h(o1) - o3, -&h(o2)],
        vec![w1.scale(&Frac::int(2)), w2, -&w4, -&h(o1)],
    ];
    ConnectionMatrix {
        algebra: if picture == Picture::Contact {
            Algebra::Sp4
        } else {
            Algebra::Co21Semidirect
        },
        entries,
    }
}

/// `g = 2 omega^1 omega~^3 - (omega^2)^2`.
pub fn conformal_metric(ode: &Ode3) -> SymTensor2 {
    let [w1, w2, w3, _] = coframe(ode, Picture::Contact);
    let a = SymTensor2::sym_product(&w1, &w3).expect("same coordinates");
    let b = SymTensor2::sym_product(&w2, &w2).expect("same coordinates");
    a.scale(&Frac::int(2))
        .try_add(&b.scale(&Frac::int(-1)))
        .expect("same coordinates")
}

/// The Weyl potential written out in the plain jet coframe.
pub fn weyl_potential(ode: &Ode3) -> Form {
    let j = Jet::new(ode);
    let [w1, w2, _, dx] = plain_coframe(ode);
    let (fq, fqq) = (j.f(&[Q]), j.f(&[Q, Q]));
    let a = -sum(&[
        &r(2, 1) * &j.k(&[Q]),
        &r(1, 9) * &(&fqq * &fq),
        &r(1, 3) * &j.f(&[P, Q]),
    ]);
    lin(
        &jet_coords(),
        &[(a, &w1), (&r(1, 3) * &fqq, &w2), (&r(1, 3) * &fq, &dx)],
    )
}

/// The printed Cotton two-forms `(DP1, DP2, DP3)`.
pub fn cotton(ode: &Ode3) -> [Form; 3] {
    let j = Jet::new(ode);
    let [w1, w2, w3, _] = coframe_with(&j, Picture::Contact);
    let w12 = &w1 ^ &w2;
    let w13 = &w1 ^ &w3;
    let w23 = &w2 ^ &w3;
    let k = j.k(&[]);
    let kq = j.k(&[Q]);
    let fqqq = j.f(&[Q, Q, Q]);
    let a = sum(&[
        &r(1, 2) * &j.m(&[P]),
        &r(1, 6) * &(&j.f(&[Q]) * &j.m(&[Q])),
        &r(1, 6) * &(&fqqq * &j.k(&[Y])),
        &kq * &j.l(&[Q]),
        &r(-1, 6) * &(&(&k * &k) * &j.f(&[Q, Q, Q, Q])),
        &r(1, 6) * &(&kq * &j.f(&[Y, Q, Q])),
        &r(-1, 6) * &j.f(&[Y, Y, Q, Q]),
        &r(-1, 3) * &(&(&fqqq * &kq) * &k),
        &r(1, 3) * &(&j.f(&[Y, Q, Q]) * &k),
    ]);
    let b = &r(1, 2)
        * &sum(&[
            j.m(&[Q]),
            -(&j.k(&[Q, Q, Q]) * &k),
            &r(-2, 1) * &(&j.k(&[Q, Q]) * &kq),
            j.k(&[Y, Q, Q]),
        ]);
    let lqq = j.l(&[Q, Q]);
    let kqqq = j.k(&[Q, Q, Q]);
    let c = jet_coords();
    let two = |parts: &[(Frac, &Form)]| {
        let mut acc = Form::zero(&c, 2);
        for (f, w) in parts {
            acc = &acc + &(f * *w);
        }
        acc
    };
    let dp1 = two(&[(a, &w12), (b.clone(), &w13), (&r(-1, 2) * &lqq, &w23)]);
    let dp2 = two(&[(b, &w12), (-&lqq, &w13), (&r(1, 2) * &kqqq, &w23)]);
    let dp3 = two(&[
        (&r(-1, 2) * &lqq, &w12),
        (&r(1, 2) * &kqqq, &w13),
        (&r(-1, 6) * &j.f(&[Q, Q, Q, Q]), &w23),
    ]);
    [dp1, dp2, dp3]
}

/// Which middle term the six-dimensional metric uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricVariant {
    /// `-2 Omega_2 theta^1` (contact construction).
    #[default]
    C,
    /// `-2 Omega_3 theta^1` (point construction).
    P,
}

impl std::str::FromStr for MetricVariant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "c" => Ok(MetricVariant::C),
            "p" => Ok(MetricVariant::P),
            _ => Err(format!("unknown metric variant `{s}` (expected c or p)")),
        }
    }
}

/// `2(Omega_1 - Omega_3)theta^2 - 2 Omega_k theta^1 + 2 theta^4 theta^3` at the
/// identity section of the contact bundle, `k = 2` or `3` by variant.
pub fn six_dim_metric(ode: &Ode3, variant: MetricVariant) -> SymTensor2 {
    let j = Jet::new(ode);
    let [w1, w2, w3, w4] = coframe_with(&j, Picture::Contact);
    let om = omega0_with(&j, Picture::Contact);
    let s = |a: &Form, b: &Form, k: i64| {
        SymTensor2::sym_product(a, b)
            .expect("same coordinates")
            .scale(&Frac::int(k))
    };
    let mid = match variant {
        MetricVariant::C => &om[1],
        MetricVariant::P => &om[2],
    };
    s(&(&om[0] - &om[2]), &w2, 2)
        .try_add(&s(mid, &w1, -2))
        .and_then(|t| t.try_add(&s(&w4, &w3, 2)))
        .expect("same coordinates")
}
