//! Differential forms, vector fields and symmetric 2-tensors over an explicit
//! coordinate list.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::symkernel::{Frac, Point, ProbeConfig, Var, ZeroVerdict, is_zero_frac};

/// Ordered coordinate list shared by forms that can be combined.
pub type Coords = Arc<[Var]>;

/// The jet coordinates `x, y, p, q`.
pub fn jet_coords() -> Coords {
    Arc::from(&Var::JET[..])
}

pub fn coords_of(vars: &[Var]) -> Coords {
    Arc::from(vars)
}

fn check(a: &Coords, b: &Coords) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::CoordinateMismatch(
            a.iter().map(|v| v.name().to_string()).collect(),
            b.iter().map(|v| v.name().to_string()).collect(),
        ))
    }
}

/// Sign of the permutation that sorts `idx`, or `None` on a repeated index.
fn sort_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// A k-form `sum f_I dx^I` with strictly increasing index tuples `I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    coords: Coords,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Frac>,
}

impl Form {
    pub fn zero(coords: &Coords, degree: usize) -> Form {
        Form {
            coords: coords.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn function(coords: &Coords, f: Frac) -> Form {
        let mut out = Form::zero(coords, 0);
        out.insert(vec![], f);
        out
    }

    /// `dv` for a coordinate `v` of the list.
    pub fn d_coord(coords: &Coords, v: Var) -> Form {
        let i = coords
            .iter()
            .position(|c| *c == v)
            .unwrap_or_else(|| panic!("{v} is not a coordinate"));
        let mut out = Form::zero(coords, 1);
        out.insert(vec![i], Frac::one());
        out
    }

    /// One-form from its coefficients on `dx^i`.
    pub fn one_form(coords: &Coords, coeffs: Vec<Frac>) -> Form {
        assert_eq!(coeffs.len(), coords.len());
        let mut out = Form::zero(coords, 1);
        for (i, c) in coeffs.into_iter().enumerate() {
            out.insert(vec![i], c);
        }
        out
    }

    /// Build from `(index tuple, coefficient)` pairs in any order.
    pub fn from_terms(coords: &Coords, degree: usize, terms: Vec<(Vec<usize>, Frac)>) -> Form {
        let mut out = Form::zero(coords, degree);
        for (mut idx, c) in terms {
            assert_eq!(idx.len(), degree);
            if let Some(s) = sort_sign(&mut idx) {
                out.add_term(idx, if s < 0 { -c } else { c });
            }
        }
        out
    }

    fn insert(&mut self, idx: Vec<usize>, c: Frac) {
        if !c.is_zero() {
            self.terms.insert(idx, c);
        }
    }

    fn add_term(&mut self, idx: Vec<usize>, c: Frac) {
        let v = match self.terms.remove(&idx) {
            Some(old) => &old + &c,
            None => c,
        };
        self.insert(idx, v);
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Frac)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `dx^I` for a sorted tuple.
    pub fn coeff(&self, idx: &[usize]) -> Frac {
        self.terms.get(idx).cloned().unwrap_or_default()
    }

    /// Coefficient of `dv1 ^ ... ^ dvk` given by variable names.
    pub fn coeff_of(&self, vars: &[Var]) -> Frac {
        let mut idx: Vec<usize> = vars
            .iter()
            .map(|v| self.coords.iter().position(|c| c == v).expect("coordinate"))
            .collect();
        match sort_sign(&mut idx) {
            Some(s) => {
                let c = self.coeff(&idx);
                if s < 0 {
                    -c
                } else {
                    c
                }
            }
            None => Frac::zero(),
        }
    }

    /// Coefficients of a one-form, one per coordinate.
    pub fn components(&self) -> Vec<Frac> {
        assert_eq!(self.degree, 1);
        (0..self.coords.len()).map(|i| self.coeff(&[i])).collect()
    }

    pub fn try_add(&self, other: &Form) -> Result<Form> {
        check(&self.coords, &other.coords)?;
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.add_term(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, f: &Frac) -> Form {
        let mut out = Form::zero(&self.coords, self.degree);
        if f.is_zero() {
            return out;
        }
        for (idx, c) in &self.terms {
            out.insert(idx.clone(), f * c);
        }
        out
    }

    pub fn neg(&self) -> Form {
        self.scale(&Frac::int(-1))
    }

    pub fn try_wedge(&self, other: &Form) -> Result<Form> {
        check(&self.coords, &other.coords)?;
        let mut out = Form::zero(&self.coords, self.degree + other.degree);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let mut idx: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
                if let Some(s) = sort_sign(&mut idx) {
                    let c = a * b;
                    out.add_term(idx, if s < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn d(&self) -> Form {
        let mut out = Form::zero(&self.coords, self.degree + 1);
        for (idx, c) in &self.terms {
            for (k, v) in self.coords.iter().enumerate() {
                if !c.depends_on(*v) {
                    continue;
                }
                let mut full = Vec::with_capacity(idx.len() + 1);
                full.push(k);
                full.extend_from_slice(idx);
                if let Some(s) = sort_sign(&mut full) {
                    let dc = c.diff(*v);
                    out.add_term(full, if s < 0 { -dc } else { dc });
                }
            }
        }
        out
    }

    pub fn try_interior(&self, v: &VectorField) -> Result<Form> {
        check(&self.coords, &v.coords)?;
        if self.degree == 0 {
            return Ok(Form::zero(&self.coords, 0));
        }
        let mut out = Form::zero(&self.coords, self.degree - 1);
        for (idx, c) in &self.terms {
            for (pos, &i) in idx.iter().enumerate() {
                let vi = &v.comps[i];
                if vi.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(pos);
                let t = vi * c;
                out.add_term(rest, if pos % 2 == 1 { -t } else { t });
            }
        }
        Ok(out)
    }

    /// Cartan's formula `d i_v + i_v d`.
    pub fn try_lie_derivative(&self, v: &VectorField) -> Result<Form> {
        let a = self.try_interior(v)?.d();
        let b = self.d().try_interior(v)?;
        if self.degree == 0 {
            return Ok(b);
        }
        a.try_add(&b)
    }

    /// Substitute coordinates and reinterpret over a new coordinate list:
    /// `map[v]` gives the old coordinate `v` as a function of the new ones.
    pub fn pullback(&self, target: &Coords, map: &BTreeMap<Var, Frac>) -> Result<Form> {
        let dmap: Vec<Form> = self
            .coords
            .iter()
            .map(|v| {
                let f = map.get(v).cloned().unwrap_or_else(|| Frac::var(*v));
                Form::function(target, f).d()
            })
            .collect();
        let mut out = Form::zero(target, self.degree);
        for (idx, c) in &self.terms {
            let mut acc = Form::function(target, c.subst_vars(map)?);
            for &i in idx {
                acc = acc.try_wedge(&dmap[i])?;
            }
            out = out.try_add(&acc)?;
        }
        Ok(out)
    }

    /// Zero verdict of every coefficient; the worst verdict wins.
    pub fn zero_verdict(&self, cfg: &ProbeConfig) -> ZeroVerdict {
        worst(self.terms.values().map(|c| is_zero_frac(c, cfg)))
    }

    pub fn to_latex(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(idx, c)| {
                let basis: Vec<String> = idx
                    .iter()
                    .map(|&i| format!("\\mathrm{{d}}{}", latex_var(self.coords[i])))
                    .collect();
                let coeff = c.to_expr().to_latex();
                if basis.is_empty() {
                    coeff
                } else {
                    format!("\\left({coeff}\\right)\\,{}", basis.join("\\wedge "))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// Combine verdicts: any nonzero wins, then unknown, else zero.
pub fn worst(it: impl IntoIterator<Item = ZeroVerdict>) -> ZeroVerdict {
    let mut unknown = None;
    for v in it {
        match v {
            ZeroVerdict::ProvedZero => {}
            ZeroVerdict::ProvedNonzero(_) => return v,
            ZeroVerdict::Unknown(_) => unknown = unknown.or(Some(v)),
        }
    }
    unknown.unwrap_or(ZeroVerdict::ProvedZero)
}

fn latex_var(v: Var) -> String {
    match v {
        Var::C1 => "c_{1}".into(),
        Var::C2 => "c_{2}".into(),
        Var::C3 => "c_{3}".into(),
        _ => v.name().into(),
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (idx, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            let basis: Vec<String> = idx.iter().map(|&i| format!("d{}", self.coords[i])).collect();
            if basis.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})*{}", basis.join("^"))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct TermJson {
    idx: Vec<usize>,
    coeff: String,
}

impl Serialize for Form {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Form", 3)?;
        st.serialize_field("degree", &self.degree)?;
        let coords: Vec<&str> = self.coords.iter().map(|v| v.name()).collect();
        st.serialize_field("coords", &coords)?;
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(idx, c)| TermJson {
                idx: idx.clone(),
                coeff: c.to_string(),
            })
            .collect();
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

impl std::ops::Add for &Form {
    type Output = Form;
    fn add(self, o: &Form) -> Form {
        self.try_add(o).expect("coordinate lists differ")
    }
}

impl std::ops::Sub for &Form {
    type Output = Form;
    fn sub(self, o: &Form) -> Form {
        self.try_add(&o.neg()).expect("coordinate lists differ")
    }
}

impl std::ops::Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        Form::neg(self)
    }
}

/// Function times form.
impl std::ops::Mul<&Form> for &Frac {
    type Output = Form;
    fn mul(self, o: &Form) -> Form {
        o.scale(self)
    }
}

/// Wedge product.
impl std::ops::BitXor for &Form {
    type Output = Form;
    fn bitxor(self, o: &Form) -> Form {
        self.try_wedge(o).expect("coordinate lists differ")
    }
}

/// Free-function forms of the operations.
pub fn wedge(a: &Form, b: &Form) -> Result<Form> {
    a.try_wedge(b)
}

pub fn exterior_d(a: &Form) -> Form {
    a.d()
}

pub fn interior(v: &VectorField, a: &Form) -> Result<Form> {
    a.try_interior(v)
}

pub fn lie_derivative(v: &VectorField, a: &Form) -> Result<Form> {
    a.try_lie_derivative(v)
}

/// Sum of forms over the same coordinates and degree.
pub fn sum_forms(coords: &Coords, degree: usize, xs: &[Form]) -> Form {
    let mut acc = Form::zero(coords, degree);
    for x in xs {
        acc = &acc + x;
    }
    acc
}

/// A vector field `sum v^i d/dx^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    coords: Coords,
    comps: Vec<Frac>,
}

impl VectorField {
    pub fn new(coords: &Coords, comps: Vec<Frac>) -> VectorField {
        assert_eq!(coords.len(), comps.len());
        VectorField {
            coords: coords.clone(),
            comps,
        }
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn components(&self) -> &[Frac] {
        &self.comps
    }

    /// Action on a function.
    pub fn apply(&self, f: &Frac) -> Frac {
        let mut acc = Frac::zero();
        for (v, c) in self.coords.iter().zip(&self.comps) {
            if !c.is_zero() && f.depends_on(*v) {
                acc = &acc + &(c * &f.diff(*v));
            }
        }
        acc
    }
}

/// Symmetric 2-tensor `g_ij dx^i dx^j` stored as a full symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor2 {
    coords: Coords,
    m: Vec<Vec<Frac>>,
}

impl SymTensor2 {
    pub fn zero(coords: &Coords) -> SymTensor2 {
        let n = coords.len();
        SymTensor2 {
            coords: coords.clone(),
            m: vec![vec![Frac::zero(); n]; n],
        }
    }

    /// Symmetrised product `ab = (a(x)b + b(x)a)/2`.
    pub fn sym_product(a: &Form, b: &Form) -> Result<SymTensor2> {
        check(a.coords(), b.coords())?;
        assert!(a.degree() == 1 && b.degree() == 1);
        let (ca, cb) = (a.components(), b.components());
        let n = ca.len();
        let half = Frac::ratio(1, 2);
        let mut m = vec![vec![Frac::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let t = &(&ca[i] * &cb[j]) + &(&ca[j] * &cb[i]);
                m[i][j] = &half * &t;
            }
        }
        Ok(SymTensor2 {
            coords: a.coords().clone(),
            m,
        })
    }

    /// From a matrix; it is symmetrised.
    pub fn from_matrix(coords: &Coords, m: Vec<Vec<Frac>>) -> SymTensor2 {
        let n = coords.len();
        let half = Frac::ratio(1, 2);
        let mut out = SymTensor2::zero(coords);
        for i in 0..n {
            for j in 0..n {
                out.m[i][j] = &half * &(&m[i][j] + &m[j][i]);
            }
        }
        out
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn get(&self, i: usize, j: usize) -> &Frac {
        &self.m[i][j]
    }

    pub fn matrix(&self) -> &Vec<Vec<Frac>> {
        &self.m
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|r| r.iter().all(Frac::is_zero))
    }

    pub fn try_add(&self, o: &SymTensor2) -> Result<SymTensor2> {
        check(&self.coords, &o.coords)?;
        let mut out = self.clone();
        for (r, ro) in out.m.iter_mut().zip(&o.m) {
            for (a, b) in r.iter_mut().zip(ro) {
                *a = &*a + b;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, f: &Frac) -> SymTensor2 {
        let mut out = self.clone();
        for r in out.m.iter_mut() {
            for a in r.iter_mut() {
                *a = f * &*a;
            }
        }
        out
    }

    /// `(L_v g)_ij = v^k d_k g_ij + g_kj d_i v^k + g_ik d_j v^k`.
    pub fn try_lie_derivative(&self, v: &VectorField) -> Result<SymTensor2> {
        check(&self.coords, &v.coords)?;
        let n = self.coords.len();
        let dv: Vec<Vec<Frac>> = (0..n)
            .map(|k| self.coords.iter().map(|c| v.comps[k].diff(*c)).collect())
            .collect();
        let mut m = vec![vec![Frac::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut acc = v.apply(&self.m[i][j]);
                for k in 0..n {
                    if !dv[k][i].is_zero() {
                        acc = &acc + &(&self.m[k][j] * &dv[k][i]);
                    }
                    if !dv[k][j].is_zero() {
                        acc = &acc + &(&self.m[i][k] * &dv[k][j]);
                    }
                }
                m[i][j] = acc.clone();
                m[j][i] = acc;
            }
        }
        Ok(SymTensor2 {
            coords: self.coords.clone(),
            m,
        })
    }

    pub fn pullback(&self, target: &Coords, map: &BTreeMap<Var, Frac>) -> Result<SymTensor2> {
        let jac: Vec<Vec<Frac>> = self
            .coords
            .iter()
            .map(|v| {
                let f = map.get(v).cloned().unwrap_or_else(|| Frac::var(*v));
                target.iter().map(|t| f.diff(*t)).collect()
            })
            .collect();
        let n = self.coords.len();
        let gs: Vec<Vec<Frac>> = self
            .m
            .iter()
            .map(|r| r.iter().map(|c| c.subst_vars(map)).collect::<std::result::Result<_, _>>())
            .collect::<std::result::Result<_, _>>()?;
        let t = target.len();
        let mut m = vec![vec![Frac::zero(); t]; t];
        for a in 0..t {
            for b in a..t {
                let mut acc = Frac::zero();
                for i in 0..n {
                    if jac[i][a].is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        if jac[j][b].is_zero() || gs[i][j].is_zero() {
                            continue;
                        }
                        acc = &acc + &(&(&jac[i][a] * &jac[j][b]) * &gs[i][j]);
                    }
                }
                m[a][b] = acc.clone();
                m[b][a] = acc;
            }
        }
        Ok(SymTensor2 {
            coords: target.clone(),
            m,
        })
    }

    pub fn zero_verdict(&self, cfg: &ProbeConfig) -> ZeroVerdict {
        let n = self.coords.len();
        worst((0..n).flat_map(|i| (i..n).map(move |j| (i, j))).map(|(i, j)| is_zero_frac(&self.m[i][j], cfg)))
    }

    pub fn eval(&self, at: &Point<f64>) -> Result<Vec<Vec<f64>>> {
        self.m
            .iter()
            .map(|r| r.iter().map(|c| c.eval(at).map_err(Error::from)).collect())
            .collect()
    }

    pub fn to_latex(&self) -> String {
        let n = self.coords.len();
        let mut parts = Vec::new();
        for i in 0..n {
            for j in i..n {
                let c = &self.m[i][j];
                if c.is_zero() {
                    continue;
                }
                let c = if i == j { c.clone() } else { &Frac::int(2) * c };
                let (a, b) = (latex_var(self.coords[i]), latex_var(self.coords[j]));
                let basis = if i == j {
                    format!("\\mathrm{{d}}{a}^2")
                } else {
                    format!("\\mathrm{{d}}{a}\\,\\mathrm{{d}}{b}")
                };
                parts.push(format!("\\left({}\\right){basis}", c.to_expr().to_latex()));
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Display for SymTensor2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.coords.len();
        let mut first = true;
        for i in 0..n {
            for j in i..n {
                let c = &self.m[i][j];
                if c.is_zero() {
                    continue;
                }
                if !first {
                    f.write_str(" + ")?;
                }
                first = false;
                let c = if i == j { c.clone() } else { &Frac::int(2) * c };
                write!(f, "({c})*d{}*d{}", self.coords[i], self.coords[j])?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Serialize for SymTensor2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SymTensor2", 2)?;
        let coords: Vec<&str> = self.coords.iter().map(|v| v.name()).collect();
        st.serialize_field("coords", &coords)?;
        let m: Vec<Vec<String>> = self
            .m
            .iter()
            .map(|r| r.iter().map(|c| c.to_string()).collect())
            .collect();
        st.serialize_field("matrix", &m)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> Coords {
        jet_coords()
    }

    #[test]
    fn wedge_signs() {
        let dx = Form::d_coord(&c(), Var::X);
        let dy = Form::d_coord(&c(), Var::Y);
        assert!((&dx ^ &dx).is_zero());
        let w1 = &dy - &(&Frac::var(Var::P) * &dx);
        assert_eq!(&w1 ^ &dx, &dy ^ &dx);
        assert_eq!((&dy ^ &dx).coeff_of(&[Var::X, Var::Y]), Frac::int(-1));
    }

    #[test]
    fn d_squared_vanishes_on_a_sample() {
        let f = Frac::var(Var::X) * Frac::var(Var::Q) + Frac::var(Var::P) * Frac::var(Var::P);
        let a = Form::function(&c(), f).d();
        assert!(a.d().is_zero());
    }
}
