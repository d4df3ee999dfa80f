//! Exact linear algebra over canonical fractions, dual frames and structure
//! functions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::symkernel::{is_zero_frac, Frac, ProbeConfig, ZeroVerdict};

use super::forms::{Coords, Form, VectorField};

/// Inverse of a square matrix by Gauss-Jordan elimination. Every pivot is
/// certified nonzero by the probe test.
pub fn invert(m: &[Vec<Frac>], cfg: &ProbeConfig) -> Result<Vec<Vec<Frac>>> {
    let n = m.len();
    let mut a: Vec<Vec<Frac>> = m.to_vec();
    let mut inv: Vec<Vec<Frac>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Frac::one() } else { Frac::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = choose_pivot(&a, col, cfg)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].recip()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &p;
            inv[col][j] = &inv[col][j] * &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                if !a[col][j].is_zero() {
                    a[r][j] = &a[r][j] - &(&f * &a[col][j]);
                }
                if !inv[col][j].is_zero() {
                    inv[r][j] = &inv[r][j] - &(&f * &inv[col][j]);
                }
            }
        }
    }
    Ok(inv)
}

fn choose_pivot(a: &[Vec<Frac>], col: usize, cfg: &ProbeConfig) -> Result<usize> {
    let mut candidates: Vec<usize> = (col..a.len()).filter(|&r| !a[r][col].is_zero()).collect();
    // sparsest rows first (no fill-in on triangular input), then constants,
    // then the shortest entries
    candidates.sort_by_key(|&r| {
        let c = &a[r][col];
        let fill = a[r][col..].iter().filter(|e| !e.is_zero()).count();
        (
            fill,
            c.as_constant().is_none(),
            c.numer().terms().len() + c.denom().terms().len(),
        )
    });
    for r in candidates {
        let c = &a[r][col];
        if c.as_constant().is_some() || is_zero_frac(c, cfg).is_proved_nonzero() {
            return Ok(r);
        }
    }
    Err(Error::SingularCoframe(format!(
        "no certified nonzero pivot in column {col}"
    )))
}

/// Determinant by exact elimination (no pivot certification).
pub fn determinant(m: &[Vec<Frac>]) -> Frac {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Frac::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Frac::zero();
        };
        if p != col {
            a.swap(col, p);
            det = -det;
        }
        let piv = a[col][col].clone();
        det = &det * &piv;
        let pinv = piv.recip().expect("pivot is a nonzero normal form");
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &pinv;
            for j in col..n {
                if !a[col][j].is_zero() {
                    a[r][j] = &a[r][j] - &(&f * &a[col][j]);
                }
            }
        }
    }
    det
}

/// A coframe together with its dual frame.
#[derive(Clone, Debug)]
pub struct Coframe {
    forms: Vec<Form>,
    dual: Vec<VectorField>,
}

impl Coframe {
    /// `forms` must be n one-forms on an n-dimensional coordinate list.
    pub fn new(forms: Vec<Form>, cfg: &ProbeConfig) -> Result<Coframe> {
        let coords: Coords = forms
            .first()
            .map(|f| f.coords().clone())
            .ok_or_else(|| Error::SingularCoframe("empty coframe".into()))?;
        if forms.len() != coords.len() || forms.iter().any(|f| f.degree() != 1) {
            return Err(Error::SingularCoframe(format!(
                "{} forms on {} coordinates",
                forms.len(),
                coords.len()
            )));
        }
        for f in &forms {
            if f.coords() != &coords {
                return Err(Error::CoordinateMismatch(
                    coords.iter().map(|v| v.name().to_string()).collect(),
                    f.coords().iter().map(|v| v.name().to_string()).collect(),
                ));
            }
        }
        let a: Vec<Vec<Frac>> = forms.iter().map(Form::components).collect();
        let inv = invert(&a, cfg)?;
        let n = coords.len();
        // theta^a = A^a_i dx^i, so e_b = (A^-1)^i_b d/dx^i
        let dual = (0..n)
            .map(|b| VectorField::new(&coords, (0..n).map(|i| inv[i][b].clone()).collect()))
            .collect();
        Ok(Coframe { forms, dual })
    }

    /// Same as [`Coframe::new`] but inverts the matrix of `forms` relative to
    /// `base`, whose dual frame is already known. Much cheaper when `forms`
    /// is close to triangular in `base`.
    pub fn over(forms: Vec<Form>, base: &Coframe, cfg: &ProbeConfig) -> Result<Coframe> {
        if forms.len() != base.forms.len() || forms.iter().any(|f| f.degree() != 1) {
            return Err(Error::SingularCoframe(format!(
                "{} forms over a base of {}",
                forms.len(),
                base.forms.len()
            )));
        }
        let n = forms.len();
        let mut a = Vec::with_capacity(n);
        for f in &forms {
            let row = (0..n)
                .map(|i| base.component(f, &[i]))
                .collect::<Result<Vec<_>>>()?;
            a.push(row);
        }
        Coframe::over_matrix(forms, base, &a, cfg)
    }

    /// As [`Coframe::over`] with the matrix `forms[a] = m[a][i] base[i]`
    /// supplied by the caller. The matrix is trusted, not rechecked.
    pub fn over_matrix(
        forms: Vec<Form>,
        base: &Coframe,
        m: &[Vec<Frac>],
        cfg: &ProbeConfig,
    ) -> Result<Coframe> {
        let n = forms.len();
        if m.len() != n || base.forms.len() != n {
            return Err(Error::SingularCoframe(format!(
                "{} forms, {} matrix rows, base of {}",
                n,
                m.len(),
                base.forms.len()
            )));
        }
        let inv = invert(m, cfg)?;
        let coords = base.forms[0].coords().clone();
        let dual = (0..n)
            .map(|b| {
                let mut comps = vec![Frac::zero(); n];
                for (i, e) in base.dual.iter().enumerate() {
                    if inv[i][b].is_zero() {
                        continue;
                    }
                    for (k, c) in e.components().iter().enumerate() {
                        if !c.is_zero() {
                            comps[k] = &comps[k] + &(&inv[i][b] * c);
                        }
                    }
                }
                VectorField::new(&coords, comps)
            })
            .collect();
        Ok(Coframe { forms, dual })
    }

    pub fn forms(&self) -> &[Form] {
        &self.forms
    }

    pub fn dual(&self) -> &[VectorField] {
        &self.dual
    }

    /// Coefficients of a form on `theta^{b1} ^ ... ^ theta^{bk}`, `b1 < ... < bk`.
    pub fn decompose(&self, form: &Form) -> Result<BTreeMap<Vec<usize>, Frac>> {
        let n = self.forms.len();
        let mut out = BTreeMap::new();
        for idx in increasing_tuples(n, form.degree()) {
            let mut f = form.clone();
            for &b in &idx {
                f = f.try_interior(&self.dual[b])?;
            }
            let c = f.coeff(&[]);
            if !c.is_zero() {
                out.insert(idx, c);
            }
        }
        Ok(out)
    }

    /// Coefficient of a single basis element.
    pub fn component(&self, form: &Form, idx: &[usize]) -> Result<Frac> {
        let mut f = form.clone();
        for &b in idx {
            f = f.try_interior(&self.dual[b])?;
        }
        Ok(f.coeff(&[]))
    }

    /// Rebuild a form from coefficients in the coframe basis.
    pub fn expand(&self, degree: usize, coeffs: &BTreeMap<Vec<usize>, Frac>) -> Form {
        let coords = self.forms[0].coords().clone();
        let mut acc = Form::zero(&coords, degree);
        for (idx, c) in coeffs {
            let mut t = Form::function(&coords, c.clone());
            for &b in idx {
                t = &t ^ &self.forms[b];
            }
            acc = &acc + &t;
        }
        acc
    }
}

pub(crate) fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Structure functions `c^a_{bc}` (for `b < c`) of `d theta^a` in the
/// coframe's own wedge basis, keyed by `(a, b, c)`.
pub type StructureFunctions = BTreeMap<(usize, usize, usize), Frac>;

pub fn structure_functions(forms: &[Form], cfg: &ProbeConfig) -> Result<StructureFunctions> {
    let frame = Coframe::new(forms.to_vec(), cfg)?;
    structure_functions_of(&frame)
}

pub fn structure_functions_of(frame: &Coframe) -> Result<StructureFunctions> {
    let mut out = BTreeMap::new();
    for (a, th) in frame.forms().iter().enumerate() {
        for (idx, c) in frame.decompose(&th.d())? {
            out.insert((a, idx[0], idx[1]), c);
        }
    }
    Ok(out)
}

/// Verdict that a coframe is a pointwise basis (its determinant is nonzero).
pub fn basis_verdict(forms: &[Form], cfg: &ProbeConfig) -> ZeroVerdict {
    let a: Vec<Vec<Frac>> = forms.iter().map(Form::components).collect();
    is_zero_frac(&determinant(&a), cfg)
}
