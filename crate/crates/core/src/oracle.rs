//! Independent checks of the invariant layer: Lie transport of the conformal
//! metric along the total derivative, the descent obstruction for
//! Einstein-Weyl structures, a finite-difference Einstein-Weyl test on the
//! solution space, and finite-difference checks of symbolic partials.

use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extcalc::forms::worst;
use crate::extcalc::{
    coframe, conformal_metric, solution_space_metric, solution_space_potential,
    total_derivative_field, weyl_potential, Coframe, Form, Picture, SymTensor2,
};
use crate::invariants::{scalar_invariant, InvariantName, Ode3};
use crate::symkernel::{
    is_zero_frac, sample_points, Expr, Frac, Point, ProbeConfig, Var, ZeroVerdict, Q,
};

/// Names of the contact coframe `(w1, w2, w3~, dx)` used for components.
pub const FRAME_LABELS: [&str; 4] = ["w1", "w2", "w3~", "dx"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub basis: String,
    pub value: Frac,
    pub verdict: ZeroVerdict,
}

/// One named residual split into frame components.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub components: Vec<Component>,
    pub verdict: ZeroVerdict,
}

impl Residual {
    fn new(name: &str, parts: Vec<(String, Frac)>, cfg: &ProbeConfig) -> Residual {
        let components: Vec<Component> = parts
            .into_iter()
            .map(|(basis, f)| Component {
                verdict: is_zero_frac(&f, cfg),
                value: f,
                basis,
            })
            .collect();
        let verdict = worst(components.iter().map(|c| c.verdict.clone()));
        Residual {
            name: name.to_string(),
            components,
            verdict,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub name: String,
    pub basis: Vec<String>,
    pub residuals: Vec<Residual>,
    /// Verdict of the check named by the report.
    pub verdict: ZeroVerdict,
    pub notes: Vec<String>,
}

impl ObstructionReport {
    pub fn residual(&self, name: &str) -> Option<&Residual> {
        self.residuals.iter().find(|r| r.name == name)
    }
}

fn contact_frame(ode: &Ode3, cfg: &ProbeConfig) -> Result<Coframe> {
    Coframe::new(coframe(ode, Picture::Contact).to_vec(), cfg)
}

/// `T(e_a, e_b)` for `a <= b` over the dual of `frame`.
fn tensor_in_frame(t: &SymTensor2, frame: &Coframe) -> Vec<(String, Frac)> {
    let e = frame.dual();
    let n = e.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a..n {
            let mut acc = Frac::zero();
            for (i, ea) in e[a].components().iter().enumerate() {
                if ea.is_zero() {
                    continue;
                }
                for (j, eb) in e[b].components().iter().enumerate() {
                    let tij = t.get(i, j);
                    if eb.is_zero() || tij.is_zero() {
                        continue;
                    }
                    acc = &acc + &(&(ea * eb) * tij);
                }
            }
            out.push((format!("{}.{}", FRAME_LABELS[a], FRAME_LABELS[b]), acc));
        }
    }
    out
}

/// Lie transport of `g = 2 w1 w3~ - (w2)^2` along the total derivative.
///
/// The residual `literal` is `L_D g - W w1 w1` and sets the report verdict.
/// The residual `corrected` is `L_D g - 2W w1 w1 - (2/3) F_q g`, which is the
/// identity the structure equations actually give at the identity section.
pub fn wunschmann_oracle(ode: &Ode3, cfg: &ProbeConfig) -> Result<ObstructionReport> {
    let frame = contact_frame(ode, cfg)?;
    let g = conformal_metric(ode);
    let lg = g.try_lie_derivative(&total_derivative_field(ode))?;
    let w = scalar_invariant(ode, InvariantName::W)?;
    let w1 = &coframe(ode, Picture::Contact)[0];
    let w11 = SymTensor2::sym_product(w1, w1)?;
    let fq = ode.rhs().diff(Var::Q);

    let literal = lg.try_add(&w11.scale(&-w.clone()))?;
    let corrected = lg
        .try_add(&w11.scale(&(&Frac::int(-2) * &w)))?
        .try_add(&g.scale(&(&Frac::ratio(-2, 3) * &fq)))?;
    let literal = Residual::new("literal", tensor_in_frame(&literal, &frame), cfg);
    let corrected = Residual::new("corrected", tensor_in_frame(&corrected, &frame), cfg);

    let mut notes = Vec::new();
    if corrected.verdict.is_proved_zero() && !literal.verdict.is_proved_zero() {
        notes.push(
            "L_D g = 2W w1 w1 + (2/3) F_q g holds; L_D g = W w1 w1 does not".to_string(),
        );
    }
    if corrected.verdict.is_proved_nonzero() {
        notes.push("corrected transport identity fails: W, g or D is inconsistent".to_string());
    }
    Ok(ObstructionReport {
        name: "wunschmann".into(),
        basis: FRAME_LABELS.iter().map(|s| s.to_string()).collect(),
        verdict: literal.verdict.clone(),
        residuals: vec![literal, corrected],
        notes,
    })
}

/// `i_D d(phi)` for a given potential.
pub fn descent_obstruction(ode: &Ode3, phi: &Form) -> Result<Form> {
    phi.d().try_interior(&total_derivative_field(ode))
}

/// Einstein-Weyl descent test: `W` and the one-form `i_D d(phi)` with `phi`
/// the Weyl potential, both required to vanish. The verdict is `ProvedZero`
/// exactly when the Weyl structure descends.
pub fn ew_descent_obstruction(ode: &Ode3, cfg: &ProbeConfig) -> Result<ObstructionReport> {
    let frame = contact_frame(ode, cfg)?;
    let w = scalar_invariant(ode, InvariantName::W)?;
    let form = descent_obstruction(ode, &weyl_potential(ode))?;
    let parts = (0..4)
        .map(|a| Ok((FRAME_LABELS[a].to_string(), frame.component(&form, &[a])?)))
        .collect::<Result<Vec<_>>>()?;
    let w = Residual::new("W", vec![("1".into(), w)], cfg);
    let obstruction = Residual::new("i_D dphi", parts, cfg);
    let verdict = worst([w.verdict.clone(), obstruction.verdict.clone()]);
    let mut notes = Vec::new();
    if w.verdict.is_proved_nonzero() {
        notes.push("W is not zero, so there is no conformal structure to descend".into());
    }
    Ok(ObstructionReport {
        name: "einstein-weyl descent".into(),
        basis: FRAME_LABELS.iter().map(|s| s.to_string()).collect(),
        residuals: vec![w, obstruction],
        verdict,
        notes,
    })
}

/// Grid over `[lo, hi]^3` in `(c1, c2, c3)` and the finite-difference step
/// (scaled by `max(1, |c|)`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: 0.5,
            hi: 1.5,
            points: 9,
            step: 1e-4,
        }
    }
}

impl GridSpec {
    fn nodes(&self) -> Vec<f64> {
        let n = self.points.max(1);
        if n == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RicciSign {
    #[serde(rename = "negative")]
    Negative,
    #[serde(rename = "positive")]
    Positive,
    #[serde(rename = "zero")]
    Zero,
    #[serde(rename = "indefinite on sampled domain")]
    Indefinite,
}

impl RicciSign {
    pub fn as_str(self) -> &'static str {
        match self {
            RicciSign::Negative => "negative",
            RicciSign::Positive => "positive",
            RicciSign::Zero => "zero",
            RicciSign::Indefinite => "indefinite on sampled domain",
        }
    }

    /// Unanimous sign of the samples; values within `tol` of zero count as
    /// zero.
    pub fn of_samples(xs: impl IntoIterator<Item = f64>, tol: f64) -> Option<RicciSign> {
        let (mut neg, mut pos, mut zero) = (0, 0, 0);
        for x in xs {
            if x < -tol {
                neg += 1;
            } else if x > tol {
                pos += 1;
            } else {
                zero += 1;
            }
        }
        Some(match (neg, pos, zero) {
            (0, 0, 0) => return None,
            (_, 0, 0) => RicciSign::Negative,
            (0, _, 0) => RicciSign::Positive,
            (0, 0, _) => RicciSign::Zero,
            _ => RicciSign::Indefinite,
        })
    }
}

impl std::fmt::Display for RicciSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceReport {
    pub x0: String,
    pub evaluated: usize,
    pub skipped: usize,
    /// Largest entry of the trace-free symmetric Ricci tensor.
    pub max_trace_free: f64,
    /// `max_trace_free` divided by `1 + max |Ric_sym|` pointwise.
    pub max_residual: f64,
    pub ricci_scalar_min: f64,
    pub ricci_scalar_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericReport {
    pub grid: GridSpec,
    pub slices: Vec<SliceReport>,
    pub max_residual: f64,
    /// Largest relative deviation of a slice metric from the best multiple of
    /// the first slice's metric, over the grid.
    pub proportionality: f64,
    /// Sign of `R = -g^ij Ric_ij`, `None` when no grid point evaluated.
    pub ricci_sign: Option<RicciSign>,
}

type Mat3 = [[f64; 3]; 3];
type Gamma = [[[f64; 3]; 3]; 3];

const CS: [Var; 3] = [Var::C1, Var::C2, Var::C3];

/// Pulled-back metric and potential with the symbolic first derivatives of
/// the metric.
struct Slice {
    g: Vec<Vec<Frac>>,
    dg: Vec<Vec<Vec<Frac>>>,
    phi: Vec<Frac>,
}

impl Slice {
    fn new(g: &SymTensor2, phi: &Form) -> Slice {
        let g = g.matrix().clone();
        let dg = CS
            .iter()
            .map(|c| g.iter().map(|r| r.iter().map(|x| x.diff(*c)).collect()).collect())
            .collect();
        Slice {
            g,
            dg,
            phi: phi.components(),
        }
    }

    fn metric(&self, at: &Point<f64>) -> Option<Mat3> {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = finite(self.g[i][j].eval(at))?;
            }
        }
        Some(m)
    }

    /// Weyl connection `Gamma[k][i][j]` with `nabla g = 2 phi (x) g`.
    fn gamma(&self, at: &Point<f64>) -> Option<Gamma> {
        let g = self.metric(at)?;
        let gi = inverse3(&g)?;
        let mut dg = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    dg[k][i][j] = finite(self.dg[k][i][j].eval(at))?;
                }
            }
        }
        let mut phi = [0.0; 3];
        for i in 0..3 {
            phi[i] = finite(self.phi[i].eval(at))?;
        }
        let mut phi_up = [0.0; 3];
        for k in 0..3 {
            phi_up[k] = (0..3).map(|l| gi[k][l] * phi[l]).sum();
        }
        let mut out = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let lc: f64 = (0..3)
                        .map(|l| 0.5 * gi[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]))
                        .sum();
                    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    out[k][i][j] = lc
                        - (delta(k, i) * phi[j] + delta(k, j) * phi[i] - g[i][j] * phi_up[k]);
                }
            }
        }
        Some(out)
    }
}

fn finite(r: std::result::Result<f64, crate::symkernel::KernelError>) -> Option<f64> {
    r.ok().filter(|v| v.is_finite())
}

fn inverse3(m: &Mat3) -> Option<Mat3> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    Some(inv)
}

/// Fourth-order central difference of `f` at `x` with step `h`.
pub fn central_difference<T: Float>(f: impl Fn(T) -> Option<T>, x: T, h: T) -> Option<T> {
    let two = T::one() + T::one();
    let eight = two * two * two;
    let twelve = eight + two + two;
    let (m2, m1, p1, p2) = (f(x - two * h)?, f(x - h)?, f(x + h)?, f(x + two * h)?);
    Some((m2 - eight * m1 + eight * p1 - p2) / (twelve * h))
}

/// Symmetrised Ricci tensor of the Weyl connection, `Ric_bd = R^a_bad`.
fn symmetric_ricci(slice: &Slice, at: &Point<f64>, step: f64) -> Option<Mat3> {
    let gam = slice.gamma(at)?;
    // dgam[m][k][i][j] = d_m Gamma^k_ij
    let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
    for (m, c) in CS.iter().enumerate() {
        let c0 = at.var(*c).ok()?;
        let h = step * c0.abs().max(1.0);
        let mut stencil = Vec::with_capacity(4);
        for s in [-2.0, -1.0, 1.0, 2.0] {
            let pt = at.clone().with(*c, c0 + s * h);
            stencil.push(slice.gamma(&pt)?);
        }
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let vals = [stencil[0][k][i][j], stencil[1][k][i][j], stencil[2][k][i][j], stencil[3][k][i][j]];
                    dgam[m][k][i][j] =
                        (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h);
                }
            }
        }
    }
    let mut ric = [[0.0; 3]; 3];
    for b in 0..3 {
        for d in 0..3 {
            let mut acc = 0.0;
            for a in 0..3 {
                acc += dgam[a][a][d][b] - dgam[d][a][a][b];
                for e in 0..3 {
                    acc += gam[a][a][e] * gam[e][d][b] - gam[a][d][e] * gam[e][a][b];
                }
            }
            ric[b][d] = acc;
        }
    }
    let mut sym = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            sym[i][j] = 0.5 * (ric[i][j] + ric[j][i]);
        }
    }
    Some(sym)
}

fn frobenius(a: &Mat3, b: &Mat3) -> f64 {
    (0..3).flat_map(|i| (0..3).map(move |j| a[i][j] * b[i][j])).sum()
}

/// Einstein-Weyl test on the solution space by finite differences.
///
/// For each `x0` the metric and potential are pulled back along the section
/// of the supplied general solution, and the trace-free part of the
/// symmetrised Ricci tensor of the Weyl connection is measured on the grid.
/// Metrics of different slices are compared for pointwise proportionality.
/// Parameters of the equation take their values from `cfg.pinned`.
pub fn ew_numeric_check(
    ode: &Ode3,
    solution: &Frac,
    x0_list: &[Q],
    grid: &GridSpec,
    cfg: &ProbeConfig,
) -> Result<NumericReport> {
    let mut slices = Vec::new();
    for x0 in x0_list {
        let g = solution_space_metric(ode, solution, x0, cfg)?;
        let phi = solution_space_potential(ode, solution, x0, cfg)?;
        slices.push((x0, Slice::new(&g, &phi)));
    }
    let mut needed = std::collections::BTreeSet::new();
    for (_, s) in &slices {
        for x in s.g.iter().flatten().chain(&s.phi) {
            needed.extend(x.params());
        }
    }
    let mut base = Point::new();
    for p in &needed {
        let v = cfg.pinned.get(p).ok_or_else(|| Error::MissingParameter(p.clone()))?;
        base = base.with_param(p, *v);
    }
    let nodes = grid.nodes();
    let mut points = Vec::new();
    for &a in &nodes {
        for &b in &nodes {
            for &c in &nodes {
                points.push(base.clone().with(Var::C1, a).with(Var::C2, b).with(Var::C3, c));
            }
        }
    }

    let mut reports = Vec::new();
    let mut scalars = Vec::new();
    for (x0, slice) in &slices {
        let mut rep = SliceReport {
            x0: x0.to_string(),
            evaluated: 0,
            skipped: 0,
            max_trace_free: 0.0,
            max_residual: 0.0,
            ricci_scalar_min: f64::INFINITY,
            ricci_scalar_max: f64::NEG_INFINITY,
        };
        for pt in &points {
            let (Some(g), Some(ric)) = (slice.metric(pt), symmetric_ricci(slice, pt, grid.step))
            else {
                rep.skipped += 1;
                continue;
            };
            let Some(gi) = inverse3(&g) else {
                rep.skipped += 1;
                continue;
            };
            let trace = frobenius(&gi, &ric);
            let mut tf: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    tf = tf.max((ric[i][j] - trace / 3.0 * g[i][j]).abs());
                    scale = scale.max(ric[i][j].abs());
                }
            }
            let r = -trace;
            rep.evaluated += 1;
            rep.max_trace_free = rep.max_trace_free.max(tf);
            rep.max_residual = rep.max_residual.max(tf / (1.0 + scale));
            rep.ricci_scalar_min = rep.ricci_scalar_min.min(r);
            rep.ricci_scalar_max = rep.ricci_scalar_max.max(r);
            scalars.push(r);
        }
        reports.push(rep);
    }

    let mut proportionality: f64 = 0.0;
    if let Some(((_, first), rest)) = slices.split_first() {
        for pt in &points {
            let Some(g0) = first.metric(pt) else { continue };
            let n0 = frobenius(&g0, &g0);
            if n0 == 0.0 {
                continue;
            }
            for (_, s) in rest {
                let Some(g) = s.metric(pt) else { continue };
                let lambda = frobenius(&g, &g0) / n0;
                let mut dev = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        dev[i][j] = g[i][j] - lambda * g0[i][j];
                    }
                }
                let ng = frobenius(&g, &g).sqrt();
                if ng > 0.0 {
                    proportionality = proportionality.max(frobenius(&dev, &dev).sqrt() / ng);
                }
            }
        }
    }

    let max_residual = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    Ok(NumericReport {
        grid: grid.clone(),
        slices: reports,
        max_residual,
        proportionality,
        ricci_sign: RicciSign::of_samples(scalars, 1e-8),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdPartial {
    pub var: String,
    pub max_error: f64,
}

/// Symbolic against finite-difference partials in `x, y, p, q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdReport {
    pub points: usize,
    pub step: f64,
    pub partials: Vec<FdPartial>,
    /// Largest `|symbolic - fd| / (1 + |symbolic|)`.
    pub max_error: f64,
    pub tolerance: f64,
    pub agrees: bool,
}

/// Compare the four jet partials of `e` with fourth-order central
/// differences at the probe points of `cfg`.
pub fn fd_validate(e: &Expr, cfg: &ProbeConfig) -> Result<FdReport> {
    const STEP: f64 = 1e-4;
    const TOL: f64 = 1e-6;
    let f = e.to_frac()?;
    let pts = sample_points(&f, cfg);
    let mut partials = Vec::new();
    for v in Var::JET {
        let df = f.diff(v);
        let mut max_error: f64 = 0.0;
        if f.depends_on(v) {
            for pt in &pts {
                let x = pt.var(v)?;
                let h = STEP * x.abs().max(1.0);
                let fd = central_difference(|t| finite(f.eval(&pt.clone().with(v, t))), x, h);
                let (Some(fd), Some(sym)) = (fd, finite(df.eval(pt))) else {
                    continue;
                };
                max_error = max_error.max((sym - fd).abs() / (1.0 + sym.abs()));
            }
        }
        partials.push(FdPartial {
            var: v.name().to_string(),
            max_error,
        });
    }
    let max_error = partials.iter().map(|p| p.max_error).fold(0.0, f64::max);
    Ok(FdReport {
        points: pts.len(),
        step: STEP,
        partials,
        max_error,
        tolerance: TOL,
        agrees: max_error < TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_difference_on_a_cubic() {
        let d = central_difference(|t: f64| Some(t * t * t), 2.0, 1e-3).unwrap();
        assert!((d - 12.0).abs() < 1e-9);
        let d = central_difference(|t: f32| Some(t * t), 1.0, 1e-2).unwrap();
        assert!((d - 2.0).abs() < 1e-3);
    }

    #[test]
    fn inverse_of_the_flat_metric() {
        let g = [[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]];
        assert_eq!(inverse3(&g).unwrap(), g);
    }

    #[test]
    fn sign_votes() {
        assert_eq!(RicciSign::of_samples([-1.0, -2.0], 1e-8), Some(RicciSign::Negative));
        assert_eq!(RicciSign::of_samples([1.0, -2.0], 1e-8), Some(RicciSign::Indefinite));
        assert_eq!(RicciSign::of_samples([0.0], 1e-8), Some(RicciSign::Zero));
        assert_eq!(RicciSign::of_samples([], 1e-8), None);
    }
}
