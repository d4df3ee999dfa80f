//! Pullbacks to the solution space along `c -> (x0, f, f_x, f_xx)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::invariants::Ode3;
use crate::symkernel::{is_zero_frac, Frac, ProbeConfig, Q, Var, ZeroVerdict};

use super::forms::{Coords, Form, SymTensor2};
use super::frame::determinant;
use super::pictures::{conformal_metric, weyl_potential};

/// `(c1, c2, c3)`.
pub fn solution_coords() -> Coords {
    Arc::from(&[Var::C1, Var::C2, Var::C3][..])
}

/// A general solution `y = f(x; c1, c2, c3)` checked against the equation.
#[derive(Clone, Debug)]
pub struct GeneralSolution {
    f: Frac,
}

impl GeneralSolution {
    pub fn new(ode: &Ode3, f: Frac, cfg: &ProbeConfig) -> Result<GeneralSolution> {
        let residual = solution_residual(ode, &f)?;
        match is_zero_frac(&residual, cfg) {
            ZeroVerdict::ProvedNonzero(w) => Err(Error::NotASolution(format!(
                "f_xxx - F(x, f, f_x, f_xx) = {} at {}",
                w.value, w.point
            ))),
            _ => Ok(GeneralSolution { f }),
        }
    }

    pub fn f(&self) -> &Frac {
        &self.f
    }

    /// `(y, p, q)` of the section at `x = x0`, as functions of `c`.
    pub fn section(&self, x0: &Q) -> Result<BTreeMap<Var, Frac>> {
        let at: BTreeMap<Var, Frac> = [(Var::X, Frac::constant(x0.clone()))].into();
        let fx = self.f.diff(Var::X);
        let fxx = fx.diff(Var::X);
        let mut map = BTreeMap::new();
        map.insert(Var::X, Frac::constant(x0.clone()));
        map.insert(Var::Y, self.f.subst_vars(&at)?);
        map.insert(Var::P, fx.subst_vars(&at)?);
        map.insert(Var::Q, fxx.subst_vars(&at)?);
        Ok(map)
    }

    /// Section map checked to be an immersion.
    pub fn immersed_section(&self, x0: &Q, cfg: &ProbeConfig) -> Result<BTreeMap<Var, Frac>> {
        let map = self.section(x0)?;
        let cs = solution_coords();
        let jac: Vec<Vec<Frac>> = [Var::Y, Var::P, Var::Q]
            .iter()
            .map(|v| cs.iter().map(|c| map[v].diff(*c)).collect())
            .collect();
        let det = determinant(&jac);
        match is_zero_frac(&det, cfg) {
            ZeroVerdict::ProvedNonzero(_) => Ok(map),
            v => Err(Error::DegenerateSection(format!(
                "Jacobian determinant {det} is {}",
                v.label()
            ))),
        }
    }
}

/// `f_xxx - F(x, f, f_x, f_xx)`.
pub fn solution_residual(ode: &Ode3, f: &Frac) -> Result<Frac> {
    let fx = f.diff(Var::X);
    let fxx = fx.diff(Var::X);
    let fxxx = fxx.diff(Var::X);
    let map: BTreeMap<Var, Frac> = [(Var::Y, f.clone()), (Var::P, fx), (Var::Q, fxx)].into();
    Ok(&fxxx - &ode.rhs().subst_vars(&map)?)
}

/// Pullback of the conformal metric to `(c1, c2, c3)` at `x = x0`.
pub fn solution_space_metric(
    ode: &Ode3,
    solution: &Frac,
    x0: &Q,
    cfg: &ProbeConfig,
) -> Result<SymTensor2> {
    let sol = GeneralSolution::new(ode, solution.clone(), cfg)?;
    let map = sol.immersed_section(x0, cfg)?;
    conformal_metric(ode).pullback(&solution_coords(), &map)
}

/// Pullback of the Weyl potential to `(c1, c2, c3)` at `x = x0`.
pub fn solution_space_potential(
    ode: &Ode3,
    solution: &Frac,
    x0: &Q,
    cfg: &ProbeConfig,
) -> Result<Form> {
    let sol = GeneralSolution::new(ode, solution.clone(), cfg)?;
    let map = sol.immersed_section(x0, cfg)?;
    weyl_potential(ode).pullback(&solution_coords(), &map)
}
