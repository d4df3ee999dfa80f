//! Prolongation of fibre-preserving, point and contact maps to second-order
//! jets, transformation of equations and direct equivalence checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::Ode3;
use crate::symkernel::{is_zero_frac, parse_with, Frac, ProbeConfig, Var, ZeroVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Fibre,
    Point,
    Contact,
}

impl MapKind {
    /// Variables the components may depend on.
    fn allowed(self) -> &'static [Var] {
        match self {
            MapKind::Fibre | MapKind::Point => &[Var::X, Var::Y],
            MapKind::Contact => &[Var::X, Var::Y, Var::P],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MapKind::Fibre => "fibre",
            MapKind::Point => "point",
            MapKind::Contact => "contact",
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MapKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fibre" | "fiber" => Ok(MapKind::Fibre),
            "point" => Ok(MapKind::Point),
            "contact" => Ok(MapKind::Contact),
            other => Err(Error::InvalidMap(format!("unknown map kind `{other}`"))),
        }
    }
}

/// `(x, y[, p]) -> (chi, phi[, psi])`. For fibre-preserving maps `chi`
/// depends on `x` only. The optional inverse is written in the barred
/// coordinates, which reuse the names `x, y, p`.
#[derive(Clone, Debug, Serialize)]
pub struct VariableMap {
    kind: MapKind,
    chi: Frac,
    phi: Frac,
    psi: Option<Frac>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inverse: Option<Box<VariableMap>>,
}

/// Total derivative on functions of `(x, y, p)`; no third derivative enters.
fn d_low(e: &Frac) -> Frac {
    let mut acc = e.diff(Var::X);
    for (v, w) in [(Var::Y, Var::P), (Var::P, Var::Q)] {
        let t = e.diff(v);
        if !t.is_zero() {
            acc = &acc + &(&Frac::var(w) * &t);
        }
    }
    acc
}

fn require_nonzero(what: &str, e: &Frac, cfg: &ProbeConfig) -> Result<()> {
    match is_zero_frac(e, cfg) {
        ZeroVerdict::ProvedNonzero(_) => Ok(()),
        v => Err(Error::DegenerateMap(format!("{what} = {e} is {}", v.label()))),
    }
}

impl VariableMap {
    /// Checks dependencies, the contact conditions and nondegeneracy.
    pub fn new(
        kind: MapKind,
        chi: Frac,
        phi: Frac,
        psi: Option<Frac>,
        cfg: &ProbeConfig,
    ) -> Result<VariableMap> {
        let allowed = kind.allowed();
        let chi_allowed: &[Var] = if kind == MapKind::Fibre { &[Var::X] } else { allowed };
        let check = |name: &str, e: &Frac, ok: &[Var]| -> Result<()> {
            if let Some(v) = e.vars().into_iter().find(|v| !ok.contains(v)) {
                return Err(Error::InvalidMap(format!(
                    "{name} of a {kind} map may not depend on {v}"
                )));
            }
            Ok(())
        };
        check("chi", &chi, chi_allowed)?;
        check("phi", &phi, allowed)?;
        let psi = match (kind, psi) {
            (MapKind::Contact, Some(psi)) => {
                check("psi", &psi, allowed)?;
                Some(psi)
            }
            (MapKind::Contact, None) => {
                return Err(Error::InvalidMap("a contact map needs psi".into()))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidMap(format!(
                    "psi is only given for contact maps, not {kind} maps"
                )))
            }
            (_, None) => None,
        };
        let map = VariableMap {
            kind,
            chi,
            phi,
            psi,
            inverse: None,
        };
        map.validate(cfg)?;
        Ok(map)
    }

    pub fn fibre(chi: Frac, phi: Frac, cfg: &ProbeConfig) -> Result<VariableMap> {
        VariableMap::new(MapKind::Fibre, chi, phi, None, cfg)
    }

    pub fn point(chi: Frac, phi: Frac, cfg: &ProbeConfig) -> Result<VariableMap> {
        VariableMap::new(MapKind::Point, chi, phi, None, cfg)
    }

    pub fn contact(chi: Frac, phi: Frac, psi: Frac, cfg: &ProbeConfig) -> Result<VariableMap> {
        VariableMap::new(MapKind::Contact, chi, phi, Some(psi), cfg)
    }

    /// Parse the components; `params` are the allowed free symbols.
    pub fn parse(
        kind: MapKind,
        chi: &str,
        phi: &str,
        psi: Option<&str>,
        params: &BTreeSet<String>,
        cfg: &ProbeConfig,
    ) -> Result<VariableMap> {
        let p = |s: &str| -> Result<Frac> { Ok(parse_with(s, params)?.to_frac()?) };
        let psi = psi.map(p).transpose()?;
        VariableMap::new(kind, p(chi)?, p(phi)?, psi, cfg)
    }

    pub fn identity() -> VariableMap {
        VariableMap {
            kind: MapKind::Fibre,
            chi: Frac::var(Var::X),
            phi: Frac::var(Var::Y),
            psi: None,
            inverse: Some(Box::new(VariableMap {
                kind: MapKind::Fibre,
                chi: Frac::var(Var::X),
                phi: Frac::var(Var::Y),
                psi: None,
                inverse: None,
            })),
        }
    }

    /// `(x, y) -> (y, x)`, its own inverse.
    pub fn swap() -> VariableMap {
        let bare = VariableMap {
            kind: MapKind::Point,
            chi: Frac::var(Var::Y),
            phi: Frac::var(Var::X),
            psi: None,
            inverse: None,
        };
        VariableMap {
            inverse: Some(Box::new(bare.clone())),
            ..bare
        }
    }

    fn validate(&self, cfg: &ProbeConfig) -> Result<()> {
        let dchi = d_low(&self.chi);
        require_nonzero("D chi", &dchi, cfg)?;
        match &self.psi {
            Some(psi) => {
                let c1 = &(psi * &self.chi.diff(Var::P)) - &self.phi.diff(Var::P);
                let c2 = &(psi * &d_low_xy(&self.chi)) - &d_low_xy(&self.phi);
                for (name, c) in [("psi chi_p - phi_p", c1), ("psi D chi - D phi", c2)] {
                    if let ZeroVerdict::ProvedNonzero(w) = is_zero_frac(&c, cfg) {
                        return Err(Error::InvalidMap(format!(
                            "contact condition {name} = {} at {}",
                            w.value, w.point
                        )));
                    }
                }
                let jac = jacobian(&[&self.chi, &self.phi, psi], &[Var::X, Var::Y, Var::P]);
                require_nonzero("Jacobian determinant", &jac, cfg)
            }
            None => {
                let jac = jacobian(&[&self.chi, &self.phi], &[Var::X, Var::Y]);
                require_nonzero("Jacobian determinant", &jac, cfg)
            }
        }
    }

    /// Attach a closed-form inverse `(x, y[, p])` in barred coordinates.
    /// It is checked against the forward map when transforming.
    pub fn with_inverse(
        mut self,
        chi: Frac,
        phi: Frac,
        psi: Option<Frac>,
        cfg: &ProbeConfig,
    ) -> Result<VariableMap> {
        let psi = match (self.kind, psi) {
            (MapKind::Contact, None) => {
                return Err(Error::InvalidMap(
                    "the inverse of a contact map needs its p component".into(),
                ))
            }
            (MapKind::Contact, p) => p,
            // the p component of a point inverse follows by prolongation
            (_, _) => None,
        };
        let inv = VariableMap::new(self.kind, chi, phi, psi, cfg)?;
        self.inverse = Some(Box::new(inv));
        Ok(self)
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn chi(&self) -> &Frac {
        &self.chi
    }

    pub fn phi(&self) -> &Frac {
        &self.phi
    }

    pub fn psi(&self) -> Option<&Frac> {
        self.psi.as_ref()
    }

    pub fn inverse(&self) -> Option<&VariableMap> {
        self.inverse.as_deref()
    }

    /// The inverse as a map in its own right, with this map as its inverse.
    pub fn inverted(&self) -> Option<VariableMap> {
        let inv = self.inverse()?;
        let mut bare = self.clone();
        bare.inverse = None;
        let mut out = inv.clone();
        out.inverse = Some(Box::new(bare));
        Some(out)
    }

    /// Image of `p`: `psi` for contact maps, `D phi / D chi` otherwise.
    pub fn p_image(&self) -> Result<Frac> {
        match &self.psi {
            Some(psi) => Ok(psi.clone()),
            None => Ok(d_low(&self.phi).try_div(&d_low(&self.chi))?),
        }
    }

    /// Images of `(x, y, p, q)`; none of them involve the equation.
    pub fn jet_images(&self) -> Result<[Frac; 4]> {
        let dchi = d_low(&self.chi);
        let p = self.p_image()?;
        let q = d_low(&p).try_div(&dchi)?;
        Ok([self.chi.clone(), self.phi.clone(), p, q])
    }

    /// `other` after `self`: `(other o self)(x) = other(self(x))`.
    pub fn then(&self, other: &VariableMap, cfg: &ProbeConfig) -> Result<VariableMap> {
        let kind = self.kind.max(other.kind);
        let mut sub = BTreeMap::new();
        sub.insert(Var::X, self.chi.clone());
        sub.insert(Var::Y, self.phi.clone());
        sub.insert(Var::P, self.p_image()?);
        let chi = other.chi.subst_vars(&sub)?;
        let phi = other.phi.subst_vars(&sub)?;
        let psi = match kind {
            MapKind::Contact => Some(other.p_image()?.subst_vars(&sub)?),
            _ => None,
        };
        let mut out = VariableMap::new(kind, chi, phi, psi, cfg)?;
        if let (Some(a), Some(b)) = (self.inverse(), other.inverse()) {
            // (other o self)^-1 = self^-1 o other^-1
            let inv = b.then(a, cfg)?;
            out.inverse = Some(Box::new(inv));
        }
        Ok(out)
    }
}

/// `chi_x + p chi_y`.
fn d_low_xy(e: &Frac) -> Frac {
    &e.diff(Var::X) + &(&Frac::var(Var::P) * &e.diff(Var::Y))
}

fn jacobian(fs: &[&Frac], vars: &[Var]) -> Frac {
    let m: Vec<Vec<Frac>> = fs
        .iter()
        .map(|f| vars.iter().map(|v| f.diff(*v)).collect())
        .collect();
    crate::extcalc::determinant(&m)
}

/// Images of `x, y, p, q` and of the third derivative along the equation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProlongedMap {
    pub x: Frac,
    pub y: Frac,
    pub p: Frac,
    pub q: Frac,
    pub r: Frac,
}

impl ProlongedMap {
    pub fn components(&self) -> [&Frac; 5] {
        [&self.x, &self.y, &self.p, &self.q, &self.r]
    }

    /// Substitution sending barred jet coordinates to their images.
    pub fn bindings(&self) -> BTreeMap<Var, Frac> {
        [
            (Var::X, self.x.clone()),
            (Var::Y, self.y.clone()),
            (Var::P, self.p.clone()),
            (Var::Q, self.q.clone()),
        ]
        .into()
    }
}

pub fn prolong(map: &VariableMap, ode: &Ode3) -> Result<ProlongedMap> {
    let dchi = ode.total_derivative(map.chi());
    if dchi.is_zero() {
        return Err(Error::DegenerateMap("D chi vanishes identically".into()));
    }
    let p = map.p_image()?;
    let q = ode.total_derivative(&p).try_div(&dchi)?;
    let r = ode.total_derivative(&q).try_div(&dchi)?;
    Ok(ProlongedMap {
        x: map.chi().clone(),
        y: map.phi().clone(),
        p,
        q,
        r,
    })
}

/// The equation satisfied by the image of solutions, written in the barred
/// coordinates. Needs the inverse, which is checked first.
pub fn transform_ode(map: &VariableMap, ode: &Ode3, cfg: &ProbeConfig) -> Result<Ode3> {
    let inv = map.inverse().ok_or(Error::MissingInverse)?;
    check_inverse(map, inv, cfg)?;
    let forward = prolong(map, ode)?;
    let back = inv.jet_images()?;
    let sub: BTreeMap<Var, Frac> = Var::JET.iter().copied().zip(back).collect();
    let f = forward.r.subst_vars(&sub)?;
    let mut params = ode.params().clone();
    for m in [map, inv] {
        for e in [m.chi(), m.phi()].into_iter().chain(m.psi()) {
            params.extend(e.params());
        }
    }
    Ode3::new(f, params)
}

fn check_inverse(map: &VariableMap, inv: &VariableMap, cfg: &ProbeConfig) -> Result<()> {
    let mut sub = BTreeMap::new();
    sub.insert(Var::X, map.chi().clone());
    sub.insert(Var::Y, map.phi().clone());
    sub.insert(Var::P, map.p_image()?);
    let mut parts = vec![("x", inv.chi(), Var::X), ("y", inv.phi(), Var::Y)];
    if let Some(psi) = inv.psi() {
        parts.push(("p", psi, Var::P));
    }
    for (name, e, v) in parts {
        let diff = &e.subst_vars(&sub)? - &Frac::var(v);
        if let ZeroVerdict::ProvedNonzero(w) = is_zero_frac(&diff, cfg) {
            return Err(Error::InverseMismatch {
                component: name.to_string(),
                detail: format!(
                    "inverse(forward({name})) - {name} = {} at {}",
                    w.value, w.point
                ),
            });
        }
    }
    Ok(())
}

/// Verdict on `F_target(x', y', p', q') - r'` along the source equation.
pub fn verify_equivalence(
    map: &VariableMap,
    source: &Ode3,
    target: &Ode3,
    cfg: &ProbeConfig,
) -> Result<ZeroVerdict> {
    Ok(is_zero_frac(&equivalence_residual(map, source, target)?, cfg))
}

pub fn equivalence_residual(map: &VariableMap, source: &Ode3, target: &Ode3) -> Result<Frac> {
    let pm = prolong(map, source)?;
    Ok(&target.rhs().subst_vars(&pm.bindings())? - &pm.r)
}
