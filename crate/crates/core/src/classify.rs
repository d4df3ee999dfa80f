//! Classification of an equation into the equivalence branches, with one
//! record per condition.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::invariants::{invariant_with, lorentz_x, InvariantName, Jet, Ode3};
use crate::oracle::{ew_descent_obstruction, RicciSign};
use crate::prolong::MapKind;
use crate::symkernel::{constancy, is_zero_frac, sample_points, Constancy, Frac, ProbeConfig, Var, ZeroVerdict};

const Q: Var = Var::Q;

/// Tri-state outcome of a condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    True,
    False,
    Unknown,
    /// The condition presupposes something that fails, e.g. `W != 0`.
    NotApplicable,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::True => "true",
            Outcome::False => "false",
            Outcome::Unknown => "unknown",
            Outcome::NotApplicable => "not applicable",
        }
    }
}

/// `true` and `false` serialize as booleans, the rest as strings.
impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Outcome::True => s.serialize_bool(true),
            Outcome::False => s.serialize_bool(false),
            o => s.serialize_str(o.as_str()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Requirement {
    Zero,
    Nonzero,
    Constant,
    /// Evaluated for the record only.
    Informational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Satisfied,
    Violated,
    Undecided,
    Recorded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expression: Frac,
    pub requirement: Requirement,
    /// For `Constant`, the verdict on the first non-vanishing partial.
    pub verdict: ZeroVerdict,
    pub status: Status,
}

impl Check {
    fn zero(name: &str, e: Frac, cfg: &ProbeConfig) -> Check {
        Check::with(name, e, Requirement::Zero, cfg)
    }

    fn nonzero(name: &str, e: Frac, cfg: &ProbeConfig) -> Check {
        Check::with(name, e, Requirement::Nonzero, cfg)
    }

    fn recorded(name: &str, e: Frac, cfg: &ProbeConfig) -> Check {
        Check::with(name, e, Requirement::Informational, cfg)
    }

    fn with(name: &str, e: Frac, requirement: Requirement, cfg: &ProbeConfig) -> Check {
        let verdict = is_zero_frac(&e, cfg);
        let status = match (requirement, &verdict) {
            (Requirement::Informational, _) => Status::Recorded,
            (Requirement::Zero, ZeroVerdict::ProvedZero) => Status::Satisfied,
            (Requirement::Zero, ZeroVerdict::ProvedNonzero(_)) => Status::Violated,
            (Requirement::Nonzero, ZeroVerdict::ProvedNonzero(_)) => Status::Satisfied,
            (Requirement::Nonzero, ZeroVerdict::ProvedZero) => Status::Violated,
            _ => Status::Undecided,
        };
        Check {
            name: name.to_string(),
            expression: e,
            requirement,
            verdict,
            status,
        }
    }

    fn constant(name: &str, e: Frac, cfg: &ProbeConfig) -> Check {
        let (verdict, status) = match constancy(&e, cfg) {
            Constancy::Constant(_) => (ZeroVerdict::ProvedZero, Status::Satisfied),
            Constancy::NotConstant { verdict, .. } => (verdict, Status::Violated),
            Constancy::Unknown { verdict, .. } => (verdict, Status::Undecided),
        };
        Check {
            name: name.to_string(),
            expression: e,
            requirement: Requirement::Constant,
            verdict,
            status,
        }
    }
}

/// Stable identifiers of the conditions, in report order.
pub const CONDITIONS: [&str; 8] = [
    "contact_trivial",
    "contact_projective",
    "point_projective",
    "point_trivial",
    "linearizable",
    "einstein_weyl",
    "fibre_metric",
    "lorentz_reduction",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub id: String,
    /// The widest class of maps under which the outcome is invariant.
    pub invariance: MapKind,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

impl Condition {
    fn new(id: &str, invariance: MapKind, checks: Vec<Check>) -> Condition {
        let outcome = conjunction(&checks);
        Condition {
            id: id.to_string(),
            invariance,
            checks,
            outcome,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn conjunction(checks: &[Check]) -> Outcome {
    let mut undecided = false;
    for c in checks {
        match c.status {
            Status::Violated => return Outcome::False,
            Status::Undecided => undecided = true,
            Status::Satisfied | Status::Recorded => {}
        }
    }
    if undecided {
        Outcome::Unknown
    } else {
        Outcome::True
    }
}

/// `F = a3 q^3 + a2 q^2 + a1 q + a0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicCoefficients {
    pub a3: Frac,
    pub a2: Frac,
    pub a1: Frac,
    pub a0: Frac,
}

impl CubicCoefficients {
    pub fn to_array(&self) -> [Frac; 4] {
        [self.a3.clone(), self.a2.clone(), self.a1.clone(), self.a0.clone()]
    }

    /// `a3 q^3 + a2 q^2 + a1 q + a0`.
    pub fn reconstruct(&self) -> Frac {
        let q = Frac::var(Q);
        let mut acc = self.a3.clone();
        for a in [&self.a2, &self.a1, &self.a0] {
            acc = &(&acc * &q) + a;
        }
        acc
    }
}

/// Coefficients of F as a cubic in q, read off by Taylor expansion at
/// `q = 0`. Fails with `NotCubic` unless `F_qqqq` is proved zero.
pub fn cubic_coefficients(ode: &Ode3, cfg: &ProbeConfig) -> Result<CubicCoefficients> {
    let f = ode.rhs();
    let v = is_zero_frac(&f.diff(Q).diff(Q).diff(Q).diff(Q), cfg);
    if !v.is_proved_zero() {
        return Err(Error::NotCubic(v.to_string()));
    }
    let at0: BTreeMap<Var, Frac> = [(Q, Frac::zero())].into();
    let mut d = f.clone();
    let mut coeffs = Vec::new();
    let mut fact = 1;
    for k in 0..4 {
        if k > 0 {
            d = d.diff(Q);
            fact *= k;
        }
        coeffs.push(&Frac::ratio(1, fact) * &d.subst_vars(&at0)?);
    }
    let c = CubicCoefficients {
        a0: coeffs[0].clone(),
        a1: coeffs[1].clone(),
        a2: coeffs[2].clone(),
        a3: coeffs[3].clone(),
    };
    let rest = &c.reconstruct() - f;
    let v = is_zero_frac(&rest, cfg);
    if !v.is_proved_zero() {
        return Err(Error::NotCubic(format!("reconstruction residual is {v}")));
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub equation: Frac,
    /// Outcome per condition id.
    #[serde(flatten)]
    pub outcomes: BTreeMap<String, Outcome>,
    /// Sign of the Ricci scalar (of `B4p`) over the probe points, when the
    /// Einstein-Weyl branch holds.
    pub ricci_sign: Option<RicciSign>,
    /// The constant `a5` when the equation is linearizable.
    pub mu: Option<Frac>,
    pub cubic_coefficients: Option<CubicCoefficients>,
    pub conditions: Vec<Condition>,
    pub discrepancies: Vec<String>,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    pub fn condition(&self, id: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn outcome(&self, id: &str) -> Outcome {
        self.condition(id).map_or(Outcome::Unknown, |c| c.outcome)
    }

    /// Any outcome left undecided.
    pub fn has_unknown(&self) -> bool {
        self.conditions.iter().any(|c| c.outcome == Outcome::Unknown)
    }

    /// Plain-text table of outcomes and checks.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .conditions
            .iter()
            .flat_map(|c| c.checks.iter().map(|k| k.name.len()))
            .max()
            .unwrap_or(0);
        let _ = writeln!(out, "F = {}", self.equation);
        let _ = writeln!(out, "{:<20} {:<10} {:<15}", "condition", "class", "outcome");
        for c in &self.conditions {
            let _ = writeln!(
                out,
                "{:<20} {:<10} {:<15}",
                c.id,
                c.invariance.as_str(),
                c.outcome.as_str()
            );
            for k in &c.checks {
                let _ = writeln!(
                    out,
                    "    {:<width$} {:<13} {:<13} {}",
                    k.name,
                    format!("{:?}", k.requirement).to_lowercase(),
                    k.verdict.label(),
                    k.expression
                );
            }
        }
        let sign = self.ricci_sign.map_or("undefined", RicciSign::as_str);
        let _ = writeln!(out, "ricci sign: {sign}");
        if let Some(mu) = &self.mu {
            let _ = writeln!(out, "mu: {mu}");
        }
        if let Some(c) = &self.cubic_coefficients {
            let _ = writeln!(out, "cubic: a3 = {}, a2 = {}, a1 = {}, a0 = {}", c.a3, c.a2, c.a1, c.a0);
        }
        for d in &self.discrepancies {
            let _ = writeln!(out, "discrepancy: {d}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

fn inv(j: &Jet<'_>, n: InvariantName) -> Frac {
    invariant_with(j, n).expect("invariant defined without W in the denominator")
}

/// Sign of `B4p` over the probe points.
pub fn ricci_sign(ode: &Ode3, cfg: &ProbeConfig) -> Option<RicciSign> {
    let b4 = inv(&Jet::new(ode), InvariantName::B4p);
    if b4.is_zero() {
        return Some(RicciSign::Zero);
    }
    let vals: Vec<f64> = sample_points(&b4, cfg)
        .iter()
        .filter_map(|p| b4.eval(p).ok())
        .collect();
    RicciSign::of_samples(vals, cfg.abs_threshold)
}

/// Evaluate every branch condition.
pub fn classify(ode: &Ode3, cfg: &ProbeConfig) -> Result<ClassificationReport> {
    let j = Jet::new(ode);
    let w = j.w(&[]);
    let fqq = j.f(&[Q, Q]);
    let fqqq = j.f(&[Q, Q, Q]);
    let fqqqq = j.f(&[Q, Q, Q, Q]);
    let mut conditions = Vec::new();
    let mut discrepancies = Vec::new();
    let mut notes = Vec::new();

    let w_zero = || Check::zero("W", w.clone(), cfg);
    conditions.push(Condition::new(
        "contact_trivial",
        MapKind::Contact,
        vec![w_zero(), Check::zero("F_qqqq", fqqqq.clone(), cfg)],
    ));
    let contact_projective = Condition::new(
        "contact_projective",
        MapKind::Contact,
        vec![Check::zero("F_qqqq", fqqqq.clone(), cfg)],
    );
    let cubic = if contact_projective.outcome == Outcome::True {
        Some(cubic_coefficients(ode, cfg)?)
    } else {
        None
    };
    conditions.push(contact_projective);
    conditions.push(Condition::new(
        "point_projective",
        MapKind::Point,
        vec![Check::zero("F_qqq", fqqq.clone(), cfg)],
    ));

    let b1 = &(&fqq * &fqq) + &(&Frac::int(6) * &j.f(&[Var::P, Q, Q]));
    let c1 = inv(&j, InvariantName::C1pCurv);
    let c1_printed = inv(&j, InvariantName::C1p);
    let point_trivial = Condition::new(
        "point_trivial",
        MapKind::Point,
        vec![
            w_zero(),
            Check::zero("F_qqq", fqqq.clone(), cfg),
            Check::zero("F_qq^2 + 6 F_qqp", b1, cfg),
            Check::zero("C1 (curvature)", c1, cfg),
            Check::recorded("C1 (printed)", c1_printed, cfg),
        ],
    );
    let (cc, cp) = (&point_trivial.checks[3].verdict, &point_trivial.checks[4].verdict);
    if cc.label() != cp.label() && !(cc.is_unknown() || cp.is_unknown()) {
        discrepancies.push(format!(
            "point_trivial: printed C1 is {} but the C1 read off the point curvature is {}",
            cp.label(),
            cc.label()
        ));
    }
    conditions.push(point_trivial);

    conditions.push(linearizable(&j, cfg, &mut notes));

    let ew = ew_descent_obstruction(ode, cfg)?;
    let mut ew_checks = vec![w_zero()];
    let comps = &ew.residual("i_D dphi").expect("descent residual").components;
    for c in comps {
        // the oracle's verdicts are reused rather than recomputed
        ew_checks.push(Check {
            name: format!("i_D dphi on {}", c.basis),
            expression: c.value.clone(),
            requirement: Requirement::Zero,
            verdict: c.verdict.clone(),
            status: match c.verdict {
                ZeroVerdict::ProvedZero => Status::Satisfied,
                ZeroVerdict::ProvedNonzero(_) => Status::Violated,
                ZeroVerdict::Unknown(_) => Status::Undecided,
            },
        });
    }
    let printed = Check::recorded("EWcartan (printed)", inv(&j, InvariantName::EWcartan), cfg);
    let oracle_zero = comps.iter().all(|c| c.verdict.is_proved_zero());
    let oracle_nonzero = comps.iter().any(|c| c.verdict.is_proved_nonzero());
    if (oracle_zero && printed.verdict.is_proved_nonzero())
        || (oracle_nonzero && printed.verdict.is_proved_zero())
    {
        discrepancies.push(format!(
            "einstein_weyl: printed Cartan condition EWcartan = {} is {} while the descent obstruction i_D dphi is {}",
            printed.expression,
            printed.verdict.label(),
            if oracle_zero { "ProvedZero" } else { "ProvedNonzero" }
        ));
    }
    ew_checks.push(printed);
    let einstein_weyl = Condition::new("einstein_weyl", MapKind::Point, ew_checks);
    let ew_holds = einstein_weyl.outcome == Outcome::True;
    conditions.push(einstein_weyl);

    let b5f = &j.total(&fqq) + &(&Frac::ratio(1, 3) * &(&fqq * &j.f(&[Q])));
    conditions.push(Condition::new(
        "fibre_metric",
        MapKind::Fibre,
        vec![
            w_zero(),
            Check::zero("D(F_qq) + F_qq F_q / 3", b5f, cfg),
            Check::recorded("F_qq", fqq.clone(), cfg),
        ],
    ));

    let x = lorentz_x(&j);
    conditions.push(Condition::new(
        "lorentz_reduction",
        MapKind::Point,
        vec![
            w_zero(),
            Check::nonzero("6K_qq + 2/3 F_qqq F_q + 2F_qqp + 1/2 F_qq^2", x, cfg),
            Check::zero(
                "(D + 2/3 F_q)(6K_qq + ...)",
                inv(&j, InvariantName::LorentzObstruction),
                cfg,
            ),
        ],
    ));

    let ricci = if ew_holds { ricci_sign(ode, cfg) } else { None };

    let w_state = &conditions[0].checks[0].verdict;
    let fqqqq_state = &conditions[0].checks[1].verdict;
    if w_state.is_proved_zero() && fqqqq_state.is_proved_nonzero() {
        notes.push("W = 0 with F_qqqq != 0: conformal branch with no further contact conditions".into());
    }

    let outcomes = conditions.iter().map(|c| (c.id.clone(), c.outcome)).collect();
    let mu = conditions
        .iter()
        .find(|c| c.id == "linearizable" && c.outcome == Outcome::True)
        .and_then(|c| c.check("a5"))
        .map(|c| c.expression.clone());
    Ok(ClassificationReport {
        equation: ode.rhs().clone(),
        outcomes,
        ricci_sign: ricci,
        mu,
        cubic_coefficients: cubic,
        conditions,
        discrepancies,
        notes,
    })
}

fn linearizable(j: &Jet<'_>, cfg: &ProbeConfig, notes: &mut Vec<String>) -> Condition {
    let w = j.w(&[]);
    let w_nonzero = Check::nonzero("W", w.clone(), cfg);
    if w_nonzero.status == Status::Violated {
        notes.push("linearizable: W vanishes identically, so the a5 family is undefined".into());
        return Condition {
            id: "linearizable".into(),
            invariance: MapKind::Contact,
            checks: vec![w_nonzero],
            outcome: Outcome::NotApplicable,
        };
    }
    let mut checks = vec![w_nonzero];
    let k = &(&Frac::int(2) * &j.w(&[Q]).pow_u(2)) - &(&Frac::int(3) * &(&j.w(&[Q, Q]) * &w));
    checks.push(Check::zero("2 W_q^2 - 3 W_qq W", k, cfg));
    match invariant_with(j, InvariantName::A5) {
        Ok(a5) => checks.push(Check::constant("a5", a5, cfg)),
        Err(e) => notes.push(format!("linearizable: a5 could not be formed: {e}")),
    }
    Condition::new("linearizable", MapKind::Contact, checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_serializes_as_bool_or_string() {
        assert_eq!(serde_json::to_string(&Outcome::True).unwrap(), "true");
        assert_eq!(serde_json::to_string(&Outcome::False).unwrap(), "false");
        assert_eq!(
            serde_json::to_string(&Outcome::NotApplicable).unwrap(),
            "\"not applicable\""
        );
    }

    #[test]
    fn conjunction_rules() {
        let cfg = ProbeConfig::default();
        let z = Check::zero("z", Frac::zero(), &cfg);
        let nz = Check::zero("nz", Frac::one(), &cfg);
        let rec = Check::recorded("r", Frac::one(), &cfg);
        assert_eq!(conjunction(&[z.clone(), rec.clone()]), Outcome::True);
        assert_eq!(conjunction(&[z, nz, rec]), Outcome::False);
    }
}
