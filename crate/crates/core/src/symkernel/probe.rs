//! Randomised zero testing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::error::KernelError;
use super::expr::Expr;
use super::frac::{AtomKind, Frac};
use super::eval::Point;
use super::var::{Gen, Var};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub seed: u64,
    pub probes: usize,
    pub abs_threshold: f64,
    pub rel_threshold: f64,
    /// Candidate points tried per requested probe before giving up.
    pub attempts_per_probe: usize,
    pub min_magnitude: f64,
    pub max_magnitude: f64,
    /// Parameter values fixed by the user; other parameters are sampled.
    pub pinned: BTreeMap<String, f64>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            seed: 0x5eed,
            probes: 24,
            abs_threshold: 1e-9,
            rel_threshold: 1e-9,
            attempts_per_probe: 40,
            min_magnitude: 0.3,
            max_magnitude: 2.0,
            pinned: BTreeMap::new(),
        }
    }
}

impl ProbeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Point<f64>,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub valid_probes: usize,
    pub max_abs_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum ZeroVerdict {
    ProvedZero,
    ProvedNonzero(Witness),
    Unknown(ProbeSummary),
}

impl ZeroVerdict {
    pub fn is_proved_zero(&self) -> bool {
        matches!(self, ZeroVerdict::ProvedZero)
    }

    pub fn is_proved_nonzero(&self) -> bool {
        matches!(self, ZeroVerdict::ProvedNonzero(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, ZeroVerdict::Unknown(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::ProvedZero => "ProvedZero",
            ZeroVerdict::ProvedNonzero(_) => "ProvedNonzero",
            ZeroVerdict::Unknown(_) => "Unknown",
        }
    }
}

impl fmt::Display for ZeroVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroVerdict::ProvedNonzero(w) => {
                write!(f, "ProvedNonzero (value {:.6e} at {})", w.value, w.point)
            }
            ZeroVerdict::Unknown(s) => write!(
                f,
                "Unknown ({} valid probes, max |value| {:.3e})",
                s.valid_probes, s.max_abs_value
            ),
            ZeroVerdict::ProvedZero => f.write_str("ProvedZero"),
        }
    }
}

/// Variables that appear directly as the base of an even root.
fn positive_vars(f: &Frac, out: &mut BTreeSet<Var>) {
    for a in f.atoms() {
        match &a.0.kind {
            AtomKind::Root { base, deg } => {
                if deg % 2 == 0 {
                    if let Some(v) = single_var(base) {
                        out.insert(v);
                    }
                }
                positive_vars(base, out);
            }
            AtomKind::Func { arg, .. } => positive_vars(arg, out),
        }
    }
}

fn single_var(f: &Frac) -> Option<Var> {
    if !f.den.is_one() || f.num.terms().len() != 1 {
        return None;
    }
    let (m, c) = &f.num.terms()[0];
    if *c != num_traits::One::one() || m.0.len() != 1 || m.0[0].1 != 1 {
        return None;
    }
    match &m.0[0].0 {
        Gen::Var(v) => Some(*v),
        _ => None,
    }
}

/// Deterministic sampler of probe points over the free symbols of an expression.
pub struct Sampler {
    rng: ChaCha8Rng,
    cfg: ProbeConfig,
}

impl Sampler {
    pub fn new(cfg: &ProbeConfig) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg: cfg.clone(),
        }
    }

    pub fn magnitude(&mut self) -> f64 {
        self.rng.gen_range(self.cfg.min_magnitude..self.cfg.max_magnitude)
    }

    pub fn signed(&mut self) -> f64 {
        let m = self.magnitude();
        if self.rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    }

    pub fn point(
        &mut self,
        vars: &BTreeSet<Var>,
        params: &BTreeSet<String>,
        positive: &BTreeSet<Var>,
    ) -> Point<f64> {
        let mut pt = Point::new();
        for v in vars {
            let x = if positive.contains(v) {
                self.magnitude()
            } else {
                self.signed()
            };
            pt.vars.insert(*v, x);
        }
        for p in params {
            let x = match self.cfg.pinned.get(p) {
                Some(x) => *x,
                None => self.signed(),
            };
            pt.params.insert(p.clone(), x);
        }
        pt
    }
}

/// Up to `cfg.probes` points where `f` evaluates to a finite value, drawn the
/// same way as the zero test draws them.
pub fn sample_points(f: &Frac, cfg: &ProbeConfig) -> Vec<Point<f64>> {
    let vars = f.vars();
    let params = f.params();
    let mut positive = BTreeSet::new();
    positive_vars(f, &mut positive);
    let mut sampler = Sampler::new(cfg);
    let mut out = Vec::new();
    let budget = cfg.probes.max(1) * cfg.attempts_per_probe.max(1);
    for _ in 0..budget {
        if out.len() >= cfg.probes {
            break;
        }
        let pt = sampler.point(&vars, &params, &positive);
        if matches!(f.eval(&pt), Ok(v) if v.is_finite()) {
            out.push(pt);
        }
    }
    out
}

/// Zero test on a canonical form.
pub fn is_zero_frac(f: &Frac, cfg: &ProbeConfig) -> ZeroVerdict {
    if f.is_zero() {
        return ZeroVerdict::ProvedZero;
    }
    let vars = f.vars();
    let params = f.params();
    let mut positive = BTreeSet::new();
    positive_vars(f, &mut positive);
    let mut sampler = Sampler::new(cfg);
    let mut valid = 0;
    let mut max_abs: f64 = 0.0;
    let budget = cfg.probes.max(1) * cfg.attempts_per_probe.max(1);
    for _ in 0..budget {
        if valid >= cfg.probes {
            break;
        }
        let pt = sampler.point(&vars, &params, &positive);
        let Ok((v, scale)) = f.eval_with_scale(&pt) else {
            continue;
        };
        if !v.is_finite() || !scale.is_finite() {
            continue;
        }
        valid += 1;
        max_abs = max_abs.max(v.abs());
        let threshold = cfg.abs_threshold + cfg.rel_threshold * scale;
        if v.abs() > threshold {
            return ZeroVerdict::ProvedNonzero(Witness {
                point: pt,
                value: v,
                threshold,
            });
        }
    }
    ZeroVerdict::Unknown(ProbeSummary {
        valid_probes: valid,
        max_abs_value: max_abs,
    })
}

/// Zero test on an expression tree. Normalisation failures (for example a
/// literal division by zero) are reported as errors.
pub fn is_zero(e: &Expr, cfg: &ProbeConfig) -> Result<ZeroVerdict, KernelError> {
    Ok(is_zero_frac(&e.to_frac()?, cfg))
}

/// Outcome of a constancy check.
#[derive(Clone, Debug, PartialEq)]
pub enum Constancy {
    Constant(Frac),
    NotConstant { var: Var, verdict: ZeroVerdict },
    Unknown { var: Var, verdict: ZeroVerdict },
}

impl Constancy {
    pub fn value(&self) -> Option<&Frac> {
        match self {
            Constancy::Constant(c) => Some(c),
            _ => None,
        }
    }
}

/// A variable along which two probe values of `f` differ beyond the zero
/// threshold. The witness value is that difference.
fn numeric_variation(f: &Frac, cfg: &ProbeConfig) -> Option<(Var, Witness)> {
    let mut positive = BTreeSet::new();
    positive_vars(f, &mut positive);
    let (vars, params) = (f.vars(), f.params());
    let mut sampler = Sampler::new(cfg);
    for v in &vars {
        for _ in 0..cfg.attempts_per_probe.max(1) {
            let a = sampler.point(&vars, &params, &positive);
            let mut b = a.clone();
            let x = a.vars[v];
            let shifted = if positive.contains(v) { x + sampler.magnitude() } else { sampler.signed() };
            b.vars.insert(*v, shifted);
            let (Ok((fa, sa)), Ok((fb, sb))) = (f.eval_with_scale(&a), f.eval_with_scale(&b)) else {
                continue;
            };
            if !(fa.is_finite() && fb.is_finite() && sa.is_finite() && sb.is_finite()) {
                continue;
            }
            let threshold = 2.0 * cfg.abs_threshold + cfg.rel_threshold * (sa + sb);
            let d = fb - fa;
            if d.abs() > threshold {
                return Some((*v, Witness { point: b, value: d, threshold }));
            }
            break;
        }
    }
    None
}

/// Constant (possibly containing parameters) when every jet partial vanishes.
/// Two probe values that differ prove non-constancy without differentiating.
pub fn constancy(f: &Frac, cfg: &ProbeConfig) -> Constancy {
    if let Some((var, w)) = numeric_variation(f, cfg) {
        return Constancy::NotConstant {
            var,
            verdict: ZeroVerdict::ProvedNonzero(w),
        };
    }
    let mut unknown = None;
    for v in Var::ALL {
        if !f.depends_on(v) {
            continue;
        }
        let verdict = is_zero_frac(&f.diff(v), cfg);
        match verdict {
            ZeroVerdict::ProvedZero => {}
            ZeroVerdict::ProvedNonzero(_) => return Constancy::NotConstant { var: v, verdict },
            ZeroVerdict::Unknown(_) => {
                if unknown.is_none() {
                    unknown = Some((v, verdict));
                }
            }
        }
    }
    match unknown {
        Some((var, verdict)) => Constancy::Unknown { var, verdict },
        None => Constancy::Constant(f.clone()),
    }
}

/// The constant value, or `None` when not provably constant.
pub fn is_constant(f: &Frac, cfg: &ProbeConfig) -> Option<Frac> {
    constancy(f, cfg).value().cloned()
}
