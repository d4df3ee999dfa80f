//! One function per subcommand. Each returns a [`Body`]; rendering and the
//! run configuration are added in `render`.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};
use thiserror::Error;

use thirdorder::classify::classify;
use thirdorder::extcalc::forms::worst;
use thirdorder::extcalc::{
    coframe, conformal_metric, connection, cotton, curvature, five_dim_structure,
    five_dim_structure_at, six_dim_metric, solution_space_metric, solution_space_potential, Form,
    Picture,
};
use thirdorder::invariants::{scalar_invariant, InvariantName, Ode3};
use thirdorder::oracle::{ew_descent_obstruction, ew_numeric_check, fd_validate, wunschmann_oracle, GridSpec};
use thirdorder::prolong::{transform_ode, verify_equivalence, VariableMap};
use thirdorder::symkernel::{parse_with, q_to_float, Frac, Gen, KernelError, Point, ProbeConfig, Var, Q};

use crate::render::{latex_rows, Body, Output};
use crate::{Command, Global, MapArgs, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] thirdorder::Error),
    #[error("{0}")]
    Usage(String),
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    /// Errors caused by malformed input, which get the grammar reminder.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            CliError::Usage(_)
                | CliError::Core(thirdorder::Error::Kernel(
                    KernelError::Syntax { .. } | KernelError::UnknownIdentifier { .. }
                ))
                | CliError::Core(thirdorder::Error::ForeignVariable(_))
                | CliError::Core(thirdorder::Error::UnknownInvariant(_))
        )
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parsing context shared by all subcommands.
struct Session {
    cfg: ProbeConfig,
    declared: BTreeSet<String>,
    bound: BTreeMap<Gen, Frac>,
    run: RunConfig,
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn constant(text: &str, what: &str) -> Result<Q> {
    let f = parse_with(text, &BTreeSet::new())?.to_frac()?;
    f.as_constant()
        .ok_or_else(|| CliError::Usage(format!("{what} must be a number, got `{text}`")))
}

impl Session {
    fn new(g: &Global) -> Result<Session> {
        let mut declared: BTreeSet<String> = ["mu".to_string()].into();
        let mut values: BTreeMap<String, Q> = BTreeMap::new();
        for spec in &g.params {
            let (name, value) = match spec.split_once('=') {
                Some((n, v)) => (n.trim(), Some(v.trim())),
                None => (spec.trim(), None),
            };
            if !is_identifier(name) || Var::ALL.iter().any(|v| v.name() == name) {
                return Err(CliError::Usage(format!("`{name}` is not a valid parameter name")));
            }
            declared.insert(name.to_string());
            if let Some(v) = value {
                values.insert(name.to_string(), constant(v, &format!("parameter `{name}`"))?);
            }
        }
        let mut cfg = ProbeConfig {
            seed: g.seed,
            probes: g.probes,
            abs_threshold: g.abs_threshold,
            rel_threshold: g.rel_threshold,
            ..ProbeConfig::default()
        };
        let mut params = BTreeMap::new();
        for name in &declared {
            params.insert(name.clone(), values.get(name).map(|q| q.to_string()));
        }
        let bound = values
            .iter()
            .map(|(k, v)| (Gen::Param(k.as_str().into()), Frac::constant(v.clone())))
            .collect();
        for (k, v) in &values {
            cfg.pinned.insert(k.clone(), q_to_float(v));
            declared.remove(k);
        }
        let run = RunConfig {
            seed: g.seed,
            probes: g.probes,
            abs_threshold: g.abs_threshold,
            rel_threshold: g.rel_threshold,
            format: match g.format {
                crate::Format::Json => "json",
                crate::Format::Latex => "latex",
                crate::Format::Table => "table",
            },
            params,
            metric_variant: g.metric_variant,
        };
        Ok(Session { cfg, declared, bound, run })
    }

    /// Parse with declared parameters and substitute bound ones.
    fn frac(&self, text: &str) -> Result<Frac> {
        let mut all = self.declared.clone();
        all.extend(self.bound.keys().filter_map(|g| match g {
            Gen::Param(p) => Some(p.to_string()),
            _ => None,
        }));
        let f = parse_with(text, &all)?.to_frac()?;
        Ok(if self.bound.is_empty() { f } else { f.subst(&self.bound)? })
    }

    fn ode(&self, text: &str) -> Result<Ode3> {
        Ok(Ode3::new(self.frac(text)?, self.declared.clone())?)
    }

    fn map(&self, m: &MapArgs) -> Result<VariableMap> {
        let psi = m.psi.as_deref().map(|s| self.frac(s)).transpose()?;
        Ok(VariableMap::new(m.map_kind, self.frac(&m.chi)?, self.frac(&m.phi)?, psi, &self.cfg)?)
    }
}

pub fn run(g: &Global, cmd: &Command) -> Result<Output> {
    let s = Session::new(g)?;
    let body = match cmd {
        Command::Invariants { ode, names } => invariants(&s, ode, names)?,
        Command::Classify { ode } => classify_cmd(&s, ode)?,
        Command::Coframe { ode, picture } => coframe_cmd(&s, ode, *picture)?,
        Command::Connection { ode, picture } => connection_cmd(&s, ode, *picture)?,
        Command::Curvature { ode, picture } => curvature_cmd(&s, ode, *picture)?,
        Command::Metric { ode } => metric_cmd(&s, ode)?,
        Command::Cotton { ode } => cotton_cmd(&s, ode)?,
        Command::Fivedim { ode, at } => fivedim_cmd(&s, ode, at.as_deref())?,
        Command::Transform {
            ode,
            map,
            inverse_chi,
            inverse_phi,
            inverse_psi,
        } => {
            let inv = match (inverse_chi, inverse_phi) {
                (Some(c), Some(p)) => Some((c.as_str(), p.as_str(), inverse_psi.as_deref())),
                (None, None) => None,
                _ => {
                    return Err(CliError::Usage(
                        "--inverse-chi and --inverse-phi go together".into(),
                    ))
                }
            };
            transform_cmd(&s, ode, map, inv)?
        }
        Command::Verify { map, source, target } => verify_cmd(&s, map, source, target)?,
        Command::Oracle {
            ode,
            solution,
            x0,
            grid_points,
            fd,
        } => oracle_cmd(&s, ode, solution.as_deref(), x0, *grid_points, fd.as_deref())?,
        Command::SolutionSpace { ode, solution, x0 } => solution_space_cmd(&s, ode, solution, x0)?,
    };
    Ok(crate::render::render(g.format, &s.run, body))
}

fn invariants(s: &Session, text: &str, names: &[String]) -> Result<Body> {
    let ode = s.ode(text)?;
    let list: Vec<InvariantName> = if names.is_empty() {
        InvariantName::ALL.to_vec()
    } else {
        names.iter().map(|n| n.parse()).collect::<thirdorder::Result<_>>()?
    };
    let mut obj = serde_json::Map::new();
    let mut table = String::new();
    let mut rows = Vec::new();
    for name in list {
        match scalar_invariant(&ode, name) {
            Ok(v) => {
                table.push_str(&format!("{:<8} {}\n", name.as_str(), v));
                rows.push(format!("{} &= {}", latex_name(name.as_str()), v.to_expr().to_latex()));
                obj.insert(name.as_str().into(), Value::String(v.to_string()));
            }
            Err(thirdorder::Error::WunschmannZero(_)) => {
                table.push_str(&format!("{:<8} undefined (W = 0)\n", name.as_str()));
                rows.push(format!("{} &: \\text{{undefined}}", latex_name(name.as_str())));
                obj.insert(name.as_str().into(), Value::Null);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Body::new(Value::Object(obj), table, latex_rows(&rows)))
}

/// `F_qq` to `F_{qq}`, `W` unchanged.
fn latex_name(n: &str) -> String {
    match n.split_once('_') {
        Some((a, b)) => format!("{a}_{{{b}}}"),
        None => n.to_string(),
    }
}

fn classify_cmd(s: &Session, text: &str) -> Result<Body> {
    let r = classify(&s.ode(text)?, &s.cfg)?;
    let mut rows = vec![format!("F &= {}", r.equation.to_expr().to_latex())];
    for c in &r.conditions {
        rows.push(format!("\\text{{{}}} &: \\text{{{}}}", c.id.replace('_', "\\_"), c.outcome.as_str()));
    }
    if let Some(sign) = r.ricci_sign {
        rows.push(format!("\\text{{Ricci sign}} &: \\text{{{}}}", sign.as_str()));
    }
    let unknown = r.has_unknown();
    Ok(Body::new(serde_json::to_value(&r).expect("serializable"), r.to_table(), latex_rows(&rows))
        .unknown(unknown))
}

const LABELS: [&str; 4] = ["w1", "w2", "w3~", "w4"];
const LATEX_LABELS: [&str; 4] = ["\\omega^1", "\\omega^2", "\\tilde\\omega^3", "\\omega^4"];

fn forms_body(key: &str, forms: &[Form], labels: &[&str], latex_labels: &[&str]) -> Body {
    let mut obj = serde_json::Map::new();
    let mut table = String::new();
    let mut rows = Vec::new();
    for ((f, l), ll) in forms.iter().zip(labels).zip(latex_labels) {
        obj.insert(l.to_string(), serde_json::to_value(f).expect("serializable"));
        table.push_str(&format!("{l} = {f}\n"));
        rows.push(format!("{ll} &= {}", f.to_latex()));
    }
    Body::new(json!({ key: Value::Object(obj) }), table, latex_rows(&rows))
}

fn coframe_cmd(s: &Session, text: &str, picture: Picture) -> Result<Body> {
    let forms = coframe(&s.ode(text)?, picture);
    Ok(forms_body("coframe", &forms, &LABELS, &LATEX_LABELS).with("picture", json!(picture)))
}

fn matrix_table(m: &[Vec<Form>]) -> String {
    let mut out = String::new();
    for (i, row) in m.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            if !f.is_zero() {
                out.push_str(&format!("[{i}][{j}] = {f}\n"));
            }
        }
    }
    if out.is_empty() {
        out.push_str("all entries vanish\n");
    }
    out
}

fn connection_cmd(s: &Session, text: &str, picture: Picture) -> Result<Body> {
    let c = connection(&s.ode(text)?, picture);
    Ok(Body::new(
        json!({ "picture": picture, "connection": c }),
        matrix_table(&c.entries),
        c.to_latex(),
    ))
}

fn curvature_cmd(s: &Session, text: &str, picture: Picture) -> Result<Body> {
    let c = connection(&s.ode(text)?, picture);
    let k = curvature(&c);
    let v = k.zero_verdict(&s.cfg);
    let table = format!("{}flat: {v}\n", matrix_table(&k.0));
    let unknown = v.is_unknown();
    Ok(Body::new(json!({ "picture": picture, "curvature": k, "flat": v }), table, k.to_latex())
        .unknown(unknown))
}

fn metric_cmd(s: &Session, text: &str) -> Result<Body> {
    let ode = s.ode(text)?;
    let g = conformal_metric(&ode);
    let big = six_dim_metric(&ode, s.run.metric_variant);
    let table = format!("g = {g}\nG = {big}\n");
    let latex = latex_rows(&[format!("g &= {}", g.to_latex()), format!("G &= {}", big.to_latex())]);
    Ok(Body::new(json!({ "conformal": g, "six_dim": big }), table, latex))
}

fn cotton_cmd(s: &Session, text: &str) -> Result<Body> {
    let c = cotton(&s.ode(text)?);
    let v = worst(c.iter().map(|f| f.zero_verdict(&s.cfg)));
    let unknown = v.is_unknown();
    let mut b = forms_body("cotton", &c, &["DP1", "DP2", "DP3"], &["DP_1", "DP_2", "DP_3"]);
    b.table.push_str(&format!("vanishes: {v}\n"));
    Ok(b.with("vanishes", json!(v)).unknown(unknown))
}

fn parse_point(s: &Session, at: &str) -> Result<Point<f64>> {
    let mut pt = Point::new();
    for part in at.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected name=value, got `{part}`")))?;
        let v: f64 = q_to_float(&constant(value.trim(), name.trim())?);
        match Var::ALL.iter().find(|x| x.name() == name.trim()) {
            Some(&var) => pt = pt.with(var, v),
            None if s.declared.contains(name.trim()) => {
                pt.params.insert(name.trim().to_string(), v);
            }
            None => return Err(CliError::Usage(format!("unknown coordinate `{}`", name.trim()))),
        }
    }
    for (k, v) in &s.cfg.pinned {
        pt.params.insert(k.clone(), *v);
    }
    Ok(pt)
}

fn fivedim_cmd(s: &Session, text: &str, at: Option<&str>) -> Result<Body> {
    let ode = s.ode(text)?;
    if let Some(at) = at {
        let pt = parse_point(s, at)?;
        let vals = five_dim_structure_at(&ode, &pt)?;
        let table: String = vals.iter().map(|(k, v)| format!("{k:<3} {v:.12e}\n")).collect();
        let rows: Vec<String> = vals.iter().map(|(k, v)| format!("{k} &= {v:.12e}")).collect();
        return Ok(Body::new(json!({ "at": pt.vars.iter().map(|(k, v)| (k.name(), *v)).collect::<BTreeMap<_, _>>(), "functions": vals }), table, latex_rows(&rows)));
    }
    let st = five_dim_structure(&ode, &s.cfg)?;
    let v = st.residual_verdict(&s.cfg);
    let funcs: BTreeMap<&str, String> = st.functions.iter().map(|(k, f)| (k.as_str(), f.to_string())).collect();
    let mut table: String = st.functions.iter().map(|(k, f)| format!("{k:<3} {f}\n")).collect();
    table.push_str(&format!("structure equations: {v}\n"));
    let rows: Vec<String> = st
        .functions
        .iter()
        .map(|(k, f)| format!("{k} &= {}", f.to_expr().to_latex()))
        .collect();
    let unknown = v.is_unknown();
    Ok(Body::new(json!({ "functions": funcs, "structure_equations": v }), table, latex_rows(&rows))
        .unknown(unknown))
}

fn transform_cmd(
    s: &Session,
    text: &str,
    m: &MapArgs,
    inverse: Option<(&str, &str, Option<&str>)>,
) -> Result<Body> {
    let ode = s.ode(text)?;
    let mut map = s.map(m)?;
    if let Some((c, p, q)) = inverse {
        let q = q.map(|t| s.frac(t)).transpose()?;
        map = map.with_inverse(s.frac(c)?, s.frac(p)?, q, &s.cfg)?;
    }
    let out = transform_ode(&map, &ode, &s.cfg)?;
    let f = out.rhs();
    Ok(Body::new(
        json!({ "source": ode.rhs().to_string(), "map": map, "F": f.to_string() }),
        format!("F = {f}\n"),
        latex_rows(&[format!("\\bar F &= {}", f.to_expr().to_latex())]),
    ))
}

fn verify_cmd(s: &Session, m: &MapArgs, source: &str, target: &str) -> Result<Body> {
    let (a, b) = (s.ode(source)?, s.ode(target)?);
    let map = s.map(m)?;
    let v = verify_equivalence(&map, &a, &b, &s.cfg)?;
    let unknown = v.is_unknown();
    Ok(Body::new(
        json!({ "source": a.rhs().to_string(), "target": b.rhs().to_string(), "map": map, "verdict": v }),
        format!("source = {}\ntarget = {}\nverdict: {v}\n", a.rhs(), b.rhs()),
        latex_rows(&[format!("\\text{{verdict}} &: \\text{{{}}}", v.label())]),
    )
    .unknown(unknown))
}

fn oracle_cmd(
    s: &Session,
    text: &str,
    solution: Option<&str>,
    x0: &[String],
    grid_points: usize,
    fd: Option<&str>,
) -> Result<Body> {
    let ode = s.ode(text)?;
    let transport = wunschmann_oracle(&ode, &s.cfg)?;
    let descent = ew_descent_obstruction(&ode, &s.cfg)?;
    let mut unknown = transport.residuals.iter().any(|r| r.verdict.is_unknown())
        || descent.verdict.is_unknown();
    let mut table = String::new();
    let mut rows = Vec::new();
    for rep in [&transport, &descent] {
        table.push_str(&format!("{}: {}\n", rep.name, rep.verdict));
        for r in &rep.residuals {
            table.push_str(&format!("  {:<12} {}\n", r.name, r.verdict));
            rows.push(format!(
                "\\text{{{}}} &: \\text{{{}}}",
                format!("{} / {}", rep.name, r.name).replace('_', "\\_"),
                r.verdict.label()
            ));
        }
        for n in &rep.notes {
            table.push_str(&format!("  note: {n}\n"));
        }
    }
    let mut obj = json!({ "wunschmann": transport, "descent": descent });
    if let Some(sol) = solution {
        let sol = s.frac(sol)?;
        let x0s: Vec<Q> = if x0.is_empty() {
            ["0", "3/10", "7/10"].iter().map(|t| constant(t, "x0")).collect::<Result<_>>()?
        } else {
            x0.iter().map(|t| constant(t, "x0")).collect::<Result<_>>()?
        };
        let grid = GridSpec { points: grid_points, ..GridSpec::default() };
        let rep = ew_numeric_check(&ode, &sol, &x0s, &grid, &s.cfg)?;
        let sign = rep.ricci_sign.map_or("undefined", |r| r.as_str());
        table.push_str(&format!(
            "numeric: max residual {:.3e}, proportionality {:.3e}, ricci sign {sign}\n",
            rep.max_residual, rep.proportionality
        ));
        rows.push(format!("\\text{{numeric residual}} &= {:.3e}", rep.max_residual));
        obj["numeric"] = json!(rep);
    }
    if let Some(name) = fd {
        let e = if name == "F" {
            ode.rhs().to_expr()
        } else {
            scalar_invariant(&ode, name.parse()?)?.to_expr()
        };
        let rep = fd_validate(&e, &s.cfg)?;
        unknown |= !rep.agrees;
        table.push_str(&format!("finite differences ({name}): max error {:.3e}, agrees {}\n", rep.max_error, rep.agrees));
        rows.push(format!("\\text{{FD error}} &= {:.3e}", rep.max_error));
        obj["fd"] = json!(rep);
    }
    Ok(Body::new(obj, table, latex_rows(&rows)).unknown(unknown))
}

fn solution_space_cmd(s: &Session, text: &str, solution: &str, x0: &str) -> Result<Body> {
    let ode = s.ode(text)?;
    let sol = s.frac(solution)?;
    let x0q = constant(x0, "x0")?;
    let g = solution_space_metric(&ode, &sol, &x0q, &s.cfg)?;
    let phi = solution_space_potential(&ode, &sol, &x0q, &s.cfg)?;
    Ok(Body::new(
        json!({ "x0": x0q.to_string(), "metric": g, "potential": phi }),
        format!("x0 = {x0q}\ng = {g}\nphi = {phi}\n"),
        latex_rows(&[format!("g &= {}", g.to_latex()), format!("\\phi &= {}", phi.to_latex())]),
    ))
}
