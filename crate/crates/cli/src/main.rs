//! `thirdorder`: invariants, classification and geometric checks for
//! `y''' = F(x, y, y', y'')` from the command line.
//!
//! Exit status: 0 on success, 2 when some verdict stayed `Unknown`, 1 on
//! errors.

mod commands;
mod render;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use thirdorder::extcalc::{MetricVariant, Picture};
use thirdorder::prolong::MapKind;

const GRAMMAR: &str = "\
expressions use x, y, p (= y'), q (= y''), numbers and declared parameters;
operators + - * / ^ with rational exponents such as q^(3/2);
functions sqrt, cbrt, exp, ln, sin, cos; `mu` is always declared,
other parameters via --param name or --param name=value";

#[derive(Parser, Debug)]
#[command(name = "thirdorder", version, about = "Invariants and geometry of y''' = F(x, y, p, q)")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Parameter declaration `name` or binding `name=value` (repeatable).
    #[arg(long = "param", global = true, value_name = "NAME[=VALUE]")]
    params: Vec<String>,
    /// Seed of the probe sampler.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Probe points per zero test.
    #[arg(long, global = true, default_value_t = 24)]
    probes: usize,
    #[arg(long, global = true, default_value_t = 1e-9)]
    abs_threshold: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    rel_threshold: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Middle term of the six-dimensional metric: c (contact) or p (point).
    #[arg(long, global = true, value_parser = parse_variant, default_value = "c")]
    metric_variant: MetricVariant,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Latex,
    Table,
}

fn parse_variant(s: &str) -> Result<MetricVariant, String> {
    s.parse()
}

fn parse_picture(s: &str) -> Result<Picture, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<MapKind, String> {
    s.parse().map_err(|e: thirdorder::Error| e.to_string())
}

#[derive(Args, Debug)]
struct MapArgs {
    /// fibre, point or contact.
    #[arg(long, value_parser = parse_kind, default_value = "point")]
    map_kind: MapKind,
    /// New x as a function of the old coordinates.
    #[arg(long, allow_hyphen_values = true)]
    chi: String,
    /// New y.
    #[arg(long, allow_hyphen_values = true)]
    phi: String,
    /// New p (contact maps only).
    #[arg(long, allow_hyphen_values = true)]
    psi: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Named scalar invariants at the identity section.
    Invariants {
        #[arg(allow_hyphen_values = true)]
        ode: String,
        /// Invariant name (repeatable); all when omitted.
        #[arg(long = "name")]
        names: Vec<String>,
    },
    /// Evaluate every branch condition.
    Classify { ode: String },
    /// Adapted coframe of a picture.
    Coframe {
        #[arg(allow_hyphen_values = true)]
        ode: String,
        #[arg(long, value_parser = parse_picture, default_value = "contact")]
        picture: Picture,
    },
    /// Cartan connection matrix at the identity section.
    Connection {
        #[arg(allow_hyphen_values = true)]
        ode: String,
        #[arg(long, value_parser = parse_picture, default_value = "contact")]
        picture: Picture,
    },
    /// Curvature of the connection and its zero verdict.
    Curvature {
        #[arg(allow_hyphen_values = true)]
        ode: String,
        #[arg(long, value_parser = parse_picture, default_value = "contact")]
        picture: Picture,
    },
    /// Conformal metric and the six-dimensional metric.
    Metric { ode: String },
    /// Cotton two-forms.
    Cotton { ode: String },
    /// Structure functions of the five-dimensional coframe.
    Fivedim {
        #[arg(allow_hyphen_values = true)]
        ode: String,
        /// Evaluate numerically at `x=..,y=..,p=..,q=..,u=..` instead.
        #[arg(long)]
        at: Option<String>,
    },
    /// Transformed right-hand side under a map with a known inverse.
    Transform {
        #[arg(allow_hyphen_values = true)]
        ode: String,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_hyphen_values = true)]
        inverse_chi: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        inverse_phi: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        inverse_psi: Option<String>,
    },
    /// Check that a map takes one equation to another.
    Verify {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_hyphen_values = true)]
        source: String,
        #[arg(long, allow_hyphen_values = true)]
        target: String,
    },
    /// Lie transport and Einstein-Weyl descent checks, optionally numeric.
    Oracle {
        #[arg(allow_hyphen_values = true)]
        ode: String,
        /// General solution `y = f(x; c1, c2, c3)` for the numeric check.
        #[arg(long, allow_hyphen_values = true)]
        solution: Option<String>,
        /// Sections for the numeric check (repeatable).
        #[arg(long = "x0", allow_hyphen_values = true)]
        x0: Vec<String>,
        #[arg(long, default_value_t = 9)]
        grid_points: usize,
        /// Finite-difference check of an invariant (or `F`).
        #[arg(long)]
        fd: Option<String>,
    },
    /// Metric and potential pulled back to the solution space.
    SolutionSpace {
        #[arg(allow_hyphen_values = true)]
        ode: String,
        #[arg(long, allow_hyphen_values = true)]
        solution: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        x0: String,
    },
}

/// Everything that determines the output besides the positional arguments.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub probes: usize,
    pub abs_threshold: f64,
    pub rel_threshold: f64,
    pub format: &'static str,
    pub params: BTreeMap<String, Option<String>>,
    pub metric_variant: MetricVariant,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            if code != 0 {
                eprintln!("\n{GRAMMAR}");
            }
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli.global, &cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::from(if out.unknown { 2 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input() {
                eprintln!("\n{GRAMMAR}");
            }
            ExitCode::from(1)
        }
    }
}
