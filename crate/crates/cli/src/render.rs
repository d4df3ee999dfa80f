//! Output formats. Every format carries the run configuration so a result
//! can be reproduced from its own text.

use std::fmt;

use serde_json::Value;

use crate::{Format, RunConfig};

/// Format-independent result of a subcommand.
pub struct Body {
    pub json: Value,
    pub table: String,
    pub latex: String,
    pub unknown: bool,
}

impl Body {
    pub fn new(json: Value, table: String, latex: String) -> Body {
        Body { json, table, latex, unknown: false }
    }

    pub fn unknown(mut self, u: bool) -> Body {
        self.unknown |= u;
        self
    }

    pub fn with(mut self, key: &str, v: Value) -> Body {
        if let Value::Object(m) = &mut self.json {
            m.insert(key.to_string(), v);
        }
        self
    }
}

pub struct Output {
    text: String,
    pub unknown: bool,
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

pub fn latex_rows(rows: &[String]) -> String {
    if rows.is_empty() {
        return String::new();
    }
    format!("\\begin{{align*}}\n{}\n\\end{{align*}}", rows.join(" \\\\\n"))
}

fn config_line(run: &RunConfig) -> String {
    let params: Vec<String> = run
        .params
        .iter()
        .map(|(k, v)| match v {
            Some(v) => format!("{k}={v}"),
            None => k.clone(),
        })
        .collect();
    format!(
        "seed={} probes={} abs_threshold={:e} rel_threshold={:e} metric_variant={} params=[{}]",
        run.seed,
        run.probes,
        run.abs_threshold,
        run.rel_threshold,
        serde_json::to_value(run.metric_variant)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        params.join(",")
    )
}

pub fn render(format: Format, run: &RunConfig, body: Body) -> Output {
    let text = match format {
        Format::Json => {
            let mut v = match body.json {
                Value::Object(m) => Value::Object(m),
                other => serde_json::json!({ "result": other }),
            };
            v["config"] = serde_json::to_value(run).expect("serializable");
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
        Format::Table => format!("# {}\n{}", config_line(run), ensure_newline(body.table)),
        Format::Latex => format!("% {}\n{}", config_line(run), ensure_newline(body.latex)),
    };
    Output { text, unknown: body.unknown }
}

fn ensure_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}
