//! Output plumbing: result destinations, the metadata block, diagnostics.

use std::collections::BTreeMap;
use std::io::{IsTerminal, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::Options;
use hybc_core::sim::Cutoffs;

/// Exit status 1 carries user-facing diagnostics; 2 is reserved for bugs
/// and I/O failures on the output side.
#[derive(Debug)]
pub enum Failure {
    User(Vec<String>),
    Internal(String),
}

impl Failure {
    pub fn user(msg: impl ToString) -> Self {
        Failure::User(vec![msg.to_string()])
    }
}

pub type Outcome = Result<(), Failure>;

fn color() -> bool {
    match std::env::var("HYBC_COLOR").as_deref() {
        Ok("1" | "always" | "true" | "on") => true,
        Ok("0" | "never" | "false" | "off") => false,
        _ => std::io::stderr().is_terminal(),
    }
}

pub fn diagnostics(lines: &[String]) {
    let tint = color();
    let mut err = std::io::stderr().lock();
    for l in lines {
        let _ = if tint {
            writeln!(err, "\x1b[31merror\x1b[0m: {l}")
        } else {
            writeln!(err, "error: {l}")
        };
    }
}

pub fn warn(lines: &[String]) {
    let tint = color();
    let mut err = std::io::stderr().lock();
    for l in lines {
        let _ = if tint {
            writeln!(err, "\x1b[33mwarning\x1b[0m: {l}")
        } else {
            writeln!(err, "warning: {l}")
        };
    }
}

pub fn metadata(seed: Option<u64>, cutoffs: Option<&Cutoffs>, gateset: Option<&str>) -> Value {
    let cutoffs = cutoffs.map(|c| {
        let per: BTreeMap<String, usize> = c
            .per_wire
            .iter()
            .map(|(w, n)| (w.to_string(), *n))
            .collect();
        json!({ "default": c.default, "per_wire": per })
    });
    json!({
        "tool": "hybc",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "cutoffs": cutoffs,
        "gateset": gateset,
    })
}

/// Same block as `//` comment lines, for QASM and JAQAL text.
pub fn comment_header(meta: &Value) -> String {
    let mut s = format!(
        "// {} {}\n",
        meta["tool"].as_str().unwrap_or("hybc"),
        meta["version"].as_str().unwrap_or("")
    );
    for key in ["gateset", "seed"] {
        if !meta[key].is_null() {
            s.push_str(&format!("// {key}: {}\n", meta[key]));
        }
    }
    s
}

pub fn emit(text: &str, opts: &Options) -> Outcome {
    match &opts.output {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Internal(format!("writing {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| Failure::Internal(format!("stdout: {e}")))
        }
    }
}

pub fn emit_json(v: &Value, opts: &Options) -> Outcome {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Internal(e.to_string()))?;
    s.push('\n');
    emit(&s, opts)
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::user(format!("{}: {e}", path.display())))
}
