use std::f64::consts::LN_2;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::{Cli, Common, Units};

pub const EXIT_FAILED: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<hiercorr::Error> for Failure {
    fn from(e: hiercorr::Error) -> Self {
        Failure::validation(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::validation(e.to_string())
    }
}

/// Result of a command before it is wrapped into the report.
pub struct Outcome {
    pub results: Value,
    pub diagnostics: Map<String, Value>,
    /// JSON pointer-like paths (`a/*/b`) of values measured in nats.
    pub info_paths: Vec<&'static str>,
    pub converged: bool,
    pub failed: Vec<String>,
    /// Raw text printed instead of the JSON report (CSV exports).
    pub raw: Option<String>,
}

impl Outcome {
    pub fn new(results: impl Serialize) -> Self {
        Outcome {
            results: serde_json::to_value(results).expect("results serialize"),
            diagnostics: Map::new(),
            info_paths: Vec::new(),
            converged: true,
            failed: Vec::new(),
            raw: None,
        }
    }

    pub fn info(mut self, paths: &[&'static str]) -> Self {
        self.info_paths.extend_from_slice(paths);
        self
    }

    pub fn diag(mut self, key: &str, value: impl Serialize) -> Self {
        self.diagnostics
            .insert(key.into(), serde_json::to_value(value).expect("diagnostic serializes"));
        self
    }

    pub fn exit_code(&self) -> u8 {
        if !self.failed.is_empty() {
            EXIT_FAILED
        } else if !self.converged {
            EXIT_NOT_CONVERGED
        } else {
            0
        }
    }

    pub fn into_report(mut self, cli: &Cli, wall_time: f64) -> Report {
        if cli.common.units == Units::Bits {
            for path in &self.info_paths {
                let parts: Vec<&str> = path.split('/').collect();
                scale(&mut self.results, &parts, 1.0 / LN_2);
            }
        }
        for f in &self.failed {
            eprintln!("failed: {f}");
        }
        let mut diagnostics = self.diagnostics;
        diagnostics.insert("units".into(), json!(cli.common.units));
        diagnostics.insert("converged".into(), json!(self.converged));
        Report {
            command: cli.command.name(),
            config: crate::config_echo(cli),
            results: self.results,
            diagnostics: Value::Object(diagnostics),
            wall_time_s: wall_time,
            raw: self.raw,
        }
    }
}

#[derive(Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub results: Value,
    pub diagnostics: Value,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub raw: Option<String>,
}

fn scale(v: &mut Value, path: &[&str], factor: f64) {
    let Some((head, rest)) = path.split_first() else {
        if let Some(x) = v.as_f64() {
            *v = json!(x * factor);
        } else if let Value::Array(items) = v {
            items.iter_mut().for_each(|item| scale(item, &[], factor));
        }
        return;
    };
    match (v, *head) {
        (Value::Array(items), "*") => items.iter_mut().for_each(|item| scale(item, rest, factor)),
        (Value::Object(map), key) => {
            if let Some(child) = map.get_mut(key) {
                scale(child, rest, factor);
            }
        }
        _ => {}
    }
}

pub fn emit(common: &Common, report: &Report) -> std::io::Result<()> {
    let text = match &report.raw {
        Some(raw) => raw.clone(),
        None => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
    };
    match &common.out {
        Some(path) => {
            std::fs::write(path, &text)?;
            if report.raw.is_some() {
                println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
            }
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
