use std::collections::BTreeMap;
use std::time::Instant;

use polargrass::{Geometry, PolarModel};
use serde::Serialize;
use serde_json::Value;

use crate::args::{Command, Global};
use crate::cache::{modulus_hash, tool_version};

/// Version of the report layout below.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Every check passed.
    Verified,
    /// Some check failed.
    Refuted,
    /// Nothing was claimed.
    Info,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified | Verdict::Info => 0,
            Verdict::Refuted => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelInfo {
    pub descriptor: String,
    pub field: String,
    pub modulus: Vec<u32>,
    pub modulus_sha256: String,
    pub n: usize,
    pub d: usize,
    pub d1: usize,
    pub d2: usize,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grassmannian: Option<GrassmannInfo>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrassmannInfo {
    pub k: usize,
    pub points: usize,
    pub lines: usize,
}

impl ModelInfo {
    pub fn of(model: &PolarModel) -> ModelInfo {
        let inv = model.invariants();
        let f = model.field();
        ModelInfo {
            descriptor: model.descriptor().to_string(),
            field: f.descriptor(),
            modulus: f.modulus().to_vec(),
            modulus_sha256: modulus_hash(f.modulus()),
            n: inv.n,
            d: inv.d,
            d1: inv.d1,
            d2: inv.d2,
            points: model.num_points(),
            grassmannian: None,
        }
    }

    pub fn with_geometry(mut self, geom: &Geometry) -> ModelInfo {
        self.grassmannian = Some(GrassmannInfo {
            k: geom.k(),
            points: geom.num_points(),
            lines: geom.num_lines(),
        });
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: String,
}

/// Machine-readable outcome of one command. Re-running the same command
/// reproduces it exactly apart from `timings`.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: Tool,
    pub config: Config,
    pub models: Vec<ModelInfo>,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub data: BTreeMap<String, Value>,
    pub timings: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Config {
    pub budget: crate::args::BudgetName,
    #[serde(flatten)]
    pub command: Command,
}

impl Config {
    pub fn new(global: &Global, command: &Command) -> Config {
        Config {
            budget: global.budget,
            command: command.clone(),
        }
    }
}

/// Collects checks, data and timings while a command runs.
pub struct Recorder {
    report: Report,
    started: Instant,
    claims: bool,
}

impl Recorder {
    pub fn new(config: Config) -> Recorder {
        Recorder {
            report: Report {
                schema: REPORT_SCHEMA,
                tool: Tool {
                    name: "polargrass",
                    version: tool_version(),
                },
                config,
                models: Vec::new(),
                verdict: Verdict::Info,
                checks: Vec::new(),
                data: BTreeMap::new(),
                timings: BTreeMap::new(),
            },
            started: Instant::now(),
            claims: false,
        }
    }

    pub fn model(&mut self, info: ModelInfo) {
        self.report.models.push(info);
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: Option<String>) -> bool {
        self.claims = true;
        self.report.checks.push(Check {
            name: name.into(),
            pass,
            detail,
        });
        pass
    }

    pub fn data(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.report.data.insert(key.to_string(), v);
    }

    /// Runs `f` and records its wall time under `key`.
    pub fn time<T>(&mut self, key: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.report.timings.insert(key.to_string(), t.elapsed().as_secs_f64());
        out
    }

    pub fn finish(mut self) -> Report {
        self.report.timings.insert("total".into(), self.started.elapsed().as_secs_f64());
        self.report.verdict = if !self.claims {
            Verdict::Info
        } else if self.report.checks.iter().all(|c| c.pass) {
            Verdict::Verified
        } else {
            Verdict::Refuted
        };
        self.report
    }
}
