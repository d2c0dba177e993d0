//! Run reports in text and machine (JSON) form. Field order is fixed by the
//! struct layout, so machine output is byte-stable for a given config.

use std::fmt::Write as _;

use chowkit::murre::Check;
use chowkit::ChowError;
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig, Task};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub variety: String,
    pub tasks: Vec<Task>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatumSummary {
    pub name: String,
    pub dimension: usize,
    pub ranks: Vec<usize>,
    pub kunneth: bool,
    pub cellular: bool,
    pub blowup_stages: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub task: String,
    pub name: String,
    pub status: &'static str,
    pub witness: Option<String>,
}

impl CheckRecord {
    pub fn from_check(task: Task, c: Check) -> CheckRecord {
        CheckRecord {
            task: task.name().to_string(),
            name: c.name,
            status: if c.passed { "pass" } else { "fail" },
            witness: c.witness,
        }
    }

    pub fn build_failure(err: &ChowError) -> CheckRecord {
        CheckRecord {
            task: "build".into(),
            name: "construct datum and decomposition".into(),
            status: "fail",
            witness: Some(err.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Timing {
    pub total_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub datum: Option<DatumSummary>,
    pub checks: Vec<CheckRecord>,
    pub timing: Option<Timing>,
}

impl Report {
    pub fn new(cfg: &RunConfig) -> Report {
        Report {
            config: ConfigEcho {
                variety: cfg.variety.to_string(),
                tasks: cfg.tasks.clone(),
                seed: cfg.seed,
            },
            datum: None,
            checks: Vec::new(),
            timing: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckRecord::passed)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Machine => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Text => self.text(),
        }
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let tasks: Vec<&str> = self.config.tasks.iter().map(|t| t.name()).collect();
        writeln!(s, "variety: {}", self.config.variety).unwrap();
        writeln!(s, "tasks:   {}", tasks.join(", ")).unwrap();
        writeln!(s, "seed:    {}", self.config.seed).unwrap();
        if let Some(d) = &self.datum {
            write_datum(&mut s, d);
        }
        writeln!(s).unwrap();
        for c in &self.checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            write!(s, "{status} [{}] {}", c.task, c.name).unwrap();
            if let Some(w) = &c.witness {
                write!(s, ": {w}").unwrap();
            }
            writeln!(s).unwrap();
        }
        let passed = self.checks.iter().filter(|c| c.passed()).count();
        writeln!(s, "\n{passed}/{} checks passed", self.checks.len()).unwrap();
        if let Some(t) = &self.timing {
            writeln!(s, "elapsed: {} ms", t.total_ms).unwrap();
        }
        s
    }
}

pub(crate) fn write_datum(s: &mut String, d: &DatumSummary) {
    writeln!(s, "datum:   {} (dimension {}, ranks {:?})", d.name, d.dimension, d.ranks).unwrap();
    let mut flags = Vec::new();
    if d.kunneth {
        flags.push("Künneth".to_string());
    }
    if d.cellular {
        flags.push("cellular".to_string());
    }
    match d.blowup_stages {
        0 => {}
        1 => flags.push("1 blow-up stage".to_string()),
        n => flags.push(format!("{n} blow-up stages")),
    }
    if !flags.is_empty() {
        writeln!(s, "         {}", flags.join(", ")).unwrap();
    }
}

/// Output of the `describe` subcommand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Description {
    pub config: ConfigEcho,
    pub datum: Option<DatumSummary>,
    pub labels: Vec<Vec<String>>,
    pub projectors: Vec<String>,
    pub error: Option<String>,
}

impl Description {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Machine => {
                let mut s = serde_json::to_string_pretty(self).expect("description serializes");
                s.push('\n');
                s
            }
            OutputFormat::Text => {
                let mut s = String::new();
                writeln!(s, "variety: {}", self.config.variety).unwrap();
                if let Some(d) = &self.datum {
                    write_datum(&mut s, d);
                }
                for (i, l) in self.labels.iter().enumerate() {
                    writeln!(s, "CH^{i}: {}", l.join(", ")).unwrap();
                }
                for (i, p) in self.projectors.iter().enumerate() {
                    writeln!(s, "π_{i} = {p}").unwrap();
                }
                if let Some(e) = &self.error {
                    writeln!(s, "error: {e}").unwrap();
                }
                s
            }
        }
    }
}
