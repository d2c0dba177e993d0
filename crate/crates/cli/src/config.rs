//! Run configuration: `key = value` entries separated by newlines or `;`,
//! with `#` comments.
//!
//! ```text
//! variety = blowup(quotient(product(projective_space(1), projective_space(1)), swap), 2, -1)
//! tasks = [verify-ck, poincare, murre-B, roundtrip]
//! seed = 42
//! ```

use std::fmt;
use std::str::FromStr;

use chowkit::exactlin::{fmt_rational, Rational};
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid value for `{path}`: {msg}")]
    Semantic { path: String, msg: String },
    #[error("cannot read config: {0}")]
    Io(String),
}

pub const KNOWN_ACTIONS: [&str; 2] = ["swap", "trivial"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    Swap,
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarietySpec {
    ProjectiveSpace(usize),
    Product(Box<VarietySpec>, Box<VarietySpec>),
    Quotient(Box<VarietySpec>, Action),
    Blowup {
        base: Box<VarietySpec>,
        points: usize,
        multiplier: Rational,
    },
}

impl fmt::Display for VarietySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarietySpec::ProjectiveSpace(n) => write!(f, "projective_space({n})"),
            VarietySpec::Product(a, b) => write!(f, "product({a}, {b})"),
            VarietySpec::Quotient(s, a) => write!(f, "quotient({s}, {})", a.name()),
            VarietySpec::Blowup {
                base,
                points,
                multiplier,
            } => write!(f, "blowup({base}, {points}, {})", fmt_rational(multiplier)),
        }
    }
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Swap => "swap",
            Action::Trivial => "trivial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Task {
    #[serde(rename = "verify-ck")]
    VerifyCk,
    #[serde(rename = "poincare")]
    Poincare,
    #[serde(rename = "murre-B")]
    MurreB,
    #[serde(rename = "murre-Bprime")]
    MurreBprime,
    #[serde(rename = "murre-C")]
    MurreC,
    #[serde(rename = "murre-D")]
    MurreD,
    #[serde(rename = "lift")]
    Lift,
    #[serde(rename = "blowdown")]
    Blowdown,
    #[serde(rename = "roundtrip")]
    Roundtrip,
    #[serde(rename = "oracle-fuzz")]
    OracleFuzz,
}

impl Task {
    pub const ALL: [Task; 10] = [
        Task::VerifyCk,
        Task::Poincare,
        Task::MurreB,
        Task::MurreBprime,
        Task::MurreC,
        Task::MurreD,
        Task::Lift,
        Task::Blowdown,
        Task::Roundtrip,
        Task::OracleFuzz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::VerifyCk => "verify-ck",
            Task::Poincare => "poincare",
            Task::MurreB => "murre-B",
            Task::MurreBprime => "murre-Bprime",
            Task::MurreC => "murre-C",
            Task::MurreD => "murre-D",
            Task::Lift => "lift",
            Task::Blowdown => "blowdown",
            Task::Roundtrip => "roundtrip",
            Task::OracleFuzz => "oracle-fuzz",
        }
    }
}

impl FromStr for Task {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL.into_iter().find(|t| t.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub variety: VarietySpec,
    pub tasks: Vec<Task>,
    pub seed: u64,
    pub output_format: OutputFormat,
}

/// A cursor over the config text that tracks line and column (1-based).
struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(text: &str) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn location(&self, pos: usize) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &c in &self.chars[..pos.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn error_at(&self, pos: usize, msg: impl Into<String>) -> ConfigError {
        let (line, col) = self.location(pos);
        ConfigError::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn error(&self, msg: impl Into<String>) -> ConfigError {
        self.error_at(self.pos, msg)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    /// Skips spaces, tabs and comments, but not entry separators.
    fn skip_inline(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.pos += 1;
                }
            } else if c == ' ' || c == '\t' || c == '\r' {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Skips all whitespace including newlines, used inside brackets.
    fn skip_all(&mut self) {
        loop {
            self.skip_inline();
            if self.peek() == Some('\n') {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, want: char) -> Result<(), ConfigError> {
        self.skip_all();
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(match self.peek() {
                Some(c) => format!("expected `{want}`, found `{c}`"),
                None => format!("expected `{want}`, found end of input"),
            }))
        }
    }

    fn word(&mut self) -> Result<(usize, String), ConfigError> {
        self.skip_all();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '/')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(match self.peek() {
                Some(c) => format!("unexpected `{c}`"),
                None => "unexpected end of input".to_string(),
            }));
        }
        Ok((start, self.chars[start..self.pos].iter().collect()))
    }

    fn integer(&mut self) -> Result<usize, ConfigError> {
        let (start, w) = self.word()?;
        w.parse()
            .map_err(|_| self.error_at(start, format!("expected a non-negative integer, found `{w}`")))
    }

    fn rational(&mut self) -> Result<Rational, ConfigError> {
        let (start, w) = self.word()?;
        parse_rational(&w).ok_or_else(|| self.error_at(start, format!("expected a rational number, found `{w}`")))
    }

    fn variety(&mut self, path: &str, semantic: &mut Vec<ConfigError>) -> Result<VarietySpec, ConfigError> {
        let (start, head) = self.word()?;
        match head.as_str() {
            "projective_space" => {
                self.expect('(')?;
                let n = self.integer()?;
                self.expect(')')?;
                Ok(VarietySpec::ProjectiveSpace(n))
            }
            "product" => {
                self.expect('(')?;
                let a = self.variety(&format!("{path}.left"), semantic)?;
                self.expect(',')?;
                let b = self.variety(&format!("{path}.right"), semantic)?;
                self.expect(')')?;
                Ok(VarietySpec::Product(Box::new(a), Box::new(b)))
            }
            "quotient" => {
                self.expect('(')?;
                let base = self.variety(&format!("{path}.base"), semantic)?;
                self.expect(',')?;
                let (_, name) = self.word()?;
                self.expect(')')?;
                let action = match name.as_str() {
                    "swap" => Action::Swap,
                    "trivial" => Action::Trivial,
                    other => {
                        semantic.push(ConfigError::Semantic {
                            path: format!("{path}.action"),
                            msg: format!("unknown action `{other}` (known actions: {})", KNOWN_ACTIONS.join(", ")),
                        });
                        Action::Trivial
                    }
                };
                if action == Action::Swap && !matches!(&base, VarietySpec::Product(a, b) if a == b) {
                    semantic.push(ConfigError::Semantic {
                        path: format!("{path}.action"),
                        msg: format!("`swap` needs a product of two equal varieties, found {base}"),
                    });
                }
                Ok(VarietySpec::Quotient(Box::new(base), action))
            }
            "blowup" => {
                self.expect('(')?;
                let base = self.variety(&format!("{path}.base"), semantic)?;
                self.expect(',')?;
                let points = self.integer()?;
                self.expect(',')?;
                let multiplier = self.rational()?;
                self.expect(')')?;
                if multiplier.is_zero() {
                    semantic.push(ConfigError::Semantic {
                        path: format!("{path}.multiplier"),
                        msg: "the blow-up multiplier must be nonzero".into(),
                    });
                }
                Ok(VarietySpec::Blowup {
                    base: Box::new(base),
                    points,
                    multiplier,
                })
            }
            other => Err(self.error_at(
                start,
                format!("unknown variety `{other}` (expected projective_space, product, quotient or blowup)"),
            )),
        }
    }

    fn task_list(&mut self, semantic: &mut Vec<ConfigError>) -> Result<Vec<Task>, ConfigError> {
        self.expect('[')?;
        let mut tasks = Vec::new();
        self.skip_all();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok(tasks);
        }
        loop {
            let (_, name) = self.word()?;
            match name.parse::<Task>() {
                Ok(t) => tasks.push(t),
                Err(()) => semantic.push(ConfigError::Semantic {
                    path: format!("tasks[{}]", tasks.len()),
                    msg: format!(
                        "unknown task `{name}` (known tasks: {})",
                        Task::ALL.map(Task::name).join(", ")
                    ),
                }),
            }
            self.skip_all();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    return Ok(tasks);
                }
                _ => return Err(self.error("expected `,` or `]` in task list")),
            }
        }
    }

    /// After a value, only a separator, comment or end of input may follow.
    fn end_of_entry(&mut self) -> Result<(), ConfigError> {
        self.skip_inline();
        match self.peek() {
            None => Ok(()),
            Some('\n') | Some(';') => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.error(format!("unexpected `{c}` after value"))),
        }
    }

    fn skip_separators(&mut self) {
        loop {
            self.skip_all();
            if self.peek() == Some(';') {
                self.pos += 1;
            } else {
                break;
            }
        }
    }
}

fn parse_rational(w: &str) -> Option<Rational> {
    let (n, d) = match w.split_once('/') {
        Some((n, d)) => (n, d),
        None => (w, "1"),
    };
    let n: num_bigint::BigInt = n.parse().ok()?;
    let d: num_bigint::BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Parses and validates a configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cur = Cursor::new(text);
    let mut semantic = Vec::new();
    let mut variety = None;
    let mut tasks = None;
    let mut seed = None;
    let mut format = None;
    loop {
        cur.skip_separators();
        if cur.peek().is_none() {
            break;
        }
        let (start, key) = cur.word()?;
        cur.expect('=')?;
        let duplicate = match key.as_str() {
            "variety" => variety.replace(cur.variety("variety", &mut semantic)?).is_some(),
            "tasks" => tasks.replace(cur.task_list(&mut semantic)?).is_some(),
            "seed" => {
                let (pos, w) = cur.word()?;
                let value: u64 = w
                    .parse()
                    .map_err(|_| cur.error_at(pos, format!("expected an unsigned integer seed, found `{w}`")))?;
                seed.replace(value).is_some()
            }
            "format" => {
                let (pos, w) = cur.word()?;
                let value = match w.as_str() {
                    "text" => OutputFormat::Text,
                    "machine" => OutputFormat::Machine,
                    _ => return Err(cur.error_at(pos, format!("expected `text` or `machine`, found `{w}`"))),
                };
                format.replace(value).is_some()
            }
            other => {
                return Err(cur.error_at(
                    start,
                    format!("unknown key `{other}` (expected variety, tasks, seed or format)"),
                ))
            }
        };
        if duplicate {
            return Err(cur.error_at(start, format!("duplicate key `{key}`")));
        }
        cur.end_of_entry()?;
    }
    if let Some(e) = semantic.into_iter().next() {
        return Err(e);
    }
    let variety = variety.ok_or_else(|| ConfigError::Semantic {
        path: "variety".into(),
        msg: "missing".into(),
    })?;
    let tasks = tasks.ok_or_else(|| ConfigError::Semantic {
        path: "tasks".into(),
        msg: "missing".into(),
    })?;
    if tasks.is_empty() {
        return Err(ConfigError::Semantic {
            path: "tasks".into(),
            msg: "the task list must not be empty".into(),
        });
    }
    Ok(RunConfig {
        variety,
        tasks,
        seed: seed.unwrap_or(0),
        output_format: format.unwrap_or_default(),
    })
}

/// Reads a config from a file; arguments that are not files but look like
/// config text (contain `=`) are parsed inline.
pub fn load_config(source: &str) -> Result<RunConfig, ConfigError> {
    match std::fs::read_to_string(source) {
        Ok(text) => parse_config(&text),
        Err(_) if source.contains('=') => parse_config(source),
        Err(e) => Err(ConfigError::Io(format!("{source}: {e}"))),
    }
}
