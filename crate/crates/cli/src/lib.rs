//! Config-driven verification runs over [`chowkit`] data.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{load_config, parse_config, ConfigError, OutputFormat, RunConfig, Task, VarietySpec};
pub use pipeline::{build, run, RunOptions, DEFAULT_FUZZ_CASES};
pub use report::{Description, Report};

/// Builds the configured variety and lists its basis and projectors.
pub fn describe(cfg: &RunConfig) -> Description {
    let mut out = Description {
        config: Report::new(cfg).config,
        datum: None,
        labels: Vec::new(),
        projectors: Vec::new(),
        error: None,
    };
    match build(&cfg.variety) {
        Ok(built) => {
            out.datum = Some(pipeline::summarize(&built));
            out.labels = (0..=built.datum.dim()).map(|i| built.datum.labels(i).to_vec()).collect();
            out.projectors = built.decomposition.projectors().iter().map(|p| p.to_string()).collect();
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}
