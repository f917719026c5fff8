//! Experiment harness: configuration files, ensemble orchestration, CSV
//! tables and run manifests on top of `sbelab-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{parse_config, parse_str, ExperimentKind, ExperimentSpec};
pub use error::{HarnessError, Result, EXIT_BLOW_UP, EXIT_CONFIG, EXIT_GATE, EXIT_OK};
pub use experiments::run_experiment;
pub use output::{Gate, Outcome};

/// Parses `config`, applies the command-line overrides, runs the experiment
/// and writes its tables and manifest.
pub fn execute(kind: ExperimentKind, config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<(Outcome, Vec<PathBuf>)> {
    let mut spec = parse_config(config, kind)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(o) = out {
        spec.out = o;
    }
    let start = Instant::now();
    let outcome = run_experiment(&spec)?;
    let files = output::write_run(&spec, &outcome, start.elapsed())?;
    Ok((outcome, files))
}

pub fn exit_code(outcome: &Outcome) -> i32 {
    if outcome.passed() {
        EXIT_OK
    } else {
        EXIT_GATE
    }
}
