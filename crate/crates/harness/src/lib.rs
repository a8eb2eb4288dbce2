//! Seeded experiment runner behind the `fcoupling` command.
//!
//! Each experiment writes one CSV row per replica (with a commented schema
//! header) and a JSON summary. Replica seeds depend only on the root seed,
//! `n` and the replica index, so reruns are byte-identical.

pub mod experiments;
pub mod seed;
pub mod stats;
pub mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub use experiments::{run_experiment, Experiment, ExperimentConfig, ExperimentOutput};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] fcoupling::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl HarnessError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(e) if e.is_budget() => 3,
            HarnessError::Core(fcoupling::Error::NeverHit | fcoupling::Error::InconsistentState(_)) => 1,
            HarnessError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

/// `<out>.csv`, `<out>.json` and, on request, `<out>.dat`.
pub fn output_paths(out: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let with = |ext: &str| {
        let mut s = out.as_os_str().to_owned();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    (with("csv"), with("json"), with("dat"))
}

pub fn write_outputs(output: &ExperimentOutput, out: &Path, gnuplot: bool) -> Result<()> {
    let (csv, json, dat) = output_paths(out);
    output.table.write_csv(BufWriter::new(File::create(csv)?))?;
    let mut w = BufWriter::new(File::create(json)?);
    serde_json::to_writer_pretty(&mut w, &output.summary).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    if gnuplot {
        let mut w = BufWriter::new(File::create(dat)?);
        output.table.write_gnuplot(&mut w)?;
        w.flush()?;
    }
    Ok(())
}
