//! Trace export: one `x,u` CSV per saved state plus a manifest.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{Boundary, GridFunction};
use crate::schemes::SolveTrace;

/// Name of the manifest written next to the state files.
pub const MANIFEST: &str = "manifest.csv";

/// One manifest row.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub index: usize,
    pub step: usize,
    pub t: f64,
    pub file: String,
}

/// File name of the `index`-th saved state at time `t`.
pub fn state_file_name(index: usize, t: f64) -> String {
    format!("state_{index:05}_t{t:.9e}.csv")
}

/// Writes every saved state of `trace` into `dir` (created if missing) and a
/// manifest with header `index,step,t,file`. Returns the manifest path.
pub fn write_trace(trace: &SolveTrace, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let manifest_path = dir.join(MANIFEST);
    let mut manifest = BufWriter::new(File::create(&manifest_path)?);
    writeln!(manifest, "index,step,t,file")?;
    for (k, (state, (&t, &step))) in trace.states.iter().zip(trace.times.iter().zip(&trace.step_indices)).enumerate() {
        let name = state_file_name(k, t);
        let mut out = BufWriter::new(File::create(dir.join(&name))?);
        state.write_csv(&mut out)?;
        out.flush()?;
        writeln!(manifest, "{k},{step},{t:.16e},{name}")?;
    }
    manifest.flush()?;
    Ok(manifest_path)
}

/// Parses a manifest written by [`write_trace`].
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if n == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Precondition(format!("malformed manifest line {}: `{line}`", n + 1));
        let mut parts = line.splitn(4, ',');
        let mut next = || parts.next().ok_or_else(bad);
        let index = next()?.parse().map_err(|_| bad())?;
        let step = next()?.parse().map_err(|_| bad())?;
        let t = next()?.parse().map_err(|_| bad())?;
        let file = next()?.to_string();
        out.push(ManifestEntry { index, step, t, file });
    }
    Ok(out)
}

/// Reads the state file of a manifest entry in `dir`.
pub fn read_state(dir: &Path, entry: &ManifestEntry, boundary: Boundary) -> Result<GridFunction> {
    GridFunction::read_csv(BufReader::new(File::open(dir.join(&entry.file))?), boundary)
}
