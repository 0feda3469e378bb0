//! Run manifests: a flat `key = value` record written next to every file
//! output, echoing the effective configuration, the wall time, and the list
//! of produced files. On success each listed file is verified to exist and
//! be non-empty before the manifest itself lands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use super::CliError;

pub(crate) struct Manifest {
    entries: Vec<(String, String)>,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl Manifest {
    pub fn new(command: &str) -> Manifest {
        let mut m = Manifest {
            entries: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        };
        m.push("artifact", format!("qcorr {}", env!("CARGO_PKG_VERSION")));
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn note(&mut self, text: impl std::fmt::Display) {
        self.push("note", text);
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    fn render(&self, status: &str) -> String {
        let mut text = String::new();
        for (key, value) in &self.entries {
            text.push_str(&format!("{key} = {value}\n"));
        }
        for out in &self.outputs {
            text.push_str(&format!("output = {}\n", out.display()));
        }
        text.push_str(&format!(
            "wall_seconds = {:.3}\n",
            self.started.elapsed().as_secs_f64()
        ));
        text.push_str(&format!("status = {status}\n"));
        text
    }

    /// Verify every listed output, then write the manifest with status ok.
    pub fn write_ok(self, path: &Path) -> Result<(), CliError> {
        for out in &self.outputs {
            let len = std::fs::metadata(out)
                .map(|m| m.len())
                .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            if len == 0 {
                return Err(CliError::Io(format!("{}: output is empty", out.display())));
            }
        }
        write_text(path, &self.render("ok"))
    }

    /// Record an aborted campaign. Outputs written so far are listed but not
    /// verified; the caller still reports the failure.
    pub fn write_aborted(mut self, path: &Path, reason: &str) -> Result<(), CliError> {
        self.note(reason);
        write_text(path, &self.render("aborted"))
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
