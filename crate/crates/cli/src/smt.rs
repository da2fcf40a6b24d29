//! Running SMT-LIB scripts through an external solver.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use anyhow::{bail, Context, Result};

/// Result of one `(check-sat)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Sat,
    Unsat,
}

/// Feeds `script` to `solver` on stdin. z3 needs `-in` for that; other
/// solvers read stdin when given no file.
pub fn run(solver: &Path, script: &str) -> Result<Answer> {
    let is_z3 = solver.file_stem().is_some_and(|s| s.to_string_lossy().starts_with("z3"));
    let mut cmd = Command::new(solver);
    if is_z3 {
        cmd.arg("-in");
    }
    let mut child = cmd
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .with_context(|| format!("cannot run SMT solver {}", solver.display()))?;
    child
        .stdin
        .take()
        .expect("stdin is piped")
        .write_all(script.as_bytes())?;
    let out = child.wait_with_output()?;
    let text = String::from_utf8_lossy(&out.stdout);
    match text.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("sat") => Ok(Answer::Sat),
        Some("unsat") => Ok(Answer::Unsat),
        other => bail!(
            "solver {} answered {:?}: {}",
            solver.display(),
            other.unwrap_or(""),
            String::from_utf8_lossy(&out.stderr).trim()
        ),
    }
}
