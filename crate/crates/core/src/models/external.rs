//! Predictor backed by an external command.
//!
//! Protocol, one process launch per call:
//!
//! ```text
//! stdin:  #predict            stdin:  #fit
//!         x11,x12,...,x1k             x11,...,x1k,y1
//!         ...                         ...
//! stdout: one decimal prediction per input row, exactly as many lines
//!         as rows (predict mode); ignored in fit mode
//! exit:   0
//! ```
//!
//! Rows are header-less comma-separated values written with shortest
//! round-trip float formatting. The command string is run through `sh -c`.

use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::matrix::{format_float, Matrix};

#[derive(Debug)]
pub struct ExternalModel {
    command: String,
    // one subprocess at a time
    queue: Mutex<()>,
}

impl Clone for ExternalModel {
    fn clone(&self) -> Self {
        ExternalModel::new(self.command.clone())
    }
}

pub fn encode_payload(mode: &str, m: &Matrix, target: Option<&[f64]>) -> String {
    let mut s = String::with_capacity(m.rows() * m.cols() * 20 + 16);
    s.push('#');
    s.push_str(mode);
    s.push('\n');
    for (r, row) in m.iter_rows().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                s.push(',');
            }
            s.push_str(&format_float(*v));
        }
        if let Some(t) = target {
            s.push(',');
            s.push_str(&format_float(t[r]));
        }
        s.push('\n');
    }
    s
}

/// Parses predict-mode output; blank trailing lines are not tolerated.
pub fn decode_predictions(stdout: &str, expected: usize) -> Result<Vec<f64>> {
    let lines: Vec<&str> = stdout.lines().collect();
    if lines.len() != expected {
        return Err(Error::External(format!(
            "expected {expected} output lines, got {}",
            lines.len()
        )));
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let v: f64 = l
                .trim()
                .parse()
                .map_err(|_| Error::External(format!("line {}: malformed prediction {l:?}", i + 1)))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::External(format!("line {}: non-finite prediction", i + 1)))
            }
        })
        .collect()
}

impl ExternalModel {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalModel {
            command: command.into(),
            queue: Mutex::new(()),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn fit(&self, x: &Matrix, y: &[f64]) -> Result<()> {
        self.call(&encode_payload("fit", x, Some(y)))?;
        Ok(())
    }

    pub fn predict(&self, m: &Matrix) -> Result<Vec<f64>> {
        let out = self.call(&encode_payload("predict", m, None))?;
        decode_predictions(&out, m.rows())
    }

    fn call(&self, payload: &str) -> Result<String> {
        let _guard = self.queue.lock().unwrap_or_else(|e| e.into_inner());
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::External(format!("cannot launch {:?}: {e}", self.command)))?;
        let mut stdin = child.stdin.take().expect("stdin piped");
        let output = std::thread::scope(|s| {
            // the child may exit without draining stdin; a broken pipe then
            // surfaces through the exit status instead
            s.spawn(move || {
                let _ = stdin.write_all(payload.as_bytes());
            });
            child.wait_with_output()
        })
        .map_err(|e| Error::External(format!("{:?}: {e}", self.command)))?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(Error::External(format!(
                "{:?} exited with {}: {}",
                self.command,
                output.status,
                stderr.trim()
            )));
        }
        String::from_utf8(output.stdout)
            .map_err(|_| Error::External(format!("{:?} wrote non-UTF-8 output", self.command)))
    }
}
