//! Deterministic report bodies.
//!
//! A report body is everything a command prints to stdout: the command name,
//! a digest of its inputs, the seed and the structured results. Re-running a
//! command with identical inputs and seed must reproduce the body byte for
//! byte, so wall time is written to stderr instead.

use sha2::{Digest, Sha256};

/// Floating-point rendering with 17 significant digits, enough for exact
/// `f64` re-ingestion.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// SHA-256 digest of the spec bytes and the canonical argument string.
pub fn inputs_digest(spec_bytes: &[u8], canonical_args: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(spec_bytes);
    hasher.update([0u8]);
    hasher.update(canonical_args.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Accumulates the report body.
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    /// Starts a report with the standard header.
    pub fn new(command: &str, spec_path: &str, digest: &str, seed: u64) -> Self {
        Self {
            lines: vec![
                format!("command: {command}"),
                format!("spec: {spec_path}"),
                format!("inputs-digest: {digest}"),
                format!("seed: {seed}"),
                "---".into(),
            ],
        }
    }

    /// Appends one line.
    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    /// The full body.
    pub fn body(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}
