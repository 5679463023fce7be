//! Workload plumbing for the command-line front end: file formats,
//! point-set generation, trace replay, and benchmarking.
//!
//! Everything here is deterministic for fixed inputs and seeds, and all
//! floating-point values are printed with 17 significant digits so that
//! generated files and result logs round-trip exactly.
//!
//! - [`points`]: the point-file (`dim D` header) and matrix-file
//!   (`matrix n` header) formats.
//! - [`config`]: the `key=value` run configuration.
//! - [`gen`]: seeded point-set generators.
//! - [`trace`]: the plain-text op trace format and its replay loop,
//!   which emits one JSON record per op.
//! - [`bench`]: wall-clock measurements of updates and queries as CSV.

pub mod bench;
pub mod config;
pub mod gen;
pub mod points;
pub mod trace;

use thiserror::Error;

/// Errors from parsing harness inputs or replaying a trace.
#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("op at line {line} failed: {msg}")]
    Run { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

/// Prints a float with 17 significant digits (exact round-trip).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal JSON string escaping (quotes, backslashes, control bytes).
pub(crate) fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.02e23, -7.25e-300, 0.0, 12345.678901234567] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn escaping_handles_specials() {
        assert_eq!(json_escape(r#"a"b\c"#), r#"a\"b\\c"#);
        assert_eq!(json_escape("x\ny"), "x\\ny");
    }
}
