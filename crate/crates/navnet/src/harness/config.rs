//! Run configuration: a plain-text `key=value` file.
//!
//! Recognized keys (all optional):
//!
//! - `gamma` — navigation-list expansion constant (default 4).
//! - `backend` — `euclidean` (default) or `matrix`.
//! - `matrix` — path to a matrix file; required when `backend=matrix`.
//! - `check_oracle` — `true`/`false`; cross-check query answers against
//!   brute-force references where instance sizes permit (default false).
//! - `guess_budget` — cap on the candidate-assignment enumeration used by
//!   the Euclidean k-center solver (default 1000000).
//! - `full_rebuild` — `true`/`false`; rebuild the net from scratch on
//!   every delete instead of repairing it in place (default false).
//!
//! Blank lines and lines starting with `#` are ignored.

use super::HarnessError;
use crate::kcenter::DEFAULT_GUESS_BUDGET;

/// Which distance backend a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Euclidean,
    Matrix,
}

/// Parsed run configuration with defaults applied.
#[derive(Clone, Debug)]
pub struct Config {
    pub gamma: f64,
    pub backend: BackendKind,
    pub matrix_path: Option<String>,
    pub check_oracle: bool,
    pub guess_budget: u64,
    pub full_rebuild: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            gamma: 4.0,
            backend: BackendKind::Euclidean,
            matrix_path: None,
            check_oracle: false,
            guess_budget: DEFAULT_GUESS_BUDGET,
            full_rebuild: false,
        }
    }
}

/// Parses a configuration file; unknown keys and malformed values are
/// reported with their line number.
pub fn parse_config(text: &str) -> Result<Config, HarnessError> {
    let mut cfg = Config::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (key, value) = t.split_once('=').ok_or_else(|| HarnessError::Parse {
            line,
            msg: format!("expected `key=value`, got `{t}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "gamma" => cfg.gamma = parse_value(value, line, "gamma")?,
            "backend" => {
                cfg.backend = match value {
                    "euclidean" => BackendKind::Euclidean,
                    "matrix" => BackendKind::Matrix,
                    other => {
                        return Err(HarnessError::Parse {
                            line,
                            msg: format!("backend must be `euclidean` or `matrix`, got `{other}`"),
                        })
                    }
                }
            }
            "matrix" => cfg.matrix_path = Some(value.to_string()),
            "check_oracle" => cfg.check_oracle = parse_bool(value, line, "check_oracle")?,
            "guess_budget" => cfg.guess_budget = parse_value(value, line, "guess_budget")?,
            "full_rebuild" => cfg.full_rebuild = parse_bool(value, line, "full_rebuild")?,
            other => {
                return Err(HarnessError::Parse {
                    line,
                    msg: format!("unknown configuration key `{other}`"),
                })
            }
        }
    }
    if cfg.backend == BackendKind::Matrix && cfg.matrix_path.is_none() {
        return Err(HarnessError::Invalid(
            "backend=matrix requires a `matrix=<path>` entry".into(),
        ));
    }
    Ok(cfg)
}

fn parse_value<T: std::str::FromStr>(
    value: &str,
    line: usize,
    what: &str,
) -> Result<T, HarnessError> {
    value.parse().map_err(|_| HarnessError::Parse {
        line,
        msg: format!("invalid {what} `{value}`"),
    })
}

fn parse_bool(value: &str, line: usize, what: &str) -> Result<bool, HarnessError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(HarnessError::Parse {
            line,
            msg: format!("{what} must be `true` or `false`, got `{other}`"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_apply() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.gamma, 4.0);
        assert_eq!(cfg.backend, BackendKind::Euclidean);
        assert!(!cfg.check_oracle);
        assert_eq!(cfg.guess_budget, DEFAULT_GUESS_BUDGET);
        assert!(!cfg.full_rebuild);
    }

    #[test]
    fn full_config_parses() {
        let text = "# comment\n\ngamma = 8\nbackend=matrix\nmatrix=dists.txt\ncheck_oracle=true\nguess_budget=4096\nfull_rebuild=true\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.gamma, 8.0);
        assert_eq!(cfg.backend, BackendKind::Matrix);
        assert_eq!(cfg.matrix_path.as_deref(), Some("dists.txt"));
        assert!(cfg.check_oracle);
        assert_eq!(cfg.guess_budget, 4096);
        assert!(cfg.full_rebuild);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(
            parse_config("speed=11\n"),
            Err(HarnessError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("gamma\n"),
            Err(HarnessError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("gamma=fast\n"),
            Err(HarnessError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("\n\ncheck_oracle=yes\n"),
            Err(HarnessError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_config("backend=matrix\n"),
            Err(HarnessError::Invalid(_))
        ));
    }
}
