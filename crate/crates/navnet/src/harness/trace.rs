//! Plain-text op traces and their replay.
//!
//! One op per line:
//!
//! ```text
//! INSERT <id> <x1> ... <xD>     (matrix backend: INSERT <id> <row>)
//! DELETE <id>
//! AFN <eps> <m> <m*D coords>    (matrix backend: <m> row indices)
//! GREEDY <k> <eps>
//! MEB <eps>
//! KCENTER <k> <eps>
//! VERIFY
//! ```
//!
//! Blank lines and `#` comments are ignored. A malformed line aborts
//! parsing with its line number; an op that fails at run time (unknown
//! id, wrong arity for the backend, solver error) aborts the replay the
//! same way.
//!
//! Replay emits exactly one JSON record per op, with fixed key order, so
//! the same trace and configuration always produce byte-identical
//! output. Query records carry an `oracle` field: `"skipped"` unless
//! `check_oracle` is set and the instance is within the brute-force
//! size gates, otherwise `"pass"`/`"fail"` against the exact reference.
//! Solver records also carry a `coverage` field re-checking the claimed
//! radius against every live point. Oracle gates:
//!
//! - furthest-neighbor: always checked.
//! - `GREEDY`: at most 40 live points and k at most 3.
//! - `MEB`: Euclidean, dimension at most 3, at most 120 live points,
//!   eps at most 1 (the approximation claim targets eps in (0, 1]).
//! - `KCENTER`: Euclidean, dimension at most 3, eps at least 1, and
//!   either at most 16 points with k at most 2, or at most 12 points
//!   with k = 3.

use super::config::{BackendKind, Config};
use super::{fmt_f64, json_escape, HarnessError};
use crate::afn::{afn, QueryStats};
use crate::kcenter::{
    euclidean_kcenter_with_budget, greedy_kcenter, meb, verify_coverage, Centers, CoverSolution,
    SolverStats,
};
use crate::metric::{MetricBackend, MetricPoint, PointId, QuerySet};
use crate::net::NavigatingNet;
use crate::oracle::{fn_exact, kcenter_exact_euclidean, kcenter_exact_metric, meb_exact};

/// Multiplicative slack applied to every guarantee comparison so that
/// benign last-bit rounding cannot flip a verdict.
const GUARANTEE_SLACK: f64 = 1.0 + 1e-9;

/// A single trace op.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceOp {
    Insert { id: u64, values: Vec<f64> },
    Delete { id: u64 },
    Afn { eps: f64, m: usize, values: Vec<f64> },
    Greedy { k: usize, eps: f64 },
    Meb { eps: f64 },
    Kcenter { k: usize, eps: f64 },
    Verify,
}

/// An op tagged with its 1-based source line for error reporting.
#[derive(Clone, Debug)]
pub struct TraceLine {
    pub line: usize,
    pub op: TraceOp,
}

/// Parses a trace file; the first malformed line aborts with its number.
pub fn parse_trace(text: &str) -> Result<Vec<TraceLine>, HarnessError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut tok = t.split_whitespace();
        let word = tok.next().expect("non-empty line has a first token");
        let op = match word {
            "INSERT" => {
                let id = num::<u64>(&mut tok, line, "point id")?;
                let values = rest_f64(&mut tok, line)?;
                if values.is_empty() {
                    return Err(HarnessError::Parse {
                        line,
                        msg: "INSERT needs at least one value after the id".into(),
                    });
                }
                TraceOp::Insert { id, values }
            }
            "DELETE" => {
                let id = num::<u64>(&mut tok, line, "point id")?;
                end(&mut tok, line)?;
                TraceOp::Delete { id }
            }
            "AFN" => {
                let eps = num::<f64>(&mut tok, line, "epsilon")?;
                let m = num::<usize>(&mut tok, line, "query-set size")?;
                if m == 0 {
                    return Err(HarnessError::Parse {
                        line,
                        msg: "query-set size must be at least 1".into(),
                    });
                }
                let values = rest_f64(&mut tok, line)?;
                if values.is_empty() {
                    return Err(HarnessError::Parse {
                        line,
                        msg: "AFN needs query values after the size".into(),
                    });
                }
                TraceOp::Afn { eps, m, values }
            }
            "GREEDY" => {
                let k = num::<usize>(&mut tok, line, "center count")?;
                let eps = num::<f64>(&mut tok, line, "epsilon")?;
                end(&mut tok, line)?;
                TraceOp::Greedy { k, eps }
            }
            "MEB" => {
                let eps = num::<f64>(&mut tok, line, "epsilon")?;
                end(&mut tok, line)?;
                TraceOp::Meb { eps }
            }
            "KCENTER" => {
                let k = num::<usize>(&mut tok, line, "center count")?;
                let eps = num::<f64>(&mut tok, line, "epsilon")?;
                end(&mut tok, line)?;
                TraceOp::Kcenter { k, eps }
            }
            "VERIFY" => {
                end(&mut tok, line)?;
                TraceOp::Verify
            }
            other => {
                return Err(HarnessError::Parse {
                    line,
                    msg: format!("unknown op `{other}`"),
                })
            }
        };
        out.push(TraceLine { line, op });
    }
    Ok(out)
}

/// Everything a replay produced: the JSON-lines records plus failure
/// counts that drive the CLI exit code.
#[derive(Clone, Debug)]
pub struct RunReport {
    /// One JSON record per op, in trace order.
    pub lines: Vec<String>,
    /// Number of `VERIFY` ops whose invariant check failed.
    pub verify_failures: usize,
    /// Number of failed oracle cross-checks plus failed coverage
    /// re-checks.
    pub guarantee_failures: usize,
}

impl RunReport {
    /// True when no verify op and no guarantee check failed.
    pub fn passed(&self) -> bool {
        self.verify_failures == 0 && self.guarantee_failures == 0
    }

    /// The records joined as a newline-terminated JSON-lines document.
    pub fn output(&self) -> String {
        let mut s = self.lines.join("\n");
        if !s.is_empty() {
            s.push('\n');
        }
        s
    }
}

/// Replays a parsed trace against a fresh net built from `config`.
///
/// `matrix` supplies the distance rows when `config.backend` is
/// [`BackendKind::Matrix`]; it is ignored otherwise. For the Euclidean
/// backend the dimension is taken from the first `INSERT` op.
pub fn run_trace(
    trace: &[TraceLine],
    config: &Config,
    matrix: Option<&[Vec<f64>]>,
) -> Result<RunReport, HarnessError> {
    let backend = match config.backend {
        BackendKind::Euclidean => {
            let dim = trace
                .iter()
                .find_map(|t| match &t.op {
                    TraceOp::Insert { values, .. } => Some(values.len()),
                    _ => None,
                })
                .unwrap_or(1);
            MetricBackend::euclidean(dim).map_err(|e| HarnessError::Invalid(e.to_string()))?
        }
        BackendKind::Matrix => {
            let rows = matrix.ok_or_else(|| {
                HarnessError::Invalid("backend=matrix requires matrix data".into())
            })?;
            MetricBackend::matrix(rows.to_vec())
                .map_err(|e| HarnessError::Invalid(e.to_string()))?
        }
    };
    let is_euclidean = matches!(backend, MetricBackend::Euclidean { .. });
    let dim = backend.dim();
    let mut net = NavigatingNet::new(backend, config.gamma)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?
        .with_rebuild_on_delete(config.full_rebuild);
    let mut report = RunReport {
        lines: Vec::with_capacity(trace.len()),
        verify_failures: 0,
        guarantee_failures: 0,
    };
    for t in trace {
        let line = t.line;
        let run_err = |msg: String| HarnessError::Run { line, msg };
        match &t.op {
            TraceOp::Insert { id, values } => {
                let p = build_point(is_euclidean, *id, values).map_err(run_err)?;
                net.insert(p)
                    .map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                report.lines.push(format!(r#"{{"op":"insert","id":{id}}}"#));
            }
            TraceOp::Delete { id } => {
                net.delete(PointId(*id))
                    .map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                report.lines.push(format!(r#"{{"op":"delete","id":{id}}}"#));
            }
            TraceOp::Afn { eps, m, values } => {
                let qs = build_query_set(is_euclidean, dim, *m, values).map_err(run_err)?;
                let (id, d, stats) =
                    afn(&net, &qs, *eps).map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                let oracle = if config.check_oracle {
                    let (_, exact) = fn_exact(net.backend(), &net.snapshot_points(), &qs)
                        .map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                    verdict(exact <= (1.0 + eps) * d * GUARANTEE_SLACK && d <= exact * GUARANTEE_SLACK)
                } else {
                    "skipped"
                };
                if oracle == "fail" {
                    report.guarantee_failures += 1;
                }
                report.lines.push(format!(
                    r#"{{"op":"afn","eps":{},"id":{},"distance":{},"stats":{},"oracle":"{}"}}"#,
                    fmt_f64(*eps),
                    id.0,
                    fmt_f64(d),
                    query_stats_json(&stats),
                    oracle
                ));
            }
            TraceOp::Greedy { k, eps } => {
                let sol = greedy_kcenter(&net, *k, *eps)
                    .map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                let oracle = if config.check_oracle && net.len() <= 40 && *k <= 3 {
                    let exact = kcenter_exact_metric(net.backend(), &net.snapshot_points(), *k)
                        .map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                    verdict(sol.radius <= (2.0 + eps) * exact.value * GUARANTEE_SLACK)
                } else {
                    "skipped"
                };
                push_solver_record(&mut report, &net, "greedy", Some(*k), *eps, &sol, oracle);
            }
            TraceOp::Meb { eps } => {
                let sol = meb(&net, *eps)
                    .map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                let oracle = if config.check_oracle
                    && is_euclidean
                    && dim <= 3
                    && net.len() <= 120
                    && *eps <= 1.0
                {
                    let exact = meb_exact(net.backend(), &net.snapshot_points())
                        .map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                    verdict(sol.radius <= (1.0 + eps) * exact.value * GUARANTEE_SLACK)
                } else {
                    "skipped"
                };
                push_solver_record(&mut report, &net, "meb", None, *eps, &sol, oracle);
            }
            TraceOp::Kcenter { k, eps } => {
                let sol = euclidean_kcenter_with_budget(&net, *k, *eps, config.guess_budget)
                    .map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                let within_gate = (net.len() <= 16 && *k <= 2) || (net.len() <= 12 && *k == 3);
                let oracle =
                    if config.check_oracle && is_euclidean && dim <= 3 && *eps >= 1.0 && within_gate
                    {
                        let exact =
                            kcenter_exact_euclidean(net.backend(), &net.snapshot_points(), *k)
                                .map_err(|e| HarnessError::Run { line, msg: e.to_string() })?;
                        verdict(sol.radius <= (1.0 + eps) * exact.value * GUARANTEE_SLACK)
                    } else {
                        "skipped"
                    };
                push_solver_record(&mut report, &net, "kcenter", Some(*k), *eps, &sol, oracle);
            }
            TraceOp::Verify => {
                let rep = net.verify_invariants();
                if rep.pass {
                    report.lines.push(r#"{"op":"verify","pass":true}"#.to_string());
                } else {
                    report.verify_failures += 1;
                    let why = rep.first_violation.unwrap_or_default();
                    report.lines.push(format!(
                        r#"{{"op":"verify","pass":false,"violation":"{}"}}"#,
                        json_escape(&why)
                    ));
                }
            }
        }
    }
    Ok(report)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn push_solver_record(
    report: &mut RunReport,
    net: &NavigatingNet,
    op: &str,
    k: Option<usize>,
    eps: f64,
    sol: &CoverSolution,
    oracle: &str,
) {
    let coverage = verdict(verify_coverage(net, sol).is_ok());
    if coverage == "fail" {
        report.guarantee_failures += 1;
    }
    if oracle == "fail" {
        report.guarantee_failures += 1;
    }
    let k_field = match k {
        Some(k) => format!(r#""k":{k},"#),
        None => String::new(),
    };
    report.lines.push(format!(
        r#"{{"op":"{}",{}"eps":{},"centers":{},"radius":{},"stats":{},"coverage":"{}","oracle":"{}"}}"#,
        op,
        k_field,
        fmt_f64(eps),
        centers_json(&sol.centers),
        fmt_f64(sol.radius),
        solver_stats_json(&sol.stats),
        coverage,
        oracle
    ));
}

fn query_stats_json(st: &QueryStats) -> String {
    format!(
        r#"{{"iterations":{},"max_frontier":{},"start_exponent":{},"end_exponent":{}}}"#,
        st.iterations,
        st.max_frontier,
        st.start_scale.exponent(),
        st.end_scale.exponent()
    )
}

fn solver_stats_json(st: &SolverStats) -> String {
    format!(
        r#"{{"queries":{},"iterations":{},"max_frontier":{}}}"#,
        st.queries, st.iterations, st.max_frontier
    )
}

fn centers_json(centers: &Centers) -> String {
    match centers {
        Centers::Ids(ids) => {
            let inner: Vec<String> = ids.iter().map(|id| id.0.to_string()).collect();
            format!("[{}]", inner.join(","))
        }
        Centers::Coords(rows) => {
            let inner: Vec<String> = rows
                .iter()
                .map(|c| {
                    let xs: Vec<String> = c.iter().map(|&x| fmt_f64(x)).collect();
                    format!("[{}]", xs.join(","))
                })
                .collect();
            format!("[{}]", inner.join(","))
        }
    }
}

fn build_point(is_euclidean: bool, id: u64, values: &[f64]) -> Result<MetricPoint, String> {
    if is_euclidean {
        Ok(MetricPoint::euclidean(id, values.to_vec()))
    } else {
        if values.len() != 1 {
            return Err(format!(
                "matrix insert takes one row index, got {} values",
                values.len()
            ));
        }
        Ok(MetricPoint::matrix_row(id, row_index(values[0])?))
    }
}

fn build_query_set(
    is_euclidean: bool,
    dim: usize,
    m: usize,
    values: &[f64],
) -> Result<QuerySet, String> {
    let pts: Vec<MetricPoint> = if is_euclidean {
        if values.len() != m * dim {
            return Err(format!(
                "query needs {} values ({} points of dimension {}), got {}",
                m * dim,
                m,
                dim,
                values.len()
            ));
        }
        values
            .chunks(dim)
            .enumerate()
            .map(|(i, c)| MetricPoint::euclidean(i as u64, c.to_vec()))
            .collect()
    } else {
        if values.len() != m {
            return Err(format!(
                "matrix query needs {m} row indices, got {}",
                values.len()
            ));
        }
        values
            .iter()
            .enumerate()
            .map(|(i, &x)| Ok(MetricPoint::matrix_row(i as u64, row_index(x)?)))
            .collect::<Result<Vec<_>, String>>()?
    };
    QuerySet::new(pts).map_err(|e| e.to_string())
}

fn row_index(x: f64) -> Result<usize, String> {
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < u32::MAX as f64 {
        Ok(x as usize)
    } else {
        Err(format!("invalid matrix row index `{x}`"))
    }
}

fn num<T: std::str::FromStr>(
    tok: &mut std::str::SplitWhitespace<'_>,
    line: usize,
    what: &str,
) -> Result<T, HarnessError> {
    let raw = tok.next().ok_or_else(|| HarnessError::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    raw.parse().map_err(|_| HarnessError::Parse {
        line,
        msg: format!("invalid {what} `{raw}`"),
    })
}

fn rest_f64(
    tok: &mut std::str::SplitWhitespace<'_>,
    line: usize,
) -> Result<Vec<f64>, HarnessError> {
    let mut out = Vec::new();
    for raw in tok {
        out.push(raw.parse().map_err(|_| HarnessError::Parse {
            line,
            msg: format!("invalid number `{raw}`"),
        })?);
    }
    Ok(out)
}

fn end(tok: &mut std::str::SplitWhitespace<'_>, line: usize) -> Result<(), HarnessError> {
    if let Some(extra) = tok.next() {
        return Err(HarnessError::Parse {
            line,
            msg: format!("unexpected trailing token `{extra}`"),
        });
    }
    Ok(())
}
