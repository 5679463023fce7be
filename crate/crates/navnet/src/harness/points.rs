//! Point-file and matrix-file formats.
//!
//! Point file: a header line `dim <D>` followed by one line per point,
//! `<id> <x1> ... <xD>`. Matrix file: a header line `matrix <n>` followed
//! by `n` rows of `n` distances. All values are ASCII; floats are written
//! with 17 significant digits.

use super::{fmt_f64, HarnessError};
use crate::metric::{MetricPoint, Payload};

/// Renders a point set in the point-file format.
///
/// Every point must carry coordinates of length `dim`.
pub fn write_points(dim: usize, points: &[MetricPoint]) -> Result<String, HarnessError> {
    let mut out = format!("dim {dim}\n");
    for p in points {
        let coords = match &p.payload {
            Payload::Coords(c) => c,
            Payload::Row(_) => {
                return Err(HarnessError::Invalid(format!(
                    "point {} has a matrix-row payload; point files hold coordinates",
                    p.id
                )))
            }
        };
        if coords.len() != dim {
            return Err(HarnessError::Invalid(format!(
                "point {} has {} coordinates, expected {dim}",
                p.id,
                coords.len()
            )));
        }
        out.push_str(&p.id.0.to_string());
        for &x in coords {
            out.push(' ');
            out.push_str(&fmt_f64(x));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses the point-file format, returning the dimension and the points
/// in file order.
pub fn parse_points(text: &str) -> Result<(usize, Vec<MetricPoint>), HarnessError> {
    let mut dim: Option<usize> = None;
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut tok = t.split_whitespace();
        match dim {
            None => {
                if tok.next() != Some("dim") {
                    return Err(HarnessError::Parse {
                        line,
                        msg: "expected header `dim <D>`".into(),
                    });
                }
                let d: usize = next_number(&mut tok, line, "dimension")?;
                if d == 0 {
                    return Err(HarnessError::Parse {
                        line,
                        msg: "dimension must be at least 1".into(),
                    });
                }
                expect_end(&mut tok, line)?;
                dim = Some(d);
            }
            Some(d) => {
                let id: u64 = next_number(&mut tok, line, "point id")?;
                let mut coords = Vec::with_capacity(d);
                for _ in 0..d {
                    coords.push(next_number::<f64>(&mut tok, line, "coordinate")?);
                }
                expect_end(&mut tok, line)?;
                points.push(MetricPoint::euclidean(id, coords));
            }
        }
    }
    match dim {
        Some(d) => Ok((d, points)),
        None => Err(HarnessError::Parse {
            line: 1,
            msg: "missing header `dim <D>`".into(),
        }),
    }
}

/// Renders a distance matrix in the matrix-file format.
pub fn write_matrix(rows: &[Vec<f64>]) -> Result<String, HarnessError> {
    let n = rows.len();
    let mut out = format!("matrix {n}\n");
    for row in rows {
        if row.len() != n {
            return Err(HarnessError::Invalid(format!(
                "matrix row has {} entries, expected {n}",
                row.len()
            )));
        }
        let mut first = true;
        for &x in row {
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&fmt_f64(x));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses the matrix-file format.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, HarnessError> {
    let mut size: Option<usize> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut tok = t.split_whitespace();
        match size {
            None => {
                if tok.next() != Some("matrix") {
                    return Err(HarnessError::Parse {
                        line,
                        msg: "expected header `matrix <n>`".into(),
                    });
                }
                let n: usize = next_number(&mut tok, line, "matrix size")?;
                expect_end(&mut tok, line)?;
                size = Some(n);
            }
            Some(n) => {
                if rows.len() == n {
                    return Err(HarnessError::Parse {
                        line,
                        msg: format!("more than {n} matrix rows"),
                    });
                }
                let mut row = Vec::with_capacity(n);
                for _ in 0..n {
                    row.push(next_number::<f64>(&mut tok, line, "distance")?);
                }
                expect_end(&mut tok, line)?;
                rows.push(row);
            }
        }
    }
    let n = size.ok_or(HarnessError::Parse {
        line: 1,
        msg: "missing header `matrix <n>`".into(),
    })?;
    if rows.len() != n {
        return Err(HarnessError::Invalid(format!(
            "matrix has {} rows, expected {n}",
            rows.len()
        )));
    }
    Ok(rows)
}

fn next_number<T: std::str::FromStr>(
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

fn expect_end(tok: &mut std::str::SplitWhitespace<'_>, line: usize) -> Result<(), HarnessError> {
    if let Some(extra) = tok.next() {
        return Err(HarnessError::Parse {
            line,
            msg: format!("unexpected trailing token `{extra}`"),
        });
    }
    Ok(())
}
