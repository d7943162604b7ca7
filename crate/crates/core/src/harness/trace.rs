use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solvers::TraceRecord;

pub const TRACE_HEADER: &str = "k,row,rse,res_fro,wall_s";

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// CSV text of a trace. With `include_wall = false` the `wall_s` column is
/// left empty, which makes the output a pure function of problem, method and
/// seed.
pub fn trace_csv_string(trace: &[TraceRecord], include_wall: bool) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k,
            r.row.map(|i| i.to_string()).unwrap_or_default(),
            opt_f64(r.rse),
            opt_f64(r.res_fro),
            if include_wall { opt_f64(r.wall_s) } else { String::new() },
        ));
    }
    out
}

/// Writes the trace with all columns.
pub fn write_trace_csv(trace: &[TraceRecord], path: impl AsRef<Path>) -> Result<()> {
    write_trace_csv_with(trace, path, true)
}

pub fn write_trace_csv_with(trace: &[TraceRecord], path: impl AsRef<Path>, include_wall: bool) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::Invalid("empty trace".into()));
    }
    fs::write(path, trace_csv_string(trace, include_wall))?;
    Ok(())
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    parse_trace_csv(&fs::read_to_string(path)?)
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.split('\n');
    if lines.next() != Some(TRACE_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header '{TRACE_HEADER}'"),
        });
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 2;
        let err = |msg: String| Error::Parse { line: lineno, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", f.len())));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| err(format!("invalid number '{s}'")))
            }
        };
        out.push(TraceRecord {
            k: f[0].parse().map_err(|_| err(format!("invalid step '{}'", f[0])))?,
            row: if f[1].is_empty() {
                None
            } else {
                Some(f[1].parse().map_err(|_| err(format!("invalid row '{}'", f[1])))?)
            },
            rse: num(f[2])?,
            res_fro: num(f[3])?,
            wall_s: num(f[4])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: usize, rse: Option<f64>) -> TraceRecord {
        TraceRecord {
            k,
            row: Some(k % 2),
            rse,
            res_fro: Some(1.0 / (k as f64 + 3.0)),
            wall_s: Some(1e-6 * k as f64),
        }
    }

    #[test]
    fn three_steps_four_lines() {
        let t = vec![rec(1, None), rec(2, None), rec(3, None)];
        let s = trace_csv_string(&t, true);
        assert_eq!(s.lines().count(), 4);
        assert!(s.lines().nth(1).unwrap().starts_with("1,1,,"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn round_trip_is_exact() {
        let t = vec![rec(1, Some(0.1)), rec(7, Some(std::f64::consts::PI * 1e-9))];
        let back = parse_trace_csv(&trace_csv_string(&t, true)).unwrap();
        assert_eq!(back, t);
        let no_wall = parse_trace_csv(&trace_csv_string(&t, false)).unwrap();
        assert!(no_wall.iter().all(|r| r.wall_s.is_none()));
    }
}
