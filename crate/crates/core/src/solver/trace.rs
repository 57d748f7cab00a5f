//! Per-iteration records and their CSV form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "k,time_s,objective,aug_lagrangian,lyapunov,feas,stat_x_max,stat_y,dx,dy,domega";

/// One row of a run trace. Row `k` describes the iterate `(x^k, y^k, omega^k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub time_s: f64,
    pub objective: f64,
    pub aug_lagrangian: f64,
    /// `NaN` at `k = 0`.
    pub lyapunov: f64,
    pub feas: f64,
    pub stat_x_max: f64,
    pub stat_y: f64,
    pub dx: f64,
    pub dy: f64,
    pub domega: f64,
    #[serde(skip)]
    pub detail: RecordDetail,
}

/// In-memory extras not written to CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordDetail {
    pub alpha: Vec<f64>,
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub stat_x: Vec<f64>,
    /// `||omega^k||`; absent for traces read back from CSV.
    pub omega_norm: Option<f64>,
    /// `L_beta(x^k, y^{k-1}, omega^{k-1})`, recorded at check level `full`.
    pub lagrangian_before_y: Option<f64>,
    /// `L_beta(x^k, y^k, omega^{k-1})`, recorded at check level `full`.
    pub lagrangian_after_y: Option<f64>,
}

impl TraceRecord {
    fn fields(&self) -> [f64; 10] {
        [
            self.time_s,
            self.objective,
            self.aug_lagrangian,
            self.lyapunov,
            self.feas,
            self.stat_x_max,
            self.stat_y,
            self.dx,
            self.dy,
            self.domega,
        ]
    }
}

fn push_float(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("NaN");
    } else if v.is_infinite() {
        out.push_str(if v > 0.0 { "inf" } else { "-inf" });
    } else {
        write!(out, "{v:.16e}").expect("write to string");
    }
}

pub fn format_trace_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 200);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        write!(out, "{}", r.k).expect("write to string");
        for v in r.fields() {
            out.push(',');
            push_float(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Schema("empty trace".into()))?;
    if header.trim_end() != TRACE_HEADER {
        return Err(Error::Schema(format!("unexpected trace header {header:?}")));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 11 {
            return Err(Error::Schema(format!(
                "trace row {} has {} columns, expected 11",
                n + 1,
                cells.len()
            )));
        }
        let k = cells[0]
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("row {}: bad k {:?}: {e}", n + 1, cells[0])))?;
        let mut v = [0.0; 10];
        for (slot, cell) in v.iter_mut().zip(&cells[1..]) {
            *slot = cell
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: bad value {cell:?}: {e}", n + 1)))?;
        }
        out.push(TraceRecord {
            k,
            time_s: v[0],
            objective: v[1],
            aug_lagrangian: v[2],
            lyapunov: v[3],
            feas: v[4],
            stat_x_max: v[5],
            stat_y: v[6],
            dx: v[7],
            dy: v[8],
            domega: v[9],
            detail: RecordDetail::default(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(k: usize, seed: f64) -> TraceRecord {
        TraceRecord {
            k,
            time_s: seed * 1e-3,
            objective: seed,
            aug_lagrangian: seed + 0.1,
            lyapunov: if k == 0 { f64::NAN } else { seed - 0.1 },
            feas: seed.abs() / 3.0,
            stat_x_max: 1.0 / 7.0,
            stat_y: 2.0 / 3.0,
            dx: 0.0,
            dy: 1e-300,
            domega: 5e300,
            detail: RecordDetail::default(),
        }
    }

    #[test]
    fn header_and_nan_lyapunov() {
        let text = format_trace_csv(&[record(0, 1.5)]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "0");
        assert_eq!(row[4], "NaN");
    }

    #[test]
    fn wrong_header_is_a_schema_error() {
        assert!(matches!(parse_trace_csv("k,time\n"), Err(Error::Schema(_))));
        let bad = format!("{TRACE_HEADER}\n1,2\n");
        assert!(matches!(parse_trace_csv(&bad), Err(Error::Schema(_))));
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(seeds in proptest::collection::vec(-1e6f64..1e6, 1..20)) {
            let recs: Vec<_> = seeds.iter().enumerate().map(|(k, &s)| record(k, s)).collect();
            let back = parse_trace_csv(&format_trace_csv(&recs)).unwrap();
            prop_assert_eq!(back.len(), recs.len());
            for (a, b) in recs.iter().zip(&back) {
                prop_assert_eq!(a.k, b.k);
                for (x, y) in a.fields().iter().zip(b.fields().iter()) {
                    prop_assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
                }
            }
        }
    }
}
