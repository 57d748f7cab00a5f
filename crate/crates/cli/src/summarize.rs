//! Summary statistics and plot data from stored traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use iadmmn_core::formats::write_atomic;
use iadmmn_core::solver::{parse_trace_csv, TraceRecord};

use crate::error::{io_err, HarnessError, Result};
use crate::experiment::{slug_to_label, SummaryRow};

/// Number of points of the shared time grid.
pub const TIME_GRID_POINTS: usize = 100;

/// Mean and sample standard deviation (`n - 1` denominator, `0` for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Parts of a trace file name `{slug}__m{m}_n{n}__d{dataset}_i{init}.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceName {
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub dataset: usize,
    pub init: usize,
}

pub fn parse_trace_name(file_name: &str) -> Option<TraceName> {
    let stem = file_name.strip_suffix(".csv")?;
    let mut parts = stem.split("__");
    let (slug, size, cell) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() {
        return None;
    }
    let (m, n) = size.strip_prefix('m')?.split_once("_n")?;
    let (d, i) = cell.strip_prefix('d')?.split_once("_i")?;
    Some(TraceName {
        algorithm: slug_to_label(slug),
        m: m.parse().ok()?,
        n: n.parse().ok()?,
        dataset: d.parse().ok()?,
        init: i.parse().ok()?,
    })
}

/// Objective of the last record at or before `t` (the first record if none).
fn objective_at_time(trace: &[TraceRecord], t: f64) -> f64 {
    let idx = trace.partition_point(|r| r.time_s <= t);
    trace[idx.saturating_sub(1)].objective
}

/// Objective at iteration `k`, carried forward past the end of the trace.
fn objective_at_iter(trace: &[TraceRecord], k: usize) -> f64 {
    trace[k.min(trace.len() - 1)].objective
}

#[derive(Debug, Clone)]
pub struct SummarizeOutput {
    pub rows: Vec<SummaryRow>,
    pub plot_files: Vec<PathBuf>,
}

type Group = BTreeMap<String, Vec<Vec<TraceRecord>>>;

/// Read `dir/traces/*.csv`, compute one row per (algorithm, size) and write
/// `plot_time_m{m}_n{n}.csv` and `plot_iter_m{m}_n{n}.csv` into `dir`.
///
/// The time grid has [`TIME_GRID_POINTS`] uniform points over
/// `[0, budget_seconds]`, or up to the longest trace when no time budget is given.
pub fn summarize(dir: &Path, budget_seconds: Option<f64>) -> Result<SummarizeOutput> {
    let trace_dir = dir.join("traces");
    let mut names: Vec<PathBuf> = std::fs::read_dir(&trace_dir)
        .map_err(io_err(&trace_dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(&trace_dir)))
        .collect::<Result<_>>()?;
    names.retain(|p| p.extension().is_some_and(|e| e == "csv"));
    names.sort();
    if names.is_empty() {
        return Err(HarnessError::Trace {
            path: trace_dir,
            message: "no traces found".into(),
        });
    }

    let mut groups: BTreeMap<(usize, usize), Group> = BTreeMap::new();
    for path in &names {
        let file = path.file_name().and_then(|f| f.to_str()).unwrap_or_default();
        let name = parse_trace_name(file).ok_or_else(|| HarnessError::Trace {
            path: path.clone(),
            message: "file name does not follow {algorithm}__m{m}_n{n}__d{d}_i{i}.csv".into(),
        })?;
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let trace = parse_trace_csv(&text).map_err(|e| HarnessError::Trace {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if trace.is_empty() {
            return Err(HarnessError::Trace {
                path: path.clone(),
                message: "trace has no records".into(),
            });
        }
        groups
            .entry((name.m, name.n))
            .or_default()
            .entry(name.algorithm)
            .or_default()
            .push(trace);
    }

    let mut rows = Vec::new();
    let mut plot_files = Vec::new();
    for (&(m, n), group) in &groups {
        for (label, traces) in group {
            let finals: Vec<f64> = traces.iter().map(|t| t.last().expect("nonempty").objective).collect();
            let (mean, std) = mean_std(&finals);
            rows.push(SummaryRow {
                algorithm: label.clone(),
                m,
                n,
                mean,
                std,
                n_trials: finals.len(),
            });
        }
        let time_path = dir.join(format!("plot_time_m{m}_n{n}.csv"));
        write_atomic(&time_path, time_series(group, budget_seconds).as_bytes())?;
        let iter_path = dir.join(format!("plot_iter_m{m}_n{n}.csv"));
        write_atomic(&iter_path, iteration_series(group).as_bytes())?;
        plot_files.extend([time_path, iter_path]);
    }
    Ok(SummarizeOutput { rows, plot_files })
}

fn header(first: &str, group: &Group) -> String {
    let mut out = first.to_string();
    for label in group.keys() {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    out
}

fn mean_of(traces: &[Vec<TraceRecord>], f: impl Fn(&[TraceRecord]) -> f64) -> f64 {
    traces.iter().map(|t| f(t)).sum::<f64>() / traces.len() as f64
}

/// Mean objective against wall time on a shared grid, last observation carried forward.
pub(crate) fn time_series(group: &Group, budget_seconds: Option<f64>) -> String {
    let horizon = budget_seconds.unwrap_or_else(|| {
        group
            .values()
            .flatten()
            .map(|t| t.last().expect("nonempty").time_s)
            .fold(0.0, f64::max)
    });
    let mut out = header("time_s", group);
    for j in 0..TIME_GRID_POINTS {
        let t = j as f64 / (TIME_GRID_POINTS - 1) as f64 * horizon;
        write!(out, "{t}").expect("write to string");
        for traces in group.values() {
            write!(out, ",{}", mean_of(traces, |tr| objective_at_time(tr, t))).expect("write to string");
        }
        out.push('\n');
    }
    out
}

/// Mean objective against iteration count.
pub(crate) fn iteration_series(group: &Group) -> String {
    let last_k = group.values().flatten().map(|t| t.len() - 1).max().unwrap_or(0);
    let mut out = header("k", group);
    for k in 0..=last_k {
        write!(out, "{k}").expect("write to string");
        for traces in group.values() {
            write!(out, ",{}", mean_of(traces, |tr| objective_at_iter(tr, k))).expect("write to string");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use iadmmn_core::solver::RecordDetail;

    fn rec(k: usize, time_s: f64, objective: f64) -> TraceRecord {
        TraceRecord {
            k,
            time_s,
            objective,
            aug_lagrangian: objective,
            lyapunov: objective,
            feas: 0.0,
            stat_x_max: 0.0,
            stat_y: 0.0,
            dx: 0.0,
            dy: 0.0,
            domega: 0.0,
            detail: RecordDetail::default(),
        }
    }

    #[test]
    fn mean_and_sample_std() {
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn trace_names_parse() {
        let n = parse_trace_name("iADMMn_0.1_0.1__m200_n100__d3_i4.csv").unwrap();
        assert_eq!(
            n,
            TraceName {
                algorithm: "iADMMn(0.1,0.1)".into(),
                m: 200,
                n: 100,
                dataset: 3,
                init: 4
            }
        );
        assert_eq!(parse_trace_name("GD__m2_n3__d0_i0.csv").unwrap().algorithm, "GD");
        assert!(parse_trace_name("GD__m2_n3.csv").is_none());
        assert!(parse_trace_name("GD__mx_n3__d0_i0.csv").is_none());
    }

    #[test]
    fn series_carry_the_last_observation_forward() {
        let a = vec![rec(0, 0.0, 10.0), rec(1, 0.5, 6.0), rec(2, 1.0, 4.0)];
        let b = vec![rec(0, 0.0, 8.0), rec(1, 0.9, 2.0)];
        let mut group = Group::new();
        group.insert("A".into(), vec![a.clone(), a]);
        group.insert("B".into(), vec![b]);
        let time = time_series(&group, Some(0.99));
        let lines: Vec<&str> = time.lines().collect();
        assert_eq!(lines.len(), TIME_GRID_POINTS + 1);
        assert_eq!(lines[0], "time_s,A,B");
        assert_eq!(lines[1], "0,10,8");
        assert_eq!(lines[TIME_GRID_POINTS], "0.99,6,2");
        let iter = iteration_series(&group);
        assert_eq!(iter, "k,A,B\n0,10,8\n1,6,2\n2,4,2\n");
    }

    #[test]
    fn summarize_reads_a_directory() {
        let dir = tempfile::tempdir().unwrap();
        let traces = dir.path().join("traces");
        std::fs::create_dir_all(&traces).unwrap();
        let write = |name: &str, finals: f64| {
            let t = vec![rec(0, 0.0, 9.0), rec(1, 0.1, finals)];
            std::fs::write(traces.join(name), iadmmn_core::solver::format_trace_csv(&t)).unwrap();
        };
        write("GD__m2_n2__d0_i0.csv", 1.0);
        write("GD__m2_n2__d0_i1.csv", 3.0);
        let out = summarize(dir.path(), None).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!((out.rows[0].mean, out.rows[0].n_trials), (2.0, 2));
        assert_eq!(out.plot_files.len(), 2);
        assert!(out.plot_files.iter().all(|p| p.exists()));

        std::fs::write(traces.join("GD__m2_n2__d1_i0.csv"), "k,time\n0,1\n").unwrap();
        assert!(matches!(summarize(dir.path(), None), Err(HarnessError::Trace { .. })));
    }
}
