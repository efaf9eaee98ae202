//! CSV / JSON export and the matching parsers. Column order and field names
//! are frozen in SCHEMA.md; bump [`SCHEMA_VERSION`] when they change.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::front::{FrontResult, FrontStats, StartSummary};
use crate::config::{Algorithm, SolverConfig};
use crate::scalar::Scalar;
use crate::trace::{Counters, IterationRecord, RunResult, StopReason};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "NMMG_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "nmmg-out";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("row {row}: {msg}")]
    Format { row: usize, msg: String },
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
}

pub type ExportResult<T> = std::result::Result<T, ExportError>;

/// `--out` if given, else `$NMMG_OUT_DIR`, else `nmmg-out`.
pub fn resolve_out_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT_DIR),
    }
}

/// Shortest string that parses back to the same value.
pub fn fmt_num<T: Scalar>(v: T) -> String {
    format!("{v:?}")
}

fn fmt_opt<T: Scalar>(v: Option<T>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn parse_num<T: Scalar>(s: &str, row: usize, col: &str) -> ExportResult<T> {
    s.parse().map_err(|_| ExportError::Format {
        row,
        msg: format!("bad number `{s}` in column {col}"),
    })
}

fn parse_opt<T: Scalar>(s: &str, row: usize, col: &str) -> ExportResult<Option<T>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_num(s, row, col).map(Some)
    }
}

fn parse_usize(s: &str, row: usize, col: &str) -> ExportResult<usize> {
    s.parse().map_err(|_| ExportError::Format {
        row,
        msg: format!("bad integer `{s}` in column {col}"),
    })
}

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}_{i}"))
}

// ---------------------------------------------------------------- trace CSV

/// `k,f_1..f_m,v_norm,psi_d,alpha,trials,x_1..x_n`
pub fn trace_csv_header(m: usize, n: usize) -> Vec<String> {
    let mut h = vec!["k".to_string()];
    h.extend(numbered("f", m));
    h.extend(["v_norm", "psi_d", "alpha", "trials"].map(String::from));
    h.extend(numbered("x", n));
    h
}

/// One row of the flat trace; `None` cells are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    pub k: usize,
    pub f: Vec<T>,
    pub v_norm: T,
    pub psi_d: Option<T>,
    pub alpha: Option<T>,
    pub trials: Option<usize>,
    pub x: Vec<T>,
}

impl<T: Scalar> From<&IterationRecord<T>> for TraceRow<T> {
    fn from(r: &IterationRecord<T>) -> Self {
        Self {
            k: r.k,
            f: r.f.clone(),
            v_norm: r.v_norm,
            psi_d: r.psi_d,
            alpha: r.alpha,
            trials: r.ls_trials,
            x: r.x.clone(),
        }
    }
}

pub fn trace_rows<T: Scalar>(run: &RunResult<T>) -> Vec<TraceRow<T>> {
    run.trace.iter().map(TraceRow::from).collect()
}

pub fn write_trace_csv<T: Scalar, W: Write>(run: &RunResult<T>, out: W) -> ExportResult<()> {
    let m = run.final_f.len();
    let n = run.final_x.len();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_csv_header(m, n))?;
    for r in run.trace.iter() {
        let mut row = vec![r.k.to_string()];
        row.extend(r.f.iter().map(|&v| fmt_num(v)));
        row.push(fmt_num(r.v_norm));
        row.push(fmt_opt(r.psi_d));
        row.push(fmt_opt(r.alpha));
        row.push(r.ls_trials.map(|t| t.to_string()).unwrap_or_default());
        row.extend(r.x.iter().map(|&v| fmt_num(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_csv_string<T: Scalar>(run: &RunResult<T>) -> ExportResult<String> {
    let mut buf = Vec::new();
    write_trace_csv(run, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn count_prefixed(header: &csv::StringRecord, prefix: &str) -> usize {
    header.iter().filter(|h| h.starts_with(prefix)).count()
}

pub fn parse_trace_csv<T: Scalar>(text: &str) -> ExportResult<Vec<TraceRow<T>>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers()?.clone();
    let m = count_prefixed(&header, "f_");
    let n = count_prefixed(&header, "x_");
    let expected = trace_csv_header(m, n);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(ExportError::Format {
            row: 0,
            msg: format!("unexpected header {:?}", header),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let cell = |j: usize| rec.get(j).unwrap_or("");
        let f = (0..m)
            .map(|j| parse_num(cell(1 + j), row, "f"))
            .collect::<ExportResult<_>>()?;
        let b = 1 + m;
        let trials = match cell(b + 3) {
            "" => None,
            s => Some(parse_usize(s, row, "trials")?),
        };
        let x = (0..n)
            .map(|j| parse_num(cell(b + 4 + j), row, "x"))
            .collect::<ExportResult<_>>()?;
        rows.push(TraceRow {
            k: parse_usize(cell(0), row, "k")?,
            f,
            v_norm: parse_num(cell(b), row, "v_norm")?,
            psi_d: parse_opt(cell(b + 1), row, "psi_d")?,
            alpha: parse_opt(cell(b + 2), row, "alpha")?,
            trials,
            x,
        });
    }
    Ok(rows)
}

// ----------------------------------------------------------------- run JSON

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct RunDocument<T> {
    pub schema_version: u32,
    pub problem: String,
    pub algorithm: Algorithm,
    pub config: SolverConfig,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub final_v_norm: Option<T>,
    pub final_x: Vec<T>,
    pub final_f: Vec<T>,
    pub counters: Counters,
    pub trace: Vec<IterationRecord<T>>,
}

impl<T: Scalar> RunDocument<T> {
    pub fn new(run: &RunResult<T>, config: &SolverConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            problem: run.problem.clone(),
            algorithm: run.algorithm,
            config: config.clone(),
            stop_reason: run.stop_reason,
            iterations: run.iterations(),
            final_v_norm: run.final_v_norm(),
            final_x: run.final_x.clone(),
            final_f: run.final_f.clone(),
            counters: run.counters,
            trace: run.trace.records().to_vec(),
        }
    }
}

fn check_version(v: u32) -> ExportResult<()> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(ExportError::SchemaVersion(v))
    }
}

pub fn run_json<T: Scalar>(run: &RunResult<T>, config: &SolverConfig) -> ExportResult<String> {
    Ok(serde_json::to_string_pretty(&RunDocument::new(
        run, config,
    ))?)
}

pub fn parse_run_json<T: Scalar>(text: &str) -> ExportResult<RunDocument<T>> {
    let doc: RunDocument<T> = serde_json::from_str(text)?;
    check_version(doc.schema_version)?;
    Ok(doc)
}

// ---------------------------------------------------------------- front CSV

/// `start,f_1..f_m,x_1..x_n`, one row per nondominated point.
pub fn front_csv_header(m: usize, n: usize) -> Vec<String> {
    let mut h = vec!["start".to_string()];
    h.extend(numbered("f", m));
    h.extend(numbered("x", n));
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontRow<T> {
    pub start: usize,
    pub f: Vec<T>,
    pub x: Vec<T>,
}

pub fn front_rows<T: Scalar>(front: &FrontResult<T>) -> Vec<FrontRow<T>> {
    front
        .front_points()
        .map(|s| FrontRow {
            start: s.start,
            f: s.final_f.clone(),
            x: s.final_x.clone(),
        })
        .collect()
}

pub fn front_csv_string<T: Scalar>(front: &FrontResult<T>) -> ExportResult<String> {
    let (m, n) = front
        .runs
        .first()
        .map(|r| (r.final_f.len(), r.final_x.len()))
        .unwrap_or((0, 0));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(front_csv_header(m, n))?;
    for r in front_rows(front) {
        let mut row = vec![r.start.to_string()];
        row.extend(r.f.iter().map(|&v| fmt_num(v)));
        row.extend(r.x.iter().map(|&v| fmt_num(v)));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_front_csv<T: Scalar>(text: &str) -> ExportResult<Vec<FrontRow<T>>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers()?.clone();
    let m = count_prefixed(&header, "f_");
    let n = count_prefixed(&header, "x_");
    if header
        .iter()
        .ne(front_csv_header(m, n).iter().map(String::as_str))
    {
        return Err(ExportError::Format {
            row: 0,
            msg: format!("unexpected header {:?}", header),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let cell = |j: usize| rec.get(j).unwrap_or("");
        rows.push(FrontRow {
            start: parse_usize(cell(0), row, "start")?,
            f: (0..m)
                .map(|j| parse_num(cell(1 + j), row, "f"))
                .collect::<ExportResult<_>>()?,
            x: (0..n)
                .map(|j| parse_num(cell(1 + m + j), row, "x"))
                .collect::<ExportResult<_>>()?,
        });
    }
    Ok(rows)
}

// --------------------------------------------------------------- stats JSON

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct FrontDocument<T> {
    pub schema_version: u32,
    pub problem: String,
    pub algorithm: Algorithm,
    pub n: usize,
    pub seed: u64,
    pub stats: FrontStats,
    pub front: Vec<usize>,
    pub runs: Vec<StartSummary<T>>,
}

impl<T: Scalar> FrontDocument<T> {
    pub fn new(front: &FrontResult<T>, algorithm: Algorithm, n: usize, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            problem: front.problem.clone(),
            algorithm,
            n,
            seed,
            stats: front.stats.clone(),
            front: front.front.clone(),
            runs: front.runs.clone(),
        }
    }

    pub fn into_front(self) -> FrontResult<T> {
        FrontResult {
            problem: self.problem,
            runs: self.runs,
            front: self.front,
            stats: self.stats,
        }
    }
}

pub fn front_json<T: Scalar>(doc: &FrontDocument<T>) -> ExportResult<String> {
    Ok(serde_json::to_string_pretty(doc)?)
}

pub fn parse_front_json<T: Scalar>(text: &str) -> ExportResult<FrontDocument<T>> {
    let doc: FrontDocument<T> = serde_json::from_str(text)?;
    check_version(doc.schema_version)?;
    Ok(doc)
}

// ------------------------------------------------------------------ compare

pub const COMPARE_HEADER: [&str; 8] = [
    "algorithm",
    "runs",
    "converged",
    "convergence_rate",
    "median_iterations",
    "median_f_evals",
    "max_final_v_norm",
    "solver_errors",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub algorithm: Algorithm,
    pub stats: FrontStats,
    /// Runs that ended with an error stop reason.
    pub solver_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareDocument {
    pub schema_version: u32,
    pub problem: String,
    pub n: usize,
    pub seed: u64,
    pub starts: usize,
    pub rows: Vec<CompareRow>,
}

pub fn compare_csv_string(doc: &CompareDocument) -> ExportResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COMPARE_HEADER)?;
    for r in &doc.rows {
        w.write_record([
            r.algorithm.as_str().to_string(),
            r.stats.runs.to_string(),
            r.stats.converged.to_string(),
            fmt_num(r.stats.convergence_rate),
            fmt_num(r.stats.median_iterations),
            fmt_num(r.stats.median_f_evals),
            fmt_num(r.stats.max_final_v_norm),
            r.solver_errors.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_compare_csv(text: &str) -> ExportResult<Vec<CompareRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    if rd.headers()?.iter().ne(COMPARE_HEADER) {
        return Err(ExportError::Format {
            row: 0,
            msg: "unexpected compare header".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let cell = |j: usize| rec.get(j).unwrap_or("");
        let algorithm = cell(0).parse().map_err(|_| ExportError::Format {
            row,
            msg: format!("unknown algorithm `{}`", cell(0)),
        })?;
        rows.push(CompareRow {
            algorithm,
            stats: FrontStats {
                runs: parse_usize(cell(1), row, "runs")?,
                converged: parse_usize(cell(2), row, "converged")?,
                convergence_rate: parse_num(cell(3), row, "convergence_rate")?,
                median_iterations: parse_num(cell(4), row, "median_iterations")?,
                median_f_evals: parse_num(cell(5), row, "median_f_evals")?,
                max_final_v_norm: parse_num(cell(6), row, "max_final_v_norm")?,
            },
            solver_errors: parse_usize(cell(7), row, "solver_errors")?,
        });
    }
    Ok(rows)
}

pub fn compare_json(doc: &CompareDocument) -> ExportResult<String> {
    Ok(serde_json::to_string_pretty(doc)?)
}

pub fn parse_compare_json(text: &str) -> ExportResult<CompareDocument> {
    let doc: CompareDocument = serde_json::from_str(text)?;
    check_version(doc.schema_version)?;
    Ok(doc)
}

/// Writes `contents` to `dir/name`, creating `dir` first.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> ExportResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}
