//! Trace files and experiment reports.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly. Readers skip lines starting with `#`,
//! which the command line tool uses for its provenance header.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use ras_core::diagnostics::{MultiRunSummary, Trace, TraceRecord};
use ras_core::experiments::{AblationCell, AngleTableRow, SuccessProbRow};
use ras_core::StepOutcome;
use serde_json::Value;

use crate::error::{Error, Result};

pub const TRACE_COLUMNS: [&str; 8] = [
    "iteration",
    "evaluations",
    "best_f",
    "outcome",
    "box_min",
    "box_max",
    "box_ratio",
    "angle_to_optimum",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceFormat {
    #[default]
    Csv,
    Jsonl,
}

impl TraceFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Jsonl => "jsonl",
        }
    }
}

impl std::str::FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "jsonl" => Ok(TraceFormat::Jsonl),
            _ => Err(Error::Usage(format!(
                "unknown format `{s}` (expected csv|jsonl)"
            ))),
        }
    }
}

/// The exported columns of a [`TraceRecord`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub evaluations: usize,
    pub best_f: f64,
    pub outcome: StepOutcome,
    pub box_min: f64,
    pub box_max: f64,
    pub box_ratio: f64,
    pub angle_to_optimum: Option<f64>,
}

impl From<&TraceRecord> for TraceRow {
    fn from(r: &TraceRecord) -> Self {
        Self {
            iteration: r.iteration,
            evaluations: r.evaluations_used,
            best_f: r.best_f,
            outcome: r.outcome,
            box_min: r.box_min_len,
            box_max: r.box_max_len,
            box_ratio: r.box_ratio,
            angle_to_optimum: r.angle_to_optimum,
        }
    }
}

impl TraceRow {
    /// Bitwise equality of every field (NaN equals NaN with the same payload).
    pub fn bit_eq(&self, other: &Self) -> bool {
        let same = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.iteration == other.iteration
            && self.evaluations == other.evaluations
            && same(self.best_f, other.best_f)
            && self.outcome == other.outcome
            && same(self.box_min, other.box_min)
            && same(self.box_max, other.box_max)
            && same(self.box_ratio, other.box_ratio)
            && match (self.angle_to_optimum, other.angle_to_optimum) {
                (Some(a), Some(b)) => same(a, b),
                (None, None) => true,
                _ => false,
            }
    }
}

/// 17 significant digits; `NaN`, `inf` and `-inf` for non-finite values.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_float(v: f64) -> String {
    if v.is_finite() {
        fmt_float(v)
    } else {
        format!("\"{}\"", fmt_float(v))
    }
}

pub fn write_trace<W: Write>(trace: &Trace, format: TraceFormat, out: &mut W) -> Result<()> {
    match format {
        TraceFormat::Csv => write_trace_csv(trace, out),
        TraceFormat::Jsonl => write_trace_jsonl(trace, out),
    }
}

/// Serializes a trace to bytes.
pub fn export_trace(trace: &Trace, format: TraceFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace(trace, format, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn write_trace_csv<W: Write>(trace: &Trace, out: &mut W) -> Result<()> {
    writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
    let mut line = String::new();
    for r in &trace.records {
        line.clear();
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},",
            r.iteration,
            r.evaluations_used,
            fmt_float(r.best_f),
            r.outcome,
            fmt_float(r.box_min_len),
            fmt_float(r.box_max_len),
            fmt_float(r.box_ratio),
        );
        if let Some(a) = r.angle_to_optimum {
            line.push_str(&fmt_float(a));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_trace_jsonl<W: Write>(trace: &Trace, out: &mut W) -> Result<()> {
    for r in &trace.records {
        let angle = r
            .angle_to_optimum
            .map_or_else(|| "null".to_string(), json_float);
        writeln!(
            out,
            "{{\"iteration\":{},\"evaluations\":{},\"best_f\":{},\"outcome\":\"{}\",\"box_min\":{},\"box_max\":{},\"box_ratio\":{},\"angle_to_optimum\":{}}}",
            r.iteration,
            r.evaluations_used,
            json_float(r.best_f),
            r.outcome,
            json_float(r.box_min_len),
            json_float(r.box_max_len),
            json_float(r.box_ratio),
            angle,
        )?;
    }
    Ok(())
}

fn content_lines<R: BufRead>(input: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            l.as_ref()
                .map_or(true, |s| !s.starts_with('#') && !s.trim().is_empty())
        })
}

fn parse_num<T: std::str::FromStr>(line: usize, field: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(line, format!("bad value `{raw}` for `{field}`")))
}

pub fn read_trace<R: BufRead>(input: R, format: TraceFormat) -> Result<Vec<TraceRow>> {
    match format {
        TraceFormat::Csv => read_trace_csv(input),
        TraceFormat::Jsonl => read_trace_jsonl(input),
    }
}

pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (n, line) in content_lines(input) {
        let line = line?;
        if !header_seen {
            if line != TRACE_COLUMNS.join(",") {
                return Err(Error::parse(n, "unexpected trace header"));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != TRACE_COLUMNS.len() {
            return Err(Error::parse(
                n,
                format!("expected {} fields, got {}", TRACE_COLUMNS.len(), f.len()),
            ));
        }
        rows.push(TraceRow {
            iteration: parse_num(n, "iteration", f[0])?,
            evaluations: parse_num(n, "evaluations", f[1])?,
            best_f: parse_num(n, "best_f", f[2])?,
            outcome: f[3]
                .parse()
                .map_err(|e: ras_core::Error| Error::parse(n, e.to_string()))?,
            box_min: parse_num(n, "box_min", f[4])?,
            box_max: parse_num(n, "box_max", f[5])?,
            box_ratio: parse_num(n, "box_ratio", f[6])?,
            angle_to_optimum: if f[7].is_empty() {
                None
            } else {
                Some(parse_num(n, "angle_to_optimum", f[7])?)
            },
        });
    }
    if !header_seen {
        return Err(Error::parse(0, "missing trace header"));
    }
    Ok(rows)
}

fn json_f64(n: usize, v: &Value, field: &str) -> Result<f64> {
    match v.get(field) {
        Some(Value::Number(x)) => x
            .as_f64()
            .ok_or_else(|| Error::parse(n, format!("`{field}` out of range"))),
        Some(Value::String(s)) => parse_num(n, field, s),
        _ => Err(Error::parse(n, format!("missing number `{field}`"))),
    }
}

fn json_usize(n: usize, v: &Value, field: &str) -> Result<usize> {
    v.get(field)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| Error::parse(n, format!("missing integer `{field}`")))
}

pub fn read_trace_jsonl<R: BufRead>(input: R) -> Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    for (n, line) in content_lines(input) {
        let v: Value = serde_json::from_str(&line?).map_err(|e| Error::parse(n, e.to_string()))?;
        let outcome = v
            .get("outcome")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::parse(n, "missing `outcome`"))?
            .parse()
            .map_err(|e: ras_core::Error| Error::parse(n, e.to_string()))?;
        rows.push(TraceRow {
            iteration: json_usize(n, &v, "iteration")?,
            evaluations: json_usize(n, &v, "evaluations")?,
            best_f: json_f64(n, &v, "best_f")?,
            outcome,
            box_min: json_f64(n, &v, "box_min")?,
            box_max: json_f64(n, &v, "box_max")?,
            box_ratio: json_f64(n, &v, "box_ratio")?,
            angle_to_optimum: match v.get("angle_to_optimum") {
                None | Some(Value::Null) => None,
                Some(_) => Some(json_f64(n, &v, "angle_to_optimum")?),
            },
        });
    }
    Ok(rows)
}

/// Quartile bands per evaluation budget.
pub fn write_summary_csv<W: Write>(summary: &MultiRunSummary, out: &mut W) -> Result<()> {
    let filtered = summary.filtered_runs.is_some();
    write!(out, "evaluations,runs,min,q1,median,q3,max,mean")?;
    if filtered {
        write!(out, ",filtered_runs,filtered_mean")?;
    }
    writeln!(out)?;
    for p in &summary.points {
        let s = &p.stats;
        write!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.evaluations,
            summary.runs,
            fmt_float(s.min),
            fmt_float(s.q1),
            fmt_float(s.median),
            fmt_float(s.q3),
            fmt_float(s.max),
            fmt_float(s.mean)
        )?;
        if let (Some(k), Some(m)) = (summary.filtered_runs, p.filtered_mean) {
            write!(out, ",{},{}", k, fmt_float(m))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// One row per `(eta, rho_con, variant)` cell.
pub fn write_grid_csv<W: Write>(cells: &[AblationCell], out: &mut W) -> Result<()> {
    writeln!(
        out,
        "eta,rho_con,rho_dil,variant,runs,failures,min,q1,median,q3,max,mean"
    )?;
    for c in cells {
        let s = &c.summary;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.eta,
            c.rho_con,
            fmt_float(c.rho_dil),
            c.variant,
            c.values.len(),
            c.failures.len(),
            fmt_float(s.min),
            fmt_float(s.q1),
            fmt_float(s.median),
            fmt_float(s.q3),
            fmt_float(s.max),
            fmt_float(s.mean)
        )?;
    }
    Ok(())
}

/// One row per dimension.
pub fn write_angles_csv<W: Write>(rows: &[AngleTableRow], out: &mut W) -> Result<()> {
    writeln!(out, "dim,avg_angle_deg,std_error_deg,n_samples")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.dim,
            fmt_float(r.avg_angle_deg),
            fmt_float(r.std_error_deg),
            r.n_samples
        )?;
    }
    Ok(())
}

/// Table layout: one row per radius ratio (in first-seen order), one column
/// per dimension (in first-seen order), probabilities to two decimals.
pub fn write_success_table<W: Write>(rows: &[SuccessProbRow], out: &mut W) -> Result<()> {
    let mut dims: Vec<usize> = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    for r in rows {
        if !dims.contains(&r.dim) {
            dims.push(r.dim);
        }
        if !ratios.contains(&r.radius_ratio) {
            ratios.push(r.radius_ratio);
        }
    }
    write!(out, "ratio")?;
    for d in &dims {
        write!(out, ",{d}")?;
    }
    writeln!(out)?;
    for ratio in &ratios {
        write!(out, "{ratio:.3}")?;
        for d in &dims {
            match rows
                .iter()
                .find(|r| r.dim == *d && r.radius_ratio == *ratio)
            {
                Some(r) => write!(out, ",{:.2}", r.probability)?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// `(ratio, probability per dimension)`.
pub type SuccessRow = (f64, Vec<f64>);

/// Parses a success table back into its dimension header and rows.
pub fn read_success_table<R: BufRead>(input: R) -> Result<(Vec<usize>, Vec<SuccessRow>)> {
    let mut lines = content_lines(input);
    let (n, header) = lines.next().ok_or_else(|| Error::parse(0, "empty table"))?;
    let header = header?;
    let mut cols = header.split(',');
    if cols.next() != Some("ratio") {
        return Err(Error::parse(n, "expected `ratio` header"));
    }
    let dims = cols
        .map(|c| parse_num(n, "dim", c))
        .collect::<Result<Vec<usize>>>()?;
    let mut rows = Vec::new();
    for (n, line) in lines {
        let line = line?;
        let mut f = line.split(',');
        let ratio = parse_num(n, "ratio", f.next().unwrap_or_default())?;
        let probs = f
            .map(|c| parse_num(n, "probability", c))
            .collect::<Result<Vec<f64>>>()?;
        if probs.len() != dims.len() {
            return Err(Error::parse(n, "row length differs from header"));
        }
        rows.push((ratio, probs));
    }
    Ok((dims, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ras_core::RasConfig;

    fn sample_trace() -> Trace {
        let mut t = Trace::new(RasConfig::default(), 3.0, 1);
        for i in 1..=4 {
            t.push(TraceRecord {
                iteration: i,
                evaluations_used: 2 * i,
                best_f: 1.0 / i as f64,
                f_first_shot: 0.1,
                non_finite: false,
                outcome: if i % 2 == 0 {
                    StepOutcome::DoubleFailure
                } else {
                    StepOutcome::SecondShot
                },
                box_min_len: 0.1 / 3.0,
                box_max_len: std::f64::consts::PI,
                box_ratio: 0.1 / 3.0 / std::f64::consts::PI,
                angle_to_optimum: if i == 2 { None } else { Some(1.0 / 7.0) },
            });
        }
        t
    }

    #[test]
    fn empty_trace_is_header_only() {
        let t = Trace::new(RasConfig::default(), 1.0, 1);
        let csv = String::from_utf8(export_trace(&t, TraceFormat::Csv)).unwrap();
        assert_eq!(
            csv,
            "iteration,evaluations,best_f,outcome,box_min,box_max,box_ratio,angle_to_optimum\n"
        );
        assert!(export_trace(&t, TraceFormat::Jsonl).is_empty());
    }

    #[test]
    fn csv_and_jsonl_round_trip() {
        let t = sample_trace();
        let expected: Vec<TraceRow> = t.records.iter().map(TraceRow::from).collect();
        for format in [TraceFormat::Csv, TraceFormat::Jsonl] {
            let bytes = export_trace(&t, format);
            let rows = read_trace(bytes.as_slice(), format).unwrap();
            assert_eq!(rows.len(), expected.len());
            assert!(
                rows.iter().zip(&expected).all(|(a, b)| a.bit_eq(b)),
                "{format:?}"
            );
        }
        let jsonl = String::from_utf8(export_trace(&t, TraceFormat::Jsonl)).unwrap();
        assert_eq!(jsonl.lines().count(), t.len());
        let csv = String::from_utf8(export_trace(&t, TraceFormat::Csv)).unwrap();
        assert!(csv.lines().nth(2).unwrap().ends_with(','));
    }

    #[test]
    fn non_finite_values_survive() {
        let mut t = sample_trace();
        t.records[0].best_f = f64::INFINITY;
        t.records[1].box_max_len = f64::NAN;
        for format in [TraceFormat::Csv, TraceFormat::Jsonl] {
            let rows = read_trace(export_trace(&t, format).as_slice(), format).unwrap();
            assert_eq!(rows[0].best_f, f64::INFINITY);
            assert!(rows[1].box_max.is_nan());
        }
    }

    #[test]
    fn comment_lines_are_skipped() {
        let mut bytes = b"# ras run --seed 1\n".to_vec();
        bytes.extend(export_trace(&sample_trace(), TraceFormat::Csv));
        assert_eq!(read_trace_csv(bytes.as_slice()).unwrap().len(), 4);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(read_trace_csv("a,b\n".as_bytes()).is_err());
        let bad = format!("{}\n1,2,x,first-shot,1,1,1,\n", TRACE_COLUMNS.join(","));
        assert!(matches!(
            read_trace_csv(bad.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_trace_jsonl("{\"iteration\":1}\n".as_bytes()).is_err());
    }

    #[test]
    fn success_table_layout() {
        let rows = vec![
            SuccessProbRow {
                dim: 1,
                radius_ratio: 1.0,
                probability: 1.0,
                n_samples: 10,
            },
            SuccessProbRow {
                dim: 2,
                radius_ratio: 1.0,
                probability: 0.781,
                n_samples: 10,
            },
            SuccessProbRow {
                dim: 1,
                radius_ratio: 0.5,
                probability: 1.0,
                n_samples: 10,
            },
            SuccessProbRow {
                dim: 2,
                radius_ratio: 0.5,
                probability: 0.894,
                n_samples: 10,
            },
        ];
        let mut buf = Vec::new();
        write_success_table(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "ratio,1,2\n1.000,1.00,0.78\n0.500,1.00,0.89\n"
        );
        let (dims, table) = read_success_table(buf.as_slice()).unwrap();
        assert_eq!(dims, vec![1, 2]);
        assert_eq!(table[1], (0.5, vec![1.0, 0.89]));
    }
}
