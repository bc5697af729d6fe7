//! CSV input, path tables and JSON summaries.

use std::fmt::Write as _;
use std::path::Path as FsPath;

use ndarray::{Array1, Array2, ShapeBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::LarsError;
use crate::path::{Action, Path};
use crate::preprocess::{to_original_units, StandardizedDesign};
use crate::select::{CpReport, DfEstimate, SimulationResult};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed CSV at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },
    #[error("non-numeric value `{value}` in data row {row}, column `{name}`")]
    NonNumericCell {
        row: usize,
        name: String,
        value: String,
    },
    #[error("response column `{0}` not found")]
    MissingResponse(String),
    #[error("no data rows")]
    EmptyData,
    #[error("{0}")]
    File(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] LarsError),
}

/// Covariates, response and covariate names read from a table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub columns: Array2<f64>,
    pub response: Array1<f64>,
    pub names: Vec<String>,
}

fn delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains('\t') && !header.contains(',') {
        b'\t'
    } else {
        b','
    }
}

/// Parses a rectangular table with a header row. Tab separated input is
/// recognized from the header. Data rows are numbered from 1.
pub fn parse_csv(text: &str, response_column: &str) -> Result<CsvData, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter(text))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        IoError::Parse {
            line,
            column: 0,
            message: e.to_string(),
        }
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(parse_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let response_at = header
        .iter()
        .position(|h| h == response_column)
        .ok_or_else(|| IoError::MissingResponse(response_column.to_string()))?;
    let width = header.len();
    let mut values: Vec<f64> = Vec::new();
    let mut response = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(parse_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return Err(IoError::Parse {
                line,
                column: record.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        rows += 1;
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| IoError::NonNumericCell {
                row: rows,
                name: header[j].clone(),
                value: cell.to_string(),
            })?;
            if j == response_at {
                response.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if rows == 0 {
        return Err(IoError::EmptyData);
    }
    let p = width - 1;
    let columns = Array2::from_shape_vec((rows, p), values).expect("rectangular by construction");
    let mut fortran = Array2::zeros((rows, p).f());
    fortran.assign(&columns);
    let names = header
        .into_iter()
        .enumerate()
        .filter(|(j, _)| *j != response_at)
        .map(|(_, h)| h)
        .collect();
    Ok(CsvData {
        columns: fortran,
        response: Array1::from(response),
        names,
    })
}

pub fn read_csv(path: &FsPath, response_column: &str) -> Result<CsvData, IoError> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, response_column)
}

/// Coefficient scale used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Original,
    Standardized,
}

/// Shortest decimal form with 17 significant digits, so values round-trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row of the path table.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub step: usize,
    pub action: String,
    pub variable: String,
    /// 1-based column number of `variable`, 0 when there is none.
    pub index: usize,
    pub sign: i8,
    pub gamma: f64,
    pub c_max: f64,
    pub a: f64,
    pub t: f64,
    pub rss: f64,
    pub projected_out: Vec<String>,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathTable {
    pub names: Vec<String>,
    pub rows: Vec<PathRecord>,
}

const FIXED_HEADER: [&str; 11] = [
    "step",
    "action",
    "variable",
    "index",
    "sign",
    "gamma",
    "c_max",
    "a",
    "t",
    "rss",
    "projected_out",
];

impl PathTable {
    pub fn from_path(
        path: &Path,
        design: &StandardizedDesign,
        units: Units,
    ) -> Result<Self, IoError> {
        let names = design.names().to_vec();
        let mut rows = Vec::with_capacity(path.steps.len());
        for s in &path.steps {
            let (action, var) = match s.action {
                Action::Add(j) => ("ADD", Some(j)),
                Action::Drop(j) => ("DROP", Some(j)),
                Action::Final => ("FINAL", None),
            };
            let sign = match s.action {
                Action::Add(j) => s
                    .active
                    .iter()
                    .position(|&a| a == j)
                    .map(|p| s.signs[p] as i8)
                    .unwrap_or(0),
                _ => 0,
            };
            let coefficients = match units {
                Units::Standardized => s.beta.to_vec(),
                Units::Original => to_original_units(design, s.beta.view())?.0.to_vec(),
            };
            rows.push(PathRecord {
                step: s.step,
                action: action.to_string(),
                variable: var.map(|j| names[j].clone()).unwrap_or_default(),
                index: var.map(|j| j + 1).unwrap_or(0),
                sign,
                gamma: s.gamma,
                c_max: s.c_max,
                a: s.a,
                t: s.l1_norm,
                rss: s.rss,
                projected_out: s.projected_out.iter().map(|&j| names[j].clone()).collect(),
                coefficients,
            });
        }
        Ok(Self { names, rows })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = FIXED_HEADER
            .iter()
            .copied()
            .chain(self.names.iter().map(String::as_str))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.step,
                r.action,
                r.variable,
                r.index,
                r.sign,
                format_float(r.gamma),
                format_float(r.c_max),
                format_float(r.a),
                format_float(r.t),
                format_float(r.rss),
                r.projected_out.join(";"),
            );
            for c in &r.coefficients {
                out.push(',');
                out.push_str(&format_float(*c));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(IoError::EmptyData)?;
        let header: Vec<&str> = header.split(',').collect();
        if header.len() < FIXED_HEADER.len() || header[..FIXED_HEADER.len()] != FIXED_HEADER {
            return Err(IoError::Parse {
                line: 1,
                column: 1,
                message: "not a path table header".into(),
            });
        }
        let names: Vec<String> = header[FIXED_HEADER.len()..]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line_no = i as u64 + 1;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != header.len() {
                return Err(IoError::Parse {
                    line: line_no,
                    column: f.len().min(header.len()) + 1,
                    message: format!("expected {} fields, found {}", header.len(), f.len()),
                });
            }
            let bad = |column: usize| IoError::Parse {
                line: line_no,
                column: column + 1,
                message: format!("cannot parse `{}`", f[column]),
            };
            let num = |column: usize| f[column].parse::<f64>().map_err(|_| bad(column));
            rows.push(PathRecord {
                step: f[0].parse().map_err(|_| bad(0))?,
                action: f[1].to_string(),
                variable: f[2].to_string(),
                index: f[3].parse().map_err(|_| bad(3))?,
                sign: f[4].parse().map_err(|_| bad(4))?,
                gamma: num(5)?,
                c_max: num(6)?,
                a: num(7)?,
                t: num(8)?,
                rss: num(9)?,
                projected_out: if f[10].is_empty() {
                    Vec::new()
                } else {
                    f[10].split(';').map(str::to_string).collect()
                },
                coefficients: (FIXED_HEADER.len()..f.len())
                    .map(num)
                    .collect::<Result<_, _>>()?,
            });
        }
        Ok(Self { names, rows })
    }
}

/// The path as CSV text, one row per vertex.
pub fn write_path_csv(
    path: &Path,
    design: &StandardizedDesign,
    units: Units,
) -> Result<String, IoError> {
    Ok(PathTable::from_path(path, design, units)?.render())
}

/// Machine-readable digest of a fitted path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub variant: String,
    pub steps: usize,
    pub entry_order: Vec<String>,
    /// 1-based column numbers of `entry_order`.
    pub entry_indices: Vec<usize>,
    pub drops: Vec<String>,
    pub t_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cp_argmin: Option<usize>,
}

impl PathSummary {
    pub fn new(path: &Path, names: &[String], cp_argmin: Option<usize>) -> Self {
        let order = path.entry_order();
        Self {
            variant: path.variant.to_string(),
            steps: path.num_steps(),
            entry_order: order.iter().map(|&j| names[j].clone()).collect(),
            entry_indices: order.iter().map(|&j| j + 1).collect(),
            drops: path
                .drops()
                .iter()
                .map(|&(_, j)| names[j].clone())
                .collect(),
            t_max: path.t_max(),
            cp_argmin,
        }
    }
}

pub fn write_cp_csv(report: &CpReport) -> String {
    let mut out = String::from("k,df,rss,cp\n");
    for k in 0..report.cp.len() {
        let _ = writeln!(
            out,
            "{k},{},{},{}",
            format_float(report.df_used[k]),
            format_float(report.rss[k]),
            format_float(report.cp[k])
        );
    }
    out
}

pub fn write_df_csv(estimates: &[DfEstimate]) -> String {
    let mut out = String::from("k,df_hat,ci_low,ci_high\n");
    for e in estimates {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.k,
            format_float(e.df_hat),
            format_float(e.ci_low),
            format_float(e.ci_high)
        );
    }
    out
}

pub fn write_simulation_csv(result: &SimulationResult) -> String {
    let mut out = String::from("method,step,mean_nonzero,pe_mean,pe_sd\n");
    for c in &result.curves {
        for s in 0..c.pe_mean.len() {
            let _ = writeln!(
                out,
                "{},{s},{},{},{}",
                c.method,
                format_float(c.mean_nonzero[s]),
                format_float(c.pe_mean[s]),
                format_float(c.pe_sd[s])
            );
        }
    }
    out
}
