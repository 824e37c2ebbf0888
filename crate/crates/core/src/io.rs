//! CSV and JSON artifacts. Reals are written with 17 significant digits so
//! that a write/read cycle is lossless.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metrics::{ConvergenceReport, ErrorReport};
use crate::{Error, Result, Signal, TimeGrid, C64};

/// `x` with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Columns `t, re_q, im_q`.
pub fn signal_csv(signal: &Signal) -> String {
    let mut s = String::from("t,re_q,im_q\n");
    for (t, q) in signal.grid.times().zip(&signal.q) {
        let _ = writeln!(s, "{},{},{}", fmt_real(t), fmt_real(q.re), fmt_real(q.im));
    }
    s
}

/// Reads [`signal_csv`] output. The grid is rebuilt from the first two
/// sample times and the sample count.
pub fn parse_signal_csv(text: &str) -> Result<Signal> {
    let mut t = Vec::new();
    let mut q = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Config(format!("line {}: expected 3 columns", n + 1)));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))
        };
        t.push(num(cols[0])?);
        q.push(C64::new(num(cols[1])?, num(cols[2])?));
    }
    let step = match t.as_slice() {
        [] => return Err(Error::Empty("signal CSV")),
        [_] => 0.0,
        [a, b, ..] => b - a,
    };
    Ok(Signal::new(TimeGrid::new(t[0], step, t.len()), q))
}

/// Columns `t, epsilon`.
pub fn error_csv(report: &ErrorReport, grid: TimeGrid) -> String {
    let mut s = String::from("t,epsilon\n");
    for (t, e) in grid.times().zip(&report.pointwise) {
        let _ = writeln!(s, "{},{}", fmt_real(t), fmt_real(*e));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub label: String,
    pub h: f64,
    pub rmse: f64,
    pub max: f64,
    pub slope: Option<f64>,
}

impl From<&ErrorReport> for ErrorSummary {
    fn from(r: &ErrorReport) -> Self {
        Self {
            label: r.label.clone(),
            h: r.h,
            rmse: r.rmse,
            max: r.max(),
            slope: None,
        }
    }
}

/// Columns `h, rmse`.
pub fn sweep_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from("h,rmse\n");
    for r in &report.reports {
        let _ = writeln!(s, "{},{}", fmt_real(r.h), fmt_real(r.rmse));
    }
    s
}

/// One summary per step size, each carrying the fitted slope.
pub fn sweep_summaries(report: &ConvergenceReport) -> Vec<ErrorSummary> {
    report
        .reports
        .iter()
        .map(|r| ErrorSummary {
            slope: report.slope,
            ..ErrorSummary::from(r)
        })
        .collect()
}

/// Pretty JSON with a trailing newline. Non-finite reals become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}
