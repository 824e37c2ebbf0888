//! Recovery errors and convergence-order fits.
//!
//! `eps(t) = |q(t) - q_exact(t)| / max |q_exact|` and
//! `RMSE = sqrt(mean eps^2)` over all grid points.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Signal, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub label: String,
    pub h: f64,
    pub rmse: f64,
    #[serde(skip)]
    pub pointwise: Vec<f64>,
}

impl ErrorReport {
    pub fn new(label: impl Into<String>, h: f64, q: &Signal, exact: &Signal) -> Result<Self> {
        let pointwise = pointwise_error_signals(q, exact)?;
        Ok(Self {
            label: label.into(),
            h,
            rmse: rmse(&pointwise)?,
            pointwise,
        })
    }

    pub fn max(&self) -> f64 {
        self.pointwise.iter().copied().fold(0.0, f64::max)
    }
}

/// Pointwise relative error. Non-finite recovered samples count as infinite error.
pub fn pointwise_error(q: &[C64], exact: &[C64]) -> Result<Vec<f64>> {
    if q.len() != exact.len() {
        return Err(Error::GridMismatch);
    }
    let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::ZeroReference);
    }
    Ok(q.iter()
        .zip(exact)
        .map(|(a, b)| {
            let d = (a - b).norm() / scale;
            if d.is_finite() {
                d
            } else {
                f64::INFINITY
            }
        })
        .collect())
}

/// [`pointwise_error`] after checking that both signals share a grid.
pub fn pointwise_error_signals(q: &Signal, exact: &Signal) -> Result<Vec<f64>> {
    if !q.grid.same_as(&exact.grid) {
        return Err(Error::GridMismatch);
    }
    pointwise_error(&q.q, &exact.q)
}

pub fn rmse(pointwise: &[f64]) -> Result<f64> {
    if pointwise.is_empty() {
        return Err(Error::Empty("error samples"));
    }
    let mean = pointwise.iter().map(|e| e * e).sum::<f64>() / pointwise.len() as f64;
    Ok(mean.sqrt())
}

/// Least-squares slope of `log rmse` against `log h`; `None` with fewer than
/// three points or any non-positive value.
pub fn fit_slope(h: &[f64], rmse: &[f64]) -> Option<f64> {
    if h.len() != rmse.len() || h.len() < 3 {
        return None;
    }
    if h.iter().chain(rmse).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = rmse.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub label: String,
    pub reports: Vec<ErrorReport>,
    pub slope: Option<f64>,
}

/// Runs `recover(h)` for each step size and fits the convergence order.
/// `recover` returns the recovered and the exact signal on a common grid.
pub fn convergence_sweep<F>(label: &str, h_list: &[f64], mut recover: F) -> Result<ConvergenceReport>
where
    F: FnMut(f64) -> Result<(Signal, Signal)>,
{
    if h_list.is_empty() {
        return Err(Error::Empty("step list"));
    }
    if h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("step sizes must be strictly decreasing".into()));
    }
    let mut reports = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let (q, exact) = recover(h)?;
        reports.push(ErrorReport::new(label, h, &q, &exact)?);
    }
    let hs: Vec<f64> = reports.iter().map(|r| r.h).collect();
    let rs: Vec<f64> = reports.iter().map(|r| r.rmse).collect();
    Ok(ConvergenceReport {
        label: label.into(),
        slope: fit_slope(&hs, &rs),
        reports,
    })
}
