//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each exported function returns a JSON document; the page plots it on a
//! canvas. The work is done by the `*_json` functions, which are plain Rust
//! and testable natively.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gtib::cutter::{plan, recover, CutPlan, Method, PlanOptions, SpectralPair};
use gtib::metrics::{pointwise_error_signals, rmse};
use gtib::oracles::{darboux_multisoliton, darboux_seed_data, exact_soliton, soliton_train_data, SolitonParams};
use gtib::scenarios::two_soliton_params;
use gtib::spectral::Side;
use gtib::{Error, Result, Signal, TimeGrid};

/// Largest grid the page may request.
const MAX_INTERVALS: usize = 8192;

#[derive(Serialize)]
struct Curves {
    t: Vec<f64>,
    recovered: Vec<f64>,
    exact: Vec<f64>,
    error: Vec<f64>,
    rmse: f64,
    max_error: f64,
    centers: Vec<f64>,
    zones: Vec<[f64; 2]>,
}

fn parse_method(name: &str) -> Result<Method> {
    serde_json::from_value(serde_json::Value::String(name.to_owned()))
        .map_err(|_| Error::Config(format!("unknown method {name:?}")))
}

fn grid(lo: f64, hi: f64, intervals: usize) -> Result<TimeGrid> {
    if !(hi > lo) || !(2..=MAX_INTERVALS).contains(&intervals) {
        return Err(Error::Config(format!(
            "grid needs lo < hi and 2 <= M <= {MAX_INTERVALS}"
        )));
    }
    Ok(TimeGrid::covering(lo, hi, intervals))
}

fn make_plan(data: &SpectralPair, grid: TimeGrid, method: Method, zone_constant: f64) -> Result<CutPlan> {
    let m = grid.intervals();
    let options = PlanOptions {
        method,
        zone_constant,
        extra: None,
    };
    plan(data, grid, m as f64 * 2.0 * grid.step, m, &options)
}

fn curves(data: &SpectralPair, exact: &Signal, method: Method, zone_constant: f64) -> Result<String> {
    let p = make_plan(data, exact.grid, method, zone_constant)?;
    let q = recover(data, &p)?.signal;
    let error = pointwise_error_signals(&q, exact)?;
    // NaN from a stopped segment is not valid JSON
    let finite = |v: f64| if v.is_finite() { v } else { -1.0 };
    let out = Curves {
        t: exact.grid.times().collect(),
        recovered: q.q.iter().map(|v| finite(v.norm())).collect(),
        exact: exact.q.iter().map(|v| v.norm()).collect(),
        error: error.iter().map(|&e| finite(e)).collect(),
        rmse: finite(rmse(&error)?),
        max_error: finite(error.iter().copied().fold(0.0, f64::max)),
        zones: p.zones.iter().map(|z| [z.lo(), z.hi()]).collect(),
        centers: p.centers,
    };
    Ok(serde_json::to_string(&out)?)
}

/// Recovery of a lone soliton against the exact formula.
pub fn soliton_json(eta: f64, xi: f64, theta: f64, delta: f64, intervals: usize, method: &str) -> Result<String> {
    let p = SolitonParams::new(eta, xi, theta, delta)?;
    let c = p.center();
    let g = grid(c - 10.0 / eta, c + 10.0 / eta, intervals)?;
    let data = SpectralPair::from_data(soliton_train_data(&[p], Side::Left)?);
    curves(&data, &exact_soliton(&p, g), parse_method(method)?, 6.0)
}

/// The two-soliton scenario with separation parameter `delta`.
pub fn two_soliton_json(delta: f64, intervals: usize, method: &str, zone_constant: f64) -> Result<String> {
    if !(zone_constant > 0.0) {
        return Err(Error::Config("zone constant must be positive".into()));
    }
    let ps = two_soliton_params(delta);
    let left = darboux_seed_data(&ps, Side::Left)?;
    let g = grid(ps[0].center() - 8.0, ps[1].center() + 8.0 / 1.75, intervals)?;
    let exact = darboux_multisoliton(&left.discrete, g)?;
    curves(
        &SpectralPair::from_data(left),
        &exact,
        parse_method(method)?,
        zone_constant,
    )
}

/// Cut plan of the two-soliton scenario.
pub fn plan_json(delta: f64, intervals: usize, method: &str, zone_constant: f64) -> Result<String> {
    let ps = two_soliton_params(delta);
    let data = SpectralPair::from_data(darboux_seed_data(&ps, Side::Left)?);
    let g = grid(ps[0].center() - 8.0, ps[1].center() + 8.0 / 1.75, intervals)?;
    make_plan(&data, g, parse_method(method)?, zone_constant)?.to_json()
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn soliton(
    eta: f64,
    xi: f64,
    theta: f64,
    delta: f64,
    intervals: usize,
    method: &str,
) -> std::result::Result<String, JsError> {
    js(soliton_json(eta, xi, theta, delta, intervals, method))
}

#[wasm_bindgen]
pub fn two_soliton(
    delta: f64,
    intervals: usize,
    method: &str,
    zone_constant: f64,
) -> std::result::Result<String, JsError> {
    js(two_soliton_json(delta, intervals, method, zone_constant))
}

#[wasm_bindgen]
pub fn cut_plan(
    delta: f64,
    intervals: usize,
    method: &str,
    zone_constant: f64,
) -> std::result::Result<String, JsError> {
    js(plan_json(delta, intervals, method, zone_constant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn soliton_curve_is_accurate() {
        let v = parse(&soliton_json(1.0, 0.5, 0.8, 0.0, 800, "extended").unwrap());
        assert_eq!(v["t"].as_array().unwrap().len(), 801);
        assert!(v["max_error"].as_f64().unwrap() < 1e-3);
        assert!((v["zones"][0][0].as_f64().unwrap() + 6.0).abs() < 1e-3);
    }

    #[test]
    fn two_soliton_methods_differ_when_separated() {
        let cut = parse(&two_soliton_json(32.0, 2000, "with_cuts", 6.0).unwrap());
        let nocut = parse(&two_soliton_json(32.0, 2000, "no_cuts", 6.0).unwrap());
        assert!(cut["rmse"].as_f64().unwrap() < 1e-3);
        assert!(nocut["max_error"].as_f64().unwrap() > 0.1);
        assert_eq!(cut["centers"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn plan_lists_segments() {
        let v = parse(&plan_json(32.0, 1000, "with_cuts", 6.0).unwrap());
        assert_eq!(v["units"].as_array().unwrap().len(), 2);
        assert!(v["segments"].as_array().unwrap().len() >= 3);
    }

    #[test]
    fn bad_requests_are_errors() {
        assert!(soliton_json(-1.0, 0.0, 0.0, 0.0, 100, "extended").is_err());
        assert!(soliton_json(1.0, 0.0, 0.0, 0.0, 1, "extended").is_err());
        assert!(two_soliton_json(8.0, 100, "sideways", 6.0).is_err());
        assert!(plan_json(8.0, MAX_INTERVALS + 1, "extended", 6.0).is_err());
    }
}
