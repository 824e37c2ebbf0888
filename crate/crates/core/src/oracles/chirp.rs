use serde::{Deserialize, Serialize};

use crate::{Error, Result, Signal, TimeGrid, C64};

/// `q(t) = A sech(t)^{1 + iC}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChirpedSechParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl ChirpedSechParams {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Config(format!(
                "chirped sech amplitude must be positive, got {a}"
            )));
        }
        Ok(Self { a, c })
    }

    pub fn value(&self, t: f64) -> C64 {
        // sech(t)^{1+iC} = sech(t) e^{-iC ln cosh t}
        let lc = log_cosh(t);
        C64::from_polar(self.a * (-lc).exp(), -self.c * lc)
    }
}

fn log_cosh(t: f64) -> f64 {
    let x = t.abs();
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

pub fn chirped_sech(p: &ChirpedSechParams, grid: TimeGrid) -> Signal {
    Signal::from_fn(grid, |t| p.value(t))
}
