use serde::{Deserialize, Serialize};

use crate::spectral::{soliton_transmission, DiscreteEigenvalue, Side, SignMode, SpectralData};
use crate::{Error, Result, Signal, TimeGrid, C64};

/// `q(t) = 2 eta sech(2 eta t - delta) exp(-i (2 xi t + theta))`, eigenvalue
/// `zeta = xi + i eta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub eta: f64,
    pub xi: f64,
    pub theta: f64,
    pub delta: f64,
}

impl SolitonParams {
    pub fn new(eta: f64, xi: f64, theta: f64, delta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidSpectralData(format!(
                "soliton eta must be positive, got {eta}"
            )));
        }
        Ok(Self { eta, xi, theta, delta })
    }

    pub fn zeta(&self) -> C64 {
        C64::new(self.xi, self.eta)
    }

    pub fn center(&self) -> f64 {
        self.delta / (2.0 * self.eta)
    }

    pub fn value(&self, t: f64) -> C64 {
        let arg = 2.0 * self.eta * t - self.delta;
        let amp = 2.0 * self.eta / arg.cosh();
        C64::from_polar(amp, -(2.0 * self.xi * t + self.theta))
    }

    /// Left norming constant of the isolated soliton, `2i eta e^{-delta - i theta}`.
    pub fn left_norming(&self) -> C64 {
        C64::new(0.0, 2.0 * self.eta) * C64::from_polar((-self.delta).exp(), -self.theta)
    }

    /// Right norming constant of the isolated soliton, `-2i eta e^{delta + i theta}`.
    pub fn right_norming(&self) -> C64 {
        C64::new(0.0, -2.0 * self.eta) * C64::from_polar(self.delta.exp(), self.theta)
    }

    pub fn eigenvalue(&self, side: Side) -> DiscreteEigenvalue {
        let norming = match side {
            Side::Left => self.left_norming(),
            Side::Right => self.right_norming(),
        };
        DiscreteEigenvalue {
            zeta: self.zeta(),
            norming,
        }
    }

    /// Parameters of the isolated soliton with the given eigenvalue and norming constant.
    pub fn from_eigenvalue(e: &DiscreteEigenvalue, side: Side) -> Self {
        let eta = e.zeta.im;
        // left: l/(2i eta) = e^{-delta - i theta}; right: r/(-2i eta) = e^{delta + i theta}
        let (delta, theta) = match side {
            Side::Left => {
                let u = e.norming / C64::new(0.0, 2.0 * eta);
                (-u.norm().ln(), -u.arg())
            }
            Side::Right => {
                let u = e.norming / C64::new(0.0, -2.0 * eta);
                (u.norm().ln(), u.arg())
            }
        };
        Self {
            eta,
            xi: e.zeta.re,
            theta,
            delta,
        }
    }
}

/// Samples of the exact soliton on `grid`.
pub fn exact_soliton(p: &SolitonParams, grid: TimeGrid) -> Signal {
    Signal::from_fn(grid, |t| p.value(t))
}

/// Spectral data of a soliton train in which soliton `k` looks, near its own
/// center, like the isolated soliton `params[k]`.
///
/// Each isolated norming constant is divided by the transmission of every
/// soliton between it and the normalization end of the line, which undoes
/// the position and phase shift those solitons would otherwise impose.
pub fn soliton_train_data(params: &[SolitonParams], side: Side) -> Result<SpectralData> {
    if params.is_empty() {
        return Err(Error::Empty("soliton train"));
    }
    let mut discrete = Vec::with_capacity(params.len());
    for (k, pk) in params.iter().enumerate() {
        let mut e = pk.eigenvalue(side);
        for (j, pj) in params.iter().enumerate() {
            if j == k {
                continue;
            }
            if (pj.zeta() - pk.zeta()).norm() < 1e-12 {
                return Err(Error::CoincidentEigenvalues);
            }
            let behind = match side {
                Side::Left => pj.center() < pk.center(),
                Side::Right => pj.center() > pk.center(),
            };
            if behind {
                let a = soliton_transmission(pj.zeta(), pk.zeta());
                e.norming /= a * a;
            }
        }
        discrete.push(DiscreteEigenvalue::new(e.zeta, e.norming)?);
    }
    SpectralData::with_sign(side, None, discrete, SignMode::WithDiscrete)
}

/// Spectral data of the multi-soliton obtained by Darboux dressing with each
/// soliton seeded by its isolated Jost ratio `b_k = -e^{delta_k + i theta_k}`.
///
/// The norming constants are the isolated ones divided by the transmission
/// of all other solitons, so interacting solitons end up shifted in position
/// and phase relative to `params`.
pub fn darboux_seed_data(params: &[SolitonParams], side: Side) -> Result<SpectralData> {
    if params.is_empty() {
        return Err(Error::Empty("soliton set"));
    }
    let mut discrete = Vec::with_capacity(params.len());
    for (k, pk) in params.iter().enumerate() {
        let mut e = pk.eigenvalue(side);
        for (j, pj) in params.iter().enumerate() {
            if j == k {
                continue;
            }
            if (pj.zeta() - pk.zeta()).norm() < 1e-12 {
                return Err(Error::CoincidentEigenvalues);
            }
            e.norming /= soliton_transmission(pj.zeta(), pk.zeta());
        }
        discrete.push(DiscreteEigenvalue::new(e.zeta, e.norming)?);
    }
    SpectralData::with_sign(side, None, discrete, SignMode::WithDiscrete)
}

/// Piecewise one-soliton approximation: each sample takes the soliton whose
/// center is nearest.
pub fn one_soliton_approximation(params: &[SolitonParams], grid: TimeGrid) -> Signal {
    Signal::from_fn(grid, |t| {
        params
            .iter()
            .min_by(|a, b| (a.center() - t).abs().total_cmp(&(b.center() - t).abs()))
            .map(|p| p.value(t))
            .unwrap_or_default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_soliton_peak() {
        let p = SolitonParams::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(p.value(0.0), C64::new(2.0, 0.0));
    }

    #[test]
    fn magnitude_is_symmetric_about_center() {
        let p = SolitonParams::new(1.3, 0.5, 0.8, 2.1).unwrap();
        let c = p.center();
        for s in [0.1, 0.7, 2.5] {
            assert_abs_diff_eq!(p.value(c - s).norm(), p.value(c + s).norm(), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(p.value(c).norm(), 2.6, epsilon = 1e-14);
    }

    #[test]
    fn norming_round_trip() {
        let p = SolitonParams::new(0.7, -0.3, 1.1, -2.5).unwrap();
        for side in [Side::Left, Side::Right] {
            let q = SolitonParams::from_eigenvalue(&p.eigenvalue(side), side);
            assert_abs_diff_eq!(q.delta, p.delta, epsilon = 1e-13);
            assert_abs_diff_eq!(q.theta, p.theta, epsilon = 1e-13);
        }
    }

    #[test]
    fn seed_data_of_one_is_the_isolated_soliton() {
        let p = SolitonParams::new(1.2, -0.5, 0.3, 1.0).unwrap();
        for side in [Side::Left, Side::Right] {
            let d = darboux_seed_data(&[p], side).unwrap();
            assert_eq!(d.discrete[0], p.eigenvalue(side));
        }
    }

    #[test]
    fn train_of_one_is_the_isolated_soliton() {
        let p = SolitonParams::new(1.0, 0.5, 0.8, 0.0).unwrap();
        let d = soliton_train_data(&[p], Side::Left).unwrap();
        assert_eq!(d.discrete[0].norming, p.left_norming());
        assert_eq!(d.sign_mode, SignMode::WithDiscrete);
    }
}
