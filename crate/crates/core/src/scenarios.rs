//! Reference experiments and the JSON experiment configuration.
//!
//! A configuration names a scenario, a grid and a recovery method:
//!
//! ```json
//! {
//!   "scenario": {"kind": "two_soliton", "delta": 32},
//!   "grid": {"tau": 0.01},
//!   "method": "with_cuts"
//! }
//! ```
//!
//! Every field is optional; the empty document `{}` is the single soliton
//! `eta = 1, xi = 0.5, theta = 0.8, delta = 0` on `[-10, 10]` with `tau = 0.01`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cutter::{Method, PlanOptions, SpectralPair, DEFAULT_ZONE_CONSTANT};
use crate::oracles::{
    chirped_sech, darboux_multisoliton, darboux_seed_data, exact_soliton, forward_scatter, soliton_train_data,
    ChirpedSechParams, Dispersion, SolitonParams,
};
use crate::spectral::{Side, SpectralData};
use crate::{Error, Result, Signal, TimeGrid};

/// Relative tolerance for the `tau`, `M`, `L` and `P` consistency checks.
const GRID_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    /// Spectral data read from JSON files; at least one side is required.
    FromSpectralFile {
        #[serde(default)]
        left: Option<PathBuf>,
        #[serde(default)]
        right: Option<PathBuf>,
    },
    SingleSoliton {
        #[serde(default = "default_soliton")]
        soliton: SolitonParams,
    },
    /// Solitons `(1, 0.5, 0.1, -delta)` and `(1.75, -1.4, 0.8, delta)`, each
    /// used as a Darboux seed.
    TwoSoliton {
        #[serde(default = "default_two_soliton_delta")]
        delta: f64,
    },
    /// The eight-soliton train of [`eight_soliton_params`].
    EightSoliton,
    /// `A sech(t)^{1 + iC}`, spectral data by forward scattering on
    /// `[-support, support]`.
    ChirpedSech {
        #[serde(rename = "A", default = "default_chirp_a")]
        a: f64,
        #[serde(rename = "C", default = "default_chirp_c")]
        c: f64,
        #[serde(default = "default_dispersion")]
        dispersion: Dispersion,
        #[serde(default = "default_chirp_support")]
        support: f64,
        /// Intervals of the forward-scattering grid on `[-support, support]`.
        #[serde(default = "default_scatter_intervals")]
        scatter_intervals: usize,
        /// The continuous spectrum is tabulated on `[-xi_max, xi_max]`.
        #[serde(default = "default_xi_max")]
        xi_max: f64,
        #[serde(default = "default_xi_intervals")]
        xi_intervals: usize,
    },
}

fn default_soliton() -> SolitonParams {
    SolitonParams {
        eta: 1.0,
        xi: 0.5,
        theta: 0.8,
        delta: 0.0,
    }
}
fn default_two_soliton_delta() -> f64 {
    8.0
}
fn default_chirp_a() -> f64 {
    5.2
}
fn default_chirp_c() -> f64 {
    4.0
}
fn default_dispersion() -> Dispersion {
    Dispersion::Anomalous
}
fn default_chirp_support() -> f64 {
    20.0
}
fn default_scatter_intervals() -> usize {
    8000
}
fn default_xi_max() -> f64 {
    30.0
}
fn default_xi_intervals() -> usize {
    2400
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::SingleSoliton {
            soliton: default_soliton(),
        }
    }
}

/// Eight solitons with centers `7k`, alternating `eta = 1.5` and `eta = 0.6`,
/// `xi_k = 0.4 sin(1.7k)` and `theta_k = 0.9k`.
///
/// With zone constant 6 the narrow solitons' zones (half-width 4) are
/// pairwise disjoint while consecutive broad solitons' zones (half-width 10)
/// overlap. Positions and phases are those each soliton takes inside the
/// train.
pub fn eight_soliton_params() -> Vec<SolitonParams> {
    (0..8)
        .map(|k| {
            let kf = k as f64;
            let eta = if k % 2 == 0 { 1.5 } else { 0.6 };
            SolitonParams {
                eta,
                xi: 0.4 * (1.7 * kf).sin(),
                theta: 0.9 * kf,
                delta: 2.0 * eta * 7.0 * kf,
            }
        })
        .collect()
}

/// Parameters of the two-soliton scenario before interaction.
pub fn two_soliton_params(delta: f64) -> [SolitonParams; 2] {
    [
        SolitonParams {
            eta: 1.0,
            xi: 0.5,
            theta: 0.1,
            delta: -delta,
        },
        SolitonParams {
            eta: 1.75,
            xi: -1.4,
            theta: 0.8,
            delta,
        },
    ]
}

/// Spectral data of a scenario together with its exact signal, when known.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub data: SpectralPair,
    reference: Reference,
}

#[derive(Clone, Debug)]
enum Reference {
    None,
    Soliton(SolitonParams),
    Darboux(SpectralData),
    Chirp(ChirpedSechParams),
}

impl Prepared {
    /// Exact signal on `grid`, or `None` when no oracle exists.
    pub fn reference(&self, grid: TimeGrid) -> Result<Option<Signal>> {
        Ok(match &self.reference {
            Reference::None => None,
            Reference::Soliton(p) => Some(exact_soliton(p, grid)),
            Reference::Darboux(left) => Some(darboux_multisoliton(&left.discrete, grid)?),
            Reference::Chirp(p) => Some(chirped_sech(p, grid)),
        })
    }

    pub fn has_reference(&self) -> bool {
        !matches!(self.reference, Reference::None)
    }
}

impl Scenario {
    /// Default recovery interval and sampling step.
    pub fn default_domain(&self) -> Option<(f64, f64, f64)> {
        match self {
            Scenario::FromSpectralFile { .. } => None,
            Scenario::SingleSoliton { soliton } => {
                let c = soliton.center();
                let w = 10.0 / soliton.eta;
                Some((c - w, c + w, 0.01 / soliton.eta))
            }
            Scenario::TwoSoliton { delta } => {
                let [a, b] = two_soliton_params(*delta);
                let (lo, hi) = (a.center() - 8.0 / a.eta, b.center() + 8.0 / b.eta);
                Some((lo.min(hi - 16.0), hi.max(lo + 16.0), 0.01))
            }
            Scenario::EightSoliton => Some((-8.0 / 1.5, 49.0 + 8.0 / 0.6, 0.01)),
            Scenario::ChirpedSech { support, .. } => Some((-support, *support, 0.01)),
        }
    }

    /// The unshifted soliton parameters, for soliton scenarios.
    pub fn soliton_params(&self) -> Option<Vec<SolitonParams>> {
        match self {
            Scenario::SingleSoliton { soliton } => Some(vec![*soliton]),
            Scenario::TwoSoliton { delta } => Some(two_soliton_params(*delta).to_vec()),
            Scenario::EightSoliton => Some(eight_soliton_params()),
            _ => None,
        }
    }

    /// Loads or synthesizes the spectral data. File paths are resolved
    /// against `base`.
    pub fn prepare(&self, base: &Path) -> Result<Prepared> {
        match self {
            Scenario::FromSpectralFile { left, right } => {
                let load = |p: &Option<PathBuf>| -> Result<Option<SpectralData>> {
                    p.as_ref()
                        .map(|p| {
                            let path = base.join(p);
                            let text = std::fs::read_to_string(&path).map_err(|e| {
                                Error::Config(format!("cannot read spectral file {}: {e}", path.display()))
                            })?;
                            SpectralData::from_json(&text)
                        })
                        .transpose()
                };
                let (l, r) = (load(left)?, load(right)?);
                let data = match (l, r) {
                    (None, None) => return Err(Error::Config("from_spectral_file needs a left or right file".into())),
                    (Some(d), None) | (None, Some(d)) => SpectralPair::from_data(d),
                    (l, r) => SpectralPair::new(l, r)?,
                };
                let reference = match &data.left {
                    Some(l) if l.continuous.as_ref().is_none_or(|c| c.is_zero()) && !l.discrete.is_empty() => {
                        Reference::Darboux(l.clone())
                    }
                    _ => Reference::None,
                };
                Ok(Prepared { data, reference })
            }
            Scenario::SingleSoliton { soliton } => {
                let p = SolitonParams::new(soliton.eta, soliton.xi, soliton.theta, soliton.delta)?;
                Ok(Prepared {
                    data: SpectralPair::from_data(soliton_train_data(&[p], Side::Left)?),
                    reference: Reference::Soliton(p),
                })
            }
            Scenario::TwoSoliton { delta } => {
                let left = darboux_seed_data(&two_soliton_params(*delta), Side::Left)?;
                Ok(Prepared {
                    data: SpectralPair::from_data(left.clone()),
                    reference: Reference::Darboux(left),
                })
            }
            Scenario::EightSoliton => {
                let left = soliton_train_data(&eight_soliton_params(), Side::Left)?;
                Ok(Prepared {
                    data: SpectralPair::from_data(left.clone()),
                    reference: Reference::Darboux(left),
                })
            }
            Scenario::ChirpedSech {
                a,
                c,
                dispersion,
                support,
                scatter_intervals,
                xi_max,
                xi_intervals,
            } => {
                let p = ChirpedSechParams::new(*a, *c)?;
                if !(*support > 0.0 && *xi_max > 0.0) || *scatter_intervals < 2 || *xi_intervals < 2 {
                    return Err(Error::Config("chirped sech scattering grids must be nonempty".into()));
                }
                let fine = chirped_sech(&p, TimeGrid::covering(-support, *support, *scatter_intervals));
                let xg = TimeGrid::covering(-xi_max, *xi_max, *xi_intervals);
                let left = forward_scatter(&fine, xg, *dispersion, Side::Left)?;
                let right = forward_scatter(&fine, xg, *dispersion, Side::Right)?;
                Ok(Prepared {
                    data: SpectralPair::new(Some(left), Some(right))?,
                    reference: Reference::Chirp(p),
                })
            }
        }
    }
}

/// Recovery interval and sampling. `L = hi - lo`, `tau = L/M`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    /// Interval length `L`; centered on the scenario's default interval
    /// unless `lo` is given.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub grid: GridSpec,
    /// GLME window `P`; must equal `M h` when given.
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_zone_constant")]
    pub zone_constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<usize>,
    /// Step sizes `h` for `sweep`, strictly decreasing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,
    /// Output directory.
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_method() -> Method {
    Method::Extended
}
fn default_zone_constant() -> f64 {
    DEFAULT_ZONE_CONSTANT
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            grid: GridSpec::default(),
            window: None,
            method: default_method(),
            zone_constant: default_zone_constant(),
            extra: None,
            h_list: None,
            out: default_out(),
        }
    }
}

/// A validated grid with its GLME parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolvedGrid {
    pub grid: TimeGrid,
    /// `M`.
    pub m: usize,
    /// `h = 2 tau`.
    pub h: f64,
    /// `P = M h`.
    pub p: f64,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= GRID_TOL * a.abs().max(b.abs()).max(1.0)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn plan_options(&self) -> PlanOptions {
        PlanOptions {
            method: self.method,
            zone_constant: self.zone_constant,
            extra: self.extra,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zone_constant > 0.0 && self.zone_constant.is_finite()) {
            return Err(Error::Config(format!(
                "zone constant must be positive, got {}",
                self.zone_constant
            )));
        }
        self.resolve_grid()?;
        if let Some(hs) = &self.h_list {
            if hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
                return Err(Error::Config("h_list entries must be positive".into()));
            }
        }
        Ok(())
    }

    /// Recovery interval `[lo, hi]` before sampling.
    pub fn domain(&self) -> Result<(f64, f64)> {
        let g = &self.grid;
        let default = self.scenario.default_domain();
        let (lo, hi) = match (g.lo, g.hi, g.length) {
            (Some(lo), Some(hi), None) => (lo, hi),
            (Some(lo), Some(hi), Some(l)) => {
                if !close(hi - lo, l) {
                    return Err(Error::Config(format!("L = {l} but hi - lo = {}", hi - lo)));
                }
                (lo, hi)
            }
            (Some(lo), None, Some(l)) => (lo, lo + l),
            (None, Some(hi), Some(l)) => (hi - l, hi),
            (None, None, Some(l)) => {
                let mid = default.map(|(a, b, _)| 0.5 * (a + b)).unwrap_or(0.0);
                (mid - 0.5 * l, mid + 0.5 * l)
            }
            (lo, hi, None) => match default {
                Some((a, b, _)) => (lo.unwrap_or(a), hi.unwrap_or(b)),
                None => return Err(Error::Config("this scenario needs grid.lo/grid.hi or grid.L".into())),
            },
        };
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Config(format!("empty recovery interval [{lo}, {hi}]")));
        }
        Ok((lo, hi))
    }

    /// Applies `tau = L/M`, `h = 2 tau` and `P = M h`.
    ///
    /// With only `tau` given, `M = ceil(L/tau)` and the interval is extended
    /// to `lo + M tau`. With neither, the scenario's default step is used the
    /// same way.
    pub fn resolve_grid(&self) -> Result<ResolvedGrid> {
        let (lo, hi) = self.domain()?;
        let l = hi - lo;
        let (m, tau) = match (self.grid.intervals, self.grid.tau) {
            (Some(m), Some(tau)) => {
                if !close(m as f64 * tau, l) {
                    return Err(Error::Config(format!(
                        "tau = {tau} is inconsistent with M = {m} on L = {l}"
                    )));
                }
                (m, tau)
            }
            (Some(m), None) => (m, l / m.max(1) as f64),
            (None, tau) => {
                let tau = match tau {
                    Some(t) => t,
                    None => self.scenario.default_domain().map(|d| d.2).unwrap_or(l / 2000.0),
                };
                if !(tau > 0.0 && tau.is_finite()) {
                    return Err(Error::Config(format!("tau must be positive, got {tau}")));
                }
                let m = (l / tau - GRID_TOL * (l / tau).max(1.0)).ceil() as usize;
                (m, tau)
            }
        };
        if m < 2 {
            return Err(Error::Config(format!("M must be at least 2, got {m}")));
        }
        let grid = TimeGrid::new(lo, tau, m + 1);
        let h = 2.0 * tau;
        let p = m as f64 * h;
        if let Some(w) = self.window {
            if !close(w, p) {
                return Err(Error::Config(format!("P = {w} but M h = {p}")));
            }
        }
        Ok(ResolvedGrid { grid, m, h, p })
    }

    /// Grid for the sweep step `h` on this configuration's interval; `L/(h/2)`
    /// must be an integer.
    pub fn grid_for_step(&self, h: f64) -> Result<ResolvedGrid> {
        let (lo, hi) = self.domain()?;
        let l = hi - lo;
        let exact = 2.0 * l / h;
        let m = exact.round();
        if m < 2.0 || !close(m, exact) {
            return Err(Error::Config(format!("h = {h} does not divide 2L = {}", 2.0 * l)));
        }
        let m = m as usize;
        let grid = TimeGrid::covering(lo, hi, m);
        Ok(ResolvedGrid {
            grid,
            m,
            h: 2.0 * grid.step,
            p: 2.0 * grid.step * m as f64,
        })
    }

    /// `h_list`, or five halvings from `M = 256` to `M = 4096`.
    pub fn sweep_steps(&self) -> Result<Vec<f64>> {
        if let Some(hs) = &self.h_list {
            return Ok(hs.clone());
        }
        let (lo, hi) = self.domain()?;
        Ok((0..5).map(|k| 2.0 * (hi - lo) / (256usize << k) as f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default_soliton() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(
            cfg.scenario,
            Scenario::SingleSoliton {
                soliton: default_soliton()
            }
        );
        assert_eq!(cfg.method, Method::Extended);
        assert_eq!(cfg.zone_constant, 6.0);
        let g = cfg.resolve_grid().unwrap();
        assert_eq!(g.m, 2000);
        assert_eq!(g.grid.start, -10.0);
        assert!((g.h - 0.02).abs() < 1e-15);
        assert!((g.p - 40.0).abs() < 1e-9);
    }

    #[test]
    fn inconsistent_tau_is_rejected() {
        let text = r#"{"grid": {"lo": -5, "hi": 5, "M": 100, "tau": 0.2}}"#;
        assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))));
        let ok = r#"{"grid": {"lo": -5, "hi": 5, "M": 100, "tau": 0.1}}"#;
        assert!(ExperimentConfig::from_json(ok).is_ok());
    }

    #[test]
    fn inconsistent_window_is_rejected() {
        let text = r#"{"grid": {"L": 10, "M": 100}, "P": 10}"#;
        assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))));
        let ok = r#"{"grid": {"L": 10, "M": 100}, "P": 20}"#;
        assert!(ExperimentConfig::from_json(ok).is_ok());
    }

    #[test]
    fn tau_alone_extends_the_interval() {
        let text = r#"{"grid": {"lo": 0, "hi": 1.05, "tau": 0.1}}"#;
        let g = ExperimentConfig::from_json(text).unwrap().resolve_grid().unwrap();
        assert_eq!(g.m, 11);
        assert!((g.grid.end() - 1.1).abs() < 1e-12);
    }

    #[test]
    fn unknown_fields_are_config_errors() {
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"methd": "no_cuts"}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"scenario": {"kind": "three_soliton"}}"#),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn spectral_file_scenario_needs_a_grid() {
        let text = r#"{"scenario": {"kind": "from_spectral_file", "left": "x.json"}}"#;
        assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_steps_divide_the_interval() {
        let cfg = ExperimentConfig::default();
        for h in cfg.sweep_steps().unwrap() {
            cfg.grid_for_step(h).unwrap();
        }
        assert!(cfg.grid_for_step(0.0301).is_err());
    }

    #[test]
    fn eight_soliton_zones_mix_disjoint_and_merging() {
        let ps = eight_soliton_params();
        let zone = |p: &SolitonParams| (p.center() - 6.0 / p.eta, p.center() + 6.0 / p.eta);
        let overlap = |a: (f64, f64), b: (f64, f64)| a.0.max(b.0) <= a.1.min(b.1);
        let narrow: Vec<_> = ps.iter().filter(|p| p.eta > 1.0).map(zone).collect();
        let broad: Vec<_> = ps.iter().filter(|p| p.eta < 1.0).map(zone).collect();
        for i in 0..narrow.len() {
            for j in i + 1..narrow.len() {
                assert!(!overlap(narrow[i], narrow[j]));
            }
        }
        assert!(broad.windows(2).all(|w| overlap(w[0], w[1])));
    }

    #[test]
    fn config_round_trips() {
        let cfg = ExperimentConfig {
            scenario: Scenario::TwoSoliton { delta: 32.0 },
            method: Method::NoCuts,
            ..Default::default()
        };
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
    }
}
