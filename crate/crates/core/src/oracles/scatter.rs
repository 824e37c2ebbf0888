//! Forward Zakharov-Shabat scattering of a sampled potential.
//!
//! `v' = [[-i zeta, q], [-sigma conj(q), i zeta]] v` is integrated cell by
//! cell with `q` frozen at the cell's center sample and the exact matrix
//! exponential of each cell. The scheme is second order in the sample step;
//! one Richardson step against the grid of every other sample lifts it to
//! fourth order. Discrete eigenvalues are counted with the argument
//! principle on a rectangle in the upper half-plane, isolated by bisection
//! and polished with Newton's method on `a(zeta)`.

use serde::{Deserialize, Serialize};

use crate::spectral::{ContinuousSpectrum, DiscreteEigenvalue, Side, SignMode, SpectralData};
use crate::{Error, Result, Signal, TimeGrid, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    /// Focusing system; solitons possible.
    Anomalous,
    /// Defocusing system; continuous spectrum only.
    Normal,
}

impl Dispersion {
    pub fn sigma(self) -> f64 {
        match self {
            Dispersion::Anomalous => 1.0,
            Dispersion::Normal => -1.0,
        }
    }

    pub fn sign_mode(self) -> SignMode {
        match self {
            Dispersion::Anomalous => SignMode::WithDiscrete,
            Dispersion::Normal => SignMode::ContinuousOnly,
        }
    }
}

type Pair2 = [C64; 2];

/// `a`, `b` and `da/dzeta` at one spectral parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub a: C64,
    pub b: C64,
    pub da: C64,
}

/// Sampled potential prepared for repeated scattering evaluations.
pub struct Scatterer<'a> {
    q: &'a [C64],
    grid: TimeGrid,
    sigma: f64,
}

// cosh(sqrt(u) tau), sinh(sqrt(u) tau)/sqrt(u) and the u-derivative of the latter.
fn cell_functions(u: C64, tau: f64) -> (C64, C64, C64) {
    let x = u * tau * tau;
    if x.norm() < 1e-3 {
        let t3 = tau * tau * tau;
        let ch = 1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0;
        let sh = tau * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
        let dsh = t3 * (1.0 / 6.0 + x / 60.0 + x * x / 1680.0);
        return (ch, sh, dsh);
    }
    let k = u.sqrt();
    let ch = (k * tau).cosh();
    let sh = (k * tau).sinh() / k;
    let dsh = (tau * ch - sh) / (2.0 * u);
    (ch, sh, dsh)
}

// Real-argument version without the derivative, for real zeta.
fn cell_functions_real(u: f64, tau: f64) -> (f64, f64) {
    let x = u * tau * tau;
    if x.abs() < 1e-3 {
        return (
            1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0,
            tau * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0),
        );
    }
    if u > 0.0 {
        let k = u.sqrt();
        ((k * tau).cosh(), (k * tau).sinh() / k)
    } else {
        let k = (-u).sqrt();
        ((k * tau).cos(), (k * tau).sin() / k)
    }
}

impl<'a> Scatterer<'a> {
    pub fn new(signal: &'a Signal, dispersion: Dispersion) -> Result<Self> {
        if signal.q.len() < 3 {
            return Err(Error::Empty("signal"));
        }
        let edge = signal.q[0].norm().max(signal.q[signal.q.len() - 1].norm());
        if edge > 1e-8 * signal.max_abs().max(1.0) {
            return Err(Error::NonDecaying { edge });
        }
        Ok(Self {
            q: &signal.q,
            grid: signal.grid,
            sigma: dispersion.sigma(),
        })
    }

    // Cells of `stride` samples centered on samples offset, offset + stride, ...
    fn cells(&self, stride: usize) -> (usize, f64, f64, f64) {
        let offset = stride / 2;
        let tau = stride as f64 * self.grid.step;
        let count = (self.q.len() - offset).div_ceil(stride);
        let t0 = self.grid.t(offset) - 0.5 * tau;
        let te = t0 + count as f64 * tau;
        (offset, tau, t0, te)
    }

    /// Coefficients with cells of `stride` samples, second order in the cell width.
    pub fn coefficients_at_stride(&self, zeta: C64, stride: usize) -> Coefficients {
        let (offset, tau, t0, te) = self.cells(stride);
        let i = C64::i();
        let e0 = (-i * zeta * t0).exp();
        let mut v = [e0, C64::new(0.0, 0.0)];
        let mut dv = [-i * t0 * e0, C64::new(0.0, 0.0)];
        let zz = zeta * zeta;
        for &q in self.q[offset..].iter().step_by(stride) {
            let u = -zz - self.sigma * q.norm_sqr();
            let (ch, sh, dsh) = cell_functions(u, tau);
            let r = -self.sigma * q.conj();
            // E = ch I + sh A, A = [[-i zeta, q], [r, i zeta]]
            let e11 = ch - sh * i * zeta;
            let e22 = ch + sh * i * zeta;
            let e12 = sh * q;
            let e21 = sh * r;
            // dE = -zeta tau sh I - 2 zeta dsh A + sh diag(-i, i)
            let c0 = -zeta * tau * sh;
            let c1 = -2.0 * zeta * dsh;
            let d11 = c0 + c1 * (-i * zeta) - sh * i;
            let d22 = c0 + c1 * (i * zeta) + sh * i;
            let d12 = c1 * q;
            let d21 = c1 * r;
            let nv = [e11 * v[0] + e12 * v[1], e21 * v[0] + e22 * v[1]];
            let ndv = [
                e11 * dv[0] + e12 * dv[1] + d11 * v[0] + d12 * v[1],
                e21 * dv[0] + e22 * dv[1] + d21 * v[0] + d22 * v[1],
            ];
            v = nv;
            dv = ndv;
        }
        let ph = (i * zeta * te).exp();
        Coefficients {
            a: v[0] * ph,
            b: v[1] / ph,
            da: (dv[0] + i * te * v[0]) * ph,
        }
    }

    /// Fourth-order coefficients by Richardson extrapolation.
    pub fn coefficients(&self, zeta: C64) -> Coefficients {
        let f = self.coefficients_at_stride(zeta, 1);
        let c = self.coefficients_at_stride(zeta, 2);
        Coefficients {
            a: (4.0 * f.a - c.a) / 3.0,
            b: (4.0 * f.b - c.b) / 3.0,
            da: (4.0 * f.da - c.da) / 3.0,
        }
    }

    // Cell propagator ch I + sign sh A over width tau at sample value q.
    fn cell(&self, zeta: C64, q: C64, tau: f64, sign: f64) -> [C64; 4] {
        let i = C64::i();
        let (ch, sh, _) = cell_functions(-zeta * zeta - self.sigma * q.norm_sqr(), tau);
        let sh = sh * sign;
        [
            ch - sh * i * zeta,
            sh * q,
            sh * (-self.sigma * q.conj()),
            ch + sh * i * zeta,
        ]
    }

    // Left Jost solution (from the left end) and right Jost solution (from
    // the right end) at sample `j`, each as a unit vector and a log scale.
    // With stride 2, `j` must be even: a coarse cell boundary. With stride 1
    // the sample is the middle of a cell, reached by half-cell steps.
    fn jost_pair_at(&self, zeta: C64, stride: usize, j: usize) -> ((Pair2, f64), (Pair2, f64)) {
        let (offset, tau, t0, te) = self.cells(stride);
        let n = self.q.len();
        let apply = |m: [C64; 4], v: Pair2| [m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]];
        let renorm = |v: Pair2, log: &mut f64| -> Pair2 {
            let s = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            *log += s.ln();
            [v[0] / s, v[1] / s]
        };
        let centers: Vec<usize> = (offset..n).step_by(stride).collect();
        // cells wholly left / right of sample j
        let (left_cells, right_cells, half) = if stride == 1 {
            (&centers[..j], &centers[j + 1..], true)
        } else {
            let split = centers.partition_point(|&c| c < j);
            (&centers[..split], &centers[split..], false)
        };

        let mut phi_log = zeta.im * t0;
        let mut phi: Pair2 = [C64::from_polar(1.0, -zeta.re * t0), C64::new(0.0, 0.0)];
        for &c in left_cells {
            phi = renorm(apply(self.cell(zeta, self.q[c], tau, 1.0), phi), &mut phi_log);
        }
        let mut psi_log = -zeta.im * te;
        let mut psi: Pair2 = [C64::new(0.0, 0.0), C64::from_polar(1.0, zeta.re * te)];
        for &c in right_cells.iter().rev() {
            psi = renorm(apply(self.cell(zeta, self.q[c], tau, -1.0), psi), &mut psi_log);
        }
        if half {
            phi = renorm(apply(self.cell(zeta, self.q[j], 0.5 * tau, 1.0), phi), &mut phi_log);
            psi = renorm(apply(self.cell(zeta, self.q[j], 0.5 * tau, -1.0), psi), &mut psi_log);
        }
        ((phi, phi_log), (psi, psi_log))
    }

    // Even sample maximizing |phi| |psi| on the coarse cells: one sweep each way.
    fn matching_sample(&self, zeta: C64) -> usize {
        let (offset, tau, t0, te) = self.cells(2);
        let n = self.q.len();
        let apply = |m: [C64; 4], v: Pair2| [m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]];
        let centers: Vec<usize> = (offset..n).step_by(2).collect();
        // boundary k sits at sample 2k
        let mut score = vec![0.0; centers.len() + 1];
        let mut log = zeta.im * t0;
        let mut v: Pair2 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        score[0] = log;
        for (k, &c) in centers.iter().enumerate() {
            v = apply(self.cell(zeta, self.q[c], tau, 1.0), v);
            let s = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            log += s.ln();
            v = [v[0] / s, v[1] / s];
            score[k + 1] = log;
        }
        let mut log = -zeta.im * te;
        let mut v: Pair2 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        score[centers.len()] += log;
        for (k, &c) in centers.iter().enumerate().rev() {
            v = apply(self.cell(zeta, self.q[c], tau, -1.0), v);
            let s = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            log += s.ln();
            v = [v[0] / s, v[1] / s];
            score[k] += log;
        }
        let k = (0..score.len())
            .max_by(|&a, &b| score[a].total_cmp(&score[b]))
            .unwrap_or(0);
        (2 * k).min(n - 1) & !1
    }

    /// `b` at a bound state, `phi = b psi`, evaluated where the eigenfunction
    /// is largest. Integrating one Jost solution across the whole line loses
    /// the decaying mode to rounding once `eta` times the support is large.
    pub fn bound_state_b(&self, zeta: C64) -> C64 {
        let j = self.matching_sample(zeta);
        let ratio = |stride: usize| -> C64 {
            let ((p, pl), (s, sl)) = self.jost_pair_at(zeta, stride, j);
            let k = if s[0].norm() >= s[1].norm() { 0 } else { 1 };
            p[k] / s[k] * (pl - sl).exp()
        };
        (4.0 * ratio(1) - ratio(2)) / 3.0
    }

    /// `(a, b)` for real `xi` at a given stride.
    fn real_at_stride(&self, xi: f64, stride: usize) -> (C64, C64) {
        let (offset, tau, t0, te) = self.cells(stride);
        let mut v = [C64::from_polar(1.0, -xi * t0), C64::new(0.0, 0.0)];
        let xx = xi * xi;
        for &q in self.q[offset..].iter().step_by(stride) {
            let (ch, sh) = cell_functions_real(-xx - self.sigma * q.norm_sqr(), tau);
            let e11 = C64::new(ch, -sh * xi);
            let e22 = C64::new(ch, sh * xi);
            let e12 = q * sh;
            let e21 = q.conj() * (-self.sigma * sh);
            v = [e11 * v[0] + e12 * v[1], e21 * v[0] + e22 * v[1]];
        }
        let ph = C64::from_polar(1.0, xi * te);
        (v[0] * ph, v[1] / ph)
    }

    /// Fourth-order `(a, b)` on the real axis.
    pub fn real_coefficients(&self, xi: f64) -> (C64, C64) {
        let (af, bf) = self.real_at_stride(xi, 1);
        let (ac, bc) = self.real_at_stride(xi, 2);
        ((4.0 * af - ac) / 3.0, (4.0 * bf - bc) / 3.0)
    }

    /// Cheap `a` for root counting.
    fn search_a(&self, zeta: C64) -> C64 {
        let stride = ((0.01 / self.grid.step).floor() as usize).max(1);
        self.coefficients_at_stride(zeta, stride).a
    }

    fn winding(&self, lo: C64, hi: C64) -> Result<i64> {
        let corners = [lo, C64::new(hi.re, lo.im), hi, C64::new(lo.re, hi.im), lo];
        let mut total = 0.0;
        for w in corners.windows(2) {
            let (p0, p1) = (w[0], w[1]);
            const N: usize = 24;
            let mut prev_z = p0;
            let mut prev_a = self.search_a(p0);
            for s in 1..=N {
                let z = p0 + (p1 - p0) * (s as f64 / N as f64);
                let a = self.search_a(z);
                total += self.arg_change(prev_z, prev_a, z, a, 0)?;
                prev_z = z;
                prev_a = a;
            }
        }
        Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
    }

    // Phase change of a between two nearby points, refined until each piece
    // turns by less than a fixed angle.
    fn arg_change(&self, z0: C64, a0: C64, z1: C64, a1: C64, depth: usize) -> Result<f64> {
        let d = (a1 / a0).arg();
        if d.abs() < 0.4 {
            return Ok(d);
        }
        if depth > 24 {
            return Err(Error::RootSearch { last: z1 });
        }
        let zm = 0.5 * (z0 + z1);
        let am = self.search_a(zm);
        Ok(self.arg_change(z0, a0, zm, am, depth + 1)? + self.arg_change(zm, am, z1, a1, depth + 1)?)
    }

    fn newton(&self, start: C64) -> Result<(C64, Coefficients)> {
        let mut z = start;
        for _ in 0..60 {
            let c = self.coefficients(z);
            let step = c.a / c.da;
            z -= step;
            if !(z.re.is_finite() && z.im.is_finite()) {
                break;
            }
            if step.norm() < 1e-13 * z.norm().max(1.0) {
                return Ok((z, self.coefficients(z)));
            }
        }
        Err(Error::RootSearch { last: z })
    }

    fn isolate(&self, lo: C64, hi: C64, count: i64, depth: usize, found: &mut Vec<(C64, Coefficients)>) -> Result<()> {
        if count <= 0 {
            return Ok(());
        }
        if depth > 40 {
            return Err(Error::RootSearch { last: 0.5 * (lo + hi) });
        }
        if count == 1 {
            if let Ok((z, c)) = self.newton(0.5 * (lo + hi)) {
                let pad = 1e-9 * (1.0 + hi.norm());
                if z.re >= lo.re - pad && z.re <= hi.re + pad && z.im >= lo.im - pad && z.im <= hi.im + pad {
                    found.push((z, c));
                    return Ok(());
                }
            }
        }
        // off-center split so symmetric spectra do not put roots on the cut line
        const SPLIT: f64 = 0.4619397;
        let (a_lo, a_hi, b_lo, b_hi) = if hi.re - lo.re >= hi.im - lo.im {
            let m = lo.re + SPLIT * (hi.re - lo.re);
            (lo, C64::new(m, hi.im), C64::new(m, lo.im), hi)
        } else {
            let m = lo.im + SPLIT * (hi.im - lo.im);
            (lo, C64::new(hi.re, m), C64::new(lo.re, m), hi)
        };
        let first = self.winding(a_lo, a_hi)?;
        self.isolate(a_lo, a_hi, first, depth + 1, found)?;
        self.isolate(b_lo, b_hi, count - first, depth + 1, found)
    }

    /// Zeros of `a` in `[xi_lo, xi_hi] x [eta_lo, eta_hi]`, with coefficients there.
    pub fn eigenvalues(&self, xi_lo: f64, xi_hi: f64, eta_lo: f64, eta_hi: f64) -> Result<Vec<(C64, Coefficients)>> {
        let lo = C64::new(xi_lo, eta_lo);
        let hi = C64::new(xi_hi, eta_hi);
        let count = self.winding(lo, hi)?;
        let mut found = Vec::new();
        self.isolate(lo, hi, count, 0, &mut found)?;
        found.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        found.dedup_by(|a, b| (a.0 - b.0).norm() < 1e-7);
        if found.len() as i64 != count {
            return Err(Error::RootSearch {
                last: found.last().map(|f| f.0).unwrap_or(lo),
            });
        }
        Ok(found)
    }
}

/// Left or right scattering data of a sampled potential.
///
/// The continuous coefficient is evaluated on `xi_grid`; eigenvalues are
/// searched over the same `xi` range for `eta` between `1e-3 max|q|` and
/// `max|q| + 0.5`, which bounds the point spectrum.
pub fn forward_scatter(signal: &Signal, xi_grid: TimeGrid, dispersion: Dispersion, side: Side) -> Result<SpectralData> {
    let sc = Scatterer::new(signal, dispersion)?;
    let values = xi_grid
        .times()
        .map(|xi| {
            let (a, b) = sc.real_coefficients(xi);
            match side {
                Side::Left => -b.conj() / a,
                Side::Right => b / a,
            }
        })
        .collect();
    let continuous = ContinuousSpectrum::new(xi_grid.start, xi_grid.step, values)?;

    let mut discrete = Vec::new();
    let qmax = signal.max_abs();
    if dispersion == Dispersion::Anomalous && qmax > 0.0 {
        for (zeta, c) in sc.eigenvalues(xi_grid.start, xi_grid.end(), 1e-3 * qmax, qmax + 0.5)? {
            let b = sc.bound_state_b(zeta);
            let norming = match side {
                Side::Left => -1.0 / (b * c.da),
                Side::Right => b / c.da,
            };
            discrete.push(DiscreteEigenvalue::new(zeta, norming)?);
        }
    }
    SpectralData::with_sign(side, Some(continuous), discrete, dispersion.sign_mode())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::soliton::SolitonParams;

    fn soliton_signal() -> (SolitonParams, Signal) {
        let p = SolitonParams::new(1.0, 0.5, 0.8, 0.3).unwrap();
        let grid = TimeGrid::covering(-16.0, 16.0, 8000);
        (p, Signal::from_fn(grid, |t| p.value(t)))
    }

    #[test]
    fn zero_potential_scatters_trivially() {
        let s = Signal::new(TimeGrid::covering(-5.0, 5.0, 100), vec![C64::new(0.0, 0.0); 101]);
        let d = forward_scatter(&s, TimeGrid::covering(-3.0, 3.0, 30), Dispersion::Anomalous, Side::Left).unwrap();
        assert!(d.discrete.is_empty());
        assert!(d.continuous.unwrap().values.iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn soliton_eigenvalue_and_norming() {
        let (p, s) = soliton_signal();
        let d = forward_scatter(&s, TimeGrid::covering(-4.0, 4.0, 40), Dispersion::Anomalous, Side::Left).unwrap();
        assert_eq!(d.discrete.len(), 1);
        assert!((d.discrete[0].zeta - p.zeta()).norm() < 1e-8, "{}", d.discrete[0].zeta);
        assert!((d.discrete[0].norming - p.left_norming()).norm() < 1e-6 * p.left_norming().norm());
        assert!(d.continuous.unwrap().values.iter().all(|v| v.norm() < 1e-7));
        let r = forward_scatter(&s, TimeGrid::covering(-4.0, 4.0, 8), Dispersion::Anomalous, Side::Right).unwrap();
        assert!((r.discrete[0].norming - p.right_norming()).norm() < 1e-6 * p.right_norming().norm());
    }

    #[test]
    fn real_axis_fast_path_matches_general_path() {
        let (_, s) = soliton_signal();
        let sc = Scatterer::new(&s, Dispersion::Normal).unwrap();
        for xi in [-2.0, 0.3, 1.7] {
            let (a, b) = sc.real_coefficients(xi);
            let c = sc.coefficients(C64::new(xi, 0.0));
            assert!((a - c.a).norm() < 1e-12 && (b - c.b).norm() < 1e-12);
            // defocusing unitarity |a|^2 - |b|^2 = 1
            assert!((a.norm_sqr() - b.norm_sqr() - 1.0).abs() < 1e-10 * a.norm_sqr());
        }
    }

    #[test]
    fn derivative_of_a_matches_finite_difference() {
        let (_, s) = soliton_signal();
        let sc = Scatterer::new(&s, Dispersion::Anomalous).unwrap();
        let z = C64::new(0.2, 0.6);
        let e = 1e-3;
        let f = |d: f64| sc.coefficients(z + d).a;
        let fd = (-f(2.0 * e) + 8.0 * f(e) - 8.0 * f(-e) + f(-2.0 * e)) / (12.0 * e);
        assert!(
            (fd - sc.coefficients(z).da).norm() < 1e-9,
            "{fd} {}",
            sc.coefficients(z).da
        );
    }

    #[test]
    fn bound_state_b_of_symmetric_sech_is_unit() {
        // real even potential: phi(t) and psi(-t) are mirror images, so b_n = +-1;
        // eta L = 24 is far past where a single sweep keeps the decaying mode
        let grid = TimeGrid::covering(-20.0, 20.0, 8000);
        let s = Signal::from_fn(grid, |t| C64::new(2.2 / t.cosh(), 0.0));
        let sc = Scatterer::new(&s, Dispersion::Anomalous).unwrap();
        let found = sc.eigenvalues(-2.0, 2.0, 0.01, 2.7).unwrap();
        assert_eq!(found.len(), 2);
        for (z, _) in found {
            let b = sc.bound_state_b(z);
            assert!((b.norm() - 1.0).abs() < 1e-9, "{z} {b}");
        }
    }

    #[test]
    fn eigenvalues_on_the_split_line_are_found() {
        // A sech^{1+iC}: zeta_n = i (sqrt(A^2 - C^2/4) - n + 1/2), all with xi = 0
        let grid = TimeGrid::covering(-20.0, 20.0, 8000);
        let s = crate::oracles::chirp::chirped_sech(
            &crate::oracles::chirp::ChirpedSechParams::new(5.2, 4.0).unwrap(),
            grid,
        );
        let sc = Scatterer::new(&s, Dispersion::Anomalous).unwrap();
        let mut etas: Vec<f64> = sc
            .eigenvalues(-10.0, 10.0, 0.01, 5.7)
            .unwrap()
            .iter()
            .map(|e| e.0.im)
            .collect();
        etas.sort_by(f64::total_cmp);
        for (k, e) in etas.iter().enumerate() {
            assert!((e - (0.3 + k as f64)).abs() < 1e-6, "{etas:?}");
        }
        assert_eq!(etas.len(), 5);
    }

    #[test]
    fn non_decaying_signal_is_rejected() {
        let s = Signal::new(TimeGrid::covering(-1.0, 1.0, 10), vec![C64::new(1.0, 0.0); 11]);
        assert!(matches!(
            forward_scatter(&s, TimeGrid::covering(-1.0, 1.0, 4), Dispersion::Normal, Side::Left),
            Err(Error::NonDecaying { .. })
        ));
    }
}
