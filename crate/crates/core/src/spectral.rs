//! Spectral data and synthesis of the Marchenko kernels.
//!
//! Left data `{l(xi), (zeta_n, l_n)}` produce
//!
//! ```text
//! Omega_l(z) = 1/(2 pi) int l(xi) exp(-i xi z) dxi - i sum_n l_n exp(-i zeta_n z)
//! ```
//!
//! and right data the mirror image with `exp(+i xi z)`, `exp(+i zeta_n z)`.
//! The continuous integral is a trapezoidal sum over the supplied `xi` grid,
//! so the grid step and extent bound the kernel error.
//!
//! Conventions, for a Jost solution normalized as `(e^{-i zeta t}, 0)` at
//! `t -> -inf` that tends to `(a e^{-i zeta t}, b e^{i zeta t})` at `+inf`:
//! `l = -conj(b)/a`, `l_n = -1/(b_n a'(zeta_n))`, `r = b/a`, `r_n = b_n/a'(zeta_n)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Kernel entries above this magnitude are flagged as divergent and must not
/// enter a linear system.
pub const DIVERGENCE_LIMIT: f64 = 67_108_864.0; // 2^26 = eps^{-1/2}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Selects the sign of the Marchenko system: `WithDiscrete` is the focusing
/// (anomalous dispersion) case that admits solitons, `ContinuousOnly` the
/// defocusing one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    WithDiscrete,
    ContinuousOnly,
}

impl SignMode {
    /// `+1` for the focusing system, `-1` for the defocusing one.
    pub fn kappa(self) -> f64 {
        match self {
            SignMode::WithDiscrete => 1.0,
            SignMode::ContinuousOnly => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteEigenvalue {
    pub zeta: C64,
    pub norming: C64,
}

impl DiscreteEigenvalue {
    pub fn new(zeta: C64, norming: C64) -> Result<Self> {
        if !(zeta.im > 0.0) || !zeta.re.is_finite() || !zeta.im.is_finite() {
            return Err(Error::InvalidSpectralData(format!(
                "eigenvalue {zeta} is not in the upper half-plane"
            )));
        }
        if norming == C64::new(0.0, 0.0) || !norming.re.is_finite() || !norming.im.is_finite() {
            return Err(Error::InvalidSpectralData(format!(
                "norming constant {norming} must be finite and nonzero"
            )));
        }
        Ok(Self { zeta, norming })
    }

    pub fn eta(&self) -> f64 {
        self.zeta.im
    }
}

/// Samples of `l(xi)` or `r(xi)` on `xi_k = xi0 + k * dxi`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousSpectrum {
    pub xi0: f64,
    pub dxi: f64,
    pub values: Vec<C64>,
}

impl ContinuousSpectrum {
    pub fn new(xi0: f64, dxi: f64, values: Vec<C64>) -> Result<Self> {
        if !(dxi > 0.0) {
            return Err(Error::InvalidSpectralData("xi step must be positive".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidSpectralData("continuous spectrum has no samples".into()));
        }
        Ok(Self { xi0, dxi, values })
    }

    pub fn xi(&self, k: usize) -> f64 {
        self.xi0 + k as f64 * self.dxi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm_sqr() == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub side: Side,
    pub continuous: Option<ContinuousSpectrum>,
    pub discrete: Vec<DiscreteEigenvalue>,
    pub sign_mode: SignMode,
}

impl SpectralData {
    /// Builds data with the sign mode implied by the discrete part.
    pub fn new(side: Side, continuous: Option<ContinuousSpectrum>, discrete: Vec<DiscreteEigenvalue>) -> Result<Self> {
        let sign_mode = if discrete.is_empty() {
            SignMode::ContinuousOnly
        } else {
            SignMode::WithDiscrete
        };
        Self::with_sign(side, continuous, discrete, sign_mode)
    }

    /// Builds data with an explicit sign mode. A focusing signal may have no
    /// eigenvalues, so `WithDiscrete` with an empty discrete part is allowed;
    /// the converse is not.
    pub fn with_sign(
        side: Side,
        continuous: Option<ContinuousSpectrum>,
        discrete: Vec<DiscreteEigenvalue>,
        sign_mode: SignMode,
    ) -> Result<Self> {
        if continuous.is_none() && discrete.is_empty() {
            return Err(Error::InvalidSpectralData(
                "spectral data has neither a continuous nor a discrete part".into(),
            ));
        }
        if sign_mode == SignMode::ContinuousOnly && !discrete.is_empty() {
            return Err(Error::InvalidSpectralData(
                "discrete eigenvalues require the focusing sign".into(),
            ));
        }
        Ok(Self {
            side,
            continuous,
            discrete,
            sign_mode,
        })
    }

    pub fn soliton_count(&self) -> usize {
        self.discrete.len()
    }

    pub fn eta_max(&self) -> f64 {
        self.discrete.iter().map(|d| d.eta()).fold(0.0, f64::max)
    }

    /// Kernel table of this data's side.
    pub fn kernel(&self, z0: f64, dz: f64, count: usize) -> Result<KernelTable> {
        match self.side {
            Side::Left => kernel_left(self, z0, dz, count),
            Side::Right => kernel_right(self, z0, dz, count),
        }
    }

    /// Converts purely discrete data to the opposite side using
    /// `l_n r_n a'(zeta_n)^2 = -1` with `a(zeta) = prod (zeta - zeta_j)/(zeta - conj zeta_j)`.
    pub fn to_opposite_side(&self) -> Result<SpectralData> {
        if self.continuous.as_ref().is_some_and(|c| !c.is_zero()) {
            return Err(Error::InvalidSpectralData(
                "side conversion needs the full scattering data when a continuous part is present".into(),
            ));
        }
        let zetas: Vec<C64> = self.discrete.iter().map(|d| d.zeta).collect();
        let discrete = self
            .discrete
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let ap = reflectionless_a_prime(&zetas, k);
                DiscreteEigenvalue::new(d.zeta, -1.0 / (d.norming * ap * ap))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralData {
            side: self.side.opposite(),
            continuous: self.continuous.clone(),
            discrete,
            sign_mode: self.sign_mode,
        })
    }
}

/// Transmission factor `(zeta - zeta_j)/(zeta - conj zeta_j)` of a single
/// soliton with eigenvalue `zeta_j`, evaluated at `zeta`.
pub fn soliton_transmission(zeta_j: C64, zeta: C64) -> C64 {
    (zeta - zeta_j) / (zeta - zeta_j.conj())
}

/// `a'(zeta_k)` for the reflectionless `a(zeta) = prod_j (zeta - zeta_j)/(zeta - conj zeta_j)`.
pub fn reflectionless_a_prime(zetas: &[C64], k: usize) -> C64 {
    let zk = zetas[k];
    let mut ap = 1.0 / (zk - zk.conj());
    for (j, &zj) in zetas.iter().enumerate() {
        if j != k {
            ap *= soliton_transmission(zj, zk);
        }
    }
    ap
}

/// Uniformly sampled kernel `Omega(z0 + k dz)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    pub z0: f64,
    pub dz: f64,
    pub values: Vec<C64>,
    pub divergent: Vec<bool>,
}

impl KernelTable {
    pub fn from_values(z0: f64, dz: f64, values: Vec<C64>) -> Self {
        let divergent = values.iter().map(|v| is_divergent(*v)).collect();
        Self {
            z0,
            dz,
            values,
            divergent,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn z(&self, k: usize) -> f64 {
        self.z0 + k as f64 * self.dz
    }

    pub fn z_max(&self) -> f64 {
        self.z(self.len().saturating_sub(1))
    }

    pub fn any_divergent(&self) -> bool {
        self.divergent.iter().any(|&d| d)
    }

    /// Table index of a grid-aligned argument.
    pub fn index_of(&self, z: f64) -> Result<usize> {
        let x = (z - self.z0) / self.dz;
        let k = x.round();
        if (x - k).abs() > 1e-6 {
            return Err(Error::KernelAlignment { z });
        }
        if k < 0.0 || k as usize >= self.len() {
            return Err(Error::KernelRange {
                z,
                lo: self.z0,
                hi: self.z_max(),
            });
        }
        Ok(k as usize)
    }

    /// Exact lookup of a grid-aligned argument.
    pub fn at(&self, z: f64) -> Result<C64> {
        self.index_of(z).map(|k| self.values[k])
    }

    /// Table of `Omega(-z)` over the mirrored range.
    pub fn reflected(&self) -> KernelTable {
        let mut values = self.values.clone();
        values.reverse();
        let mut divergent = self.divergent.clone();
        divergent.reverse();
        KernelTable {
            z0: -self.z_max(),
            dz: self.dz,
            values,
            divergent,
        }
    }
}

#[inline]
pub(crate) fn is_divergent(v: C64) -> bool {
    !(v.re.is_finite() && v.im.is_finite()) || v.norm() > DIVERGENCE_LIMIT
}

/// `Omega_l` on `z0 + k dz`, `k = 0..count`.
pub fn kernel_left(data: &SpectralData, z0: f64, dz: f64, count: usize) -> Result<KernelTable> {
    if data.side != Side::Left {
        return Err(Error::InvalidSpectralData("kernel_left needs left data".into()));
    }
    synthesize(data, z0, dz, count, -1.0)
}

/// `Omega_r` on `z0 + k dz`, `k = 0..count`.
pub fn kernel_right(data: &SpectralData, z0: f64, dz: f64, count: usize) -> Result<KernelTable> {
    if data.side != Side::Right {
        return Err(Error::InvalidSpectralData("kernel_right needs right data".into()));
    }
    synthesize(data, z0, dz, count, 1.0)
}

// Shared synthesis; `s = -1` for the left kernel, `+1` for the right one.
fn synthesize(data: &SpectralData, z0: f64, dz: f64, count: usize, s: f64) -> Result<KernelTable> {
    if count == 0 {
        return Err(Error::Empty("kernel table"));
    }
    if !(dz > 0.0) {
        return Err(Error::InvalidSpectralData("kernel step must be positive".into()));
    }
    let i = C64::i();
    let mut values = vec![C64::new(0.0, 0.0); count];

    if let Some(cont) = &data.continuous {
        const RESYNC: usize = 256;
        let n = cont.len();
        let scale = cont.dxi / (2.0 * std::f64::consts::PI);
        for (j, &lj) in cont.values.iter().enumerate() {
            if lj.norm_sqr() == 0.0 {
                continue;
            }
            let xi = cont.xi(j);
            let w = if n > 1 && (j == 0 || j == n - 1) { 0.5 } else { 1.0 };
            let weight = lj * (w * scale);
            let rot = (i * (s * xi * dz)).exp();
            let mut phasor = C64::new(0.0, 0.0);
            for (k, v) in values.iter_mut().enumerate() {
                if k % RESYNC == 0 {
                    phasor = weight * (i * (s * xi * (z0 + k as f64 * dz))).exp();
                }
                *v += phasor;
                phasor *= rot;
            }
        }
    }

    for d in &data.discrete {
        let coeff = -i * d.norming;
        for (k, v) in values.iter_mut().enumerate() {
            let z = z0 + k as f64 * dz;
            *v += coeff * (i * (s * d.zeta * z)).exp();
        }
    }

    Ok(KernelTable::from_values(z0, dz, values))
}

/// Keeps only the eigenvalues in `active` (0-based indices); the continuous
/// part is unchanged.
pub fn restrict_solitons(data: &SpectralData, active: &[usize]) -> Result<SpectralData> {
    let n = data.discrete.len();
    if let Some(&bad) = active.iter().find(|&&k| k >= n) {
        return Err(Error::InvalidSpectralData(format!(
            "soliton index {bad} out of range for {n} eigenvalues"
        )));
    }
    let mut keep: Vec<usize> = active.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() && data.continuous.is_none() {
        return Err(Error::InvalidSpectralData(
            "cut removes every soliton and there is no continuous part".into(),
        ));
    }
    Ok(SpectralData {
        side: data.side,
        continuous: data.continuous.clone(),
        discrete: keep.iter().map(|&k| data.discrete[k]).collect(),
        sign_mode: data.sign_mode,
    })
}

/// Kernel-level cut: keeps `active` and renormalizes each kept norming
/// constant for the removed solitons that sit on the normalization side of it
/// (left of it for left data, right of it for right data).
///
/// A norming constant carries the transmission `a_j(zeta_k)^2` of every
/// soliton between the kept one and the end of the line the data are
/// normalized at; dropping `j` without removing that factor would shift the
/// kept soliton. `centers[k]` is the center of soliton `k`.
pub fn cut_solitons(data: &SpectralData, active: &[usize], centers: &[f64]) -> Result<SpectralData> {
    if centers.len() != data.discrete.len() {
        return Err(Error::InvalidSpectralData(format!(
            "{} centers for {} eigenvalues",
            centers.len(),
            data.discrete.len()
        )));
    }
    let mut out = restrict_solitons(data, active)?;
    let mut keep: Vec<usize> = active.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for (slot, &k) in keep.iter().enumerate() {
        let zk = data.discrete[k].zeta;
        let mut factor = C64::new(1.0, 0.0);
        for (j, dj) in data.discrete.iter().enumerate() {
            if keep.binary_search(&j).is_ok() {
                continue;
            }
            let behind = match data.side {
                Side::Left => centers[j] < centers[k],
                Side::Right => centers[j] > centers[k],
            };
            if behind {
                let a = soliton_transmission(dj.zeta, zk);
                factor *= a * a;
            }
        }
        out.discrete[slot].norming *= factor;
    }
    Ok(out)
}

// --- JSON interchange -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DiscreteJson {
    zeta: [f64; 2],
    norming: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct ContinuousJson {
    xi0: f64,
    dxi: f64,
    values: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct SpectralJson {
    side: Side,
    discrete: Vec<DiscreteJson>,
    continuous: Option<ContinuousJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sign_mode: Option<SignMode>,
}

fn pair(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

fn complex(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl SpectralData {
    pub fn to_json(&self) -> Result<String> {
        let implied = if self.discrete.is_empty() {
            SignMode::ContinuousOnly
        } else {
            SignMode::WithDiscrete
        };
        let doc = SpectralJson {
            side: self.side,
            discrete: self
                .discrete
                .iter()
                .map(|d| DiscreteJson {
                    zeta: pair(d.zeta),
                    norming: pair(d.norming),
                })
                .collect(),
            continuous: self.continuous.as_ref().map(|c| ContinuousJson {
                xi0: c.xi0,
                dxi: c.dxi,
                values: c.values.iter().copied().map(pair).collect(),
            }),
            sign_mode: (self.sign_mode != implied).then_some(self.sign_mode),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpectralJson = serde_json::from_str(text)?;
        let discrete = doc
            .discrete
            .into_iter()
            .map(|d| DiscreteEigenvalue::new(complex(d.zeta), complex(d.norming)))
            .collect::<Result<Vec<_>>>()?;
        let continuous = doc
            .continuous
            .map(|c| ContinuousSpectrum::new(c.xi0, c.dxi, c.values.into_iter().map(complex).collect()))
            .transpose()?;
        match doc.sign_mode {
            Some(mode) => SpectralData::with_sign(doc.side, continuous, discrete, mode),
            None => SpectralData::new(doc.side, continuous, discrete),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn one_soliton(side: Side) -> SpectralData {
        SpectralData::new(
            side,
            None,
            vec![DiscreteEigenvalue::new(c(0.0, 1.0), c(0.0, 1.0)).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn unit_eigenvalue_kernel_at_origin() {
        let left = kernel_left(&one_soliton(Side::Left), 0.0, 0.5, 1).unwrap();
        assert_abs_diff_eq!(left.values[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(left.values[0].im, 0.0, epsilon = 1e-15);
        let right = kernel_right(&one_soliton(Side::Right), 0.0, 0.5, 1).unwrap();
        assert_abs_diff_eq!(right.values[0].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_spectrum_gives_zero_kernel() {
        let cont = ContinuousSpectrum::new(-5.0, 0.1, vec![C64::new(0.0, 0.0); 101]).unwrap();
        for side in [Side::Left, Side::Right] {
            let data = SpectralData::new(side, Some(cont.clone()), vec![]).unwrap();
            let table = data.kernel(-3.0, 0.05, 121).unwrap();
            assert!(table.values.iter().all(|v| v.norm() == 0.0));
            assert!(!table.any_divergent());
        }
    }

    #[test]
    fn side_mismatch_is_rejected() {
        assert!(kernel_left(&one_soliton(Side::Right), 0.0, 0.1, 4).is_err());
        assert!(kernel_right(&one_soliton(Side::Left), 0.0, 0.1, 4).is_err());
    }

    #[test]
    fn invalid_eigenvalues_are_rejected() {
        assert!(DiscreteEigenvalue::new(c(0.3, -0.1), c(1.0, 0.0)).is_err());
        assert!(DiscreteEigenvalue::new(c(0.3, 0.0), c(1.0, 0.0)).is_err());
        assert!(DiscreteEigenvalue::new(c(0.3, 0.5), c(0.0, 0.0)).is_err());
        assert!(SpectralData::new(Side::Left, None, vec![]).is_err());
    }

    #[test]
    fn purely_imaginary_eigenvalue_gives_real_kernel() {
        // zeta = 0.7i, -i l = 1.3 real positive
        let data = SpectralData::new(
            Side::Left,
            None,
            vec![DiscreteEigenvalue::new(c(0.0, 0.7), c(0.0, 1.3)).unwrap()],
        )
        .unwrap();
        let table = kernel_left(&data, -6.0, 0.01, 1201).unwrap();
        for v in &table.values {
            assert!(v.im.abs() <= 1e-15 * v.norm().max(1.0));
            assert!(v.re > 0.0);
        }
    }

    #[test]
    fn left_discrete_kernel_diverges_for_growing_argument() {
        let data = one_soliton(Side::Left);
        let table = kernel_left(&data, -40.0, 0.5, 161).unwrap();
        assert!(!table.divergent[0]);
        assert!(*table.divergent.last().unwrap());
        let first = table.divergent.iter().position(|&d| d).unwrap();
        // |Omega| = e^z crosses 2^26 at z = 26 ln 2
        assert_abs_diff_eq!(table.z(first), 18.02, epsilon = 0.5);
        let right = kernel_right(&one_soliton(Side::Right), -40.0, 0.5, 161).unwrap();
        assert!(right.divergent[0]);
        assert!(!right.divergent[160]);
    }

    #[test]
    fn reflected_table_mirrors_arguments() {
        let data = SpectralData::new(
            Side::Right,
            None,
            vec![DiscreteEigenvalue::new(c(0.4, 0.8), c(0.2, -1.0)).unwrap()],
        )
        .unwrap();
        let table = kernel_right(&data, -2.0, 0.25, 17).unwrap();
        let mirror = table.reflected();
        for k in 0..table.len() {
            let z = table.z(k);
            assert_eq!(mirror.at(-z).unwrap(), table.values[k]);
        }
    }

    #[test]
    fn lookup_checks_range_and_alignment() {
        let table = kernel_left(&one_soliton(Side::Left), -1.0, 0.25, 9).unwrap();
        assert!(table.at(0.0).is_ok());
        assert!(matches!(table.at(1.25), Err(Error::KernelRange { .. })));
        assert!(matches!(table.at(0.1), Err(Error::KernelAlignment { .. })));
    }

    #[test]
    fn restrict_selects_subset() {
        let d = vec![
            DiscreteEigenvalue::new(c(0.5, 1.0), c(0.1, 2.0)).unwrap(),
            DiscreteEigenvalue::new(c(-1.4, 1.75), c(0.3, 0.2)).unwrap(),
        ];
        let data = SpectralData::new(Side::Left, None, d.clone()).unwrap();
        let one = restrict_solitons(&data, &[0]).unwrap();
        assert_eq!(one.discrete, vec![d[0]]);
        assert_eq!(restrict_solitons(&data, &[1, 0]).unwrap(), data);
        assert!(restrict_solitons(&data, &[]).is_err());
        assert!(restrict_solitons(&data, &[2]).is_err());
    }

    #[test]
    fn cut_renormalizes_only_behind_the_kept_soliton() {
        let d = vec![
            DiscreteEigenvalue::new(c(0.5, 1.0), c(0.1, 2.0)).unwrap(),
            DiscreteEigenvalue::new(c(-1.4, 1.75), c(0.3, 0.2)).unwrap(),
        ];
        let centers = [-8.0, 8.0];
        let left = SpectralData::new(Side::Left, None, d.clone()).unwrap();
        // dropping the right soliton leaves the left one untouched
        assert_eq!(cut_solitons(&left, &[0], &centers).unwrap().discrete[0], d[0]);
        let kept = cut_solitons(&left, &[1], &centers).unwrap().discrete[0];
        let a = soliton_transmission(d[0].zeta, d[1].zeta);
        assert_abs_diff_eq!((kept.norming - d[1].norming * a * a).norm(), 0.0, epsilon = 1e-15);

        let right = SpectralData::new(Side::Right, None, d.clone()).unwrap();
        assert_eq!(cut_solitons(&right, &[1], &centers).unwrap().discrete[0], d[1]);
        let kept = cut_solitons(&right, &[0], &centers).unwrap().discrete[0];
        let a = soliton_transmission(d[1].zeta, d[0].zeta);
        assert_abs_diff_eq!((kept.norming - d[0].norming * a * a).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn json_round_trip_and_field_names() {
        let cont = ContinuousSpectrum::new(
            -1.0,
            0.5,
            vec![c(0.1, 0.2), c(0.0, -0.3), c(1e-3, 0.0), c(0.0, 0.0), c(2.0, 1.0)],
        )
        .unwrap();
        let data = SpectralData::new(
            Side::Right,
            Some(cont),
            vec![DiscreteEigenvalue::new(c(0.25, 1.5), c(-0.5, 0.125)).unwrap()],
        )
        .unwrap();
        let text = data.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["side"], "right");
        assert_eq!(v["discrete"][0]["zeta"][1], 1.5);
        assert_eq!(v["continuous"]["dxi"], 0.5);
        assert!(v.get("sign_mode").is_none());
        assert_eq!(SpectralData::from_json(&text).unwrap(), data);

        let bare = r#"{"side":"left","discrete":[],"continuous":{"xi0":0,"dxi":1,"values":[[1,0]]}}"#;
        let parsed = SpectralData::from_json(bare).unwrap();
        assert_eq!(parsed.sign_mode, SignMode::ContinuousOnly);
        let focusing = r#"{"side":"left","discrete":[],"continuous":{"xi0":0,"dxi":1,"values":[[1,0]]},"sign_mode":"with_discrete"}"#;
        assert_eq!(
            SpectralData::from_json(focusing).unwrap().sign_mode,
            SignMode::WithDiscrete
        );
        assert!(SpectralData::from_json(r#"{"side":"up","discrete":[],"continuous":null}"#).is_err());
    }

    #[test]
    fn opposite_side_of_single_soliton() {
        // r_1 l_1 = 4 eta^2 for one soliton
        let eta = 1.3;
        let l = c(0.4, -2.0);
        let data = SpectralData::new(Side::Left, None, vec![DiscreteEigenvalue::new(c(0.2, eta), l).unwrap()]).unwrap();
        let right = data.to_opposite_side().unwrap();
        assert_eq!(right.side, Side::Right);
        let r = right.discrete[0].norming;
        assert_abs_diff_eq!((r * l - 4.0 * eta * eta).norm(), 0.0, epsilon = 1e-13);
        let back = right.to_opposite_side().unwrap();
        assert_abs_diff_eq!((back.discrete[0].norming - l).norm(), 0.0, epsilon = 1e-13);
    }
}
