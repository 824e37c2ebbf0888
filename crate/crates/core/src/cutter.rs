//! Stability zones, cut plans and multi-segment recovery.
//!
//! Each soliton is stable to recover within `zone_constant / eta` of its
//! center. Zones that intersect are merged into groups. A short group (all
//! of its zones share a point) is recovered whole; a long one is split at
//! the midpoints between its solitons. Every resulting unit gets two
//! marches that meet at its junction: the left equations march rightward
//! from the boundary with the previous unit, the right equations march
//! leftward from the boundary with the next one. A march keeps every
//! soliton whose zone still contains its end point and cuts the rest; the
//! norming constants of the kept solitons are corrected for the
//! transmission of the removed ones.

use serde::{Deserialize, Serialize};

use crate::glme::{march, Direction, DivergencePolicy, MarchState, StopReason};
use crate::spectral::{cut_solitons, DiscreteEigenvalue, Side, SignMode, SpectralData};
use crate::{Error, Result, Signal, TimeGrid, C64};

pub const DEFAULT_ZONE_CONSTANT: f64 = 6.0;

/// Potential magnitude, relative to the largest soliton amplitude, above
/// which a start point needs the extended window.
pub const EXTENDED_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// All solitons everywhere; one left and one right march.
    NoCuts,
    /// Cuts at unit boundaries, plain starts.
    WithCuts,
    /// Cuts at unit boundaries, enlarged start windows where the potential is not small.
    Extended,
    /// Left equations only, always marching rightward.
    LeftOnly,
    /// Right equations only, always marching leftward.
    RightOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub method: Method,
    pub zone_constant: f64,
    /// Extra start blocks for extended starts; the grid's `M` when `None`.
    pub extra: Option<usize>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            method: Method::Extended,
            zone_constant: DEFAULT_ZONE_CONSTANT,
            extra: None,
        }
    }
}

/// Left and right data of one potential. Eigenvalue `k` must be the same on
/// both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPair {
    pub left: Option<SpectralData>,
    pub right: Option<SpectralData>,
}

impl SpectralPair {
    pub fn new(left: Option<SpectralData>, right: Option<SpectralData>) -> Result<Self> {
        if let Some(l) = &left {
            if l.side != Side::Left {
                return Err(Error::InvalidSpectralData("left slot holds right data".into()));
            }
        }
        if let Some(r) = &right {
            if r.side != Side::Right {
                return Err(Error::InvalidSpectralData("right slot holds left data".into()));
            }
        }
        match (&left, &right) {
            (None, None) => return Err(Error::InvalidSpectralData("no spectral data".into())),
            (Some(l), Some(r)) => {
                if l.sign_mode != r.sign_mode || l.discrete.len() != r.discrete.len() {
                    return Err(Error::InvalidSpectralData("left and right data disagree".into()));
                }
                for (a, b) in l.discrete.iter().zip(&r.discrete) {
                    if (a.zeta - b.zeta).norm() > 1e-8 * (1.0 + a.zeta.norm()) {
                        return Err(Error::InvalidSpectralData(
                            "left and right eigenvalues must be listed in the same order".into(),
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok(Self { left, right })
    }

    /// Wraps one side, deriving the other when the data are reflectionless.
    pub fn from_data(data: SpectralData) -> Self {
        let other = data.to_opposite_side().ok();
        match data.side {
            Side::Left => Self {
                left: Some(data),
                right: other,
            },
            Side::Right => Self {
                left: other,
                right: Some(data),
            },
        }
    }

    pub fn side(&self, side: Side) -> Result<&SpectralData> {
        match side {
            Side::Left => self.left.as_ref(),
            Side::Right => self.right.as_ref(),
        }
        .ok_or_else(|| {
            Error::Planning(format!(
                "{side:?} spectral data are required for this plan; supply them or use a single-direction method"
            ))
        })
    }

    fn any(&self) -> &SpectralData {
        self.left.as_ref().or(self.right.as_ref()).expect("validated nonempty")
    }

    pub fn discrete(&self) -> &[DiscreteEigenvalue] {
        &self.any().discrete
    }

    pub fn sign_mode(&self) -> SignMode {
        self.any().sign_mode
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityZone {
    pub soliton: usize,
    pub center: f64,
    pub radius: f64,
    pub active_solitons: Vec<usize>,
}

impl StabilityZone {
    pub fn lo(&self) -> f64 {
        self.center - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.center + self.radius
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: usize,
    pub direction: Direction,
    /// Grid index and time of the march start.
    pub start: usize,
    pub start_t: f64,
    /// Far end of the march (the last owned sample).
    pub end_t: f64,
    /// Owned samples `first..=last`.
    pub first: usize,
    pub last: usize,
    pub active_solitons: Vec<usize>,
    pub use_extended: bool,
    /// Blocks solved before the start point (0 for a plain start).
    pub extra: usize,
    pub policy: DivergencePolicy,
}

impl Segment {
    /// Half-steps from the start to the far end.
    pub fn steps(&self) -> usize {
        match self.direction {
            Direction::RightwardLeftGlme => self.last - self.start,
            Direction::LeftwardRightGlme => self.start - self.first,
        }
    }

    pub fn side(&self) -> Side {
        match self.direction {
            Direction::RightwardLeftGlme => Side::Left,
            Direction::LeftwardRightGlme => Side::Right,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutPlan {
    pub grid: TimeGrid,
    /// GLME step, twice the output step.
    pub h: f64,
    pub method: Method,
    pub zone_constant: f64,
    pub centers: Vec<f64>,
    pub zones: Vec<StabilityZone>,
    /// Soliton indices per recovery unit, ordered by center.
    pub units: Vec<Vec<usize>>,
    pub segments: Vec<Segment>,
}

impl CutPlan {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentFailure {
    pub segment: usize,
    /// Samples written before the failure.
    pub completed: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredSignal {
    pub signal: Signal,
    /// Segment id that wrote each sample.
    pub provenance: Vec<Option<usize>>,
    pub failures: Vec<SegmentFailure>,
}

impl RecoveredSignal {
    pub fn grid(&self) -> TimeGrid {
        self.signal.grid
    }

    pub fn q(&self) -> &[C64] {
        &self.signal.q
    }

    /// The signal, or the first segment failure as an error.
    pub fn into_complete(self) -> Result<Signal> {
        match self.failures.first() {
            None => Ok(self.signal),
            Some(f) => Err(Error::Segment {
                segment: f.segment,
                source: Box::new(Error::Unstable(f.message.clone())),
            }),
        }
    }
}

/// Isolated-soliton amplitude `2 eta sech(2 eta (t - c))`, used to judge
/// whether the potential is small at a point.
fn soliton_envelope(eta: f64, c: f64, t: f64) -> f64 {
    2.0 * eta / (2.0 * eta * (t - c)).cosh()
}

// ---------------------------------------------------------------------------
// Center finding

/// Center of each soliton: the peak of a GTIB recovery of that soliton alone
/// (all others cut), refined by a parabola through `log|q|`. The cut
/// correction depends on the center order, so the sub-recoveries are
/// repeated until the order is stable.
pub fn find_centers(data: &SpectralData) -> Result<Vec<(usize, f64)>> {
    let n = data.discrete.len();
    if n == 0 {
        return Err(Error::Empty("discrete spectrum"));
    }
    // right data of q are left data of -conj(q(-t)): same machinery, mirrored time
    let mirror = data.side == Side::Right;
    let left = SpectralData {
        side: Side::Left,
        continuous: None,
        discrete: data.discrete.clone(),
        sign_mode: SignMode::WithDiscrete,
    };
    let isolated = |k: usize, centers: Option<&[f64]>| -> Result<f64> {
        let one = match centers {
            None => crate::spectral::restrict_solitons(&left, &[k])?,
            Some(c) => cut_solitons(&left, &[k], c)?,
        };
        isolated_center(&one)
    };
    let mut centers = (0..n).map(|k| isolated(k, None)).collect::<Result<Vec<_>>>()?;
    for _ in 0..=n + 1 {
        let next = (0..n)
            .map(|k| isolated(k, Some(&centers)))
            .collect::<Result<Vec<_>>>()?;
        let stable = rank(&next) == rank(&centers);
        centers = next;
        if stable {
            break;
        }
    }
    Ok(centers
        .into_iter()
        .enumerate()
        .map(|(k, c)| (k, if mirror { -c } else { c }))
        .collect())
}

fn rank(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

// Peak of the single-eigenvalue left recovery.
fn isolated_center(one: &SpectralData) -> Result<f64> {
    let e = one.discrete[0];
    let eta = e.zeta.im;
    let h = 0.05 / eta;
    let tau = 0.5 * h;
    // In the far left tail q(t) ~ 2 Omega(2t) with |Omega(z)| = |-i l| e^{eta z}.
    let mag = |t: f64| 2.0 * e.norming.norm() * (2.0 * eta * t).exp();
    let small = 1e-10 * 2.0 * eta;
    // t where the tail bound equals `small`; start one zone width further left
    let t_tail = (small / (2.0 * e.norming.norm())).ln() / (2.0 * eta);
    let start = t_tail - 2.0 / eta;
    debug_assert!(mag(start) < small);
    let steps = (40.0 / eta / tau).ceil() as usize;
    let n = steps + 1;
    let a = 2.0 * start - h;
    let kernel = one.kernel(a - (n as f64 - 1.0) * h, h, 2 * n)?;
    let mut state = MarchState::start(
        &kernel,
        Direction::RightwardLeftGlme,
        start,
        1,
        h,
        SignMode::WithDiscrete,
        DivergencePolicy::Stop,
    )?;
    let out = march(&mut state, &kernel, steps)?;
    let mags: Vec<f64> = out.samples.iter().map(|s| s.1.norm()).collect();
    let (j, peak) = mags
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::Empty("center search"))?;
    if j == 0 || j + 1 >= mags.len() || !(peak > 0.0) {
        return Err(Error::Planning(
            "soliton peak not found in the center search window".into(),
        ));
    }
    let (l0, l1, l2) = (mags[j - 1].ln(), peak.ln(), mags[j + 1].ln());
    let curv = l0 - 2.0 * l1 + l2;
    let shift = if curv < 0.0 { 0.5 * (l0 - l2) / curv } else { 0.0 };
    Ok(out.samples[j].0 + shift.clamp(-1.0, 1.0) * tau)
}

// ---------------------------------------------------------------------------
// Planning

struct Unit {
    solitons: Vec<usize>,
    junction: f64,
}

/// Builds the cut plan for `grid` with GLME step `h = 2 tau` and window
/// `P = M h`, where `M` is the number of grid intervals.
pub fn plan(data: &SpectralPair, grid: TimeGrid, p: f64, m: usize, options: &PlanOptions) -> Result<CutPlan> {
    let h = 2.0 * grid.step;
    if grid.len < 2 {
        return Err(Error::Config("the recovery grid needs at least two points".into()));
    }
    if m != grid.intervals() {
        return Err(Error::Config(format!(
            "M = {m} but the grid has {} intervals",
            grid.intervals()
        )));
    }
    if (p - m as f64 * h).abs() > 1e-9 * p.abs().max(1.0) {
        return Err(Error::Config(format!("P = {p} must equal M h = {}", m as f64 * h)));
    }
    if !(options.zone_constant > 0.0) {
        return Err(Error::Config("zone constant must be positive".into()));
    }
    let discrete = data.discrete();
    let centers: Vec<f64> = if discrete.is_empty() {
        Vec::new()
    } else {
        let src = data.left.as_ref().or(data.right.as_ref()).expect("validated");
        find_centers(src)?.into_iter().map(|(_, c)| c).collect()
    };
    let order = rank(&centers);
    let zones: Vec<StabilityZone> = order
        .iter()
        .map(|&k| StabilityZone {
            soliton: k,
            center: centers[k],
            radius: options.zone_constant / discrete[k].zeta.im,
            active_solitons: vec![k],
        })
        .collect();

    let units = build_units(&zones, &centers, grid, options.method)?;
    let extra = options.extra.unwrap_or(m);
    let eta_max = discrete.iter().map(|d| d.zeta.im).fold(0.0, f64::max);

    let mut segments = Vec::new();
    let nearest = |t: f64| grid.nearest(t);
    let last_index = grid.len - 1;
    // boundary indices B_0..B_K, junction indices J_1..J_K
    let mut bounds = vec![0usize];
    for w in units.windows(2) {
        let right_edge = w[0].solitons.iter().map(|&k| centers[k]).fold(f64::MIN, f64::max);
        let left_edge = w[1].solitons.iter().map(|&k| centers[k]).fold(f64::MAX, f64::min);
        bounds.push(nearest(0.5 * (right_edge + left_edge)));
    }
    bounds.push(last_index);
    let junctions: Vec<usize> = units.iter().map(|u| nearest(u.junction)).collect();

    let needs_extension = |t: f64, active: &[usize]| -> bool {
        let pot: f64 = active
            .iter()
            .map(|&k| soliton_envelope(discrete[k].zeta.im, centers[k], t))
            .sum();
        pot > EXTENDED_THRESHOLD * 2.0 * eta_max
    };
    let policy = if options.method == Method::NoCuts {
        DivergencePolicy::Ignore
    } else {
        DivergencePolicy::Stop
    };
    let extended_allowed = matches!(options.method, Method::Extended | Method::LeftOnly | Method::RightOnly);
    let mut push = |direction: Direction, start: usize, first: usize, last: usize, active: Vec<usize>| {
        if first > last {
            return;
        }
        let start_t = grid.t(start);
        let use_extended = extended_allowed && needs_extension(start_t, &active);
        let end_t = match direction {
            Direction::RightwardLeftGlme => grid.t(last),
            Direction::LeftwardRightGlme => grid.t(first),
        };
        segments.push(Segment {
            id: 0,
            direction,
            start,
            start_t,
            end_t,
            first,
            last,
            active_solitons: active,
            use_extended,
            extra: if use_extended { extra } else { 0 },
            policy,
        });
    };
    // a march keeps every soliton whose zone still contains the point where it ends
    let keep = |direction: Direction, end: usize| -> Vec<usize> {
        let end_t = grid.t(end);
        let slack = 1e-9 * grid.step;
        (0..discrete.len())
            .filter(|&k| {
                let r = options.zone_constant / discrete[k].zeta.im;
                options.method == Method::NoCuts
                    || match direction {
                        Direction::RightwardLeftGlme => centers[k] + r >= end_t - slack,
                        Direction::LeftwardRightGlme => centers[k] - r <= end_t + slack,
                    }
            })
            .collect()
    };
    let k_units = units.len();
    match options.method {
        Method::LeftOnly | Method::RightOnly => {
            // each soliton is cut where the march reaches the far edge of its
            // zone; segments run between consecutive cut points
            let left = options.method == Method::LeftOnly;
            let mut drops: Vec<(usize, usize)> = (0..discrete.len())
                .map(|s| {
                    let r = options.zone_constant / discrete[s].zeta.im;
                    (s, nearest(if left { centers[s] + r } else { centers[s] - r }))
                })
                .collect();
            if left {
                drops.sort_by_key(|d| d.1);
            } else {
                drops.sort_by_key(|d| std::cmp::Reverse(d.1));
            }
            let mut remaining: Vec<usize> = (0..discrete.len()).collect();
            let mut from = if left { 0 } else { last_index };
            for (s, at) in drops {
                if left && at > from {
                    push(Direction::RightwardLeftGlme, from, from, at - 1, remaining.clone());
                    from = at;
                } else if !left && at < from {
                    push(Direction::LeftwardRightGlme, from, at + 1, from, remaining.clone());
                    from = at;
                }
                remaining.retain(|&u| u != s);
            }
            if left {
                push(Direction::RightwardLeftGlme, from, from, last_index, remaining);
            } else {
                push(Direction::LeftwardRightGlme, from, 0, from, remaining);
            }
        }
        _ => {
            for k in 0..k_units {
                let (b_lo, b_hi, j) = (bounds[k], bounds[k + 1], junctions[k].clamp(bounds[k], bounds[k + 1]));
                push(
                    Direction::RightwardLeftGlme,
                    b_lo,
                    b_lo,
                    j,
                    keep(Direction::RightwardLeftGlme, j),
                );
                let top = if k + 1 == k_units { b_hi } else { b_hi.saturating_sub(1) };
                if j < top {
                    push(
                        Direction::LeftwardRightGlme,
                        b_hi,
                        j + 1,
                        top,
                        keep(Direction::LeftwardRightGlme, j + 1),
                    );
                }
            }
        }
    }
    segments.sort_by_key(|s| s.first);
    for (id, s) in segments.iter_mut().enumerate() {
        s.id = id;
    }
    Ok(CutPlan {
        grid,
        h,
        method: options.method,
        zone_constant: options.zone_constant,
        centers,
        zones,
        units: units.into_iter().map(|u| u.solitons).collect(),
        segments,
    })
}

fn build_units(zones: &[StabilityZone], centers: &[f64], grid: TimeGrid, method: Method) -> Result<Vec<Unit>> {
    let mid_grid = 0.5 * (grid.start + grid.end());
    if zones.is_empty() {
        return Ok(vec![Unit {
            solitons: Vec::new(),
            junction: mid_grid,
        }]);
    }
    let span = |sol: &[usize]| -> (f64, f64) {
        let lo = sol.iter().map(|&k| centers[k]).fold(f64::MAX, f64::min);
        let hi = sol.iter().map(|&k| centers[k]).fold(f64::MIN, f64::max);
        (lo, hi)
    };
    if method == Method::NoCuts {
        // one unit; the marches meet inside the common zone if there is one
        let all: Vec<usize> = zones.iter().map(|z| z.soliton).collect();
        let lo = zones.iter().map(|z| z.lo()).fold(f64::MIN, f64::max);
        let hi = zones.iter().map(|z| z.hi()).fold(f64::MAX, f64::min);
        let junction = if lo <= hi {
            0.5 * (lo + hi)
        } else {
            let (a, b) = span(&all);
            0.5 * (a + b)
        };
        return Ok(vec![Unit {
            solitons: all,
            junction,
        }]);
    }
    // transitive merge of intersecting zones (sorted by center)
    let mut groups: Vec<Vec<&StabilityZone>> = Vec::new();
    let mut reach = f64::MIN;
    for z in zones {
        match groups.last_mut() {
            Some(g) if z.lo() <= reach => g.push(z),
            _ => groups.push(vec![z]),
        }
        reach = if groups.last().map(|g| g.len()) == Some(1) {
            z.hi()
        } else {
            reach.max(z.hi())
        };
    }
    let mut units = Vec::new();
    for g in groups {
        // short: all zones share a point, and the junction sits in the middle of it
        let lo = g.iter().map(|z| z.lo()).fold(f64::MIN, f64::max);
        let hi = g.iter().map(|z| z.hi()).fold(f64::MAX, f64::min);
        let solitons: Vec<usize> = g.iter().map(|z| z.soliton).collect();
        if lo <= hi {
            units.push(Unit {
                solitons,
                junction: 0.5 * (lo + hi),
            });
            continue;
        }
        // long group: split between distinguishable centers, keep coincident ones together
        let mut current: Vec<&StabilityZone> = vec![g[0]];
        for z in &g[1..] {
            let prev = current.last().expect("nonempty");
            if z.center - prev.center < grid.step {
                if method != Method::Extended {
                    return Err(Error::Planning(format!(
                        "long soliton group with indistinguishable centers near t = {:.6}; use the extended method",
                        z.center
                    )));
                }
                current.push(z);
            } else {
                let sol: Vec<usize> = current.iter().map(|z| z.soliton).collect();
                let (lo, hi) = span(&sol);
                units.push(Unit {
                    solitons: sol,
                    junction: 0.5 * (lo + hi),
                });
                current = vec![z];
            }
        }
        let sol: Vec<usize> = current.iter().map(|z| z.soliton).collect();
        let (lo, hi) = span(&sol);
        units.push(Unit {
            solitons: sol,
            junction: 0.5 * (lo + hi),
        });
    }
    Ok(units)
}

// ---------------------------------------------------------------------------
// Recovery

/// Samples of one segment and why it stopped early, if it did.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentRun {
    /// `(grid index, q)` for the owned samples reached.
    pub samples: Vec<(usize, C64)>,
    pub stop: Option<StopReason>,
}

/// Data of a segment: its side with the inactive solitons cut.
fn segment_data(data: &SpectralPair, seg: &Segment, centers: &[f64]) -> Result<Option<SpectralData>> {
    let full = data.side(seg.side())?;
    if seg.active_solitons.len() == full.discrete.len() {
        return Ok(Some(full.clone()));
    }
    if seg.active_solitons.is_empty() && full.continuous.is_none() {
        return Ok(None);
    }
    cut_solitons(full, &seg.active_solitons, centers).map(Some)
}

/// Runs one segment. `boundary` stops the march before points past it (the
/// zone position test).
pub fn run_segment(data: &SpectralPair, plan: &CutPlan, seg: &Segment, boundary: Option<f64>) -> Result<SegmentRun> {
    let grid = plan.grid;
    let owned = |i: usize| i >= seg.first && i <= seg.last;
    let index_at = |j: usize| -> usize {
        match seg.direction {
            Direction::RightwardLeftGlme => seg.start + j,
            Direction::LeftwardRightGlme => seg.start - j,
        }
    };
    let Some(active) = segment_data(data, seg, &plan.centers)? else {
        // nothing left in the kernel: the potential is zero here
        let samples = (seg.first..=seg.last).map(|i| (i, C64::new(0.0, 0.0))).collect();
        return Ok(SegmentRun { samples, stop: None });
    };
    let h = plan.h;
    let m0 = 1 + seg.extra;
    let steps = seg.steps();
    let n = m0 + steps;
    let t_s = grid.t(seg.start);
    let z0 = match seg.direction {
        Direction::RightwardLeftGlme => 2.0 * t_s - m0 as f64 * h - (n as f64 - 1.0) * h,
        Direction::LeftwardRightGlme => 2.0 * t_s + m0 as f64 * h - n as f64 * h,
    };
    let kernel = active.kernel(z0, h, 2 * n)?;
    let mut state = match MarchState::start(&kernel, seg.direction, t_s, m0, h, active.sign_mode, seg.policy) {
        Ok(s) => s,
        Err(Error::CutRequired { z }) => {
            return Ok(SegmentRun {
                samples: Vec::new(),
                stop: Some(StopReason::Divergent { z }),
            })
        }
        Err(Error::Instability {
            step,
            sigma_min,
            tolerance,
        }) => {
            return Ok(SegmentRun {
                samples: Vec::new(),
                stop: Some(StopReason::Instability {
                    step,
                    sigma_min,
                    tolerance,
                }),
            })
        }
        Err(e) => return Err(e),
    };
    state.set_boundary(boundary);
    let out = march(&mut state, &kernel, steps)?;
    let samples = out
        .samples
        .iter()
        .enumerate()
        .map(|(j, &(_, q))| (index_at(j), q))
        .filter(|&(i, _)| owned(i))
        .collect();
    Ok(SegmentRun {
        samples,
        stop: out.stop,
    })
}

#[cfg(not(target_arch = "wasm32"))]
fn run_all(data: &SpectralPair, plan: &CutPlan) -> Vec<Result<SegmentRun>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = plan
            .segments
            .iter()
            .map(|seg| scope.spawn(move || run_segment(data, plan, seg, None)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Planning("segment worker panicked".into())))
            })
            .collect()
    })
}

// no threads in the browser
#[cfg(target_arch = "wasm32")]
fn run_all(data: &SpectralPair, plan: &CutPlan) -> Vec<Result<SegmentRun>> {
    plan.segments
        .iter()
        .map(|seg| run_segment(data, plan, seg, None))
        .collect()
}

/// Executes every segment of the plan (concurrently) and stitches the owned
/// samples. Missing samples stay NaN and are reported in `failures`.
pub fn recover(data: &SpectralPair, plan: &CutPlan) -> Result<RecoveredSignal> {
    let grid = plan.grid;
    let mut q = vec![C64::new(f64::NAN, f64::NAN); grid.len];
    let mut provenance = vec![None; grid.len];
    let mut failures = Vec::new();
    let runs = run_all(data, plan);
    for (seg, run) in plan.segments.iter().zip(runs) {
        let run = run.map_err(|e| Error::Segment {
            segment: seg.id,
            source: Box::new(e),
        })?;
        let expected = seg.last - seg.first + 1;
        for &(i, v) in &run.samples {
            q[i] = v;
            provenance[i] = Some(seg.id);
        }
        if run.samples.len() < expected {
            let message = match &run.stop {
                Some(StopReason::Divergent { z }) => format!("divergent kernel entry at z = {z}; a cut is required"),
                Some(StopReason::Instability {
                    step,
                    sigma_min,
                    tolerance,
                }) => {
                    format!("unstable pivot at step {step} (sigma_min {sigma_min:e} < {tolerance:e})")
                }
                Some(StopReason::Boundary { t }) => format!("stability zone boundary reached at t = {t}"),
                None => "march ended early".to_string(),
            };
            failures.push(SegmentFailure {
                segment: seg.id,
                completed: run.samples.len(),
                message,
            });
        }
    }
    Ok(RecoveredSignal {
        signal: Signal::new(grid, q),
        provenance,
        failures,
    })
}

/// Plans with only one side's equations and recovers.
pub fn recover_single_direction(
    data: &SpectralPair,
    grid: TimeGrid,
    p: f64,
    m: usize,
    side: Side,
    zone_constant: f64,
) -> Result<RecoveredSignal> {
    if grid.is_empty() {
        return Ok(RecoveredSignal {
            signal: Signal::new(grid, Vec::new()),
            provenance: Vec::new(),
            failures: Vec::new(),
        });
    }
    let options = PlanOptions {
        method: match side {
            Side::Left => Method::LeftOnly,
            Side::Right => Method::RightOnly,
        },
        zone_constant,
        extra: None,
    };
    let plan = plan(data, grid, p, m, &options)?;
    recover(data, &plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::pointwise_error_signals;
    use crate::oracles::{darboux_multisoliton, darboux_seed_data, exact_soliton, soliton_train_data, SolitonParams};

    fn pair(ps: &[SolitonParams]) -> SpectralPair {
        SpectralPair::from_data(soliton_train_data(ps, Side::Left).unwrap())
    }

    fn opts(method: Method) -> PlanOptions {
        PlanOptions {
            method,
            ..Default::default()
        }
    }

    fn plan_on(data: &SpectralPair, lo: f64, hi: f64, m: usize, method: Method) -> Result<CutPlan> {
        let grid = TimeGrid::covering(lo, hi, m);
        plan(data, grid, m as f64 * 2.0 * grid.step, m, &opts(method))
    }

    fn two(delta: f64) -> [SolitonParams; 2] {
        [
            SolitonParams::new(1.0, 0.5, 0.1, -delta).unwrap(),
            SolitonParams::new(1.75, -1.4, 0.8, delta).unwrap(),
        ]
    }

    const METHODS: [Method; 5] = [
        Method::NoCuts,
        Method::WithCuts,
        Method::Extended,
        Method::LeftOnly,
        Method::RightOnly,
    ];

    #[test]
    fn every_sample_is_owned_by_exactly_one_segment() {
        for ps in [two(8.0).to_vec(), two(32.0).to_vec()] {
            let data = pair(&ps);
            for method in METHODS {
                let p = plan_on(&data, -26.0, 16.0, 420, method).unwrap();
                let mut owners = vec![0; p.grid.len];
                for s in &p.segments {
                    for o in &mut owners[s.first..=s.last] {
                        *o += 1;
                    }
                }
                assert!(owners.iter().all(|&o| o == 1), "{method:?}: {owners:?}");
            }
        }
    }

    #[test]
    fn single_soliton_plan_meets_at_the_center() {
        let p0 = SolitonParams::new(1.0, 0.5, 0.8, 2.0).unwrap();
        let p = plan_on(&pair(&[p0]), -9.0, 11.0, 400, Method::WithCuts).unwrap();
        assert_eq!(p.units, vec![vec![0]]);
        assert!((p.centers[0] - 1.0).abs() < 1e-3, "{}", p.centers[0]);
        assert_eq!(p.segments.len(), 2);
        assert_eq!(p.segments[0].direction, Direction::RightwardLeftGlme);
        assert!((p.segments[0].end_t - 1.0).abs() <= p.grid.step);
        assert_eq!(p.segments[1].direction, Direction::LeftwardRightGlme);
        assert_eq!(p.zones[0].radius, 6.0);
    }

    #[test]
    fn intersecting_zones_share_a_unit() {
        let data = SpectralPair::from_data(darboux_seed_data(&two(8.0), Side::Left).unwrap());
        let p = plan_on(&data, -12.0, 7.0, 380, Method::WithCuts).unwrap();
        assert_eq!(p.units, vec![vec![0, 1]]);
        assert!(p.segments.iter().all(|s| s.active_solitons == vec![0, 1]));
    }

    #[test]
    fn disjoint_zones_are_cut() {
        let data = pair(&two(32.0));
        let p = plan_on(&data, -24.0, 16.0, 400, Method::WithCuts).unwrap();
        assert_eq!(p.units, vec![vec![0], vec![1]]);
        // the march into the second unit no longer carries the first soliton
        let into_second = p
            .segments
            .iter()
            .find(|s| s.direction == Direction::RightwardLeftGlme && s.first > 0)
            .unwrap();
        assert_eq!(into_second.active_solitons, vec![1]);
        let nocut = plan_on(&data, -24.0, 16.0, 400, Method::NoCuts).unwrap();
        assert_eq!(nocut.units.len(), 1);
        assert!(nocut.segments.iter().all(|s| s.policy == DivergencePolicy::Ignore));
    }

    #[test]
    fn single_direction_plans_march_one_way() {
        let data = pair(&two(32.0));
        for (method, dir) in [
            (Method::LeftOnly, Direction::RightwardLeftGlme),
            (Method::RightOnly, Direction::LeftwardRightGlme),
        ] {
            let p = plan_on(&data, -24.0, 16.0, 400, method).unwrap();
            assert!(p.segments.iter().all(|s| s.direction == dir));
            assert_eq!(p.segments.len(), 3);
        }
    }

    #[test]
    fn grid_relations_are_checked() {
        let data = pair(&two(8.0));
        let grid = TimeGrid::covering(-10.0, 10.0, 200);
        assert!(matches!(
            plan(&data, grid, 20.0, 199, &opts(Method::Extended)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            plan(&data, grid, 19.0, 200, &opts(Method::Extended)),
            Err(Error::Config(_))
        ));
        let bad = PlanOptions {
            zone_constant: 0.0,
            ..Default::default()
        };
        assert!(matches!(plan(&data, grid, 40.0, 200, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn missing_side_is_reported() {
        let p0 = SolitonParams::new(1.0, 0.5, 0.8, 0.0).unwrap();
        let left = soliton_train_data(&[p0], Side::Left).unwrap();
        let only_left = SpectralPair::new(Some(left), None).unwrap();
        let p = plan_on(&only_left, -10.0, 10.0, 200, Method::WithCuts).unwrap();
        assert!(recover(&only_left, &p).is_err());
        let p = plan_on(&only_left, -10.0, 10.0, 200, Method::LeftOnly).unwrap();
        assert!(recover(&only_left, &p).unwrap().failures.is_empty());
    }

    #[test]
    fn recovers_single_soliton_with_every_method() {
        let p0 = SolitonParams::new(1.0, 0.5, 0.8, 0.0).unwrap();
        let data = pair(&[p0]);
        for method in METHODS {
            let p = plan_on(&data, -10.0, 10.0, 800, method).unwrap();
            let rec = recover(&data, &p).unwrap();
            assert!(rec.failures.is_empty());
            assert!(rec.provenance.iter().all(Option::is_some));
            let e = pointwise_error_signals(&rec.signal, &exact_soliton(&p0, p.grid)).unwrap();
            let max = e.iter().copied().fold(0.0, f64::max);
            assert!(max < 1e-3, "{method:?}: {max}");
        }
    }

    #[test]
    fn cut_recovery_of_separated_solitons() {
        let data = pair(&two(32.0));
        let p = plan_on(&data, -24.0, 16.0, 2000, Method::WithCuts).unwrap();
        let q = recover(&data, &p).unwrap().into_complete().unwrap();
        let exact = darboux_multisoliton(data.discrete(), p.grid).unwrap();
        let e = pointwise_error_signals(&q, &exact).unwrap();
        assert!(e.iter().copied().fold(0.0, f64::max) < 1e-3);
    }

    #[test]
    fn incomplete_recovery_is_a_numerical_error() {
        let rec = RecoveredSignal {
            signal: Signal::new(TimeGrid::covering(0.0, 1.0, 1), vec![C64::new(f64::NAN, 0.0); 2]),
            provenance: vec![None; 2],
            failures: vec![SegmentFailure {
                segment: 3,
                completed: 0,
                message: "x".into(),
            }],
        };
        let err = rec.into_complete().unwrap_err();
        assert!(err.is_numerical());
        assert!(matches!(err, Error::Segment { segment: 3, .. }));
    }

    #[test]
    fn purely_continuous_data_has_no_zones() {
        let cont = crate::spectral::ContinuousSpectrum::new(-1.0, 0.5, vec![C64::new(0.0, 0.0); 5]).unwrap();
        let data = SpectralPair::new(
            Some(SpectralData::new(Side::Left, Some(cont.clone()), Vec::new()).unwrap()),
            Some(SpectralData::new(Side::Right, Some(cont), Vec::new()).unwrap()),
        )
        .unwrap();
        let p = plan_on(&data, -1.0, 1.0, 20, Method::Extended).unwrap();
        assert!(p.zones.is_empty());
        assert_eq!(p.units, vec![Vec::<usize>::new()]);
        let rec = recover(&data, &p).unwrap();
        assert!(rec.q().iter().all(|q| q.norm() < 1e-15));
    }
}
