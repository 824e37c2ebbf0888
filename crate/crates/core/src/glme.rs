//! Discretized Marchenko equations and their block Levinson solution.
//!
//! With kernel samples `g_k = Omega(a + k h)`, `a = 2t - P`, `h = P/M`, the
//! right Riemann sums of the window equations give, for `i = 1..M`,
//!
//! ```text
//! x1_i - kappa h sum_j conj(T_{j,i}) y2_j = 0
//! h sum_j T_{i,j} x1_j + y2_i            = F_i
//! ```
//!
//! with `T_{i,j} = g_{i-j}`, `F_i = g_i` and `q(t) = 2 kappa y2_M`. `kappa` is
//! `+1` in the focusing case and `-1` otherwise. Interleaving `[x1_j, y2_j]`
//! makes the matrix block Toeplitz with 2x2 blocks
//!
//! ```text
//! B_d = [[delta_d0, -kappa h conj(g_{-d})], [h g_d, delta_d0]]
//! ```
//!
//! Growing the system by one block adds two generator entries and moves the
//! recovery point from `(a + M h)/2` to `(a + (M + 1) h)/2`, i.e. by `h/2`.
//! That is the inner-bordering march: the window grows while its left end
//! stays fixed, and each new point costs `O(M)`.
//!
//! The right equations are handled by reflection: the right kernel read at
//! `-z` is a left kernel of the potential `-conj(q(-t))`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::spectral::{KernelTable, SignMode};
use crate::{Error, Result, C64};

type Block = Matrix2<C64>;
type Pair = Vector2<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Left equations, recovery point moving toward `+inf`.
    RightwardLeftGlme,
    /// Right equations, recovery point moving toward `-inf`.
    LeftwardRightGlme,
}

impl Direction {
    /// `+1` for rightward, `-1` for leftward.
    pub fn sign(self) -> f64 {
        match self {
            Direction::RightwardLeftGlme => 1.0,
            Direction::LeftwardRightGlme => -1.0,
        }
    }
}

/// What to do with kernel entries flagged as divergent during a march.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergencePolicy {
    /// Stop at the first flagged entry or failed pivot test.
    #[default]
    Stop,
    /// Feed flagged entries to the recursion and skip the pivot tolerance;
    /// only an exactly singular or non-finite pivot stops the march.
    Ignore,
}

/// The window system at one recovery point.
#[derive(Clone, Debug, PartialEq)]
pub struct GlmeSystem {
    pub t: f64,
    pub p: f64,
    pub m: usize,
    pub h: f64,
    pub sign: SignMode,
    /// `T_k = Omega(2t - P + k h)` for `k = -(M-1)..=(M-1)`, stored at `k + M - 1`.
    pub generators: Vec<C64>,
    /// `F_m = Omega(2t - P + m h)` for `m = 1..=M`.
    pub rhs: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlmeSolution {
    pub x1: Vec<C64>,
    pub y2: Vec<C64>,
    pub q_at_t: C64,
}

impl GlmeSystem {
    pub fn kappa(&self) -> f64 {
        self.sign.kappa()
    }

    /// Left end of the kernel arguments, `2t - P`.
    pub fn base(&self) -> f64 {
        2.0 * self.t - self.p
    }

    /// `T_k`, `|k| < M`.
    pub fn generator(&self, k: isize) -> C64 {
        self.generators[(k + self.m as isize - 1) as usize]
    }

    /// `g_k = Omega(2t - P + k h)` for `k = -(M-1)..=M`.
    pub fn g(&self, k: isize) -> C64 {
        if k < self.m as isize {
            self.generator(k)
        } else {
            self.rhs[k as usize - 1]
        }
    }

    /// The interleaved `2M x 2M` matrix and right-hand side.
    pub fn dense(&self) -> (DMatrix<C64>, DVector<C64>) {
        let m = self.m;
        let kh = self.kappa() * self.h;
        let mut a = DMatrix::<C64>::zeros(2 * m, 2 * m);
        for i in 0..m {
            a[(2 * i, 2 * i)] = C64::new(1.0, 0.0);
            a[(2 * i + 1, 2 * i + 1)] = C64::new(1.0, 0.0);
            for j in 0..m {
                let d = i as isize - j as isize;
                a[(2 * i, 2 * j + 1)] = -kh * self.generator(-d).conj();
                a[(2 * i + 1, 2 * j)] = self.h * self.generator(d);
            }
        }
        let mut b = DVector::<C64>::zeros(2 * m);
        for i in 0..m {
            b[2 * i + 1] = self.rhs[i];
        }
        (a, b)
    }

    /// Largest absolute residual of the two discrete equations.
    pub fn residual(&self, sol: &GlmeSolution) -> f64 {
        let m = self.m;
        let kh = self.kappa() * self.h;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            let mut r1 = sol.x1[i];
            let mut r2 = sol.y2[i] - self.rhs[i];
            for j in 0..m {
                let d = i as isize - j as isize;
                r1 -= kh * self.generator(-d).conj() * sol.y2[j];
                r2 += self.h * self.generator(d) * sol.x1[j];
            }
            worst = worst.max(r1.norm()).max(r2.norm());
        }
        worst
    }
}

/// Column stride of `h` in the kernel table and the table index of `z`.
fn locate(kernel: &KernelTable, z: f64, h: f64) -> Result<(isize, usize)> {
    let ratio = h / kernel.dz;
    let stride = ratio.round();
    if stride < 1.0 || (ratio - stride).abs() > 1e-9 * ratio {
        return Err(Error::KernelAlignment { z });
    }
    let x = (z - kernel.z0) / kernel.dz;
    let k = x.round();
    if (x - k).abs() > 1e-6 {
        return Err(Error::KernelAlignment { z });
    }
    Ok((k as isize, stride as usize))
}

fn fetch(kernel: &KernelTable, index: isize, z: f64) -> Result<(C64, bool)> {
    if index < 0 || index as usize >= kernel.len() {
        return Err(Error::KernelRange {
            z,
            lo: kernel.z0,
            hi: kernel.z_max(),
        });
    }
    let i = index as usize;
    Ok((kernel.values[i], kernel.divergent[i]))
}

/// Builds the system at `t` with window `P = M h` by exact table lookup.
pub fn assemble(kernel: &KernelTable, t: f64, p: f64, m: usize, sign: SignMode) -> Result<GlmeSystem> {
    if m == 0 {
        return Err(Error::Empty("GLME system"));
    }
    let h = p / m as f64;
    let a = 2.0 * t - p;
    let (ia, stride) = locate(kernel, a, h)?;
    let mut lookup = |k: isize| -> Result<C64> {
        let z = a + k as f64 * h;
        let (v, flagged) = fetch(kernel, ia + k * stride as isize, z)?;
        if flagged {
            return Err(Error::CutRequired { z });
        }
        Ok(v)
    };
    let mi = m as isize;
    let generators = (-(mi - 1)..mi).map(&mut lookup).collect::<Result<Vec<_>>>()?;
    let rhs = (1..=mi).map(&mut lookup).collect::<Result<Vec<_>>>()?;
    Ok(GlmeSystem {
        t,
        p,
        m,
        h,
        sign,
        generators,
        rhs,
    })
}

/// Same point, window enlarged by `extra` steps: `M' = M + extra`, `P' = P + extra h`.
pub fn extend_start(system: &GlmeSystem, kernel: &KernelTable, extra: usize) -> Result<GlmeSystem> {
    if extra == 0 {
        return Ok(system.clone());
    }
    assemble(
        kernel,
        system.t,
        system.p + extra as f64 * system.h,
        system.m + extra,
        system.sign,
    )
}

/// Solves the system with the block Levinson recursion.
pub fn solve(system: &GlmeSystem) -> Result<GlmeSolution> {
    let g = |k: isize| system.g(k);
    let mut lev = Levinson::new(system.kappa(), system.h, &g, DivergencePolicy::Stop)?;
    while lev.size() < system.m {
        lev.grow(&g)?;
    }
    Ok(lev.solution())
}

// Smallest singular value of a 2x2 complex matrix.
fn sigma_min(b: &Block) -> f64 {
    let f2 = b.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let det = (b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)]).norm();
    let smax = ((f2 + (f2 * f2 - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt();
    if smax == 0.0 {
        0.0
    } else {
        det / smax
    }
}

/// Block Levinson state for a growing system. `e`/`w` are the forward and
/// backward block vectors with pivots `v`/`u`; `z` solves the current system.
#[derive(Clone, Debug)]
struct Levinson {
    kappa: f64,
    h: f64,
    policy: DivergencePolicy,
    gmax: f64,
    e: Vec<Block>,
    w: Vec<Block>,
    z: Vec<Pair>,
    v: Block,
    u: Block,
}

impl Levinson {
    fn new(kappa: f64, h: f64, g: &impl Fn(isize) -> C64, policy: DivergencePolicy) -> Result<Self> {
        let mut lev = Levinson {
            kappa,
            h,
            policy,
            gmax: g(0).norm().max(g(1).norm()),
            e: vec![Block::identity()],
            w: vec![Block::identity()],
            z: Vec::new(),
            v: Block::zeros(),
            u: Block::zeros(),
        };
        let b0 = lev.block(0, g);
        let inv = lev.invert(&b0, 0)?;
        lev.v = b0;
        lev.u = b0;
        lev.z.push(inv * Pair::new(C64::new(0.0, 0.0), g(1)));
        Ok(lev)
    }

    fn size(&self) -> usize {
        self.z.len()
    }

    #[inline]
    fn block(&self, d: isize, g: &impl Fn(isize) -> C64) -> Block {
        let one = if d == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        Block::new(one, -self.kappa * self.h * g(-d).conj(), self.h * g(d), one)
    }

    fn invert(&self, b: &Block, step: usize) -> Result<Block> {
        let smin = sigma_min(b);
        let tolerance = 1e3 * f64::EPSILON * (self.h * self.gmax).max(1.0);
        let fail = match self.policy {
            DivergencePolicy::Stop => !(smin >= tolerance),
            DivergencePolicy::Ignore => !(smin > 0.0) || !smin.is_finite(),
        };
        if fail {
            return Err(Error::Instability {
                step,
                sigma_min: smin,
                tolerance,
            });
        }
        b.try_inverse().ok_or(Error::Instability {
            step,
            sigma_min: smin,
            tolerance,
        })
    }

    /// Adds one block; needs `g` on `-n..=n+1` for the current size `n`.
    fn grow(&mut self, g: &impl Fn(isize) -> C64) -> Result<()> {
        let n = self.size();
        let ni = n as isize;
        self.gmax = self.gmax.max(g(-ni).norm()).max(g(ni + 1).norm());

        let mut delta = Block::zeros();
        let mut nabla = Block::zeros();
        let mut eps = Pair::zeros();
        for j in 0..n {
            let fwd = self.block(ni - j as isize, g);
            delta += fwd * self.e[j];
            eps += fwd * self.z[j];
            nabla += self.block(-1 - j as isize, g) * self.w[j];
        }
        let alpha = -self.invert(&self.u, n)? * delta;
        let beta = -self.invert(&self.v, n)? * nabla;
        let u_next = self.u + delta * beta;
        let uinv = self.invert(&u_next, n)?;

        self.e.push(Block::zeros());
        self.w.push(Block::zeros());
        for j in (0..=n).rev() {
            let ej = self.e[j];
            let wprev = if j > 0 { self.w[j - 1] } else { Block::zeros() };
            self.e[j] = ej + wprev * alpha;
            self.w[j] = wprev + ej * beta;
        }
        self.v += nabla * alpha;
        self.u = u_next;

        let coeff = uinv * (Pair::new(C64::new(0.0, 0.0), g(ni + 1)) - eps);
        self.z.push(Pair::zeros());
        for j in 0..=n {
            self.z[j] += self.w[j] * coeff;
        }
        // a non-finite solution is an instability whatever the policy
        let last = self.z[n];
        if !(last[0].re.is_finite() && last[0].im.is_finite() && last[1].re.is_finite() && last[1].im.is_finite()) {
            return Err(Error::Instability {
                step: n,
                sigma_min: f64::NAN,
                tolerance: 0.0,
            });
        }
        Ok(())
    }

    fn q(&self) -> C64 {
        2.0 * self.kappa * self.z[self.size() - 1][1]
    }

    fn solution(&self) -> GlmeSolution {
        GlmeSolution {
            x1: self.z.iter().map(|p| p[0]).collect(),
            y2: self.z.iter().map(|p| p[1]).collect(),
            q_at_t: self.q(),
        }
    }
}

/// Why a march ended before the requested number of steps.
#[derive(Clone, Debug, PartialEq)]
pub enum StopReason {
    /// A flagged kernel entry was needed; the soliton responsible must be cut.
    Divergent { z: f64 },
    /// A pivot failed the tolerance test.
    Instability {
        step: usize,
        sigma_min: f64,
        tolerance: f64,
    },
    /// The next point lies past the boundary set with [`MarchState::set_boundary`].
    Boundary { t: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarchOutput {
    /// `(t, q(t))` in marching order, starting with the current point.
    pub samples: Vec<(f64, C64)>,
    pub stop: Option<StopReason>,
}

/// Levinson state of a march plus its position in the kernel table.
///
/// The state works in its own coordinates: for the right equations the
/// argument `w` reads the table at `-w` and time is reversed.
#[derive(Clone, Debug)]
pub struct MarchState {
    pub direction: Direction,
    pub step_count: usize,
    h: f64,
    /// Own-coordinate left end of the kernel arguments.
    base: f64,
    /// Table index of the own-coordinate argument `base`.
    index: isize,
    stride: isize,
    policy: DivergencePolicy,
    boundary: Option<f64>,
    lev: Levinson,
}

impl MarchState {
    /// Solves the window system with `m` blocks whose recovery point is `t`
    /// (physical time) and returns the state positioned there. `kernel` is
    /// the left kernel for a rightward march and the right kernel for a
    /// leftward one. The `m - 1` points before `t` are solved on the way and
    /// discarded.
    pub fn start(
        kernel: &KernelTable,
        direction: Direction,
        t: f64,
        m: usize,
        h: f64,
        sign: SignMode,
        policy: DivergencePolicy,
    ) -> Result<MarchState> {
        if m == 0 {
            return Err(Error::Empty("GLME system"));
        }
        let own_t = direction.sign() * t;
        let base = 2.0 * own_t - m as f64 * h;
        let table_z = direction.sign() * base;
        let (index, stride) = locate(kernel, table_z, h)?;
        let mut state = MarchState {
            direction,
            step_count: 0,
            h,
            base,
            index,
            stride: stride as isize * direction.sign() as isize,
            policy,
            boundary: None,
            lev: Levinson {
                kappa: sign.kappa(),
                h,
                policy,
                gmax: 0.0,
                e: Vec::new(),
                w: Vec::new(),
                z: Vec::new(),
                v: Block::zeros(),
                u: Block::zeros(),
            },
        };
        let window = state.window(kernel, -(m as isize - 1), m as isize)?;
        let off = m as isize - 1;
        let g = |k: isize| window[(k + off) as usize];
        state.lev = Levinson::new(sign.kappa(), h, &g, policy)?;
        while state.lev.size() < m {
            state.lev.grow(&g)?;
        }
        Ok(state)
    }

    /// Stops the march before any point beyond `t` in the marching direction.
    pub fn set_boundary(&mut self, t: Option<f64>) {
        self.boundary = t;
    }

    pub fn blocks(&self) -> usize {
        self.lev.size()
    }

    /// Current physical recovery time.
    pub fn t(&self) -> f64 {
        let own = 0.5 * (self.base + self.lev.size() as f64 * self.h);
        self.direction.sign() * own
    }

    /// Current physical `q`.
    pub fn q(&self) -> C64 {
        let own = self.lev.q();
        match self.direction {
            Direction::RightwardLeftGlme => own,
            Direction::LeftwardRightGlme => -own.conj(),
        }
    }

    /// The full solution of the current (own-coordinate) window system.
    pub fn solution(&self) -> GlmeSolution {
        self.lev.solution()
    }

    // Own-coordinate kernel samples g_k for k in lo..=hi; errors on flags
    // unless the policy ignores them.
    fn window(&self, kernel: &KernelTable, lo: isize, hi: isize) -> Result<Vec<C64>> {
        (lo..=hi)
            .map(|k| {
                let (v, flagged) = self.sample(kernel, k)?;
                if flagged && self.policy == DivergencePolicy::Stop {
                    return Err(Error::CutRequired { z: self.arg(k) });
                }
                Ok(v)
            })
            .collect()
    }

    fn arg(&self, k: isize) -> f64 {
        self.direction.sign() * (self.base + k as f64 * self.h)
    }

    fn sample(&self, kernel: &KernelTable, k: isize) -> Result<(C64, bool)> {
        fetch(kernel, self.index + k * self.stride, self.arg(k))
    }
}

/// Advances `state` by `steps` half-steps `h/2`. The output starts with the
/// current point; on a stop it holds the points reached so far.
pub fn march(state: &mut MarchState, kernel: &KernelTable, steps: usize) -> Result<MarchOutput> {
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((state.t(), state.q()));
    let mut stop = None;

    // kernel samples g_k for k in -(n-1)..=n, n = current size; grows at both ends
    let n0 = state.lev.size() as isize;
    let mut lo = -(n0 - 1);
    let mut window = (lo..=n0)
        .map(|k| state.sample(kernel, k).map(|s| s.0))
        .collect::<Result<VecDeque<_>>>()?;

    for _ in 0..steps {
        let n = state.lev.size() as isize;
        let t_next = state.direction.sign() * 0.5 * (state.base + (n + 1) as f64 * state.h);
        if let Some(b) = state.boundary {
            if state.direction.sign() * (t_next - b) > 1e-9 * state.h {
                stop = Some(StopReason::Boundary { t: t_next });
                break;
            }
        }
        let (left, left_flag) = state.sample(kernel, -n)?;
        let (right, right_flag) = state.sample(kernel, n + 1)?;
        if state.policy == DivergencePolicy::Stop && (left_flag || right_flag) {
            let k = if left_flag { -n } else { n + 1 };
            stop = Some(StopReason::Divergent { z: state.arg(k) });
            break;
        }
        window.push_front(left);
        lo -= 1;
        window.push_back(right);
        let g = |k: isize| window[(k - lo) as usize];
        if let Err(err) = state.lev.grow(&g) {
            match err {
                Error::Instability {
                    step,
                    sigma_min,
                    tolerance,
                } => {
                    stop = Some(StopReason::Instability {
                        step,
                        sigma_min,
                        tolerance,
                    });
                    break;
                }
                other => return Err(other),
            }
        }
        state.step_count += 1;
        samples.push((state.t(), state.q()));
    }
    Ok(MarchOutput { samples, stop })
}
