use serde::{Deserialize, Serialize};

/// Uniform grid `t_j = start + j * step`, `j = 0..len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Self {
        assert!(step > 0.0, "grid step must be positive");
        Self { start, step, len }
    }

    /// Grid of `intervals + 1` points covering `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64, intervals: usize) -> Self {
        assert!(hi > lo && intervals > 0);
        Self::new(lo, (hi - lo) / intervals as f64, intervals + 1)
    }

    /// Grid of `intervals + 1` points symmetric about zero with total length `length`.
    pub fn centered(length: f64, intervals: usize) -> Self {
        Self::covering(-0.5 * length, 0.5 * length, intervals)
    }

    #[inline]
    pub fn t(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.t(self.len.saturating_sub(1))
    }

    pub fn intervals(&self) -> usize {
        self.len.saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|j| self.t(j))
    }

    /// Index of the grid point nearest to `t`, clamped to the grid.
    pub fn nearest(&self, t: f64) -> usize {
        if self.len == 0 {
            return 0;
        }
        let j = ((t - self.start) / self.step).round();
        j.clamp(0.0, (self.len - 1) as f64) as usize
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.len == other.len
            && (self.start - other.start).abs() <= 1e-12 * (1.0 + self.start.abs())
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// Complex samples on a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub grid: TimeGrid,
    pub q: Vec<crate::C64>,
}

impl Signal {
    pub fn new(grid: TimeGrid, q: Vec<crate::C64>) -> Self {
        assert_eq!(grid.len, q.len(), "sample count must match the grid");
        Self { grid, q }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> crate::C64) -> Self {
        Self {
            grid,
            q: grid.times().map(f).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.q.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Index of the largest `|q|`.
    pub fn argmax(&self) -> Option<usize> {
        (0..self.q.len()).max_by(|&a, &b| self.q[a].norm().total_cmp(&self.q[b].norm()))
    }
}
