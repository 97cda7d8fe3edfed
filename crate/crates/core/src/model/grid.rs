use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Strictly increasing observation times `t_0 < t_1 < ... < t_M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(invalid("time grid needs at least two points"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("time grid contains a non-finite time"));
        }
        if times[0] < 0.0 {
            return Err(invalid(format!("time grid starts before zero ({})", times[0])));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(invalid(format!("time grid not strictly increasing at {} -> {}", w[0], w[1])));
        }
        Ok(Self { times })
    }

    /// `steps + 1` equally spaced times on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        Self::uniform_between(0.0, horizon, steps)
    }

    pub fn uniform_between(start: f64, end: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(invalid("time grid needs at least one step"));
        }
        if !(end > start) {
            return Err(invalid(format!("empty time window [{start}, {end}]")));
        }
        let dt = (end - start) / steps as f64;
        let mut times: Vec<f64> = (0..=steps).map(|i| start + i as f64 * dt).collect();
        times[steps] = end;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn max_step(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index of the lattice time equal to `t` up to rounding.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.horizon().abs().max(1.0);
        let i = self.nearest_index(t);
        ((self.times[i] - t).abs() <= tol).then_some(i)
    }

    pub fn nearest_index(&self, t: f64) -> usize {
        match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.times.len() => self.times.len() - 1,
            Err(i) => {
                if t - self.times[i - 1] <= self.times[i] - t {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// The grid restricted to `[from, horizon]`, with `from` inserted if needed.
    pub fn tail_from(&self, from: f64) -> Result<Self> {
        let mut times = vec![from];
        times.extend(self.times.iter().copied().filter(|&t| t > from + 1e-12));
        Self::new(times)
    }
}

/// Uniform spatial lattice `lo + j*h`, `j = 0..=intervals`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    lo: f64,
    step: f64,
    intervals: usize,
}

impl SpaceGrid {
    pub fn new(lo: f64, hi: f64, intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(invalid("space grid needs at least two intervals"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid(format!("degenerate space interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, step: (hi - lo) / intervals as f64, intervals })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.point(self.intervals)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of points (`intervals + 1`).
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        let j = ((x - self.lo) / self.step).round();
        if j < 0.0 || j > self.intervals as f64 {
            return None;
        }
        let j = j as usize;
        ((self.point(j) - x).abs() <= 1e-9 * self.step).then_some(j)
    }

    /// Same lattice with half the spacing.
    pub fn refined(&self) -> Self {
        Self { lo: self.lo, step: self.step / 2.0, intervals: self.intervals * 2 }
    }
}
