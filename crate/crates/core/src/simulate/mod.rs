//! Discretely observed cadlag paths of catalog processes.
//!
//! Jump times are never rounded to the observation grid: every jump is kept
//! as a [`JumpEvent`] with its exact time and left/right values, and the
//! grid values reflect all jumps up to each observation.

mod csv;
mod diagnostics;
mod engine;

pub use self::csv::{read_bundle_csv, write_jumps_csv, write_paths_csv};
pub use diagnostics::{martingale_drift_check, simultaneous_jump_scan, DriftCheck};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ProcessSpec, TimeGrid};
use crate::rng::{Purpose, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub left: f64,
    pub right: f64,
}

/// Discretization controls shared by bundle generation and restarts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    /// Euler step for non-constant coefficients; defaults to `T / 2000`.
    pub max_dt: Option<f64>,
    /// Clock step for the Brownian motion inside the counterexample.
    pub counterexample_du: f64,
    /// Stream purpose; couplings give each copy its own.
    pub purpose: Purpose,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { max_dt: None, counterexample_du: 1e-3, purpose: Purpose::Path }
    }
}

impl SimConfig {
    pub fn with_purpose(mut self, purpose: Purpose) -> Self {
        self.purpose = purpose;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathBundle {
    spec: ProcessSpec,
    grid: TimeGrid,
    seed: u64,
    n_paths: usize,
    /// Row-major `n_paths x grid.len()`.
    values: Vec<f64>,
    jumps: Vec<Vec<JumpEvent>>,
}

/// Draw `n_paths` paths started at `spec.x0` at the first grid time.
///
/// Path `i` uses the stream `(seed, purpose, i)`, so bundles are identical
/// regardless of thread count, and a bundle with more paths extends one with
/// fewer.
pub fn generate_paths(spec: &ProcessSpec, grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<PathBundle> {
    generate_paths_with(spec, grid, n_paths, seed, &SimConfig::default())
}

pub fn generate_paths_with(
    spec: &ProcessSpec,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<PathBundle> {
    generate_from(spec, grid, &vec![spec.x0; n_paths], seed, cfg)
}

/// Like [`generate_paths_with`] but path `i` starts at `starts[i]`.
pub(crate) fn generate_from(
    spec: &ProcessSpec,
    grid: &TimeGrid,
    starts: &[f64],
    seed: u64,
    cfg: &SimConfig,
) -> Result<PathBundle> {
    let n_paths = starts.len();
    if n_paths == 0 {
        return Err(invalid("need at least one path"));
    }
    let times = grid.times();
    let rows: Vec<(Vec<f64>, Vec<JumpEvent>)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut rng = Stream::new(seed, cfg.purpose, i as u64);
            engine::simulate_path(spec, times, x, cfg, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(n_paths * times.len());
    let mut jumps = Vec::with_capacity(n_paths);
    for (v, j) in rows {
        values.extend_from_slice(&v);
        jumps.push(j);
    }
    Ok(PathBundle { spec: spec.clone(), grid: grid.clone(), seed, n_paths, values, jumps })
}

/// Terminal values of `n` restarts of `spec` from `(t, x)` observed at `horizon`.
pub(crate) fn restart_terminals(
    spec: &ProcessSpec,
    t: f64,
    x: f64,
    horizon: f64,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    let times = [t, horizon];
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = Stream::new(seed, cfg.purpose, i as u64);
            engine::simulate_path(spec, &times, x, cfg, &mut rng).map(|(v, _)| v[1])
        })
        .collect()
}

impl PathBundle {
    pub(crate) fn from_parts(
        spec: ProcessSpec,
        grid: TimeGrid,
        seed: u64,
        values: Vec<f64>,
        jumps: Vec<Vec<JumpEvent>>,
    ) -> Result<Self> {
        let n_paths = jumps.len();
        if n_paths == 0 || values.len() != n_paths * grid.len() {
            return Err(invalid("bundle values do not match grid and path count"));
        }
        Ok(Self { spec, grid, seed, n_paths, values, jumps })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let m = self.grid.len();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.grid.len() + k]
    }

    /// All path values at grid index `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.value(i, k)).collect()
    }

    pub fn terminal(&self) -> Vec<f64> {
        self.column(self.grid.len() - 1)
    }

    pub fn jumps(&self, i: usize) -> &[JumpEvent] {
        &self.jumps[i]
    }

    pub fn total_jumps(&self) -> usize {
        self.jumps.iter().map(Vec::len).sum()
    }

    /// Apply `f` to every value and jump endpoint.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        for j in out.jumps.iter_mut().flatten() {
            j.left = f(j.left);
            j.right = f(j.right);
        }
        out
    }

    pub fn path_view(&self, i: usize) -> PathView<'_> {
        PathView { times: self.grid.times(), values: self.path(i), jumps: &self.jumps[i] }
    }
}

/// Continuous-time reading of one sampled path: between observations the
/// continuous part is interpolated linearly and recorded jumps are applied
/// at their exact times. For pure-jump paths this is exact.
#[derive(Clone, Copy, Debug)]
pub struct PathView<'a> {
    pub times: &'a [f64],
    pub values: &'a [f64],
    pub jumps: &'a [JumpEvent],
}

impl PathView<'_> {
    /// Value at `t`; `left_limit` selects `X_{t-}` over `X_t`.
    pub fn eval(&self, t: f64, left_limit: bool) -> f64 {
        let n = self.times.len();
        let k = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(k) if !left_limit || k == 0 => return self.values[k],
            Ok(k) => k - 1,
            Err(0) => return self.values[0],
            Err(k) if k >= n => return self.values[n - 1],
            Err(k) => k - 1,
        };
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let in_bracket = self.jumps_between(t0, t1);
        let total: f64 = in_bracket.iter().map(|j| j.right - j.left).sum();
        let applied: f64 = in_bracket
            .iter()
            .filter(|j| if left_limit { j.time < t } else { j.time <= t })
            .map(|j| j.right - j.left)
            .sum();
        let continuous = self.values[k + 1] - self.values[k] - total;
        self.values[k] + applied + continuous * (t - t0) / (t1 - t0)
    }

    /// Jumps with `t0 < time <= t1`.
    pub fn jumps_between(&self, t0: f64, t1: f64) -> &[JumpEvent] {
        let a = self.jumps.partition_point(|j| j.time <= t0);
        let b = self.jumps.partition_point(|j| j.time <= t1);
        &self.jumps[a..b]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProcessKind;

    #[test]
    fn zero_vol_paths_are_constant() {
        let spec = ProcessSpec::constant_vol(0.0).unwrap().with_x0(0.7);
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let b = generate_paths(&spec, &grid, 3, 1).unwrap();
        for i in 0..3 {
            assert!(b.path(i).iter().all(|&v| v == 0.7));
        }
    }

    #[test]
    fn regeneration_is_bit_exact() {
        for spec in crate::model::catalog() {
            let grid = TimeGrid::uniform(1.5, 15).unwrap();
            let a = generate_paths(&spec, &grid, 50, 99).unwrap();
            let b = generate_paths(&spec, &grid, 50, 99).unwrap();
            assert_eq!(a, b, "{}", spec.name);
            let c = generate_paths(&spec, &grid, 50, 100).unwrap();
            assert_ne!(a.values, c.values, "{}", spec.name);
        }
    }

    #[test]
    fn more_paths_extend_fewer() {
        let spec = ProcessSpec::bounded_vol();
        let grid = TimeGrid::uniform(1.0, 5).unwrap();
        let small = generate_paths(&spec, &grid, 10, 3).unwrap();
        let big = generate_paths(&spec, &grid, 20, 3).unwrap();
        for i in 0..10 {
            assert_eq!(small.path(i), big.path(i));
        }
    }

    #[test]
    fn poisson_paths_sit_on_the_drifting_lattice() {
        let spec = ProcessSpec::compensated_poisson(1.0).unwrap();
        let grid = TimeGrid::uniform(3.0, 60).unwrap();
        let b = generate_paths(&spec, &grid, 200, 5).unwrap();
        for i in 0..b.n_paths() {
            for (k, &t) in grid.times().iter().enumerate() {
                let n = b.value(i, k) - spec.x0 + t;
                assert!((n - n.round()).abs() < 1e-9 && n.round() >= 0.0);
                let jumps_so_far = b.jumps(i).iter().filter(|j| j.time <= t).count();
                assert_eq!(n.round() as usize, jumps_so_far);
            }
            for j in b.jumps(i) {
                assert!(j.time > 0.0 && j.time <= 3.0);
                assert!((j.right - j.left - 1.0).abs() < 1e-12);
                assert!(((j.left + j.time) - (j.left + j.time).round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn jump_events_are_inside_horizon_and_nontrivial() {
        let spec = ProcessSpec::jump_diffusion(1.0, 2.0, 1.0).unwrap();
        let grid = TimeGrid::uniform(1.0, 20).unwrap();
        let b = generate_paths(&spec, &grid, 100, 8).unwrap();
        assert!(b.total_jumps() > 100);
        for i in 0..100 {
            let js = b.jumps(i);
            assert!(js.windows(2).all(|w| w[0].time < w[1].time));
            for j in js {
                assert!(j.time > 0.0 && j.time <= 1.0 && j.left != j.right);
            }
        }
    }

    #[test]
    fn counterexample_stays_in_closed_unit_interval_before_one() {
        let spec = ProcessSpec::counterexample();
        assert_eq!(spec.kind, ProcessKind::Counterexample);
        let grid = TimeGrid::new(vec![0.0, 0.25, 0.5, 0.75, 0.9, 1.0, 1.5]).unwrap();
        let b = generate_paths(&spec, &grid, 500, 2).unwrap();
        for i in 0..500 {
            let p = b.path(i);
            assert_eq!(p[0], 0.0);
            assert!(p[..5].iter().all(|v| v.abs() <= 1.0));
            assert!(p[5] == 1.0 || p[5] == -1.0);
            // once absorbed the path stays put until t = 1
            for k in 1..5 {
                if p[k].abs() == 1.0 {
                    assert_eq!(p[k + 1], p[k]);
                }
            }
        }
        assert!(b.total_jumps() == 0);
    }

    #[test]
    fn path_view_matches_grid_and_jumps() {
        let spec = ProcessSpec::compensated_poisson(3.0).unwrap();
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let b = generate_paths(&spec, &grid, 20, 4).unwrap();
        for i in 0..20 {
            let v = b.path_view(i);
            for (k, &t) in grid.times().iter().enumerate() {
                assert_eq!(v.eval(t, false), b.value(i, k));
            }
            for j in b.jumps(i) {
                assert!((v.eval(j.time, true) - j.left).abs() < 1e-12);
                assert!((v.eval(j.time, false) - j.right).abs() < 1e-12);
            }
        }
    }
}
