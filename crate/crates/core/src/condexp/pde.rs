//! Backward solve of `f_t + sigma^2(t, x) f_xx / 2 = 0`, `f(T, .) = g`.
//!
//! Theta-scheme in time with tridiagonal solves. The first interval(s) below
//! the terminal time are stepped fully implicitly on a finer substep so the
//! kink of a call payoff does not excite the undamped high-frequency modes of
//! the Crank-Nicolson step. By default that start-up is run with `m` and `2m`
//! substeps and extrapolated, which keeps the first rows below the terminal
//! time second order accurate as well.
//!
//! With `theta = 1/2` the explicit half stays positive while
//! `sigma^2 dt / h^2 <= 2`; beyond that shape checks can pick up small
//! oscillations.
//!
//! Boundaries: with slope bounds `(k, K)` the solver imposes `f_x = k` at
//! the lower edge and `f_x = K` at the upper edge through ghost nodes.
//! Without them the boundary rows carry zero curvature, which freezes the
//! edge values at the terminal data.

use super::tridiag::solve_in_place;
use super::{Extension, GridFunction};
use crate::error::{invalid, Error, Result};
use crate::model::{Payoff, ProcessKind, ProcessSpec, SpaceGrid, TimeGrid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeConfig {
    pub theta: f64,
    /// Leading intervals stepped fully implicitly.
    pub rannacher_steps: usize,
    /// Implicit substeps per start-up interval.
    pub startup_substeps: usize,
    /// Combine the start-up with `m` and `2m` substeps as `2 f_2m - f_m`.
    pub extrapolate: bool,
}


impl Default for PdeConfig {
    fn default() -> Self {
        Self { theta: 0.5, rannacher_steps: 1, startup_substeps: 8, extrapolate: true }
    }
}

/// Lattices for a solve on `[start, horizon]` with `nt` time steps and `nx`
/// space intervals over `x0 +- xpad * sigma_max * sqrt(horizon - start)`.
///
/// The counterexample process is only solvable from `t = 1`, where its
/// coefficient is identically one.
pub fn working_grids(spec: &ProcessSpec, horizon: f64, nt: usize, nx: usize, xpad: f64) -> Result<(TimeGrid, SpaceGrid)> {
    if !(xpad > 0.0) {
        return Err(invalid(format!("xpad must be positive, got {xpad}")));
    }
    let start = if spec.kind == ProcessKind::Counterexample { 1.0 } else { 0.0 };
    if !(horizon > start) {
        return Err(invalid(format!("horizon {horizon} must exceed {start}")));
    }
    let tgrid = TimeGrid::uniform_between(start, horizon, nt)?;
    let s = spec
        .sigma_max(start, horizon)
        .ok_or_else(|| Error::UnsupportedProcess(format!("{}: unbounded coefficient", spec.name)))?;
    let half = xpad * s * (horizon - start).sqrt();
    let (lo, hi) = if spec.kind == ProcessKind::Counterexample {
        (-1.0 - half, 1.0 + half)
    } else if half > 0.0 {
        (spec.x0 - half, spec.x0 + half)
    } else {
        (spec.x0 - 1.0, spec.x0 + 1.0)
    };
    Ok((tgrid, SpaceGrid::new(lo, hi, nx)?))
}

pub fn solve_pde(spec: &ProcessSpec, payoff: &Payoff, tgrid: &TimeGrid, xgrid: &SpaceGrid) -> Result<GridFunction> {
    solve_pde_with(spec, payoff, tgrid, xgrid, &PdeConfig::default())
}

pub fn solve_pde_with(
    spec: &ProcessSpec,
    payoff: &Payoff,
    tgrid: &TimeGrid,
    xgrid: &SpaceGrid,
    cfg: &PdeConfig,
) -> Result<GridFunction> {
    let terminal: Vec<f64> = xgrid.points().iter().map(|&x| payoff.eval(x)).collect();
    solve_pde_from(spec, &terminal, tgrid, xgrid, payoff.lipschitz, cfg)
}

/// Solve backward from arbitrary terminal values on `xgrid`.
pub fn solve_pde_from(
    spec: &ProcessSpec,
    terminal: &[f64],
    tgrid: &TimeGrid,
    xgrid: &SpaceGrid,
    slopes: Option<(f64, f64)>,
    cfg: &PdeConfig,
) -> Result<GridFunction> {
    match spec.kind {
        ProcessKind::Diffusion => {}
        ProcessKind::Counterexample if tgrid.start() >= 1.0 => {}
        ProcessKind::Counterexample => {
            return Err(Error::UnsupportedProcess(
                "counterexample coefficient blows up before t = 1; use the closed form".into(),
            ))
        }
        _ => return Err(Error::UnsupportedProcess(format!("{}: PDE needs a pure diffusion", spec.name))),
    }
    if !(0.0..=1.0).contains(&cfg.theta) {
        return Err(invalid(format!("theta must lie in [0, 1], got {}", cfg.theta)));
    }
    let n = xgrid.len();
    if terminal.len() != n {
        return Err(invalid("terminal data does not match the space grid"));
    }

    let extension = match slopes {
        Some((k, big_k)) => Extension { lo_slope: k, hi_slope: big_k },
        None => {
            let h = xgrid.step();
            Extension { lo_slope: (terminal[1] - terminal[0]) / h, hi_slope: (terminal[n - 1] - terminal[n - 2]) / h }
        }
    };

    let mut stepper = Stepper::new(spec, xgrid, slopes);
    let times = tgrid.times();
    let m = times.len();
    let mut values = vec![0.0; m * n];
    values[(m - 1) * n..].copy_from_slice(terminal);
    let mut f = terminal.to_vec();
    for (steps_done, i) in (0..m - 1).rev().enumerate() {
        let (t0, t1) = (times[i], times[i + 1]);
        if steps_done < cfg.rannacher_steps {
            let m = cfg.startup_substeps.max(1);
            if cfg.extrapolate {
                let mut coarse = f.clone();
                stepper.implicit_substeps(&mut coarse, t0, t1, m)?;
                stepper.implicit_substeps(&mut f, t0, t1, 2 * m)?;
                for (v, c) in f.iter_mut().zip(&coarse) {
                    *v = 2.0 * *v - c;
                }
            } else {
                stepper.implicit_substeps(&mut f, t0, t1, m)?;
            }
        } else {
            stepper.step(&mut f, t0, t1, cfg.theta)?;
        }
        values[i * n..(i + 1) * n].copy_from_slice(&f);
    }
    GridFunction::new(tgrid.clone(), xgrid.clone(), values, extension)
}

struct Stepper<'a> {
    spec: &'a ProcessSpec,
    xs: Vec<f64>,
    inv_h2: f64,
    h: f64,
    slopes: Option<(f64, f64)>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
    coef: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a ProcessSpec, xgrid: &SpaceGrid, slopes: Option<(f64, f64)>) -> Self {
        let n = xgrid.len();
        let h = xgrid.step();
        Self {
            spec,
            xs: xgrid.points(),
            inv_h2: 1.0 / (h * h),
            h,
            slopes,
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
            coef: vec![0.0; n],
        }
    }

    /// `coef[j] = sigma^2(t, x_j) / (2 h^2)`
    fn load_coef(&mut self, t: f64) -> Result<()> {
        for (c, &x) in self.coef.iter_mut().zip(&self.xs) {
            let s = self.spec.eval_sigma(t, x)?;
            *c = 0.5 * s * s * self.inv_h2;
        }
        Ok(())
    }

    /// `(A f + b)_j` with the current coefficients.
    fn apply(&self, f: &[f64], j: usize) -> f64 {
        let n = f.len();
        let c = self.coef[j];
        match (j, self.slopes) {
            (0, Some((k, _))) => c * (2.0 * f[1] - 2.0 * f[0] - 2.0 * self.h * k),
            (_, Some((_, big_k))) if j == n - 1 => c * (2.0 * f[n - 2] - 2.0 * f[n - 1] + 2.0 * self.h * big_k),
            (0, None) => 0.0,
            (_, None) if j == n - 1 => 0.0,
            _ => c * (f[j - 1] - 2.0 * f[j] + f[j + 1]),
        }
    }

    /// `m` equal fully implicit steps from `t1` down to `t0`.
    fn implicit_substeps(&mut self, f: &mut [f64], t0: f64, t1: f64, m: usize) -> Result<()> {
        for s in (0..m).rev() {
            let a = t0 + (t1 - t0) * s as f64 / m as f64;
            let b = t0 + (t1 - t0) * (s + 1) as f64 / m as f64;
            self.step(f, a, b, 1.0)?;
        }
        Ok(())
    }

    /// One backward step from `t1` to `t0`, overwriting `f`.
    fn step(&mut self, f: &mut [f64], t0: f64, t1: f64, theta: f64) -> Result<()> {
        let n = f.len();
        let dt = t1 - t0;
        if theta < 1.0 {
            self.load_coef(t1)?;
            let w = (1.0 - theta) * dt;
            for j in 0..n {
                self.rhs[j] = f[j] + w * self.apply(f, j);
            }
        } else {
            self.rhs.copy_from_slice(f);
        }
        if theta == 0.0 {
            f.copy_from_slice(&self.rhs);
            return Ok(());
        }

        self.load_coef(t0)?;
        let w = theta * dt;
        for j in 0..n {
            let c = w * self.coef[j];
            let (lo, mid, up, src) = match (j, self.slopes) {
                (0, Some((k, _))) => (0.0, 2.0 * c, -2.0 * c, -2.0 * c * self.h * k),
                (_, Some((_, big_k))) if j == n - 1 => (-2.0 * c, 2.0 * c, 0.0, 2.0 * c * self.h * big_k),
                (0, None) => (0.0, 0.0, 0.0, 0.0),
                (_, None) if j == n - 1 => (0.0, 0.0, 0.0, 0.0),
                _ => (-c, 2.0 * c, -c, 0.0),
            };
            self.lower[j] = lo;
            self.diag[j] = 1.0 + mid;
            self.upper[j] = up;
            self.rhs[j] += src;
        }
        solve_in_place(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch);
        f.copy_from_slice(&self.rhs);
        Ok(())
    }
}
