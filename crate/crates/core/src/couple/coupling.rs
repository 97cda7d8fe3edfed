//! Couplings behind the monotonicity and convexity arguments.
//!
//! Copies are simulated as separate bundles on disjoint stream purposes, so
//! copy `i` of one experiment is reproducible on its own. Touches are
//! detected on the observation grid (plus jump times) and accepted when the
//! overshoot is within four one-step standard deviations of the preceding
//! step, `4 sigma_max sqrt(dt)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{event_times, TOUCH_EPS};
use crate::condexp::GridFunction;
use crate::error::{invalid, Result};
use crate::model::{Payoff, ProcessSpec, TimeGrid};
use crate::rng::Purpose;
use crate::simulate::{generate_paths_with, PathBundle, SimConfig};
use crate::stats::MeanSe;

/// Observation steps used by the two-copy coupling.
const MONOTONE_STEPS: usize = 400;

/// Share of touches that must fall within tolerance.
const TOUCH_SHARE: f64 = 0.99;

/// Overshoot allowed at a touch first seen at time `t` after the previous
/// observation `t_prev`.
fn touch_tol(spec: &ProcessSpec, t_prev: f64, t: f64) -> f64 {
    let diffusive = match spec.sigma_max(t_prev, t) {
        Some(s) => 4.0 * s * (t - t_prev).max(0.0).sqrt(),
        None => f64::INFINITY,
    };
    diffusive.max(TOUCH_EPS)
}

fn copy(spec: &ProcessSpec, x: f64, grid: &TimeGrid, n: usize, seed: u64, purpose: Purpose) -> Result<PathBundle> {
    generate_paths_with(&spec.clone().with_x0(x), grid, n, seed, &SimConfig::default().with_purpose(purpose))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    /// First time with `X >= Y`; `None` if not before the horizon.
    pub tau: Option<f64>,
    /// `X_tau - Y_tau` at that time.
    pub overshoot: Option<f64>,
    pub x_end: f64,
    pub y_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneOutcome {
    pub pairs: usize,
    pub touched: usize,
    pub touches_within_tol: usize,
    /// `g(Y_T) - g(X_T)` over all pairs.
    pub mean_diff: MeanSe,
    /// `1{tau > T} (g(Y_T) - g(X_T))`, nonnegative pathwise for increasing `g`.
    pub stopped_diff: MeanSe,
    pub pass: bool,
    #[serde(skip)]
    pub records: Vec<PairRecord>,
}

/// Run `X` from `x` and `Y` from `y > x` at time `s` up to `horizon` and
/// check that the pairs meet when they swap order and that
/// `E[g(Y_T) - g(X_T)] >= -3 SE`.
#[allow(clippy::too_many_arguments)]
pub fn two_copy_monotone_coupling(
    spec: &ProcessSpec,
    payoff: &Payoff,
    x: f64,
    y: f64,
    s: f64,
    horizon: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<MonotoneOutcome> {
    if !(x < y) {
        return Err(invalid(format!("need x < y, got ({x}, {y})")));
    }
    if n_pairs < 2 {
        return Err(invalid("need at least two pairs"));
    }
    let grid = TimeGrid::uniform_between(s, horizon, MONOTONE_STEPS)?;
    let xs = copy(spec, x, &grid, n_pairs, seed, Purpose::CopyA)?;
    let ys = copy(spec, y, &grid, n_pairs, seed, Purpose::CopyB)?;
    let times = grid.times();

    let last = times.len() - 1;
    let rows: Vec<(PairRecord, bool)> = (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let (xv, yv) = (xs.path_view(i), ys.path_view(i));
            let mut prev = s;
            let mut hit = None;
            for (u, _) in event_times(&xv, &yv, s, horizon) {
                let gap = xv.eval(u, false) - yv.eval(u, false);
                if gap >= -TOUCH_EPS {
                    hit = Some((u, gap.max(0.0)));
                    break;
                }
                prev = u;
            }
            let within = hit.is_some_and(|(u, over)| over <= touch_tol(spec, prev, u));
            let record = PairRecord {
                tau: hit.map(|h| h.0),
                overshoot: hit.map(|h| h.1),
                x_end: xs.value(i, last),
                y_end: ys.value(i, last),
            };
            (record, within)
        })
        .collect();
    let touched = rows.iter().filter(|r| r.0.tau.is_some()).count();
    let within = rows.iter().filter(|r| r.1).count();
    let records: Vec<PairRecord> = rows.into_iter().map(|r| r.0).collect();
    let diffs: Vec<f64> = records.iter().map(|r| payoff.eval(r.y_end) - payoff.eval(r.x_end)).collect();
    let stopped: Vec<f64> = records.iter().zip(&diffs).map(|(r, d)| if r.tau.is_none() { *d } else { 0.0 }).collect();
    let mean_diff = MeanSe::of(&diffs);
    let touch_ok = touched == 0 || within as f64 >= TOUCH_SHARE * touched as f64;
    Ok(MonotoneOutcome {
        pairs: n_pairs,
        touched,
        touches_within_tol: within,
        mean_diff,
        stopped_diff: MeanSe::of(&stopped),
        pass: touch_ok && mean_diff.at_least(0.0, 3.0),
        records,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleRecord {
    /// First grid time with `X1 >= X2` or `X2 >= X3`.
    pub tau: Option<f64>,
    /// `M` at `T ^ tau`.
    pub m: f64,
    /// Bound `|M_tau|` had to meet, if the triple touched.
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityOutcome {
    pub triples: usize,
    pub touched: usize,
    pub touches_within_tol: usize,
    /// `M_{T ^ tau}` over all triples.
    pub m_stopped: MeanSe,
    pub pass: bool,
    #[serde(skip)]
    pub records: Vec<TripleRecord>,
}

/// `M = (X3 - X2) h(X1) + (X2 - X1) h(X3) + (X1 - X3) h(X2)`.
fn m_value(h: &GridFunction, i: usize, x: [f64; 3]) -> f64 {
    let [a, b, c] = x;
    (c - b) * h.eval(i, a) + (b - a) * h.eval(i, c) + (a - c) * h.eval(i, b)
}

/// Three copies started at `x1 < x2 < x3` at lattice time `s`, observed on
/// the lattice of `h` up to its horizon.
///
/// At a touch `X1 >= X2` with overshoot `d`, `|M| <= 2 L d (X3 - X1)` where
/// `L` bounds the slopes of `h`; the check uses that bound with `d` the
/// touch tolerance. The verdict also needs `E[M_{T ^ tau}] >= -3 SE`.
pub fn three_copy_convexity_coupling(
    spec: &ProcessSpec,
    h: &GridFunction,
    starts: (f64, f64, f64),
    s: f64,
    n_triples: usize,
    seed: u64,
) -> Result<ConvexityOutcome> {
    let (x1, x2, x3) = starts;
    if !(x1 < x2 && x2 < x3) {
        return Err(invalid(format!("need x1 < x2 < x3, got {starts:?}")));
    }
    if n_triples < 2 {
        return Err(invalid("need at least two triples"));
    }
    let i0 = h.tgrid().index_of(s).ok_or_else(|| invalid(format!("s = {s} is not a lattice time of h")))?;
    let grid = h.tgrid().tail_from(s)?;
    let a = copy(spec, x1, &grid, n_triples, seed, Purpose::CopyA)?;
    let b = copy(spec, x2, &grid, n_triples, seed, Purpose::CopyB)?;
    let c = copy(spec, x3, &grid, n_triples, seed, Purpose::CopyC)?;
    let times = grid.times();
    let ext = h.extension();
    let lip = ext.lo_slope.abs().max(ext.hi_slope.abs()).max(max_slope(h));

    let records: Vec<TripleRecord> = (0..n_triples)
        .into_par_iter()
        .map(|p| {
            for k in 1..times.len() {
                let x = [a.value(p, k), b.value(p, k), c.value(p, k)];
                if x[0] >= x[1] - TOUCH_EPS || x[1] >= x[2] - TOUCH_EPS {
                    let d = touch_tol(spec, times[k - 1], times[k]);
                    let spread = (x[2] - x[0]).abs();
                    return TripleRecord {
                        tau: Some(times[k]),
                        m: m_value(h, i0 + k, x),
                        bound: Some(2.0 * lip * d * spread + TOUCH_EPS),
                    };
                }
            }
            let k = times.len() - 1;
            TripleRecord { tau: None, m: m_value(h, i0 + k, [a.value(p, k), b.value(p, k), c.value(p, k)]), bound: None }
        })
        .collect();

    let touched = records.iter().filter(|r| r.tau.is_some()).count();
    let within = records.iter().filter(|r| r.bound.is_some_and(|bd| r.m.abs() <= bd)).count();
    let ms: Vec<f64> = records.iter().map(|r| r.m).collect();
    let m_stopped = MeanSe::of(&ms);
    let touch_ok = touched == 0 || within as f64 >= TOUCH_SHARE * touched as f64;
    Ok(ConvexityOutcome {
        triples: n_triples,
        touched,
        touches_within_tol: within,
        m_stopped,
        pass: touch_ok && m_stopped.at_least(0.0, 3.0),
        records,
    })
}

/// Largest absolute adjacent slope anywhere on the lattice.
fn max_slope(h: &GridFunction) -> f64 {
    let step = h.xgrid().step();
    (0..h.tgrid().len())
        .flat_map(|i| h.slice(i).windows(2).map(move |w| ((w[1] - w[0]) / step).abs()))
        .fold(0.0, f64::max)
}
