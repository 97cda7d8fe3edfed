//! Experiments on independent copies: crossings without touching, the
//! two-copy monotone coupling, the three-copy convexity coupling and the
//! epsilon-approach times of a pair.

mod coupling;

pub use coupling::{
    three_copy_convexity_coupling, two_copy_monotone_coupling, ConvexityOutcome, MonotoneOutcome, PairRecord,
    TripleRecord,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::simulate::{PathBundle, PathView};
use crate::stats::median;

/// Gaps at most this large count as a touch.
pub const TOUCH_EPS: f64 = 1e-9;

/// Observation grid times in `[s, t]` merged with the jump times of both
/// paths in `(s, t]`, sorted. The flag marks jump times.
fn event_times(a: &PathView, b: &PathView, s: f64, t: f64) -> Vec<(f64, bool)> {
    let mut out: Vec<(f64, bool)> = a.times.iter().filter(|&&u| u >= s && u <= t).map(|&u| (u, false)).collect();
    for j in a.jumps_between(s, t).iter().chain(b.jumps_between(s, t)) {
        out.push((j.time, true));
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
    out.dedup_by(|later, earlier| later.0 == earlier.0);
    out
}

/// A sign change of `Y - Z` strictly across a jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub pair: usize,
    pub time: f64,
    pub pre_gap: f64,
    pub post_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossScan {
    pub pairs: usize,
    /// Pairs with at least one crossing event.
    pub violations: usize,
    /// Pairs that touched: a gap within [`TOUCH_EPS`] or a sign change
    /// between observations with no jump in between.
    pub touch_pairs: usize,
    pub events: Vec<CrossingEvent>,
}

fn strictly_opposite(a: f64, b: f64) -> bool {
    (a > TOUCH_EPS && b < -TOUCH_EPS) || (a < -TOUCH_EPS && b > TOUCH_EPS)
}

fn scan_pair(pair: usize, y: &PathView, z: &PathView, s: f64, t: f64) -> (bool, Vec<CrossingEvent>) {
    let mut touched = false;
    let mut events = Vec::new();
    let mut prev: Option<f64> = None;
    for (u, is_jump) in event_times(y, z, s, t) {
        let before = y.eval(u, true) - z.eval(u, true);
        let after = y.eval(u, false) - z.eval(u, false);
        if before.abs() <= TOUCH_EPS || after.abs() <= TOUCH_EPS {
            touched = true;
        }
        if let Some(p) = prev {
            // continuous motion between observations: a sign change is a touch
            if strictly_opposite(p, before) {
                touched = true;
            }
        }
        if is_jump && strictly_opposite(before, after) {
            events.push(CrossingEvent { pair, time: u, pre_gap: before, post_gap: after });
        }
        prev = Some(after);
    }
    (touched, events)
}

/// Count pairs `(Y_i, Z_i)` whose gap changes sign strictly across a
/// recorded jump on `[s, t]`. Sign changes between observations without a
/// jump are attributed to an unobserved touch.
pub fn cross_without_touch_scan(ys: &PathBundle, zs: &PathBundle, s: f64, t: f64) -> Result<CrossScan> {
    if ys.grid() != zs.grid() || ys.n_paths() != zs.n_paths() {
        return Err(invalid("paired bundles need the same grid and path count"));
    }
    let grid = ys.grid();
    if !(s < t) || grid.index_of(s).is_none() || grid.index_of(t).is_none() {
        return Err(invalid(format!("need grid times s < t, got [{s}, {t}]")));
    }
    let per_pair: Vec<(bool, Vec<CrossingEvent>)> =
        (0..ys.n_paths()).into_par_iter().map(|i| scan_pair(i, &ys.path_view(i), &zs.path_view(i), s, t)).collect();
    let touch_pairs = per_pair.iter().filter(|p| p.0).count();
    let violations = per_pair.iter().filter(|p| !p.1.is_empty()).count();
    let events = per_pair.into_iter().flat_map(|p| p.1).collect();
    Ok(CrossScan { pairs: ys.n_paths(), violations, touch_pairs, events })
}

/// First passage times of a pair started with `Y_s < Z_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproachTimes {
    /// `(n, T_n)` with `T_n` the first observation or jump time with
    /// `Y + 1/n >= Z`; `None` if it never happens.
    pub t_n: Vec<(u32, Option<f64>)>,
    /// First time with `Y >= Z` (up to [`TOUCH_EPS`]).
    pub t_hit: Option<f64>,
    /// `T_n` is nondecreasing in `n`.
    pub nondecreasing: bool,
    /// Every `T_n <= T`.
    pub bounded: bool,
    /// When `T` is a jump time with `Y_T != Z_T`: whether all `T_n < T`.
    pub strictly_before: Option<bool>,
}

fn le_opt(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(a), Some(b)) => a <= b,
    }
}

/// `T_n` for every `n` in `n_list` (sorted ascending in the output) and the
/// hitting time `T` from time `s`.
pub fn epsilon_approach_times(y: &PathView, z: &PathView, s: f64, n_list: &[u32]) -> Result<ApproachTimes> {
    let end = *y.times.last().ok_or_else(|| invalid("empty path"))?;
    if y.eval(s, false) >= z.eval(s, false) {
        return Err(invalid(format!("need Y_s < Z_s at s = {s}")));
    }
    if n_list.contains(&0) {
        return Err(invalid("n must be positive"));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let events = event_times(y, z, s, end);
    let gaps: Vec<(f64, bool, f64)> = events.iter().map(|&(u, j)| (u, j, z.eval(u, false) - y.eval(u, false))).collect();
    let first = |eps: f64| gaps.iter().find(|g| g.2 <= eps).map(|g| g.0);
    let t_hit = first(TOUCH_EPS);
    let t_n: Vec<(u32, Option<f64>)> = ns.iter().map(|&n| (n, first(1.0 / n as f64))).collect();
    let nondecreasing = t_n.windows(2).all(|w| le_opt(w[0].1, w[1].1));
    let bounded = t_n.iter().all(|&(_, tn)| le_opt(tn, t_hit));
    let strictly_before = gaps
        .iter()
        .find(|g| Some(g.0) == t_hit)
        .filter(|g| g.1 && g.2.abs() > TOUCH_EPS)
        .map(|g| t_n.iter().all(|&(_, tn)| tn.is_some_and(|v| v < g.0)));
    Ok(ApproachTimes { t_n, t_hit, nondecreasing, bounded, strictly_before })
}

/// Aggregate of [`epsilon_approach_times`] over the pairs of two bundles
/// with `Y_s < Z_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproachSummary {
    pub pairs: usize,
    /// Pairs that reached `Y >= Z` before the horizon.
    pub hit: usize,
    /// Per `n`, median of `T - T_n` over pairs that hit.
    pub median_lead: Vec<(u32, f64)>,
    /// Pairs where `T_n` failed to be nondecreasing or bounded by `T`.
    pub order_failures: usize,
    /// Pairs whose hit is a jump with `Y_T != Z_T`, and how many of those
    /// had every `T_n < T`.
    pub jump_hits: usize,
    pub jump_hits_strict: usize,
}

pub fn approach_summary(ys: &PathBundle, zs: &PathBundle, s: f64, n_list: &[u32]) -> Result<ApproachSummary> {
    if ys.grid() != zs.grid() || ys.n_paths() != zs.n_paths() {
        return Err(invalid("paired bundles need the same grid and path count"));
    }
    let rows: Vec<ApproachTimes> = (0..ys.n_paths())
        .into_par_iter()
        .filter_map(|i| epsilon_approach_times(&ys.path_view(i), &zs.path_view(i), s, n_list).ok())
        .collect();
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let hits: Vec<&ApproachTimes> = rows.iter().filter(|r| r.t_hit.is_some()).collect();
    let median_lead = ns
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut leads: Vec<f64> = hits.iter().map(|r| r.t_hit.unwrap() - r.t_n[k].1.unwrap_or(f64::INFINITY)).collect();
            (n, median(&mut leads))
        })
        .collect();
    Ok(ApproachSummary {
        pairs: rows.len(),
        hit: hits.len(),
        median_lead,
        order_failures: rows.iter().filter(|r| !(r.nondecreasing && r.bounded)).count(),
        jump_hits: rows.iter().filter(|r| r.strictly_before.is_some()).count(),
        jump_hits_strict: rows.iter().filter(|r| r.strictly_before == Some(true)).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ProcessSpec, TimeGrid};
    use crate::rng::Purpose;
    use crate::simulate::{generate_paths_with, JumpEvent, SimConfig};

    fn pair(spec: &ProcessSpec, n: usize, horizon: f64) -> (PathBundle, PathBundle) {
        let grid = TimeGrid::uniform(horizon, 200).unwrap();
        let a = generate_paths_with(spec, &grid, n, 7, &SimConfig::default().with_purpose(Purpose::CopyA)).unwrap();
        let b = generate_paths_with(spec, &grid, n, 7, &SimConfig::default().with_purpose(Purpose::CopyB)).unwrap();
        (a, b)
    }

    #[test]
    fn brownian_pairs_never_cross_without_touch() {
        let (a, b) = pair(&ProcessSpec::brownian(), 2_000, 1.0);
        let r = cross_without_touch_scan(&a, &b, 0.0, 1.0).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.touch_pairs, 2_000);
    }

    #[test]
    fn poisson_pairs_never_cross_without_touch() {
        let (a, b) = pair(&ProcessSpec::compensated_poisson(1.0).unwrap(), 2_000, 1.0);
        assert_eq!(cross_without_touch_scan(&a, &b, 0.0, 1.0).unwrap().violations, 0);
    }

    #[test]
    fn jump_diffusion_pairs_cross() {
        let spec = ProcessSpec::jump_diffusion(1.0, 1.0, 1.0).unwrap();
        let (a, b) = pair(&spec, 2_000, 1.0);
        let r = cross_without_touch_scan(&a, &b, 0.0, 1.0).unwrap();
        assert!(r.violations as f64 > 0.01 * 2_000.0, "{}", r.violations);
        let e = r.events[0];
        assert!(e.pre_gap * e.post_gap < 0.0);
    }

    #[test]
    fn swapping_negates_gaps() {
        let spec = ProcessSpec::jump_diffusion(1.0, 1.0, 1.0).unwrap();
        let (a, b) = pair(&spec, 500, 1.0);
        let ab = cross_without_touch_scan(&a, &b, 0.0, 1.0).unwrap();
        let ba = cross_without_touch_scan(&b, &a, 0.0, 1.0).unwrap();
        assert_eq!(ab.violations, ba.violations);
        assert_eq!(ab.touch_pairs, ba.touch_pairs);
        for (e, f) in ab.events.iter().zip(&ba.events) {
            assert_eq!((e.pair, e.time), (f.pair, f.time));
            assert_eq!((e.pre_gap, e.post_gap), (-f.pre_gap, -f.post_gap));
        }
    }

    #[test]
    fn bad_windows_rejected() {
        let (a, b) = pair(&ProcessSpec::brownian(), 10, 1.0);
        assert!(cross_without_touch_scan(&a, &b, 0.5, 0.5).is_err());
        assert!(cross_without_touch_scan(&a, &b, 0.0, 0.333).is_err());
    }

    #[test]
    fn closing_gap_fixture() {
        let times: Vec<f64> = (0..=256).map(|k| k as f64 / 256.0).collect();
        let y = vec![0.0; times.len()];
        let z: Vec<f64> = times.iter().map(|t| 1.0 - t).collect();
        let (yv, zv) = (
            PathView { times: &times, values: &y, jumps: &[] },
            PathView { times: &times, values: &z, jumps: &[] },
        );
        let r = epsilon_approach_times(&yv, &zv, 0.0, &[8, 2, 4]).unwrap();
        assert_eq!(r.t_n, vec![(2, Some(0.5)), (4, Some(0.75)), (8, Some(0.875))]);
        assert_eq!(r.t_hit, Some(1.0));
        assert!(r.nondecreasing && r.bounded);
        assert_eq!(r.strictly_before, None);
        assert!(epsilon_approach_times(&zv, &yv, 0.0, &[2]).is_err());
    }

    #[test]
    fn jump_past_fixture_is_flagged() {
        let times = [0.0, 1.0];
        let y = [0.0, 2.0];
        let z = [1.0, 1.0];
        let jumps = [JumpEvent { time: 0.5, left: 0.0, right: 2.0 }];
        let yv = PathView { times: &times, values: &y, jumps: &jumps };
        let zv = PathView { times: &times, values: &z, jumps: &[] };
        let r = epsilon_approach_times(&yv, &zv, 0.0, &[2, 4]).unwrap();
        assert_eq!(r.t_hit, Some(0.5));
        assert_eq!(r.strictly_before, Some(false));
    }

    #[test]
    fn brownian_leads_shrink() {
        let grid = TimeGrid::uniform(1.0, 1_000).unwrap();
        let cfg = SimConfig::default();
        let ys = generate_paths_with(&ProcessSpec::brownian(), &grid, 2_000, 1, &cfg.with_purpose(Purpose::CopyA)).unwrap();
        let zs = generate_paths_with(&ProcessSpec::brownian().with_x0(0.5), &grid, 2_000, 1, &cfg.with_purpose(Purpose::CopyB))
            .unwrap();
        let n_list = [2, 4, 8, 16, 32, 64, 128, 256];
        let s = approach_summary(&ys, &zs, 0.0, &n_list).unwrap();
        assert_eq!(s.order_failures, 0);
        assert!(s.hit > 500);
        assert!(s.median_lead.windows(2).all(|w| w[1].1 <= w[0].1), "{:?}", s.median_lead);
        assert!(s.median_lead.iter().all(|m| m.1 >= 0.0));
    }

    #[test]
    fn poisson_hits_are_touches() {
        let spec = ProcessSpec::compensated_poisson(1.0).unwrap();
        let grid = TimeGrid::uniform(2.0, 200).unwrap();
        let cfg = SimConfig::default();
        let ys = generate_paths_with(&spec, &grid, 2_000, 2, &cfg.with_purpose(Purpose::CopyA)).unwrap();
        let zs = generate_paths_with(&spec.clone().with_x0(1.0), &grid, 2_000, 2, &cfg.with_purpose(Purpose::CopyB)).unwrap();
        let s = approach_summary(&ys, &zs, 0.0, &[2, 4, 8]).unwrap();
        assert!(s.hit > 100);
        assert_eq!(s.order_failures, 0);
        assert_eq!(s.jump_hits, 0);
    }
}
