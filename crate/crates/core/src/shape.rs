//! Discrete checks of the shape properties of `f(t, .)`: monotone,
//! Lipschitz between slopes `k` and `K`, convex, decreasing in `t`, and
//! jointly continuous on the marginal support.
//!
//! Each check returns a [`ShapeReport`] whose `worst` is the largest
//! violation found (zero when none) and `pass == (worst <= tol)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::condexp::GridFunction;
use crate::error::{invalid, Result};
use crate::support::SupportEstimate;

/// Where the worst violation sits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Point { t: f64, x: f64 },
    /// Two lattice points compared with each other.
    Pair { t0: f64, x0: f64, t1: f64, x1: f64 },
    /// Three neighbouring points of one slice.
    Triple { t: f64, x: [f64; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub property: String,
    pub pass: bool,
    pub worst: f64,
    pub location: Option<Location>,
    pub tol: f64,
    /// `(delta, omega(delta))` for the continuity check, largest delta first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moduli: Vec<(f64, f64)>,
}

impl ShapeReport {
    fn new(property: &str, tol: f64, worst: f64, location: Option<Location>) -> Self {
        let worst = worst.max(0.0);
        let location = if worst > 0.0 { location } else { None };
        Self { property: property.to_string(), pass: worst <= tol, worst, location, tol, moduli: Vec::new() }
    }
}

/// Tracks the largest violation and its location.
struct Worst {
    value: f64,
    at: Option<Location>,
}

impl Worst {
    fn new() -> Self {
        Self { value: f64::NEG_INFINITY, at: None }
    }

    fn offer(&mut self, v: f64, at: impl FnOnce() -> Location) {
        if v > self.value {
            self.value = v;
            self.at = Some(at());
        }
    }

    fn merge(mut self, other: Self) -> Self {
        if other.value > self.value {
            self.value = other.value;
            self.at = other.at;
        }
        self
    }

    fn report(self, property: &str, tol: f64) -> ShapeReport {
        ShapeReport::new(property, tol, self.value, self.at)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("tolerance must be non-negative, got {tol}")))
    }
}

/// `f(t_i, x_{j+1}) - f(t_i, x_j) >= -tol` for every `j`.
pub fn check_monotone(gf: &GridFunction, i: usize, tol: f64) -> Result<ShapeReport> {
    check_tol(tol)?;
    let (t, row, xg) = (gf.tgrid().times()[i], gf.slice(i), gf.xgrid());
    let mut w = Worst::new();
    for j in 0..row.len() - 1 {
        w.offer(row[j] - row[j + 1], || Location::Pair { t0: t, x0: xg.point(j), t1: t, x1: xg.point(j + 1) });
    }
    Ok(w.report("monotone", tol))
}

/// `k - tol <= (f(t_i, x_{j+1}) - f(t_i, x_j)) / h <= K + tol` for every `j`.
/// Adjacent pairs suffice: the slope between any two lattice points is an
/// average of adjacent slopes.
pub fn check_lipschitz(gf: &GridFunction, i: usize, k: f64, big_k: f64, tol: f64) -> Result<ShapeReport> {
    check_tol(tol)?;
    if !(k <= big_k) {
        return Err(invalid(format!("need k <= K, got ({k}, {big_k})")));
    }
    let (t, row, xg) = (gf.tgrid().times()[i], gf.slice(i), gf.xgrid());
    let h = xg.step();
    let mut w = Worst::new();
    for j in 0..row.len() - 1 {
        let s = (row[j + 1] - row[j]) / h;
        w.offer((k - s).max(s - big_k), || Location::Pair { t0: t, x0: xg.point(j), t1: t, x1: xg.point(j + 1) });
    }
    Ok(w.report("lipschitz", tol))
}

/// Second differences `f(x_{j-1}) - 2 f(x_j) + f(x_{j+1}) >= -tol`.
pub fn check_convex(gf: &GridFunction, i: usize, tol: f64) -> Result<ShapeReport> {
    check_tol(tol)?;
    let (t, row, xg) = (gf.tgrid().times()[i], gf.slice(i), gf.xgrid());
    let mut w = Worst::new();
    for j in 1..row.len() - 1 {
        let d = row[j - 1] - 2.0 * row[j] + row[j + 1];
        w.offer(-d, || Location::Triple { t, x: [xg.point(j - 1), xg.point(j), xg.point(j + 1)] });
    }
    Ok(w.report("convex", tol))
}

/// Worst of a per-time check over every lattice time.
pub fn check_all_times(
    gf: &GridFunction,
    check: impl Fn(&GridFunction, usize) -> Result<ShapeReport> + Sync,
) -> Result<ShapeReport> {
    let reports: Vec<ShapeReport> = (0..gf.tgrid().len()).into_par_iter().map(|i| check(gf, i)).collect::<Result<_>>()?;
    let mut out = reports[0].clone();
    for r in reports.into_iter().skip(1) {
        if r.worst > out.worst {
            out = r;
        }
    }
    out.pass = out.worst <= out.tol;
    Ok(out)
}

/// Row `i` with values off the support replaced by the extension the
/// time-decrease argument uses: linear across gaps between supported
/// lattice points, slope `k` below and `K` above them.
fn extended_row(gf: &GridFunction, i: usize, support: &SupportEstimate, k: f64, big_k: f64) -> Vec<f64> {
    let (row, xg) = (gf.slice(i), gf.xgrid());
    let on: Vec<usize> = (0..row.len()).filter(|&j| support.contains(i, xg.point(j))).collect();
    let (Some(&first), Some(&last)) = (on.first(), on.last()) else {
        return row.to_vec();
    };
    let mut out = row.to_vec();
    for j in 0..first {
        out[j] = row[first] + k * (xg.point(j) - xg.point(first));
    }
    for j in last + 1..row.len() {
        out[j] = row[last] + big_k * (xg.point(j) - xg.point(last));
    }
    for pair in on.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for j in a + 1..b {
            let w = (j - a) as f64 / (b - a) as f64;
            out[j] = row[a] * (1.0 - w) + row[b] * w;
        }
    }
    out
}

/// `f(t_i, x_j) >= f(t_{i+1}, x_j) - tol` for all `i, j`. With a support
/// estimate on the same time grid, each row is first replaced by its
/// extension from the supported lattice points, using the surface's
/// extension slopes as `k` and `K`.
pub fn check_time_decreasing(gf: &GridFunction, tol: f64, restrict_to: Option<&SupportEstimate>) -> Result<ShapeReport> {
    check_tol(tol)?;
    let tg = gf.tgrid();
    if let Some(s) = restrict_to {
        if s.tgrid() != tg {
            return Err(invalid("support estimate uses a different time grid"));
        }
    }
    let ext = gf.extension();
    let rows: Vec<Vec<f64>> = (0..tg.len())
        .map(|i| match restrict_to {
            Some(s) => extended_row(gf, i, s, ext.lo_slope, ext.hi_slope),
            None => gf.slice(i).to_vec(),
        })
        .collect();
    let times = tg.times();
    let w = (0..tg.len() - 1)
        .into_par_iter()
        .map(|i| {
            let mut w = Worst::new();
            for j in 0..rows[i].len() {
                w.offer(rows[i + 1][j] - rows[i][j], || {
                    let x = gf.xgrid().point(j);
                    Location::Pair { t0: times[i], x0: x, t1: times[i + 1], x1: x }
                });
            }
            w
        })
        .reduce(Worst::new, Worst::merge);
    Ok(w.report("time_decreasing", tol))
}

/// Discrete modulus of continuity of `f` over lattice points inside the
/// support, `omega(delta) = max |f(p) - f(q)|` over supported `p, q` with
/// `max(|t_p - t_q|, |x_p - x_q|) <= delta`.
///
/// Passes iff `omega` does not increase as `delta` shrinks along `mesh`
/// and `omega(min mesh) <= tol`. `worst` is `omega(min mesh)`.
pub fn check_joint_continuity_on_support(
    gf: &GridFunction,
    support: &SupportEstimate,
    mesh: &[f64],
    tol: f64,
) -> Result<ShapeReport> {
    check_tol(tol)?;
    if mesh.is_empty() || mesh.iter().any(|d| !(*d > 0.0)) {
        return Err(invalid("mesh must be a non-empty list of positive distances"));
    }
    let tg = gf.tgrid();
    if support.tgrid() != tg {
        return Err(invalid("support estimate uses a different time grid"));
    }
    let xg = gf.xgrid();
    let n = xg.len();
    let on: Vec<Vec<bool>> =
        (0..tg.len()).map(|i| (0..n).map(|j| support.contains(i, xg.point(j))).collect()).collect();
    if on.iter().all(|row| row.iter().all(|b| !b)) {
        return Err(invalid("support contains no lattice point"));
    }

    let mut deltas = mesh.to_vec();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let dmax = deltas[0];
    let times = tg.times();
    let h = xg.step();
    let reach_x = (dmax / h + 1e-9).floor() as usize;
    let eps = 1e-12 * (1.0 + dmax);

    // per delta: best value and pair
    let per_row: Vec<Vec<(f64, Option<Location>)>> = (0..tg.len())
        .into_par_iter()
        .map(|i| {
            let mut best = vec![(0.0, None); deltas.len()];
            for j in (0..n).filter(|&j| on[i][j]) {
                let v = gf.value(i, j);
                for i2 in i..tg.len() {
                    let dt = times[i2] - times[i];
                    if dt > dmax + eps {
                        break;
                    }
                    let j_lo = j.saturating_sub(reach_x);
                    let j_hi = (j + reach_x).min(n - 1);
                    for j2 in j_lo..=j_hi {
                        if !on[i2][j2] || (i2 == i && j2 <= j) {
                            continue;
                        }
                        let dist = dt.max((xg.point(j2) - xg.point(j)).abs());
                        let diff = (gf.value(i2, j2) - v).abs();
                        for (d, slot) in deltas.iter().zip(best.iter_mut()) {
                            if dist <= d + eps && diff > slot.0 {
                                *slot = (
                                    diff,
                                    Some(Location::Pair { t0: times[i], x0: xg.point(j), t1: times[i2], x1: xg.point(j2) }),
                                );
                            }
                        }
                    }
                }
            }
            best
        })
        .collect();

    let mut moduli: Vec<(f64, f64, Option<Location>)> = deltas.iter().map(|&d| (d, 0.0, None)).collect();
    for row in per_row {
        for (m, (v, at)) in moduli.iter_mut().zip(row) {
            if v > m.1 {
                m.1 = v;
                m.2 = at;
            }
        }
    }
    let nonincreasing = moduli.windows(2).all(|w| w[1].1 <= w[0].1);
    let last = moduli[moduli.len() - 1];
    let mut report = ShapeReport::new("joint_continuity_on_support", tol, last.1, last.2);
    report.pass = report.pass && nonincreasing;
    report.moduli = moduli.iter().map(|m| (m.0, m.1)).collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condexp::Extension;
    use crate::model::{counterexample_f, counterexample_msupport, Interval, SpaceGrid, TimeGrid};

    fn surface(f: impl Fn(f64, f64) -> f64, lo: f64, hi: f64) -> GridFunction {
        let tg = TimeGrid::uniform(1.0, 10).unwrap();
        let xg = SpaceGrid::new(lo, hi, 40).unwrap();
        GridFunction::from_fn(tg, xg, Extension { lo_slope: 0.0, hi_slope: 1.0 }, f).unwrap()
    }

    #[test]
    fn identity_passes_everything_linear() {
        let f = surface(|_, x| x, -1.0, 1.0);
        let r = check_monotone(&f, 3, 0.0).unwrap();
        assert!(r.pass && r.worst == 0.0 && r.location.is_none());
        assert!(check_lipschitz(&f, 3, 1.0, 1.0, 1e-12).unwrap().pass);
        assert!(check_convex(&f, 3, 1e-12).unwrap().pass);
    }

    #[test]
    fn inverted_cell_is_located() {
        let tg = TimeGrid::uniform(1.0, 1).unwrap();
        let xg = SpaceGrid::new(0.0, 4.0, 4).unwrap();
        let v = vec![0.0, 1.0, 2.0, 3.0, 4.0, 0.0, 1.0, 0.5, 3.0, 4.0];
        let f = GridFunction::new(tg, xg, v, Extension { lo_slope: 1.0, hi_slope: 1.0 }).unwrap();
        let r = check_monotone(&f, 1, 1e-9).unwrap();
        assert!(!r.pass);
        assert!((r.worst - 0.5).abs() < 1e-15);
        assert_eq!(r.location, Some(Location::Pair { t0: 1.0, x0: 1.0, t1: 1.0, x1: 2.0 }));
        assert!(!check_all_times(&f, |g, i| check_monotone(g, i, 1e-9)).unwrap().pass);
    }

    #[test]
    fn square_is_not_one_lipschitz() {
        let f = surface(|_, x| x * x, -2.0, 2.0);
        assert!(!check_lipschitz(&f, 0, -1.0, 1.0, 1e-9).unwrap().pass);
        assert!(check_lipschitz(&f, 0, -4.0, 4.0, 1e-9).unwrap().pass);
        assert!(check_lipschitz(&f, 0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn concave_fails_convexity() {
        let f = surface(|_, x| -(x.max(0.0)), -1.0, 1.0);
        let r = check_convex(&f, 0, 1e-9).unwrap();
        assert!(!r.pass);
        assert!(matches!(r.location, Some(Location::Triple { .. })));
    }

    #[test]
    fn increasing_in_time_fails() {
        let f = surface(|t, _| t, -1.0, 1.0);
        assert!(!check_time_decreasing(&f, 1e-9, None).unwrap().pass);
        let g = surface(|t, x| x * x + 1.0 - t, -1.0, 1.0);
        assert!(check_time_decreasing(&g, 1e-12, None).unwrap().pass);
    }

    #[test]
    fn constant_is_continuous() {
        let f = surface(|_, _| 3.0, -1.0, 1.0);
        let s = SupportEstimate::full(f.tgrid().clone(), -1.0, 1.0, 0.05).unwrap();
        let r = check_joint_continuity_on_support(&f, &s, &[0.2, 0.1], 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.moduli, vec![(0.2, 0.0), (0.1, 0.0)]);
    }

    fn counterexample_lattice() -> GridFunction {
        let tg = TimeGrid::uniform(2.0, 200).unwrap();
        let xg = SpaceGrid::new(-2.0, 2.0, 400).unwrap();
        let e = Extension { lo_slope: -4.0, hi_slope: 4.0 };
        GridFunction::from_fn(tg, xg, e, |t, x| counterexample_f(t, x, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn counterexample_continuous_only_on_support() {
        let f = counterexample_lattice();
        let slices = f.tgrid().times().iter().map(|&t| counterexample_msupport(t, (-2.0, 2.0))).collect();
        let s = SupportEstimate::from_slices(f.tgrid().clone(), slices, 0.01).unwrap();
        let mesh = [0.16, 0.08, 0.04, 0.02, 0.01];
        let on = check_joint_continuity_on_support(&f, &s, &mesh, 0.1).unwrap();
        assert!(on.pass, "{on:?}");
        let full = SupportEstimate::full(f.tgrid().clone(), -2.0, 2.0, 0.01).unwrap();
        let off = check_joint_continuity_on_support(&f, &full, &mesh, 0.1).unwrap();
        assert!(!off.pass);
        assert!((off.worst - 1.0).abs() < 0.05, "{off:?}");
    }

    #[test]
    fn counterexample_shape() {
        let f = counterexample_lattice();
        for t in [0.5, 1.0, 1.5] {
            let i = f.tgrid().index_of(t).unwrap();
            assert!(check_convex(&f, i, 1e-12).unwrap().pass);
        }
        assert!(check_time_decreasing(&f, 1e-12, None).unwrap().pass);
    }

    #[test]
    fn extension_bridges_support_gaps() {
        let tg = TimeGrid::uniform(1.0, 1).unwrap();
        let xg = SpaceGrid::new(-2.0, 2.0, 4).unwrap();
        // row 0 is large off its support; the extension replaces those values
        let v = vec![9.0, 1.0, 9.0, 1.0, 9.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        let f = GridFunction::new(tg.clone(), xg, v, Extension { lo_slope: -1.0, hi_slope: 1.0 }).unwrap();
        let s = SupportEstimate::from_slices(
            tg,
            vec![vec![Interval::point(-1.0), Interval::point(1.0)], vec![Interval::new(-2.0, 2.0)]],
            0.1,
        )
        .unwrap();
        assert!(check_time_decreasing(&f, 1e-12, None).unwrap().pass);
        let r = check_time_decreasing(&f, 1e-12, Some(&s)).unwrap();
        assert!(!r.pass && (r.worst - 4.0).abs() < 1e-12);
        assert_eq!(extended_row(&f, 0, &s, -1.0, 1.0), vec![2.0, 1.0, 1.0, 1.0, 2.0]);
    }
}
