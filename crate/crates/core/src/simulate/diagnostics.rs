use serde::{Deserialize, Serialize};

use super::PathBundle;
use crate::error::{invalid, Result};
use crate::stats::MeanSe;

/// Sample mean of `X_t` against `x0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftCheck {
    pub time: f64,
    pub mean: f64,
    pub se: f64,
    pub pass: bool,
}

/// Passes at `t` iff `|mean - x0| <= 3 SE` (plus rounding slack).
pub fn martingale_drift_check(bundle: &PathBundle, times: &[f64]) -> Result<Vec<DriftCheck>> {
    if bundle.n_paths() == 0 {
        return Err(invalid("empty bundle"));
    }
    let x0 = bundle.spec().x0;
    times
        .iter()
        .map(|&t| {
            let k = bundle
                .grid()
                .index_of(t)
                .ok_or_else(|| invalid(format!("time {t} is not on the bundle grid")))?;
            let m = MeanSe::of(&bundle.column(k));
            let slack = 1e-12 * x0.abs().max(1.0);
            Ok(DriftCheck { time: t, mean: m.mean, se: m.se, pass: m.within(x0, 3.0, slack) })
        })
        .collect()
}

/// Number of path pairs `(Y_i, Z_i)` sharing an exact jump time.
pub fn simultaneous_jump_scan(ys: &PathBundle, zs: &PathBundle) -> Result<usize> {
    if ys.grid() != zs.grid() {
        return Err(invalid("bundles are on different grids"));
    }
    if ys.n_paths() != zs.n_paths() {
        return Err(invalid("bundles have different path counts"));
    }
    let count = (0..ys.n_paths())
        .filter(|&i| {
            let (a, b) = (ys.jumps(i), zs.jumps(i));
            // both lists are sorted by time
            let (mut p, mut q) = (0, 0);
            while p < a.len() && q < b.len() {
                match a[p].time.total_cmp(&b[q].time) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => return true,
                }
            }
            false
        })
        .count();
    Ok(count)
}
