//! PDE surface against Monte Carlo restarts at sample points.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{mc_condexp, GridFunction};
use crate::error::{invalid, Result};
use crate::model::{Payoff, ProcessSpec};
use crate::rng::{Purpose, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossPoint {
    pub t: f64,
    pub x: f64,
    pub pde: f64,
    pub mc: f64,
    pub se: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossReport {
    pub points: Vec<CrossPoint>,
    pub scheme_tol: f64,
    pub pass: bool,
}

/// At each `(t, x)` the check passes iff `|pde - mc| <= 3 se + scheme_tol`.
/// Point `p` draws from its own seed derived from `(seed, p)`.
pub fn cross_validate(
    gf: &GridFunction,
    spec: &ProcessSpec,
    payoff: &Payoff,
    points: &[(f64, f64)],
    n_paths: usize,
    seed: u64,
    scheme_tol: f64,
) -> Result<CrossReport> {
    if !(scheme_tol >= 0.0) {
        return Err(invalid(format!("scheme tolerance must be non-negative, got {scheme_tol}")));
    }
    let horizon = gf.tgrid().horizon();
    let (lo, hi) = (gf.xgrid().lo(), gf.xgrid().hi());
    let mut out = Vec::with_capacity(points.len());
    for (p, &(t, x)) in points.iter().enumerate() {
        if !(lo..=hi).contains(&x) {
            return Err(invalid(format!("sample x = {x} outside the lattice [{lo}, {hi}]")));
        }
        let pde = gf.eval_at(t, x)?;
        let point_seed = Stream::new(seed, Purpose::Custom(0x6372_6f73), p as u64).next_u64();
        let est = mc_condexp(spec, payoff, t, x, horizon, n_paths, point_seed)?;
        let pass = (pde - est.mean).abs() <= 3.0 * est.se + scheme_tol;
        out.push(CrossPoint { t, x, pde, mc: est.mean, se: est.se, pass });
    }
    let pass = out.iter().all(|p| p.pass);
    Ok(CrossReport { points: out, scheme_tol, pass })
}
