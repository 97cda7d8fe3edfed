//! Marginal supports estimated from path bundles, the `S_{a,b}` time sets,
//! and out-of-sample containment and jump-past-support scans.
//!
//! Bins of width `w` are centred on multiples of `w`. A bin is kept when it
//! holds at least `min_count` samples; kept bins are merged into runs and
//! each run is dilated by one bin on both sides, so a run of bins `a..=b`
//! becomes `[(a - 1.5) w, (b + 1.5) w]`.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{Interval, TimeGrid};
use crate::simulate::PathBundle;

/// Default occupancy threshold: a bin needs an expected count of five.
pub const DEFAULT_MIN_COUNT: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    tgrid: TimeGrid,
    slices: Vec<Vec<Interval>>,
    binwidth: f64,
    /// Occupancy fraction a bin had to reach, `min_count / n_paths`.
    threshold: f64,
    /// Per slice, fraction of the estimating sample that fell in dropped bins.
    excluded: Vec<f64>,
}

impl SupportEstimate {
    /// Build from explicit slices, e.g. a known closed-form support.
    /// Slices are sorted and overlapping intervals merged.
    pub fn from_slices(tgrid: TimeGrid, slices: Vec<Vec<Interval>>, binwidth: f64) -> Result<Self> {
        if slices.len() != tgrid.len() {
            return Err(invalid(format!("{} slices for {} grid times", slices.len(), tgrid.len())));
        }
        if !(binwidth > 0.0) {
            return Err(invalid(format!("binwidth must be positive, got {binwidth}")));
        }
        let slices = slices.into_iter().map(normalize).collect();
        let excluded = vec![0.0; tgrid.len()];
        Ok(Self { tgrid, slices, binwidth, threshold: 0.0, excluded })
    }

    /// Every slice equal to `[lo, hi]`.
    pub fn full(tgrid: TimeGrid, lo: f64, hi: f64, binwidth: f64) -> Result<Self> {
        let slices = vec![vec![Interval::new(lo, hi)]; tgrid.len()];
        Self::from_slices(tgrid, slices, binwidth)
    }

    pub fn tgrid(&self) -> &TimeGrid {
        &self.tgrid
    }

    pub fn binwidth(&self) -> f64 {
        self.binwidth
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn slice(&self, i: usize) -> &[Interval] {
        &self.slices[i]
    }

    pub fn slices(&self) -> &[Vec<Interval>] {
        &self.slices
    }

    /// Slice at the grid time nearest to `t`.
    pub fn slice_near(&self, t: f64) -> &[Interval] {
        &self.slices[self.tgrid.nearest_index(t)]
    }

    pub fn excluded(&self) -> &[f64] {
        &self.excluded
    }

    /// Mass the estimate declares it may miss: the mean over slices of the
    /// in-sample fraction that fell in dropped bins.
    pub fn declared_tail_mass(&self) -> f64 {
        self.excluded.iter().sum::<f64>() / self.excluded.len() as f64
    }

    pub fn contains(&self, i: usize, x: f64) -> bool {
        self.slices[i].iter().any(|iv| iv.contains(x))
    }

    /// Distance from `x` to slice `i`; infinite for an empty slice.
    pub fn distance(&self, i: usize, x: f64) -> f64 {
        self.slices[i].iter().map(|iv| iv.distance(x)).fold(f64::INFINITY, f64::min)
    }

    /// `t,interval_lo,interval_hi` rows after `#` comment lines.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        for line in header.lines() {
            writeln!(w, "# {line}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "interval_lo", "interval_hi"])?;
        for (t, slice) in self.tgrid.times().iter().zip(&self.slices) {
            for iv in slice {
                out.write_record([t.to_string(), iv.lo.to_string(), iv.hi.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn normalize(mut ivs: Vec<Interval>) -> Vec<Interval> {
    ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

fn check_params(n: usize, binwidth: f64, min_count: usize) -> Result<()> {
    if !(binwidth > 0.0) || !binwidth.is_finite() {
        return Err(invalid(format!("binwidth must be positive, got {binwidth}")));
    }
    if min_count == 0 {
        return Err(invalid("min_count must be at least one"));
    }
    if n < min_count {
        return Err(Error::InsufficientData(format!("{n} paths cannot reach a bin count of {min_count}")));
    }
    Ok(())
}

/// Kept intervals and the fraction of `xs` in dropped bins.
fn estimate_slice(xs: &[f64], binwidth: f64, min_count: usize) -> (Vec<Interval>, f64) {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &x in xs {
        *counts.entry((x / binwidth).round() as i64).or_default() += 1;
    }
    let mut dropped = 0usize;
    let mut runs: Vec<(i64, i64)> = Vec::new();
    for (&bin, &c) in &counts {
        if c < min_count {
            dropped += c;
            continue;
        }
        match runs.last_mut() {
            Some(run) if run.1 + 1 == bin => run.1 = bin,
            _ => runs.push((bin, bin)),
        }
    }
    let ivs = runs
        .into_iter()
        .map(|(a, b)| Interval::new((a as f64 - 1.5) * binwidth, (b as f64 + 1.5) * binwidth))
        .collect();
    (normalize(ivs), dropped as f64 / xs.len() as f64)
}

/// Support slice of the bundle at grid time `t`.
pub fn estimate_support(bundle: &PathBundle, t: f64, binwidth: f64, min_count: usize) -> Result<Vec<Interval>> {
    check_params(bundle.n_paths(), binwidth, min_count)?;
    let k = bundle.grid().index_of(t).ok_or_else(|| invalid(format!("t = {t} is not on the bundle grid")))?;
    Ok(estimate_slice(&bundle.column(k), binwidth, min_count).0)
}

/// [`estimate_support`] at every grid time.
pub fn marginal_support(bundle: &PathBundle, binwidth: f64, min_count: usize) -> Result<SupportEstimate> {
    check_params(bundle.n_paths(), binwidth, min_count)?;
    let (slices, excluded): (Vec<_>, Vec<_>) = (0..bundle.grid().len())
        .into_par_iter()
        .map(|k| estimate_slice(&bundle.column(k), binwidth, min_count))
        .unzip();
    Ok(SupportEstimate {
        tgrid: bundle.grid().clone(),
        slices,
        binwidth,
        threshold: min_count as f64 / bundle.n_paths() as f64,
        excluded,
    })
}

/// Grid times where the sample mean of `min((X_t - a)_+, (b - X_t)_+)` is
/// at most `threshold`. The statistic is positive as soon as one sample
/// lies in `(a, b)`, so the default threshold of zero is the detection
/// floor: no sample inside.
pub fn s_ab_set(bundle: &PathBundle, a: f64, b: f64, threshold: Option<f64>) -> Result<Vec<f64>> {
    if !(a < b) {
        return Err(invalid(format!("need a < b, got ({a}, {b})")));
    }
    let threshold = threshold.unwrap_or(0.0);
    let times = bundle.grid().times();
    let n = bundle.n_paths() as f64;
    Ok((0..times.len())
        .filter(|&k| {
            let stat: f64 = bundle.column(k).iter().map(|&x| (x - a).max(0.0).min((b - x).max(0.0))).sum::<f64>() / n;
            stat <= threshold
        })
        .map(|k| times[k])
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    /// Grid samples plus recorded jump left limits that were checked.
    pub samples: usize,
    pub violations: usize,
    pub fraction: f64,
    /// At most the first 100 offending `(path, t, x)`.
    pub examples: Vec<(usize, f64, f64)>,
}

impl Containment {
    /// Declared tail mass `p` plus three binomial standard errors.
    pub fn bound(&self, p: f64) -> f64 {
        p + 3.0 * (p * (1.0 - p) / self.samples.max(1) as f64).sqrt()
    }
}

/// Count `(path, grid time)` samples lying more than `slack` bins outside
/// the support slice; recorded jump left limits are checked against the
/// slice at the nearest grid time.
pub fn paths_in_support_check(bundle: &PathBundle, support: &SupportEstimate, slack: usize) -> Result<Containment> {
    if bundle.grid() != support.tgrid() {
        return Err(invalid("bundle and support use different time grids"));
    }
    let margin = slack as f64 * support.binwidth();
    let times = bundle.grid().times();
    // (samples, violations, examples) per path
    type PathCount = (usize, usize, Vec<(usize, f64, f64)>);
    let per_path: Vec<PathCount> = (0..bundle.n_paths())
        .into_par_iter()
        .map(|p| {
            let mut bad = Vec::new();
            let mut samples = 0;
            for (k, &x) in bundle.path(p).iter().enumerate() {
                samples += 1;
                if support.distance(k, x) > margin {
                    bad.push((p, times[k], x));
                }
            }
            for ev in bundle.jumps(p) {
                samples += 1;
                let k = support.tgrid().nearest_index(ev.time);
                if support.distance(k, ev.left) > margin {
                    bad.push((p, ev.time, ev.left));
                }
            }
            (samples, bad.len(), bad)
        })
        .collect();
    let samples: usize = per_path.iter().map(|r| r.0).sum();
    let violations: usize = per_path.iter().map(|r| r.1).sum();
    let examples = per_path.into_iter().flat_map(|r| r.2).take(100).collect();
    Ok(Containment { samples, violations, fraction: violations as f64 / samples as f64, examples })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpViolation {
    pub path: usize,
    pub time: f64,
    pub left: f64,
    pub right: f64,
}

/// Bins trimmed from each end of a jumped-over interval: the endpoint bin
/// and two neighbours, which the one-bin dilation and the offset between a
/// jump time and its nearest slice can otherwise touch.
const ENDPOINT_BINS: f64 = 2.5;

/// Jumps whose jumped-over open interval meets the support slice at the
/// nearest grid time, after trimming the bins around both endpoints.
pub fn jump_past_support_scan(bundle: &PathBundle, support: &SupportEstimate) -> Result<Vec<JumpViolation>> {
    let trim = ENDPOINT_BINS * support.binwidth();
    let found: Vec<Vec<JumpViolation>> = (0..bundle.n_paths())
        .into_par_iter()
        .map(|p| {
            bundle
                .jumps(p)
                .iter()
                .filter(|ev| {
                    let (lo, hi) = (ev.left.min(ev.right) + trim, ev.left.max(ev.right) - trim);
                    support.slice_near(ev.time).iter().any(|iv| iv.meets_open(lo, hi))
                })
                .map(|ev| JumpViolation { path: p, time: ev.time, left: ev.left, right: ev.right })
                .collect()
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}
