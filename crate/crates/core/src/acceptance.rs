//! The acceptance criteria as runnable checks with pinned parameters.
//!
//! Every criterion returns a [`CriterionResult`] whose `output` is a JSON
//! string built only from computed values, so two runs with the same seed
//! can be compared byte for byte. Timing is reported separately and counts
//! against each criterion's budget.

use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::json;

use crate::condexp::{cross_validate, oracle_bm, solve_pde, working_grids, Extension, GridFunction, OracleKind};
use crate::couple::{cross_without_touch_scan, three_copy_convexity_coupling};
use crate::error::Result;
use crate::model::{
    by_name, catalog, counterexample_f, Payoff, PayoffShape, ProcessKind, ProcessSpec, SpaceGrid, TimeGrid,
};
use crate::rng::Purpose;
use crate::shape::{
    check_all_times, check_convex, check_joint_continuity_on_support, check_lipschitz, check_monotone,
    check_time_decreasing, ShapeReport,
};
use crate::simulate::{generate_paths, generate_paths_with, PathBundle, SimConfig};
use crate::support::{jump_past_support_scan, marginal_support, paths_in_support_check, s_ab_set, SupportEstimate};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// PDE lattice used by the shape criteria.
const SHAPE_NT: usize = 400;
const SHAPE_NX: usize = 400;
const SHAPE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    /// One-line human summary.
    pub summary: String,
    /// Deterministic JSON of the computed quantities.
    pub output: String,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub budget: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {}  {}  ({:.1}s / {}s)",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.summary,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

fn timed(
    id: u8,
    name: &'static str,
    budget_secs: u64,
    body: impl FnOnce() -> Result<(bool, String, serde_json::Value)>,
) -> CriterionResult {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    let (pass, summary, output) = match outcome {
        Ok((pass, summary, value)) => (pass && elapsed <= budget, summary, value.to_string()),
        Err(e) => (false, format!("error: {e}"), json!({ "error": e.to_string() }).to_string()),
    };
    CriterionResult { id, name, pass, summary, output, elapsed, budget }
}

fn sub_seed(seed: u64, id: u64) -> u64 {
    use rand::RngCore;
    crate::rng::Stream::new(seed, Purpose::Custom(0x6163_6365_7074), id).next_u64()
}

pub const CONTINUITY_MESH: [f64; 5] = [0.16, 0.08, 0.04, 0.02, 0.01];
pub const CONTINUITY_TOL: f64 = 0.1;

/// Parameters of the counterexample pipeline. The default lattice is
/// `[0, 2] x [-2, 2]` with step 0.01 in both directions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CounterexampleSetup {
    pub horizon: f64,
    pub nt: usize,
    pub nx: usize,
    pub xmax: f64,
    pub n_paths: usize,
    pub binwidth: f64,
    pub min_count: usize,
    pub tol: f64,
}

impl Default for CounterexampleSetup {
    fn default() -> Self {
        Self { horizon: 2.0, nt: 200, nx: 400, xmax: 2.0, n_paths: 10_000, binwidth: 0.01, min_count: 5, tol: CONTINUITY_TOL }
    }
}

pub struct CounterexampleRun {
    pub surface: GridFunction,
    pub support: SupportEstimate,
    pub on_support: ShapeReport,
    pub full_lattice: ShapeReport,
}

impl CounterexampleRun {
    /// Continuous on the support, and a jump of about 1 at `t = 1` off it.
    pub fn full_lattice_jump_ok(&self) -> bool {
        !self.full_lattice.pass && (self.full_lattice.worst - 1.0).abs() <= 0.05
    }

    pub fn pass(&self) -> bool {
        self.on_support.pass && self.full_lattice_jump_ok()
    }
}

pub fn counterexample_surface(setup: &CounterexampleSetup) -> Result<GridFunction> {
    let horizon = setup.horizon;
    let tg = TimeGrid::uniform(horizon, setup.nt)?;
    let xg = SpaceGrid::new(-setup.xmax, setup.xmax, setup.nx)?;
    counterexample_f(0.0, 0.0, horizon)?;
    let edge = 2.0 * setup.xmax;
    GridFunction::from_fn(tg, xg, Extension { lo_slope: -edge, hi_slope: edge }, |t, x| {
        counterexample_f(t, x, horizon).unwrap_or(f64::NAN)
    })
}

/// Surface, estimated support, and the continuity check on the support and
/// on the full lattice.
pub fn counterexample_run(setup: &CounterexampleSetup, seed: u64) -> Result<CounterexampleRun> {
    let surface = counterexample_surface(setup)?;
    let bundle = generate_paths(&ProcessSpec::counterexample(), surface.tgrid(), setup.n_paths, seed)?;
    let support = marginal_support(&bundle, setup.binwidth, setup.min_count)?;
    let on_support = check_joint_continuity_on_support(&surface, &support, &CONTINUITY_MESH, setup.tol)?;
    let full = SupportEstimate::full(surface.tgrid().clone(), -setup.xmax, setup.xmax, setup.binwidth)?;
    let full_lattice = check_joint_continuity_on_support(&surface, &full, &CONTINUITY_MESH, setup.tol)?;
    Ok(CounterexampleRun { surface, support, on_support, full_lattice })
}

pub fn criterion_1(seed: u64) -> CriterionResult {
    timed(1, "counterexample", 60, || {
        let horizon = 2.0;
        let display = [
            ((1.0, 0.5), 0.25 + horizon - 1.0),
            ((0.5, 0.3), horizon),
            ((0.5, 1.5), 2.25 + horizon - 1.0),
            ((1.5, 0.2), 0.04 + horizon - 1.5),
            ((0.0, 0.0), horizon),
        ];
        let mut exact = true;
        for &((t, x), want) in &display {
            exact &= counterexample_f(t, x, horizon)? == want;
        }
        let run = counterexample_run(&CounterexampleSetup::default(), sub_seed(seed, 1))?;
        let pass = exact && run.pass();
        let summary = format!(
            "closed form exact: {exact}; omega on support {:.3}; off support {:.3} (expect ~1)",
            run.on_support.worst, run.full_lattice.worst
        );
        Ok((pass, summary, json!({ "exact": exact, "on_support": run.on_support, "full_lattice": run.full_lattice })))
    })
}

fn bm_call_error(nt: usize, nx: usize) -> Result<f64> {
    let spec = ProcessSpec::brownian();
    let (tg, xg) = working_grids(&spec, 1.0, nt, nx, 8.0)?;
    let f = solve_pde(&spec, &Payoff::call(0.0), &tg, &xg)?;
    let kind = OracleKind::Call { strike: 0.0 };
    let mut worst: f64 = 0.0;
    for (i, &t) in tg.times().iter().enumerate() {
        for (j, x) in xg.points().into_iter().enumerate() {
            worst = worst.max((f.value(i, j) - oracle_bm(kind, t, x, 1.0)?).abs());
        }
    }
    Ok(worst)
}

pub fn criterion_2(_seed: u64) -> CriterionResult {
    timed(2, "pde oracle", 10, || {
        let coarse = bm_call_error(400, 400)?;
        let fine = bm_call_error(800, 800)?;
        let ratio = coarse / fine;
        let pass = coarse <= 2e-3 && ratio >= 3.0;
        let summary = format!("max error {coarse:.3e} at 400x400, {fine:.3e} at 800x800, ratio {ratio:.2}");
        Ok((pass, summary, json!({ "coarse": coarse, "fine": fine, "ratio": ratio })))
    })
}

pub fn criterion_3(seed: u64) -> CriterionResult {
    timed(3, "pde vs monte carlo", 120, || {
        let spec = ProcessSpec::brownian();
        let payoff = Payoff::call(0.0);
        let (tg, xg) = working_grids(&spec, 1.0, 400, 400, 8.0)?;
        let f = solve_pde(&spec, &payoff, &tg, &xg)?;
        let points: Vec<(f64, f64)> =
            [0.0, 0.25, 0.5].iter().flat_map(|&t| [-0.5, 0.0, 0.5].map(move |x| (t, x))).collect();
        let r = cross_validate(&f, &spec, &payoff, &points, 1_000_000, sub_seed(seed, 3), 2e-3)?;
        let worst = r.points.iter().map(|p| (p.pde - p.mc).abs() - 3.0 * p.se).fold(f64::NEG_INFINITY, f64::max);
        let summary = format!(
            "{}/{} points within 3 SE + 2e-3 (worst excess over 3 SE {worst:.2e})",
            r.points.iter().filter(|p| p.pass).count(),
            r.points.len()
        );
        Ok((r.pass, summary, serde_json::to_value(&r)?))
    })
}

fn shape_surface(spec: &ProcessSpec, payoff: &Payoff) -> Result<GridFunction> {
    let (tg, xg) = working_grids(spec, 1.0, SHAPE_NT, SHAPE_NX, 8.0)?;
    solve_pde(spec, payoff, &tg, &xg)
}

fn pde_diffusions() -> Vec<ProcessSpec> {
    catalog().into_iter().filter(|s| s.kind == ProcessKind::Diffusion).collect()
}

pub fn criterion_4(_seed: u64) -> CriterionResult {
    timed(4, "monotone in x", 60, || {
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst: f64 = 0.0;
        for spec in pde_diffusions() {
            for payoff in [Payoff::identity(), Payoff::call(0.0), Payoff::new(PayoffShape::TanhRamp)] {
                let f = shape_surface(&spec, &payoff)?;
                let r = check_all_times(&f, |g, i| check_monotone(g, i, SHAPE_TOL))?;
                pass &= r.pass;
                worst = worst.max(r.worst);
                rows.push(json!({ "process": spec.name, "payoff": payoff.shape.name(), "report": r }));
            }
        }
        Ok((pass, format!("{} surfaces, worst violation {worst:.2e}", rows.len()), json!(rows)))
    })
}

pub fn criterion_5(_seed: u64) -> CriterionResult {
    timed(5, "lipschitz sandwich", 60, || {
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst: f64 = 0.0;
        for spec in pde_diffusions() {
            for (payoff, (k, big_k)) in [(Payoff::call(0.0), (0.0, 1.0)), (Payoff::two_slope(0.0, -1.0, 2.0), (-1.0, 2.0))] {
                let f = shape_surface(&spec, &payoff)?;
                let r = check_all_times(&f, |g, i| check_lipschitz(g, i, k, big_k, SHAPE_TOL))?;
                pass &= r.pass;
                worst = worst.max(r.worst);
                rows.push(json!({ "process": spec.name, "k": k, "K": big_k, "report": r }));
            }
        }
        Ok((pass, format!("{} surfaces, worst violation {worst:.2e}", rows.len()), json!(rows)))
    })
}

pub fn criterion_6(_seed: u64) -> CriterionResult {
    timed(6, "convex, decreasing in t", 60, || {
        let mut rows = Vec::new();
        let mut pass = true;
        let mut worst: f64 = 0.0;
        for spec in pde_diffusions() {
            for payoff in [Payoff::call(0.0), Payoff::new(PayoffShape::Softplus)] {
                let f = shape_surface(&spec, &payoff)?;
                let convex = check_all_times(&f, |g, i| check_convex(g, i, SHAPE_TOL))?;
                let decreasing = check_time_decreasing(&f, SHAPE_TOL, None)?;
                pass &= convex.pass && decreasing.pass;
                worst = worst.max(convex.worst).max(decreasing.worst);
                rows.push(json!({
                    "process": spec.name,
                    "payoff": payoff.shape.name(),
                    "convex": convex,
                    "time_decreasing": decreasing,
                }));
            }
        }
        // negative controls
        let bm = ProcessSpec::brownian();
        let concave = shape_surface(&bm, &Payoff::new(PayoffShape::NegCall { strike: 0.0 }))?;
        let concave_r = check_all_times(&concave, |g, i| check_convex(g, i, SHAPE_TOL))?;
        let rising = GridFunction::from_fn(
            concave.tgrid().clone(),
            concave.xgrid().clone(),
            Extension { lo_slope: 0.0, hi_slope: 0.0 },
            |t, _| t,
        )?;
        let rising_r = check_time_decreasing(&rising, SHAPE_TOL, None)?;
        let controls_fail = !concave_r.pass && !rising_r.pass;
        pass &= controls_fail;
        let summary = format!(
            "{} surfaces, worst violation {worst:.2e}; negative controls fail: {controls_fail}",
            rows.len()
        );
        Ok((pass, summary, json!({ "surfaces": rows, "concave": concave_r, "rising": rising_r })))
    })
}

fn copies(spec: &ProcessSpec, grid: &TimeGrid, n: usize, seed: u64) -> Result<(PathBundle, PathBundle)> {
    let cfg = SimConfig::default();
    let a = generate_paths_with(spec, grid, n, seed, &cfg.with_purpose(Purpose::CopyA))?;
    let b = generate_paths_with(spec, grid, n, seed, &cfg.with_purpose(Purpose::CopyB))?;
    Ok((a, b))
}

/// Horizon used for path experiments: the counterexample runs past `t = 1`.
fn path_horizon(spec: &ProcessSpec) -> f64 {
    if spec.kind == ProcessKind::Counterexample {
        2.0
    } else {
        1.0
    }
}

pub fn criterion_7(seed: u64) -> CriterionResult {
    timed(7, "crossing without touching", 300, || {
        let mut rows = Vec::new();
        let mut pass = true;
        let mut parts = Vec::new();
        for (k, spec) in catalog().into_iter().enumerate() {
            let horizon = path_horizon(&spec);
            let grid = TimeGrid::uniform(horizon, 200)?;
            let s = sub_seed(seed, 70 + k as u64);
            let (a, b) = copies(&spec, &grid, 10_000, s)?;
            let scan = cross_without_touch_scan(&a, &b, 0.0, horizon)?;
            let support_bundle = generate_paths(&spec, &grid, 10_000, s ^ 0x5eed)?;
            let support = marginal_support(&support_bundle, 0.05, 5)?;
            let jumps = jump_past_support_scan(&a, &support)?;
            let expect_zero = spec.is_almost_continuous();
            let ok = if expect_zero {
                scan.violations == 0 && jumps.is_empty()
            } else {
                scan.violations > 0 && !jumps.is_empty()
            };
            pass &= ok;
            parts.push(format!("{} {}/{}", spec.name, scan.violations, jumps.len()));
            rows.push(json!({
                "process": spec.name,
                "pairs": scan.pairs,
                "violations": scan.violations,
                "touch_pairs": scan.touch_pairs,
                "jumps": a.total_jumps(),
                "jump_past_support": jumps.len(),
            }));
        }
        Ok((pass, format!("crossings/jump-past per process: {}", parts.join(", ")), json!(rows)))
    })
}

pub fn criterion_8(seed: u64) -> CriterionResult {
    timed(8, "three-copy convexity", 120, || {
        let spec = ProcessSpec::brownian();
        let h = shape_surface(&spec, &Payoff::call(0.0))?;
        let r = three_copy_convexity_coupling(&spec, &h, (-1.0, 0.0, 1.0), 0.0, 100_000, sub_seed(seed, 8))?;
        let share = r.touches_within_tol as f64 / r.touched.max(1) as f64;
        let summary = format!(
            "mean M = {:.4e} (SE {:.1e}); {:.2}% of {} touches within tolerance",
            r.m_stopped.mean,
            r.m_stopped.se,
            100.0 * share,
            r.touched
        );
        Ok((r.pass, summary, serde_json::to_value(&r)?))
    })
}

pub fn criterion_9(seed: u64) -> CriterionResult {
    timed(9, "paths inside support", 120, || {
        let mut rows = Vec::new();
        let mut pass = true;
        let mut parts = Vec::new();
        for (k, spec) in catalog().into_iter().enumerate() {
            let grid = TimeGrid::uniform(path_horizon(&spec), 100)?;
            let s = sub_seed(seed, 90 + k as u64);
            let fit = generate_paths(&spec, &grid, 10_000, s)?;
            let test = generate_paths(&spec, &grid, 10_000, s ^ 0x0005_a3b1e)?;
            let support = marginal_support(&fit, 0.05, 5)?;
            let c = paths_in_support_check(&test, &support, 2)?;
            let p = support.declared_tail_mass();
            let bound = c.bound(p);
            let ok = c.fraction <= bound;
            pass &= ok;
            parts.push(format!("{} {:.1e}<={:.1e}", spec.name, c.fraction, bound));
            rows.push(json!({
                "process": spec.name,
                "samples": c.samples,
                "violations": c.violations,
                "fraction": c.fraction,
                "declared_tail_mass": p,
                "bound": bound,
            }));
        }
        Ok((pass, parts.join(", "), json!(rows)))
    })
}

pub fn criterion_10(seed: u64) -> CriterionResult {
    timed(10, "S_ab on the counterexample", 60, || {
        let grid = TimeGrid::new(vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.1, 1.2])?;
        let bundle = generate_paths(&by_name("counterexample")?, &grid, 10_000, sub_seed(seed, 10))?;
        let times = s_ab_set(&bundle, -0.5, 0.5, None)?;
        let has_one = times.contains(&1.0);
        let stray: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0 && t <= 1.2 && t != 1.0).collect();
        let pass = has_one && stray.is_empty();
        let summary = format!("S_ab times {times:?}");
        Ok((pass, summary, json!({ "times": times })))
    })
}

type Criterion = fn(u64) -> CriterionResult;

pub const CRITERIA: [Criterion; 10] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
];

/// Re-run criteria 1-10 and compare their outputs with `first`.
pub fn criterion_11(seed: u64, first: &[CriterionResult]) -> CriterionResult {
    timed(11, "determinism", 600, || {
        let mut same = Vec::new();
        for (run, prev) in CRITERIA.iter().zip(first) {
            let again = run(seed);
            same.push(again.output == prev.output);
        }
        let pass = same.len() == CRITERIA.len() && same.iter().all(|&b| b);
        let summary = format!("{}/{} criteria byte-identical on re-run", same.iter().filter(|&&b| b).count(), CRITERIA.len());
        Ok((pass, summary, json!(same)))
    })
}

/// Run every criterion; results in order 1..=11.
pub fn run_all(seed: u64, mut on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let mut results = Vec::new();
    for run in CRITERIA {
        let r = run(seed);
        on_result(&r);
        results.push(r);
    }
    let det = criterion_11(seed, &results);
    on_result(&det);
    results.push(det);
    results
}
