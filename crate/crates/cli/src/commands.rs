use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mshape_core::acceptance::{counterexample_run, run_all, CounterexampleSetup};
use mshape_core::condexp::{cross_validate, solve_pde_with, working_grids, PdeConfig};
use mshape_core::couple::{approach_summary, cross_without_touch_scan};
use mshape_core::model::by_name;
use mshape_core::rng::Purpose;
use mshape_core::shape::{
    check_all_times, check_convex, check_lipschitz, check_monotone, check_time_decreasing, ShapeReport,
};
use mshape_core::simulate::{generate_paths_with, martingale_drift_check, write_jumps_csv, write_paths_csv};
use mshape_core::support::{jump_past_support_scan, marginal_support, paths_in_support_check};
use mshape_core::{generate_paths, GridFunction, Payoff, ProcessSpec, Result, SimConfig, TimeGrid};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::Kind;

/// Binwidths of slack allowed by the containment check.
const CONTAINMENT_SLACK: usize = 2;
const APPROACH_NS: [u32; 6] = [1, 2, 4, 8, 16, 32];

pub fn execute(cfg: &RunConfig) -> Result<bool> {
    let out = PathBuf::from(&cfg.out);
    fs::create_dir_all(&out)?;
    match cfg.subcommand {
        Kind::Simulate => simulate(cfg, &out),
        Kind::Condexp => condexp(cfg, &out),
        Kind::Verify => verify(cfg, &out),
        Kind::Support => support(cfg, &out),
        Kind::Couple => couple(cfg, &out),
        Kind::Counterexample => counterexample(cfg, &out),
        Kind::All => all(cfg, &out),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, cfg: &RunConfig, body: serde_json::Value) -> Result<()> {
    let mut doc = json!({ "config": cfg });
    if let (Some(map), serde_json::Value::Object(extra)) = (doc.as_object_mut(), body) {
        map.extend(extra);
    }
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn payoff(cfg: &RunConfig) -> Result<Payoff> {
    let slopes = cfg.k.zip(cfg.big_k);
    let p = Payoff::from_name(&cfg.payoff, cfg.strike, slopes)?;
    match (cfg.k, cfg.big_k) {
        (None, None) => Ok(p),
        (k, big_k) => {
            let (k0, big_k0) = p.lipschitz.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            p.with_lipschitz(k.unwrap_or(k0), big_k.unwrap_or(big_k0))
        }
    }
}

fn path_grid(cfg: &RunConfig) -> Result<TimeGrid> {
    TimeGrid::uniform(cfg.horizon, cfg.nt)
}

fn surface(cfg: &RunConfig, spec: &ProcessSpec, payoff: &Payoff) -> Result<GridFunction> {
    let (tg, xg) = working_grids(spec, cfg.horizon, cfg.nt, cfg.nx, cfg.xpad)?;
    let pde = PdeConfig { theta: cfg.theta, ..PdeConfig::default() };
    solve_pde_with(spec, payoff, &tg, &xg, &pde)
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let spec = by_name(&cfg.process)?;
    let grid = path_grid(cfg)?;
    let bundle = generate_paths(&spec, &grid, cfg.paths, cfg.seed)?;
    let header = cfg.header();
    write_paths_csv(&bundle, create(out, "paths.csv")?, &header)?;
    write_jumps_csv(&bundle, create(out, "jumps.csv")?, &header)?;
    let times = grid.times();
    let n = times.len() - 1;
    let mut at: Vec<f64> = [n / 4, n / 2, n].iter().map(|&i| times[i]).collect();
    at.dedup();
    let drift = martingale_drift_check(&bundle, &at)?;
    let pass = drift.iter().all(|d| d.pass);
    for d in &drift {
        println!("drift t={:<8} mean {:+.5} se {:.5}  {}", d.time, d.mean, d.se, verdict(d.pass));
    }
    println!("{} paths, {} jumps written to {}", bundle.n_paths(), bundle.total_jumps(), out.display());
    write_json(out, "drift.json", cfg, json!({ "pass": pass, "drift": drift }))?;
    Ok(pass)
}

fn condexp(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let spec = by_name(&cfg.process)?;
    let payoff = payoff(cfg)?;
    let f = surface(cfg, &spec, &payoff)?;
    f.write_csv(create(out, "surface.csv")?, &cfg.header())?;

    let tg = f.tgrid();
    let xg = f.xgrid();
    let points: Vec<(f64, f64)> = [0.0, 0.25, 0.5]
        .iter()
        .flat_map(|q| {
            let t = tg.times()[tg.nearest_index(tg.start() + q * (tg.horizon() - tg.start()))];
            [-0.5, 0.0, 0.5].map(|dx| {
                let j = ((spec.x0 + dx - xg.lo()) / xg.step()).round().clamp(0.0, xg.intervals() as f64) as usize;
                (t, xg.point(j))
            })
        })
        .collect();
    let report = cross_validate(&f, &spec, &payoff, &points, cfg.paths, cfg.seed, cfg.tol)?;
    for p in &report.points {
        println!(
            "t={:<6} x={:+.3}  pde {:.6}  mc {:.6} (se {:.1e})  {}",
            p.t,
            p.x,
            p.pde,
            p.mc,
            p.se,
            verdict(p.pass)
        );
    }
    write_json(out, "condexp.json", cfg, json!({ "pass": report.pass, "cross_validation": report }))?;
    Ok(report.pass)
}

/// The checks the payoff metadata calls for.
fn shape_reports(f: &GridFunction, payoff: &Payoff, tol: f64) -> Result<Vec<ShapeReport>> {
    let mut reports = Vec::new();
    if payoff.monotone == Some(true) {
        reports.push(check_all_times(f, |g, i| check_monotone(g, i, tol))?);
    }
    if let Some((k, big_k)) = payoff.lipschitz {
        reports.push(check_all_times(f, |g, i| check_lipschitz(g, i, k, big_k, tol))?);
    }
    if payoff.convex == Some(true) {
        reports.push(check_all_times(f, |g, i| check_convex(g, i, tol))?);
        reports.push(check_time_decreasing(f, tol, None)?);
    }
    Ok(reports)
}

fn verify(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let spec = by_name(&cfg.process)?;
    let payoff = payoff(cfg)?;
    let f = surface(cfg, &spec, &payoff)?;
    let reports = shape_reports(&f, &payoff, cfg.tol)?;
    let pass = reports.iter().all(|r| r.pass);
    for r in &reports {
        println!("{:<16} worst {:.3e} (tol {:.1e})  {}", r.property, r.worst, r.tol, verdict(r.pass));
    }
    if reports.is_empty() {
        println!("payoff {} declares no shape properties; nothing to check", payoff.shape.name());
    }
    write_json(out, "reports.json", cfg, json!({ "pass": pass, "reports": reports }))?;
    Ok(pass)
}

fn support(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let spec = by_name(&cfg.process)?;
    let grid = path_grid(cfg)?;
    let fit = generate_paths(&spec, &grid, cfg.paths, cfg.seed)?;
    let test = generate_paths_with(&spec, &grid, cfg.paths, cfg.seed, &SimConfig::default().with_purpose(Purpose::Restart))?;
    let est = marginal_support(&fit, cfg.binwidth, cfg.min_count)?;
    est.write_csv(create(out, "support.csv")?, &cfg.header())?;
    let containment = paths_in_support_check(&test, &est, CONTAINMENT_SLACK)?;
    let tail = est.declared_tail_mass();
    let bound = containment.bound(tail);
    let pass = containment.fraction <= bound;
    let jumps = jump_past_support_scan(&test, &est)?;
    println!(
        "out-of-sample violations {}/{} = {:.2e}, bound {:.2e}  {}",
        containment.violations,
        containment.samples,
        containment.fraction,
        bound,
        verdict(pass)
    );
    println!("jumps past the support: {}", jumps.len());
    write_json(
        out,
        "support.json",
        cfg,
        json!({
            "pass": pass,
            "declared_tail_mass": tail,
            "bound": bound,
            "containment": containment,
            "jump_past_support": jumps.len(),
        }),
    )?;
    Ok(pass)
}

#[derive(Serialize)]
struct CoupleSummary {
    pairs: usize,
    violations: usize,
    touch_pairs: usize,
    jump_past_support: usize,
}

fn couple(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let spec = by_name(&cfg.process)?;
    let grid = path_grid(cfg)?;
    let sim = SimConfig::default();
    let ys = generate_paths_with(&spec, &grid, cfg.pairs, cfg.seed, &sim.with_purpose(Purpose::CopyA))?;
    let upper = spec.clone().with_x0(spec.x0 + 1.0);
    let zs = generate_paths_with(&upper, &grid, cfg.pairs, cfg.seed, &sim.with_purpose(Purpose::CopyB))?;
    let scan = cross_without_touch_scan(&ys, &zs, grid.start(), grid.horizon())?;
    let fit = generate_paths(&spec, &grid, cfg.paths, cfg.seed)?;
    let est = marginal_support(&fit, cfg.binwidth, cfg.min_count)?;
    let jumps = jump_past_support_scan(&ys, &est)?;
    let approach = approach_summary(&ys, &zs, grid.start(), &APPROACH_NS)?;
    let pass = scan.violations == 0;
    println!(
        "{} pairs: {} crossed without touching, {} touched  {}",
        scan.pairs,
        scan.violations,
        scan.touch_pairs,
        verdict(pass)
    );
    println!("jumps past the support: {}", jumps.len());
    println!("pairs meeting before T: {} ({} at a jump)", approach.hit, approach.jump_hits);
    if cfg.events {
        let mut w = create(out, "events.csv")?;
        writeln!(w, "# {}", cfg.header())?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["pair", "time", "pre_gap", "post_gap"])?;
        for e in &scan.events {
            csv.serialize((e.pair, e.time, e.pre_gap, e.post_gap))?;
        }
        csv.flush()?;
    }
    let summary = CoupleSummary {
        pairs: scan.pairs,
        violations: scan.violations,
        touch_pairs: scan.touch_pairs,
        jump_past_support: jumps.len(),
    };
    write_json(out, "couple.json", cfg, json!({ "pass": pass, "crossing": summary, "approach": approach }))?;
    Ok(pass)
}

fn counterexample(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let setup = CounterexampleSetup {
        horizon: cfg.horizon,
        nt: cfg.nt,
        nx: cfg.nx,
        n_paths: cfg.paths,
        binwidth: cfg.binwidth,
        min_count: cfg.min_count,
        tol: cfg.tol,
        ..CounterexampleSetup::default()
    };
    let run = counterexample_run(&setup, cfg.seed)?;
    let header = cfg.header();
    run.surface.write_csv(create(out, "surface.csv")?, &header)?;
    run.support.write_csv(create(out, "support.csv")?, &header)?;
    let pass = run.pass();
    println!(
        "continuity on the estimated support: omega {:.3e} (tol {})  {}",
        run.on_support.worst,
        run.on_support.tol,
        verdict(run.on_support.pass)
    );
    println!(
        "full lattice: omega {:.3} at {}, jump of ~1 at t = 1 expected  {}",
        run.full_lattice.worst,
        serde_json::to_string(&run.full_lattice.location)?,
        verdict(run.full_lattice_jump_ok())
    );
    write_json(
        out,
        "report.json",
        cfg,
        json!({ "pass": pass, "on_support": run.on_support, "full_lattice": run.full_lattice }),
    )?;
    Ok(pass)
}

fn all(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let results = run_all(cfg.seed, |r| println!("{}", r.line()));
    let pass = results.iter().all(|r| r.pass);
    let rows: Vec<serde_json::Value> = results
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "name": r.name,
                "pass": r.pass,
                "summary": r.summary,
                "output": serde_json::from_str::<serde_json::Value>(&r.output).unwrap_or(serde_json::Value::Null),
            })
        })
        .collect();
    write_json(out, "acceptance.json", cfg, json!({ "pass": pass, "criteria": rows }))?;
    Ok(pass)
}
