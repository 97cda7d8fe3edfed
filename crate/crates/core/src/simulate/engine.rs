//! Single-path simulation from an arbitrary restart point `(t, x)`.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::{JumpEvent, SimConfig};
use crate::error::{invalid, Result};
use crate::model::{ProcessKind, ProcessSpec};
use crate::rng::Stream;

/// Simulate one path observed at `times` (first entry is the start time,
/// where the path equals `x_start`). Returns the observed values and the
/// jump events, ordered by time.
pub(crate) fn simulate_path(
    spec: &ProcessSpec,
    times: &[f64],
    x_start: f64,
    cfg: &SimConfig,
    rng: &mut Stream,
) -> Result<(Vec<f64>, Vec<JumpEvent>)> {
    if times.is_empty() {
        return Err(invalid("no observation times"));
    }
    match spec.kind {
        ProcessKind::Counterexample => Ok((counterexample_path(times, x_start, cfg, rng)?, Vec::new())),
        ProcessKind::CompensatedPoisson => Ok(poisson_path(spec, times, x_start, rng)),
        ProcessKind::Diffusion | ProcessKind::JumpDiffusion => jump_diffusion_path(spec, times, x_start, cfg, rng),
    }
}

fn exp_clock(rate: f64, rng: &mut Stream) -> f64 {
    Exp::new(rate).expect("positive rate").sample(rng)
}

/// Values are recomputed from the jump count so `X_t - x0 + lambda t` stays
/// an exact integer up to a single rounding.
fn poisson_path(spec: &ProcessSpec, times: &[f64], x_start: f64, rng: &mut Stream) -> (Vec<f64>, Vec<JumpEvent>) {
    let t0 = times[0];
    let drift = spec.drift();
    let jump = spec.jump_size;
    let at = |n: u64, t: f64| x_start + n as f64 * jump + drift * (t - t0);
    let mut out = Vec::with_capacity(times.len());
    let mut events = Vec::new();
    let mut count = 0u64;
    let mut next = t0 + exp_clock(spec.intensity, rng);
    out.push(x_start);
    for &t in &times[1..] {
        while next <= t {
            let left = at(count, next);
            count += 1;
            events.push(JumpEvent { time: next, left, right: at(count, next) });
            next += exp_clock(spec.intensity, rng);
        }
        out.push(at(count, t));
    }
    (out, events)
}

/// Euler-Maruyama with exact event insertion. Constant coefficients take a
/// single exact Gaussian step per observation interval.
fn jump_diffusion_path(
    spec: &ProcessSpec,
    times: &[f64],
    x_start: f64,
    cfg: &SimConfig,
    rng: &mut Stream,
) -> Result<(Vec<f64>, Vec<JumpEvent>)> {
    let horizon = times[times.len() - 1];
    let max_dt = cfg.max_dt.unwrap_or(horizon / 2000.0).max(f64::MIN_POSITIVE);
    let exact = spec.sigma.is_constant();
    let drift = spec.drift();
    let jumps = spec.has_jumps();

    let mut x = x_start;
    let mut t = times[0];
    let mut next_jump = if jumps { t + exp_clock(spec.intensity, rng) } else { f64::INFINITY };
    let mut out = Vec::with_capacity(times.len());
    let mut events = Vec::new();
    out.push(x);

    let advance = |x: &mut f64, t: f64, dt: f64, rng: &mut Stream| -> Result<()> {
        let s = spec.eval_sigma(t, *x)?;
        *x += drift * dt;
        if s > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            *x += s * dt.sqrt() * z;
        }
        Ok(())
    };

    for &target in &times[1..] {
        while t < target {
            let step_end = if exact { target } else { (t + max_dt).min(target) };
            if next_jump <= step_end {
                advance(&mut x, t, next_jump - t, rng)?;
                let left = x;
                x += spec.jump_size;
                events.push(JumpEvent { time: next_jump, left, right: x });
                t = next_jump;
                next_jump += exp_clock(spec.intensity, rng);
            } else {
                advance(&mut x, t, step_end - t, rng)?;
                t = step_end;
            }
        }
        out.push(x);
    }
    Ok((out, events))
}

enum Phase {
    /// Running `B` in its own clock `u = t/(1-t)` inside `(-1, 1)`.
    Absorbing { u: f64, b: f64 },
    /// Constant until `t = 1` (absorbed, or started outside `(-1, 1)`).
    Frozen(f64),
    /// Brownian motion after `t = 1`.
    Brownian { t: f64, x: f64 },
}

fn counterexample_path(times: &[f64], x_start: f64, cfg: &SimConfig, rng: &mut Stream) -> Result<Vec<f64>> {
    let du = cfg.counterexample_du;
    if !(du > 0.0) {
        return Err(invalid("counterexample clock step must be positive"));
    }
    let t0 = times[0];
    let mut phase = if t0 >= 1.0 {
        Phase::Brownian { t: t0, x: x_start }
    } else if x_start.abs() < 1.0 {
        Phase::Absorbing { u: t0 / (1.0 - t0), b: x_start }
    } else {
        Phase::Frozen(x_start)
    };

    let mut out = Vec::with_capacity(times.len());
    out.push(x_start);
    for &t in &times[1..] {
        if t < 1.0 {
            if let Phase::Absorbing { u, b } = phase {
                phase = run_clock(u, b, Some(t / (1.0 - t)), du, rng);
            }
        } else {
            if let Phase::Absorbing { u, b } = phase {
                phase = run_clock(u, b, None, du, rng);
            }
            if let Phase::Frozen(x) = phase {
                phase = Phase::Brownian { t: 1.0, x };
            }
            if let Phase::Brownian { t: from, x } = phase {
                let z: f64 = rng.sample(StandardNormal);
                phase = Phase::Brownian { t, x: x + (t - from).sqrt() * z };
            }
        }
        out.push(match phase {
            Phase::Absorbing { b, .. } => b,
            Phase::Frozen(x) | Phase::Brownian { x, .. } => x,
        });
    }
    Ok(out)
}

/// Advance `B` from clock `u` to `until` (or to absorption when `None`) in
/// steps of at most `du`, stopping at the first exit from `(-1, 1)`.
fn run_clock(mut u: f64, mut b: f64, until: Option<f64>, du: f64, rng: &mut Stream) -> Phase {
    loop {
        let step = match until {
            Some(end) if u >= end => return Phase::Absorbing { u, b },
            Some(end) => du.min(end - u),
            None => du,
        };
        let z: f64 = rng.sample(StandardNormal);
        let nb = b + step.sqrt() * z;
        if nb.abs() >= 1.0 {
            return Phase::Frozen(nb.signum());
        }
        u += step;
        b = nb;
    }
}
