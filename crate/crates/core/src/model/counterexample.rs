//! The time-changed Brownian motion `X_t = B_{t/(1-t)}` stopped on leaving
//! `(-1, 1)` and restarted as a Brownian motion after `t = 1`. At `t = 1` its
//! law sits on the two points `{-1, 1}`, which makes `f` for `g(x) = x^2`
//! discontinuous across `{1} x (-1, 1)` while remaining continuous on the
//! marginal support.

use super::Interval;
use crate::error::{invalid, Result};

/// `E[X_T^2 | X_t = x]`, extended off the support as `x^2 + T - 1` for
/// `t < 1, |x| > 1`.
pub fn counterexample_f(t: f64, x: f64, horizon: f64) -> Result<f64> {
    if !(horizon > 1.0) {
        return Err(invalid(format!("horizon must exceed 1, got {horizon}")));
    }
    if !(0.0..=horizon).contains(&t) {
        return Err(invalid(format!("t = {t} outside [0, {horizon}]")));
    }
    Ok(if t >= 1.0 {
        x * x + horizon - t
    } else if x.abs() <= 1.0 {
        horizon
    } else {
        x * x + horizon - 1.0
    })
}

pub fn counterexample_sigma(t: f64, x: f64) -> f64 {
    if t >= 1.0 {
        1.0
    } else if (0.0..1.0).contains(&t) && x > -1.0 && x < 1.0 {
        1.0 / (1.0 - t)
    } else {
        0.0
    }
}

/// Support of `X_t`. For `t > 1` the support is the whole line, reported as
/// the `working` window.
pub fn counterexample_msupport(t: f64, working: (f64, f64)) -> Vec<Interval> {
    if t <= 0.0 {
        vec![Interval::point(0.0)]
    } else if t < 1.0 {
        vec![Interval::new(-1.0, 1.0)]
    } else if t == 1.0 {
        vec![Interval::point(-1.0), Interval::point(1.0)]
    } else {
        vec![Interval::new(working.0, working.1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_branches() {
        assert_eq!(counterexample_f(1.5, 2.0, 2.0).unwrap(), 4.5);
        assert_eq!(counterexample_f(0.5, 0.3, 2.0).unwrap(), 2.0);
        assert_eq!(counterexample_f(0.5, 1.5, 2.0).unwrap(), 3.25);
        assert_eq!(counterexample_f(1.0, 0.5, 2.0).unwrap(), 1.25);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(counterexample_f(2.5, 0.0, 2.0).is_err());
        assert!(counterexample_f(0.5, 0.0, 1.0).is_err());
        assert!(counterexample_f(-0.1, 0.0, 2.0).is_err());
    }

    #[test]
    fn sigma_branches() {
        assert_eq!(counterexample_sigma(0.5, 0.0), 2.0);
        assert_eq!(counterexample_sigma(2.0, 5.0), 1.0);
        assert_eq!(counterexample_sigma(0.5, 1.5), 0.0);
        // the indicator is on the open interval
        assert_eq!(counterexample_sigma(0.5, 1.0), 0.0);
        assert_eq!(counterexample_sigma(0.5, -1.0), 0.0);
        assert_eq!(counterexample_sigma(1.0, 0.0), 1.0);
    }

    #[test]
    fn support_regimes() {
        let w = (-9.0, 9.0);
        assert_eq!(counterexample_msupport(0.0, w), vec![Interval::point(0.0)]);
        assert_eq!(counterexample_msupport(0.5, w), vec![Interval::new(-1.0, 1.0)]);
        assert_eq!(
            counterexample_msupport(1.0, w),
            vec![Interval::point(-1.0), Interval::point(1.0)]
        );
        assert_eq!(counterexample_msupport(1.5, w), vec![Interval::new(-9.0, 9.0)]);
    }

    #[test]
    fn convex_in_x_and_decreasing_in_t() {
        let horizon = 2.0;
        let xs: Vec<f64> = (-40..=40).map(|j| j as f64 * 0.05).collect();
        let ts: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        for &t in &ts {
            let f: Vec<f64> = xs.iter().map(|&x| counterexample_f(t, x, horizon).unwrap()).collect();
            for w in f.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12, "t={t}");
            }
        }
        for &x in &xs {
            for w in ts.windows(2) {
                let a = counterexample_f(w[0], x, horizon).unwrap();
                let b = counterexample_f(w[1], x, horizon).unwrap();
                assert!(a >= b - 1e-12, "x={x} t={}", w[0]);
            }
        }
    }

    #[test]
    fn jump_across_t_equals_one() {
        let horizon = 2.0;
        for &x in &[-0.9, -0.5, 0.0, 0.3, 0.8] {
            let before = counterexample_f(1.0 - 1e-9, x, horizon).unwrap();
            let at = counterexample_f(1.0, x, horizon).unwrap();
            assert!(((before - at) - (1.0 - x * x)).abs() < 1e-12);
        }
        for &x in &[-1.0, 1.0] {
            let before = counterexample_f(1.0 - 1e-9, x, horizon).unwrap();
            let at = counterexample_f(1.0, x, horizon).unwrap();
            assert!((before - at).abs() < 1e-12);
        }
    }
}
