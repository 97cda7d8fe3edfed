// PDE surfaces against Gaussian expectations computed by composite Simpson
// quadrature, and Poisson surfaces against direct summation.

use mshape_core::condexp::{mc_condexp, solve_pde, working_grids};
use mshape_core::{Payoff, PayoffShape, ProcessSpec};

fn gauss_expect(g: impl Fn(f64) -> f64, x: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return g(x);
    }
    let n = 4000;
    let (a, b) = (-10.0, 10.0);
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for k in 0..=n {
        let z = a + k as f64 * h;
        let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(x + sd * z) * (-0.5 * z * z).exp();
    }
    acc * h / 3.0 / (2.0 * std::f64::consts::PI).sqrt()
}

fn max_error_against_quadrature(sigma: f64, payoff: Payoff) -> f64 {
    let spec = ProcessSpec::constant_vol(sigma).unwrap();
    let (tg, xg) = working_grids(&spec, 1.0, 400, 400, 8.0).unwrap();
    let f = solve_pde(&spec, &payoff, &tg, &xg).unwrap();
    let mut worst: f64 = 0.0;
    for (i, &t) in tg.times().iter().enumerate().step_by(40) {
        for j in (100..=300).step_by(10) {
            let x = xg.point(j);
            let want = gauss_expect(|y| payoff.eval(y), x, sigma * (1.0 - t).sqrt());
            worst = worst.max((f.value(i, j) - want).abs());
        }
    }
    worst
}

#[test]
fn tanh_surface_matches_quadrature() {
    let e = max_error_against_quadrature(1.0, Payoff::new(PayoffShape::TanhRamp));
    assert!(e < 1e-3, "max error {e}");
}

#[test]
fn softplus_surface_matches_quadrature_at_low_vol() {
    let e = max_error_against_quadrature(0.4, Payoff::new(PayoffShape::Softplus));
    assert!(e < 1e-3, "max error {e}");
}

#[test]
fn poisson_restart_matches_direct_sum() {
    let spec = ProcessSpec::compensated_poisson(1.0).unwrap();
    let payoff = Payoff::new(PayoffShape::TanhRamp);
    let (t, x, horizon): (f64, f64, f64) = (0.25, 0.3, 1.0);
    let mu = horizon - t;
    let mut want = 0.0;
    let mut p = (-mu).exp();
    for j in 0..60 {
        want += p * payoff.eval(x + j as f64 - mu);
        p *= mu / (j + 1) as f64;
    }
    let got = mc_condexp(&spec, &payoff, t, x, horizon, 200_000, 11).unwrap();
    assert!((got.mean - want).abs() <= 4.0 * got.se, "{} vs {want} (se {})", got.mean, got.se);
}
