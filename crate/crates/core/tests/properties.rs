use mshape_core::condexp::{solve_pde_from, working_grids, PdeConfig};
use mshape_core::rng::{Purpose, Stream};
use mshape_core::shape::{check_convex, check_monotone};
use mshape_core::support::marginal_support;
use mshape_core::{generate_paths, ProcessSpec, TimeGrid};
use proptest::prelude::*;
use rand::RngCore;

fn small_grids() -> (TimeGrid, mshape_core::SpaceGrid) {
    working_grids(&ProcessSpec::brownian(), 1.0, 60, 80, 6.0).unwrap()
}

fn terminal(xs: &[f64], a: f64, b: f64, strike: f64) -> Vec<f64> {
    xs.iter().map(|&x| a * (x - strike).max(0.0) + b).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pde_commutes_with_affine_maps(a in 0.1f64..3.0, b in -5.0f64..5.0, strike in -1.0f64..1.0) {
        let spec = ProcessSpec::brownian();
        let (tg, xg) = small_grids();
        let cfg = PdeConfig::default();
        let xs = xg.points();
        let base = solve_pde_from(&spec, &terminal(&xs, 1.0, 0.0, strike), &tg, &xg, Some((0.0, 1.0)), &cfg).unwrap();
        let mapped = solve_pde_from(&spec, &terminal(&xs, a, b, strike), &tg, &xg, Some((0.0, a)), &cfg).unwrap();
        for (u, v) in base.values().iter().zip(mapped.values()) {
            prop_assert!((a * u + b - v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn shape_reports_ignore_added_constants(c in -100.0f64..100.0, i in 0usize..60) {
        let spec = ProcessSpec::brownian();
        let (tg, xg) = small_grids();
        let cfg = PdeConfig::default();
        let xs = xg.points();
        let f = solve_pde_from(&spec, &terminal(&xs, 1.0, 0.0, 0.0), &tg, &xg, Some((0.0, 1.0)), &cfg).unwrap();
        let g = f.map(|_, _, v| v + c).unwrap();
        let (m0, m1) = (check_monotone(&f, i, 1e-6).unwrap(), check_monotone(&g, i, 1e-6).unwrap());
        let (c0, c1) = (check_convex(&f, i, 1e-6).unwrap(), check_convex(&g, i, 1e-6).unwrap());
        prop_assert_eq!(m0.pass, m1.pass);
        prop_assert_eq!(c0.pass, c1.pass);
        prop_assert!((m0.worst - m1.worst).abs() <= 1e-9 * (1.0 + c.abs()));
    }

    #[test]
    fn streams_are_reproducible_and_purpose_separated(seed in any::<u64>(), index in any::<u64>()) {
        let mut a = Stream::new(seed, Purpose::Path, index);
        let mut b = Stream::new(seed, Purpose::Path, index);
        let mut c = Stream::new(seed, Purpose::Restart, index);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        prop_assert_eq!(&xa, &xb);
        prop_assert_ne!(&xa, &xc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn support_grows_with_sample_size(seed in any::<u64>(), n in 200usize..2000) {
        let spec = ProcessSpec::brownian();
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let small = generate_paths(&spec, &grid, n, seed).unwrap();
        let large = generate_paths(&spec, &grid, 2 * n, seed).unwrap();
        for k in 0..n {
            prop_assert_eq!(small.path(k), large.path(k));
        }
        let s_small = marginal_support(&small, 0.1, 5).unwrap();
        let s_large = marginal_support(&large, 0.1, 5).unwrap();
        for i in 0..grid.len() {
            for iv in s_small.slice(i) {
                prop_assert!(s_large.slice(i).iter().any(|w| w.lo <= iv.lo && iv.hi <= w.hi));
            }
        }
    }

    #[test]
    fn bundles_are_martingales_in_mean(seed in any::<u64>()) {
        for spec in mshape_core::catalog() {
            let grid = TimeGrid::uniform(if spec.name == "counterexample" { 2.0 } else { 1.0 }, 20).unwrap();
            let b = generate_paths(&spec, &grid, 4000, seed).unwrap();
            let xt = b.terminal();
            let m = xt.iter().sum::<f64>() / xt.len() as f64;
            let v = xt.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xt.len() - 1) as f64;
            let se = (v / xt.len() as f64).sqrt();
            prop_assert!((m - spec.x0).abs() <= 5.0 * se + 1e-12, "{} mean {m} se {se}", spec.name);
        }
    }
}

#[test]
fn time_grids_reject_disorder() {
    assert!(TimeGrid::new(vec![0.0, 0.5, 0.5]).is_err());
    assert!(TimeGrid::new(vec![0.0, 0.7, 0.3]).is_err());
    assert!(TimeGrid::new(vec![-0.1, 0.5]).is_err());
}
