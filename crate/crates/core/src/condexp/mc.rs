//! Monte Carlo estimates of `E[g(X_T) | X_t = x]` by restarting the process.

use crate::error::{invalid, Result};
use crate::model::{Payoff, ProcessSpec};
use crate::rng::Purpose;
use crate::simulate::{restart_terminals, SimConfig};
use crate::stats::MeanSe;

/// Mean of `g(X_T)` over `n_paths` copies started at `X_t = x`, with its
/// standard error.
pub fn mc_condexp(spec: &ProcessSpec, payoff: &Payoff, t: f64, x: f64, horizon: f64, n_paths: usize, seed: u64) -> Result<MeanSe> {
    if n_paths < 2 {
        return Err(invalid("need at least two paths for a standard error"));
    }
    if !(t < horizon) || !t.is_finite() || !x.is_finite() || t < 0.0 {
        return Err(invalid(format!("need 0 <= t < T, got t = {t}, T = {horizon}, x = {x}")));
    }
    let cfg = SimConfig::default().with_purpose(Purpose::Restart);
    let ends = restart_terminals(spec, t, x, horizon, n_paths, seed, &cfg)?;
    let gs: Vec<f64> = ends.into_iter().map(|v| payoff.eval(v)).collect();
    Ok(MeanSe::of(&gs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condexp::{oracle_bm, oracle_poisson, OracleKind};
    use crate::model::catalog;

    #[test]
    fn constant_payoff_is_exact() {
        for spec in catalog() {
            let r = mc_condexp(&spec, &Payoff::constant(2.5), 0.2, 0.1, 1.5, 200, 3).unwrap();
            assert_eq!(r.mean, 2.5, "{}", spec.name);
            assert_eq!(r.se, 0.0);
        }
    }

    #[test]
    fn too_few_paths_rejected() {
        assert!(mc_condexp(&ProcessSpec::brownian(), &Payoff::identity(), 0.0, 0.0, 1.0, 1, 0).is_err());
        assert!(mc_condexp(&ProcessSpec::brownian(), &Payoff::identity(), 1.0, 0.0, 1.0, 10, 0).is_err());
    }

    #[test]
    fn brownian_call_matches_bachelier() {
        let r = mc_condexp(&ProcessSpec::brownian(), &Payoff::call(0.0), 0.0, 0.0, 1.0, 200_000, 11).unwrap();
        let exact = oracle_bm(OracleKind::Call { strike: 0.0 }, 0.0, 0.0, 1.0).unwrap();
        assert!(r.within(exact, 3.0, 0.0), "{r:?} vs {exact}");
    }

    #[test]
    fn poisson_call_matches_series() {
        let spec = ProcessSpec::compensated_poisson(1.0).unwrap();
        let r = mc_condexp(&spec, &Payoff::call(0.0), 0.0, 0.0, 1.0, 200_000, 12).unwrap();
        let exact = oracle_poisson(OracleKind::Call { strike: 0.0 }, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(r.within(exact, 3.0, 0.0), "{r:?} vs {exact}");
    }

    #[test]
    fn counterexample_restart_matches_closed_form() {
        let spec = ProcessSpec::counterexample();
        let r = mc_condexp(&spec, &Payoff::square(), 0.5, 0.3, 2.0, 20_000, 13).unwrap();
        let exact = crate::model::counterexample_f(0.5, 0.3, 2.0).unwrap();
        assert!(r.within(exact, 3.0, 0.0), "{r:?} vs {exact}");
    }
}
