//! Closed forms for Brownian motion and the compensated Poisson process.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{Payoff, PayoffShape};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OracleKind {
    Call { strike: f64 },
    Square,
    Identity,
}

impl OracleKind {
    pub fn from_payoff(p: &Payoff) -> Result<Self> {
        match p.shape {
            PayoffShape::Call { strike } => Ok(OracleKind::Call { strike }),
            PayoffShape::Square => Ok(OracleKind::Square),
            PayoffShape::Identity => Ok(OracleKind::Identity),
            other => Err(Error::Unsupported(format!("no closed form for payoff {}", other.name()))),
        }
    }
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `E[g(x + sigma (W_T - W_t))]` for unit-volatility Brownian motion.
pub fn oracle_bm(kind: OracleKind, t: f64, x: f64, horizon: f64) -> Result<f64> {
    oracle_bm_vol(kind, 1.0, t, x, horizon)
}

/// Bachelier prices with volatility `sigma`.
pub fn oracle_bm_vol(kind: OracleKind, sigma: f64, t: f64, x: f64, horizon: f64) -> Result<f64> {
    if t > horizon {
        return Err(invalid(format!("t = {t} after horizon {horizon}")));
    }
    let var = sigma * sigma * (horizon - t);
    Ok(match kind {
        OracleKind::Identity => x,
        OracleKind::Square => x * x + var,
        OracleKind::Call { strike } => {
            let s = var.sqrt();
            if s == 0.0 {
                (x - strike).max(0.0)
            } else {
                let d = (x - strike) / s;
                (x - strike) * norm_cdf(d) + s * norm_pdf(d)
            }
        }
    })
}

/// Conditional expectation for `X_T = x + N - lambda (T - t)` with
/// `N ~ Poisson(lambda (T - t))`; calls are summed past the mean until the
/// remaining probability mass (bounded by the current term) is below `1e-12`
/// and the current weighted term is negligible.
pub fn oracle_poisson(kind: OracleKind, intensity: f64, t: f64, x: f64, horizon: f64) -> Result<f64> {
    if t > horizon {
        return Err(invalid(format!("t = {t} after horizon {horizon}")));
    }
    let mu = intensity * (horizon - t);
    if !(0.0..=700.0).contains(&mu) {
        return Err(invalid(format!("Poisson mean {mu} outside the supported range")));
    }
    Ok(match kind {
        OracleKind::Identity => x,
        OracleKind::Square => x * x + mu,
        OracleKind::Call { strike } => {
            let mut p = (-mu).exp();
            let mut sum = 0.0;
            let mut j = 0u32;
            loop {
                sum += p * (x + j as f64 - mu - strike).max(0.0);
                let tail = p * mu / (j as f64 + 1.0 - mu).max(1.0);
                if j as f64 > mu + 1.0 && tail < 1e-12 && tail * (x.abs() + j as f64 + mu + strike.abs()) < 1e-16 {
                    break;
                }
                j += 1;
                p *= mu / j as f64;
            }
            sum
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_martingale() {
        assert_eq!(oracle_bm(OracleKind::Identity, 0.3, 1.7, 1.0).unwrap(), 1.7);
        assert_eq!(oracle_poisson(OracleKind::Identity, 1.0, 0.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn at_the_money_call_is_sd_times_density() {
        let v = oracle_bm(OracleKind::Call { strike: 0.0 }, 0.0, 0.0, 1.0).unwrap();
        assert!((v - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn square_adds_variance() {
        assert!((oracle_bm(OracleKind::Square, 0.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((oracle_poisson(OracleKind::Square, 2.0, 0.5, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn poisson_call_series() {
        // X_1 = N - 1: E[(N-1)_+] = E[N] - 1 + P(N = 0) = e^-1
        let v = oracle_poisson(OracleKind::Call { strike: 0.0 }, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn expired_call_is_payoff() {
        assert_eq!(oracle_bm(OracleKind::Call { strike: 1.0 }, 1.0, 3.0, 1.0).unwrap(), 2.0);
        assert!(oracle_bm(OracleKind::Identity, 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn unsupported_payoff() {
        let p = Payoff::new(PayoffShape::TanhRamp);
        assert!(matches!(OracleKind::from_payoff(&p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn cdf_symmetry() {
        for &x in &[0.0, 0.3, 1.7, 4.0] {
            assert!((norm_cdf(x) + norm_cdf(-x) - 1.0).abs() < 1e-15);
        }
        assert_eq!(norm_cdf(0.0), 0.5);
    }
}
