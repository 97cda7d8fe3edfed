use serde::{Deserialize, Serialize};

use super::counterexample::counterexample_sigma;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessKind {
    Diffusion,
    CompensatedPoisson,
    Counterexample,
    JumpDiffusion,
}

/// Diffusion coefficient family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Volatility {
    /// No diffusive part.
    Zero,
    Constant(f64),
    /// `base + amplitude * tanh(x)`.
    TanhSkew { base: f64, amplitude: f64 },
    /// `1/(1-t)` on `[0,1) x (-1,1)`, `1` for `t >= 1`, zero elsewhere.
    Counterexample,
}

impl Volatility {
    fn eval(&self, t: f64, x: f64) -> f64 {
        match *self {
            Volatility::Zero => 0.0,
            Volatility::Constant(s) => s,
            Volatility::TanhSkew { base, amplitude } => base + amplitude * x.tanh(),
            Volatility::Counterexample => counterexample_sigma(t, x),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Volatility::Zero | Volatility::Constant(_))
    }
}

/// A martingale process from the fixed catalog family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub name: String,
    pub kind: ProcessKind,
    pub sigma: Volatility,
    /// Jump intensity per unit time (Poisson and jump-diffusion kinds).
    pub intensity: f64,
    /// Signed jump size; always 1 for the compensated Poisson process.
    pub jump_size: f64,
    pub x0: f64,
    /// Whether the `-intensity * jump_size` drift is applied.
    pub compensated: bool,
}

pub const CATALOG_NAMES: [&str; 5] = ["bm", "boundedvol", "cpoisson", "counterexample", "jumpdiff"];

impl ProcessSpec {
    fn base(name: &str, kind: ProcessKind, sigma: Volatility) -> Self {
        Self {
            name: name.to_string(),
            kind,
            sigma,
            intensity: 0.0,
            jump_size: 0.0,
            x0: 0.0,
            compensated: true,
        }
    }

    pub fn brownian() -> Self {
        Self::base("bm", ProcessKind::Diffusion, Volatility::Constant(1.0))
    }

    pub fn constant_vol(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("volatility must be finite and non-negative, got {sigma}")));
        }
        let name = if sigma == 0.0 { "constant".to_string() } else { format!("bm-{sigma}") };
        let vol = if sigma == 0.0 { Volatility::Zero } else { Volatility::Constant(sigma) };
        Ok(Self { name, ..Self::base("", ProcessKind::Diffusion, vol) })
    }

    /// `sigma(t, x) = 0.2 + 0.1 tanh(x)`, bounded in `[0.1, 0.3]`.
    pub fn bounded_vol() -> Self {
        Self::base(
            "boundedvol",
            ProcessKind::Diffusion,
            Volatility::TanhSkew { base: 0.2, amplitude: 0.1 },
        )
    }

    pub fn compensated_poisson(intensity: f64) -> Result<Self> {
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(invalid(format!("intensity must be positive, got {intensity}")));
        }
        Ok(Self {
            intensity,
            jump_size: 1.0,
            ..Self::base("cpoisson", ProcessKind::CompensatedPoisson, Volatility::Zero)
        })
    }

    pub fn counterexample() -> Self {
        Self::base("counterexample", ProcessKind::Counterexample, Volatility::Counterexample)
    }

    pub fn jump_diffusion(sigma: f64, intensity: f64, jump_size: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("volatility must be finite and non-negative, got {sigma}")));
        }
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(invalid(format!("intensity must be positive, got {intensity}")));
        }
        if !(jump_size.is_finite() && jump_size != 0.0) {
            return Err(invalid(format!("jump size must be finite and nonzero, got {jump_size}")));
        }
        Ok(Self {
            intensity,
            jump_size,
            ..Self::base("jumpdiff", ProcessKind::JumpDiffusion, Volatility::Constant(sigma))
        })
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    /// Drops the jump compensator, leaving a process with drift
    /// `intensity * jump_size`. Only meaningful for jump kinds.
    pub fn uncompensated(mut self) -> Self {
        self.compensated = false;
        self.name.push_str("-raw");
        self
    }

    pub fn is_almost_continuous(&self) -> bool {
        self.kind != ProcessKind::JumpDiffusion
    }

    pub fn is_martingale(&self) -> bool {
        self.compensated || self.intensity == 0.0
    }

    pub fn has_jumps(&self) -> bool {
        matches!(self.kind, ProcessKind::CompensatedPoisson | ProcessKind::JumpDiffusion)
    }

    /// Drift of the process between jumps.
    pub fn drift(&self) -> f64 {
        if self.has_jumps() && self.compensated {
            -self.intensity * self.jump_size
        } else {
            0.0
        }
    }

    pub fn eval_sigma(&self, t: f64, x: f64) -> Result<f64> {
        eval_sigma(self, t, x)
    }

    /// Supremum of the diffusion coefficient over `[from, horizon] x R`;
    /// `None` when unbounded there.
    pub fn sigma_max(&self, from: f64, horizon: f64) -> Option<f64> {
        match self.sigma {
            Volatility::Zero => Some(0.0),
            Volatility::Constant(s) => Some(s),
            Volatility::TanhSkew { base, amplitude } => Some(base + amplitude.abs()),
            Volatility::Counterexample => {
                if from >= 1.0 {
                    Some(1.0)
                } else if horizon < 1.0 {
                    Some(1.0 / (1.0 - horizon))
                } else {
                    None
                }
            }
        }
    }

    /// Spatial window carrying all but a negligible fraction of the law of
    /// `X_t` for `t <= horizon`: `x0 +- 8 sigma_max sqrt(T)` for diffusions.
    pub fn working_interval(&self, horizon: f64) -> (f64, f64) {
        let x0 = self.x0;
        match self.kind {
            ProcessKind::Diffusion => {
                let s = self.sigma_max(0.0, horizon).unwrap_or(0.0);
                let half = (8.0 * s * horizon.sqrt()).max(1.0e-3);
                if s == 0.0 {
                    (x0 - 1.0, x0 + 1.0)
                } else {
                    (x0 - half, x0 + half)
                }
            }
            ProcessKind::CompensatedPoisson => {
                let m = self.intensity * horizon;
                (x0 - m - 1.0, x0 + 8.0 * m.sqrt() + 2.0)
            }
            ProcessKind::JumpDiffusion => {
                let s = self.sigma_max(0.0, horizon).unwrap_or(0.0);
                let m = self.intensity * horizon;
                let reach = 8.0 * s * horizon.sqrt() + self.jump_size.abs() * (m + 8.0 * m.sqrt() + 1.0);
                (x0 - reach, x0 + reach)
            }
            ProcessKind::Counterexample => {
                let half = 1.0 + 8.0 * (horizon - 1.0).max(0.0).sqrt();
                (-half, half)
            }
        }
    }
}

/// Evaluate the diffusion coefficient of `spec` at `(t, x)`.
pub fn eval_sigma(spec: &ProcessSpec, t: f64, x: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("{}: sigma evaluated at t = {t}", spec.name)));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("{}: sigma evaluated at x = {x}", spec.name)));
    }
    let s = spec.sigma.eval(t, x);
    debug_assert!(s >= 0.0);
    Ok(s)
}

/// The fixed process catalog.
pub fn catalog() -> Vec<ProcessSpec> {
    CATALOG_NAMES.iter().map(|n| by_name(n).expect("catalog name")).collect()
}

pub fn by_name(name: &str) -> Result<ProcessSpec> {
    match name {
        "bm" => Ok(ProcessSpec::brownian()),
        "boundedvol" => Ok(ProcessSpec::bounded_vol()),
        "cpoisson" => ProcessSpec::compensated_poisson(1.0),
        "counterexample" => Ok(ProcessSpec::counterexample()),
        "jumpdiff" => ProcessSpec::jump_diffusion(1.0, 1.0, 1.0),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_five_named_entries() {
        let c = catalog();
        assert_eq!(c.len(), 5);
        for (spec, name) in c.iter().zip(CATALOG_NAMES) {
            assert_eq!(spec.name, name);
        }
        assert!(matches!(by_name("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn brownian_sigma_is_one() {
        let bm = ProcessSpec::brownian();
        for &(t, x) in &[(0.0, 0.0), (3.5, -100.0), (0.25, 7.0)] {
            assert_eq!(eval_sigma(&bm, t, x).unwrap(), 1.0);
        }
    }

    #[test]
    fn counterexample_sigma_via_spec() {
        let ce = ProcessSpec::counterexample();
        assert_eq!(eval_sigma(&ce, 0.5, 0.0).unwrap(), 2.0);
        assert_eq!(eval_sigma(&ce, 2.0, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn sigma_outside_domain_errors() {
        let bm = ProcessSpec::brownian();
        assert!(matches!(eval_sigma(&bm, -1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(eval_sigma(&bm, 0.0, f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn bounded_vol_is_positive_and_bounded() {
        let bv = ProcessSpec::bounded_vol();
        for i in -50..=50 {
            let s = eval_sigma(&bv, 0.3, i as f64 * 0.5).unwrap();
            assert!(s > 0.1 - 1e-12 && s < 0.3 + 1e-12);
        }
        assert_eq!(bv.sigma_max(0.0, 1.0), Some(0.30000000000000004));
    }

    #[test]
    fn only_jumpdiff_is_not_almost_continuous() {
        for spec in catalog() {
            assert_eq!(spec.is_almost_continuous(), spec.name != "jumpdiff");
            assert!(spec.is_martingale());
        }
        let raw = by_name("jumpdiff").unwrap().uncompensated();
        assert!(!raw.is_martingale());
        assert_eq!(raw.drift(), 0.0);
        assert_eq!(by_name("jumpdiff").unwrap().drift(), -1.0);
    }

    #[test]
    fn working_interval_is_eight_sd() {
        let (lo, hi) = ProcessSpec::brownian().working_interval(1.0);
        assert_eq!((lo, hi), (-8.0, 8.0));
        let (lo, hi) = ProcessSpec::counterexample().working_interval(2.0);
        assert_eq!((lo, hi), (-9.0, 9.0));
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ProcessSpec::constant_vol(-0.1).is_err());
        assert!(ProcessSpec::compensated_poisson(0.0).is_err());
        assert!(ProcessSpec::jump_diffusion(1.0, 1.0, 0.0).is_err());
    }
}
