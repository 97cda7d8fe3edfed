use serde::{Deserialize, Serialize};

use super::SpaceGrid;
use crate::error::{invalid, Error, Result};

/// Terminal functions `g` available to runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PayoffShape {
    Identity,
    /// `(x - strike)_+`
    Call { strike: f64 },
    /// `-(x - strike)_+`, a concave negative control.
    NegCall { strike: f64 },
    Square,
    /// `tanh(x)`
    TanhRamp,
    /// `((x + 1/2)_+ + (x - 1/2)_+) / 2`: slopes 0, 1/2, 1.
    Softplus,
    /// Slope `lo` below `kink`, `hi` above.
    TwoSlope { kink: f64, lo: f64, hi: f64 },
    Constant(f64),
    /// `-x`, a decreasing negative control.
    Decreasing,
}

impl PayoffShape {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            PayoffShape::Identity => x,
            PayoffShape::Call { strike } => (x - strike).max(0.0),
            PayoffShape::NegCall { strike } => -(x - strike).max(0.0),
            PayoffShape::Square => x * x,
            PayoffShape::TanhRamp => x.tanh(),
            PayoffShape::Softplus => 0.5 * ((x + 0.5).max(0.0) + (x - 0.5).max(0.0)),
            PayoffShape::TwoSlope { kink, lo, hi } => {
                let d = x - kink;
                if d < 0.0 {
                    lo * d
                } else {
                    hi * d
                }
            }
            PayoffShape::Constant(c) => c,
            PayoffShape::Decreasing => -x,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PayoffShape::Identity => "identity",
            PayoffShape::Call { .. } => "call",
            PayoffShape::NegCall { .. } => "negcall",
            PayoffShape::Square => "square",
            PayoffShape::TanhRamp => "tanh",
            PayoffShape::Softplus => "softplus",
            PayoffShape::TwoSlope { .. } => "twoslope",
            PayoffShape::Constant(_) => "const",
            PayoffShape::Decreasing => "decreasing",
        }
    }
}

/// A terminal function with optional shape metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Payoff {
    pub shape: PayoffShape,
    pub monotone: Option<bool>,
    pub convex: Option<bool>,
    /// Slope bounds `(k, K)`: `k (y - x) <= g(y) - g(x) <= K (y - x)`.
    pub lipschitz: Option<(f64, f64)>,
}

impl Payoff {
    /// Payoff with the metadata that is known for its shape.
    pub fn new(shape: PayoffShape) -> Self {
        let (monotone, convex, lipschitz) = match shape {
            PayoffShape::Identity => (true, true, Some((1.0, 1.0))),
            PayoffShape::Call { .. } => (true, true, Some((0.0, 1.0))),
            PayoffShape::NegCall { .. } => (false, false, Some((-1.0, 0.0))),
            PayoffShape::Square => (false, true, None),
            PayoffShape::TanhRamp => (true, false, Some((0.0, 1.0))),
            PayoffShape::Softplus => (true, true, Some((0.0, 1.0))),
            PayoffShape::TwoSlope { lo, hi, .. } => (lo >= 0.0, lo <= hi, Some((lo.min(hi), lo.max(hi)))),
            PayoffShape::Constant(_) => (true, true, Some((0.0, 0.0))),
            PayoffShape::Decreasing => (false, true, Some((-1.0, -1.0))),
        };
        Self { shape, monotone: Some(monotone), convex: Some(convex), lipschitz }
    }

    pub fn identity() -> Self {
        Self::new(PayoffShape::Identity)
    }

    pub fn call(strike: f64) -> Self {
        Self::new(PayoffShape::Call { strike })
    }

    pub fn square() -> Self {
        Self::new(PayoffShape::Square)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(PayoffShape::Constant(c))
    }

    pub fn two_slope(kink: f64, lo: f64, hi: f64) -> Self {
        Self::new(PayoffShape::TwoSlope { kink, lo, hi })
    }

    /// Override the Lipschitz metadata.
    pub fn with_lipschitz(mut self, k: f64, big_k: f64) -> Result<Self> {
        if !(k <= big_k) {
            return Err(invalid(format!("lipschitz bounds need k <= K, got ({k}, {big_k})")));
        }
        self.lipschitz = Some((k, big_k));
        Ok(self)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.shape.eval(x)
    }

    /// Parse a CLI payoff name. `strike` is used by strike-based shapes,
    /// `slopes` by `twoslope`.
    pub fn from_name(name: &str, strike: f64, slopes: Option<(f64, f64)>) -> Result<Self> {
        let shape = match name {
            "identity" => PayoffShape::Identity,
            "call" => PayoffShape::Call { strike },
            "negcall" => PayoffShape::NegCall { strike },
            "square" => PayoffShape::Square,
            "tanh" => PayoffShape::TanhRamp,
            "softplus" => PayoffShape::Softplus,
            "twoslope" => {
                let (lo, hi) = slopes.unwrap_or((-1.0, 2.0));
                PayoffShape::TwoSlope { kink: strike, lo, hi }
            }
            "const" => PayoffShape::Constant(strike),
            "decreasing" => PayoffShape::Decreasing,
            other => return Err(Error::UnknownName(other.to_string())),
        };
        Ok(Self::new(shape))
    }

    /// Check the declared metadata on adjacent pairs of `grid`.
    pub fn validated(self, grid: &SpaceGrid) -> Result<Self> {
        let xs = grid.points();
        let g: Vec<f64> = xs.iter().map(|&x| self.eval(x)).collect();
        let scale = g.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let eps = 1e-12 * scale;
        if let Some((k, big_k)) = self.lipschitz {
            if k > big_k {
                return Err(invalid(format!("lipschitz bounds need k <= K, got ({k}, {big_k})")));
            }
            for (w, gw) in xs.windows(2).zip(g.windows(2)) {
                let dx = w[1] - w[0];
                let dg = gw[1] - gw[0];
                if dg < k * dx - eps || dg > big_k * dx + eps {
                    return Err(invalid(format!(
                        "{}: slope {} on [{}, {}] outside [{k}, {big_k}]",
                        self.shape.name(),
                        dg / dx,
                        w[0],
                        w[1]
                    )));
                }
            }
        }
        if self.monotone == Some(true) {
            if let Some(i) = g.windows(2).position(|w| w[1] < w[0] - eps) {
                return Err(invalid(format!("{}: decreases at x = {}", self.shape.name(), xs[i])));
            }
        }
        if self.convex == Some(true) {
            if let Some(i) = g.windows(3).position(|w| w[0] - 2.0 * w[1] + w[2] < -eps) {
                return Err(invalid(format!("{}: not convex at x = {}", self.shape.name(), xs[i + 1])));
            }
        }
        Ok(self)
    }
}
