//! Process catalog, payoff descriptors, lattices and the closed-form
//! two-point-support example.

mod counterexample;
mod grid;
mod payoff;
mod process;

pub use counterexample::{counterexample_f, counterexample_msupport, counterexample_sigma};
pub use grid::{SpaceGrid, TimeGrid};
pub use payoff::{Payoff, PayoffShape};
pub use process::{by_name, catalog, eval_sigma, ProcessKind, ProcessSpec, Volatility, CATALOG_NAMES};

use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]`; `lo == hi` is a single point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distance from `x` to the interval; zero inside.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    /// True if the open interval `(a, b)` meets this closed interval.
    pub fn meets_open(&self, a: f64, b: f64) -> bool {
        a < b && self.hi > a && self.lo < b
    }
}
