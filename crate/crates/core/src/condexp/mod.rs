//! Conditional-expectation surfaces: backward PDE solves, Monte Carlo
//! restarts and closed-form oracles.

mod cross;
mod mc;
mod oracle;
mod pde;
mod tridiag;

pub use cross::{cross_validate, CrossPoint, CrossReport};
pub use mc::mc_condexp;
pub use oracle::{norm_cdf, norm_pdf, oracle_bm, oracle_bm_vol, oracle_poisson, OracleKind};
pub use pde::{solve_pde, solve_pde_from, solve_pde_with, working_grids, PdeConfig};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{SpaceGrid, TimeGrid};

/// Rule for evaluating a surface outside its spatial lattice: continue
/// linearly with slope `lo_slope` below and `hi_slope` above.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub lo_slope: f64,
    pub hi_slope: f64,
}

/// Values of `f` on a time x space lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    tgrid: TimeGrid,
    xgrid: SpaceGrid,
    /// Row-major, one row per time.
    values: Vec<f64>,
    extension: Extension,
}

impl GridFunction {
    pub fn new(tgrid: TimeGrid, xgrid: SpaceGrid, values: Vec<f64>, extension: Extension) -> Result<Self> {
        if values.len() != tgrid.len() * xgrid.len() {
            return Err(invalid(format!(
                "{} values for a {} x {} lattice",
                values.len(),
                tgrid.len(),
                xgrid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite surface value at flat index {i}")));
        }
        Ok(Self { tgrid, xgrid, values, extension })
    }

    /// Tabulate `f(t, x)` on the lattice.
    pub fn from_fn(
        tgrid: TimeGrid,
        xgrid: SpaceGrid,
        extension: Extension,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let xs = xgrid.points();
        let values = tgrid.times().iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).map(|(t, x)| f(t, x)).collect();
        Self::new(tgrid, xgrid, values, extension)
    }

    pub fn tgrid(&self) -> &TimeGrid {
        &self.tgrid
    }

    pub fn xgrid(&self) -> &SpaceGrid {
        &self.xgrid
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        let n = self.xgrid.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.xgrid.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `f(t_i, x)`: linear between lattice points, clamp-linear outside.
    pub fn eval(&self, i: usize, x: f64) -> f64 {
        let row = self.slice(i);
        let (lo, hi, h) = (self.xgrid.lo(), self.xgrid.hi(), self.xgrid.step());
        if x <= lo {
            return row[0] + self.extension.lo_slope * (x - lo);
        }
        if x >= hi {
            return row[row.len() - 1] + self.extension.hi_slope * (x - hi);
        }
        let s = (x - lo) / h;
        let j = (s.floor() as usize).min(row.len() - 2);
        let w = s - j as f64;
        row[j] * (1.0 - w) + row[j + 1] * w
    }

    /// `f(t, x)` for a lattice time `t`.
    pub fn eval_at(&self, t: f64, x: f64) -> Result<f64> {
        let i = self.tgrid.index_of(t).ok_or_else(|| invalid(format!("t = {t} is not a lattice time")))?;
        Ok(self.eval(i, x))
    }

    /// Pointwise map, keeping lattice and extension.
    pub fn map(&self, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        let xs = self.xgrid.points();
        let n = xs.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(self.tgrid.times()[k / n], xs[k % n], v))
            .collect();
        Self::new(self.tgrid.clone(), self.xgrid.clone(), values, self.extension)
    }

    /// `t,x,f` rows after `#` comment lines.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        for line in header.lines() {
            writeln!(w, "# {line}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "x", "f"])?;
        let xs = self.xgrid.points();
        for (i, t) in self.tgrid.times().iter().enumerate() {
            for (j, x) in xs.iter().enumerate() {
                out.write_record([t.to_string(), x.to_string(), self.value(i, j).to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}
