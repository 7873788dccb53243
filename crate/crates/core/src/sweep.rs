//! Steady-state DEM maps over (omega, delta) grids.
//!
//! Each grid cell solves the steady state by the linear route and falls
//! back to long-time integration if the null space is ill-conditioned for
//! that parameter point. With the `parallel` feature the rows are
//! distributed with rayon; `run_sequential` is always available and
//! produces bit-identical results.

use crate::dynamics::{steady_state_evolve, steady_state_linear, DEFAULT_STEADY_TOL};
use crate::observables::von_neumann_dem;
use crate::{DensityMatrix, Error, Result, SystemParams};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Inclusive linear axis with `n >= 1` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub values: Vec<f64>,
}

impl Axis {
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Axis> {
        if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(Error::InvalidParams(format!(
                "bad axis: lo={lo}, hi={hi}, n={n}"
            )));
        }
        if n == 1 {
            return Ok(Axis { values: vec![lo] });
        }
        let step = (hi - lo) / (n - 1) as f64;
        Ok(Axis {
            values: (0..n).map(|k| lo + step * k as f64).collect(),
        })
    }
}

/// Grid definition: drive strength along rows, common detuning along columns.
/// The three Rabi couplings track `omega` together; all decay rates stay at 1.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub omega_axis: Axis,
    pub delta_axis: Axis,
}

/// Result matrix in row-major (omega, delta) layout.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub omega_axis: Vec<f64>,
    pub delta_axis: Vec<f64>,
    /// `dem[i * delta_axis.len() + j]` for omega i, delta j; NaN for cells
    /// that did not converge.
    pub dem: Vec<f64>,
    /// Per-cell convergence flag, same layout as `dem`.
    pub converged: Vec<bool>,
    /// Cells that needed the integration fallback.
    pub fallback_cells: usize,
}

impl SweepGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.dem[i * self.delta_axis.len() + j]
    }

    /// Smallest converged DEM on the grid.
    pub fn min_dem(&self) -> f64 {
        self.dem
            .iter()
            .zip(&self.converged)
            .filter(|&(_, &ok)| ok)
            .map(|(&d, _)| d)
            .fold(f64::INFINITY, f64::min)
    }
}

struct Cell {
    dem: f64,
    converged: bool,
    fallback: bool,
}

/// A cell never aborts the sweep: any solver failure marks it unconverged.
fn cell(omega: f64, delta: f64) -> Cell {
    let params = SystemParams::defaults(omega, omega, omega, delta);
    let (rho, fallback) = match steady_state_linear(&params) {
        Ok(rho) => (Some(rho), false),
        Err(Error::DegenerateSteadyState { .. }) | Err(Error::InvalidState(_)) => (
            steady_state_evolve(&params, &DensityMatrix::pure_bare(1), DEFAULT_STEADY_TOL).ok(),
            true,
        ),
        Err(_) => (None, false),
    };
    match rho.map(|r| von_neumann_dem(&r)) {
        Some(Ok(dem)) => Cell { dem, converged: true, fallback },
        _ => Cell { dem: f64::NAN, converged: false, fallback },
    }
}

fn row(omega: f64, deltas: &[f64]) -> Vec<Cell> {
    deltas.iter().map(|&delta| cell(omega, delta)).collect()
}

fn assemble(spec: &SweepSpec, rows: Vec<Vec<Cell>>) -> SweepGrid {
    let n = spec.omega_axis.values.len() * spec.delta_axis.values.len();
    let mut dem = Vec::with_capacity(n);
    let mut converged = Vec::with_capacity(n);
    let mut fallback_cells = 0;
    for r in rows {
        for c in r {
            dem.push(c.dem);
            converged.push(c.converged);
            fallback_cells += c.fallback as usize;
        }
    }
    SweepGrid {
        omega_axis: spec.omega_axis.values.clone(),
        delta_axis: spec.delta_axis.values.clone(),
        dem,
        converged,
        fallback_cells,
    }
}

/// Sequential evaluation, row by row.
pub fn run_sequential(spec: &SweepSpec) -> SweepGrid {
    let rows = spec
        .omega_axis
        .values
        .iter()
        .map(|&omega| row(omega, &spec.delta_axis.values))
        .collect();
    assemble(spec, rows)
}

/// Row-parallel evaluation. Identical output to [`run_sequential`]; each
/// cell is deterministic so only scheduling differs.
#[cfg(feature = "parallel")]
pub fn run_parallel(spec: &SweepSpec) -> SweepGrid {
    let rows = spec
        .omega_axis
        .values
        .par_iter()
        .map(|&omega| row(omega, &spec.delta_axis.values))
        .collect();
    assemble(spec, rows)
}

/// Preferred entry point: parallel when compiled in, sequential otherwise.
pub fn run(spec: &SweepSpec) -> SweepGrid {
    #[cfg(feature = "parallel")]
    {
        run_parallel(spec)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sequential(spec)
    }
}
