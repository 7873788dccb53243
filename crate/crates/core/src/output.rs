//! Deterministic serialization: CSV with a `#` metadata header, a JSON
//! alternative with the same field names, and gnuplot matrix files for
//! sweep grids. All numbers go through one formatter so identical inputs
//! produce byte-identical files.

use crate::config::RunConfig;
use crate::dynamics::Trajectory;
use crate::model::COHERENCE_INDEX;
use crate::observables::{dressed_basis, von_neumann_dem, Basis, DressedBasis, populations};
use crate::sweep::SweepGrid;
use crate::analytic::ComparisonRow;
use crate::{DensityMatrix, Result};
use std::fmt::Write as _;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Canonical number formatting: 9 significant digits, lowercase scientific
/// notation below 1e-4 in magnitude, plain zero for zero.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0.000000000".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".to_string() } else { format!("{x}") };
    }
    if x.abs() < 1e-4 {
        return format!("{x:.8e}");
    }
    // 9 significant digits: decimals = 9 - digits before the point
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format_float(*x),
            Cell::Num(_) | Cell::Null => "null".to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => format!("{s:?}"),
        }
    }
}

/// A column-labelled table plus metadata; the common shape of every output.
#[derive(Debug, Clone)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: Vec<String>) -> Table {
        Table { meta: base_meta(), columns, rows: Vec::new() }
    }

    pub fn push_meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// JSON document with the same field names as the CSV columns.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n  \"meta\": {\n");
        for (n, (k, v)) in self.meta.iter().enumerate() {
            let comma = if n + 1 < self.meta.len() { "," } else { "" };
            let _ = writeln!(s, "    {k:?}: {v:?}{comma}");
        }
        s.push_str("  },\n  \"rows\": [\n");
        for (n, row) in self.rows.iter().enumerate() {
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, cell)| format!("{c:?}: {}", cell.json()))
                .collect();
            let comma = if n + 1 < self.rows.len() { "," } else { "" };
            let _ = writeln!(s, "    {{{}}}{comma}", fields.join(", "));
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn render(&self, format: crate::config::OutputFormat) -> String {
        match format {
            crate::config::OutputFormat::Csv => self.to_csv(),
            crate::config::OutputFormat::Json => self.to_json(),
        }
    }
}

fn base_meta() -> Vec<(String, String)> {
    vec![("version".to_string(), TOOL_VERSION.to_string())]
}

fn echo_config(table: &mut Table, cfg: &RunConfig) {
    for line in cfg.serialize().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            table.push_meta(&format!("config.{k}"), v);
        }
    }
}

fn coherence_columns() -> Vec<String> {
    let mut cols = Vec::new();
    for (i, j) in COHERENCE_INDEX {
        cols.push(format!("re_rho{}{}", i + 1, j + 1));
        cols.push(format!("im_rho{}{}", i + 1, j + 1));
    }
    cols
}

fn state_cells(rho: &DensityMatrix, db: Option<&DressedBasis>) -> Result<Vec<Cell>> {
    let mut cells = vec![Cell::Num(von_neumann_dem(rho)?)];
    for p in rho.populations() {
        cells.push(Cell::Num(p));
    }
    if let Some(db) = db {
        for p in populations(rho, Basis::Dressed(db))?.values {
            cells.push(Cell::Num(p));
        }
    }
    for (i, j) in COHERENCE_INDEX {
        let z = rho.coherence(i + 1, j + 1);
        cells.push(Cell::Num(z.re));
        cells.push(Cell::Num(z.im));
    }
    Ok(cells)
}

/// Dressed columns apply when a symmetric drive is present.
pub fn wants_dressed(cfg: &RunConfig) -> bool {
    cfg.rabi_31 == cfg.rabi_32 && cfg.rabi_31 > 0.0 && cfg.rabi_41 > 0.0
}

fn state_columns(dressed: bool) -> Vec<String> {
    let mut cols = vec!["dem".to_string()];
    for k in 1..=4 {
        cols.push(format!("rho{k}{k}"));
    }
    if dressed {
        for k in 1..=4 {
            cols.push(format!("P_D{k}"));
        }
    }
    cols.extend(coherence_columns());
    cols
}

/// Time-series table for an `evolve` run.
pub fn evolve_table(cfg: &RunConfig, traj: &Trajectory) -> Result<Table> {
    let db = if wants_dressed(cfg) {
        Some(dressed_basis(cfg.rabi_31, cfg.rabi_41)?)
    } else {
        None
    };
    let mut columns = vec!["t".to_string()];
    columns.extend(state_columns(db.is_some()));
    let mut table = Table::new(columns);
    echo_config(&mut table, cfg);
    for (&t, rho) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![Cell::Num(t)];
        row.extend(state_cells(rho, db.as_ref())?);
        table.rows.push(row);
    }
    Ok(table)
}

/// Single-row table for a `steady` result.
pub fn steady_table(cfg: &RunConfig, rho: &DensityMatrix, residual: f64, route: &str) -> Result<Table> {
    let db = if wants_dressed(cfg) {
        Some(dressed_basis(cfg.rabi_31, cfg.rabi_41)?)
    } else {
        None
    };
    let mut table = Table::new(state_columns(db.is_some()));
    echo_config(&mut table, cfg);
    table.push_meta("route", route);
    table.push_meta("residual", format_float(residual));
    table.rows.push(state_cells(rho, db.as_ref())?);
    Ok(table)
}

/// Long-form sweep table: one row per cell.
pub fn sweep_table(cfg: &RunConfig, grid: &SweepGrid) -> Table {
    let mut table = Table::new(
        ["omega", "delta", "dem", "converged"].map(String::from).to_vec(),
    );
    echo_config(&mut table, cfg);
    table.push_meta("fallback_cells", grid.fallback_cells.to_string());
    for (i, &omega) in grid.omega_axis.iter().enumerate() {
        for (j, &delta) in grid.delta_axis.iter().enumerate() {
            let idx = i * grid.delta_axis.len() + j;
            table.rows.push(vec![
                Cell::Num(omega),
                Cell::Num(delta),
                if grid.converged[idx] { Cell::Num(grid.dem[idx]) } else { Cell::Null },
                Cell::Int(grid.converged[idx] as i64),
            ]);
        }
    }
    table
}

/// gnuplot `splot ... nonuniform matrix` format: first row holds the column
/// count and delta axis, each following row holds omega then the DEM values.
pub fn sweep_gnuplot_matrix(grid: &SweepGrid) -> String {
    let mut s = String::new();
    let mut first = vec![grid.delta_axis.len().to_string()];
    first.extend(grid.delta_axis.iter().map(|&d| format_float(d)));
    let _ = writeln!(s, "{}", first.join(" "));
    for (i, &omega) in grid.omega_axis.iter().enumerate() {
        let mut row = vec![format_float(omega)];
        for j in 0..grid.delta_axis.len() {
            row.push(format_float(grid.dem[i * grid.delta_axis.len() + j]));
        }
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

/// Dressed-basis report: one row per eigenvector.
pub fn dressed_table(db: &DressedBasis) -> Table {
    let mut columns = vec!["k".to_string(), "eigenvalue".to_string()];
    for c in 1..=4 {
        columns.push(format!("re_c{c}"));
        columns.push(format!("im_c{c}"));
    }
    let mut table = Table::new(columns);
    table.push_meta("A", format_float(db.a));
    table.push_meta("B", format_float(db.b));
    table.push_meta("C", format_float(db.c));
    table.push_meta("closed_form", if db.symmetric { "true" } else { "false" });
    table.push_meta("gram_residual", format!("{:.3e}", db.gram_residual()));
    for (k, (v, &e)) in db.vectors.iter().zip(&db.eigenvalues).enumerate() {
        let mut row = vec![Cell::Int(k as i64 + 1), Cell::Num(e)];
        for c in 0..4 {
            row.push(Cell::Num(v[c].re));
            row.push(Cell::Num(v[c].im));
        }
        table.rows.push(row);
    }
    table
}

/// Analytic-vs-numeric comparison table.
pub fn compare_table(rows: &[ComparisonRow]) -> Table {
    let mut table = Table::new(
        ["omega", "dem_numeric", "dem_analytic", "abs_diff", "analytic_valid"]
            .map(String::from)
            .to_vec(),
    );
    for r in rows {
        table.rows.push(vec![
            Cell::Num(r.omega),
            Cell::Num(r.numeric_dem),
            r.analytic_dem.map_or(Cell::Null, Cell::Num),
            r.abs_diff.map_or(Cell::Null, Cell::Num),
            Cell::Int(r.analytic_dem.is_some() as i64),
        ]);
    }
    table
}
