//! Closed-form steady state for the symmetric resonant drive
//! omega31 = omega32 = omega41 = omega, expressed in units of the common
//! decay rate gamma.
//!
//! The steady density matrix has uniform populations 1/4 and six equal-
//! magnitude coherences with |D| = gamma omega^3 / (4 omega^4 +
//! 2 gamma^2 omega^2); its spectrum splits into two golden-ratio pairs,
//! which gives the entropy directly from |D|.

use crate::{Error, Result};

const SQRT5: f64 = 2.23606797749978969;

/// Coherence magnitude |D| of the symmetric closed form.
pub fn analytic_coherence(omega: f64, gamma: f64) -> Result<f64> {
    if !(omega > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidParams(format!(
            "analytic form needs omega > 0 and gamma > 0, got omega={omega}, gamma={gamma}"
        )));
    }
    Ok(gamma * omega.powi(3) / (4.0 * omega.powi(4) + 2.0 * gamma * gamma * omega * omega))
}

/// Spectrum of the closed-form steady state as a function of the coherence
/// magnitude `d`: lambda = (1 -+ 2 sqrt(2) sqrt(3 -+ sqrt 5) |D|) / 4, two
/// signs each, returned as the narrow pair followed by the wide pair.
///
/// Returns `None` when the smallest value would be negative, i.e. outside
/// the regime where the closed form describes a physical state.
pub fn analytic_eigenvalues(d: f64) -> Option<[f64; 4]> {
    let w_narrow = 2.0 * std::f64::consts::SQRT_2 * (3.0 - SQRT5).sqrt() * d;
    let w_wide = 2.0 * std::f64::consts::SQRT_2 * (3.0 + SQRT5).sqrt() * d;
    let l1 = (1.0 - w_narrow) / 4.0;
    let l2 = (1.0 + w_narrow) / 4.0;
    let l3 = (1.0 - w_wide) / 4.0;
    if l3 < 0.0 {
        return None;
    }
    // close the sum exactly rather than reusing the rounded plus branch;
    // the partial sum sits near 3/4, so 1 - s is exact (Sterbenz) and a
    // left-to-right total lands on 1 with no rounding
    let l4 = 1.0 - (l1 + l2 + l3);
    Some([l1, l2, l3, l4])
}

/// Closed-form DEM, or `None` outside the physical regime.
pub fn analytic_dem(omega: f64, gamma: f64) -> Result<Option<f64>> {
    let d = analytic_coherence(omega, gamma)?;
    Ok(analytic_eigenvalues(d).map(|eig| {
        eig.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum()
    }))
}

/// Summary of the closed form at one drive strength.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticSteadyState {
    pub omega: f64,
    pub gamma: f64,
    pub coherence: f64,
    /// Ascending spectrum; `None` when the closed form is unphysical.
    pub eigenvalues: Option<[f64; 4]>,
    pub dem: Option<f64>,
}

pub fn analytic_steady_state(omega: f64, gamma: f64) -> Result<AnalyticSteadyState> {
    let coherence = analytic_coherence(omega, gamma)?;
    let eigenvalues = analytic_eigenvalues(coherence);
    Ok(AnalyticSteadyState {
        omega,
        gamma,
        coherence,
        eigenvalues,
        dem: analytic_dem(omega, gamma)?,
    })
}

/// One row of an analytic-vs-numeric comparison at a single omega.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonRow {
    pub omega: f64,
    pub analytic_dem: Option<f64>,
    pub numeric_dem: f64,
    /// |analytic - numeric| when the analytic value exists.
    pub abs_diff: Option<f64>,
}

/// Compare the closed-form DEM against the linear-solve steady state over a
/// list of drive strengths (common decay rate `gamma`).
pub fn compare_analytic_numeric(omegas: &[f64], gamma: f64) -> Result<Vec<ComparisonRow>> {
    use crate::dynamics::steady_state_linear;
    use crate::model::SystemParams;
    use crate::observables::von_neumann_dem;

    let mut rows = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let mut p = SystemParams::resonant(omega, omega, omega);
        p.gamma_31 = gamma;
        p.gamma_32 = gamma;
        p.gamma_41 = gamma;
        p.gamma_42 = gamma;
        let rho = steady_state_linear(&p)?;
        let numeric = von_neumann_dem(&rho)?;
        let analytic = analytic_dem(omega, gamma)?;
        rows.push(ComparisonRow {
            omega,
            analytic_dem: analytic,
            numeric_dem: numeric,
            abs_diff: analytic.map(|a| (a - numeric).abs()),
        });
    }
    Ok(rows)
}
