//! Time integration of the master equation and steady-state computation by
//! two independent routes: long-time evolution and a Liouvillian null-space
//! solve.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::model::{generator, rhs_vec, StateVec};
use crate::{C64, DensityMatrix, Error, Matrix4c, Result, SystemParams};

/// Default fixed step, in units of 1/gamma.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Guaranteed-termination cap for steady-state evolution.
pub const STEADY_TIME_CAP: f64 = 1e4;
/// Default residual tolerance for steady-state detection.
pub const DEFAULT_STEADY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    FixedRk4,
    AdaptiveRk45 { rel_tol: f64, abs_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Step size (fixed mode) or initial step (adaptive), units of 1/gamma.
    pub step: f64,
    pub t_end: f64,
    /// Record every k-th step.
    pub sample_every: usize,
    pub method: Method,
}

impl IntegratorConfig {
    pub fn fixed(t_end: f64) -> Self {
        Self { step: DEFAULT_STEP, t_end, sample_every: 100, method: Method::FixedRk4 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.t_end > 0.0) || self.step >= self.t_end {
            return Err(Error::InvalidConfig(format!(
                "need 0 < step < t_end, got step={} t_end={}",
                self.step, self.t_end
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidConfig("sample_every must be positive".into()));
        }
        if let Method::AdaptiveRk45 { rel_tol, abs_tol } = self.method {
            if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
                return Err(Error::InvalidConfig("adaptive tolerances must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Time grid plus sampled states. Every recorded state has been re-checked
/// against the density-matrix tolerances.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

const TRAJ_TRACE_TOL: f64 = 1e-9;
const TRAJ_EIG_TOL: f64 = 1e-9;

fn check_sample(t: f64, s: &StateVec) -> Result<DensityMatrix> {
    let dm = DensityMatrix::from_state_vec_unchecked(s);
    let tr = dm.trace();
    if (tr - 1.0).abs() >= TRAJ_TRACE_TOL {
        return Err(Error::InvariantViolation {
            t,
            detail: format!("trace deviates from 1 by {:e}", (tr - 1.0).abs()),
        });
    }
    let min = dm.min_eigenvalue();
    if min < -TRAJ_EIG_TOL {
        return Err(Error::InvariantViolation { t, detail: format!("eigenvalue {min:e}") });
    }
    Ok(dm)
}

fn rk4_step(p: &SystemParams, s: &StateVec, h: f64) -> StateVec {
    let k1 = rhs_vec(p, s);
    let k2 = rhs_vec(p, &(s + k1 * (h * 0.5)));
    let k3 = rhs_vec(p, &(s + k2 * (h * 0.5)));
    let k4 = rhs_vec(p, &(s + k3 * h));
    s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

// Cash-Karp 5(4) embedded pair.
#[rustfmt::skip]
const CK_A: [[f64; 5]; 5] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0],
    [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0, 253.0 / 4096.0],
];
const CK_B5: [f64; 6] =
    [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0];
const CK_B4: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    1.0 / 4.0,
];

fn ck45_step(p: &SystemParams, s: &StateVec, h: f64) -> (StateVec, f64) {
    let mut k = [StateVec::zeros(); 6];
    k[0] = rhs_vec(p, s);
    for i in 0..5 {
        let mut y = *s;
        for (j, kj) in k.iter().enumerate().take(i + 1) {
            y += kj * (h * CK_A[i][j]);
        }
        k[i + 1] = rhs_vec(p, &y);
    }
    let mut y5 = *s;
    let mut err = StateVec::zeros();
    for i in 0..6 {
        y5 += k[i] * (h * CK_B5[i]);
        err += k[i] * (h * (CK_B5[i] - CK_B4[i]));
    }
    (y5, err.amax())
}

/// Integrates the master equation from `rho0` to `cfg.t_end`, recording the
/// initial state and every `sample_every`-th step.
pub fn evolve(
    params: &SystemParams,
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    params.validate()?;
    cfg.validate()?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut s = rho0.to_state_vec();
    times.push(0.0);
    states.push(*rho0);

    match cfg.method {
        Method::FixedRk4 => {
            let n = (cfg.t_end / cfg.step).round() as usize;
            for i in 1..=n {
                s = rk4_step(params, &s, cfg.step);
                if i % cfg.sample_every == 0 || i == n {
                    let t = i as f64 * cfg.step;
                    times.push(t);
                    states.push(check_sample(t, &s)?);
                }
            }
        }
        Method::AdaptiveRk45 { rel_tol, abs_tol } => {
            let mut t = 0.0;
            let mut h = cfg.step;
            let mut accepted = 0usize;
            while t < cfg.t_end {
                if h < 1e-14 {
                    return Err(Error::StepUnderflow { t });
                }
                if t + h > cfg.t_end {
                    h = cfg.t_end - t;
                }
                let (y, err) = ck45_step(params, &s, h);
                let scale = abs_tol + rel_tol * s.amax().max(y.amax());
                if err <= scale {
                    t += h;
                    s = y;
                    accepted += 1;
                    if accepted % cfg.sample_every == 0 || t >= cfg.t_end {
                        times.push(t);
                        states.push(check_sample(t, &s)?);
                    }
                }
                let ratio = if err > 0.0 { scale / err } else { 10.0 };
                h *= 0.9 * ratio.powf(0.2).clamp(0.2, 5.0);
            }
        }
    }
    Ok(Trajectory { times, states })
}

/// Max-norm of the packed right-hand side: the steady-state residual.
pub fn residual(params: &SystemParams, rho: &DensityMatrix) -> f64 {
    rhs_vec(params, &rho.to_state_vec()).amax()
}

/// Long-time route to the steady state: fixed-step RK4 until the RHS
/// max-norm drops below `tol`, capped at tau = 1e4.
pub fn steady_state_evolve(
    params: &SystemParams,
    rho0: &DensityMatrix,
    tol: f64,
) -> Result<DensityMatrix> {
    params.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tol must be positive, got {tol}")));
    }
    let h = DEFAULT_STEP;
    let check_every = 100usize;
    let mut s = rho0.to_state_vec();
    let mut res = rhs_vec(params, &s).amax();
    if res < tol {
        return Ok(*rho0);
    }
    let cap = (STEADY_TIME_CAP / h) as usize;
    for i in 1..=cap {
        s = rk4_step(params, &s, h);
        if i % check_every == 0 {
            res = rhs_vec(params, &s).amax();
            if res < tol {
                return check_sample(i as f64 * h, &s);
            }
        }
    }
    Err(Error::NoConvergence { t: STEADY_TIME_CAP, residual: res, tol })
}

/// Assembles the 16x16 superoperator of the vectorized RHS. Vectorization
/// is row-major over (i, j).
pub fn liouvillian(params: &SystemParams) -> Result<DMatrix<C64>> {
    params.validate()?;
    let mut l = DMatrix::<C64>::zeros(16, 16);
    for col in 0..16 {
        let mut e = Matrix4c::zeros();
        e[(col / 4, col % 4)] = C64::new(1.0, 0.0);
        let de = generator(params, &e);
        for row in 0..16 {
            l[(row, col)] = de[(row / 4, row % 4)];
        }
    }
    Ok(l)
}

const NULLSPACE_TOL: f64 = 1e-10;

/// Algebraic route to the steady state: least-squares solve of the
/// vectorized RHS with the unit-trace row appended.
///
/// Fails with [`Error::DegenerateSteadyState`] when the Liouvillian null
/// space has dimension above one (e.g. all drives off, so |1><1| and
/// |2><2| are both stationary).
pub fn steady_state_linear(params: &SystemParams) -> Result<DensityMatrix> {
    let l = liouvillian(params)?;
    let sv = l.clone().singular_values();
    let smax = sv.max();
    let null_dim = sv.iter().filter(|&&s| s <= NULLSPACE_TOL * smax.max(1.0)).count();
    if null_dim > 1 {
        return Err(Error::DegenerateSteadyState { dim: null_dim });
    }

    let mut a = DMatrix::<C64>::zeros(17, 16);
    a.view_mut((0, 0), (16, 16)).copy_from(&l);
    for i in 0..4 {
        a[(16, 5 * i)] = C64::new(1.0, 0.0); // trace row: positions (i,i)
    }
    let mut b = DVector::<C64>::zeros(17);
    b[16] = C64::new(1.0, 0.0);
    let svd = a.svd(true, true);
    let v = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::InvalidState(format!("least-squares solve failed: {e}")))?;

    let mut m = Matrix4c::zeros();
    for (k, z) in v.iter().enumerate() {
        m[(k / 4, k % 4)] = *z;
    }
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let rho = DensityMatrix::from_matrix(&herm)?;
    let res = residual(params, &rho);
    if res >= NULLSPACE_TOL {
        return Err(Error::NoConvergence { t: 0.0, residual: res, tol: NULLSPACE_TOL });
    }
    Ok(rho)
}

/// Exact steady-state coherence magnitude for the fully symmetric resonant
/// drive (all Rabi frequencies equal, all detunings zero, equal decays):
/// gamma * omega^3 / (4 omega^4 + 3 gamma^2 omega^2). Test oracle.
#[cfg(test)]
pub(crate) fn symmetric_coherence_exact(omega: f64, gamma: f64) -> f64 {
    gamma * omega.powi(3) / (4.0 * omega.powi(4) + 3.0 * gamma * gamma * omega * omega)
}
