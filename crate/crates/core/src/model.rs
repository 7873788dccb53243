//! Physical parameter set, density-matrix representation, rotating-frame
//! Hamiltonian, and the equations-of-motion right-hand side.
//!
//! Conventions: all Rabi couplings enter the equations as real non-negative
//! magnitudes (the rotating-frame transformation absorbs the field phases),
//! and the frame diagonal carries twice each detuning, so a coherence
//! rho_ij accumulates phase at 2*(d_i - d_j). The ground-state coherence
//! rho_12 is undamped; both lower levels are stable.

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use crate::{C64, Error, Matrix4c, Result, Vector4c};

/// Real 16-component packing of a Hermitian 4x4 matrix:
/// `[p1, p2, p3, p4, Re12, Im12, Re13, Im13, Re14, Im14, Re23, Im23, Re24, Im24, Re34, Im34]`.
pub(crate) type StateVec = SVector<f64, 16>;

/// Upper-triangle pair order used by the packed representation.
pub(crate) const COHERENCE_INDEX: [(usize, usize); 6] =
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Drive, decay, detuning, and phase parameters, all in units of the
/// reference decay rate gamma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Rabi frequency on |1>-|3>.
    pub rabi_31: f64,
    /// Rabi frequency on |2>-|3>.
    pub rabi_32: f64,
    /// Rabi frequency on |1>-|4>.
    pub rabi_41: f64,
    pub delta_31: f64,
    pub delta_32: f64,
    pub delta_41: f64,
    pub gamma_31: f64,
    pub gamma_32: f64,
    pub gamma_41: f64,
    pub gamma_42: f64,
    /// Field phase on |1>-|3> (radians). Absorbed by the rotating frame;
    /// has no effect on the equations of motion.
    pub phi_31: f64,
    /// Field phase on |2>-|3> (radians). Same status as `phi_31`.
    pub phi_32: f64,
}

impl SystemParams {
    /// Unit decay rates, a common detuning on all three transitions, zero
    /// phases.
    pub fn defaults(rabi_31: f64, rabi_32: f64, rabi_41: f64, delta: f64) -> Self {
        Self {
            rabi_31,
            rabi_32,
            rabi_41,
            delta_31: delta,
            delta_32: delta,
            delta_41: delta,
            gamma_31: 1.0,
            gamma_32: 1.0,
            gamma_41: 1.0,
            gamma_42: 1.0,
            phi_31: 0.0,
            phi_32: 0.0,
        }
    }

    /// Resonant defaults: all detunings zero.
    pub fn resonant(rabi_31: f64, rabi_32: f64, rabi_41: f64) -> Self {
        Self::defaults(rabi_31, rabi_32, rabi_41, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rabi_31", self.rabi_31),
            ("rabi_32", self.rabi_32),
            ("rabi_41", self.rabi_41),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("gamma_31", self.gamma_31),
            ("gamma_32", self.gamma_32),
            ("gamma_41", self.gamma_41),
            ("gamma_42", self.gamma_42),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("delta_31", self.delta_31),
            ("delta_32", self.delta_32),
            ("delta_41", self.delta_41),
            ("phi_31", self.phi_31),
            ("phi_32", self.phi_32),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// 4x4 complex Hermitian unit-trace positive-semidefinite atomic state.
///
/// Storage is the four real populations plus the six upper-triangle
/// coherences; the lower triangle is mirrored on read, so Hermiticity holds
/// exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    diag: [f64; 4],
    upper: [C64; 6],
}

pub const TRACE_TOL: f64 = 1e-12;
pub const EIG_TOL: f64 = 1e-9;

impl DensityMatrix {
    /// Bare basis state |k><k| with k in 1..=4.
    pub fn pure_bare(k: usize) -> Self {
        assert!((1..=4).contains(&k), "bare index must be 1..=4");
        let mut diag = [0.0; 4];
        diag[k - 1] = 1.0;
        Self { diag, upper: [C64::ZERO; 6] }
    }

    /// Projector |psi><psi| onto a (normalized) pure state.
    pub fn pure(psi: &Vector4c) -> Result<Self> {
        let n = psi.norm();
        if n < 1e-300 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / C64::new(n, 0.0);
        Self::from_matrix(&(v * v.adjoint()))
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(p: [f64; 4]) -> Result<Self> {
        Self { diag: p, upper: [C64::ZERO; 6] }.validated()
    }

    /// Builds from a full matrix, checking Hermiticity, unit trace, and
    /// positivity within tolerance.
    pub fn from_matrix(m: &Matrix4c) -> Result<Self> {
        let herm_res = (m - m.adjoint()).norm();
        if herm_res > 1e-9 {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian: residual {herm_res:e}"
            )));
        }
        let mut diag = [0.0; 4];
        for (i, d) in diag.iter_mut().enumerate() {
            *d = m[(i, i)].re;
        }
        let mut upper = [C64::ZERO; 6];
        for (k, &(i, j)) in COHERENCE_INDEX.iter().enumerate() {
            upper[k] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
        Self { diag, upper }.validated()
    }

    fn validated(self) -> Result<Self> {
        let tr: f64 = self.diag.iter().sum();
        if (tr - 1.0).abs() >= TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace deviates from 1 by {:e}",
                (tr - 1.0).abs()
            )));
        }
        let min = self.min_eigenvalue();
        if min < -EIG_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(self)
    }

    /// Full 4x4 matrix with the lower triangle mirrored from the upper.
    pub fn matrix(&self) -> Matrix4c {
        let mut m = Matrix4c::zeros();
        for i in 0..4 {
            m[(i, i)] = C64::new(self.diag[i], 0.0);
        }
        for (k, &(i, j)) in COHERENCE_INDEX.iter().enumerate() {
            m[(i, j)] = self.upper[k];
            m[(j, i)] = self.upper[k].conj();
        }
        m
    }

    pub fn populations(&self) -> [f64; 4] {
        self.diag
    }

    /// Upper-triangle coherence rho_ij for i < j (1-based level labels).
    pub fn coherence(&self, i: usize, j: usize) -> C64 {
        let k = COHERENCE_INDEX
            .iter()
            .position(|&(a, b)| (a, b) == (i - 1, j - 1))
            .expect("coherence indices must satisfy 1 <= i < j <= 4");
        self.upper[k]
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let ev = self.matrix().symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub(crate) fn to_state_vec(self) -> StateVec {
        let mut v = StateVec::zeros();
        v[0] = self.diag[0];
        v[1] = self.diag[1];
        v[2] = self.diag[2];
        v[3] = self.diag[3];
        for (k, z) in self.upper.iter().enumerate() {
            v[4 + 2 * k] = z.re;
            v[5 + 2 * k] = z.im;
        }
        v
    }

    /// Repacks an integrator state without re-validating invariants.
    pub(crate) fn from_state_vec_unchecked(v: &StateVec) -> Self {
        let mut upper = [C64::ZERO; 6];
        for (k, z) in upper.iter_mut().enumerate() {
            *z = C64::new(v[4 + 2 * k], v[5 + 2 * k]);
        }
        Self { diag: [v[0], v[1], v[2], v[3]], upper }
    }
}

/// Effective detuning coefficients of the coherence equations. The frame
/// diagonal carries twice each detuning.
fn frame_detunings(p: &SystemParams) -> (f64, f64, f64) {
    (2.0 * p.delta_31, 2.0 * p.delta_32, 2.0 * p.delta_41)
}

/// Equations-of-motion right-hand side on the packed representation.
///
/// Populations and the six upper-triangle coherences are written out
/// element by element; the lower triangle follows by conjugation.
pub(crate) fn rhs_vec(p: &SystemParams, s: &StateVec) -> StateVec {
    let (o31, o32, o41) = (p.rabi_31, p.rabi_32, p.rabi_41);
    let (d31, d32, d41) = frame_detunings(p);
    let g3 = p.gamma_31 + p.gamma_32;
    let g4 = p.gamma_41 + p.gamma_42;

    let (p1, p2, p3, p4) = (s[0], s[1], s[2], s[3]);
    let (x12, y12) = (s[4], s[5]);
    let (x13, y13) = (s[6], s[7]);
    let (x14, y14) = (s[8], s[9]);
    let (x23, y23) = (s[10], s[11]);
    let (x24, y24) = (s[12], s[13]);
    let (x34, y34) = (s[14], s[15]);

    let mut d = StateVec::zeros();
    // populations
    d[0] = p.gamma_31 * p3 + p.gamma_41 * p4 + 2.0 * o31 * y13 + 2.0 * o41 * y14;
    d[1] = p.gamma_32 * p3 + p.gamma_42 * p4 + 2.0 * o32 * y23;
    d[2] = -g3 * p3 - 2.0 * o31 * y13 - 2.0 * o32 * y23;
    d[3] = -g4 * p4 - 2.0 * o41 * y14;
    // rho_12: undamped ground-state coherence
    let d12 = d31 - d32;
    d[4] = d12 * y12 + o31 * y23 + o41 * y24 + o32 * y13;
    d[5] = -d12 * x12 + o31 * x23 + o41 * x24 - o32 * x13;
    // rho_13
    d[6] = -0.5 * g3 * x13 + d31 * y13 + o32 * y12 + o41 * y34;
    d[7] = -0.5 * g3 * y13 - d31 * x13 - o32 * x12 + o31 * (p3 - p1) + o41 * x34;
    // rho_14
    d[8] = -0.5 * g4 * x14 + d41 * y14 - o31 * y34;
    d[9] = -0.5 * g4 * y14 - d41 * x14 + o31 * x34 + o41 * (p4 - p1);
    // rho_23
    d[10] = -0.5 * g3 * x23 + d32 * y23 - o31 * y12;
    d[11] = -0.5 * g3 * y23 - d32 * x23 - o31 * x12 + o32 * (p3 - p2);
    // rho_24
    let d24 = d41 - d31 + d32;
    d[12] = -0.5 * g4 * x24 + d24 * y24 - o32 * y34 - o41 * y12;
    d[13] = -0.5 * g4 * y24 - d24 * x24 + o32 * x34 - o41 * x12;
    // rho_34
    let g34 = 0.5 * (g3 + g4);
    let d34 = d41 - d31;
    d[14] = -g34 * x34 + d34 * y34 - o31 * y14 - o32 * y24 - o41 * y13;
    d[15] = -g34 * y34 - d34 * x34 + o31 * x14 + o32 * x24 - o41 * x13;
    d
}

/// Time derivative of the density matrix. Hermitian and traceless.
pub fn rhs(params: &SystemParams, rho: &DensityMatrix) -> Result<Matrix4c> {
    params.validate()?;
    let d = rhs_vec(params, &rho.to_state_vec());
    let mut m = Matrix4c::zeros();
    for i in 0..4 {
        m[(i, i)] = C64::new(d[i], 0.0);
    }
    for (k, &(i, j)) in COHERENCE_INDEX.iter().enumerate() {
        let z = C64::new(d[4 + 2 * k], d[5 + 2 * k]);
        m[(i, j)] = z;
        m[(j, i)] = z.conj();
    }
    Ok(m)
}

/// Interaction Hamiltonian at multi-photon resonance, hbar = 1:
/// Omega41(|4><1| + h.c.) + Omega31(|3><1| + h.c.) + Omega32(|3><2| + h.c.).
pub fn hamiltonian_resonant(params: &SystemParams) -> Result<Matrix4c> {
    params.validate()?;
    let mut h = Matrix4c::zeros();
    let o31 = C64::new(params.rabi_31, 0.0);
    let o32 = C64::new(params.rabi_32, 0.0);
    let o41 = C64::new(params.rabi_41, 0.0);
    h[(2, 0)] = o31;
    h[(0, 2)] = o31;
    h[(2, 1)] = o32;
    h[(1, 2)] = o32;
    h[(3, 0)] = o41;
    h[(0, 3)] = o41;
    Ok(h)
}

/// Full generator applied to an arbitrary (not necessarily Hermitian) 4x4
/// matrix: i[H, m] plus the decay map. Agrees with [`rhs`] on Hermitian
/// input; used to assemble the vectorized superoperator column by column.
pub(crate) fn generator(p: &SystemParams, m: &Matrix4c) -> Matrix4c {
    let (d31, d32, d41) = frame_detunings(p);
    let mut h = hamiltonian_resonant(p).expect("validated params");
    h[(1, 1)] = C64::new(d31 - d32, 0.0);
    h[(2, 2)] = C64::new(d31, 0.0);
    h[(3, 3)] = C64::new(d41, 0.0);
    let mut out = (h * m - m * h) * C64::i();

    let g3 = p.gamma_31 + p.gamma_32;
    let g4 = p.gamma_41 + p.gamma_42;
    out[(0, 0)] += p.gamma_31 * m[(2, 2)] + p.gamma_41 * m[(3, 3)];
    out[(1, 1)] += p.gamma_32 * m[(2, 2)] + p.gamma_42 * m[(3, 3)];
    out[(2, 2)] -= g3 * m[(2, 2)];
    out[(3, 3)] -= g4 * m[(3, 3)];
    // coherence damping at half the total decay rate of the levels involved
    let w = [0.0, 0.0, 0.5 * g3, 0.5 * g4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                out[(i, j)] -= (w[i] + w[j]) * m[(i, j)];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn random_density(rng: &mut impl Rng) -> DensityMatrix {
        let mut m = Matrix4c::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let g = &m * m.adjoint();
        let tr: C64 = g.trace();
        DensityMatrix::from_matrix(&(g / tr)).unwrap()
    }

    #[test]
    fn dark_ground_state_is_stationary() {
        let p = SystemParams::resonant(0.0, 0.0, 0.0);
        let d = rhs(&p, &DensityMatrix::pure_bare(1)).unwrap();
        assert!(d.norm() == 0.0);
    }

    #[test]
    fn decay_only_rates_from_level_three() {
        let p = SystemParams::resonant(0.0, 0.0, 0.0);
        let d = rhs(&p, &DensityMatrix::pure_bare(3)).unwrap();
        assert_abs_diff_eq!(d[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(1, 1)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(2, 2)].re, -2.0, epsilon = 1e-15);
        assert!(d[(3, 3)].norm() < 1e-15);
        for &(i, j) in COHERENCE_INDEX.iter() {
            assert!(d[(i, j)].norm() < 1e-15);
        }
    }

    #[test]
    fn single_drive_coherence_pump() {
        // rho = |1><1|, Omega31 = 5: d rho_13 = i*5*(p3 - p1) = -5i, populations frozen
        let p = SystemParams::resonant(5.0, 0.0, 0.0);
        let d = rhs(&p, &DensityMatrix::pure_bare(1)).unwrap();
        assert_abs_diff_eq!(d[(0, 2)].im, -5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(0, 2)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(0, 0)].re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_matches_full_generator_on_hermitian_input() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = SystemParams {
                rabi_31: rng.gen_range(0.0..8.0),
                rabi_32: rng.gen_range(0.0..8.0),
                rabi_41: rng.gen_range(0.0..8.0),
                delta_31: rng.gen_range(-5.0..5.0),
                delta_32: rng.gen_range(-5.0..5.0),
                delta_41: rng.gen_range(-5.0..5.0),
                gamma_31: rng.gen_range(0.2..2.0),
                gamma_32: rng.gen_range(0.2..2.0),
                gamma_41: rng.gen_range(0.2..2.0),
                gamma_42: rng.gen_range(0.2..2.0),
                phi_31: 0.0,
                phi_32: 0.0,
            };
            let rho = random_density(&mut rng);
            let a = rhs(&p, &rho).unwrap();
            let b = generator(&p, &rho.matrix());
            assert!((a - b).norm() < 1e-13, "mismatch {:e}", (a - b).norm());
        }
    }

    #[test]
    fn rhs_trace_free_and_hermitian() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = SystemParams::defaults(
                rng.gen_range(0.0..10.0),
                rng.gen_range(0.0..10.0),
                rng.gen_range(0.0..10.0),
                rng.gen_range(-5.0..5.0),
            );
            let d = rhs(&p, &random_density(&mut rng)).unwrap();
            assert!(d.trace().norm() < 1e-14);
            assert!((d - d.adjoint()).norm() == 0.0);
        }
    }

    #[test]
    fn rhs_linear_in_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = SystemParams::defaults(2.0, 1.0, 3.0, 0.7);
        for _ in 0..20 {
            let r1 = random_density(&mut rng);
            let r2 = random_density(&mut rng);
            let a = rng.gen_range(0.0..1.0);
            let mix =
                DensityMatrix::from_matrix(
                &(r1.matrix() * C64::new(a, 0.0) + r2.matrix() * C64::new(1.0 - a, 0.0)),
            )
            .unwrap();
            let lhs = rhs(&p, &mix).unwrap();
            let rhs_sum = rhs(&p, &r1).unwrap() * C64::new(a, 0.0)
                + rhs(&p, &r2).unwrap() * C64::new(1.0 - a, 0.0);
            assert!((lhs - rhs_sum).norm() < 1e-13);
        }
    }

    #[test]
    fn phases_do_not_enter_equations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(&mut rng);
        let base = SystemParams::defaults(3.0, 2.0, 1.0, 0.4);
        let d0 = rhs(&base, &rho).unwrap();
        for phi in [0.3, 1.9, -2.4] {
            let p = SystemParams { phi_31: phi, phi_32: -phi * 0.5, ..base };
            assert_eq!(rhs(&p, &rho).unwrap(), d0);
        }
    }

    #[test]
    fn rejects_invalid_params() {
        let mut p = SystemParams::resonant(1.0, 1.0, 1.0);
        p.gamma_31 = 0.0;
        assert!(rhs(&p, &DensityMatrix::pure_bare(1)).is_err());
        let mut p = SystemParams::resonant(1.0, 1.0, 1.0);
        p.rabi_32 = -0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn hamiltonian_trivial_cases() {
        let p = SystemParams::resonant(0.0, 0.0, 0.0);
        assert!(hamiltonian_resonant(&p).unwrap().norm() == 0.0);

        // single two-level coupling: eigenvalues {-1, 0, 0, 1}
        let p = SystemParams::resonant(0.0, 0.0, 1.0);
        let h = hamiltonian_resonant(&p).unwrap();
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in ev.iter().zip([-1.0, 0.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn density_matrix_invariants_enforced() {
        assert!(DensityMatrix::diagonal([0.5, 0.5, 0.1, 0.0]).is_err()); // trace 1.1
        assert!(DensityMatrix::diagonal([1.2, -0.2, 0.0, 0.0]).is_err()); // negative eigenvalue
        let rho = DensityMatrix::diagonal([0.25; 4]).unwrap();
        assert_abs_diff_eq!(rho.trace(), 1.0);
    }

    proptest! {
        #[test]
        fn prop_rhs_trace_vanishes(
            o31 in 0.0..10.0f64, o32 in 0.0..10.0f64, o41 in 0.0..10.0f64,
            d in -5.0..5.0f64, seed in 0u64..1000,
        ) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = SystemParams::defaults(o31, o32, o41, d);
            let dm = rhs(&p, &random_density(&mut rng)).unwrap();
            prop_assert!(dm.trace().norm() < 1e-14);
        }
    }
}
