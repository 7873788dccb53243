//! Entanglement quantification (DEM via von-Neumann entropy) and population
//! analysis in the bare and dressed bases.

use crate::model::hamiltonian_resonant;
use crate::{C64, DensityMatrix, Error, Result, SystemParams, Vector4c};
use crate::dynamics::Trajectory;

/// Upper bound of the DEM for a four-level system: ln 4.
pub const DEM_MAX: f64 = 1.3862943611198906;

const EIG_CLAMP: f64 = 1e-9;

/// Degree of entanglement: von-Neumann entropy -sum(lambda ln lambda) of the
/// atomic state, natural logarithm, with 0 ln 0 = 0.
///
/// Eigenvalues in [-1e-9, 0) are clamped to zero; anything below -1e-9
/// signals a corrupted state and is a hard error.
pub fn von_neumann_dem(rho: &DensityMatrix) -> Result<f64> {
    let eig = rho.eigenvalues();
    if eig[0] < -EIG_CLAMP {
        return Err(Error::CorruptedState { min_eig: eig[0] });
    }
    let mut s = 0.0;
    for lam in eig {
        let lam = lam.clamp(0.0, 1.0);
        if lam > 0.0 {
            s -= lam * lam.ln();
        }
    }
    Ok(s.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    Bare,
    Dressed,
}

/// Four populations in one basis, summing to one.
#[derive(Debug, Clone, Copy)]
pub struct PopulationRecord {
    pub values: [f64; 4],
    pub basis: BasisTag,
}

/// Orthonormal eigenbasis of the resonant interaction Hamiltonian, ordered
/// by ascending eigenvalue. Phase convention: the |4> component of each
/// vector is real and positive (falling back to the largest-magnitude
/// component if |4> is absent).
#[derive(Debug, Clone)]
pub struct DressedBasis {
    pub vectors: [Vector4c; 4],
    pub eigenvalues: [f64; 4],
    /// A = sqrt(4 omega3^4 + omega41^4), defined for the symmetric closed form.
    pub a: f64,
    /// B = 2 omega3^2 + omega41^2.
    pub b: f64,
    /// C = 2 omega3^2 - omega41^2.
    pub c: f64,
    /// True when built from the symmetric closed form (omega31 = omega32).
    pub symmetric: bool,
}

impl DressedBasis {
    /// Max off-diagonal magnitude of the Gram matrix.
    pub fn gram_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let g = self.vectors[i].dotc(&self.vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

fn fix_phase(v: &mut Vector4c) {
    let pick = if v[3].norm() > 1e-12 {
        v[3]
    } else {
        let mut best = v[0];
        for k in 1..4 {
            if v[k].norm() > best.norm() {
                best = v[k];
            }
        }
        best
    };
    let phase = pick / C64::new(pick.norm(), 0.0);
    *v /= phase;
}

/// Closed-form dressed basis for the symmetric drive omega31 = omega32 =
/// omega3 at multi-photon resonance.
///
/// With E^2 = (B -+ A)/2 the four eigenvectors, normalized to a unit |4>
/// component before global normalization, are
///   ( E/omega41,  -E (omega41^2 +- A) / (2 omega3^2 omega41),
///     -(A - C)/(2 omega3 omega41)  or  (A + C)/(2 omega3 omega41),  1 )
/// where the inner pair (eigenvalues +-sqrt((B - A)/2)) carries (A - C) and
/// the outer pair (eigenvalues +-sqrt((B + A)/2)) carries (A + C).
pub fn dressed_basis(omega3: f64, omega41: f64) -> Result<DressedBasis> {
    if !(omega3 > 0.0) || !(omega41 > 0.0) {
        return Err(Error::DegenerateDressedBasis);
    }
    let o3 = omega3;
    let o41 = omega41;
    let a = (4.0 * o3.powi(4) + o41.powi(4)).sqrt();
    let b = 2.0 * o3 * o3 + o41 * o41;
    let c = 2.0 * o3 * o3 - o41 * o41;
    let e_in = ((b - a) / 2.0).sqrt(); // inner splitting
    let e_out = ((b + a) / 2.0).sqrt(); // outer splitting
    let r = |x: f64| C64::new(x, 0.0);

    // |3> components are fixed by the eigenvalue pair, |1>/|2> flip sign
    // with the eigenvalue sign.
    let v3_in = -(a - c) / (2.0 * o3 * o41);
    let v3_out = (a + c) / (2.0 * o3 * o41);
    let mk = |e: f64, amp2_scale: f64, v3: f64| -> Vector4c {
        let v1 = e / o41;
        let v2 = -e * amp2_scale / (2.0 * o3 * o3 * o41);
        Vector4c::new(r(v1), r(v2), r(v3), r(1.0))
    };
    // amp2_scale carries (omega41^2 + A) for the inner pair and
    // (omega41^2 - A) for the outer pair.
    let raw = [
        (e_out * -1.0, o41 * o41 - a, v3_out),
        (e_in * -1.0, o41 * o41 + a, v3_in),
        (e_in, o41 * o41 + a, v3_in),
        (e_out, o41 * o41 - a, v3_out),
    ];
    let mut vectors = [Vector4c::zeros(); 4];
    let mut eigenvalues = [0.0; 4];
    for (k, (e, scale, v3)) in raw.into_iter().enumerate() {
        let mut v = mk(e, scale, v3);
        v /= C64::new(v.norm(), 0.0);
        fix_phase(&mut v);
        vectors[k] = v;
        eigenvalues[k] = e;
    }
    Ok(DressedBasis { vectors, eigenvalues, a, b, c, symmetric: true })
}

/// Numeric fallback for asymmetric drives: eigendecomposition of the
/// resonant Hamiltonian, same ordering and phase convention.
pub fn dressed_basis_numeric(params: &SystemParams) -> Result<DressedBasis> {
    let h = hamiltonian_resonant(params)?;
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let mut vectors = [Vector4c::zeros(); 4];
    let mut eigenvalues = [0.0; 4];
    for (k, &idx) in order.iter().enumerate() {
        let mut v: Vector4c = se.eigenvectors.column(idx).into();
        fix_phase(&mut v);
        vectors[k] = v;
        eigenvalues[k] = se.eigenvalues[idx];
    }
    let o3 = params.rabi_31;
    let o41 = params.rabi_41;
    Ok(DressedBasis {
        vectors,
        eigenvalues,
        a: (4.0 * o3.powi(4) + o41.powi(4)).sqrt(),
        b: 2.0 * o3 * o3 + o41 * o41,
        c: 2.0 * o3 * o3 - o41 * o41,
        symmetric: false,
    })
}

/// Basis selector for [`populations`].
pub enum Basis<'a> {
    Bare,
    Dressed(&'a DressedBasis),
}

/// Populations of `rho` in the requested basis. Dressed populations are
/// p_k = <D_k| rho |D_k>.
pub fn populations(rho: &DensityMatrix, basis: Basis<'_>) -> Result<PopulationRecord> {
    match basis {
        Basis::Bare => Ok(PopulationRecord { values: rho.populations(), basis: BasisTag::Bare }),
        Basis::Dressed(db) => {
            let m = rho.matrix();
            let mut values = [0.0; 4];
            for (k, v) in db.vectors.iter().enumerate() {
                let p = v.dotc(&(m * v));
                if p.im.abs() > 1e-12 {
                    return Err(Error::InvalidState(format!(
                        "dressed population has imaginary residue {:e}",
                        p.im
                    )));
                }
                values[k] = p.re;
            }
            let sum: f64 = values.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidState(format!(
                    "dressed populations sum to {sum}, not 1"
                )));
            }
            Ok(PopulationRecord { values, basis: BasisTag::Dressed })
        }
    }
}

/// DEM at every trajectory sample.
pub fn dem_series(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, st)| Ok((t, von_neumann_dem(st)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, steady_state_evolve, IntegratorConfig};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn dem_of_pure_state_is_zero() {
        assert_abs_diff_eq!(von_neumann_dem(&DensityMatrix::pure_bare(2)).unwrap(), 0.0);
        let psi = Vector4c::new(
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.5),
            C64::new(-0.5, 0.0),
            C64::new(0.0, -0.5),
        );
        let rho = DensityMatrix::pure(&psi).unwrap();
        assert!(von_neumann_dem(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn dem_of_uniform_mixture_is_ln4() {
        let rho = DensityMatrix::diagonal([0.25; 4]).unwrap();
        assert_abs_diff_eq!(von_neumann_dem(&rho).unwrap(), DEM_MAX, epsilon = 1e-12);
        assert_abs_diff_eq!(DEM_MAX, 4.0f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn dem_of_two_outcome_mixture_is_ln2() {
        let rho = DensityMatrix::diagonal([0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(von_neumann_dem(&rho).unwrap(), 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn dem_invariant_under_diagonal_unitary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let mut m = crate::Matrix4c::zeros();
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let g = &m * m.adjoint();
            let tr: C64 = g.trace();
            let rho = DensityMatrix::from_matrix(&(g / tr)).unwrap();
            let d0 = von_neumann_dem(&rho).unwrap();

            let mut u = crate::Matrix4c::zeros();
            for i in 0..4 {
                let th = rng.gen_range(0.0..std::f64::consts::TAU);
                u[(i, i)] = C64::new(th.cos(), th.sin());
            }
            let rotated = DensityMatrix::from_matrix(&(&u * rho.matrix() * u.adjoint())).unwrap();
            assert!((von_neumann_dem(&rotated).unwrap() - d0).abs() < 1e-12);
        }
    }

    #[test]
    fn corrupted_state_rejected() {
        // bypass constructor checking via from_matrix with a clearly negative eigenvalue
        let m = crate::Matrix4c::from_diagonal(&Vector4c::new(
            C64::new(1.1, 0.0),
            C64::new(-0.1, 0.0),
            C64::ZERO,
            C64::ZERO,
        ));
        assert!(DensityMatrix::from_matrix(&m).is_err());
    }

    #[test]
    fn dressed_matches_numeric_eigenbasis() {
        for (o3, o41) in [(1.0, 1.0), (5.0, 5.0), (0.05, 5.0), (3.0, 0.7)] {
            let db = dressed_basis(o3, o41).unwrap();
            assert!(db.gram_residual() < 1e-10, "gram {:e}", db.gram_residual());
            let h = hamiltonian_resonant(&SystemParams::resonant(o3, o3, o41)).unwrap();
            for (v, &e) in db.vectors.iter().zip(&db.eigenvalues) {
                let resid = (h * v - v * C64::new(e, 0.0)).norm();
                assert!(resid < 1e-9, "eigen residual {resid:e}");
            }
            // ascending eigenvalue order
            for w in db.eigenvalues.windows(2) {
                assert!(w[0] <= w[1]);
            }
            let num = dressed_basis_numeric(&SystemParams::resonant(o3, o3, o41)).unwrap();
            for k in 0..4 {
                assert_abs_diff_eq!(db.eigenvalues[k], num.eigenvalues[k], epsilon = 1e-9);
                let overlap = db.vectors[k].dotc(&num.vectors[k]).norm();
                assert!(overlap > 1.0 - 1e-9, "overlap {overlap}");
            }
        }
    }

    #[test]
    fn dressed_intermediates_at_equal_drive() {
        let db = dressed_basis(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(db.a, 5.0f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(db.b, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(db.c, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_dressed_basis_rejected() {
        assert!(matches!(dressed_basis(0.0, 5.0), Err(Error::DegenerateDressedBasis)));
        assert!(matches!(dressed_basis(5.0, 0.0), Err(Error::DegenerateDressedBasis)));
    }

    #[test]
    fn bare_populations_of_ground_state() {
        let rec = populations(&DensityMatrix::pure_bare(1), Basis::Bare).unwrap();
        assert_eq!(rec.values, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(rec.basis, BasisTag::Bare);
    }

    #[test]
    fn population_sums_match_in_both_bases() {
        let p = SystemParams::resonant(5.0, 5.0, 5.0);
        let rho = steady_state_evolve(&p, &DensityMatrix::pure_bare(1), 1e-10).unwrap();
        let bare = populations(&rho, Basis::Bare).unwrap();
        let db = dressed_basis(5.0, 5.0).unwrap();
        let dressed = populations(&rho, Basis::Dressed(&db)).unwrap();
        assert_abs_diff_eq!(bare.values.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dressed.values.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn weak_coupler_regime_dressed_populations() {
        // long-time state at omega3 = 0.05, omega41 = 5: two dressed
        // populations near 0.5, two near 0
        let p = SystemParams::resonant(0.05, 0.05, 5.0);
        let traj = evolve(&p, &DensityMatrix::pure_bare(1), &IntegratorConfig::fixed(20.0)).unwrap();
        let db = dressed_basis(0.05, 5.0).unwrap();
        let mut vals = populations(traj.final_state(), Basis::Dressed(&db)).unwrap().values;
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(vals[0] < 0.05 && vals[1] < 0.05);
        assert!((vals[2] - 0.5).abs() < 0.05 && (vals[3] - 0.5).abs() < 0.05);
    }

    #[test]
    fn dem_series_dark_state_is_zero() {
        let p = SystemParams::resonant(0.0, 0.0, 0.0);
        let traj = evolve(&p, &DensityMatrix::pure_bare(2), &IntegratorConfig::fixed(5.0)).unwrap();
        for (_, v) in dem_series(&traj).unwrap() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn dem_series_resonant_and_detuned_endpoints() {
        let run = |delta: f64| {
            let p = SystemParams::defaults(5.0, 5.0, 5.0, delta);
            let traj =
                evolve(&p, &DensityMatrix::pure_bare(1), &IntegratorConfig::fixed(20.0)).unwrap();
            let series = dem_series(&traj).unwrap();
            assert_abs_diff_eq!(series[0].1, 0.0, epsilon = 1e-12);
            series.last().unwrap().1
        };
        assert!((run(0.0) - 1.36).abs() < 0.02);
        assert!((run(4.0) - 0.70).abs() < 0.05);
    }
}
