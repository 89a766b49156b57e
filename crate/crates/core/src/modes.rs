//! Normal modes of the rotation/stratification operator `L`.
//!
//! For each wavevector the eigenvectors are written down in closed form over
//! the components `(u¹, u², ρ)`. The slow vector `X⁰` spans the kernel of `L`;
//! the fast vectors `X^±` have eigenvalues `iω^±` with `|ω^±| ≥ 1`. Fast
//! vectors do not exist on `k₃ = 0`, where the dynamics is purely slow.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Branch, Domain, SpectralState, WaveVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub type CVec3 = [Complex64; 3];

/// Eigenframe of `L_k`: vectors, advecting velocities and frequencies,
/// all indexed by [`Branch::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct EigenEntry {
    pub vectors: [CVec3; 3],
    /// `VX`: the incompressible velocity `(u¹, u², u³)` carried by each mode.
    pub advection: [CVec3; 3],
    pub omega: [f64; 3],
    pub fast: bool,
}

impl EigenEntry {
    pub fn vector(&self, b: Branch) -> &CVec3 {
        &self.vectors[b.index()]
    }

    pub fn velocity(&self, b: Branch) -> &CVec3 {
        &self.advection[b.index()]
    }
}

/// Frequencies of a wavevector; the fast pair is `None` when `k₃ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequencies {
    pub slow: f64,
    pub fast: Option<(f64, f64)>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_nonzero(n: WaveVector) -> Result<()> {
    if n.is_zero() {
        return Err(Error::Domain("the zero wavevector carries no modes".into()));
    }
    Ok(())
}

/// `(ω⁰, ω⁺, ω⁻)` for a lattice wavevector.
pub fn frequencies(domain: &Domain, n: WaveVector) -> Result<Frequencies> {
    check_nonzero(n)?;
    let e = eigen_entry(domain.physical(n));
    Ok(Frequencies {
        slow: 0.0,
        fast: e.fast.then(|| (e.omega[Branch::Plus.index()], e.omega[Branch::Minus.index()])),
    })
}

/// Closed-form eigenframe for a lattice wavevector.
pub fn eigenframe(domain: &Domain, n: WaveVector) -> Result<EigenEntry> {
    check_nonzero(n)?;
    Ok(eigen_entry(domain.physical(n)))
}

/// Advecting velocity `VX^α_k` for a lattice wavevector.
pub fn advection_vector(domain: &Domain, n: WaveVector, b: Branch) -> Result<CVec3> {
    let e = eigenframe(domain, n)?;
    if b.is_fast() && !e.fast {
        return Err(Error::Domain(format!("fast branch absent at {n} (k3 = 0)")));
    }
    Ok(e.advection[b.index()])
}

/// Eigenframe from physical components; `k` must be nonzero.
pub(crate) fn eigen_entry(k: [f64; 3]) -> EigenEntry {
    let [k1, k2, k3] = k;
    let h2 = k1 * k1 + k2 * k2;
    let h = h2.sqrt();
    let norm = (h2 + k3 * k3).sqrt();
    let mut vectors = [[ZERO; 3]; 3];
    let mut omega = [0.0; 3];
    let fast = k3 != 0.0;

    let slow = if h == 0.0 {
        [ZERO, ZERO, c(k3.signum(), 0.0)]
    } else {
        [c(k2 / norm, 0.0), c(-k1 / norm, 0.0), c(k3 / norm, 0.0)]
    };
    vectors[Branch::Slow.index()] = slow;

    if fast {
        for b in Branch::FAST {
            let s = b.sign();
            if h == 0.0 {
                vectors[b.index()] = [c(FRAC_1_SQRT_2, 0.0), c(0.0, -s * FRAC_1_SQRT_2), ZERO];
                omega[b.index()] = s;
            } else {
                let d = std::f64::consts::SQRT_2 * h * norm;
                vectors[b.index()] = [
                    c(-k2 * k3 / d, s * k1 * norm / d),
                    c(k1 * k3 / d, s * k2 * norm / d),
                    c(h2 / d, 0.0),
                ];
                omega[b.index()] = s * norm / k3;
            }
        }
    }

    let mut advection = [[ZERO; 3]; 3];
    for b in Branch::ALL {
        if b.is_fast() && !fast {
            continue;
        }
        let x = &vectors[b.index()];
        // u³ from incompressibility: k'·v + k₃u³ = 0
        let w = if fast { -(x[0] * k1 + x[1] * k2) / k3 } else { ZERO };
        advection[b.index()] = [x[0], x[1], w];
    }
    // slow flow has no vertical velocity; clear rounding residue
    advection[Branch::Slow.index()][2] = ZERO;

    EigenEntry { vectors, advection, omega, fast }
}

/// Hermitian product `Σ a_i conj(b_i)`.
pub fn hdot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

/// The matrix of `L_k` acting on `(u¹, u², ρ)` for `k₃ ≠ 0`, from the
/// pressure and vertical-velocity reconstruction.
pub fn l_matrix(k: [f64; 3]) -> [[f64; 3]; 3] {
    let [k1, k2, k3] = k;
    [[0.0, -1.0, -k1 / k3], [1.0, 0.0, -k2 / k3], [k1 / k3, k2 / k3, 0.0]]
}

fn map_modes(state: &SpectralState, f: impl Fn(usize, Branch, f64) -> Complex64) -> SpectralState {
    let lat = state.lattice().clone();
    state.with_coeffs(
        state
            .coeffs()
            .iter()
            .enumerate()
            .map(|(m, &v)| {
                let (_, b) = lat.mode(m);
                v * f(m, b, lat.omega(m))
            })
            .collect(),
    )
}

/// `L`: fast coefficients times `iω`, slow coefficients to zero.
pub fn apply_l(state: &SpectralState) -> SpectralState {
    map_modes(state, |_, b, om| if b.is_fast() { c(0.0, om) } else { ZERO })
}

/// `L⁻¹` on the range of `L`.
pub fn apply_l_inv(state: &SpectralState) -> Result<SpectralState> {
    let lat = state.lattice();
    if let Some(m) = (0..lat.n_modes()).find(|&m| lat.mode(m).1 == Branch::Slow && state.coeffs()[m] != ZERO) {
        return Err(Error::Kernel(format!(
            "L^-1 applied to a state with slow component at {}",
            lat.mode_id(m).wave
        )));
    }
    Ok(map_modes(state, |_, b, om| if b.is_fast() { c(0.0, -1.0 / om) } else { ZERO }))
}

/// `I_ω`: fast coefficients times `i/ω`, slow coefficients dropped.
pub fn apply_i_omega(state: &SpectralState) -> SpectralState {
    map_modes(state, |_, b, om| if b.is_fast() { c(0.0, 1.0 / om) } else { ZERO })
}

/// Physical Fourier vector `(u¹, u², ρ)_k = Σ_α w^α_k X^α_k` of wave `w`.
pub fn field_vector(state: &SpectralState, w: usize) -> CVec3 {
    let wave = state.lattice().wave(w);
    let mut out = [ZERO; 3];
    for b in Branch::ALL {
        if let Some(m) = wave.modes[b.index()] {
            let a = state.coeffs()[m];
            let x = wave.eigen.vector(b);
            for i in 0..3 {
                out[i] += a * x[i];
            }
        }
    }
    out
}

/// Linearised potential vorticity `q_k = i k₁ u²_k − i k₂ u¹_k − i k₃ ρ_k`
/// of a Fourier field vector.
pub fn linear_pv(k: [f64; 3], field: &CVec3) -> Complex64 {
    c(0.0, 1.0) * (k[0] * field[1] - k[1] * field[0] - k[2] * field[2])
}

/// Slow coefficient recovered by PV inversion: `ψ = Δ⁻¹q`,
/// `W⁰ = (∇^⊥ψ, −∂_zψ)`, projected on `X⁰`.
pub fn slow_from_pv(k: [f64; 3], x0: &CVec3, q: Complex64) -> Complex64 {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let psi = -q / k2;
    let i = c(0.0, 1.0);
    let w0 = [-i * k[1] * psi, i * k[0] * psi, -i * k[2] * psi];
    hdot(&w0, x0)
}

/// Result of splitting a state into slow and fast parts.
#[derive(Debug, Clone)]
pub struct Split {
    pub slow: SpectralState,
    pub fast: SpectralState,
    /// Largest mismatch between the branch-0 coefficient and its PV inversion.
    pub pv_defect: f64,
    /// Largest PV carried by the fast part.
    pub fast_pv: f64,
}

/// Slow/fast split with a mode-by-mode potential-vorticity consistency check.
pub fn slow_fast_split(state: &SpectralState) -> Split {
    let slow = state.slow_part();
    let fast = state.fast_part();
    let lat = state.lattice();
    let mut pv_defect = 0.0f64;
    let mut fast_pv = 0.0f64;
    for (w, wave) in lat.waves().iter().enumerate() {
        let field = field_vector(state, w);
        let q = linear_pv(wave.k, &field);
        let inverted = slow_from_pv(wave.k, wave.eigen.vector(Branch::Slow), q);
        let m0 = wave.modes[Branch::Slow.index()].expect("slow mode on every wave");
        pv_defect = pv_defect.max((inverted - state.coeffs()[m0]).norm());
        let qf = linear_pv(wave.k, &field_vector(&fast, w));
        fast_pv = fast_pv.max(qf.norm());
    }
    Split { slow, fast, pv_defect, fast_pv }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{random_state, Frame, Lattice, ModeId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn wv(a: i32, b: i32, cc: i32) -> WaveVector {
        WaveVector::new(a, b, cc)
    }

    #[test]
    fn frequency_examples() {
        let d = Domain::cube();
        let f = frequencies(&d, wv(0, 0, 1)).unwrap();
        assert_eq!(f.slow, 0.0);
        assert_eq!(f.fast, Some((1.0, -1.0)));
        let f = frequencies(&d, wv(1, 0, 1)).unwrap();
        let (p, m) = f.fast.unwrap();
        assert!((p - SQRT_2).abs() < 1e-14 && (m + SQRT_2).abs() < 1e-14);
        assert_eq!(frequencies(&d, wv(1, 1, 0)).unwrap().fast, None);
        assert!(matches!(frequencies(&d, wv(0, 0, 0)), Err(Error::Domain(_))));
    }

    #[test]
    fn eigenframe_examples() {
        let d = Domain::cube();
        let e = eigenframe(&d, wv(0, 0, 1)).unwrap();
        assert_eq!(e.vector(Branch::Slow), &[ZERO, ZERO, c(1.0, 0.0)]);
        let r = FRAC_1_SQRT_2;
        assert_eq!(e.vector(Branch::Plus), &[c(r, 0.0), c(0.0, -r), ZERO]);
        assert_eq!(e.vector(Branch::Minus), &[c(r, 0.0), c(0.0, r), ZERO]);

        let e = eigenframe(&d, wv(1, 1, 0)).unwrap();
        let x0 = e.vector(Branch::Slow);
        assert!(close(x0[0], c(r, 0.0), 1e-15) && close(x0[1], c(-r, 0.0), 1e-15) && x0[2] == ZERO);
        assert!(!e.fast);

        let e = eigenframe(&d, wv(1, 0, 1)).unwrap();
        let xp = e.vector(Branch::Plus);
        let want = [c(0.0, SQRT_2 / 2.0), c(0.5, 0.0), c(0.5, 0.0)];
        for i in 0..3 {
            assert!(close(xp[i], want[i], 1e-15), "component {i}: {:?}", xp[i]);
        }
        assert!(eigenframe(&d, wv(0, 0, 0)).is_err());
    }

    #[test]
    fn advection_examples() {
        let d = Domain::cube();
        let r = FRAC_1_SQRT_2;
        let v = advection_vector(&d, wv(0, 0, 1), Branch::Plus).unwrap();
        assert_eq!(v, [c(r, 0.0), c(0.0, -r), ZERO]);
        let v = advection_vector(&d, wv(1, 0, 1), Branch::Plus).unwrap();
        let want = [c(0.0, SQRT_2 / 2.0), c(0.5, 0.0), c(0.0, -SQRT_2 / 2.0)];
        for i in 0..3 {
            assert!(close(v[i], want[i], 1e-15));
        }
        let v = advection_vector(&d, wv(1, 1, 0), Branch::Slow).unwrap();
        assert!(close(v[0], c(r, 0.0), 1e-15) && close(v[1], c(-r, 0.0), 1e-15) && v[2] == ZERO);
        assert!(advection_vector(&d, wv(1, 1, 0), Branch::Plus).is_err());
    }

    #[test]
    fn eigen_equation_holds() {
        let lat = Lattice::new(Domain::new(2.0, 3.0, 1.5).unwrap(), 9.0).unwrap();
        for wave in lat.waves().iter().filter(|w| w.has_fast()) {
            let lm = l_matrix(wave.k);
            for b in Branch::ALL {
                let x = wave.eigen.vector(b);
                let om = wave.eigen.omega[b.index()];
                for i in 0..3 {
                    let lx: Complex64 = (0..3).map(|j| lm[i][j] * x[j]).sum();
                    assert!(close(lx, c(0.0, om) * x[i], 1e-13), "{} {:?}", wave.n, b);
                }
            }
        }
    }

    #[test]
    fn orthonormal_and_incompressible() {
        let lat = Lattice::new(Domain::cube(), 5.0).unwrap();
        for wave in lat.waves() {
            let present: Vec<Branch> = Branch::ALL.into_iter().filter(|b| wave.modes[b.index()].is_some()).collect();
            for &a in &present {
                for &b in &present {
                    let g = hdot(wave.eigen.vector(a), wave.eigen.vector(b));
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(close(g, c(want, 0.0), 1e-14));
                }
                let v = wave.eigen.velocity(a);
                let div = v[0] * wave.k[0] + v[1] * wave.k[1] + v[2] * wave.k[2];
                assert!(div.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn l_and_inverse() {
        let lat = Lattice::new(Domain::cube(), 3.0).unwrap();
        let mut s = SpectralState::zeros(&lat, Frame::Lab, 0.0);
        s.set(ModeId::new(wv(0, 0, 1), Branch::Plus), c(1.0, 0.0)).unwrap();
        let inv = apply_l_inv(&s).unwrap();
        assert!(close(inv.get(ModeId::new(wv(0, 0, 1), Branch::Plus)), c(0.0, -1.0), 1e-15));
        let io = apply_i_omega(&s);
        assert!(close(io.get(ModeId::new(wv(0, 0, 1), Branch::Plus)), c(0.0, 1.0), 1e-15));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_state(&lat, &mut rng, |_| 1.0);
        assert!(apply_l(&r.slow_part()).is_zero());
        assert!(apply_i_omega(&r.slow_part()).is_zero());
        let fast = r.fast_part();
        let back = apply_l_inv(&apply_l(&fast)).unwrap();
        assert!(back.sub(&fast).l2_norm() < 1e-14);
        assert!(matches!(apply_l_inv(&r), Err(Error::Kernel(_))));
        for s in [0.0, 1.0, 2.0] {
            assert!(apply_i_omega(&r).sobolev_norm(s) <= r.sobolev_norm(s));
        }
    }

    #[test]
    fn split_properties() {
        let lat = Lattice::new(Domain::cube(), 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = random_state(&lat, &mut rng, |k| 1.0 / (1.0 + k * k));
        let sp = slow_fast_split(&r);
        assert!(sp.pv_defect < 1e-14);
        assert!(sp.fast_pv < 1e-14);
        assert_eq!(sp.slow.add(&sp.fast), r);
        let again = slow_fast_split(&sp.slow);
        assert_eq!(again.slow, sp.slow);
        assert!(again.fast.is_zero());
    }

    #[test]
    fn rephasing_fast_vectors_leaves_fields_invariant() {
        // any rephasing X -> e^{iφ}X with w -> e^{-iφ}w reproduces the field
        let d = Domain::cube();
        let e = eigenframe(&d, wv(1, 2, -1)).unwrap();
        let w = c(0.3, -0.7);
        let phi = Complex64::from_polar(1.0, 0.9);
        let x = e.vector(Branch::Plus);
        for i in 0..3 {
            assert!(close(w * x[i], (w / phi) * (phi * x[i]), 1e-15));
        }
    }
}
