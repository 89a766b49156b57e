//! Quadratic interactions: modal coefficients, the Galerkin convolution
//! `B(W, Ŵ)` and the weighted fast–fast–slow operator `B_ω`.
//!
//! Coefficients are stored without the box-volume factor:
//! `C(j,α; k,β; l,γ) = i (VX^α_j·k)(X^β_k·conj X^γ_l)` when `j + k = l`.
//! The `L²` pairing `(a, b) = |M| Σ conj(a) b` carries the volume.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft3::{smooth_at_least, Grid3};
use crate::lattice::{Branch, Domain, Lattice, SpectralState, Wave, WaveVector};
use crate::modes::{eigen_entry, hdot, CVec3, EigenEntry};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance for cone-resonance detection on non-cubic boxes.
pub const RESONANCE_RTOL: f64 = 1e-12;

/// Optional rotated-frame phase data `(t, ε)`.
pub type Phase = Option<(f64, f64)>;

fn entry(domain: &Domain, n: WaveVector) -> Result<EigenEntry> {
    if n.is_zero() {
        return Err(Error::Domain("the zero wavevector carries no modes".into()));
    }
    Ok(eigen_entry(domain.physical(n)))
}

fn dot_real(v: &CVec3, k: [f64; 3]) -> Complex64 {
    v[0] * k[0] + v[1] * k[1] + v[2] * k[2]
}

/// Modal interaction coefficient `C(j,α; k,β; l,γ)`; zero off the triad
/// `j + k = l` and for absent fast branches.
pub fn coeff(
    domain: &Domain,
    j: WaveVector,
    a: Branch,
    k: WaveVector,
    b: Branch,
    l: WaveVector,
    g: Branch,
) -> Result<Complex64> {
    let (ej, ek, el) = (entry(domain, j)?, entry(domain, k)?, entry(domain, l)?);
    if j.add(k) != l {
        return Ok(ZERO);
    }
    let present = |e: &EigenEntry, br: Branch| !br.is_fast() || e.fast;
    if !(present(&ej, a) && present(&ek, b) && present(&el, g)) {
        return Ok(ZERO);
    }
    Ok(I * dot_real(ej.velocity(a), domain.physical(k)) * hdot(ek.vector(b), el.vector(g)))
}

/// Which explicit majorant to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// slow–slow–fast
    SlowSlowFast,
    /// fast–fast–slow
    FastFastSlow,
}

/// Explicit bounds on `|M|·|C|` for the two displayed coefficient families.
pub fn coeff_bounds(domain: &Domain, j: WaveVector, k: WaveVector, _l: WaveVector, kind: BoundKind) -> f64 {
    let m = domain.volume();
    let pj = domain.physical(j);
    let pk = domain.physical(k);
    let hj = pj[0].hypot(pj[1]);
    let hk = pk[0].hypot(pk[1]);
    match kind {
        BoundKind::SlowSlowFast => {
            let nj = (hj * hj + pj[2] * pj[2]).sqrt();
            if nj == 0.0 {
                return 0.0;
            }
            3.0 * m / std::f64::consts::SQRT_2 * hk * hj / nj
        }
        BoundKind::FastFastSlow => {
            if pj[2] == 0.0 {
                return 0.0;
            }
            5f64.sqrt() * m * (hk + hj * pk[2].abs() / pj[2].abs())
        }
    }
}

/// `ω^r_j + ω^s_k = 0` decided exactly on cubic boxes through the integer
/// identity `|j|²k₃² = |k|²j₃²` plus a sign check.
pub fn is_exact_resonance(domain: &Domain, j: WaveVector, r: Branch, k: WaveVector, s: Branch) -> bool {
    if !(r.is_fast() && s.is_fast()) || j.0[2] == 0 || k.0[2] == 0 {
        return false;
    }
    let sign = |n: WaveVector, b: Branch| {
        if n.horizontal_is_zero() {
            b.sign()
        } else {
            b.sign() * f64::from(n.0[2].signum())
        }
    };
    if sign(j, r) == sign(k, s) {
        return false;
    }
    if domain.is_cubic() {
        let n2 = |n: WaveVector| n.0.iter().map(|&x| i64::from(x) * i64::from(x)).sum::<i64>();
        let (j3, k3) = (i64::from(j.0[2]), i64::from(k.0[2]));
        n2(j) * k3 * k3 == n2(k) * j3 * j3
    } else {
        let pj = domain.physical(j);
        let pk = domain.physical(k);
        let a = pj.iter().map(|x| x * x).sum::<f64>() * pk[2] * pk[2];
        let b = pk.iter().map(|x| x * x).sum::<f64>() * pj[2] * pj[2];
        (a - b).abs() <= RESONANCE_RTOL * a.max(b)
    }
}

// e^{-iωt/ε} per mode (rotated -> lab), or None without a phase
fn phase_table(lat: &Lattice, phase: Phase) -> Option<Vec<Complex64>> {
    let (t, eps) = phase?;
    Some(
        (0..lat.n_modes())
            .map(|m| {
                let om = lat.omega(m);
                if om == 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::from_polar(1.0, -om * t / eps) }
            })
            .collect(),
    )
}

/// Per-wave advecting velocity `u_j = Σ w^α_j VX^α_j` and advected field
/// `F_k = Σ ŵ^β_k X^β_k`, in lab-frame coefficients.
fn synthesize(w: &SpectralState, what: &SpectralState, phases: Option<&[Complex64]>) -> (Vec<CVec3>, Vec<CVec3>) {
    let lat = w.lattice();
    let lab = |c: Complex64, m: usize| phases.map_or(c, |p| c * p[m]);
    let mut u = vec![[ZERO; 3]; lat.n_waves()];
    let mut f = vec![[ZERO; 3]; lat.n_waves()];
    for (wi, wave) in lat.waves().iter().enumerate() {
        for b in Branch::ALL {
            let Some(m) = wave.modes[b.index()] else { continue };
            let a = w.coeffs()[m];
            if a != ZERO {
                let a = lab(a, m);
                let v = wave.eigen.velocity(b);
                for i in 0..3 {
                    u[wi][i] += a * v[i];
                }
            }
            let a = what.coeffs()[m];
            if a != ZERO {
                let a = lab(a, m);
                let x = wave.eigen.vector(b);
                for i in 0..3 {
                    f[wi][i] += a * x[i];
                }
            }
        }
    }
    (u, f)
}

/// Projects per-wave physical vectors on the eigenbasis and restores
/// rotated-frame phases.
fn project(template: &SpectralState, g: &[CVec3], phases: Option<&[Complex64]>) -> SpectralState {
    let lat = template.lattice();
    let mut out = vec![ZERO; lat.n_modes()];
    for (wi, wave) in lat.waves().iter().enumerate() {
        if g[wi] == [ZERO; 3] {
            continue;
        }
        for b in Branch::ALL {
            let Some(m) = wave.modes[b.index()] else { continue };
            let v = hdot(&g[wi], wave.eigen.vector(b));
            out[m] = phases.map_or(v, |p| v * p[m].conj());
        }
    }
    template.with_coeffs(out)
}

fn nonzero(v: &CVec3) -> bool {
    v.iter().any(|c| *c != ZERO)
}

/// Galerkin convolution `B(W, Ŵ)` by direct triad summation.
///
/// With `phase = Some((t, ε))` the coefficients are read as rotated-frame
/// values at time `t` and the result is returned in the same frame.
pub fn apply_b(w: &SpectralState, what: &SpectralState, phase: Phase) -> Result<SpectralState> {
    let g = advection_product(w, what, phase)?;
    Ok(project(w, &g, phase_table(w.lattice(), phase).as_deref()))
}

/// Lab-frame Fourier vectors of `u·∇Ŵ` on each lattice wave, before
/// projection on the eigenbasis.
pub(crate) fn advection_product(w: &SpectralState, what: &SpectralState, phase: Phase) -> Result<Vec<CVec3>> {
    w.check_compatible(what)?;
    let lat = w.lattice();
    let (u, f) = synthesize(w, what, phase_table(w.lattice(), phase).as_deref());
    let us: Vec<usize> = (0..u.len()).filter(|&i| nonzero(&u[i])).collect();
    let fs: Vec<usize> = (0..f.len()).filter(|&i| nonzero(&f[i])).collect();
    let mut g = vec![[ZERO; 3]; lat.n_waves()];
    for &j in &us {
        let nj = lat.wave(j).n;
        let uj = u[j];
        for &k in &fs {
            let wk = lat.wave(k);
            let Some(l) = lat.wave_index(nj.add(wk.n)) else { continue };
            let a = I * dot_real(&uj, wk.k);
            let fk = &f[k];
            for i in 0..3 {
                g[l][i] += a * fk[i];
            }
        }
    }
    Ok(g)
}

/// Slow (branch-0) part of `B(W, Ŵ)`.
pub fn apply_b_slow(w: &SpectralState, what: &SpectralState, phase: Phase) -> Result<SpectralState> {
    Ok(apply_b(w, what, phase)?.slow_part())
}

/// Fast (branch-±) part of `B(W, Ŵ)`.
pub fn apply_b_fast(w: &SpectralState, what: &SpectralState, phase: Phase) -> Result<SpectralState> {
    Ok(apply_b(w, what, phase)?.fast_part())
}

/// Symmetrised fast–fast–slow sum `C(j,r; k,s; l,0) + C(k,s; j,r; l,0)`
/// for lattice waves with `j + k = l`.
pub(crate) fn ffs_sum(j: &Wave, r: Branch, k: &Wave, s: Branch, l: &Wave) -> Complex64 {
    let x0 = l.eigen.vector(Branch::Slow);
    let c1 = I * dot_real(j.eigen.velocity(r), k.k) * hdot(k.eigen.vector(s), x0);
    let c2 = I * dot_real(k.eigen.velocity(s), j.k) * hdot(j.eigen.vector(r), x0);
    c1 + c2
}

/// `B_ω(Wᵉ, Ŵᵉ)`: symmetrised fast–fast–slow coefficients divided by the
/// frequency sum, exact resonances omitted. Inputs are rotated-frame values
/// at time `t`.
pub fn apply_b_omega(we: &SpectralState, hwe: &SpectralState, t: f64, eps: f64) -> Result<SpectralState> {
    we.check_compatible(hwe)?;
    let lat = we.lattice().clone();
    for s in [we, hwe] {
        if !s.slow_part().is_zero() {
            return Err(Error::Domain("B_omega takes purely fast inputs".into()));
        }
    }
    let domain = *lat.domain();
    let fast_modes = |s: &SpectralState| -> Vec<usize> {
        (0..lat.n_modes()).filter(|&m| s.coeffs()[m] != ZERO).collect()
    };
    let (ja, ka) = (fast_modes(we), fast_modes(hwe));
    let mut out = vec![ZERO; lat.n_modes()];
    for &mj in &ja {
        let (wj, r) = lat.mode(mj);
        let j = lat.wave(wj);
        for &mk in &ka {
            let (wk, s) = lat.mode(mk);
            let k = lat.wave(wk);
            let Some(wl) = lat.wave_index(j.n.add(k.n)) else { continue };
            let l = lat.wave(wl);
            let ml = l.modes[Branch::Slow.index()].expect("slow mode on every wave");
            if is_exact_resonance(&domain, j.n, r, k.n, s) {
                continue;
            }
            let om = lat.omega(mj) + lat.omega(mk);
            let ph = Complex64::from_polar(1.0, -om * t / eps);
            out[ml] += 0.5 * I * ffs_sum(j, r, k, s, l) / om * we.coeffs()[mj] * hwe.coeffs()[mk] * ph;
        }
    }
    Ok(we.with_coeffs(out))
}

/// Pseudospectral evaluation of `B` on a grid large enough that quadratic
/// products do not alias back onto the lattice. Agrees with [`apply_b`] to
/// rounding and is much cheaper on large lattices.
#[derive(Debug)]
pub struct GridConvolver {
    lattice: Arc<Lattice>,
    grid: Grid3,
    slots: Vec<usize>,
    // slot of -k for each wave
    neg_slots: Vec<usize>,
}

// real-field fast path applies when the constraint defect is at rounding level
const REAL_TOL: f64 = 1e-12;

fn is_real(s: &SpectralState) -> bool {
    let scale = s.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    s.check_reality() <= REAL_TOL * scale
}

impl GridConvolver {
    pub fn new(lattice: &Arc<Lattice>) -> Self {
        let mut bounds = [0i32; 3];
        for w in lattice.waves() {
            for i in 0..3 {
                bounds[i] = bounds[i].max(w.n.0[i].abs());
            }
        }
        let dims = bounds.map(|b| smooth_at_least(3 * b as usize + 1));
        let grid = Grid3::new(dims);
        let slots = lattice.waves().iter().map(|w| grid.slot(w.n)).collect();
        let neg_slots = lattice.waves().iter().map(|w| grid.slot(w.n.neg())).collect();
        Self { lattice: lattice.clone(), grid, slots, neg_slots }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.grid.dims()
    }

    pub fn apply(&self, w: &SpectralState, what: &SpectralState, phase: Phase) -> Result<SpectralState> {
        let phases = phase_table(w.lattice(), phase);
        let g = self.product_with(w, what, phases.as_deref())?;
        Ok(project(w, &g, phases.as_deref()))
    }

    fn product_with(&self, w: &SpectralState, what: &SpectralState, phases: Option<&[Complex64]>) -> Result<Vec<CVec3>> {
        w.check_compatible(what)?;
        if !w.lattice().same_as(&self.lattice) {
            return Err(Error::Shape("state lattice differs from the convolver's".into()));
        }
        let (u, f) = synthesize(w, what, phases);
        if is_real(w) && is_real(what) {
            Ok(self.real_product(&u, &f))
        } else {
            Ok(self.complex_product(&u, &f))
        }
    }

    // spectral field `which` of the twelve inputs: u_0..u_2, then ∂_axis F_comp
    fn field(&self, u: &[CVec3], f: &[CVec3], which: usize, wi: usize) -> Complex64 {
        if which < 3 {
            u[wi][which]
        } else {
            let (comp, axis) = ((which - 3) / 3, (which - 3) % 3);
            I * self.lattice.wave(wi).k[axis] * f[wi][comp]
        }
    }

    // Real fields have real physical values, so two inverse transforms share
    // one complex FFT and two forward transforms are split by symmetry.
    fn real_product(&self, u: &[CVec3], f: &[CVec3]) -> Vec<CVec3> {
        let grid = &self.grid;
        let n = grid.len();
        let mut phys = vec![vec![0.0f64; n]; 12];
        let mut buf = grid.zeros();
        for pair in 0..6 {
            let (a, b) = (2 * pair, 2 * pair + 1);
            buf.iter_mut().for_each(|v| *v = ZERO);
            for (wi, &slot) in self.slots.iter().enumerate() {
                buf[slot] = self.field(u, f, a, wi) + I * self.field(u, f, b, wi);
            }
            grid.to_physical(&mut buf);
            for (x, z) in buf.iter().enumerate() {
                phys[a][x] = z.re;
                phys[b][x] = z.im;
            }
        }
        let prod = |comp: usize, x: usize| (0..3).map(|axis| phys[axis][x] * phys[3 + 3 * comp + axis][x]).sum::<f64>();
        let mut g = vec![[ZERO; 3]; self.lattice.n_waves()];
        for x in 0..n {
            buf[x] = Complex64::new(prod(0, x), prod(1, x));
        }
        grid.to_spectral(&mut buf);
        for (wi, (&s, &ns)) in self.slots.iter().zip(&self.neg_slots).enumerate() {
            let (z, zn) = (buf[s], buf[ns].conj());
            g[wi][0] = 0.5 * (z + zn);
            g[wi][1] = -0.5 * I * (z - zn);
        }
        for x in 0..n {
            buf[x] = Complex64::new(prod(2, x), 0.0);
        }
        grid.to_spectral(&mut buf);
        for (wi, &s) in self.slots.iter().enumerate() {
            g[wi][2] = buf[s];
        }
        g
    }

    fn complex_product(&self, u: &[CVec3], f: &[CVec3]) -> Vec<CVec3> {
        let grid = &self.grid;
        let mut ug: Vec<Vec<Complex64>> = (0..3).map(|_| grid.zeros()).collect();
        for c in 0..3 {
            for (wi, &slot) in self.slots.iter().enumerate() {
                ug[c][slot] = u[wi][c];
            }
            grid.to_physical(&mut ug[c]);
        }
        let mut g = vec![[ZERO; 3]; self.lattice.n_waves()];
        let mut acc = grid.zeros();
        let mut deriv = grid.zeros();
        for comp in 0..3 {
            acc.iter_mut().for_each(|v| *v = ZERO);
            for axis in 0..3 {
                deriv.iter_mut().for_each(|v| *v = ZERO);
                let mut any = false;
                for (wi, &slot) in self.slots.iter().enumerate() {
                    deriv[slot] = self.field(u, f, 3 + 3 * comp + axis, wi);
                    any |= deriv[slot] != ZERO;
                }
                if !any {
                    continue;
                }
                grid.to_physical(&mut deriv);
                for ((a, d), uu) in acc.iter_mut().zip(&deriv).zip(&ug[axis]) {
                    *a += uu * d;
                }
            }
            grid.to_spectral(&mut acc);
            for (wi, &slot) in self.slots.iter().enumerate() {
                g[wi][comp] = acc[slot];
            }
        }
        g
    }
}

/// Writes every nonzero coefficient of the lattice as CSV rows
/// `j,α,k,β,l,γ,Re,Im` (wavevectors as space-separated integers).
pub fn write_coeff_table(lattice: &Lattice, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "j,alpha,k,beta,l,gamma,re,im")?;
    let wv = |n: WaveVector| format!("{} {} {}", n.0[0], n.0[1], n.0[2]);
    for j in lattice.waves() {
        for k in lattice.waves() {
            let Some(li) = lattice.wave_index(j.n.add(k.n)) else { continue };
            let l = lattice.wave(li);
            for a in Branch::ALL.into_iter().filter(|b| j.modes[b.index()].is_some()) {
                let vk = dot_real(j.eigen.velocity(a), k.k);
                if vk == ZERO {
                    continue;
                }
                for b in Branch::ALL.into_iter().filter(|b| k.modes[b.index()].is_some()) {
                    for g in Branch::ALL.into_iter().filter(|b| l.modes[b.index()].is_some()) {
                        let c = I * vk * hdot(k.eigen.vector(b), l.eigen.vector(g));
                        if c.norm() < 1e-15 {
                            continue;
                        }
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{:.16e},{:.16e}",
                            wv(j.n),
                            a.label(),
                            wv(k.n),
                            b.label(),
                            wv(l.n),
                            g.label(),
                            c.re,
                            c.im
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{random_state, Frame, ModeId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn wv(a: i32, b: i32, c: i32) -> WaveVector {
        WaveVector::new(a, b, c)
    }

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn wedge(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[1] - a[1] * b[0]
    }

    fn hnorm(a: [f64; 3]) -> f64 {
        a[0].hypot(a[1])
    }

    fn norm(a: [f64; 3]) -> f64 {
        (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
    }

    // displayed closed forms for the slow-slow-fast coefficient (volume dropped)
    fn b00s_closed(j: [f64; 3], k: [f64; 3], l: [f64; 3], s: f64) -> Complex64 {
        if hnorm(j) * hnorm(k) * l[2] == 0.0 {
            return cx(0.0, 0.0);
        }
        let first = wedge(k, j) / norm(j);
        let second = if hnorm(l) == 0.0 {
            cx(k[1], -s * k[0]) / (SQRT_2 * norm(k))
        } else {
            let kl = k[0] * l[0] + k[1] * l[1];
            cx(k[2] * hnorm(l).powi(2) - kl * l[2], -s * wedge(l, k) * norm(l))
                / (SQRT_2 * norm(k) * norm(l) * hnorm(l))
        };
        cx(0.0, 1.0) * first * second
    }

    // displayed closed forms for the fast-fast-slow coefficient (volume dropped)
    fn brs0_closed(j: [f64; 3], r: f64, k: [f64; 3], s: f64, l: [f64; 3]) -> Complex64 {
        if j[2] * k[2] == 0.0 {
            return cx(0.0, 0.0);
        }
        let v = if hnorm(j) == 0.0 {
            cx(k[0], -r * k[1]) / SQRT_2
        } else {
            let jk = j[0] * k[0] + j[1] * k[1];
            cx(
                j[2] * wedge(j, k),
                r * norm(j) * jk - r * hnorm(j).powi(2) * norm(j) * k[2] / j[2],
            ) / (SQRT_2 * norm(j) * hnorm(j))
        };
        let x = if hnorm(k) == 0.0 && hnorm(l) == 0.0 {
            cx(0.0, 0.0)
        } else if hnorm(k) == 0.0 {
            cx(l[1], s * l[0]) / (SQRT_2 * norm(l))
        } else if hnorm(l) == 0.0 {
            cx(l[2].signum() * hnorm(k) / (SQRT_2 * norm(k)), 0.0)
        } else {
            let kl = k[0] * l[0] + k[1] * l[1];
            cx(-kl * k[2] + hnorm(k).powi(2) * l[2], s * wedge(k, l) * norm(k))
                / (SQRT_2 * norm(k) * hnorm(k) * norm(l))
        };
        cx(0.0, 1.0) * v * x
    }

    #[test]
    fn coefficient_matches_displayed_closed_forms() {
        let d = Domain::cube();
        let lat = Lattice::new(d, 3.0).unwrap();
        let mut checked = 0;
        for j in lat.waves() {
            for k in lat.waves() {
                let l = j.n.add(k.n);
                if l.is_zero() {
                    continue;
                }
                let pl = d.physical(l);
                for s in Branch::FAST {
                    let got = coeff(&d, j.n, Branch::Slow, k.n, Branch::Slow, l, s).unwrap();
                    let want = if l.0[2] == 0 { cx(0.0, 0.0) } else { b00s_closed(j.k, k.k, pl, s.sign()) };
                    assert!((got - want).norm() < 1e-14, "00s {} {} {:?}", j.n, k.n, s);
                    for r in Branch::FAST {
                        let got = coeff(&d, j.n, r, k.n, s, l, Branch::Slow).unwrap();
                        let want = brs0_closed(j.k, r.sign(), k.k, s.sign(), pl);
                        assert!((got - want).norm() < 1e-14, "rs0 {} {} {:?}{:?}", j.n, k.n, r, s);
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn coefficient_examples() {
        let d = Domain::cube();
        let p = Branch::Plus;
        assert_eq!(coeff(&d, wv(1, 0, 0), p, wv(0, 1, 0), p, wv(1, 0, 0), p).unwrap(), cx(0.0, 0.0));
        assert_eq!(
            coeff(&d, wv(1, 0, 0), p, wv(0, 0, 1), p, wv(1, 0, 1), Branch::Slow).unwrap(),
            cx(0.0, 0.0)
        );
        // |j'||k'| l3 = 0
        assert_eq!(
            coeff(&d, wv(0, 0, 1), Branch::Slow, wv(1, 0, 1), Branch::Slow, wv(1, 0, 2), p).unwrap(),
            cx(0.0, 0.0)
        );
        assert_eq!(
            coeff(&d, wv(1, 0, 1), Branch::Slow, wv(0, 1, -1), Branch::Slow, wv(1, 1, 0), p).unwrap(),
            cx(0.0, 0.0)
        );
        assert!(coeff(&d, wv(0, 0, 0), p, wv(1, 0, 0), p, wv(1, 0, 0), p).is_err());
        // hand evaluation: VX^+_(1,0,1)·(0,1,1) = 1/2 - i√2/2; X^-_(0,1,1)·X^0_(1,1,2)
        let v = coeff(&d, wv(1, 0, 1), p, wv(0, 1, 1), Branch::Minus, wv(1, 1, 2), Branch::Slow).unwrap();
        let vk = cx(0.5, -SQRT_2 / 2.0);
        let xk = [cx(-0.5, 0.0), cx(0.0, -SQRT_2 / 2.0), cx(0.5, 0.0)];
        let x0 = [1.0 / 6f64.sqrt(), -1.0 / 6f64.sqrt(), 2.0 / 6f64.sqrt()];
        let dot: Complex64 = (0..3).map(|i| xk[i] * x0[i]).sum();
        assert!((v - cx(0.0, 1.0) * vk * dot).norm() < 1e-15);
    }

    #[test]
    fn bounds_examples_and_domination() {
        let d = Domain::cube();
        let m = d.volume();
        assert_eq!(coeff_bounds(&d, wv(0, 0, 1), wv(1, 0, 1), wv(1, 0, 2), BoundKind::SlowSlowFast), 0.0);
        let b = coeff_bounds(&d, wv(1, 0, 1), wv(0, 1, 1), wv(1, 1, 2), BoundKind::FastFastSlow);
        assert!((b - 2.0 * 5f64.sqrt() * m).abs() < 1e-12);
        assert_eq!(coeff_bounds(&d, wv(1, 0, 0), wv(0, 1, 1), wv(1, 1, 1), BoundKind::FastFastSlow), 0.0);

        let lat = Lattice::new(d, 3.0).unwrap();
        for j in lat.waves() {
            for k in lat.waves() {
                let l = j.n.add(k.n);
                if l.is_zero() {
                    continue;
                }
                let b00 = coeff_bounds(&d, j.n, k.n, l, BoundKind::SlowSlowFast);
                let brs = coeff_bounds(&d, j.n, k.n, l, BoundKind::FastFastSlow);
                for s in Branch::FAST {
                    let c = coeff(&d, j.n, Branch::Slow, k.n, Branch::Slow, l, s).unwrap();
                    assert!(m * c.norm() <= b00 * (1.0 + 1e-12));
                    for r in Branch::FAST {
                        let c = coeff(&d, j.n, r, k.n, s, l, Branch::Slow).unwrap();
                        assert!(m * c.norm() <= brs * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn exact_resonance_detection() {
        let d = Domain::cube();
        let (p, mi) = (Branch::Plus, Branch::Minus);
        assert!(is_exact_resonance(&d, wv(1, 0, 1), p, wv(0, 1, 1), mi));
        assert!(!is_exact_resonance(&d, wv(1, 0, 1), p, wv(0, 1, 1), p));
        assert!(is_exact_resonance(&d, wv(1, 0, 1), p, wv(2, 0, 2), mi));
        assert!(!is_exact_resonance(&d, wv(1, 0, 1), p, wv(0, 0, 1), mi));
        assert!(is_exact_resonance(&d, wv(0, 0, 1), p, wv(0, 0, 2), mi));
        let an = Domain::new(2.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI, 3.0).unwrap();
        assert!(is_exact_resonance(&an, wv(1, 0, 1), p, wv(0, 2, 1), mi));
    }

    fn rand_pair(kmax: f64, seed: u64) -> (SpectralState, SpectralState) {
        let lat = Lattice::new(Domain::cube(), kmax).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state(&lat, &mut rng, |k| 1.0 / (1.0 + k * k));
        let b = random_state(&lat, &mut rng, |k| 1.0 / (1.0 + k * k));
        (a, b)
    }

    #[test]
    fn triple_loop_oracle() {
        let d = Domain::cube();
        let lat = Lattice::new(d, 2.0).unwrap();
        let mut w = SpectralState::zeros(&lat, Frame::Rotated, 0.3);
        let mut h = SpectralState::zeros(&lat, Frame::Rotated, 0.3);
        let ids = [
            (ModeId::new(wv(1, 0, 1), Branch::Plus), cx(0.4, -0.2)),
            (ModeId::new(wv(0, 1, 0), Branch::Slow), cx(-0.1, 0.7)),
            (ModeId::new(wv(0, 0, -1), Branch::Minus), cx(0.3, 0.5)),
        ];
        for (id, v) in ids {
            w.set(id, v).unwrap();
            h.set(id, v * cx(0.5, 1.0)).unwrap();
        }
        let (t, eps) = (0.3, 0.1);
        let got = apply_b(&w, &h, Some((t, eps))).unwrap();
        for ml in 0..lat.n_modes() {
            let idl = lat.mode_id(ml);
            let mut want = cx(0.0, 0.0);
            for mj in 0..lat.n_modes() {
                for mk in 0..lat.n_modes() {
                    let (idj, idk) = (lat.mode_id(mj), lat.mode_id(mk));
                    let c = coeff(&d, idj.wave, idj.branch, idk.wave, idk.branch, idl.wave, idl.branch).unwrap();
                    let ph = lat.omega(ml) - lat.omega(mj) - lat.omega(mk);
                    want += c * w.coeffs()[mj] * h.coeffs()[mk] * Complex64::from_polar(1.0, ph * t / eps);
                }
            }
            assert!((got.coeffs()[ml] - want).norm() < 1e-13, "{:?}", idl);
        }
    }

    #[test]
    fn energy_pairing_vanishes() {
        for seed in 0..5 {
            let (w, h) = rand_pair(3.0, seed);
            let b = apply_b(&h, &w, Some((0.7, 0.05))).unwrap();
            let e = w.l2_inner(&b).re;
            let scale = h.sobolev_norm(1.0) * w.l2_norm().powi(2) * w.lattice().domain().volume();
            assert!(e.abs() <= 1e-12 * scale, "{e}");
        }
    }

    #[test]
    fn grid_path_matches_direct() {
        let (w, h) = rand_pair(4.0, 3);
        let conv = GridConvolver::new(w.lattice());
        assert_eq!(conv.dims(), [15, 15, 15]);
        for phase in [None, Some((1.3, 0.07))] {
            let a = apply_b(&w, &h, phase).unwrap();
            let b = conv.apply(&w, &h, phase).unwrap();
            assert!(a.sub(&b).l2_norm() <= 1e-12 * a.l2_norm());
        }
        let an = Lattice::new(Domain::new(3.0, 5.0, 2.0).unwrap(), 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_state(&an, &mut rng, |_| 1.0);
        let h = random_state(&an, &mut rng, |_| 1.0);
        let a = apply_b(&w, &h, None).unwrap();
        let b = GridConvolver::new(&an).apply(&w, &h, None).unwrap();
        assert!(a.sub(&b).l2_norm() <= 1e-12 * a.l2_norm());

        // coefficients of complex fields take the general path
        let (w, h) = rand_pair(3.0, 5);
        let skew = w.with_coeffs(w.coeffs().iter().enumerate().map(|(m, c)| c * (1.0 + 0.1 * m as f64)).collect());
        assert!(skew.check_reality() > 1e-3);
        let conv = GridConvolver::new(w.lattice());
        for (x, y) in [(&skew, &h), (&h, &skew)] {
            let a = apply_b(x, y, Some((0.4, 0.2))).unwrap();
            let b = conv.apply(x, y, Some((0.4, 0.2))).unwrap();
            assert!(a.sub(&b).l2_norm() <= 1e-12 * a.l2_norm());
        }
    }

    #[test]
    fn partition_and_cross_identity() {
        let (w, h) = rand_pair(3.0, 11);
        let ph = Some((0.2, 0.1));
        let b = apply_b(&w, &h, ph).unwrap();
        let s = apply_b_slow(&w, &h, ph).unwrap();
        let f = apply_b_fast(&w, &h, ph).unwrap();
        assert_eq!(s.add(&f), b);

        let (w0, we) = (w.slow_part(), w.fast_part());
        let lhs = w0.l2_inner(&apply_b(&we, &we, ph).unwrap()).re;
        let rhs = -we.l2_inner(&apply_b(&we, &w0, ph).unwrap()).re;
        assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0));
    }

    #[test]
    fn slow_slow_is_pv_advection() {
        let (w, _) = rand_pair(3.0, 4);
        let w0 = w.slow_part();
        let lat = w.lattice();
        let b0 = apply_b_slow(&w0, &w0, None).unwrap();
        // ψ_k = i w⁰_k/|k|, u = ∇^⊥ψ, q = Δψ; slow tendency i(u·∇q)_l/|l|
        let psi: Vec<Complex64> = lat
            .waves()
            .iter()
            .map(|wave| cx(0.0, 1.0) * w0.coeffs()[wave.modes[1].unwrap()] / wave.norm)
            .collect();
        for (li, l) in lat.waves().iter().enumerate() {
            let mut adv = cx(0.0, 0.0);
            for (ji, j) in lat.waves().iter().enumerate() {
                let Some(ki) = lat.wave_index(l.n.sub(j.n)) else { continue };
                let k = lat.wave(ki);
                let u = [cx(0.0, -j.k[1]) * psi[ji], cx(0.0, j.k[0]) * psi[ji]];
                let q = -k.norm * k.norm * psi[ki];
                adv += cx(0.0, 1.0) * (u[0] * k.k[0] + u[1] * k.k[1]) * q;
            }
            let want = cx(0.0, 1.0) * adv / l.norm;
            assert!((b0.coeffs()[l.modes[1].unwrap()] - want).norm() < 1e-12, "{}", l.n);
            let _ = li;
        }
    }

    #[test]
    fn b_omega_examples() {
        let d = Domain::cube();
        let lat = Lattice::new(d, 3.0).unwrap();
        // exactly resonant single pair contributes nothing
        let mut a = SpectralState::zeros(&lat, Frame::Rotated, 0.0);
        let mut b = a.clone();
        a.set(ModeId::new(wv(1, 0, 1), Branch::Plus), cx(1.0, 0.0)).unwrap();
        b.set(ModeId::new(wv(0, 1, 1), Branch::Minus), cx(1.0, 0.0)).unwrap();
        assert!(apply_b_omega(&a, &b, 0.0, 0.1).unwrap().is_zero());

        // near-resonant single triad
        let mut b = SpectralState::zeros(&lat, Frame::Rotated, 0.0);
        b.set(ModeId::new(wv(0, 0, 1), Branch::Minus), cx(0.5, 0.0)).unwrap();
        let (t, eps) = (0.4, 0.2);
        let out = apply_b_omega(&a, &b, t, eps).unwrap();
        let (j, k, l) = (wv(1, 0, 1), wv(0, 0, 1), wv(1, 0, 2));
        let c = coeff(&d, j, Branch::Plus, k, Branch::Minus, l, Branch::Slow).unwrap()
            + coeff(&d, k, Branch::Minus, j, Branch::Plus, l, Branch::Slow).unwrap();
        let om = SQRT_2 - 1.0;
        let want = 0.5 * cx(0.0, 1.0) * c / om * 0.5 * Complex64::from_polar(1.0, -om * t / eps);
        let got = out.get(ModeId::new(l, Branch::Slow));
        assert!((got - want).norm() < 1e-15, "{got} {want}");
        assert_eq!(out.sub(&out.slow_part()).l2_norm(), 0.0);
        assert!(matches!(apply_b_omega(&a.add(&out), &b, t, eps), Err(Error::Domain(_))));
    }

    #[test]
    fn coeff_table_csv() {
        let lat = Lattice::new(Domain::cube(), 1.0).unwrap();
        let mut buf = Vec::new();
        write_coeff_table(&lat, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("j,alpha,k,beta,l,gamma,re,im\n"));
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), 8);
        }
    }
}
