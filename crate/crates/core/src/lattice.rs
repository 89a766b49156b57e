//! Periodic box, wavevector lattice, spectral states and their norms.
//!
//! A [`Lattice`] enumerates every nonzero wavevector inside a cutoff sphere in
//! lexicographic order of its integer triple, and numbers the normal modes
//! living on each wavevector (branch order `-, 0, +`). All summations in the
//! crate walk this order, which keeps floating-point results reproducible.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::modes::{self, EigenEntry};

/// Relative slack used when testing `|k|^2` against a cutoff radius.
const CUTOFF_SLACK: f64 = 1e-12;

/// Side lengths of the periodic box `[0,L1] x [0,L2] x [-L3/2,L3/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    lengths: [f64; 3],
}

impl Domain {
    pub fn new(l1: f64, l2: f64, l3: f64) -> Result<Self> {
        let lengths = [l1, l2, l3];
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::Config(format!(
                "box lengths must be finite and > 0, got {lengths:?}"
            )));
        }
        Ok(Self { lengths })
    }

    /// The `2π`-periodic cube, on which physical and integer wavevectors coincide.
    pub fn cube() -> Self {
        Self { lengths: [2.0 * PI; 3] }
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    /// `|M| = L1 L2 L3`.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn is_cubic(&self) -> bool {
        self.lengths[0] == self.lengths[1] && self.lengths[1] == self.lengths[2]
    }

    /// Physical wavevector `k_i = 2π l_i / L_i`.
    pub fn physical(&self, n: WaveVector) -> [f64; 3] {
        let mut k = [0.0; 3];
        for i in 0..3 {
            k[i] = 2.0 * PI * f64::from(n.0[i]) / self.lengths[i];
        }
        k
    }
}

/// Integer lattice triple `(l1, l2, l3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveVector(pub [i32; 3]);

impl WaveVector {
    pub fn new(l1: i32, l2: i32, l3: i32) -> Self {
        Self([l1, l2, l3])
    }

    pub fn is_zero(self) -> bool {
        self.0 == [0, 0, 0]
    }

    pub fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// `(l1, l2, -l3)`.
    pub fn reflect(self) -> Self {
        Self([self.0[0], self.0[1], -self.0[2]])
    }

    pub fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }

    pub fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }

    pub fn horizontal_is_zero(self) -> bool {
        self.0[0] == 0 && self.0[1] == 0
    }
}

impl std::fmt::Display for WaveVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Normal-mode branch: slow (`0`) or fast (`±`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Minus,
    Slow,
    Plus,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Minus, Branch::Slow, Branch::Plus];
    pub const FAST: [Branch; 2] = [Branch::Minus, Branch::Plus];

    pub fn index(self) -> usize {
        match self {
            Branch::Minus => 0,
            Branch::Slow => 1,
            Branch::Plus => 2,
        }
    }

    pub fn from_index(i: usize) -> Branch {
        Branch::ALL[i]
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            Branch::Slow => 0.0,
            Branch::Plus => 1.0,
        }
    }

    pub fn is_fast(self) -> bool {
        self != Branch::Slow
    }

    pub fn opposite(self) -> Branch {
        match self {
            Branch::Minus => Branch::Plus,
            Branch::Slow => Branch::Slow,
            Branch::Plus => Branch::Minus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Minus => "-",
            Branch::Slow => "0",
            Branch::Plus => "+",
        }
    }

    pub fn parse(s: &str) -> Option<Branch> {
        match s {
            "-" | "-1" | "minus" => Some(Branch::Minus),
            "0" | "slow" => Some(Branch::Slow),
            "+" | "1" | "+1" | "plus" => Some(Branch::Plus),
            _ => None,
        }
    }
}

/// A wavevector together with a branch label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub wave: WaveVector,
    pub branch: Branch,
}

impl ModeId {
    pub fn new(wave: WaveVector, branch: Branch) -> Self {
        Self { wave, branch }
    }
}

/// Per-wavevector data: physical components, magnitudes, mode slots and eigenframe.
#[derive(Debug, Clone)]
pub struct Wave {
    pub n: WaveVector,
    pub k: [f64; 3],
    pub norm: f64,
    pub horiz: f64,
    /// Mode index per branch (`None` when the branch is absent).
    pub modes: [Option<usize>; 3],
    pub eigen: EigenEntry,
}

impl Wave {
    pub fn has_fast(&self) -> bool {
        self.n.0[2] != 0
    }
}

/// Constraint partner of a mode: `w[mode] = sign * op(w[partner])`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Partner {
    mode: usize,
    sign: f64,
}

/// All nonzero lattice wavevectors inside a cutoff sphere, with their modes.
#[derive(Debug)]
pub struct Lattice {
    domain: Domain,
    radius: f64,
    strict: bool,
    waves: Vec<Wave>,
    modes: Vec<(usize, Branch)>,
    bounds: [i32; 3],
    grid: Vec<i32>,
    reality: Vec<Partner>,
    reflection: Vec<Partner>,
}

/// Enumerates the nonzero wavevectors with `|k| <= kmax`, lexicographically.
pub fn wavevectors(domain: &Domain, kmax: f64) -> Result<Vec<WaveVector>> {
    if !(kmax > 0.0) {
        return Err(Error::Config(format!("kmax must be > 0, got {kmax}")));
    }
    Ok(enumerate(domain, kmax, false).0)
}

fn enumerate(domain: &Domain, radius: f64, strict: bool) -> (Vec<WaveVector>, [i32; 3]) {
    let l = domain.lengths();
    let mut bounds = [0i32; 3];
    for i in 0..3 {
        bounds[i] = (radius * l[i] / (2.0 * PI)).floor() as i32;
    }
    let r2 = radius * radius;
    let mut out = Vec::new();
    for a in -bounds[0]..=bounds[0] {
        for b in -bounds[1]..=bounds[1] {
            for c in -bounds[2]..=bounds[2] {
                let n = WaveVector::new(a, b, c);
                if n.is_zero() {
                    continue;
                }
                let k = domain.physical(n);
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let inside = if strict {
                    k2 < r2 * (1.0 - CUTOFF_SLACK)
                } else {
                    k2 <= r2 * (1.0 + CUTOFF_SLACK)
                };
                if inside {
                    out.push(n);
                }
            }
        }
    }
    (out, bounds)
}

impl Lattice {
    /// Lattice with support `0 < |k| <= kmax`.
    pub fn new(domain: Domain, kmax: f64) -> Result<Arc<Self>> {
        if !(kmax > 0.0) {
            return Err(Error::Config(format!("kmax must be > 0, got {kmax}")));
        }
        Ok(Arc::new(Self::build(domain, kmax, false)))
    }

    /// Lattice with support `0 < |k| < kappa` (the low-mode truncation set).
    pub fn below(domain: Domain, kappa: f64) -> Result<Arc<Self>> {
        if !(kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be > 0, got {kappa}")));
        }
        Ok(Arc::new(Self::build(domain, kappa, true)))
    }

    fn build(domain: Domain, radius: f64, strict: bool) -> Self {
        let (list, bounds) = enumerate(&domain, radius, strict);
        let dims = bounds.map(|b| (2 * b + 1) as usize);
        let mut grid = vec![-1i32; dims[0] * dims[1] * dims[2]];
        let mut waves = Vec::with_capacity(list.len());
        let mut modes = Vec::new();
        for (w, &n) in list.iter().enumerate() {
            let k = domain.physical(n);
            let horiz = (k[0] * k[0] + k[1] * k[1]).sqrt();
            let norm = (horiz * horiz + k[2] * k[2]).sqrt();
            let eigen = modes::eigen_entry(k);
            let mut slots = [None; 3];
            for b in Branch::ALL {
                if b.is_fast() && n.0[2] == 0 {
                    continue;
                }
                slots[b.index()] = Some(modes.len());
                modes.push((w, b));
            }
            let g = grid_offset(bounds, n).expect("enumerated wave inside bounds");
            grid[g] = w as i32;
            waves.push(Wave { n, k, norm, horiz, modes: slots, eigen });
        }
        let mut lat = Self {
            domain,
            radius,
            strict,
            waves,
            modes,
            bounds,
            grid,
            reality: Vec::new(),
            reflection: Vec::new(),
        };
        lat.reality = (0..lat.modes.len()).map(|m| lat.reality_partner(m)).collect();
        lat.reflection = (0..lat.modes.len()).map(|m| lat.reflection_partner(m)).collect();
        lat
    }

    // w[m] = sign * conj(w[partner]) for real fields.
    fn reality_partner(&self, m: usize) -> Partner {
        let (w, b) = self.modes[m];
        let n = self.waves[w].n;
        let target = n.neg();
        let (branch, sign) = match b {
            Branch::Slow => (Branch::Slow, -1.0),
            _ if n.horizontal_is_zero() => (b.opposite(), 1.0),
            _ => (b, 1.0),
        };
        Partner { mode: self.mode_index(ModeId::new(target, branch)).unwrap(), sign }
    }

    // w[m] = sign * w[partner] for v even and rho odd in z.
    fn reflection_partner(&self, m: usize) -> Partner {
        let (w, b) = self.modes[m];
        let n = self.waves[w].n;
        let target = n.reflect();
        let (branch, sign) = match b {
            Branch::Slow => (Branch::Slow, 1.0),
            _ if n.horizontal_is_zero() => (b, 1.0),
            _ => (b.opposite(), -1.0),
        };
        Partner { mode: self.mode_index(ModeId::new(target, branch)).unwrap(), sign }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Support radius (`K_max`, or `κ` for a strict lattice).
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn waves(&self) -> &[Wave] {
        &self.waves
    }

    pub fn wave(&self, w: usize) -> &Wave {
        &self.waves[w]
    }

    pub fn n_waves(&self) -> usize {
        self.waves.len()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// `(wave index, branch)` of mode `m`.
    pub fn mode(&self, m: usize) -> (usize, Branch) {
        self.modes[m]
    }

    pub fn mode_id(&self, m: usize) -> ModeId {
        let (w, b) = self.modes[m];
        ModeId::new(self.waves[w].n, b)
    }

    pub fn wave_index(&self, n: WaveVector) -> Option<usize> {
        let g = grid_offset(self.bounds, n)?;
        let w = self.grid[g];
        (w >= 0).then_some(w as usize)
    }

    pub fn mode_index(&self, id: ModeId) -> Option<usize> {
        self.wave_index(id.wave)
            .and_then(|w| self.waves[w].modes[id.branch.index()])
    }

    /// Frequency of mode `m`.
    pub fn omega(&self, m: usize) -> f64 {
        let (w, b) = self.modes[m];
        self.waves[w].eigen.omega[b.index()]
    }

    /// Same domain and same support set.
    pub fn same_as(&self, other: &Lattice) -> bool {
        std::ptr::eq(self, other)
            || (self.domain == other.domain
                && self.radius == other.radius
                && self.strict == other.strict)
    }

    pub(crate) fn reality_map(&self, m: usize) -> (usize, f64) {
        let p = self.reality[m];
        (p.mode, p.sign)
    }

    pub(crate) fn reflection_map(&self, m: usize) -> (usize, f64) {
        let p = self.reflection[m];
        (p.mode, p.sign)
    }
}

fn grid_offset(bounds: [i32; 3], n: WaveVector) -> Option<usize> {
    let mut off = 0usize;
    for i in 0..3 {
        let v = n.0[i];
        if v < -bounds[i] || v > bounds[i] {
            return None;
        }
        let dim = (2 * bounds[i] + 1) as usize;
        off = off * dim + (v + bounds[i]) as usize;
    }
    Some(off)
}

/// Which oscillation convention the coefficients use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Linear oscillations factored out: physical coefficient is `w e^{-iωt/ε}`.
    Rotated,
    /// Plain Fourier-eigenbasis coefficients of the physical fields.
    Lab,
}

impl Frame {
    pub fn label(self) -> &'static str {
        match self {
            Frame::Rotated => "rotated",
            Frame::Lab => "lab",
        }
    }

    pub fn parse(s: &str) -> Option<Frame> {
        match s {
            "rotated" => Some(Frame::Rotated),
            "lab" => Some(Frame::Lab),
            _ => None,
        }
    }
}

/// Normal-mode coefficients `w^α_k` of a state, one per lattice mode.
#[derive(Debug, Clone)]
pub struct SpectralState {
    lattice: Arc<Lattice>,
    coeffs: Vec<Complex64>,
    frame: Frame,
    time: f64,
}

impl PartialEq for SpectralState {
    fn eq(&self, o: &Self) -> bool {
        self.lattice.same_as(&o.lattice)
            && self.frame == o.frame
            && self.time.to_bits() == o.time.to_bits()
            && self.coeffs.len() == o.coeffs.len()
            && self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
    }
}

impl SpectralState {
    pub fn zeros(lattice: &Arc<Lattice>, frame: Frame, time: f64) -> Self {
        Self { lattice: lattice.clone(), coeffs: vec![Complex64::new(0.0, 0.0); lattice.n_modes()], frame, time }
    }

    pub fn from_coeffs(lattice: &Arc<Lattice>, coeffs: Vec<Complex64>, frame: Frame, time: f64) -> Result<Self> {
        if coeffs.len() != lattice.n_modes() {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                lattice.n_modes(),
                coeffs.len()
            )));
        }
        Ok(Self { lattice: lattice.clone(), coeffs, frame, time })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn get(&self, id: ModeId) -> Complex64 {
        self.lattice
            .mode_index(id)
            .map_or(Complex64::new(0.0, 0.0), |m| self.coeffs[m])
    }

    pub fn set(&mut self, id: ModeId, v: Complex64) -> Result<()> {
        match self.lattice.mode_index(id) {
            Some(m) => {
                self.coeffs[m] = v;
                Ok(())
            }
            None => Err(Error::Domain(format!(
                "mode {} branch {} not in lattice",
                id.wave,
                id.branch.label()
            ))),
        }
    }

    /// Same lattice, frame and time as `self`, with new coefficients.
    pub fn with_coeffs(&self, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        Self { lattice: self.lattice.clone(), coeffs, frame: self.frame, time: self.time }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.lattice, self.frame, self.time)
    }

    pub fn check_compatible(&self, o: &Self) -> Result<()> {
        if !self.lattice.same_as(&o.lattice) {
            return Err(Error::Shape("states live on different lattices".into()));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// `self += a * o`.
    pub fn axpy(&mut self, a: Complex64, o: &Self) {
        for (x, y) in self.coeffs.iter_mut().zip(&o.coeffs) {
            *x += a * y;
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.axpy(Complex64::new(1.0, 0.0), o);
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.axpy(Complex64::new(-1.0, 0.0), o);
        r
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|c| c * a).collect())
    }

    /// Keeps only the coefficients for which `keep(mode)` holds.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> Self {
        self.with_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(m, &c)| if keep(m) { c } else { Complex64::new(0.0, 0.0) })
                .collect(),
        )
    }

    /// Branch-0 part.
    pub fn slow_part(&self) -> Self {
        let lat = self.lattice.clone();
        self.filter(|m| lat.mode(m).1 == Branch::Slow)
    }

    /// Branch-± part.
    pub fn fast_part(&self) -> Self {
        let lat = self.lattice.clone();
        self.filter(|m| lat.mode(m).1.is_fast())
    }

    /// Maps the coefficients onto another lattice over the same domain,
    /// dropping modes that do not exist there.
    pub fn transfer(&self, target: &Arc<Lattice>) -> Result<Self> {
        if self.lattice.domain() != target.domain() {
            return Err(Error::Shape("cannot transfer between different domains".into()));
        }
        let mut out = Self::zeros(target, self.frame, self.time);
        for (m, &c) in self.coeffs.iter().enumerate() {
            if let Some(t) = target.mode_index(self.lattice.mode_id(m)) {
                out.coeffs[t] = c;
            }
        }
        Ok(out)
    }

    /// Converts between rotated and lab frames at the stored time.
    pub fn to_frame(&self, frame: Frame, eps: f64) -> Self {
        if frame == self.frame {
            return self.clone();
        }
        // rotated -> lab multiplies by e^{-iωt/ε}
        let dir = if frame == Frame::Lab { -1.0 } else { 1.0 };
        let mut out = self.clone();
        out.frame = frame;
        for (m, c) in out.coeffs.iter_mut().enumerate() {
            let om = self.lattice.omega(m);
            if om != 0.0 {
                *c *= Complex64::from_polar(1.0, dir * om * self.time / eps);
            }
        }
        out
    }

    /// `Σ_k |k|^{2s} Σ_α |w^α_k|^2`, square-rooted.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.weighted_norm(|w| if s == 0.0 { 1.0 } else { w.norm.powf(2.0 * s) })
    }

    /// Gevrey norm with weight `e^{2σ|k|}`.
    pub fn gevrey_norm(&self, sigma: f64) -> f64 {
        self.weighted_norm(|w| (2.0 * sigma * w.norm).exp())
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    fn weighted_norm(&self, weight: impl Fn(&Wave) -> f64) -> f64 {
        let mut acc = 0.0;
        for (m, c) in self.coeffs.iter().enumerate() {
            let (w, _) = self.lattice.mode(m);
            acc += weight(&self.lattice.waves[w]) * c.norm_sqr();
        }
        acc.sqrt()
    }

    /// Low/high split: `low` keeps `|k| < kappa`, `high` the rest.
    pub fn truncate(&self, kappa: f64) -> Result<(Self, Self)> {
        if !(kappa > 0.0) {
            return Err(Error::Config(format!("kappa must be > 0, got {kappa}")));
        }
        let k2 = kappa * kappa * (1.0 - CUTOFF_SLACK);
        let lat = self.lattice.clone();
        let low = self.filter(|m| {
            let w = &lat.waves[lat.mode(m).0];
            w.norm * w.norm < k2
        });
        let high = self.sub(&low);
        Ok((low, high))
    }

    /// Largest deviation from the reality and z-symmetry constraints.
    pub fn check_reality(&self) -> f64 {
        let p = self.enforce_reality();
        self.coeffs
            .iter()
            .zip(&p.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Orthogonal projection onto coefficient vectors of real fields with
    /// `v` even and `ρ` odd in `z` (average over the constraint orbit).
    pub fn enforce_reality(&self) -> Self {
        let lat = &self.lattice;
        let half_r: Vec<Complex64> = (0..self.coeffs.len())
            .map(|m| {
                let (p, s) = lat.reality_map(m);
                0.5 * (self.coeffs[m] + s * self.coeffs[p].conj())
            })
            .collect();
        let full: Vec<Complex64> = (0..half_r.len())
            .map(|m| {
                let (p, s) = lat.reflection_map(m);
                0.5 * (half_r[m] + s * half_r[p])
            })
            .collect();
        self.with_coeffs(full)
    }

    /// Rebuilds every coefficient from the canonical representative of its
    /// constraint orbit (the lexicographically largest mode index), then
    /// projects so that self-mapped modes also satisfy their constraint.
    pub fn materialize_partners(&self) -> Self {
        let lat = &self.lattice;
        let n = self.coeffs.len();
        let mut out = self.coeffs.clone();
        for m in 0..n {
            let rep = orbit_rep(lat, m);
            if rep != m {
                continue;
            }
            let v = self.coeffs[m];
            // R(m): w[r] = s conj(w[m]); Z(m): w[z] = s w[m]
            let (r, sr) = lat.reality_map(m);
            let (z, sz) = lat.reflection_map(m);
            let vr = sr * v.conj();
            let vz = sz * v;
            let (rz, srz) = lat.reflection_map(r);
            let vrz = srz * vr;
            for (target, val) in [(r, vr), (z, vz), (rz, vrz)] {
                if target != m {
                    out[target] = val;
                }
            }
        }
        self.with_coeffs(out).enforce_reality()
    }

    /// Sets `id` and the rest of its constraint orbit so that the state
    /// stays real and z-symmetric (up to a final projection for orbits that
    /// map a mode onto itself).
    pub fn set_with_partners(&mut self, id: ModeId, v: Complex64) -> Result<()> {
        let lat = self.lattice.clone();
        let m = lat
            .mode_index(id)
            .ok_or_else(|| Error::Shape(format!("mode {} {} is not on the lattice", id.wave, id.branch.label())))?;
        let (r, sr) = lat.reality_map(m);
        let (z, sz) = lat.reflection_map(m);
        let (rz, srz) = lat.reflection_map(r);
        let vr = sr * v.conj();
        for (target, val) in [(m, v), (r, vr), (z, sz * v), (rz, srz * vr)] {
            self.coeffs[target] = val;
        }
        Ok(())
    }

    /// `Σ conj(a) b`, the pairing without the volume factor.
    pub fn coeff_inner(&self, o: &Self) -> Complex64 {
        self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    /// `(a, b)_{L²} = |M| Σ conj(a) b`; conjugate-linear in the first slot.
    pub fn l2_inner(&self, o: &Self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.coeffs.iter().zip(&o.coeffs) {
            acc += a.conj() * b;
        }
        acc * self.lattice.domain().volume()
    }
}

fn orbit_rep(lat: &Lattice, m: usize) -> usize {
    let r = lat.reality_map(m).0;
    let z = lat.reflection_map(m).0;
    let rz = lat.reflection_map(r).0;
    m.max(r).max(z).max(rz)
}

/// Random coefficients in `[-1,1]^2` scaled by `envelope(|k|)`, projected onto
/// the reality/symmetry constraint set.
pub fn random_state<R: Rng>(
    lattice: &Arc<Lattice>,
    rng: &mut R,
    envelope: impl Fn(f64) -> f64,
) -> SpectralState {
    let coeffs = (0..lattice.n_modes())
        .map(|m| {
            let w = lattice.wave(lattice.mode(m).0);
            let a = envelope(w.norm);
            Complex64::new(rng.gen_range(-1.0..1.0) * a, rng.gen_range(-1.0..1.0) * a)
        })
        .collect();
    SpectralState { lattice: lattice.clone(), coeffs, frame: Frame::Rotated, time: 0.0 }.enforce_reality()
}
