//! Iterative slow-manifold construction `Wᵉ< ≈ Uⁿ(W⁰<)` on the low modes
//! `|k| < κ`, with exact directional derivatives from forward-mode jets.
//!
//! Everything is computed in the lab frame, where the construction is
//! autonomous for steady forcing; rotated-frame values are the lab values
//! times `e^{iωt₀/ε}` at the caller's reference time.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dynamics::ForcingSpec;
use crate::error::{Error, Result};
use crate::interactions::GridConvolver;
use crate::lattice::{Frame, Lattice, SpectralState};

/// Truncation parameters for a given ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaDelta {
    pub kappa: f64,
    pub delta: f64,
    pub n_cap: usize,
    /// True when `ε^{-1/4}` exceeded `K_max` and κ was capped.
    pub kappa_capped: bool,
}

/// `κ = min(ε^{-1/4}, K_max)`, `δ = ε^{1/4}`, `n_cap = min(⌊η/δ⌋, n_max)`.
pub fn kappa_delta(eps: f64, k_max: f64, eta: f64, n_max: usize) -> Result<KappaDelta> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Config(format!("epsilon must be in (0, 1], got {eps}")));
    }
    if !(eta > 0.0) {
        return Err(Error::Config(format!("eta must be > 0, got {eta}")));
    }
    let delta = eps.powf(0.25);
    let raw = 1.0 / delta;
    let kappa = raw.min(k_max);
    let n_cap = ((eta / delta).floor() as usize).min(n_max);
    Ok(KappaDelta { kappa, delta, n_cap, kappa_capped: raw > k_max })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldOptions {
    pub eta: f64,
    pub n_max: usize,
    /// Replaces `ε^{-1/4}` as the truncation radius (still capped at `K_max`).
    pub kappa: Option<f64>,
}

impl Default for ManifoldOptions {
    fn default() -> Self {
        Self { eta: 4.0, n_max: 4, kappa: None }
    }
}

/// A truncated jet `x₀ + Σ_S x_S Π_{i∈S} εᵢ` with `εᵢ² = 0`. Part `mask`
/// holds the coefficient of the product of the infinitesimals in `mask`, so
/// part 0 is the value and part `1 << i` the derivative along direction `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    parts: Vec<SpectralState>,
}

impl Jet {
    pub fn constant(base: SpectralState) -> Self {
        Self { parts: vec![base] }
    }

    /// Value `base` with one infinitesimal along `dir`.
    pub fn directional(base: SpectralState, dir: SpectralState) -> Result<Self> {
        base.check_compatible(&dir)?;
        Ok(Self { parts: vec![base, dir] })
    }

    /// Number of infinitesimals.
    pub fn order(&self) -> usize {
        self.parts.len().trailing_zeros() as usize
    }

    pub fn base(&self) -> &SpectralState {
        &self.parts[0]
    }

    pub fn part(&self, mask: usize) -> &SpectralState {
        &self.parts[mask]
    }

    /// First derivative along direction `i`.
    pub fn derivative(&self, i: usize) -> &SpectralState {
        &self.parts[1 << i]
    }

    fn zeros_like(&self) -> Self {
        Self { parts: self.parts.iter().map(|p| p.zeros_like()).collect() }
    }

    fn map(&self, f: impl Fn(&SpectralState) -> SpectralState) -> Self {
        Self { parts: self.parts.iter().map(f).collect() }
    }

    fn zip(&self, o: &Self, f: impl Fn(&SpectralState, &SpectralState) -> SpectralState) -> Self {
        Self { parts: self.parts.iter().zip(&o.parts).map(|(a, b)| f(a, b)).collect() }
    }

    /// Adds a new infinitesimal whose coefficient is `g`.
    fn extend(&self, g: &Jet) -> Self {
        let mut parts = self.parts.clone();
        parts.extend(g.parts.iter().cloned());
        Self { parts }
    }

    /// Coefficient of the newest infinitesimal.
    fn top(&self) -> Self {
        let h = self.parts.len() / 2;
        Self { parts: self.parts[h..].to_vec() }
    }

    /// `B(x, y)` on jets: part `S` is `Σ_{T⊆S} B(x_T, y_{S∖T})`.
    fn bilinear(
        &self,
        o: &Self,
        b: &impl Fn(&SpectralState, &SpectralState) -> Result<SpectralState>,
    ) -> Result<Self> {
        let mut out = self.zeros_like();
        for s in 0..self.parts.len() {
            // enumerate the submasks of s
            let mut t = s;
            loop {
                let (x, y) = (&self.parts[t], &o.parts[s & !t]);
                if !x.is_zero() && !y.is_zero() {
                    out.parts[s].axpy(Complex64::new(1.0, 0.0), &b(x, y)?);
                }
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
        }
        Ok(out)
    }
}

/// The n-th iterate `Uⁿ` for a fixed steady forcing, ε and truncation.
#[derive(Debug, Clone)]
pub struct ManifoldApprox {
    order: usize,
    eps: f64,
    mu: f64,
    params: KappaDelta,
    lattice: Arc<Lattice>,
    f_slow: SpectralState,
    f_fast: SpectralState,
    conv: Arc<GridConvolver>,
}

impl ManifoldApprox {
    /// `U⁰ = 0` for the forcing on its own lattice, whose radius is `K_max`.
    pub fn new(forcing: &ForcingSpec, eps: f64, mu: f64, opts: ManifoldOptions) -> Result<Self> {
        let ForcingSpec::Steady(f) = forcing else {
            return Err(Error::Config("the slow manifold needs time-independent forcing".into()));
        };
        forcing.validate()?;
        if !(mu >= 0.0) {
            return Err(Error::Config("mu must be >= 0".into()));
        }
        let full = f.lattice();
        let mut params = kappa_delta(eps, full.radius(), opts.eta, opts.n_max)?;
        if let Some(k) = opts.kappa {
            if !(k > 0.0) {
                return Err(Error::Config(format!("kappa must be > 0, got {k}")));
            }
            params.kappa_capped = k > full.radius();
            params.kappa = k.min(full.radius());
        }
        // an explicit κ beyond K_max keeps the whole lattice, |k| = K_max included
        let lattice = if opts.kappa.is_some_and(|k| k > full.radius()) {
            full.clone()
        } else {
            Lattice::below(*full.domain(), params.kappa)?
        };
        let f = f.to_frame(Frame::Lab, eps).transfer(&lattice)?;
        Ok(Self {
            order: 0,
            eps,
            mu,
            params,
            f_slow: f.slow_part(),
            f_fast: f.fast_part(),
            conv: Arc::new(GridConvolver::new(&lattice)),
            lattice,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn params(&self) -> KappaDelta {
        self.params
    }

    /// The low-mode lattice `|k| < κ`.
    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    /// `Uⁿ⁺¹`.
    pub fn iterate(&self) -> Result<Self> {
        if self.order + 1 > self.params.n_cap {
            return Err(Error::IterationCap { requested: self.order + 1, cap: self.params.n_cap });
        }
        let mut next = self.clone();
        next.order += 1;
        Ok(next)
    }

    /// `Uᵐ` for `m ≤ n_cap`.
    pub fn at_order(&self, m: usize) -> Result<Self> {
        if m > self.params.n_cap {
            return Err(Error::IterationCap { requested: m, cap: self.params.n_cap });
        }
        let mut out = self.clone();
        out.order = m;
        Ok(out)
    }

    fn same_setup(&self, o: &Self) -> bool {
        self.eps == o.eps && self.mu == o.mu && self.lattice.same_as(&o.lattice) && self.f_fast == o.f_fast
            && self.f_slow == o.f_slow
    }

    // slow part of `w0` on the low lattice, lab frame
    fn restrict(&self, w0: &SpectralState) -> Result<SpectralState> {
        let mut s = w0.slow_part().transfer(&self.lattice)?;
        s = SpectralState::from_coeffs(&self.lattice, s.into_coeffs(), Frame::Lab, 0.0)?;
        Ok(s)
    }

    // lab-frame result expressed in the frame and time of `like`
    fn express(&self, lab: SpectralState, like: &SpectralState) -> SpectralState {
        let mut s = SpectralState::from_coeffs(&self.lattice, lab.into_coeffs(), Frame::Lab, like.time())
            .expect("same lattice");
        s = s.to_frame(like.frame(), self.eps);
        s
    }

    fn b(&self, x: &SpectralState, y: &SpectralState) -> Result<SpectralState> {
        self.conv.apply(x, y, None)
    }

    fn a(&self, x: &SpectralState) -> SpectralState {
        crate::dynamics::apply_a(x, self.mu)
    }

    // (1/ε)L: fast coefficients times iω/ε
    fn l_over_eps(&self, x: &SpectralState) -> SpectralState {
        let mut out = x.clone();
        for (m, c) in out.coeffs_mut().iter_mut().enumerate() {
            *c *= Complex64::new(0.0, self.lattice.omega(m) / self.eps);
        }
        out
    }

    // εL⁻¹ on the fast branches; slow input is a kernel component
    fn eps_l_inv(&self, x: &SpectralState) -> Result<SpectralState> {
        let mut out = x.clone();
        for (m, c) in out.coeffs_mut().iter_mut().enumerate() {
            let om = self.lattice.omega(m);
            if om == 0.0 {
                if *c != Complex64::new(0.0, 0.0) {
                    return Err(Error::Kernel(format!("slow component at {:?}", self.lattice.mode_id(m))));
                }
            } else {
                *c *= Complex64::new(0.0, -self.eps / om);
            }
        }
        Ok(out)
    }

    fn f_jet(&self, like: &Jet, f: &SpectralState) -> Jet {
        let mut j = like.zeros_like();
        j.parts[0] = f.clone();
        j
    }

    /// `𝒢 = −B⁰(X+U, X+U) − AX + f⁰` on jets, also returning `B(X+U, X+U)`.
    fn g_jet(&self, x: &Jet, u: &Jet) -> Result<(Jet, Jet)> {
        let s = x.zip(u, |a, b| a.add(b));
        let bs = s.bilinear(&s, &|p, q| self.b(p, q))?;
        let mut g = bs.map(|p| p.slow_part().scale(Complex64::new(-1.0, 0.0)));
        g = g.zip(&x.map(|p| self.a(p)), |p, q| p.sub(q));
        g = g.zip(&self.f_jet(x, &self.f_slow), |p, q| p.add(q));
        Ok((g, bs))
    }

    /// `Uⁿ` on a jet of slow states.
    fn u_jet(&self, n: usize, x: &Jet) -> Result<Jet> {
        if n == 0 {
            return Ok(x.zeros_like());
        }
        let un = self.u_jet(n - 1, x)?;
        let (g, bs) = self.g_jet(x, &un)?;
        let mut r = self.f_jet(x, &self.f_fast);
        r = r.zip(&bs, |p, q| p.sub(&q.fast_part()));
        r = r.zip(&un.map(|p| self.a(p)), |p, q| p.sub(q));
        if n > 1 {
            let dug = self.u_jet(n - 1, &x.extend(&g))?.top();
            r = r.zip(&dug, |p, q| p.sub(&q.fast_part()));
        }
        let parts = r.parts.iter().map(|p| self.eps_l_inv(p)).collect::<Result<Vec<_>>>()?;
        Ok(Jet { parts })
    }

    /// `Uⁿ(W⁰<)` in the frame and at the time of `w0`, on the low lattice.
    pub fn eval(&self, w0: &SpectralState) -> Result<SpectralState> {
        let x = Jet::constant(self.restrict(w0)?);
        let mut u = self.u_jet(self.order, &x)?;
        Ok(self.express(u.parts.swap_remove(0), w0))
    }

    /// `(Uⁿ(W⁰<), DUⁿ(W⁰<)·dir)`, both in the frame and at the time of `w0`.
    pub fn jet(&self, w0: &SpectralState, dir: &SpectralState) -> Result<(SpectralState, SpectralState)> {
        let x = Jet::directional(self.restrict(w0)?, self.restrict(dir)?)?;
        let mut u = self.u_jet(self.order, &x)?;
        let d = u.parts.pop().expect("two parts");
        let v = u.parts.pop().expect("two parts");
        Ok((self.express(v, w0), self.express(d, w0)))
    }

    /// `𝒢 = −B⁰(W⁰<+U, W⁰<+U) − AW⁰< + f⁰<` for a fast `u` given in the frame of `w0`.
    pub fn g_of(&self, w0: &SpectralState, u: &SpectralState) -> Result<SpectralState> {
        let x = Jet::constant(self.restrict(w0)?);
        let ul = u.fast_part().to_frame(Frame::Lab, self.eps).transfer(&self.lattice)?;
        let ul = SpectralState::from_coeffs(&self.lattice, ul.into_coeffs(), Frame::Lab, 0.0)?;
        let (g, _) = self.g_jet(&x, &Jet::constant(ul))?;
        Ok(self.express(g.parts.into_iter().next().expect("one part"), w0))
    }

    /// `ℛⁿ = P<[(DUⁿ)𝒢ⁿ] + (1/ε)LUⁿ + Bᵉ<(W⁰<+Uⁿ, W⁰<+Uⁿ) + AUⁿ − fᵉ<`.
    pub fn remainder_direct(&self, w0: &SpectralState) -> Result<SpectralState> {
        let x = Jet::constant(self.restrict(w0)?);
        let un = self.u_jet(self.order, &x)?;
        let (g, bs) = self.g_jet(&x, &un)?;
        let u = &un.parts[0];
        let mut r = bs.parts[0].fast_part().sub(&self.f_fast);
        r.axpy(Complex64::new(1.0, 0.0), &self.l_over_eps(u));
        r.axpy(Complex64::new(1.0, 0.0), &self.a(u));
        if self.order > 0 {
            let dug = self.u_jet(self.order, &x.extend(&g))?.top();
            r.axpy(Complex64::new(1.0, 0.0), &dug.parts[0].fast_part());
        }
        Ok(self.express(r, w0))
    }
}

/// `(1/ε)L(Uⁿ − Uⁿ⁺¹)` evaluated at `w0`.
pub fn remainder_diff(un: &ManifoldApprox, un1: &ManifoldApprox, w0: &SpectralState) -> Result<SpectralState> {
    if !un.same_setup(un1) {
        return Err(Error::Config("remainder_diff needs iterates with the same kappa, epsilon and forcing".into()));
    }
    if un1.order != un.order + 1 {
        return Err(Error::Config(format!("orders {} and {} are not consecutive", un.order, un1.order)));
    }
    let x = Jet::constant(un.restrict(w0)?);
    let a = un.u_jet(un.order, &x)?;
    let b = un.u_jet(un1.order, &x)?;
    let d = un.l_over_eps(&a.parts[0].sub(&b.parts[0]));
    Ok(un.express(d, w0))
}

/// Norms along the iteration at one point `W⁰<`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderRow {
    pub n: usize,
    pub norm_u: f64,
    pub norm_r: f64,
    /// `remainder_diff(n, n+1)`, when `n + 1 ≤ n_cap`
    pub norm_r_diff: Option<f64>,
    /// `‖ℛⁿ‖ / ‖ℛⁿ⁻¹‖`
    pub contraction: Option<f64>,
}

/// Iterates from `U⁰` to `U^{n_cap}` and tabulates `‖Uⁿ‖`, `‖ℛⁿ‖` and ratios.
pub fn order_table(base: &ManifoldApprox, w0: &SpectralState) -> Result<Vec<OrderRow>> {
    let cap = base.params.n_cap;
    let mut rows: Vec<OrderRow> = Vec::new();
    let mut u = base.at_order(0)?;
    loop {
        let r = u.remainder_direct(w0)?.l2_norm();
        let next = (u.order < cap).then(|| u.iterate()).transpose()?;
        let r_diff = match &next {
            Some(nx) => Some(remainder_diff(&u, nx, w0)?.l2_norm()),
            None => None,
        };
        let contraction = rows.last().map(|p| r / p.norm_r);
        rows.push(OrderRow { n: u.order, norm_u: u.eval(w0)?.l2_norm(), norm_r: r, norm_r_diff: r_diff, contraction });
        match next {
            Some(nx) => u = nx,
            None => break,
        }
    }
    Ok(rows)
}

pub const ORDER_CSV_HEADER: &str = "n,norm_U,norm_R,norm_R_diff,contraction";

pub fn write_order_table(rows: &[OrderRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{ORDER_CSV_HEADER}")?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.16e}"));
    for r in rows {
        writeln!(out, "{},{:.16e},{:.16e},{},{}", r.n, r.norm_u, r.norm_r, opt(r.norm_r_diff), opt(r.contraction))?;
    }
    Ok(())
}

/// Largest ε of `grid` such that at it and every smaller grid value each
/// step of the iteration contracts the remainder by at least one half.
pub fn contraction_threshold(
    forcing: &ForcingSpec,
    w0: &SpectralState,
    mu: f64,
    opts: ManifoldOptions,
    grid: &[f64],
) -> Result<Option<f64>> {
    let mut eps: Vec<f64> = grid.to_vec();
    eps.sort_by(|a, b| a.total_cmp(b));
    let mut best = None;
    for e in eps {
        let rows = order_table(&ManifoldApprox::new(forcing, e, mu, opts)?, w0)?;
        let ok = rows.iter().all(|r| r.contraction.map_or(true, |c| c <= 0.5));
        if !ok {
            break;
        }
        best = Some(e);
    }
    Ok(best)
}
