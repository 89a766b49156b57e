//! Galerkin dynamics in the rotated frame: dissipation, forcing, the
//! integrating-factor Runge–Kutta integrator, energy budgets and physical
//! field reconstruction.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft3::Grid3;
use crate::interactions::{advection_product, GridConvolver};
use crate::lattice::{Frame, Lattice, SpectralState};
use crate::modes::field_vector;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Forcing in modal coefficients. Fast coefficients carry no rotating phase.
#[derive(Debug, Clone)]
pub enum ForcingSpec {
    Steady(SpectralState),
    /// `mean + amplitude · cos(frequency · t)`
    Sinusoidal { mean: SpectralState, amplitude: SpectralState, frequency: f64 },
}

impl ForcingSpec {
    pub fn zero(lattice: &Arc<Lattice>) -> Self {
        ForcingSpec::Steady(SpectralState::zeros(lattice, Frame::Lab, 0.0))
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        match self {
            ForcingSpec::Steady(f) => f.lattice(),
            ForcingSpec::Sinusoidal { mean, .. } => mean.lattice(),
        }
    }

    pub fn is_steady(&self) -> bool {
        matches!(self, ForcingSpec::Steady(_))
    }

    fn parts(&self) -> Vec<&SpectralState> {
        match self {
            ForcingSpec::Steady(f) => vec![f],
            ForcingSpec::Sinusoidal { mean, amplitude, .. } => vec![mean, amplitude],
        }
    }

    /// True when no fast (ageostrophic) coefficient is ever nonzero.
    pub fn is_geostrophic(&self) -> bool {
        self.parts().iter().all(|p| p.fast_part().is_zero())
    }

    /// Coefficients at time `t`.
    pub fn at(&self, t: f64) -> SpectralState {
        match self {
            ForcingSpec::Steady(f) => f.clone(),
            ForcingSpec::Sinusoidal { mean, amplitude, frequency } => {
                let mut f = mean.clone();
                f.axpy(Complex64::new((frequency * t).cos(), 0.0), amplitude);
                f
            }
        }
    }

    /// Rotated-frame forcing: fast coefficients times `e^{iωt/ε}`.
    pub fn rotated(&self, t: f64, eps: f64) -> SpectralState {
        let mut f = self.at(t);
        let lat = f.lattice().clone();
        for (m, c) in f.coeffs_mut().iter_mut().enumerate() {
            let om = lat.omega(m);
            if om != 0.0 {
                *c *= Complex64::from_polar(1.0, om * t / eps);
            }
        }
        f
    }

    /// Checks the reality/symmetry constraints on every part.
    pub fn validate(&self) -> Result<()> {
        for p in self.parts() {
            if !p.lattice().same_as(self.lattice()) {
                return Err(Error::Shape("forcing parts live on different lattices".into()));
            }
            let v = p.check_reality();
            if v > 1e-12 * p.l2_norm().max(1.0) {
                return Err(Error::Config(format!("forcing violates the reality/symmetry constraints by {v:e}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Lawson (integrating-factor) RK4 with exact diffusion.
    IfRk4,
}

impl Integrator {
    pub fn label(self) -> &'static str {
        "if-rk4"
    }

    pub fn parse(s: &str) -> Option<Self> {
        (s == "if-rk4").then_some(Integrator::IfRk4)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub eps: f64,
    pub mu: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Time between trajectory samples.
    pub record_every: f64,
    pub integrator: Integrator,
    pub seed: u64,
    /// When set, requires `dt · max|ω| / ε ≤ phase_cfl`.
    pub phase_cfl: Option<f64>,
}

impl SolverConfig {
    pub fn new(eps: f64, mu: f64, dt: f64, t_end: f64) -> Self {
        Self { eps, mu, dt, t_end, record_every: t_end, integrator: Integrator::IfRk4, seed: 0, phase_cfl: None }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            errs.push("epsilon must be > 0".to_string());
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            errs.push("mu must be >= 0".to_string());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            errs.push("dt must be > 0".to_string());
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            errs.push("t_end must be > 0".to_string());
        }
        if !(self.record_every > 0.0) {
            errs.push("record_every must be > 0".to_string());
        } else if self.record_every > self.t_end * (1.0 + 1e-12) {
            errs.push("record_every must not exceed t_end".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }

    /// Number of steps and the step actually taken (`t_end / steps`).
    pub fn steps(&self) -> (usize, f64) {
        let n = ((self.t_end / self.dt).round() as usize).max(1);
        (n, self.t_end / n as f64)
    }
}

/// `A W`: every coefficient times `μ|k|²`.
pub fn apply_a(state: &SpectralState, mu: f64) -> SpectralState {
    let lat = state.lattice().clone();
    let mut out = state.clone();
    for (m, c) in out.coeffs_mut().iter_mut().enumerate() {
        let k = lat.wave(lat.mode(m).0).norm;
        *c *= mu * k * k;
    }
    out
}

/// One diagnostic sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub e_total: f64,
    pub e_fast: f64,
    pub e_slow: f64,
    pub h1: f64,
    pub budget_residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
}

impl TrajectoryRecord {
    pub const CSV_HEADER: &'static str = "t,E_total,E_fast,E_slow,H1,budget_residual";

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.e_total, s.e_fast, s.e_slow, s.h1, s.budget_residual
            )?;
        }
        Ok(())
    }
}

/// Terms of `½ d|Wᵉ|²/dt + μ|∇Wᵉ|² = −(Wᵉ, B(W, W⁰)) + (Wᵉ, fᵉ)`,
/// with pairings taken without the volume factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBudget {
    /// `d|Wᵉ|²/dt` from the tendency
    pub de_fast_dt: f64,
    pub dissipation: f64,
    pub transfer: f64,
    pub injection: f64,
    pub residual: f64,
}

/// The rotated-frame Galerkin system with a fixed forcing and configuration.
#[derive(Debug)]
pub struct Model {
    lattice: Arc<Lattice>,
    cfg: SolverConfig,
    forcing: ForcingSpec,
    conv: GridConvolver,
    k2: Vec<f64>,
}

impl Model {
    pub fn new(lattice: &Arc<Lattice>, cfg: SolverConfig, forcing: ForcingSpec) -> Result<Self> {
        cfg.validate()?;
        forcing.validate()?;
        if !forcing.lattice().same_as(lattice) {
            return Err(Error::Shape("forcing lattice differs from the model lattice".into()));
        }
        if let Some(c) = cfg.phase_cfl {
            let wmax = (0..lattice.n_modes()).map(|m| lattice.omega(m).abs()).fold(0.0, f64::max);
            if cfg.steps().1 * wmax / cfg.eps > c {
                return Err(Error::Config(format!(
                    "dt = {} does not resolve the fastest phase (dt max|w|/eps must be <= {c})",
                    cfg.dt
                )));
            }
        }
        let k2 = (0..lattice.n_modes())
            .map(|m| {
                let w = lattice.wave(lattice.mode(m).0);
                w.norm * w.norm
            })
            .collect();
        Ok(Self { lattice: lattice.clone(), cfg, forcing, conv: GridConvolver::new(lattice), k2 })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    /// `B(W, Ŵ)` in the rotated frame at time `t`.
    pub fn b(&self, w: &SpectralState, what: &SpectralState, t: f64) -> Result<SpectralState> {
        self.conv.apply(w, what, Some((t, self.cfg.eps)))
    }

    // −B(W, W) + f, the part of the tendency not handled by the integrating factor
    fn explicit(&self, w: &SpectralState, t: f64) -> Result<SpectralState> {
        let mut out = self.forcing.rotated(t, self.cfg.eps);
        out.axpy(Complex64::new(-1.0, 0.0), &self.b(w, w, t)?);
        Ok(out)
    }

    /// `∂*_t W = −B(W, W) − AW + f` in the rotated frame.
    pub fn tendency(&self, w: &SpectralState, t: f64) -> Result<SpectralState> {
        if w.frame() != Frame::Rotated {
            return Err(Error::Config("tendency expects a rotated-frame state".into()));
        }
        let mut out = self.explicit(w, t)?;
        out.axpy(Complex64::new(-1.0, 0.0), &apply_a(w, self.cfg.mu));
        Ok(out)
    }

    fn decay(&self, state: &mut SpectralState, h: f64) {
        if self.cfg.mu == 0.0 {
            return;
        }
        for (c, k2) in state.coeffs_mut().iter_mut().zip(&self.k2) {
            *c *= (-self.cfg.mu * k2 * h).exp();
        }
    }

    /// One Lawson RK4 step of size `h` from time `t`.
    pub fn step(&self, w: &SpectralState, t: f64, h: f64) -> Result<SpectralState> {
        let half = 0.5 * h;
        let c = |x: f64| Complex64::new(x, 0.0);
        let k1 = self.explicit(w, t)?;

        let mut y = w.clone();
        y.axpy(c(half), &k1);
        self.decay(&mut y, half);
        let k2 = self.explicit(&y, t + half)?;

        let mut wh = w.clone();
        self.decay(&mut wh, half);
        let mut y = wh.clone();
        y.axpy(c(half), &k2);
        let k3 = self.explicit(&y, t + half)?;

        let mut y = wh;
        y.axpy(c(h), &k3);
        self.decay(&mut y, half);
        let k4 = self.explicit(&y, t + h)?;

        let mut mid = k2;
        mid.axpy(c(1.0), &k3);
        self.decay(&mut mid, half);
        let mut acc = w.clone();
        acc.axpy(c(h / 6.0), &k1);
        self.decay(&mut acc, h);
        acc.axpy(c(h / 3.0), &mid);
        acc.axpy(c(h / 6.0), &k4);
        acc.set_time(t + h);
        Ok(acc)
    }

    /// Integrates from `w0` (rotated frame) to `t0 + t_end`, calling
    /// `observe` after every step.
    pub fn run(
        &self,
        w0: &SpectralState,
        mut observe: impl FnMut(usize, &SpectralState) -> Result<()>,
    ) -> Result<SpectralState> {
        if w0.frame() != Frame::Rotated {
            return Err(Error::Config("integration runs in the rotated frame".into()));
        }
        w0.check_compatible(&self.forcing.at(0.0))?;
        let (n, h) = self.cfg.steps();
        let t0 = w0.time();
        let mut w = w0.clone();
        observe(0, &w)?;
        for step in 1..=n {
            let t = t0 + (step - 1) as f64 * h;
            let mut next = self.step(&w, t, h)?;
            next.set_time(t0 + step as f64 * h);
            if let Some(bad) = next.coeffs().iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::Divergence {
                    step,
                    time: next.time(),
                    what: format!("non-finite coefficient at {:?}", self.lattice.mode_id(bad)),
                });
            }
            w = next;
            observe(step, &w)?;
        }
        Ok(w)
    }

    /// Integrates and samples diagnostics every `record_every`.
    pub fn integrate(&self, w0: &SpectralState) -> Result<(TrajectoryRecord, SpectralState)> {
        let (_, h) = self.cfg.steps();
        let every = ((self.cfg.record_every / h).round() as usize).max(1);
        let mut rec = TrajectoryRecord::default();
        let fin = self.run(w0, |step, w| {
            if step % every == 0 {
                rec.samples.push(self.sample(w)?);
            }
            Ok(())
        })?;
        Ok((rec, fin))
    }

    pub fn sample(&self, w: &SpectralState) -> Result<Sample> {
        let e_slow = w.slow_part().l2_norm().powi(2);
        let e_fast = w.fast_part().l2_norm().powi(2);
        Ok(Sample {
            t: w.time(),
            e_total: e_slow + e_fast,
            e_fast,
            e_slow,
            h1: w.sobolev_norm(1.0),
            budget_residual: self.energy_budget(w)?.residual,
        })
    }

    /// Term-by-term fast energy budget at the state's time.
    pub fn energy_budget(&self, w: &SpectralState) -> Result<EnergyBudget> {
        let t = w.time();
        let we = w.fast_part();
        let w0 = w.slow_part();
        let tend = self.tendency(w, t)?;
        let de_fast_dt = 2.0 * we.coeff_inner(&tend).re;
        let dissipation = self.cfg.mu * we.sobolev_norm(1.0).powi(2);
        let transfer = -we.coeff_inner(&self.b(w, &w0, t)?).re;
        let injection = we.coeff_inner(&self.forcing.rotated(t, self.cfg.eps)).re;
        let residual = 0.5 * de_fast_dt + dissipation - transfer - injection;
        Ok(EnergyBudget { de_fast_dt, dissipation, transfer, injection, residual })
    }
}

/// Rotated-frame tendency for a one-off evaluation.
pub fn tendency(state: &SpectralState, t: f64, cfg: &SolverConfig, forcing: &ForcingSpec) -> Result<SpectralState> {
    Model::new(state.lattice(), cfg.clone(), forcing.clone())?.tendency(state, t)
}

/// Integrates `state0` under `cfg` and `forcing`.
pub fn integrate(
    state0: &SpectralState,
    cfg: &SolverConfig,
    forcing: &ForcingSpec,
) -> Result<(TrajectoryRecord, SpectralState)> {
    Model::new(state0.lattice(), cfg.clone(), forcing.clone())?.integrate(state0)
}

/// Fast energy budget for a one-off evaluation at the state's time.
pub fn energy_budget(state: &SpectralState, forcing: &ForcingSpec, cfg: &SolverConfig) -> Result<EnergyBudget> {
    Model::new(state.lattice(), cfg.clone(), forcing.clone())?.energy_budget(state)
}

/// Physical fields on a uniform grid `x_a = a L₁/N₁` etc. (the vertical
/// coordinate is taken mod `L₃`, so `z ↦ −z` maps index `c` to `N₃ − c`).
#[derive(Debug, Clone)]
pub struct PhysicalFields {
    pub dims: [usize; 3],
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub rho: Vec<f64>,
    pub u3: Vec<f64>,
    pub dp: Vec<f64>,
    /// Vertically averaged pressure on the horizontal grid (`N₁ × N₂`).
    pub pmean: Vec<f64>,
    /// Largest imaginary part met in the synthesis (zero for real states).
    pub max_imag: f64,
}

impl PhysicalFields {
    pub fn index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dims[1] + b) * self.dims[2] + c
    }
}

/// Reconstructs `v, ρ, u³, δp` and `⟨p⟩` from a state. `⟨p⟩` includes the
/// `O(ε)` contribution of the nonlinear term.
pub fn reconstruct_fields(state: &SpectralState, eps: f64, dims: [usize; 3]) -> Result<PhysicalFields> {
    let lat = state.lattice();
    let mut bounds = [0usize; 3];
    for w in lat.waves() {
        for i in 0..3 {
            bounds[i] = bounds[i].max(w.n.0[i].unsigned_abs() as usize);
        }
    }
    for i in 0..3 {
        if dims[i] < 2 * bounds[i] + 1 {
            return Err(Error::Aliasing(format!(
                "axis {i} needs at least {} points, got {}",
                2 * bounds[i] + 1,
                dims[i]
            )));
        }
    }
    let lab = state.to_frame(Frame::Lab, eps);
    let nl = advection_product(&lab, &lab, None)?;
    let grid = Grid3::new(dims);
    let mut spec: Vec<Vec<Complex64>> = (0..6).map(|_| grid.zeros()).collect();
    for (wi, wave) in lat.waves().iter().enumerate() {
        let f = field_vector(&lab, wi);
        let s = grid.slot(wave.n);
        let [k1, k2, k3] = wave.k;
        spec[0][s] = f[0];
        spec[1][s] = f[1];
        spec[2][s] = f[2];
        if k3 != 0.0 {
            spec[3][s] = -(f[0] * k1 + f[1] * k2) / k3;
            spec[4][s] = I * f[2] / k3;
        } else {
            let h2 = k1 * k1 + k2 * k2;
            let g = nl[wi];
            let geo = -(I * k1 * f[1] - I * k2 * f[0]);
            let corr = I * k1 * g[0] + I * k2 * g[1];
            spec[5][s] = (geo + eps * corr) / h2;
        }
    }
    let mut max_imag = 0.0f64;
    let mut real = Vec::with_capacity(6);
    for mut d in spec {
        grid.to_physical(&mut d);
        max_imag = d.iter().map(|c| c.im.abs()).fold(max_imag, f64::max);
        real.push(d.into_iter().map(|c| c.re).collect::<Vec<f64>>());
    }
    let pm3 = real.pop().expect("six fields");
    let pmean = (0..dims[0] * dims[1]).map(|ab| pm3[ab * dims[2]]).collect();
    let dp = real.pop().expect("six fields");
    let u3 = real.pop().expect("six fields");
    let rho = real.pop().expect("six fields");
    let v2 = real.pop().expect("six fields");
    let v1 = real.pop().expect("six fields");
    Ok(PhysicalFields { dims, v1, v2, rho, u3, dp, pmean, max_imag })
}
