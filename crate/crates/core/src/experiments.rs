//! Packaged desk-scale experiments: the scalar toy model, the fast-energy
//! ε-scan, the slow-manifold residual scan and the Gevrey tail check.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{apply_a, ForcingSpec, Model, SolverConfig};
use crate::interactions::apply_b;
use crate::modes::{apply_l, field_vector, hdot};
use crate::error::{Error, Result};
use crate::lattice::{random_state, Branch, Domain, Frame, Lattice, SpectralState};
use crate::slowmanifold::{ManifoldApprox, ManifoldOptions};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln y`.
    pub rms: f64,
    pub points: usize,
}

/// Least-squares line through `(x, y)`; needs two distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if xs.len() != ys.len() {
        return Err(Error::Shape("fit needs equally many abscissae and ordinates".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if xs.len() < 2 || !(sxx > 0.0) || !ys.iter().all(|y| y.is_finite()) {
        return Err(Error::Domain("fit needs two distinct finite points".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(Fit { slope, intercept, rms, points: xs.len() })
}

/// Fit of `ln y` against `ln x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

// ---------------------------------------------------------------- toy model

/// `dx/dt + (i/ε) x + μ x = f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyModel {
    pub eps: f64,
    pub mu: f64,
    pub f: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToySample {
    pub t: f64,
    pub x: Complex64,
    pub exact: Complex64,
    /// `|x(t) − U|`
    pub dist: f64,
}

impl ToyModel {
    pub fn new(eps: f64, mu: f64, f: Complex64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Config("epsilon must be > 0".into()));
        }
        if !(mu > 0.0) {
            return Err(Error::Config("mu must be > 0".into()));
        }
        Ok(Self { eps, mu, f })
    }

    fn rate(&self) -> Complex64 {
        Complex64::new(self.mu, 1.0 / self.eps)
    }

    /// The fixed point `U = εf/(εμ + i)`.
    pub fn slow_point(&self) -> Complex64 {
        self.eps * self.f / Complex64::new(self.eps * self.mu, 1.0)
    }

    pub fn exact(&self, x0: Complex64, t: f64) -> Complex64 {
        let u = self.slow_point();
        u + (x0 - u) * (-self.rate() * t).exp()
    }

    /// Steps with the exact one-step propagator and records every step.
    pub fn run(&self, x0: Complex64, t_end: f64, dt: f64) -> Result<Vec<ToySample>> {
        if !(dt > 0.0) || !(t_end > 0.0) {
            return Err(Error::Config("dt and t_end must be > 0".into()));
        }
        let n = ((t_end / dt).round() as usize).max(1);
        let h = t_end / n as f64;
        let u = self.slow_point();
        let prop = (-self.rate() * h).exp();
        let mut x = x0;
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = i as f64 * h;
            if i > 0 {
                x = u + (x - u) * prop;
            }
            out.push(ToySample { t, x, exact: self.exact(x0, t), dist: (x - u).norm() });
        }
        Ok(out)
    }
}

pub const TOY_CSV_HEADER: &str = "t,re_x,im_x,re_exact,im_exact,dist_to_U";

pub fn write_toy_csv(samples: &[ToySample], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{TOY_CSV_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t, s.x.re, s.x.im, s.exact.re, s.exact.im, s.dist
        )?;
    }
    Ok(())
}

/// Log-log fit of `|U(ε)|` against ε.
pub fn toy_sweep(eps: &[f64], mu: f64, f: Complex64) -> Result<Fit> {
    let mags = eps
        .iter()
        .map(|&e| Ok(ToyModel::new(e, mu, f)?.slow_point().norm()))
        .collect::<Result<Vec<_>>>()?;
    fit_loglog(eps, &mags)
}

// ------------------------------------------------------------- scan reports

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub eps: f64,
    pub n: Option<usize>,
    pub values: Vec<f64>,
    /// False when the post-transient signal was still trending.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ threshold` (and is not NaN).
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<ScanRow>,
    pub fit: Option<Fit>,
    pub checks: Vec<Check>,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// CSV with `#` comment lines for the fit and checks.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# {}", self.kind)?;
        write!(out, "eps,n")?;
        for c in &self.columns {
            write!(out, ",{c}")?;
        }
        writeln!(out, ",converged")?;
        for r in &self.rows {
            write!(out, "{:.16e},{}", r.eps, r.n.map_or_else(String::new, |n| n.to_string()))?;
            for v in &r.values {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out, ",{}", r.converged)?;
        }
        if let Some(f) = &self.fit {
            writeln!(out, "# fit slope={:.16e} intercept={:.16e} rms={:.16e} points={}", f.slope, f.intercept, f.rms, f.points)?;
        }
        for c in &self.checks {
            writeln!(
                out,
                "# check {} value={:.16e} threshold={:.16e} {}",
                c.name,
                c.value,
                c.threshold,
                if c.pass { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

// ------------------------------------------------------------ scan set-up

/// Everything an ε-scan needs apart from ε itself.
#[derive(Debug, Clone)]
pub struct ScanSetup {
    pub lattice: Arc<Lattice>,
    pub forcing: ForcingSpec,
    /// Initial state (rotated frame, t = 0).
    pub initial: SpectralState,
    pub mu: f64,
    /// Upper bound on the step.
    pub dt_max: f64,
    /// The step is also at most `phase_cfl · ε / max|ω|`.
    pub phase_cfl: f64,
    pub transient: f64,
    pub window: f64,
    /// Samples per unit time inside the window.
    pub samples_per_time: f64,
    /// Relative change between the window halves above which a run counts
    /// as still trending.
    pub trend_tol: f64,
}

/// Steady forcing on `|k| ≤ 2` whose slow and fast parts each have unit
/// `H²` coefficient norm (fast part omitted when `fast` is false).
pub fn canonical_forcing(lattice: &Arc<Lattice>, seed: u64, fast: bool) -> SpectralState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_state(lattice, &mut rng, |k| if k <= 2.0 + 1e-9 { 1.0 } else { 0.0 });
    let f = SpectralState::from_coeffs(lattice, f.into_coeffs(), Frame::Lab, 0.0).expect("same lattice");
    let slow = f.slow_part();
    let slow = slow.scale(Complex64::new(1.0 / slow.sobolev_norm(2.0), 0.0));
    if !fast {
        return slow;
    }
    let fp = f.fast_part();
    slow.add(&fp.scale(Complex64::new(1.0 / fp.sobolev_norm(2.0), 0.0)))
}

impl ScanSetup {
    /// Cube of side 2π, `K_max`, μ = 0.5, canonical forcing, a random slow
    /// initial state of unit `H²` norm, transient and window `10/μ`.
    pub fn canonical(k_max: f64, seed: u64) -> Result<Self> {
        let lattice = Lattice::new(Domain::cube(), k_max)?;
        let forcing = ForcingSpec::Steady(canonical_forcing(&lattice, seed, true));
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let w = random_state(&lattice, &mut rng, |k| 1.0 / (1.0 + k.powi(4))).slow_part();
        let initial = w.scale(Complex64::new(1.0 / w.sobolev_norm(2.0), 0.0));
        let mu = 0.5;
        Ok(Self {
            lattice,
            forcing,
            initial,
            mu,
            dt_max: 0.01,
            phase_cfl: 0.5,
            transient: 10.0 / mu,
            window: 10.0 / mu,
            samples_per_time: 10.0,
            trend_tol: 0.1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("dt_max", self.dt_max),
            ("phase_cfl", self.phase_cfl),
            ("window", self.window),
            ("samples_per_time", self.samples_per_time),
            ("trend_tol", self.trend_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be > 0"));
            }
        }
        if !(self.transient >= 0.0) {
            errs.push("transient must be >= 0".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }

    /// Solver configuration for one ε.
    pub fn solver(&self, eps: f64) -> SolverConfig {
        let wmax = (0..self.lattice.n_modes()).map(|m| self.lattice.omega(m).abs()).fold(0.0, f64::max);
        let dt = if wmax > 0.0 { self.dt_max.min(self.phase_cfl * eps / wmax) } else { self.dt_max };
        SolverConfig::new(eps, self.mu, dt, self.transient + self.window)
    }

    /// Integrates through the transient and calls `observe` at every window
    /// sample with the rotated-frame state.
    pub fn run_window(&self, eps: f64, mut observe: impl FnMut(&SpectralState) -> Result<()>) -> Result<()> {
        self.validate()?;
        let cfg = self.solver(eps);
        let (_, h) = cfg.steps();
        let every = ((1.0 / (self.samples_per_time * h)).round() as usize).max(1);
        let start = (self.transient / h).round() as usize;
        let model = Model::new(&self.lattice, cfg, self.forcing.clone())?;
        model.run(&self.initial, |step, w| {
            if step >= start && (step - start) % every == 0 {
                observe(w)?;
            }
            Ok(())
        })?;
        Ok(())
    }
}

// a series is still trending when its two halves differ by more than `tol`
fn halves_agree(series: &[f64], tol: f64, stat: impl Fn(&[f64]) -> f64) -> bool {
    if series.len() < 4 {
        return false;
    }
    let (a, b) = series.split_at(series.len() / 2);
    let (sa, sb) = (stat(a), stat(b));
    (sa - sb).abs() <= tol * sa.abs().max(sb.abs()).max(f64::MIN_POSITIVE)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

/// Post-transient `sup ‖Wᵉ‖` for each ε and a log-log fit over the
/// converged points.
pub fn balance_scan(setup: &ScanSetup, eps: &[f64], min_slope: f64) -> Result<ScanReport> {
    let mut rows = Vec::new();
    for &e in eps {
        let mut series = Vec::new();
        setup.run_window(e, |w| {
            series.push(w.fast_part().l2_norm());
            Ok(())
        })?;
        let converged = halves_agree(&series, setup.trend_tol, sup);
        rows.push(ScanRow { eps: e, n: None, values: vec![sup(&series), mean(&series)], converged });
    }
    let used: Vec<&ScanRow> = rows.iter().filter(|r| r.converged).collect();
    let fit = if used.len() >= 2 {
        Some(fit_loglog(
            &used.iter().map(|r| r.eps).collect::<Vec<_>>(),
            &used.iter().map(|r| r.values[0]).collect::<Vec<_>>(),
        )?)
    } else {
        None
    };
    let slope = fit.map_or(f64::NAN, |f| f.slope);
    let checks = vec![
        Check { name: "slope".into(), value: slope, threshold: min_slope, pass: slope >= min_slope },
        Check {
            name: "converged_points".into(),
            value: used.len() as f64,
            threshold: 4.0f64.min(eps.len() as f64),
            pass: used.len() >= 4.min(eps.len()),
        },
    ];
    Ok(ScanReport { kind: "balance-scan", columns: vec!["sup_fast_l2", "mean_fast_l2"], rows, fit, checks })
}

/// Time-averaged `‖Wᵉ − Uⁿ(W⁰)‖` for each (ε, n), with the high-mode fast
/// tail `‖Wᵉ>‖` and `‖Wᵉ‖` alongside.
pub fn manifold_scan(setup: &ScanSetup, eps: &[f64], orders: &[usize], opts: ManifoldOptions) -> Result<ScanReport> {
    if !setup.forcing.is_steady() {
        return Err(Error::Config("manifold scan needs time-independent forcing".into()));
    }
    let max_n = orders.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &e in eps {
        let base = ManifoldApprox::new(&setup.forcing, e, setup.mu, ManifoldOptions { n_max: opts.n_max.max(max_n), ..opts })?;
        let approx = orders.iter().map(|&n| base.at_order(n)).collect::<Result<Vec<_>>>()?;
        let kappa = base.params().kappa;
        let low = base.lattice().clone();
        let mut res: Vec<Vec<f64>> = vec![Vec::new(); orders.len()];
        let mut tail = Vec::new();
        let mut fast = Vec::new();
        setup.run_window(e, |w| {
            let we = w.fast_part();
            fast.push(we.l2_norm());
            tail.push(we.sub(&we.transfer(&low)?.transfer(&setup.lattice)?).l2_norm());
            for (i, a) in approx.iter().enumerate() {
                let u = a.eval(w)?.transfer(&setup.lattice)?;
                res[i].push(we.sub(&u).l2_norm());
            }
            Ok(())
        })?;
        let converged = halves_agree(&fast, setup.trend_tol, mean);
        let means: Vec<f64> = res.iter().map(|r| mean(r)).collect();
        for (i, &n) in orders.iter().enumerate() {
            rows.push(ScanRow { eps: e, n: Some(n), values: vec![means[i], mean(&tail), mean(&fast), kappa], converged });
        }
        // non-increasing in n until the tail floor is reached
        let floor = mean(&tail);
        let mut mono = true;
        for i in 1..orders.len() {
            if means[i - 1] > 2.0 * floor && means[i] > means[i - 1] * (1.0 + 1e-9) {
                mono = false;
            }
        }
        checks.push(Check { name: format!("monotone_in_n eps={e}"), value: mono as u8 as f64, threshold: 1.0, pass: mono });
        if let (Some(i0), Some(i1)) = (orders.iter().position(|&n| n == 0), orders.iter().position(|&n| n == 1)) {
            if e <= 0.05 + 1e-12 {
                let ratio = means[i1] / means[i0];
                checks.push(Check { name: format!("n1_over_n0 eps={e}"), value: ratio, threshold: 0.5, pass: ratio <= 0.5 });
            }
        }
    }
    Ok(ScanReport {
        kind: "manifold-scan",
        columns: vec!["mean_residual_l2", "mean_tail_l2", "mean_fast_l2", "kappa"],
        rows,
        fit: None,
        checks,
    })
}

// ------------------------------------------------------------ Gevrey tail

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub kappa: f64,
    /// `‖W^{>κ}‖_{H^s}` over `|k| ≥ κ`
    pub tail: f64,
    /// `κ^s e^{−σκ} ‖W‖_{G^σ}`
    pub envelope: f64,
    /// `tail / envelope`
    pub c_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GevreyReport {
    pub sigma: f64,
    pub s: f64,
    pub rows: Vec<TailRow>,
    /// Fit of `ln tail` against κ over the rows with a nonzero tail.
    pub fit: Option<Fit>,
    pub c_max: f64,
}

/// State with every coefficient of modulus `e^{−σ|k|}` (phases from `seed`),
/// satisfying the reality and symmetry constraints.
pub fn gevrey_state(lattice: &Arc<Lattice>, sigma: f64, seed: u64) -> SpectralState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..lattice.n_modes())
        .map(|m| {
            let k = lattice.wave(lattice.mode(m).0).norm;
            Complex64::from_polar((-sigma * k).exp(), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let st = SpectralState::from_coeffs(lattice, coeffs, Frame::Lab, 0.0).expect("sized to lattice").materialize_partners();
    // the projection can shrink self-paired modes; restore the moduli, which
    // the constraints relate with unit factors
    let coeffs = st
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let k = lattice.wave(lattice.mode(m).0).norm;
            if c.norm() > 0.0 { c * ((-sigma * k).exp() / c.norm()) } else { *c }
        })
        .collect();
    st.with_coeffs(coeffs)
}

pub fn gevrey_tail_check(state: &SpectralState, sigma: f64, s: f64, kappas: &[f64]) -> Result<GevreyReport> {
    let g = state.gevrey_norm(sigma);
    let mut rows = Vec::new();
    for &kappa in kappas {
        let (_, high) = state.truncate(kappa)?;
        let tail = high.sobolev_norm(s);
        let envelope = kappa.powf(s) * (-sigma * kappa).exp() * g;
        rows.push(TailRow { kappa, tail, envelope, c_s: tail / envelope });
    }
    let used: Vec<&TailRow> = rows.iter().filter(|r| r.tail > 0.0).collect();
    let fit = if used.len() >= 2 {
        Some(fit_line(&used.iter().map(|r| r.kappa).collect::<Vec<_>>(), &used.iter().map(|r| r.tail.ln()).collect::<Vec<_>>())?)
    } else {
        None
    };
    let c_max = rows.iter().map(|r| r.c_s).fold(0.0, f64::max);
    Ok(GevreyReport { sigma, s, rows, fit, c_max })
}

pub const GEVREY_CSV_HEADER: &str = "kappa,tail,envelope,C_s";

pub fn write_gevrey_csv(rep: &GevreyReport, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "# gevrey-tail sigma={:.16e} s={:.16e}", rep.sigma, rep.s)?;
    writeln!(out, "{GEVREY_CSV_HEADER}")?;
    for r in &rep.rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", r.kappa, r.tail, r.envelope, r.c_s)?;
    }
    if let Some(f) = &rep.fit {
        writeln!(out, "# fit slope={:.16e} intercept={:.16e} rms={:.16e}", f.slope, f.intercept, f.rms)?;
    }
    Ok(())
}

/// Operator identities on `n_states` random constrained states at `k_max`
/// (cube box) plus the eigenframe checks for `|k| ≤ frame_k_max`. Each
/// check reports the worst normalised defect.
pub fn audit_identities(k_max: f64, n_states: usize, mu: f64, frame_k_max: f64, seed: u64) -> Result<Vec<Check>> {
    let lat = Lattice::new(Domain::cube(), k_max)?;
    let vol = lat.domain().volume();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut l_skew, mut b_skew, mut a_coer, mut orth) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n_states {
        let w = random_state(&lat, &mut rng, |k| 1.0 / (1.0 + k * k));
        let h = random_state(&lat, &mut rng, |k| 1.0 / (1.0 + k * k));
        let w2 = vol * w.l2_norm().powi(2);

        l_skew = l_skew.max(w.l2_inner(&apply_l(&w)).norm() / w2);

        let grad_h = vol.sqrt() * h.sobolev_norm(1.0);
        let b = apply_b(&h, &w, None)?;
        b_skew = b_skew.max(w.l2_inner(&b).re.abs() / (grad_h * w2));

        let grad_w2 = vol * w.sobolev_norm(1.0).powi(2);
        let aw = w.l2_inner(&apply_a(&w, mu));
        a_coer = a_coer.max((aw - mu * grad_w2).norm() / (mu * grad_w2).max(f64::MIN_POSITIVE));

        // orthogonality of the physical fields, not just the coefficients
        let (slow, fast) = (w.slow_part(), w.fast_part());
        let cross: Complex64 = (0..lat.n_waves()).map(|i| hdot(&field_vector(&fast, i), &field_vector(&slow, i))).sum();
        let scale = vol * slow.l2_norm() * fast.l2_norm();
        orth = orth.max((vol * cross).norm() / scale.max(f64::MIN_POSITIVE));
    }

    let frame = Lattice::new(Domain::cube(), frame_k_max)?;
    let mut ortho_dev = 0.0f64;
    let mut floor = f64::INFINITY;
    let mut floor_miss = 0.0f64;
    for wave in frame.waves() {
        let present: Vec<Branch> = Branch::ALL.into_iter().filter(|b| wave.modes[b.index()].is_some()).collect();
        for &a in &present {
            for &b in &present {
                let want = if a == b { 1.0 } else { 0.0 };
                let g = hdot(wave.eigen.vector(a), wave.eigen.vector(b));
                ortho_dev = ortho_dev.max((g - want).norm());
            }
        }
        if !wave.has_fast() {
            continue;
        }
        let horizontal = wave.k[0] == 0.0 && wave.k[1] == 0.0;
        for b in [Branch::Minus, Branch::Plus] {
            let om = wave.eigen.omega[b.index()].abs();
            floor = floor.min(om);
            // exactly one on the vertical axis, strictly above it elsewhere
            if horizontal {
                floor_miss = floor_miss.max((om - 1.0).abs());
            } else if om <= 1.0 {
                floor_miss = floor_miss.max(1.0 - om + f64::EPSILON);
            }
        }
    }

    Ok(vec![
        Check::at_most("L_skew", l_skew, 1e-12),
        Check::at_most("B_energy", b_skew, 1e-10),
        Check::at_most("A_coercive", a_coer, 1e-12),
        Check::at_most("slow_fast_orthogonal", orth, 1e-12),
        Check::at_most("eigen_orthonormal", ortho_dev, 1e-14),
        Check::at_most("omega_floor", floor_miss + (floor - 1.0).abs(), 0.0),
    ])
}
