//! Run configuration in TOML. Parsing collects every violation before
//! failing, and [`RunConfig::echo`] writes a document that parses back to
//! an identical configuration.
//!
//! ```toml
//! seed = 7
//! [domain]    lengths = [L1, L2, L3], k_max            (k_max required)
//! [physics]   epsilon, mu                              (epsilon required)
//! [solver]    dt, t_end, record_every, integrator, phase_cfl
//! [forcing]   kind = "canonical" | "none" | "inline" | "file", fast, file,
//!             coefficients = [{ k = [0, 0, 1], branch = "+", re = 1.0, im = 0.0 }]
//! [initial]   kind = "random-slow" | "random" | "zero" | "file", amplitude, file
//! [scan]      epsilons, transient, window, samples_per_time, dt_max, phase_cfl,
//!             min_slope, trend_tol
//! [manifold]  orders, eta, n_max, kappa
//! [resonance] k_max, theta0
//! [toy]       f = [re, im], x0 = [re, im], t_end, dt, sweep
//! [gevrey]    sigma, s, kappas, k_max
//! [output]    dir
//! ```

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toml::{Table, Value};

use crate::dynamics::{ForcingSpec, Integrator, SolverConfig};
use crate::error::{Error, Result};
use crate::experiments::{canonical_forcing, ScanSetup};
use crate::lattice::{random_state, Branch, Domain, Frame, Lattice, ModeId, SpectralState, WaveVector};
use crate::slowmanifold::ManifoldOptions;
use crate::snapshot::load_snapshot;

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub k: [i32; 3],
    pub branch: Branch,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingConfig {
    None,
    /// Random on `|k| ≤ 2`, unit `H²` slow and (optionally) fast parts.
    Canonical { fast: bool },
    /// Listed coefficients; constraint partners are filled in.
    Inline(Vec<Coefficient>),
    File(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialConfig {
    Zero,
    RandomSlow { amplitude: f64 },
    Random { amplitude: f64 },
    File(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub epsilons: Vec<f64>,
    pub transient: f64,
    pub window: f64,
    pub samples_per_time: f64,
    pub dt_max: f64,
    pub phase_cfl: f64,
    pub min_slope: f64,
    pub trend_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldConfig {
    pub orders: Vec<usize>,
    pub eta: f64,
    pub n_max: usize,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceConfig {
    pub k_max: f64,
    pub theta0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub f: Complex64,
    pub x0: Complex64,
    pub t_end: f64,
    pub dt: f64,
    pub sweep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GevreyConfig {
    pub sigma: f64,
    pub s: f64,
    pub kappas: Vec<f64>,
    pub k_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lengths: [f64; 3],
    pub k_max: f64,
    pub eps: f64,
    pub mu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: f64,
    pub integrator: Integrator,
    pub phase_cfl: Option<f64>,
    pub forcing: ForcingConfig,
    pub initial: InitialConfig,
    pub scan: ScanConfig,
    pub manifold: ManifoldConfig,
    pub resonance: ResonanceConfig,
    pub toy: ToyConfig,
    pub gevrey: GevreyConfig,
    pub out_dir: String,
    pub seed: u64,
}

// Pulls typed values out of a table, remembering problems instead of
// stopping at the first one.
struct Reader {
    errs: Vec<String>,
}

impl Reader {
    fn section(&mut self, root: &mut Table, name: &str) -> Table {
        match root.remove(name) {
            None => Table::new(),
            Some(Value::Table(t)) => t,
            Some(_) => {
                self.errs.push(format!("`{name}` must be a table"));
                Table::new()
            }
        }
    }

    fn number(&mut self, t: &mut Table, path: &str, key: &str) -> Option<f64> {
        match t.remove(key)? {
            Value::Float(x) => Some(x),
            Value::Integer(i) => Some(i as f64),
            _ => {
                self.errs.push(format!("`{path}.{key}` must be a number"));
                None
            }
        }
    }

    fn f64_or(&mut self, t: &mut Table, path: &str, key: &str, default: f64) -> f64 {
        self.number(t, path, key).unwrap_or(default)
    }

    fn required(&mut self, t: &mut Table, path: &str, key: &str) -> f64 {
        if !t.contains_key(key) {
            self.errs.push(format!("missing required key `{path}.{key}`"));
            return f64::NAN;
        }
        self.number(t, path, key).unwrap_or(f64::NAN)
    }

    fn uint(&mut self, v: Value, what: &str) -> Option<u64> {
        match v {
            Value::Integer(i) if i >= 0 => Some(i as u64),
            _ => {
                self.errs.push(format!("`{what}` must be a non-negative integer"));
                None
            }
        }
    }

    fn uint_or(&mut self, t: &mut Table, path: &str, key: &str, default: u64) -> u64 {
        match t.remove(key) {
            None => default,
            Some(v) => self.uint(v, &format!("{path}.{key}")).unwrap_or(default),
        }
    }

    fn string_or(&mut self, t: &mut Table, path: &str, key: &str, default: &str) -> String {
        match t.remove(key) {
            None => default.to_string(),
            Some(Value::String(s)) => s,
            Some(_) => {
                self.errs.push(format!("`{path}.{key}` must be a string"));
                default.to_string()
            }
        }
    }

    fn bool_or(&mut self, t: &mut Table, path: &str, key: &str, default: bool) -> bool {
        match t.remove(key) {
            None => default,
            Some(Value::Boolean(b)) => b,
            Some(_) => {
                self.errs.push(format!("`{path}.{key}` must be true or false"));
                default
            }
        }
    }

    fn numbers_or(&mut self, t: &mut Table, path: &str, key: &str, default: &[f64]) -> Vec<f64> {
        match t.remove(key) {
            None => default.to_vec(),
            Some(Value::Array(a)) => {
                let mut out = Vec::new();
                for v in a {
                    match v {
                        Value::Float(x) => out.push(x),
                        Value::Integer(i) => out.push(i as f64),
                        _ => {
                            self.errs.push(format!("`{path}.{key}` must be an array of numbers"));
                            return default.to_vec();
                        }
                    }
                }
                out
            }
            Some(_) => {
                self.errs.push(format!("`{path}.{key}` must be an array of numbers"));
                default.to_vec()
            }
        }
    }

    fn complex_or(&mut self, t: &mut Table, path: &str, key: &str, default: Complex64) -> Complex64 {
        let v = self.numbers_or(t, path, key, &[default.re, default.im]);
        if v.len() != 2 {
            self.errs.push(format!("`{path}.{key}` must be [re, im]"));
            return default;
        }
        Complex64::new(v[0], v[1])
    }

    fn finish(&mut self, t: Table, path: &str) {
        for k in t.keys() {
            if path.is_empty() {
                self.errs.push(format!("unknown key `{k}`"));
            } else {
                self.errs.push(format!("unknown key `{path}.{k}`"));
            }
        }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.errs.push(msg.into());
        }
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut root: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        offset: e.span().map_or(0, |s| s.start),
        msg: e.message().to_string(),
    })?;
    let mut r = Reader { errs: Vec::new() };
    let seed = match root.remove("seed") {
        None => 0,
        Some(v) => r.uint(v, "seed").unwrap_or(0),
    };

    let mut t = r.section(&mut root, "domain");
    let two_pi = 2.0 * std::f64::consts::PI;
    let l = r.numbers_or(&mut t, "domain", "lengths", &[two_pi; 3]);
    let lengths = if l.len() == 3 {
        [l[0], l[1], l[2]]
    } else {
        r.errs.push("`domain.lengths` must have three entries".into());
        [two_pi; 3]
    };
    r.check(lengths.iter().all(|&x| positive(x)), "domain lengths must be > 0");
    let k_max = r.required(&mut t, "domain", "k_max");
    r.check(k_max.is_nan() || positive(k_max), "k_max must be > 0");
    r.finish(t, "domain");

    let mut t = r.section(&mut root, "physics");
    let eps = r.required(&mut t, "physics", "epsilon");
    r.check(eps.is_nan() || positive(eps), "epsilon must be > 0");
    let mu = r.f64_or(&mut t, "physics", "mu", 0.5);
    r.check(mu >= 0.0 && mu.is_finite(), "mu must be >= 0");
    r.finish(t, "physics");

    let mut t = r.section(&mut root, "solver");
    let dt = r.f64_or(&mut t, "solver", "dt", 0.01);
    r.check(positive(dt), "dt must be > 0");
    let t_end = r.f64_or(&mut t, "solver", "t_end", 1.0);
    r.check(positive(t_end), "t_end must be > 0");
    let record_every = r.f64_or(&mut t, "solver", "record_every", t_end.min(0.1));
    r.check(positive(record_every), "record_every must be > 0");
    r.check(record_every <= t_end, "record_every must not exceed t_end");
    let name = r.string_or(&mut t, "solver", "integrator", Integrator::IfRk4.label());
    let integrator = Integrator::parse(&name).unwrap_or_else(|| {
        r.errs.push(format!("unknown integrator `{name}` (expected `if-rk4`)"));
        Integrator::IfRk4
    });
    let phase_cfl = r.number(&mut t, "solver", "phase_cfl");
    r.check(phase_cfl.map_or(true, positive), "phase_cfl must be > 0");
    r.finish(t, "solver");

    let mut t = r.section(&mut root, "forcing");
    let kind = r.string_or(&mut t, "forcing", "kind", "canonical");
    let forcing = match kind.as_str() {
        "none" => ForcingConfig::None,
        "canonical" => ForcingConfig::Canonical { fast: r.bool_or(&mut t, "forcing", "fast", true) },
        "file" => match t.remove("file") {
            Some(Value::String(s)) => ForcingConfig::File(s),
            _ => {
                r.errs.push("forcing kind `file` needs a string `forcing.file`".into());
                ForcingConfig::None
            }
        },
        "inline" => ForcingConfig::Inline(parse_coefficients(&mut r, &mut t, k_max, lengths)),
        other => {
            r.errs.push(format!("unknown forcing kind `{other}` (expected none, canonical, inline or file)"));
            ForcingConfig::None
        }
    };
    r.finish(t, "forcing");

    let mut t = r.section(&mut root, "initial");
    let kind = r.string_or(&mut t, "initial", "kind", "random-slow");
    let initial = match kind.as_str() {
        "zero" => InitialConfig::Zero,
        "random-slow" | "random" => {
            let amplitude = r.f64_or(&mut t, "initial", "amplitude", 1.0);
            r.check(amplitude >= 0.0 && amplitude.is_finite(), "initial amplitude must be >= 0");
            if kind == "random" { InitialConfig::Random { amplitude } } else { InitialConfig::RandomSlow { amplitude } }
        }
        "file" => match t.remove("file") {
            Some(Value::String(s)) => InitialConfig::File(s),
            _ => {
                r.errs.push("initial kind `file` needs a string `initial.file`".into());
                InitialConfig::Zero
            }
        },
        other => {
            r.errs.push(format!("unknown initial kind `{other}` (expected zero, random-slow, random or file)"));
            InitialConfig::Zero
        }
    };
    r.finish(t, "initial");

    let mut t = r.section(&mut root, "scan");
    let settle = if positive(mu) { 10.0 / mu } else { 20.0 };
    let scan = ScanConfig {
        epsilons: r.numbers_or(&mut t, "scan", "epsilons", &[0.1, 0.05, 0.025, 0.0125]),
        transient: r.f64_or(&mut t, "scan", "transient", settle),
        window: r.f64_or(&mut t, "scan", "window", settle),
        samples_per_time: r.f64_or(&mut t, "scan", "samples_per_time", 10.0),
        dt_max: r.f64_or(&mut t, "scan", "dt_max", 0.01),
        phase_cfl: r.f64_or(&mut t, "scan", "phase_cfl", 0.5),
        min_slope: r.f64_or(&mut t, "scan", "min_slope", 0.45),
        trend_tol: r.f64_or(&mut t, "scan", "trend_tol", 0.1),
    };
    r.check(!scan.epsilons.is_empty() && scan.epsilons.iter().all(|&e| positive(e)), "scan epsilons must be > 0");
    r.check(scan.transient >= 0.0, "scan transient must be >= 0");
    for (v, name) in [
        (scan.window, "window"),
        (scan.samples_per_time, "samples_per_time"),
        (scan.dt_max, "dt_max"),
        (scan.phase_cfl, "phase_cfl"),
        (scan.trend_tol, "trend_tol"),
    ] {
        r.check(positive(v), format!("scan {name} must be > 0"));
    }
    r.finish(t, "scan");

    let mut t = r.section(&mut root, "manifold");
    let orders = r
        .numbers_or(&mut t, "manifold", "orders", &[0.0, 1.0, 2.0, 3.0])
        .into_iter()
        .map(|x| {
            if x >= 0.0 && x.fract() == 0.0 {
                x as usize
            } else {
                r.errs.push("manifold orders must be non-negative integers".into());
                0
            }
        })
        .collect::<Vec<_>>();
    let manifold = ManifoldConfig {
        orders,
        eta: r.f64_or(&mut t, "manifold", "eta", ManifoldOptions::default().eta),
        n_max: r.uint_or(&mut t, "manifold", "n_max", ManifoldOptions::default().n_max as u64) as usize,
        kappa: r.number(&mut t, "manifold", "kappa"),
    };
    r.check(positive(manifold.eta), "manifold eta must be > 0");
    r.check(manifold.kappa.map_or(true, positive), "manifold kappa must be > 0");
    r.check(
        manifold.orders.iter().all(|&n| n <= manifold.n_max),
        "manifold orders must not exceed manifold.n_max",
    );
    r.finish(t, "manifold");

    let mut t = r.section(&mut root, "resonance");
    let resonance = ResonanceConfig {
        k_max: r.f64_or(&mut t, "resonance", "k_max", if k_max.is_nan() { 4.0 } else { k_max }),
        theta0: r.f64_or(&mut t, "resonance", "theta0", 0.5),
    };
    r.check(positive(resonance.k_max), "resonance k_max must be > 0");
    r.check(resonance.theta0 > 0.0 && resonance.theta0 < 1.0, "theta0 must be in (0, 1)");
    r.finish(t, "resonance");

    let mut t = r.section(&mut root, "toy");
    let toy = ToyConfig {
        f: r.complex_or(&mut t, "toy", "f", Complex64::new(1.0, 0.0)),
        x0: r.complex_or(&mut t, "toy", "x0", Complex64::new(0.0, 0.0)),
        t_end: r.f64_or(&mut t, "toy", "t_end", 5.0),
        dt: r.f64_or(&mut t, "toy", "dt", 0.01),
        sweep: r.numbers_or(&mut t, "toy", "sweep", &[0.01, 0.02, 0.05, 0.1]),
    };
    r.check(positive(toy.t_end) && positive(toy.dt), "toy t_end and dt must be > 0");
    r.check(toy.sweep.iter().all(|&e| positive(e)), "toy sweep epsilons must be > 0");
    r.finish(t, "toy");

    let mut t = r.section(&mut root, "gevrey");
    let gevrey = GevreyConfig {
        sigma: r.f64_or(&mut t, "gevrey", "sigma", 0.5),
        s: r.f64_or(&mut t, "gevrey", "s", 0.0),
        kappas: r.numbers_or(&mut t, "gevrey", "kappas", &[2.0, 3.0, 4.0, 5.0]),
        k_max: r.f64_or(&mut t, "gevrey", "k_max", 12.0),
    };
    r.check(positive(gevrey.sigma), "gevrey sigma must be > 0");
    r.check(gevrey.s >= 0.0, "gevrey s must be >= 0");
    r.check(gevrey.kappas.iter().all(|&k| positive(k)), "gevrey kappas must be > 0");
    r.check(positive(gevrey.k_max), "gevrey k_max must be > 0");
    r.finish(t, "gevrey");

    let mut t = r.section(&mut root, "output");
    let out_dir = r.string_or(&mut t, "output", "dir", "out");
    r.finish(t, "output");
    r.finish(root, "");

    if !r.errs.is_empty() {
        return Err(Error::Config(r.errs.join("\n")));
    }
    Ok(RunConfig {
        lengths,
        k_max,
        eps,
        mu,
        dt,
        t_end,
        record_every,
        integrator,
        phase_cfl,
        forcing,
        initial,
        scan,
        manifold,
        resonance,
        toy,
        gevrey,
        out_dir,
        seed,
    })
}

fn parse_coefficients(r: &mut Reader, t: &mut Table, k_max: f64, lengths: [f64; 3]) -> Vec<Coefficient> {
    let Some(v) = t.remove("coefficients") else {
        r.errs.push("forcing kind `inline` needs `forcing.coefficients`".into());
        return Vec::new();
    };
    let Value::Array(items) = v else {
        r.errs.push("`forcing.coefficients` must be an array of tables".into());
        return Vec::new();
    };
    let mut out = Vec::new();
    for (i, item) in items.into_iter().enumerate() {
        let path = format!("forcing.coefficients[{i}]");
        let Value::Table(mut c) = item else {
            r.errs.push(format!("`{path}` must be a table"));
            continue;
        };
        let k = r.numbers_or(&mut c, &path, "k", &[]);
        let branch = r.string_or(&mut c, &path, "branch", "0");
        let re = r.f64_or(&mut c, &path, "re", 0.0);
        let im = r.f64_or(&mut c, &path, "im", 0.0);
        r.finish(c, &path);
        if k.len() != 3 || k.iter().any(|x| x.fract() != 0.0) {
            r.errs.push(format!("`{path}.k` must be three integers"));
            continue;
        }
        let k = [k[0] as i32, k[1] as i32, k[2] as i32];
        let Some(branch) = Branch::parse(&branch) else {
            r.errs.push(format!("`{path}.branch` must be one of -, 0, +"));
            continue;
        };
        if k == [0, 0, 0] {
            r.errs.push(format!("`{path}` sits on the zero wavevector, which carries no modes"));
            continue;
        }
        if branch.is_fast() && k[2] == 0 {
            r.errs.push(format!(
                "`{path}`: fast forcing at k = ({}, {}, 0) violates the constraint that fast coefficients vanish when k3 = 0",
                k[0], k[1]
            ));
            continue;
        }
        let norm = (0..3).map(|i| (2.0 * std::f64::consts::PI * f64::from(k[i]) / lengths[i]).powi(2)).sum::<f64>().sqrt();
        if !k_max.is_nan() && norm > k_max * (1.0 + 1e-12) {
            r.errs.push(format!("`{path}` has |k| = {norm} beyond k_max = {k_max}"));
            continue;
        }
        out.push(Coefficient { k, branch, value: Complex64::new(re, im) });
    }
    out
}

fn resolve(base: &Path, file: &str) -> std::path::PathBuf {
    let p = Path::new(file);
    if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
}

impl RunConfig {
    pub fn domain(&self) -> Result<Domain> {
        Domain::new(self.lengths[0], self.lengths[1], self.lengths[2])
    }

    pub fn lattice(&self) -> Result<Arc<Lattice>> {
        Lattice::new(self.domain()?, self.k_max)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            eps: self.eps,
            mu: self.mu,
            dt: self.dt,
            t_end: self.t_end,
            record_every: self.record_every,
            integrator: self.integrator,
            seed: self.seed,
            phase_cfl: self.phase_cfl,
        }
    }

    /// Forcing on `lattice`; relative file paths are taken from `base`.
    pub fn forcing(&self, lattice: &Arc<Lattice>, base: &Path) -> Result<ForcingSpec> {
        let f = match &self.forcing {
            ForcingConfig::None => SpectralState::zeros(lattice, Frame::Lab, 0.0),
            ForcingConfig::Canonical { fast } => canonical_forcing(lattice, self.seed, *fast),
            ForcingConfig::Inline(list) => {
                let mut f = SpectralState::zeros(lattice, Frame::Lab, 0.0);
                for c in list {
                    let id = ModeId::new(WaveVector(c.k), c.branch);
                    f.set_with_partners(id, c.value)?;
                }
                f.enforce_reality()
            }
            ForcingConfig::File(file) => {
                let path = resolve(base, file);
                let s = load_snapshot(&path).map_err(|e| Error::Config(format!("forcing file {}: {e}", path.display())))?;
                let s = s.to_frame(Frame::Lab, self.eps).transfer(lattice)?;
                if s.check_reality() > 1e-12 * s.l2_norm().max(1.0) {
                    return Err(Error::Config(format!(
                        "forcing file {}: coefficients violate the reality/symmetry constraints",
                        path.display()
                    )));
                }
                s
            }
        };
        Ok(ForcingSpec::Steady(f))
    }

    /// Initial state in the rotated frame at t = 0.
    pub fn initial(&self, lattice: &Arc<Lattice>, base: &Path) -> Result<SpectralState> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(1));
        let scaled = |s: SpectralState, a: f64| {
            let n = s.sobolev_norm(2.0);
            if n > 0.0 { s.scale(Complex64::new(a / n, 0.0)) } else { s }
        };
        Ok(match &self.initial {
            InitialConfig::Zero => SpectralState::zeros(lattice, Frame::Rotated, 0.0),
            InitialConfig::RandomSlow { amplitude } => {
                scaled(random_state(lattice, &mut rng, |k| 1.0 / (1.0 + k.powi(4))).slow_part(), *amplitude)
            }
            InitialConfig::Random { amplitude } => {
                scaled(random_state(lattice, &mut rng, |k| 1.0 / (1.0 + k.powi(4))), *amplitude)
            }
            InitialConfig::File(file) => {
                let path = resolve(base, file);
                load_snapshot(&path)?.to_frame(Frame::Rotated, self.eps).transfer(lattice)?
            }
        })
    }

    pub fn scan_setup(&self, base: &Path) -> Result<ScanSetup> {
        let lattice = self.lattice()?;
        Ok(ScanSetup {
            forcing: self.forcing(&lattice, base)?,
            initial: self.initial(&lattice, base)?,
            lattice,
            mu: self.mu,
            dt_max: self.scan.dt_max,
            phase_cfl: self.scan.phase_cfl,
            transient: self.scan.transient,
            window: self.scan.window,
            samples_per_time: self.scan.samples_per_time,
            trend_tol: self.scan.trend_tol,
        })
    }

    pub fn manifold_options(&self) -> ManifoldOptions {
        ManifoldOptions { eta: self.manifold.eta, n_max: self.manifold.n_max, kappa: self.manifold.kappa }
    }

    /// The fully resolved configuration as TOML.
    pub fn echo(&self) -> String {
        let floats = |v: &[f64]| Value::Array(v.iter().map(|&x| Value::Float(x)).collect());
        let cx = |c: Complex64| floats(&[c.re, c.im]);
        let table = |pairs: Vec<(&str, Value)>| Value::Table(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect());

        let mut root = Table::new();
        root.insert("seed".into(), Value::Integer(self.seed as i64));
        root.insert("domain".into(), table(vec![("lengths", floats(&self.lengths)), ("k_max", Value::Float(self.k_max))]));
        root.insert("physics".into(), table(vec![("epsilon", Value::Float(self.eps)), ("mu", Value::Float(self.mu))]));
        let mut solver = vec![
            ("dt", Value::Float(self.dt)),
            ("t_end", Value::Float(self.t_end)),
            ("record_every", Value::Float(self.record_every)),
            ("integrator", Value::String(self.integrator.label().into())),
        ];
        if let Some(c) = self.phase_cfl {
            solver.push(("phase_cfl", Value::Float(c)));
        }
        root.insert("solver".into(), table(solver));
        let forcing = match &self.forcing {
            ForcingConfig::None => vec![("kind", Value::String("none".into()))],
            ForcingConfig::Canonical { fast } => {
                vec![("kind", Value::String("canonical".into())), ("fast", Value::Boolean(*fast))]
            }
            ForcingConfig::File(f) => vec![("kind", Value::String("file".into())), ("file", Value::String(f.clone()))],
            ForcingConfig::Inline(list) => vec![
                ("kind", Value::String("inline".into())),
                (
                    "coefficients",
                    Value::Array(
                        list.iter()
                            .map(|c| {
                                table(vec![
                                    ("k", Value::Array(c.k.iter().map(|&x| Value::Integer(i64::from(x))).collect())),
                                    ("branch", Value::String(c.branch.label().into())),
                                    ("re", Value::Float(c.value.re)),
                                    ("im", Value::Float(c.value.im)),
                                ])
                            })
                            .collect(),
                    ),
                ),
            ],
        };
        root.insert("forcing".into(), table(forcing));
        let initial = match &self.initial {
            InitialConfig::Zero => vec![("kind", Value::String("zero".into()))],
            InitialConfig::RandomSlow { amplitude } => {
                vec![("kind", Value::String("random-slow".into())), ("amplitude", Value::Float(*amplitude))]
            }
            InitialConfig::Random { amplitude } => {
                vec![("kind", Value::String("random".into())), ("amplitude", Value::Float(*amplitude))]
            }
            InitialConfig::File(f) => vec![("kind", Value::String("file".into())), ("file", Value::String(f.clone()))],
        };
        root.insert("initial".into(), table(initial));
        let s = &self.scan;
        root.insert(
            "scan".into(),
            table(vec![
                ("epsilons", floats(&s.epsilons)),
                ("transient", Value::Float(s.transient)),
                ("window", Value::Float(s.window)),
                ("samples_per_time", Value::Float(s.samples_per_time)),
                ("dt_max", Value::Float(s.dt_max)),
                ("phase_cfl", Value::Float(s.phase_cfl)),
                ("min_slope", Value::Float(s.min_slope)),
                ("trend_tol", Value::Float(s.trend_tol)),
            ]),
        );
        let m = &self.manifold;
        let mut man = vec![
            ("orders", Value::Array(m.orders.iter().map(|&n| Value::Integer(n as i64)).collect())),
            ("eta", Value::Float(m.eta)),
            ("n_max", Value::Integer(m.n_max as i64)),
        ];
        if let Some(k) = m.kappa {
            man.push(("kappa", Value::Float(k)));
        }
        root.insert("manifold".into(), table(man));
        root.insert(
            "resonance".into(),
            table(vec![("k_max", Value::Float(self.resonance.k_max)), ("theta0", Value::Float(self.resonance.theta0))]),
        );
        let t = &self.toy;
        root.insert(
            "toy".into(),
            table(vec![
                ("f", cx(t.f)),
                ("x0", cx(t.x0)),
                ("t_end", Value::Float(t.t_end)),
                ("dt", Value::Float(t.dt)),
                ("sweep", floats(&t.sweep)),
            ]),
        );
        let g = &self.gevrey;
        root.insert(
            "gevrey".into(),
            table(vec![
                ("sigma", Value::Float(g.sigma)),
                ("s", Value::Float(g.s)),
                ("kappas", floats(&g.kappas)),
                ("k_max", Value::Float(g.k_max)),
            ]),
        );
        root.insert("output".into(), table(vec![("dir", Value::String(self.out_dir.clone()))]));
        toml::to_string(&root).expect("tables serialize")
    }
}
