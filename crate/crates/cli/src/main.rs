//! `geobal`: runs the simulator and the packaged experiments from a TOML
//! configuration. Every flag has a `GEOBAL_*` environment counterpart.
//!
//! Exit status is 0 on success, 1 on a configuration, I/O or numerical
//! error (including divergence) and 2 when a run completes but one of its
//! checks fails.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use geobal::config::{parse_config, RunConfig};
use geobal::dynamics::{ForcingSpec, Model};
use geobal::experiments::{
    audit_identities, balance_scan, fit_loglog, gevrey_state, gevrey_tail_check, manifold_scan, write_gevrey_csv,
    write_toy_csv, Check, ToyModel,
};
use geobal::lattice::{Domain, Lattice};
use geobal::resonance::{audit_with, write_record, CSV_HEADER as TRIAD_HEADER, RESONANT_TOL};
use geobal::slowmanifold::{order_table, write_order_table, ManifoldApprox};
use geobal::snapshot::save_snapshot;

/// Used when no `--config` is given.
const DEFAULT_CONFIG: &str = "[domain]\nk_max = 4\n[physics]\nepsilon = 0.1\n";

#[derive(Parser, Debug)]
#[command(name = "geobal", version, about = "Rotating primitive equations on a periodic box")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "GEOBAL_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, env = "GEOBAL_OUT")]
    out: Option<PathBuf>,
    /// Random seed (overrides the top-level `seed`).
    #[arg(long, global = true, env = "GEOBAL_SEED")]
    seed: Option<u64>,
    /// Worker threads. Runs are single-threaded, so this is validated but
    /// cannot change any result.
    #[arg(long, global = true, env = "GEOBAL_THREADS", default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate from the configured initial state; writes trajectory.csv and final.snap.
    Simulate,
    /// Post-transient fast energy over `scan.epsilons`; writes balance_scan.csv.
    BalanceScan,
    /// Slow-manifold iteration table at `physics.epsilon`; writes manifold_orders.csv.
    Manifold {
        /// Also run the trajectory residual scan over `scan.epsilons`.
        #[arg(long)]
        scan: bool,
    },
    /// Fast-fast-slow triad audit at `resonance.k_max`; writes triads.csv and resonance_summary.csv.
    ResonanceScan,
    /// Scalar toy model and its ε-sweep; writes toy.csv and toy_sweep.csv.
    Toy,
    /// Operator identities and eigenframe checks; writes identities.csv.
    AuditIdentities {
        /// Number of random states.
        #[arg(long, default_value_t = 100)]
        states: usize,
        /// Radius for the eigenframe checks.
        #[arg(long, default_value_t = 8.0)]
        frame_k_max: f64,
    },
    /// Tail of a synthesized exponentially decaying state; writes gevrey.csv.
    GevreyTail,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::BalanceScan => "balance-scan",
            Command::Manifold { .. } => "manifold",
            Command::ResonanceScan => "resonance-scan",
            Command::Toy => "toy",
            Command::AuditIdentities { .. } => "audit-identities",
            Command::GevreyTail => "gevrey-tail",
        }
    }
}

struct Run {
    cfg: RunConfig,
    base: PathBuf,
    out: PathBuf,
    command: &'static str,
}

impl Run {
    /// Opens `name` in the output directory and writes the config echo as
    /// `#` comment lines.
    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(name);
        let mut f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(f, "# geobal {} {}", self.command, env!("CARGO_PKG_VERSION"))?;
        for line in self.cfg.echo().lines() {
            writeln!(f, "# {line}")?;
        }
        Ok(f)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    if cli.threads == 0 {
        bail!("--threads must be >= 1");
    }
    let (text, base) = match &cli.config {
        Some(p) => (
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (DEFAULT_CONFIG.to_string(), PathBuf::from(".")),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    let out = match &cli.out {
        Some(o) => o.clone(),
        None => base.join(&cfg.out_dir),
    };
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let r = Run { cfg, base, out, command: cli.command.name() };
    match cli.command {
        Command::Simulate => simulate(&r),
        Command::BalanceScan => balance(&r),
        Command::Manifold { scan } => manifold(&r, scan),
        Command::ResonanceScan => resonance(&r),
        Command::Toy => toy(&r),
        Command::AuditIdentities { states, frame_k_max } => identities(&r, states, frame_k_max),
        Command::GevreyTail => gevrey(&r),
    }
}

fn print_checks(checks: &[Check]) -> bool {
    println!("{:<24} {:>24} {:>24}  result", "check", "value", "threshold");
    for c in checks {
        println!("{:<24} {:>24.16e} {:>24.16e}  {}", c.name, c.value, c.threshold, if c.pass { "PASS" } else { "FAIL" });
    }
    checks.iter().all(|c| c.pass)
}

fn write_checks(f: &mut impl Write, checks: &[Check]) -> Result<()> {
    writeln!(f, "check,value,threshold,pass")?;
    for c in checks {
        writeln!(f, "{},{:.16e},{:.16e},{}", c.name, c.value, c.threshold, c.pass)?;
    }
    Ok(())
}

fn simulate(r: &Run) -> Result<bool> {
    let lat = r.cfg.lattice()?;
    let forcing = r.cfg.forcing(&lat, &r.base)?;
    let w0 = r.cfg.initial(&lat, &r.base)?;
    let model = Model::new(&lat, r.cfg.solver(), forcing)?;
    let (rec, fin) = model.integrate(&w0)?;
    let mut f = r.create("trajectory.csv")?;
    rec.write_csv(&mut f)?;
    f.flush()?;
    save_snapshot(&fin, &r.out.join("final.snap"))?;
    if let Some(last) = rec.samples.last() {
        println!("t = {:.6}  E_total = {:.6e}  E_fast = {:.6e}", last.t, last.e_total, last.e_fast);
    }
    println!("wrote {} samples to {}", rec.samples.len(), r.out.join("trajectory.csv").display());
    Ok(true)
}

fn balance(r: &Run) -> Result<bool> {
    let setup = r.cfg.scan_setup(&r.base)?;
    let rep = balance_scan(&setup, &r.cfg.scan.epsilons, r.cfg.scan.min_slope)?;
    let mut f = r.create("balance_scan.csv")?;
    rep.write_csv(&mut f)?;
    f.flush()?;
    if let Some(fit) = &rep.fit {
        println!("log-log slope {:.4} over {} points", fit.slope, fit.points);
    }
    Ok(print_checks(&rep.checks))
}

fn manifold(r: &Run, scan: bool) -> Result<bool> {
    let lat = r.cfg.lattice()?;
    let forcing = r.cfg.forcing(&lat, &r.base)?;
    if !matches!(forcing, ForcingSpec::Steady(_)) {
        bail!("the slow-manifold construction needs steady forcing");
    }
    let w0 = r.cfg.initial(&lat, &r.base)?.slow_part();
    let approx = ManifoldApprox::new(&forcing, r.cfg.eps, r.cfg.mu, r.cfg.manifold_options())?;
    let rows = order_table(&approx, &w0)?;
    let mut f = r.create("manifold_orders.csv")?;
    let p = approx.params();
    writeln!(f, "# kappa={:.16e} delta={:.16e} n_cap={}", p.kappa, p.delta, p.n_cap)?;
    write_order_table(&rows, &mut f)?;
    f.flush()?;
    for row in &rows {
        println!("n = {}  |U| = {:.6e}  |R| = {:.6e}", row.n, row.norm_u, row.norm_r);
    }
    if !scan {
        return Ok(true);
    }
    let setup = r.cfg.scan_setup(&r.base)?;
    let rep = manifold_scan(&setup, &r.cfg.scan.epsilons, &r.cfg.manifold.orders, r.cfg.manifold_options())?;
    let mut f = r.create("manifold_scan.csv")?;
    rep.write_csv(&mut f)?;
    f.flush()?;
    Ok(print_checks(&rep.checks))
}

fn resonance(r: &Run) -> Result<bool> {
    let domain = r.cfg.domain()?;
    let mut f = r.create("triads.csv")?;
    writeln!(f, "{TRIAD_HEADER}")?;
    let mut io = Ok(());
    let rep = audit_with(domain, r.cfg.resonance.k_max, r.cfg.resonance.theta0, |rec| {
        if io.is_ok() {
            io = write_record(&mut f, rec);
        }
    })?;
    io?;
    f.flush()?;
    let mut s = r.create("resonance_summary.csv")?;
    writeln!(
        s,
        "kmax,theta0,triads,resonant,exact_resonance_violations,bound_violations,c_nr,resonant_residual"
    )?;
    writeln!(
        s,
        "{:.16e},{:.16e},{},{},{},{},{:.16e},{:.16e}",
        rep.kmax,
        rep.theta0,
        rep.triads,
        rep.resonant_count,
        rep.resonant_violations,
        rep.violations,
        rep.max_ratio,
        rep.resonant_residual
    )?;
    writeln!(s, "# case,count")?;
    for (case, n) in &rep.per_case {
        writeln!(s, "# {},{n}", case.label())?;
    }
    s.flush()?;
    println!("{} triads, {} exactly resonant, c_nr = {:.6}", rep.triads, rep.resonant_count, rep.max_ratio);
    Ok(print_checks(&[
        Check::at_most("exact_resonance_violations", rep.resonant_violations as f64, 0.0),
        Check::at_most("resonant_residual", rep.resonant_residual, RESONANT_TOL),
        Check::at_most("bound_violations", rep.violations as f64, 0.0),
    ]))
}

fn toy(r: &Run) -> Result<bool> {
    let t = &r.cfg.toy;
    let model = ToyModel::new(r.cfg.eps, r.cfg.mu, t.f)?;
    let samples = model.run(t.x0, t.t_end, t.dt)?;
    let mut f = r.create("toy.csv")?;
    write_toy_csv(&samples, &mut f)?;
    f.flush()?;
    let max_err = samples.iter().map(|s| (s.x - s.exact).norm()).fold(0.0, f64::max);

    let mags: Vec<f64> = t
        .sweep
        .iter()
        .map(|&e| Ok(ToyModel::new(e, r.cfg.mu, t.f)?.slow_point().norm()))
        .collect::<Result<_>>()?;
    let fit = fit_loglog(&t.sweep, &mags)?;
    let mut f = r.create("toy_sweep.csv")?;
    writeln!(f, "eps,abs_U")?;
    for (e, m) in t.sweep.iter().zip(&mags) {
        writeln!(f, "{e:.16e},{m:.16e}")?;
    }
    writeln!(f, "# fit slope={:.16e} intercept={:.16e} rms={:.16e}", fit.slope, fit.intercept, fit.rms)?;
    f.flush()?;
    let scale = samples.iter().map(|s| s.exact.norm()).fold(1.0, f64::max);
    Ok(print_checks(&[
        Check::at_most("closed_form_error", max_err / scale, 1e-12),
        Check::at_most("sweep_slope_minus_1", (fit.slope - 1.0).abs(), 0.05),
    ]))
}

fn identities(r: &Run, states: usize, frame_k_max: f64) -> Result<bool> {
    if states == 0 {
        bail!("--states must be >= 1");
    }
    let checks = audit_identities(r.cfg.k_max, states, r.cfg.mu, frame_k_max, r.cfg.seed)?;
    let mut f = r.create("identities.csv")?;
    write_checks(&mut f, &checks)?;
    f.flush()?;
    Ok(print_checks(&checks))
}

fn gevrey(r: &Run) -> Result<bool> {
    let g = &r.cfg.gevrey;
    let lat = Lattice::new(Domain::new(r.cfg.lengths[0], r.cfg.lengths[1], r.cfg.lengths[2])?, g.k_max)?;
    let state = gevrey_state(&lat, g.sigma, r.cfg.seed);
    let rep = gevrey_tail_check(&state, g.sigma, g.s, &g.kappas)?;
    let mut f = r.create("gevrey.csv")?;
    write_gevrey_csv(&rep, &mut f)?;
    f.flush()?;
    let Some(fit) = rep.fit else { bail!("no nonzero tails to fit") };
    println!("tail slope {:.4} against -sigma = {:.4}", fit.slope, -g.sigma);
    Ok(print_checks(&[Check::at_most(
        "slope_relative_error",
        (fit.slope + g.sigma).abs() / g.sigma,
        0.1,
    )]))
}
