//! Batch front-end: parses JSON scenario configs (command-line flags
//! override file values), dispatches to the library modules, and writes
//! CSV/JSON reports into the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 nonconvergence. A detected blow-up is a successful outcome (it is the
//! object of study for `blowup-demo` and a reported outcome elsewhere).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use cgl_core::bifurcation::{
    asymptotic_check, assemble_solution, continue_branch, find_roots_p, full_residual,
    square_pair, square_pair_swapped, AsymptoticReport, Branch, GalerkinSpace, PRoot, TrigCoeffs,
};
use cgl_core::boundstate::{
    admissibility_chi_minus, assemble, compute_coeffs, default_length, residual_bs,
    solve_profile, AdmissibilityReport, BoundStateSpec, NlsCoeffs,
};
use cgl_core::eigen::eigenbasis;
use cgl_core::evolution::{Integrator, RunOutcome, Scheme, SolverConfig};
use cgl_core::floquet::{build_orbit, instability_blowup_demo, stability_verdict};
use cgl_core::grid::{BoundaryCondition, Field, Grid};
use cgl_core::params::{blowup_energy, classify, ParamSet};
use cgl_core::{Error, C64};

const SPEC_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "cgl-lab", about = "Numerical laboratory for a complex Ginzburg-Landau equation with two power nonlinearities", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the stability/existence hypothesis branches of a parameter set
    Classify(ClassifyCli),
    /// Solve a decaying bound-state profile on the line
    Boundstate(BoundstateCli),
    /// Evolve initial data and log diagnostics
    Simulate(SimulateCli),
    /// Floquet stability analysis of the homogeneous periodic orbit
    Floquet(FloquetCli),
    /// Lyapunov-Schmidt bifurcation branches on the square
    Bifurcate(BifurcateCli),
    /// Negative-energy blow-up demonstration
    #[command(name = "blowup-demo")]
    BlowupDemo(BlowupCli),
    /// Run several configs in parallel worker processes
    Sweep(SweepCli),
}

#[derive(Args, Clone)]
struct CommonCli {
    /// JSON scenario config; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for reports
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    };
    std::process::exit(code);
}

fn exit_code_for(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. }) | Some(Error::NoContraction { .. }) => 4,
        Some(Error::Numerical(_))
        | Some(Error::StepSize { .. })
        | Some(Error::NoRoot(_))
        | Some(Error::ResolventDistance { .. })
        | Some(Error::Contradiction) => 3,
        Some(_) => 2,
        None => 2,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Classify(a) => run_classify(a),
        Command::Boundstate(a) => run_boundstate(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Floquet(a) => run_floquet(a),
        Command::Bifurcate(a) => run_bifurcate(a),
        Command::BlowupDemo(a) => run_blowup(a),
        Command::Sweep(a) => run_sweep(a),
    }
}

// -------------------------------------------------------------------- sweep

#[derive(Args, Clone)]
struct SweepCli {
    /// Scenario configs; each must carry a "command" field
    #[arg(long, num_args = 1.., required = true)]
    configs: Vec<PathBuf>,
    /// Parent output directory; each config writes to a subdirectory
    /// named after its file stem
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Fans independent scenarios across worker processes; no shared mutable
/// state, so a failure in one does not affect the others. Exits with the
/// largest child exit code.
fn run_sweep(args: SweepCli) -> anyhow::Result<()> {
    let exe = std::env::current_exe().context("cannot locate own executable")?;
    let mut handles = Vec::new();
    for cfg in &args.configs {
        let text = fs::read_to_string(cfg)
            .with_context(|| format!("cannot read config {}", cfg.display()))?;
        let v: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", cfg.display()))?;
        let command = v
            .get("command")
            .and_then(|c| c.as_str())
            .with_context(|| format!("{}: sweep configs need a \"command\" field", cfg.display()))?
            .to_owned();
        let stem = cfg
            .file_stem()
            .with_context(|| format!("bad config path {}", cfg.display()))?
            .to_owned();
        let out = args.out.join(stem);
        let (exe, cfg) = (exe.clone(), cfg.clone());
        handles.push(std::thread::spawn(move || -> anyhow::Result<i32> {
            let status = std::process::Command::new(&exe)
                .arg(&command)
                .arg("--config")
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .status()
                .with_context(|| format!("cannot spawn worker for {}", cfg.display()))?;
            let code = status.code().unwrap_or(3);
            println!("{} [{}] -> exit {}", cfg.display(), command, code);
            Ok(code)
        }));
    }
    let mut worst = 0;
    for h in handles {
        worst = worst.max(h.join().expect("worker thread panicked")?);
    }
    if worst != 0 {
        std::process::exit(worst);
    }
    Ok(())
}

fn load_config<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> anyhow::Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("invalid config {}", p.display()))
        }
    }
}

fn check_meta(command: &Option<String>, spec_version: &Option<u32>, expected: &str) -> anyhow::Result<()> {
    if let Some(c) = command {
        if c != expected {
            bail!("config command {c:?} does not match invoked command {expected:?}");
        }
    }
    if let Some(v) = spec_version {
        if *v != SPEC_VERSION {
            bail!("unsupported spec_version {v} (expected {SPEC_VERSION})");
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn create_out_file(dir: &Path, name: &str) -> anyhow::Result<fs::File> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let f = fs::File::create(&path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(f)
}

// ---------------------------------------------------------------- classify

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyConfig {
    command: Option<String>,
    spec_version: Option<u32>,
    a: f64,
    alpha: f64,
    b: f64,
    beta: f64,
    c: f64,
    gamma: f64,
    k: f64,
    sigma1: f64,
    sigma2: f64,
    #[serde(default = "two")]
    lebesgue_p: f64,
    domain_volume: Option<f64>,
    #[serde(default = "one_u32")]
    dimension: u32,
}

fn two() -> f64 {
    2.0
}
fn one_u32() -> u32 {
    1
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        // the worked H1-stability example parameters
        ClassifyConfig {
            command: None,
            spec_version: None,
            a: 1.0,
            alpha: 0.5,
            b: 0.1,
            beta: 0.05,
            c: 1.0,
            gamma: 0.5,
            k: -1.0,
            sigma1: 1.0,
            sigma2: 2.0,
            lebesgue_p: 2.0,
            domain_volume: Some(1.0),
            dimension: 1,
        }
    }
}

#[derive(Args, Clone)]
struct ParamOverrides {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
}

fn apply_param_overrides(p: &mut ParamSet, o: &ParamOverrides) {
    let pairs = [
        (&mut p.a, o.a),
        (&mut p.alpha, o.alpha),
        (&mut p.b, o.b),
        (&mut p.beta, o.beta),
        (&mut p.c, o.c),
        (&mut p.gamma, o.gamma),
        (&mut p.k, o.k),
        (&mut p.sigma1, o.sigma1),
        (&mut p.sigma2, o.sigma2),
    ];
    for (slot, value) in pairs {
        if let Some(v) = value {
            *slot = v;
        }
    }
}

#[derive(Args, Clone)]
struct ClassifyCli {
    #[command(flatten)]
    common: CommonCli,
    #[command(flatten)]
    params: ParamOverrides,
    #[arg(long)]
    lebesgue_p: Option<f64>,
    #[arg(long)]
    domain_volume: Option<f64>,
    #[arg(long)]
    dimension: Option<u32>,
}

fn run_classify(args: ClassifyCli) -> anyhow::Result<()> {
    let cfg: ClassifyConfig = load_config(&args.common.config)?;
    check_meta(&cfg.command, &cfg.spec_version, "classify")?;
    let mut p = ParamSet {
        a: cfg.a,
        alpha: cfg.alpha,
        b: cfg.b,
        beta: cfg.beta,
        c: cfg.c,
        gamma: cfg.gamma,
        k: cfg.k,
        sigma1: cfg.sigma1,
        sigma2: cfg.sigma2,
    };
    apply_param_overrides(&mut p, &args.params);
    let lebesgue_p = args.lebesgue_p.unwrap_or(cfg.lebesgue_p);
    let volume = args.domain_volume.or(cfg.domain_volume);
    let dimension = args.dimension.unwrap_or(cfg.dimension);
    let report = classify(&p, lebesgue_p, volume, dimension)?;
    write_json(&args.common.out, "classify.json", &report)?;
    println!(
        "global_existence={} lp_stable={} h1_stable={}",
        report.global_existence.satisfied, report.lp_stable.satisfied, report.h1_stable.satisfied
    );
    Ok(())
}

// --------------------------------------------------------------- boundstate

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundstateConfig {
    command: Option<String>,
    spec_version: Option<u32>,
    theta: f64,
    omega: f64,
    k: f64,
    sigma1: f64,
    sigma2: f64,
    chi: i32,
    /// Half-length of the truncated line; defaults to a decay-based choice.
    length: Option<f64>,
    #[serde(default = "default_n_profile")]
    n: usize,
}

fn default_n_profile() -> usize {
    4096
}

impl Default for BoundstateConfig {
    fn default() -> Self {
        BoundstateConfig {
            command: None,
            spec_version: None,
            theta: 0.0,
            omega: 1.0,
            k: 0.0,
            sigma1: 2.0,
            sigma2: 4.0,
            chi: 1,
            length: None,
            n: 4096,
        }
    }
}

#[derive(Args, Clone)]
struct BoundstateCli {
    #[command(flatten)]
    common: CommonCli,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    chi: Option<i32>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Serialize)]
struct BoundstateReport {
    spec_version: u32,
    spec: BoundStateSpec,
    coeffs: NlsCoeffs,
    x0: f64,
    length: f64,
    n: usize,
    max_first_integral: f64,
    residual: f64,
    admissibility: Option<AdmissibilityReport>,
}

fn run_boundstate(args: BoundstateCli) -> anyhow::Result<()> {
    let mut cfg: BoundstateConfig = load_config(&args.common.config)?;
    check_meta(&cfg.command, &cfg.spec_version, "boundstate")?;
    if let Some(v) = args.theta {
        cfg.theta = v;
    }
    if let Some(v) = args.omega {
        cfg.omega = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.sigma1 {
        cfg.sigma1 = v;
    }
    if let Some(v) = args.sigma2 {
        cfg.sigma2 = v;
    }
    if let Some(v) = args.chi {
        cfg.chi = v;
    }
    if let Some(v) = args.length {
        cfg.length = Some(v);
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }

    let spec = BoundStateSpec::new(cfg.theta, cfg.omega, cfg.k, cfg.sigma1, cfg.sigma2, cfg.chi)?;
    let coeffs = compute_coeffs(&spec)?;
    let admissibility = if cfg.chi == -1 {
        Some(admissibility_chi_minus(&coeffs, cfg.sigma1, cfg.sigma2)?)
    } else {
        None
    };
    let length = cfg.length.unwrap_or_else(|| default_length(coeffs.epsilon));
    let profile = solve_profile(&coeffs, cfg.chi, cfg.sigma1, cfg.sigma2, length, cfg.n)?;
    let bs = assemble(&profile, coeffs.d);
    let report = BoundstateReport {
        spec_version: SPEC_VERSION,
        spec,
        coeffs,
        x0: profile.x0,
        length,
        n: cfg.n,
        max_first_integral: profile.max_first_integral(),
        residual: residual_bs(&bs, &spec),
        admissibility,
    };
    write_json(&args.common.out, "boundstate.json", &report)?;

    let mut csv = create_out_file(&args.common.out, "profile.csv")?;
    writeln!(csv, "x,psi,dpsi,re_phi,im_phi")?;
    let m = profile.psi.len();
    for i in 0..m {
        let x = -length + 2.0 * length * i as f64 / (m - 1) as f64;
        let phi = bs.phi[i];
        writeln!(
            csv,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            x, profile.psi[i], profile.dpsi[i], phi.re, phi.im
        )?;
    }
    println!("peak value x0 = {}, residual = {:.3e}", profile.x0, report.residual);
    Ok(())
}

// ----------------------------------------------------------------- simulate

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind")]
enum InitialConfig {
    /// Product of the lowest compatible trigonometric modes, scaled.
    Sine { amplitude: f64, mode: usize },
    /// Spatially constant data (Neumann only).
    Constant { re: f64, im: f64 },
    /// Seeded random combination of the first `count` eigenmodes,
    /// normalized to unit L2 norm then scaled.
    RandomModes { seed: u64, count: usize, amplitude: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    command: Option<String>,
    spec_version: Option<u32>,
    params: ParamSet,
    grid: Grid,
    bc: BoundaryCondition,
    scheme: Scheme,
    dt: f64,
    t_end: f64,
    #[serde(default = "default_threshold")]
    blowup_threshold: f64,
    #[serde(default = "one_usize")]
    diag_stride: usize,
    initial: InitialConfig,
}

fn default_threshold() -> f64 {
    1e6
}
fn one_usize() -> usize {
    1
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            command: None,
            spec_version: None,
            params: ParamSet {
                a: 1.0,
                alpha: 0.5,
                b: 0.1,
                beta: 0.05,
                c: 1.0,
                gamma: 0.5,
                k: -1.0,
                sigma1: 1.0,
                sigma2: 2.0,
            },
            grid: Grid::Interval {
                x0: 0.0,
                x1: 1.0,
                n: 129,
            },
            bc: BoundaryCondition::Dirichlet,
            scheme: Scheme::EigenbasisExponential,
            dt: 1e-3,
            t_end: 1.0,
            blowup_threshold: 1e6,
            diag_stride: 10,
            initial: InitialConfig::Sine {
                amplitude: 1.0,
                mode: 1,
            },
        }
    }
}

fn build_initial(grid: Grid, bc: BoundaryCondition, init: &InitialConfig) -> anyhow::Result<Field> {
    use rand::{Rng, SeedableRng};
    match init {
        InitialConfig::Sine { amplitude, mode } => {
            if *mode == 0 && bc == BoundaryCondition::Dirichlet {
                bail!(Error::InvalidParams("Dirichlet sine mode index starts at 1".into()));
            }
            let count = match bc {
                BoundaryCondition::Dirichlet => *mode,
                BoundaryCondition::Neumann => *mode + 1,
            };
            let basis = eigenbasis(grid, bc, count.max(1))?;
            Ok(basis
                .mode_field(count - 1)
                .scale(C64::new(*amplitude, 0.0)))
        }
        InitialConfig::Constant { re, im } => {
            if bc == BoundaryCondition::Dirichlet && (*re != 0.0 || *im != 0.0) {
                bail!(Error::InvalidParams(
                    "constant initial data violates Dirichlet boundary conditions".into()
                ));
            }
            Ok(Field::from_fn(grid, bc, |_, _| C64::new(*re, *im)))
        }
        InitialConfig::RandomModes {
            seed,
            count,
            amplitude,
        } => {
            let basis = eigenbasis(grid, bc, (*count).max(1))?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut u = Field::zeros(grid, bc);
            for i in 0..*count {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                u = u.add(&basis.mode_field(i).scale(z))?;
            }
            let norm = u.norm_l2_sq().sqrt();
            if norm == 0.0 {
                bail!(Error::Numerical("random initial data degenerated to zero".into()));
            }
            Ok(u.scale(C64::new(amplitude / norm, 0.0)))
        }
    }
}

#[derive(Args, Clone)]
struct SimulateCli {
    #[command(flatten)]
    common: CommonCli,
    #[command(flatten)]
    params: ParamOverrides,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Serialize)]
struct SimulateReport {
    spec_version: u32,
    outcome: RunOutcome,
    final_time: f64,
    final_sup: f64,
    final_l2: f64,
    final_h1: f64,
}

fn write_state_csv(dir: &Path, name: &str, u: &Field) -> anyhow::Result<()> {
    let mut f = create_out_file(dir, name)?;
    let g = u.grid();
    match g {
        Grid::Interval { x0, n, .. } => {
            writeln!(f, "x,re,im")?;
            let h = g.hx();
            for (i, z) in u.values().iter().enumerate() {
                writeln!(f, "{:.17e},{:.17e},{:.17e}", x0 + h * i as f64, z.re, z.im)?;
            }
            let _ = n;
        }
        Grid::Rectangle { x0, y0, nx, .. } => {
            writeln!(f, "x,y,re,im")?;
            let (hx, hy) = (g.hx(), g.hy());
            for (idx, z) in u.values().iter().enumerate() {
                let (i, j) = (idx % nx, idx / nx);
                writeln!(
                    f,
                    "{:.17e},{:.17e},{:.17e},{:.17e}",
                    x0 + hx * i as f64,
                    y0 + hy * j as f64,
                    z.re,
                    z.im
                )?;
            }
        }
    }
    Ok(())
}

fn run_simulate(args: SimulateCli) -> anyhow::Result<()> {
    let mut cfg: SimulateConfig = load_config(&args.common.config)?;
    check_meta(&cfg.command, &cfg.spec_version, "simulate")?;
    apply_param_overrides(&mut cfg.params, &args.params);
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.t_end {
        cfg.t_end = v;
    }
    let u0 = build_initial(cfg.grid, cfg.bc, &cfg.initial)?;
    let integ = Integrator::new(cfg.grid, cfg.bc, cfg.params, cfg.scheme)?;
    let solver = SolverConfig {
        dt: cfg.dt,
        t_end: cfg.t_end,
        blowup_threshold: cfg.blowup_threshold,
        diag_stride: cfg.diag_stride,
        scheme: cfg.scheme,
    };
    let (u_end, log, outcome) = integ.run(&u0, &solver)?;
    let csv = create_out_file(&args.common.out, "diagnostics.csv")?;
    log.write_csv(csv)?;
    write_state_csv(&args.common.out, "final_state.csv", &u_end)?;
    let final_time = log.rows.last().map(|r| r.t).unwrap_or(0.0);
    let report = SimulateReport {
        spec_version: SPEC_VERSION,
        outcome: outcome.clone(),
        final_time,
        final_sup: u_end.sup_norm(),
        final_l2: u_end.norm_l2_sq().sqrt(),
        final_h1: u_end.norm_h1_sq().sqrt(),
    };
    write_json(&args.common.out, "simulate.json", &report)?;
    match &outcome {
        RunOutcome::Completed => println!("completed to t = {final_time}"),
        RunOutcome::BlowUp { time } => println!("blow-up detected at t = {time}"),
        RunOutcome::Failed { time, reason } => {
            bail!(Error::Numerical(format!("run failed at t = {time}: {reason}")))
        }
    }
    Ok(())
}

// ------------------------------------------------------------------ floquet

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FloquetConfig {
    command: Option<String>,
    spec_version: Option<u32>,
    params: ParamSet,
    domain: Grid,
    /// Also run the radial blow-up demonstration from r0 + 1/n.
    blowup_demo_n: Option<u32>,
}

impl Default for FloquetConfig {
    fn default() -> Self {
        FloquetConfig {
            command: None,
            spec_version: None,
            params: ParamSet {
                a: 1.0,
                alpha: 0.0,
                b: -1.0,
                beta: 1.0,
                c: 0.0,
                gamma: 0.0,
                k: 1.0,
                sigma1: 2.0,
                sigma2: 4.0,
            },
            domain: Grid::Interval {
                x0: 0.0,
                x1: 1.0,
                n: 33,
            },
            blowup_demo_n: None,
        }
    }
}

#[derive(Args, Clone)]
struct FloquetCli {
    #[command(flatten)]
    common: CommonCli,
    #[command(flatten)]
    params: ParamOverrides,
    #[arg(long)]
    blowup_demo_n: Option<u32>,
}

fn run_floquet(args: FloquetCli) -> anyhow::Result<()> {
    let mut cfg: FloquetConfig = load_config(&args.common.config)?;
    check_meta(&cfg.command, &cfg.spec_version, "floquet")?;
    apply_param_overrides(&mut cfg.params, &args.params);
    if args.blowup_demo_n.is_some() {
        cfg.blowup_demo_n = args.blowup_demo_n;
    }
    let orbit = build_orbit(&cfg.params)?;
    let report = stability_verdict(&orbit, cfg.domain)?;
    write_json(&args.common.out, "floquet.json", &report)?;
    let mut csv = create_out_file(&args.common.out, "floquet.csv")?;
    writeln!(
        csv,
        "mu_delta,re_lambda,im_lambda,re_mult1,im_mult1,re_mult2,im_mult2,log_mag1,log_mag2,product_check,margin"
    )?;
    for e in &report.entries {
        writeln!(
            csv,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            e.mu_delta,
            e.lambda.re,
            e.lambda.im,
            e.multipliers[0].re,
            e.multipliers[0].im,
            e.multipliers[1].re,
            e.multipliers[1].im,
            e.log_magnitudes[0],
            e.log_magnitudes[1],
            e.product_check,
            e.margin
        )?;
    }
    println!("verdict: {:?}", report.verdict);
    if let Some(n) = cfg.blowup_demo_n {
        let t = instability_blowup_demo(&orbit, n)?;
        write_json(
            &args.common.out,
            "floquet_blowup.json",
            &serde_json::json!({ "spec_version": SPEC_VERSION, "n": n, "escape_time": t }),
        )?;
        println!("radial escape time from r0 + 1/{n}: {t}");
    }
    Ok(())
}

// ---------------------------------------------------------------- bifurcate

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BifurcateConfig {
    command: Option<String>,
    spec_version: Option<u32>,
    /// Nodes per side of the square grid.
    #[serde(default = "default_bif_n")]
    n: usize,
    /// Galerkin modes.
    #[serde(default = "default_bif_modes")]
    modes: usize,
    theta: f64,
    gamma1: f64,
    gamma2: f64,
    chi: f64,
    sigma1: f64,
    sigma2: f64,
    eps_grid: Vec<f64>,
    #[serde(default)]
    include_swapped: bool,
    #[serde(default)]
    allow_low_sigma: bool,
}

fn default_bif_n() -> usize {
    65
}
fn default_bif_modes() -> usize {
    150
}

impl Default for BifurcateConfig {
    fn default() -> Self {
        BifurcateConfig {
            command: None,
            spec_version: None,
            n: 65,
            modes: 150,
            theta: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            chi: -1.0,
            sigma1: 2.0,
            sigma2: 4.0,
            eps_grid: vec![0.0, 1e-3, 2.5e-3, 5e-3, 1e-2],
            include_swapped: true,
            allow_low_sigma: false,
        }
    }
}

#[derive(Args, Clone)]
struct BifurcateCli {
    #[command(flatten)]
    common: CommonCli,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    allow_low_sigma: bool,
}

#[derive(Serialize)]
struct BranchSummary {
    ordering: String,
    root: PRoot,
    csv: String,
    lipschitz_lambda: f64,
    lipschitz_alpha: f64,
    truncated: Option<String>,
    max_full_residual: f64,
    asymptotics: Option<AsymptoticReport>,
}

#[derive(Serialize)]
struct BifurcateReport {
    spec_version: u32,
    lambda0: f64,
    roots: Vec<PRoot>,
    branches: Vec<BranchSummary>,
}

fn write_branch_csv(dir: &Path, name: &str, branch: &Branch, residuals: &[f64]) -> anyhow::Result<()> {
    let mut f = create_out_file(dir, name)?;
    writeln!(f, "eps,re_lambda,im_lambda,re_alpha,im_alpha,y_h1,residual,full_residual")?;
    for (p, r) in branch.points.iter().zip(residuals) {
        writeln!(
            f,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            p.eps, p.lambda.re, p.lambda.im, p.alpha.re, p.alpha.im, p.y_h1, p.residual, r
        )?;
    }
    Ok(())
}

fn run_bifurcate(args: BifurcateCli) -> anyhow::Result<()> {
    let mut cfg: BifurcateConfig = load_config(&args.common.config)?;
    check_meta(&cfg.command, &cfg.spec_version, "bifurcate")?;
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.modes {
        cfg.modes = v;
    }
    if let Some(v) = args.sigma1 {
        cfg.sigma1 = v;
    }
    if let Some(v) = args.sigma2 {
        cfg.sigma2 = v;
    }
    if args.allow_low_sigma {
        cfg.allow_low_sigma = true;
    }
    let trig = TrigCoeffs {
        theta: cfg.theta,
        gamma1: cfg.gamma1,
        gamma2: cfg.gamma2,
        chi: cfg.chi,
        sigma1: cfg.sigma1,
        sigma2: cfg.sigma2,
    };
    trig.validate(cfg.allow_low_sigma)?;

    let mut report = BifurcateReport {
        spec_version: SPEC_VERSION,
        lambda0: 0.0,
        roots: Vec::new(),
        branches: Vec::new(),
    };
    for (ordering, pair) in [
        ("direct", square_pair(cfg.n)?),
        ("swapped", square_pair_swapped(cfg.n)?),
    ] {
        if ordering == "swapped" && !cfg.include_swapped {
            continue;
        }
        let roots = find_roots_p(&pair, cfg.sigma1);
        let space = GalerkinSpace::new(pair, cfg.modes)?;
        report.lambda0 = space.pair.lambda0;
        if ordering == "direct" {
            report.roots = roots.clone();
        }
        for (ri, root) in roots.iter().enumerate().filter(|(_, r)| r.simple) {
            // real roots only: the continuation examples of record
            if root.alpha0.im.abs() > 1e-8 {
                continue;
            }
            let branch = continue_branch(&space, &trig, root.alpha0, &cfg.eps_grid)?;
            let mut residuals = Vec::new();
            for bp in &branch.points {
                let u = assemble_solution(&space, bp)?;
                residuals.push(full_residual(&space, &trig, bp.lambda, &u)?);
            }
            let csv_name = format!("branch_{ordering}_{ri}.csv");
            write_branch_csv(&args.common.out, &csv_name, &branch, &residuals)?;
            let asymptotics = if branch.points.len() >= 3 {
                Some(asymptotic_check(&branch, &space, &trig)?)
            } else {
                None
            };
            report.branches.push(BranchSummary {
                ordering: ordering.into(),
                root: *root,
                csv: csv_name,
                lipschitz_lambda: branch.lipschitz_lambda,
                lipschitz_alpha: branch.lipschitz_alpha,
                truncated: branch.truncated.clone(),
                max_full_residual: residuals.iter().fold(0.0f64, |a, &b| a.max(b)),
                asymptotics,
            });
        }
    }
    write_json(&args.common.out, "bifurcate.json", &report)?;
    println!(
        "lambda0 = {}, {} roots, {} branches",
        report.lambda0,
        report.roots.len(),
        report.branches.len()
    );
    Ok(())
}

// -------------------------------------------------------------- blowup-demo

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlowupConfig {
    command: Option<String>,
    spec_version: Option<u32>,
    /// Equation `u_t = e^{i theta}[Lap u + |u|^{s1}u - nu |u|^{s2}u] + k u`.
    theta: f64,
    nu: f64,
    k: f64,
    sigma1: f64,
    sigma2: f64,
    /// Initial data `amplitude * sin(pi (x - x0)/L)` on the interval.
    amplitude: f64,
    grid: Grid,
    dt: f64,
    t_end: f64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        BlowupConfig {
            command: None,
            spec_version: None,
            theta: 0.0,
            nu: 0.0,
            k: 0.0,
            sigma1: 2.0,
            sigma2: 4.0,
            amplitude: 6.0,
            grid: Grid::Interval {
                x0: 0.0,
                x1: 1.0,
                n: 129,
            },
            dt: 1e-4,
            t_end: 1.0,
        }
    }
}

#[derive(Args, Clone)]
struct BlowupCli {
    #[command(flatten)]
    common: CommonCli,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Serialize)]
struct BlowupReport {
    spec_version: u32,
    energy: f64,
    hypotheses_hold: bool,
    outcome: RunOutcome,
    blowup_time: Option<f64>,
}

fn run_blowup(args: BlowupCli) -> anyhow::Result<()> {
    let mut cfg: BlowupConfig = load_config(&args.common.config)?;
    check_meta(&cfg.command, &cfg.spec_version, "blowup-demo")?;
    for (slot, v) in [
        (&mut cfg.theta, args.theta),
        (&mut cfg.nu, args.nu),
        (&mut cfg.k, args.k),
        (&mut cfg.sigma1, args.sigma1),
        (&mut cfg.sigma2, args.sigma2),
        (&mut cfg.amplitude, args.amplitude),
        (&mut cfg.dt, args.dt),
        (&mut cfg.t_end, args.t_end),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    let grid = cfg.grid;
    let basis = eigenbasis(grid, BoundaryCondition::Dirichlet, 1)?;
    let raw = basis.mode_field(0);
    let peak = raw.sup_norm();
    let u0 = raw.scale(C64::new(cfg.amplitude / peak, 0.0));
    let e = blowup_energy(&u0, cfg.theta, cfg.nu, cfg.sigma1, cfg.sigma2)?;

    let (ct, st) = (cfg.theta.cos(), cfg.theta.sin());
    let params = ParamSet {
        a: ct,
        alpha: st,
        b: ct,
        beta: st,
        c: cfg.nu * ct,
        gamma: cfg.nu * st,
        k: cfg.k,
        sigma1: cfg.sigma1,
        sigma2: cfg.sigma2,
    };
    let integ = Integrator::new(
        grid,
        BoundaryCondition::Dirichlet,
        params,
        Scheme::EigenbasisExponential,
    )?;
    let solver = SolverConfig {
        diag_stride: 100,
        ..SolverConfig::new(cfg.dt, cfg.t_end, Scheme::EigenbasisExponential)
    };
    let (_, log, outcome) = integ.run(&u0, &solver)?;
    let csv = create_out_file(&args.common.out, "blowup_diagnostics.csv")?;
    log.write_csv(csv)?;
    let blowup_time = match &outcome {
        RunOutcome::BlowUp { time } => Some(*time),
        _ => None,
    };
    let report = BlowupReport {
        spec_version: SPEC_VERSION,
        energy: e.energy,
        hypotheses_hold: e.hypotheses_hold,
        outcome: outcome.clone(),
        blowup_time,
    };
    write_json(&args.common.out, "blowup.json", &report)?;
    match blowup_time {
        Some(t) => println!("E(u0) = {:.6}, blow-up at t = {t}", e.energy),
        None => println!("E(u0) = {:.6}, no blow-up before t = {}", e.energy, cfg.t_end),
    }
    Ok(())
}
