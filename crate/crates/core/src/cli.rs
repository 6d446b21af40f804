//! Command-line surface: `run`, `analytic`, `sweep` and `check`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analytic1d::{self, Bar1DParams, Layer1DQuery};
use crate::config::{section_of, EvolutionConfig};
use crate::error::{Error, Result};
use crate::evolution::{run_evolution, EvolutionOutcome};
use crate::fem::{solve_displacement, BoundaryCondition, FeSpace};
use crate::mesh::{Field, Mesh};
use crate::output::write_outcome;
use crate::params::{LoadProgram, MaterialInputs, MaterialParams};
use crate::solvers::{box_kkt_residual, solve_box_qp};
use crate::sparse::{CsrMatrix, SparseSpd};
use crate::staggered::{IrreversibilityMode, Staggered, StaggeredOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NONCONVERGED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "craquelure", version, about = "Phase-field craquelure simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one evolution and write trace.csv, events.csv and VTK snapshots.
    Run {
        config: PathBuf,
        /// Overrides `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print closed-form 1D predictions.
    Analytic(AnalyticArgs),
    /// Run independent evolutions over values of one config key.
    Sweep {
        config: PathBuf,
        /// `key=a,b,c`, key optionally prefixed by its section (`material.beta`).
        #[arg(long)]
        vary: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Check,
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    #[arg(long = "L")]
    half_length: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long = "Gc", default_value_t = 1.0)]
    gc: f64,
    #[arg(long = "m-max", default_value_t = 10)]
    m_max: usize,
    #[arg(long, requires = "lstar")]
    xstar: Option<f64>,
    #[arg(long = "Lstar", requires = "xstar")]
    lstar: Option<f64>,
}

/// Entry point; `argv[0]` is the program name.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Analytic(args) => cmd_analytic(&args),
        Command::Sweep { config, vary, out } => cmd_sweep(&config, &vary, out),
        Command::Check => cmd_check(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence { .. } => EXIT_NONCONVERGED,
        _ => EXIT_INVALID,
    }
}

pub fn load_config(path: &Path) -> Result<EvolutionConfig> {
    EvolutionConfig::parse(&std::fs::read_to_string(path)?)
}

/// Runs `cfg` and writes its outputs into `dir`.
pub fn run_to_dir(cfg: &EvolutionConfig, dir: &Path) -> Result<EvolutionOutcome> {
    let solver = cfg.solver()?;
    let outcome = run_evolution(&solver, &cfg.evolution_options(), |_, _, _| {})?;
    write_outcome(dir, solver.space(), solver.params(), &outcome)?;
    Ok(outcome)
}

fn nonconverged_steps(outcome: &EvolutionOutcome) -> Vec<f64> {
    outcome
        .trace
        .steps
        .iter()
        .filter(|s| !s.converged || s.solver_failures > 0)
        .map(|s| s.t)
        .collect()
}

fn cmd_run(path: &Path, out: Option<PathBuf>) -> Result<i32> {
    let cfg = load_config(path)?;
    let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
    let outcome = run_to_dir(&cfg, &dir)?;
    for e in &outcome.trace.events {
        println!("t={:.4} cracks={} centers={:?}", e.t, e.crack_count, e.centers);
    }
    println!("wrote {}", dir.display());
    let bad = nonconverged_steps(&outcome);
    if bad.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("staggered iteration did not converge at t = {bad:?}");
        Ok(EXIT_NONCONVERGED)
    }
}

fn cmd_analytic(a: &AnalyticArgs) -> Result<i32> {
    let p = Bar1DParams::new(a.half_length, a.mu, a.beta, a.gc)?;
    let l = a.half_length;
    println!("kappa = {:.10}", analytic1d::decay_rate(&p));
    println!("F_hat(L) = {:.10}", analytic1d::f_hat(l, &p));
    println!("Delta2(L) = {:.10}", analytic1d::delta2(l, &p));
    println!("m  t_m");
    for m in 1..=a.m_max.max(1) {
        println!("{m:<2} {:.10}", analytic1d::critical_time(l, m, &p)?);
    }
    let halving = analytic1d::halving_times(l, 5, &p)?;
    println!("halving times (L, L/2, ..., L/16):");
    for (k, t) in halving.iter().enumerate() {
        println!("  L/{:<2} {t:.10}", 1u32 << k);
    }
    if let (Some(xs), Some(ls)) = (a.xstar, a.lstar) {
        let q = Layer1DQuery::new(xs, ls)?;
        let x = analytic1d::layer_point(&q, l, &p)?;
        println!("layer point x = {x:.10}  (L - x = {:.10})", l - x);
        println!("layer width b = {:.10}", analytic1d::layer_width(&q, &p));
    }
    Ok(EXIT_OK)
}

/// Splits `key=a,b,c` into the owning section, key and values.
pub fn parse_vary(spec: &str) -> Result<(String, String, Vec<String>)> {
    let bad = |m: String| Error::param("vary", m);
    let (key, values) = spec.split_once('=').ok_or_else(|| bad(format!("expected key=a,b,c, got `{spec}`")))?;
    let (section, key) = match key.split_once('.') {
        Some((s, k)) => (s.to_string(), k.to_string()),
        None => (
            section_of(key).ok_or_else(|| bad(format!("unknown key `{key}`")))?.to_string(),
            key.to_string(),
        ),
    };
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(bad("no values given".into()));
    }
    Ok((section, key, values))
}

/// One config per value of the varied key, validated.
pub fn sweep_configs(base: &EvolutionConfig, spec: &str) -> Result<Vec<(String, EvolutionConfig)>> {
    let (section, key, values) = parse_vary(spec)?;
    values
        .into_iter()
        .map(|value| {
            let mut cfg = base.clone();
            cfg.set(&section, &key, &value).map_err(|m| Error::param("vary", m))?;
            cfg.validate()?;
            Ok((format!("{key}={value}"), cfg))
        })
        .collect()
}

fn cmd_sweep(path: &Path, vary: &str, out: Option<PathBuf>) -> Result<i32> {
    let base = load_config(path)?;
    let root = out.unwrap_or_else(|| base.output.dir.clone());
    let runs = sweep_configs(&base, vary)?;
    let results: Vec<(String, Result<EvolutionOutcome>)> = runs
        .par_iter()
        .map(|(label, cfg)| (label.clone(), run_to_dir(cfg, &root.join(label))))
        .collect();
    let mut code = EXIT_OK;
    println!("run,first_event_t,final_cracks,nonconverged_steps");
    for (label, result) in results {
        match result {
            Ok(outcome) => {
                let first = outcome.trace.first_event().map_or(f64::NAN, |e| e.t);
                let last = outcome.trace.steps.last().map_or(0, |s| s.crack_count);
                let bad = nonconverged_steps(&outcome).len();
                if bad > 0 {
                    code = code.max(EXIT_NONCONVERGED);
                }
                println!("{label},{first},{last},{bad}");
            }
            Err(e) => {
                eprintln!("{label}: {e}");
                code = code.max(exit_code(&e));
            }
        }
    }
    Ok(code)
}

/// Quick self-test of the numerics; each check returns a failure message.
pub fn builtin_checks() -> Vec<(&'static str, std::result::Result<(), String>)> {
    let checks: Vec<(&'static str, fn() -> std::result::Result<(), String>)> = vec![
        ("analytic: t_m increasing", check_critical_times),
        ("analytic: F_hat matches quadrature", check_f_hat),
        ("fem: 1D solve matches closed form", check_fem_1d),
        ("qp: KKT on a bounded system", check_qp),
        ("staggered: zero load is a fixed point", check_zero_load),
        ("config: round-trip", check_config),
    ];
    checks.into_iter().map(|(name, f)| (name, f())).collect()
}

fn cmd_check() -> Result<i32> {
    let mut failed = 0;
    for (name, result) in builtin_checks() {
        match result {
            Ok(()) => println!("PASS {name}"),
            Err(m) => {
                failed += 1;
                println!("FAIL {name}: {m}");
            }
        }
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_INVALID })
}

fn check_critical_times() -> std::result::Result<(), String> {
    for l in [6.5, 12.5] {
        let p = Bar1DParams::reference(l);
        let ts: Vec<f64> = (1..=10)
            .map(|m| analytic1d::critical_time(l, m, &p))
            .collect::<Result<_>>()
            .map_err(|e| e.to_string())?;
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(format!("not increasing at L={l}: {ts:?}"));
        }
    }
    Ok(())
}

fn check_f_hat() -> std::result::Result<(), String> {
    let l = 6.5;
    let p = Bar1DParams::reference(l);
    let n = 20_000;
    let h = 2.0 * l / n as f64;
    let f = |x: f64| {
        let u = analytic1d::u_continuous(1.0, x, &p) - x;
        let du = analytic1d::strain_continuous(x, &p);
        0.5 * p.mu * du * du + p.beta * u * u
    };
    let simpson: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(-l + i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    let exact = analytic1d::f_hat(l, &p);
    if (simpson - exact).abs() > 1e-6 * exact {
        return Err(format!("closed form {exact}, quadrature {simpson}"));
    }
    Ok(())
}

fn check_fem_1d() -> std::result::Result<(), String> {
    let l = 3.0;
    let p = MaterialParams::default();
    let bar = Bar1DParams::new(l, p.young(), p.adhesion(), p.toughness()).map_err(|e| e.to_string())?;
    let space = FeSpace::new(Mesh::interval(l, 300).map_err(|e| e.to_string())?);
    let v = Field::constant(space.mesh(), 1, 1.0);
    let load = LoadProgram::uniaxial(1.0, 1.0);
    let u = solve_displacement(&space, &v, 1.0, &p, &load, BoundaryCondition::Neumann, 1e-12).map_err(|e| e.to_string())?;
    let err = space
        .mesh()
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(x, ui)| (ui - analytic1d::u_continuous(1.0, x[0], &bar)).abs())
        .fold(0.0, f64::max);
    if err > 1e-3 {
        return Err(format!("max nodal error {err:e}"));
    }
    Ok(())
}

fn check_qp() -> std::result::Result<(), String> {
    let n = 6;
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        dense[i * n + i] = 2.5;
        if i + 1 < n {
            dense[i * n + i + 1] = -1.0;
            dense[(i + 1) * n + i] = -1.0;
        }
    }
    let system = SparseSpd {
        matrix: CsrMatrix::from_dense(n, &dense),
        rhs: (0..n).map(|i| if i % 2 == 0 { 3.0 } else { -2.0 }).collect(),
    };
    let lower = vec![0.0; n];
    let upper = vec![1.0; n];
    let (x, _) = solve_box_qp(&system, &lower, &upper, 1e-12, 1000).map_err(|e| e.to_string())?;
    let r = box_kkt_residual(&system, &x, &lower, &upper);
    if r > 1e-10 {
        return Err(format!("KKT residual {r:e}"));
    }
    Ok(())
}

fn check_zero_load() -> std::result::Result<(), String> {
    let mesh = Mesh::rectangle(1.0, 0.5, 8, 4).map_err(|e| e.to_string())?;
    let solver = Staggered::new(
        FeSpace::new(mesh),
        MaterialParams::new(MaterialInputs::default()).map_err(|e| e.to_string())?,
        LoadProgram::affine([[0.0; 2]; 2], 1.0, 0.5),
        BoundaryCondition::Neumann,
        StaggeredOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let mesh = solver.space().mesh();
    let u0 = Field::constant(mesh, 2, 0.0);
    let v0 = Field::constant(mesh, 1, 1.0);
    let (u, v, report) = solver.step(0.5, &u0, &v0, IrreversibilityMode::PerStep).map_err(|e| e.to_string())?;
    if !report.converged || u.values().iter().any(|x| x.abs() > 1e-14) || v.values().iter().any(|x| (x - 1.0).abs() > 1e-12) {
        return Err(format!("moved away from rest after {} iterations", report.iterations));
    }
    Ok(())
}

fn check_config() -> std::result::Result<(), String> {
    let cfg = EvolutionConfig::default();
    let back = EvolutionConfig::parse(&cfg.serialize()).map_err(|e| e.to_string())?;
    if back != cfg {
        return Err("parse(serialize(cfg)) differs".into());
    }
    Ok(())
}
