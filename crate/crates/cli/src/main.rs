use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nls_core::diagnostics::regime::{RegimeQuery, RegimeReport};
use nls_core::diagnostics::{discrete_bourgain_norm, regime_check, QuadraturePolicy, Taper};
use nls_core::harness::plan::OutputPaths;
use nls_core::harness::{
    run_convergence, run_local_error, ConvergenceReport, ExperimentPlan, LocalErrorPlan,
    LocalErrorReport,
};
use nls_core::integrators::step_count;
use nls_core::io::{self, SpectralFormat};
use nls_core::{
    evolve, rough_data, DealiasPolicy, Error, NonlinearSign, Result, RoughDataSpec,
    SpectralField, StepperConfig, TorusGrid,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "nls", version, about = "Filtered Lie splitting for the periodic cubic NLS")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "NLS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one initial state and write the final spectral state.
    Solve(SolveArgs),
    /// Global L² convergence study from a plan file.
    Converge(ConvergeArgs),
    /// One-step defect study from a plan file.
    LocalError(LocalErrorArgs),
    /// Discrete Bourgain norm of a sequence file.
    BourgainNorm(BourgainArgs),
    /// Report the admissible parameter regime for (d, s0[, b0]).
    RegimeCheck(RegimeArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    dim: Option<usize>,
    /// Points per axis.
    #[arg(long)]
    n: Option<usize>,
    /// Sobolev exponent of random rough data.
    #[arg(long, conflicts_with = "init_file", required_unless_present = "init_file")]
    s: Option<f64>,
    /// Initial spectral state (JSON or binary dump).
    #[arg(long)]
    init_file: Option<PathBuf>,
    #[arg(long)]
    tau: f64,
    /// Final time.
    #[arg(long = "T", visible_alias = "t-final")]
    t_final: f64,
    /// Sign of the cubic term, +1 or -1.
    #[arg(long, allow_hyphen_values = true, default_value = "-1")]
    mu: NonlinearSign,
    /// Use the filtered scheme.
    #[arg(long)]
    filtered: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// L² norm of the random initial data.
    #[arg(long, default_value_t = nls_core::initial::DEFAULT_L2_TARGET)]
    l2: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// strict, warn or off.
    #[arg(long, default_value = "strict")]
    dealias: DealiasPolicy,
    /// Final state file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or bin.
    #[arg(long, default_value = "json")]
    format: SpectralFormat,
    /// Print the run summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportOutputs {
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Print the resolved plan and exit without running or writing.
    #[arg(long)]
    dry_run: bool,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConvergeArgs {
    /// TOML plan file.
    #[arg(long, required_unless_present = "preset")]
    plan: Option<PathBuf>,
    /// Built-in plan: desk-1d or desk-3d.
    #[arg(long, conflicts_with = "plan")]
    preset: Option<String>,
    /// Also run the reference at half its step.
    #[arg(long)]
    check_reference: bool,
    #[command(flatten)]
    out: ReportOutputs,
}

#[derive(Args)]
struct LocalErrorArgs {
    /// TOML plan file (default: the built-in desk plan).
    #[arg(long)]
    plan: Option<PathBuf>,
    #[command(flatten)]
    out: ReportOutputs,
}

#[derive(Args)]
struct BourgainArgs {
    /// Sequence file (`nls-sequence-v1` JSON).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    /// Number of σ nodes (default 2M).
    #[arg(long)]
    sigma_samples: Option<usize>,
    /// Accept as few as M nodes.
    #[arg(long)]
    relaxed: bool,
    /// none or hann.
    #[arg(long, default_value = "none")]
    taper: Taper,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RegimeArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, allow_hyphen_values = true)]
    s0: f64,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Converge(a) => converge(a),
        Command::LocalError(a) => local_error(a),
        Command::BourgainNorm(a) => bourgain(a),
        Command::RegimeCheck(a) => regime(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_CONFIG })
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("outputs serialize"));
}

#[derive(Serialize)]
struct SolveSummary {
    schema: &'static str,
    grid: TorusGrid,
    tau: f64,
    t_final: f64,
    mu: NonlinearSign,
    filtered: bool,
    seed: Option<u64>,
    steps: u64,
    /// ‖u0‖ before projection.
    mass_initial: f64,
    /// ‖u_0‖ after projection, the start of the run.
    mass_start: f64,
    mass_end: f64,
    max_mass_increase: f64,
    out: Option<PathBuf>,
}

fn initial_state(a: &SolveArgs) -> Result<(SpectralField, Option<u64>)> {
    if let Some(path) = &a.init_file {
        let f = io::read_spectral(path)?;
        let g = f.grid();
        if a.dim.is_some_and(|d| d != g.dim()) || a.n.is_some_and(|n| n != g.n_per_axis()) {
            return Err(Error::config(format!(
                "--dim/--n disagree with {} (d = {}, N = {})",
                path.display(),
                g.dim(),
                g.n_per_axis()
            )));
        }
        return Ok((f, None));
    }
    let (Some(dim), Some(n)) = (a.dim, a.n) else {
        return Err(Error::config("--dim and --n are required with --s"));
    };
    let s = a.s.expect("clap requires --s without --init-file");
    let spec = RoughDataSpec::new(TorusGrid::new(dim, n)?, s, a.seed)
        .with_eps(a.eps)
        .with_target_l2(a.l2);
    Ok((rough_data(&spec)?, Some(a.seed)))
}

fn solve(a: SolveArgs) -> Result<()> {
    let (u0, seed) = initial_state(&a)?;
    let grid = *u0.grid();
    let cfg = StepperConfig::new(grid, a.tau, a.mu, a.filtered).with_dealias(a.dealias);
    cfg.validate()?;
    let steps = step_count(a.t_final, a.tau)?;
    let traj = evolve(&u0, &cfg, steps, steps.max(1))?;
    let last = &traj.last().field;
    if let Some(path) = &a.out {
        io::write_spectral(path, last, a.format)?;
    }
    let summary = SolveSummary {
        schema: "nls-solve-summary/1",
        grid,
        tau: a.tau,
        t_final: a.t_final,
        mu: a.mu,
        filtered: a.filtered,
        seed,
        steps,
        mass_initial: u0.l2_norm(),
        mass_start: traj.masses[0],
        mass_end: *traj.masses.last().expect("masses include the start"),
        max_mass_increase: traj.max_mass_increase(),
        out: a.out.clone(),
    };
    if a.json {
        print_json(&summary);
    } else {
        println!("steps       {}", summary.steps);
        println!("mass_start  {:.16e}", summary.mass_start);
        println!("mass_end    {:.16e}", summary.mass_end);
        if let Some(p) = &summary.out {
            println!("state       {}", p.display());
        }
    }
    Ok(())
}

fn parse_seeds(list: &str) -> Result<Vec<u64>> {
    list.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::config(format!("invalid seed {t:?} in --seeds")))
        })
        .collect()
}

/// Applies the shared command-line overrides to a plan's seeds and outputs.
fn apply_overrides(o: &ReportOutputs, seeds: &mut Vec<u64>, output: &mut OutputPaths) -> Result<()> {
    if let Some(list) = &o.seeds {
        *seeds = parse_seeds(list)?;
    }
    if o.out_json.is_some() {
        output.json.clone_from(&o.out_json);
    }
    if o.out_csv.is_some() {
        output.csv.clone_from(&o.out_csv);
    }
    Ok(())
}

fn write_outputs(output: &OutputPaths, json: impl FnOnce() -> String, csv: impl FnOnce() -> String) -> Result<()> {
    let write = |path: &Path, text: String| -> Result<()> {
        fs::write(path, text)?;
        log::info!("wrote {}", path.display());
        Ok(())
    };
    if let Some(p) = &output.json {
        write(p, json())?;
    }
    if let Some(p) = &output.csv {
        write(p, csv())?;
    }
    Ok(())
}

fn slope_text(slope: Option<f64>) -> String {
    slope.map_or_else(|| "degenerate".into(), |v| format!("{v:.4}"))
}

fn converge(a: ConvergeArgs) -> Result<()> {
    let mut plan = match (&a.plan, a.preset.as_deref()) {
        (Some(path), _) => ExperimentPlan::from_file(path)?,
        (None, Some("desk-1d")) => ExperimentPlan::desk_1d(),
        (None, Some("desk-3d")) => ExperimentPlan::desk_3d(),
        (None, other) => {
            return Err(Error::config(format!(
                "unknown preset {:?} (expected desk-1d or desk-3d)",
                other.unwrap_or_default()
            )))
        }
    };
    apply_overrides(&a.out, &mut plan.seeds, &mut plan.output)?;
    plan.check_reference |= a.check_reference;
    plan.validate()?;
    if a.out.dry_run {
        print!("{}", plan.to_toml());
        return Ok(());
    }
    let report = run_convergence(&plan)?;
    write_outputs(&plan.output, || report.to_json(), || report.to_csv())?;
    if a.out.json {
        println!("{}", report.to_json());
    } else {
        print_convergence(&report);
    }
    Ok(())
}

fn print_convergence(r: &ConvergenceReport) {
    println!("s\tseed\tslope\ttheory\tregime");
    for c in &r.curves {
        let regime = match (c.regime.admissible, c.regime.case) {
            (true, Some(k)) => format!("admissible, case {k}"),
            (true, None) => "admissible".into(),
            (false, _) => "inadmissible".into(),
        };
        let limited = c
            .reference
            .check
            .as_ref()
            .is_some_and(|k| k.reference_limited);
        println!(
            "{}\t{}\t{}\t{}\t{regime}{}",
            c.s,
            c.seed,
            slope_text(c.fit.map(|f| f.slope)),
            c.theoretical_slope,
            if limited { ", reference-limited" } else { "" }
        );
    }
}

fn local_error(a: LocalErrorArgs) -> Result<()> {
    let mut plan = match &a.plan {
        Some(path) => LocalErrorPlan::from_file(path)?,
        None => LocalErrorPlan::desk_1d(),
    };
    apply_overrides(&a.out, &mut plan.seeds, &mut plan.output)?;
    plan.validate()?;
    if a.out.dry_run {
        print!("{}", plan.to_toml());
        return Ok(());
    }
    let report = run_local_error(&plan)?;
    write_outputs(&plan.output, || report.to_json(), || report.to_csv())?;
    if a.out.json {
        println!("{}", report.to_json());
    } else {
        print_local_error(&report);
    }
    Ok(())
}

fn print_local_error(r: &LocalErrorReport) {
    println!("s\tseed\tslope\ttheory ({} proxy)", r.norm);
    for c in &r.curves {
        println!(
            "{}\t{}\t{}\t{}",
            c.s,
            c.seed,
            slope_text(c.fit.map(|f| f.slope)),
            c.theoretical_slope
        );
    }
}

#[derive(Serialize)]
struct BourgainOutput {
    schema: &'static str,
    grid: TorusGrid,
    tau: f64,
    fields: usize,
    s: f64,
    b: f64,
    sigma_samples: usize,
    policy: QuadraturePolicy,
    taper: Taper,
    norm: f64,
}

fn bourgain(a: BourgainArgs) -> Result<()> {
    let seq = io::read_sequence(&a.input)?.with_taper(a.taper);
    let sigma_samples = a.sigma_samples.unwrap_or(2 * seq.len());
    let policy = if a.relaxed {
        QuadraturePolicy::Relaxed
    } else {
        QuadraturePolicy::Exact
    };
    let norm = discrete_bourgain_norm(&seq, a.s, a.b, sigma_samples, policy)?;
    if a.json {
        print_json(&BourgainOutput {
            schema: "nls-bourgain-norm/1",
            grid: *seq.grid(),
            tau: seq.tau(),
            fields: seq.len(),
            s: a.s,
            b: a.b,
            sigma_samples,
            policy,
            taper: a.taper,
            norm,
        });
    } else {
        println!("{norm:.16e}");
    }
    Ok(())
}

#[derive(Serialize)]
struct RegimeOutput {
    schema: &'static str,
    #[serde(flatten)]
    report: RegimeReport,
}

fn regime(a: RegimeArgs) -> Result<()> {
    let report = regime_check(&RegimeQuery {
        dim: a.dim,
        s0: a.s0,
        b0: a.b0,
    })?;
    if a.json {
        print_json(&RegimeOutput {
            schema: "nls-regime-check/1",
            report,
        });
        return Ok(());
    }
    let c = &report.s0_condition;
    println!("d = {}, s0 = {}", report.dim, report.s0);
    if report.admissible {
        println!("admissible: {} < s0 <= {}", c.lower, c.upper);
        println!("b0 ∈ ({}, {})", report.b0_interval.lo, report.b0_interval.hi);
    } else if !c.above_lower {
        println!("inadmissible: s0 must exceed {}", c.lower);
    } else {
        println!("inadmissible: s0 must not exceed {}", c.upper);
    }
    if let (Some(b0), Some(ok)) = (report.b0, report.b0_admissible) {
        let verdict = if ok { "inside" } else { "outside" };
        println!("b0 = {b0} is {verdict} the interval, b1 = 1 - b0 = {}", 1.0 - b0);
    }
    if let Some(iv) = report.case_interval() {
        println!("case {}: s0 ∈ {iv}", report.case.expect("interval implies case"));
    }
    let row = &report.table_row;
    println!(
        "Hölder pair (p, q) = ({}, {}), crude pair (p, q) = ({}, {})",
        row.holder.p, row.holder.q, row.crude.p, row.crude.q
    );
    Ok(())
}
