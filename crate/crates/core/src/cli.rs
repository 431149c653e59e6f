//! Command-line front end. Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 numerical failure.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{check_alpha, check_positive, RunConfig};
use crate::error::{Error, Result};
use crate::lmi::{feasibility_report, mu_and_tau, recover_gains, unbar_certificate, Formulation, SynthesisSolution};
use crate::lyapunov::lyapunov_series;
use crate::matrixcore::{Matrix, SYNTHESIS_MARGIN};
use crate::model::{generate_dwell_switching, SwitchPattern, SwitchedModel};
use crate::simulator::{simulate, EnergySeries, GridExtents};
use crate::synthesis::{certify, solve, sweep, FeasibilityProblem, SolveOutcome, DEFAULT_MARGIN, SWEEP_GRID};

const PAPER_REFERENCE: &str = include_str!("../data/paper_reference.json");

#[derive(Debug, Parser)]
#[command(name = "roesser", version, about = "Synthesis and verification for switched 2D Roesser systems with delays and actuator faults")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the synthesis inequalities and write the solution and solver trace.
    Synth(SynthArgs),
    /// Check a solution against the synthesis inequalities.
    Verify(VerifyArgs),
    /// Simulate open or closed loop and write trajectory and energy CSVs.
    Simulate(SimulateArgs),
    /// Consolidated certificate: synthesis margins, closed-loop analysis, μ and τ_a*.
    Certify(CertifyArgs),
    /// Run the bundled two-mode example end to end.
    ExamplePaper(ExampleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormulationArg {
    TimeVarying,
    ConstantDelay,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::TimeVarying => Formulation::TimeVarying,
            FormulationArg::ConstantDelay => Formulation::ConstantDelay,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[arg(long = "eps", default_value_t = 0.1)]
    pub epsilon: f64,
    /// Try every δ, ε pair from {0.05, 0.1, 0.2, 0.5, 1} instead of the given values.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, value_enum, default_value = "time-varying")]
    pub formulation: FormulationArg,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value = "solution.json")]
    pub out: PathBuf,
    /// Trace CSV; defaults to the solution path with a `.trace.csv` suffix.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = SYNTHESIS_MARGIN)]
    pub margin: f64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Closed loop with the solution's gains; open loop when absent.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long = "tau", default_value_t = 7.5)]
    pub tau_a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub n0: f64,
    #[arg(long, default_value_t = 40)]
    pub imax: i64,
    #[arg(long, default_value_t = 40)]
    pub jmax: i64,
    /// Replace delays, uncertainty and faults by a seeded random admissible realization.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "trajectory.csv")]
    pub traj: PathBuf,
    #[arg(long, default_value = "energy.csv")]
    pub energy: PathBuf,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// Model file; the bundled example when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "paper_out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    pub alpha: f64,
    /// α values tried in order when the requested α is infeasible.
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.95, 0.97, 0.975, 0.98, 0.985, 0.99, 0.995])]
    pub fallback: Vec<f64>,
    /// Only check the printed gains, μ and τ_a*; skip synthesis.
    #[arg(long)]
    pub verify_printed: bool,
}

/// Run a parsed command; Ok carries the exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Certify(a) => certify_cmd(a),
        Command::ExamplePaper(a) => example_paper(a),
    }
}

/// Parse `args` and run; errors are printed and mapped to their exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn load_solution(path: &Path) -> Result<SynthesisSolution> {
    SynthesisSolution::load(path).map_err(|e| match e {
        Error::Config { path: p, reason } => Error::config(format!("{}: {p}", path.display()), reason),
        other => other,
    })
}

fn check_solution_shape(s: &SynthesisSolution, m: &SwitchedModel) -> Result<()> {
    s.validate(m.dims.n1, m.dims.n2, m.dims.nu, m.n_modes())
}

fn default_trace_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".trace.csv");
    PathBuf::from(p)
}

fn synth(a: SynthArgs) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    check_alpha(a.alpha)?;
    check_positive("delta", a.delta)?;
    check_positive("eps", a.epsilon)?;
    let mut problem = FeasibilityProblem::new(cfg.model.clone(), a.alpha, a.delta, a.epsilon)?.with_formulation(a.formulation.into())?;
    problem.margin = a.margin;
    problem.max_iters = a.max_iters;
    let trace_path = a.trace.clone().unwrap_or_else(|| default_trace_path(&a.out));
    let outcome: SolveOutcome = if a.sweep {
        let r = sweep(&problem, &SWEEP_GRID, &SWEEP_GRID);
        let best_t = r.best_t();
        match r.into_best() {
            Some((d, e, o)) => {
                println!("sweep: chose delta = {d}, eps = {e}");
                o
            }
            None => {
                println!("sweep: no (delta, eps) pair feasible; best worst eigenvalue {best_t:e}");
                return Err(Error::Infeasible {
                    reason: crate::error::InfeasibleReason::Converged,
                    best_t,
                    iterations: 0,
                });
            }
        }
    } else {
        solve(&problem)?
    };
    outcome.trace.save_csv(&trace_path)?;
    println!("trace written to {}", trace_path.display());
    let solution = outcome.require()?;
    solution.save(&a.out)?;
    println!("solution written to {}", a.out.display());
    if let (Some(mu), Some(ts)) = (solution.mu, solution.tau_star) {
        println!("mu = {mu:.6}, tau_a* = {ts:.6}");
    }
    for (k, m) in solution.modes.iter().enumerate() {
        if let Some(g) = &m.gain {
            println!("K{} = {:?}", k + 1, g.to_rows());
        }
    }
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    let s = load_solution(&a.solution)?;
    check_solution_shape(&s, &cfg.model)?;
    let r = feasibility_report(&s, &cfg.model, a.margin)?;
    println!("margin {:e}; Z condition {:.3e} ({})", r.margin, r.z_condition, if r.z_ok { "ok" } else { "FAIL" });
    for m in &r.modes {
        println!("mode {}: {}", m.mode, if m.pass { "pass" } else { "FAIL" });
        for b in &m.blocks {
            println!(
                "  {:<8} {:?}  min {:+.6e}  max {:+.6e}  {}",
                b.name,
                b.kind,
                b.report.lambda_min,
                b.report.lambda_max,
                if b.report.holds { "ok" } else { "FAIL" }
            );
        }
    }
    println!("overall: {}", if r.pass { "pass" } else { "FAIL" });
    if let Some(p) = &a.report {
        write_json(p, &r)?;
    }
    Ok(if r.pass { 0 } else { 1 })
}

fn solution_gains(s: &SynthesisSolution) -> Result<Vec<Matrix>> {
    match s.modes.iter().map(|m| m.gain.clone()).collect::<Option<Vec<_>>>() {
        Some(g) => Ok(g),
        None => recover_gains(s),
    }
}

fn simulate_cmd(a: SimulateArgs) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    check_positive("tau", a.tau_a)?;
    if a.imax < 1 || a.jmax < 1 {
        return Err(Error::config("imax/jmax", "grid extents must be positive"));
    }
    let model = match a.seed {
        Some(seed) => cfg.model.random_scenario(seed)?,
        None => cfg.model.clone(),
    };
    let ext = GridExtents::new(a.imax, a.jmax);
    let switching = generate_dwell_switching(model.n_modes(), a.tau_a, a.n0, ext.max_diagonal(), &SwitchPattern::RoundRobin)?;
    let solution = a.solution.as_deref().map(load_solution).transpose()?;
    let gains = match &solution {
        Some(s) => {
            check_solution_shape(s, &model)?;
            Some(solution_gains(s)?)
        }
        None => None,
    };
    let grid = simulate(&model, &switching, gains.as_deref(), ext)?;
    let mut series = EnergySeries::from_grid(&grid);
    if let Some(s) = &solution {
        let cert = unbar_certificate(s, &model.delay_bounds())?;
        series.lyapunov = Some(lyapunov_series(&cert, &grid)?);
    }
    grid.write_trajectory_csv(BufWriter::new(File::create(&a.traj)?))?;
    series.write_csv(BufWriter::new(File::create(&a.energy)?))?;
    println!("switch instants {:?}", switching.instants);
    println!(
        "energy at D = 0: {:.6e}; at D = {}: {:.6e}",
        series.at(0),
        series.d_max(),
        series.at(series.d_max())
    );
    println!("wrote {} and {}", a.traj.display(), a.energy.display());
    Ok(0)
}

fn certify_cmd(a: CertifyArgs) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    let s = load_solution(&a.solution)?;
    check_solution_shape(&s, &cfg.model)?;
    let r = certify(&s, &cfg.model)?;
    println!(
        "synthesis inequalities: {} (worst slack {:+.3e})",
        if r.feasibility.pass { "pass" } else { "FAIL" },
        r.feasibility.worst_slack()
    );
    match &r.analysis_error {
        Some(e) => println!("closed-loop analysis: FAIL ({e})"),
        None => println!(
            "closed-loop analysis: {} ({} realizations, worst lambda_max(Phi) {:+.3e})",
            if r.analysis_pass() { "pass" } else { "FAIL" },
            r.analysis.len(),
            r.worst_phi()
        ),
    }
    match (r.mu, r.tau_star) {
        (Some(mu), Some(ts)) => println!("mu = {mu:.6}, tau_a* = {ts:.6}"),
        _ => println!("mu: undefined (barred matrices not positive definite)"),
    }
    println!("overall: {}", if r.pass { "pass" } else { "FAIL" });
    if let Some(p) = &a.report {
        write_json(p, &r)?;
    }
    Ok(if r.pass { 0 } else { 1 })
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct Reference {
    #[serde(rename = "K")]
    gains: Vec<Matrix>,
    mu: f64,
    tau_star: f64,
    alpha: f64,
    tau_a: f64,
}

#[derive(Debug, Serialize)]
struct SynthesisSummary {
    requested_alpha: f64,
    requested_feasible: bool,
    requested_best_t: f64,
    used_alpha: Option<f64>,
    delta: Option<f64>,
    epsilon: Option<f64>,
    best_t: Option<f64>,
    gains: Option<Vec<Matrix>>,
    mu: Option<f64>,
    tau_star: Option<f64>,
    certify_pass: Option<bool>,
    attempts: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
struct PaperSummary {
    printed_gains: Vec<Matrix>,
    reference_gains: Vec<Matrix>,
    gain_max_abs_deviation: f64,
    printed_mu: f64,
    printed_tau_star: f64,
    reference_mu: f64,
    reference_tau_star: f64,
    reference_mu_tau_star: f64,
    printed_worst_slack: f64,
    synthesis: Option<SynthesisSummary>,
}

fn example_paper(a: ExampleArgs) -> Result<i32> {
    let cfg = RunConfig::load_or_bundled(a.config.as_deref())?;
    let model = cfg.model;
    check_alpha(a.alpha)?;
    for &f in &a.fallback {
        check_alpha(f)?;
    }
    std::fs::create_dir_all(&a.out_dir)?;
    let reference: Reference = serde_json::from_str(PAPER_REFERENCE)?;
    let printed = SynthesisSolution::paper_printed();
    check_solution_shape(&printed, &model)?;
    let printed_gains = recover_gains(&printed)?;
    let dev = printed_gains
        .iter()
        .zip(&reference.gains)
        .map(|(k, r)| k.max_abs_diff(r))
        .fold(0.0, f64::max);
    let (pmu, pts) = mu_and_tau(&printed, reference.alpha)?;
    let printed_report = feasibility_report(&printed, &model, SYNTHESIS_MARGIN)?;

    let mut text = String::new();
    writeln!(text, "gain comparison (printed Upsilon, Z against printed K)").ok();
    for (k, (g, r)) in printed_gains.iter().zip(&reference.gains).enumerate() {
        writeln!(text, "  K{}: computed {:?}  printed {:?}  max|diff| {:.2e}", k + 1, g.to_rows(), r.to_rows(), g.max_abs_diff(r)).ok();
    }
    writeln!(text, "  max-abs deviation {dev:.3e} ({})", if dev <= 5e-4 { "within 5e-4" } else { "EXCEEDS 5e-4" }).ok();
    writeln!(text, "mu from printed matrices {pmu:.4} (stored {}), tau_a* {pts:.4} (stored {})", reference.mu, reference.tau_star).ok();
    writeln!(text, "tau_a* for the stored mu: {:.4}", crate::lmi::tau_star(reference.mu, reference.alpha)).ok();
    writeln!(text, "printed matrices against the synthesis inequalities: worst slack {:+.4e}", printed_report.worst_slack()).ok();

    let ext = GridExtents::new(40, 40);
    let switching = generate_dwell_switching(model.n_modes(), reference.tau_a, 1.0, ext.max_diagonal(), &SwitchPattern::RoundRobin)?;
    let grid = simulate(&model, &switching, Some(&printed_gains), ext)?;
    let series = EnergySeries::from_grid(&grid);
    grid.write_trajectory_csv(BufWriter::new(File::create(a.out_dir.join("printed_trajectory.csv"))?))?;
    series.write_csv(BufWriter::new(File::create(a.out_dir.join("printed_energy.csv"))?))?;
    writeln!(text, "closed loop with printed gains, tau_a = {}: energy {:.4e} at D = 0, {:.4e} at D = {}", reference.tau_a, series.at(0), series.at(series.d_max()), series.d_max()).ok();

    let synthesis = if a.verify_printed {
        None
    } else {
        Some(example_synthesis(&model, &a, &mut text)?)
    };

    let summary = PaperSummary {
        printed_gains,
        reference_gains: reference.gains.clone(),
        gain_max_abs_deviation: dev,
        printed_mu: pmu,
        printed_tau_star: pts,
        reference_mu: reference.mu,
        reference_tau_star: reference.tau_star,
        reference_mu_tau_star: crate::lmi::tau_star(reference.mu, reference.alpha),
        printed_worst_slack: printed_report.worst_slack(),
        synthesis,
    };
    write_json(&a.out_dir.join("summary.json"), &summary)?;
    std::fs::write(a.out_dir.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(if dev <= 5e-4 { 0 } else { 1 })
}

fn example_synthesis(model: &SwitchedModel, a: &ExampleArgs, text: &mut String) -> Result<SynthesisSummary> {
    let requested = solve(&FeasibilityProblem::new(model.clone(), a.alpha, 0.2, 0.1)?)?;
    writeln!(text, "synthesis at alpha = {}, delta = 0.2, eps = 0.1: {}", a.alpha, describe(&requested)).ok();
    let mut summary = SynthesisSummary {
        requested_alpha: a.alpha,
        requested_feasible: requested.solution.is_some(),
        requested_best_t: requested.best_t,
        used_alpha: None,
        delta: None,
        epsilon: None,
        best_t: None,
        gains: None,
        mu: None,
        tau_star: None,
        certify_pass: None,
        attempts: Vec::new(),
    };
    let chosen = match requested.solution {
        Some(s) => Some((a.alpha, 0.2, 0.1, requested.best_t, s)),
        None => {
            let mut found = None;
            for &alpha in &a.fallback {
                let r = sweep(&FeasibilityProblem::new(model.clone(), alpha, 0.2, 0.1)?, &SWEEP_GRID, &SWEEP_GRID);
                summary.attempts.push((alpha, r.best_t()));
                writeln!(text, "  fallback alpha = {alpha}: best worst eigenvalue over the delta/eps grid {:+.4e}", r.best_t()).ok();
                if let Some((d, e, o)) = r.into_best() {
                    let t = o.best_t;
                    found = o.solution.map(|s| (alpha, d, e, t, s));
                    break;
                }
            }
            found
        }
    };
    if let Some((alpha, d, e, t, s)) = chosen {
        let report = certify(&s, model)?;
        let ts = s.tau_star.unwrap_or(0.0);
        writeln!(text, "synthesized at alpha = {alpha}, delta = {d}, eps = {e}: worst eigenvalue {t:+.4e}, mu {:.4}, tau_a* {ts:.4}, certify {}", s.mu.unwrap_or(f64::NAN), if report.pass { "pass" } else { "FAIL" }).ok();
        let gains = solution_gains(&s)?;
        for (k, g) in gains.iter().enumerate() {
            writeln!(text, "  K{} = {:?}", k + 1, g.to_rows()).ok();
        }
        s.save(&a.out_dir.join("solution.json"))?;
        let ext = GridExtents::new(40, 40);
        let tau = (ts + 0.3).max(7.5);
        let switching = generate_dwell_switching(model.n_modes(), tau, 1.0, ext.max_diagonal(), &SwitchPattern::RoundRobin)?;
        let grid = simulate(model, &switching, Some(&gains), ext)?;
        let mut series = EnergySeries::from_grid(&grid);
        series.lyapunov = Some(lyapunov_series(&unbar_certificate(&s, &model.delay_bounds())?, &grid)?);
        grid.write_trajectory_csv(BufWriter::new(File::create(a.out_dir.join("trajectory.csv"))?))?;
        series.write_csv(BufWriter::new(File::create(a.out_dir.join("energy.csv"))?))?;
        summary.used_alpha = Some(alpha);
        summary.delta = Some(d);
        summary.epsilon = Some(e);
        summary.best_t = Some(t);
        summary.gains = Some(gains);
        summary.mu = s.mu;
        summary.tau_star = s.tau_star;
        summary.certify_pass = Some(report.pass);
    } else {
        writeln!(text, "no fallback alpha was feasible").ok();
    }
    Ok(summary)
}

fn describe(o: &SolveOutcome) -> String {
    match (&o.solution, o.trace.infeasible) {
        (Some(_), _) => format!("feasible, worst eigenvalue {:+.4e}", o.best_t),
        (None, Some(why)) => format!("infeasible ({why}), best worst eigenvalue {:+.4e}, lower bound {:+.4e}", o.best_t, o.trace.lower_bound),
        (None, None) => format!("infeasible, best worst eigenvalue {:+.4e}", o.best_t),
    }
}
