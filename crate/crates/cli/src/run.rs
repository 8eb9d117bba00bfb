//! Command orchestration and exit-status policy.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hammerstein::certificate::{certify, l_function_curve, ConvergenceCertificate};
use hammerstein::oracle::{ode_reference, volterra_reference};
use hammerstein::problem::{check_assumptions, AssumptionReport, ProblemInstance, SamplingPlan, SourceSpec, Threshold};
use hammerstein::solver::{solve, uniqueness_probe_with, Solution, SolveOptions};
use hammerstein::space::GridFunction;
use hammerstein::{Error, Execution};
use serde_json::json;

use crate::config::{self, Built, Config, FieldData, PerPoint, SourceConfig};
use crate::output::{self, CertificateView, ErrorView, InstanceEcho, ProbeView, ReportView, SolutionView, Summary, Timing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Check,
    Solve,
    Certify,
    Probe,
    CompareOracle,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Solve => "solve",
            Command::Certify => "certify",
            Command::Probe => "probe",
            Command::CompareOracle => "compare-oracle",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    pub force: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    AssumptionFailure,
    CertificateFailure,
    NotConverged,
    ConfigError,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::AssumptionFailure | Outcome::CertificateFailure => 1,
            Outcome::NotConverged => 2,
            Outcome::ConfigError => 3,
        }
    }

    fn status(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::AssumptionFailure => "assumption_failure",
            Outcome::CertificateFailure => "certificate_failure",
            Outcome::NotConverged => "not_converged",
            Outcome::ConfigError => "config_error",
        }
    }

    /// Keeps the most severe of two outcomes; config errors dominate.
    fn worst(self, other: Outcome) -> Outcome {
        let rank = |o: Outcome| match o {
            Outcome::Pass => 0,
            Outcome::NotConverged => 1,
            Outcome::CertificateFailure => 2,
            Outcome::AssumptionFailure => 3,
            Outcome::ConfigError => 4,
        };
        if rank(other) > rank(self) { other } else { self }
    }
}

fn classify(e: &Error) -> (Outcome, &'static str) {
    match e {
        Error::AssumptionsFailed(_) | Error::NoRoot { .. } | Error::InvalidGenerator { .. } => (Outcome::AssumptionFailure, "assumption"),
        Error::CertificateFailure(_) | Error::OracleFailure(_) | Error::InvalidIterate { .. } => (Outcome::CertificateFailure, "certificate"),
        Error::ProbeInconclusive(_) => (Outcome::NotConverged, "convergence"),
        _ => (Outcome::ConfigError, "config"),
    }
}

struct Ctx<'a> {
    args: &'a RunArgs,
    summary: Summary,
    outcome: Outcome,
}

impl Ctx<'_> {
    fn fail(&mut self, outcome: Outcome, kind: &'static str, message: impl Into<String>) {
        self.outcome = self.outcome.worst(outcome);
        self.summary.errors.push(ErrorView { kind, message: message.into() });
    }

    fn library_error(&mut self, e: &Error) {
        let (outcome, kind) = classify(e);
        if let Error::AssumptionsFailed(r) = e {
            self.summary.assumptions = Some(ReportView::from(r.as_ref()));
        }
        self.fail(outcome, kind, e.to_string());
    }

    fn timed<T>(&mut self, phase: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.summary.timings.push(Timing { phase, seconds: start.elapsed().as_secs_f64() });
        out
    }

    fn io(&mut self, r: std::io::Result<()>) {
        if let Err(e) = r {
            self.fail(Outcome::ConfigError, "io", e.to_string());
        }
    }
}

/// Runs one command; always tries to leave a `summary.json` in `args.out`.
pub fn run(args: &RunArgs) -> i32 {
    let mut ctx = Ctx {
        args,
        summary: Summary { command: args.command.name().into(), seed: args.seed, forced: args.force, ..Default::default() },
        outcome: Outcome::Pass,
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return Outcome::ConfigError.exit_code();
    }
    match config::load(&args.config) {
        Ok(cfg) => {
            ctx.summary.config = output::config_value(&cfg);
            execute(&mut ctx, &cfg);
        }
        Err(e) => ctx.fail(Outcome::ConfigError, "config", e.to_string()),
    }
    let outcome = ctx.outcome;
    ctx.summary.status = outcome.status();
    ctx.summary.exit_code = outcome.exit_code();
    if let Err(e) = output::write_summary(&args.out, &ctx.summary) {
        eprintln!("error: cannot write summary: {e}");
        return Outcome::ConfigError.exit_code();
    }
    for e in &ctx.summary.errors {
        eprintln!("{}: {}", e.kind, e.message);
    }
    println!("{} {}: {}", args.command.name(), args.config.display(), outcome.status());
    outcome.exit_code()
}

fn execute(ctx: &mut Ctx, cfg: &Config) {
    let built = ctx.timed("build", || cfg.build());
    let problem = match built {
        Ok(Built::Problem(p)) => p,
        Ok(Built::Rejected(report)) => {
            ctx.summary.assumptions = Some(ReportView::from(&report));
            ctx.fail(Outcome::AssumptionFailure, "assumption", format!("failing entries: {}", report.failing_names().join(", ")));
            return;
        }
        Err(e) => {
            ctx.fail(Outcome::ConfigError, "config", e.to_string());
            return;
        }
    };
    ctx.summary.instance = Some(InstanceEcho::new(&problem));

    let plan = SamplingPlan::with_seed(ctx.args.seed);
    let report = ctx.timed("check", || check_assumptions(&problem, &plan));
    ctx.summary.assumptions = Some(ReportView::from(&report));

    if ctx.args.command == Command::Check {
        if !report.pass() {
            ctx.fail(Outcome::AssumptionFailure, "assumption", format!("failing entries: {}", report.failing_names().join(", ")));
        }
        return;
    }

    let wants_certificate = ctx.args.command == Command::Certify || (ctx.args.command == Command::Solve && cfg.certificate.enabled);
    if !gate(ctx, &report, wants_certificate) {
        return;
    }

    match ctx.args.command {
        Command::Check => unreachable!(),
        Command::Solve | Command::Certify => run_solve(ctx, cfg, &problem, &plan, wants_certificate),
        Command::Probe => run_probe(ctx, cfg, &problem),
        Command::CompareOracle => run_oracle(ctx, cfg, &problem, &plan),
    }
}

/// Existence entries gate every solve; rate entries gate certificates.
/// `--force` turns either gate into a warning.
fn gate(ctx: &mut Ctx, report: &AssumptionReport, wants_certificate: bool) -> bool {
    let failing = report.failing_names().join(", ");
    let blocked = !report.existence_pass() || (wants_certificate && !report.pass());
    if !blocked {
        if !report.pass() {
            ctx.summary.warnings.push(format!("rate assumptions fail ({failing}); no certificate applies"));
        }
        return true;
    }
    if ctx.args.force {
        ctx.summary.warnings.push(format!("--force: continuing past failing entries ({failing})"));
        return true;
    }
    ctx.fail(Outcome::AssumptionFailure, "assumption", format!("failing entries: {failing}"));
    false
}

fn solve_options(cfg: &Config, plan: &SamplingPlan, force: bool, record: bool) -> SolveOptions {
    SolveOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        start: cfg.solver.start(),
        force,
        record_iterates: record,
        execution: Execution::default(),
        sampling: plan.clone(),
    }
}

fn solve_step(ctx: &mut Ctx, problem: &ProblemInstance, opts: &SolveOptions) -> Option<Solution> {
    match ctx.timed("solve", || solve(problem, opts)) {
        Ok(s) => {
            ctx.summary.solution = Some(SolutionView::from(&s));
            let r = output::write_solution(&ctx.args.out, problem, &s.u);
            ctx.io(r);
            if !s.converged {
                ctx.fail(Outcome::NotConverged, "convergence", format!("no convergence to {:e} in {} iterations", opts.tol, s.iterations));
            }
            Some(s)
        }
        Err(e) => {
            ctx.library_error(&e);
            None
        }
    }
}

fn run_solve(ctx: &mut Ctx, cfg: &Config, problem: &ProblemInstance, plan: &SamplingPlan, wants_certificate: bool) {
    let opts = solve_options(cfg, plan, ctx.args.force, wants_certificate);
    let Some(solution) = solve_step(ctx, problem, &opts) else { return };
    if !wants_certificate {
        return;
    }
    let terms = cfg.certificate.terms.max(1);
    let cert = match ctx.timed("certify", || certify(problem, cfg.certificate.epsilon(), terms)) {
        Ok(c) => c,
        Err(e) => {
            ctx.library_error(&e);
            return;
        }
    };
    emit_certificate(ctx, problem, &solution, &cert);
}

fn emit_certificate(ctx: &mut Ctx, problem: &ProblemInstance, solution: &Solution, cert: &ConvergenceCertificate) {
    // measured gaps only mean something for the upper start at convergence
    let gaps = (solution.converged && solution.start == "upper").then(|| solution.distances_to_final());
    let view = CertificateView::new(cert, gaps.as_deref().map(|g| &g[..g.len().min(cert.table.len())]));
    if view.bound_holds == Some(false) {
        ctx.fail(Outcome::CertificateFailure, "certificate", format!("measured gap exceeds C·kᵐ by {:e}", view.worst_excess.unwrap_or(f64::NAN)));
    }
    if cert.degraded {
        ctx.summary.warnings.push(format!("certificate is degraded: σ = {:e}", cert.sigma));
    }
    ctx.summary.certificate = Some(view);
    let r = output::write_convergence(&ctx.args.out, gaps.as_deref().unwrap_or(&[]), cert);
    ctx.io(r);
    if let Threshold::Xi(xi) = cert.threshold {
        let horizon = problem.grid().horizon().max(problem.source().t0());
        match l_function_curve(problem, xi, horizon, 200) {
            Ok(samples) => {
                let r = output::write_lfunction(&ctx.args.out, &samples);
                ctx.io(r);
            }
            Err(e) => ctx.library_error(&e),
        }
    }
}

fn run_probe(ctx: &mut Ctx, cfg: &Config, problem: &ProblemInstance) {
    let force = ctx.args.force;
    match ctx.timed("probe", || uniqueness_probe_with(problem, cfg.solver.tol, cfg.solver.max_iter, force)) {
        Ok(r) => {
            let r2 = output::write_solution(&ctx.args.out, problem, &r.upper.u);
            ctx.io(r2);
            if !r.pass {
                ctx.fail(
                    Outcome::CertificateFailure,
                    "uniqueness",
                    format!("upper and lower limits differ by {:e} (order violation {:e})", r.gap, r.order_violation),
                );
            }
            ctx.summary.probe = Some(ProbeView::from(&r));
        }
        Err(e) => ctx.library_error(&e),
    }
}

/// Initial data and forcing of the linear system whose mild solution is `g`.
fn ode_data(cfg: &Config, problem: &ProblemInstance, nodes: usize) -> Option<(Vec<f64>, GridFunction)> {
    let q = problem.kernel().effective_generator()?;
    let n = problem.points();
    match (&cfg.source, problem.source_spec()) {
        (SourceConfig::Constant { value }, SourceSpec::Constant(_)) => {
            // g ≡ c: u₀ = c, f = c·(row sums of the effective generator)
            let f = GridFunction::from_fn(n, nodes, |x, _| value * q.row(x).sum());
            Some((vec![*value; n], f))
        }
        (SourceConfig::Duhamel { u0, f }, _) => {
            let u0 = match u0 {
                PerPoint::Scalar(v) => vec![*v; n],
                PerPoint::Array(v) => v.clone(),
            };
            let f = match f {
                FieldData::Scalar(v) => GridFunction::constant(n, nodes, *v),
                FieldData::Table(rows) => {
                    let g = GridFunction::from_rows(rows).ok()?;
                    (g.nodes() == nodes).then_some(g)?
                }
            };
            Some((u0, f))
        }
        _ => None,
    }
}

fn ode_gap(cfg: &Config, problem: &ProblemInstance, u: &GridFunction) -> Option<Result<f64, Error>> {
    let (u0, f) = ode_data(cfg, problem, problem.nodes())?;
    let q = problem.kernel().effective_generator()?;
    Some(
        ode_reference(&q, &u0, &f, problem.weight(), problem.nonlinearity(), problem.grid(), cfg.oracle.substeps)
            .map(|r| u.sup_distance(&r)),
    )
}

fn run_oracle(ctx: &mut Ctx, cfg: &Config, problem: &ProblemInstance, plan: &SamplingPlan) {
    let opts = solve_options(cfg, plan, ctx.args.force, false);
    let Some(solution) = solve_step(ctx, problem, &opts) else { return };
    let tolerance = cfg.oracle.tolerance;
    let mut report = serde_json::Map::new();
    report.insert("tolerance".into(), json!(tolerance));
    let mut any = false;

    match ctx.timed("ode_reference", || ode_gap(cfg, problem, &solution.u)) {
        Some(Ok(gap)) => {
            any = true;
            let refined = problem.refined(2).ok().and_then(|fine| {
                let s = solve(&fine, &opts).ok()?;
                ode_gap(cfg, &fine, &s.u)?.ok()
            });
            report.insert(
                "ode".into(),
                json!({ "gap": gap, "gap_half_step": refined, "ratio": refined.map(|r| gap / r), "pass": gap <= tolerance }),
            );
            if gap.is_nan() || gap > tolerance {
                ctx.fail(Outcome::CertificateFailure, "oracle", format!("solver and RK4 reference differ by {gap:e}"));
            }
        }
        Some(Err(e)) => ctx.library_error(&e),
        None => {
            report.insert("ode".into(), json!({ "skipped": "needs a matrix kernel and a constant or Duhamel source" }));
        }
    }

    if problem.points() <= 4 {
        any = true;
        let refinement = cfg.oracle.refinement;
        match ctx.timed("volterra_reference", || volterra_reference(problem, refinement, cfg.solver.tol.max(1e-13), cfg.solver.max_iter)) {
            Ok(r) => {
                let gap = solution.u.sup_distance(&r);
                report.insert("volterra".into(), json!({ "refinement": refinement, "gap": gap, "pass": gap <= tolerance }));
                if gap.is_nan() || gap > tolerance {
                    ctx.fail(Outcome::CertificateFailure, "oracle", format!("solver and refined Volterra reference differ by {gap:e}"));
                }
            }
            Err(e) => ctx.library_error(&e),
        }
    } else {
        report.insert("volterra".into(), json!({ "skipped": "more than 4 points" }));
    }
    ctx.summary.oracle = Some(serde_json::Value::Object(report));
    if !any {
        ctx.fail(Outcome::ConfigError, "config", "no oracle applies to this instance");
    }
}

/// Default output directory next to the config file.
pub fn default_out(config: &Path) -> PathBuf {
    let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    config.with_file_name(format!("{stem}.out"))
}
