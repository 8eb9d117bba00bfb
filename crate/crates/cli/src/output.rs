//! Run artifacts: `summary.json` and the plot-ready CSV files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hammerstein::certificate::{ConvergenceCertificate, Factors};
use hammerstein::problem::{AssumptionEntry, AssumptionReport, ProblemInstance};
use hammerstein::solver::{Solution, UniquenessReport};
use hammerstein::space::GridFunction;
use serde::Serialize;
use serde_json::Value;

use crate::config::Config;

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Default, Serialize)]
pub struct Summary {
    pub command: String,
    pub status: &'static str,
    pub exit_code: i32,
    pub seed: u64,
    pub forced: bool,
    pub config: Option<Value>,
    pub instance: Option<InstanceEcho>,
    pub assumptions: Option<ReportView>,
    pub solution: Option<SolutionView>,
    pub certificate: Option<CertificateView>,
    pub probe: Option<ProbeView>,
    pub oracle: Option<Value>,
    pub timings: Vec<Timing>,
    pub warnings: Vec<String>,
    pub errors: Vec<ErrorView>,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub phase: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct ErrorView {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct InstanceEcho {
    pub regime: &'static str,
    pub space: String,
    pub kernel: String,
    pub nonlinearity: String,
    pub weight: String,
    pub points: usize,
    pub nodes: usize,
    pub dt: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub beta: f64,
    pub beta0: f64,
    pub t0: f64,
}

impl InstanceEcho {
    pub fn new(p: &ProblemInstance) -> Self {
        Self {
            regime: p.regime().as_str(),
            space: p.space().label().to_string(),
            kernel: p.kernel().label(),
            nonlinearity: p.nonlinearity().label().to_string(),
            weight: p.weight().label(),
            points: p.points(),
            nodes: p.nodes(),
            dt: p.grid().dt(),
            lambda_minus: p.kernel().lambda_minus(),
            lambda_plus: p.kernel().lambda_plus(),
            beta: p.source().beta(),
            beta0: p.source().beta0(),
            t0: p.source().t0(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EntryView {
    pub name: &'static str,
    pub scope: &'static str,
    pub sampled: bool,
    pub pass: bool,
    pub worst_violation: f64,
    pub witness: Option<String>,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct ReportView {
    pub regime: &'static str,
    pub pass: bool,
    pub existence_pass: bool,
    pub failing: Vec<&'static str>,
    pub entries: Vec<EntryView>,
}

impl From<&AssumptionEntry> for EntryView {
    fn from(e: &AssumptionEntry) -> Self {
        Self {
            name: e.name,
            scope: match e.scope {
                hammerstein::problem::Scope::Existence => "existence",
                hammerstein::problem::Scope::Rate => "rate",
            },
            sampled: e.sampled,
            pass: e.pass,
            worst_violation: e.worst_violation,
            witness: e.witness.clone(),
            detail: e.detail.clone(),
        }
    }
}

impl From<&AssumptionReport> for ReportView {
    fn from(r: &AssumptionReport) -> Self {
        Self {
            regime: r.regime.as_str(),
            pass: r.pass(),
            existence_pass: r.existence_pass(),
            failing: r.failing_names(),
            entries: r.entries.iter().map(EntryView::from).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IterationRow {
    pub m: usize,
    pub step: f64,
}

#[derive(Debug, Serialize)]
pub struct SolutionView {
    pub start: &'static str,
    pub threshold: Option<(&'static str, f64)>,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub monotonicity_violation: Option<f64>,
    pub monotone: bool,
    pub forced: bool,
    pub min: f64,
    pub max: f64,
    pub iteration_table: Vec<IterationRow>,
}

impl From<&Solution> for SolutionView {
    fn from(s: &Solution) -> Self {
        Self {
            start: s.start,
            threshold: s.threshold.map(|t| (t.name(), t.value())),
            iterations: s.iterations,
            converged: s.converged,
            residual: s.residual,
            monotonicity_violation: s.monotonicity_violation,
            monotone: s.monotone(),
            forced: s.forced,
            min: s.u.min(),
            max: s.u.max(),
            iteration_table: s.history.iter().enumerate().map(|(m, &step)| IterationRow { m, step }).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CertificateView {
    pub regime: &'static str,
    pub threshold: (&'static str, f64),
    pub beta: f64,
    pub beta0: f64,
    pub t0: f64,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub sigma_star: Option<f64>,
    pub sigma_sharp: Option<f64>,
    pub sigma_hash: Option<f64>,
    pub sigma: f64,
    pub epsilon: f64,
    pub k: f64,
    pub c: f64,
    pub degraded: bool,
    /// Largest `measured − bound` over the table; non-positive when the bound holds.
    pub worst_excess: Option<f64>,
    pub bound_holds: Option<bool>,
}

impl CertificateView {
    pub fn new(c: &ConvergenceCertificate, gaps: Option<&[f64]>) -> Self {
        let (mut s1, mut s2, mut ss, mut sh, mut sx) = (None, None, None, None, None);
        match c.factors {
            Factors::Stochastic { sigma1, sigma2, sigma_star } => (s1, s2, ss) = (Some(sigma1), Some(sigma2), Some(sigma_star)),
            Factors::Substochastic { sigma_sharp, sigma_hash } => (sh, sx) = (Some(sigma_sharp), Some(sigma_hash)),
        }
        let worst = gaps.map(|g| {
            g.iter().enumerate().map(|(m, d)| d - c.error_bound(m)).fold(f64::NEG_INFINITY, f64::max)
        });
        Self {
            regime: c.regime.as_str(),
            threshold: (c.threshold.name(), c.threshold.value()),
            beta: c.beta,
            beta0: c.beta0,
            t0: c.t0,
            sigma1: s1,
            sigma2: s2,
            sigma_star: ss,
            sigma_sharp: sh,
            sigma_hash: sx,
            sigma: c.sigma,
            epsilon: c.epsilon,
            k: c.k,
            c: c.c,
            degraded: c.degraded,
            worst_excess: worst,
            bound_holds: worst.map(|w| w <= 0.0),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ProbeView {
    pub gap: f64,
    pub order_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub upper: SolutionView,
    pub lower: SolutionView,
}

impl From<&UniquenessReport> for ProbeView {
    fn from(r: &UniquenessReport) -> Self {
        Self {
            gap: r.gap,
            order_violation: r.order_violation,
            tolerance: r.tolerance,
            pass: r.pass,
            upper: SolutionView::from(&r.upper),
            lower: SolutionView::from(&r.lower),
        }
    }
}

pub fn config_value(c: &Config) -> Option<Value> {
    serde_json::to_value(c).ok()
}

pub fn write_summary(dir: &Path, s: &Summary) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, s)?;
    writeln!(w)?;
    w.flush()
}

pub fn write_solution(dir: &Path, p: &ProblemInstance, u: &GridFunction) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(dir.join("solution.csv"))?);
    let two_d = p.space().geometry().is_some_and(|g| g.dim == 2);
    if two_d {
        writeln!(w, "point_index,x_coord,y_coord,t,u")?;
    } else {
        writeln!(w, "point_index,x_coord,t,u")?;
    }
    for x in 0..u.points() {
        let c = p.space().coord(x);
        for (j, t) in p.grid().nodes().enumerate() {
            if two_d {
                writeln!(w, "{x},{},{},{},{}", num(c[0]), num(c[1]), num(t), num(u.get(x, j)))?;
            } else {
                writeln!(w, "{x},{},{},{}", num(c[0]), num(t), num(u.get(x, j)))?;
            }
        }
    }
    w.flush()
}

/// `m, sup(u_{m+1} − u_final), C·kᵐ`; the gap column is empty past the last iterate.
pub fn write_convergence(dir: &Path, gaps: &[f64], cert: &ConvergenceCertificate) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(dir.join("convergence.csv"))?);
    writeln!(w, "m,measured_gap,bound")?;
    for (m, bound) in cert.table.iter().enumerate() {
        let gap = gaps.get(m).map(|g| num(*g)).unwrap_or_default();
        writeln!(w, "{m},{gap},{}", num(*bound))?;
    }
    w.flush()
}

pub fn write_lfunction(dir: &Path, samples: &[(f64, f64)]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(dir.join("lfunction.csv"))?);
    writeln!(w, "t,L")?;
    for (t, l) in samples {
        writeln!(w, "{},{}", num(*t), num(*l))?;
    }
    w.flush()
}
