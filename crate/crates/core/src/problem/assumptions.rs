//! Sampling checkers for every hypothesis the existence and rate results
//! rest on. Failures are report entries, never errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::weight::ratio_limit_at_zero;
use super::ProblemInstance;
use crate::error::Error;
use crate::exec::Execution;
use crate::kernel::Regime;

pub const KERNEL_NONNEGATIVE: &str = "kernel_nonnegative";
pub const KERNEL_MASS_SANDWICH: &str = "kernel_mass_sandwich";
pub const G_ZERO_AT_ORIGIN: &str = "g_zero_at_origin";
pub const G_STRICTLY_INCREASING: &str = "g_strictly_increasing";
pub const G_CONCAVE: &str = "g_concave";
pub const PHI_VALID: &str = "phi_valid";
pub const SUBHOMOGENEITY: &str = "subhomogeneity";
pub const ENVELOPE_BOUNDS: &str = "envelope_bounds";
pub const ENVELOPES_DISTINCT: &str = "envelopes_distinct";
pub const P2_NORMALIZED: &str = "p2_normalized";
pub const ENVELOPE_RATIO_LIMIT: &str = "envelope_ratio_limit";
pub const SOURCE_NONNEGATIVE: &str = "source_nonnegative";
pub const SOURCE_BOUNDED: &str = "source_bounded";
pub const SOURCE_POSITIVE_FLOOR: &str = "source_positive_floor";
pub const THRESHOLD_EXISTS: &str = "threshold_exists";
pub const DECAY_RATE_POSITIVE: &str = "decay_rate_positive";
pub const WEIGHT_BOUNDED: &str = "weight_bounded";
pub const WEIGHT_FLOOR_POSITIVE: &str = "weight_floor_positive";

/// Which result an entry is a hypothesis of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Needed for existence and the monotone iteration.
    Existence,
    /// Needed only for the geometric rate certificate.
    Rate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionEntry {
    pub name: &'static str,
    pub scope: Scope,
    /// `false` when the check is exact (analytic or a single evaluation).
    pub sampled: bool,
    pub pass: bool,
    /// Largest observed violation; 0 when none.
    pub worst_violation: f64,
    pub witness: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub regime: Regime,
    pub entries: Vec<AssumptionEntry>,
}

impl AssumptionReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn existence_pass(&self) -> bool {
        self.entries.iter().filter(|e| e.scope == Scope::Existence).all(|e| e.pass)
    }

    pub fn failing_names(&self) -> Vec<&'static str> {
        self.entries.iter().filter(|e| !e.pass).map(|e| e.name).collect()
    }

    pub fn entry(&self, name: &str) -> Option<&AssumptionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Report for a generator that was rejected before a kernel could exist.
    pub fn generator_rejected(regime: Regime, error: &Error) -> Self {
        Self {
            regime,
            entries: vec![AssumptionEntry {
                name: KERNEL_NONNEGATIVE,
                scope: Scope::Existence,
                sampled: false,
                pass: false,
                worst_violation: match error {
                    Error::InvalidGenerator { value, .. } => *value,
                    _ => f64::NAN,
                },
                witness: match error {
                    Error::InvalidGenerator { row, col, .. } => Some(format!("generator[{row}][{col}]")),
                    _ => None,
                },
                detail: error.to_string(),
            }],
        }
    }
}

/// Sample density controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    /// Points of the uniform `u` grid.
    pub u_samples: usize,
    /// Points of the uniform `σ` grid on `[0, 1]`.
    pub sigma_samples: usize,
    /// Extra random pairs for the midpoint concavity tests.
    pub random_pairs: usize,
    /// Cap on grid times used for kernel and envelope sampling.
    pub time_samples: usize,
    /// Cap on points used for kernel sampling.
    pub point_samples: usize,
    pub seed: u64,
    pub mass_tolerance: f64,
    /// Relative tolerance for inequalities on `G`, `φ` and `h`.
    pub tolerance: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            u_samples: 64,
            sigma_samples: 32,
            random_pairs: 256,
            time_samples: 48,
            point_samples: 64,
            seed: 0,
            mass_tolerance: 1e-8,
            tolerance: 1e-12,
        }
    }
}

impl SamplingPlan {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

struct Builder {
    entries: Vec<AssumptionEntry>,
}

impl Builder {
    fn push(&mut self, name: &'static str, scope: Scope, sampled: bool, violation: f64, witness: Option<String>, detail: String) {
        let pass = violation.is_finite() && violation <= 0.0;
        self.entries.push(AssumptionEntry {
            name,
            scope,
            sampled,
            pass,
            worst_violation: if violation.is_nan() { f64::INFINITY } else { violation.max(0.0) },
            witness,
            detail,
        });
    }

    fn fail(&mut self, name: &'static str, scope: Scope, detail: impl Into<String>) {
        self.push(name, scope, false, f64::INFINITY, None, detail.into());
    }
}

/// Tracks the largest violation of a family of sampled inequalities.
struct Worst {
    excess: f64,
    witness: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Self { excess: f64::NEG_INFINITY, witness: None }
    }

    fn see(&mut self, excess: f64, witness: impl FnOnce() -> String) {
        if excess > self.excess || excess.is_nan() {
            self.excess = if excess.is_nan() { f64::INFINITY } else { excess };
            self.witness = Some(witness());
        }
    }

    /// Violation beyond the tolerance already folded into `excess`.
    fn violation(&self) -> f64 {
        self.excess.max(0.0)
    }

    fn witness_if_failing(&self) -> Option<String> {
        if self.excess > 0.0 {
            self.witness.clone()
        } else {
            None
        }
    }
}

fn evenly(count: usize, cap: usize) -> Vec<usize> {
    if count <= cap {
        (0..count).collect()
    } else {
        let mut v: Vec<usize> = (0..cap).map(|i| i * (count - 1) / (cap - 1)).collect();
        v.dedup();
        v
    }
}

/// Runs every checker relevant to the problem's regime.
pub fn check_assumptions(problem: &ProblemInstance, plan: &SamplingPlan) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut b = Builder { entries: Vec::new() };
    let regime = problem.regime();
    let grid = problem.grid();
    let tol = plan.tolerance;

    let mut times: Vec<f64> = evenly(grid.steps(), plan.time_samples).into_iter().map(|j| grid.node(j + 1)).collect();
    times.extend((0..4).map(|_| rng.random_range(0.0..1.0) * grid.horizon()).filter(|t| *t > 0.0));
    let points = evenly(problem.points(), plan.point_samples);

    // kernel
    let mass = problem.kernel().verify_bounds(&points, &times, plan.mass_tolerance);
    b.push(
        KERNEL_NONNEGATIVE,
        Scope::Existence,
        true,
        -mass.min_density - plan.mass_tolerance,
        None,
        format!("min sampled density {:e}", mass.min_density),
    );
    let mass_violation = mass.worst_lower_violation.max(mass.worst_upper_violation);
    let mass_witness = mass
        .samples
        .iter()
        .max_by(|a, b| {
            let va = (a.lower - a.mass).max(a.mass - a.upper);
            let vb = (b.lower - b.mass).max(b.mass - b.upper);
            va.total_cmp(&vb)
        })
        .map(|s| format!("x={}, t={}, mass={}", s.point, s.t, s.mass));
    b.push(
        KERNEL_MASS_SANDWICH,
        Scope::Existence,
        true,
        mass_violation - plan.mass_tolerance,
        if mass_violation > plan.mass_tolerance { mass_witness } else { None },
        format!(
            "declared λ₋ = {}, λ₊ = {}; worst violation {:e}",
            problem.kernel().lambda_minus(),
            problem.kernel().lambda_plus(),
            mass_violation
        ),
    );
    if regime == Regime::Substochastic {
        let lm = problem.kernel().lambda_minus();
        b.push(
            DECAY_RATE_POSITIVE,
            Scope::Existence,
            false,
            if lm > 0.0 { 0.0 } else { f64::INFINITY },
            None,
            format!("λ₋ = {lm}"),
        );
    }

    // source
    let source = problem.source();
    let gmin = source.values().min();
    b.push(SOURCE_NONNEGATIVE, Scope::Existence, true, -gmin - tol, None, format!("min g = {gmin}"));
    let beta = source.beta();
    b.push(
        SOURCE_BOUNDED,
        Scope::Existence,
        true,
        if beta.is_finite() { 0.0 } else { f64::INFINITY },
        None,
        format!("β = {beta}"),
    );
    let beta0 = source.beta0();
    b.push(
        SOURCE_POSITIVE_FLOOR,
        Scope::Rate,
        true,
        if beta0 > 0.0 { 0.0 } else { f64::INFINITY },
        None,
        format!("β₀ = {beta0} on [0, {}]", source.t0()),
    );

    // threshold
    let threshold = problem.threshold();
    let upper = match &threshold {
        Ok(t) => {
            b.push(THRESHOLD_EXISTS, Scope::Existence, false, 0.0, None, format!("{} = {}", t.name(), t.value()));
            t.value()
        }
        Err(e) => {
            b.fail(THRESHOLD_EXISTS, Scope::Existence, e.to_string());
            beta + 1.0
        }
    };

    check_nonlinearity(&mut b, problem, plan, upper, &mut rng);

    // weight
    let weight = problem.weight();
    match regime {
        Regime::Stochastic => match (weight.p1(), weight.p2()) {
            (Some(p1), Some(p2)) => {
                let mut env = Worst::new();
                let mut distinct = 0.0f64;
                let mut ts = times.clone();
                ts.push(0.0);
                for &t in &ts {
                    let (lo, hi) = (p1.eval(t), p2.eval(t));
                    distinct = distinct.max(hi - lo);
                    for x in 0..problem.points() {
                        let h = weight.eval(x, t);
                        let scale = tol * (1.0 + hi.abs());
                        env.see((lo - h).max(h - hi) - scale, || format!("x={x}, t={t}"));
                    }
                }
                b.push(
                    ENVELOPE_BOUNDS,
                    Scope::Existence,
                    true,
                    env.violation(),
                    env.witness_if_failing(),
                    format!("p1 = {}, p2 = {}", p1.label(), p2.label()),
                );
                b.push(
                    ENVELOPES_DISTINCT,
                    Scope::Existence,
                    true,
                    if distinct > tol { 0.0 } else { f64::INFINITY },
                    None,
                    format!("max sampled p2 − p1 = {distinct:e}"),
                );
                let total = p2.total_integral();
                b.push(
                    P2_NORMALIZED,
                    Scope::Existence,
                    matches!(p2, super::Envelope::Custom { .. }),
                    (total - 1.0).abs() - 1e-9,
                    None,
                    format!("∫ p2 = {total}"),
                );
                let limit = ratio_limit_at_zero(p1, p2, grid.node(1), grid.node(2.min(grid.steps())));
                match limit {
                    Some(l) => b.push(
                        ENVELOPE_RATIO_LIMIT,
                        Scope::Rate,
                        matches!(p1, super::Envelope::Custom { .. }) || matches!(p2, super::Envelope::Custom { .. }),
                        if l > 0.0 { 0.0 } else { f64::INFINITY },
                        None,
                        format!("lim p1/p2 = {l}"),
                    ),
                    None => b.fail(ENVELOPE_RATIO_LIMIT, Scope::Rate, "limit of p1/p2 at 0+ not resolved"),
                }
            }
            _ => {
                for name in [ENVELOPE_BOUNDS, ENVELOPES_DISTINCT, P2_NORMALIZED] {
                    b.fail(name, Scope::Existence, "weight field carries no envelopes");
                }
                b.fail(ENVELOPE_RATIO_LIMIT, Scope::Rate, "weight field carries no envelopes");
            }
        },
        Regime::Substochastic => {
            let (alpha, gamma) = (weight.alpha(), weight.gamma());
            b.push(
                WEIGHT_BOUNDED,
                Scope::Existence,
                false,
                if gamma.is_finite() { 0.0 } else { f64::INFINITY },
                None,
                format!("γ = sup h = {gamma}"),
            );
            b.push(
                WEIGHT_FLOOR_POSITIVE,
                Scope::Rate,
                false,
                if alpha > 0.0 { 0.0 } else { f64::INFINITY },
                None,
                format!("α = inf h = {alpha}"),
            );
        }
    }

    AssumptionReport { regime, entries: b.entries }
}

fn check_nonlinearity(b: &mut Builder, problem: &ProblemInstance, plan: &SamplingPlan, upper: f64, rng: &mut ChaCha8Rng) {
    let g = problem.nonlinearity();
    let tol = plan.tolerance;
    let span = 2.0 * upper.max(1.0);
    let n = plan.u_samples.max(2);
    let us: Vec<f64> = (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect();
    let gs: Vec<f64> = us.iter().map(|&u| g.eval(u)).collect();
    let scale = |v: f64| tol * (1.0 + v.abs());

    let g0 = g.eval(0.0);
    b.push(G_ZERO_AT_ORIGIN, Scope::Existence, false, g0.abs() - tol, None, format!("G(0) = {g0}"));

    let mut inc = Worst::new();
    for i in 1..n {
        inc.see(gs[i - 1] - gs[i], || format!("u={}", us[i]));
    }
    // strict: equality is a violation
    let inc_violation = if inc.excess >= 0.0 { inc.excess.max(f64::MIN_POSITIVE) } else { 0.0 };
    b.push(
        G_STRICTLY_INCREASING,
        Scope::Existence,
        true,
        inc_violation,
        if inc_violation > 0.0 { inc.witness.clone() } else { None },
        format!("{n} samples on [0, {span}]"),
    );

    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * n / 2 + plan.random_pairs);
    for i in 0..n {
        for j in i + 2..n {
            pairs.push((us[i], us[j]));
        }
    }
    pairs.extend((0..plan.random_pairs).map(|_| (rng.random_range(0.0..span), rng.random_range(0.0..span))));
    let mut conc = Worst::new();
    for &(a, c) in &pairs {
        let (ga, gc, gm) = (g.eval(a), g.eval(c), g.eval(0.5 * (a + c)));
        conc.see(0.5 * (ga + gc) - gm - scale(gm), || format!("a={a}, b={c}"));
    }
    b.push(
        G_CONCAVE,
        Scope::Existence,
        true,
        conc.violation(),
        conc.witness_if_failing(),
        format!("{} midpoint pairs", pairs.len()),
    );

    let ns = plan.sigma_samples.max(2);
    let sigmas: Vec<f64> = (0..ns).map(|i| i as f64 / (ns - 1) as f64).collect();
    let Some(phi) = g.phi_fn() else {
        b.fail(PHI_VALID, Scope::Rate, "no concavity modulus φ supplied");
        b.fail(SUBHOMOGENEITY, Scope::Rate, "no concavity modulus φ supplied");
        return;
    };
    let ps: Vec<f64> = sigmas.iter().map(|&s| phi(s)).collect();
    let mut pv = Worst::new();
    pv.see(ps[0].abs() - tol, || "φ(0)".into());
    pv.see((ps[ns - 1] - 1.0).abs() - tol, || "φ(1)".into());
    for i in 0..ns {
        pv.see(-ps[i] - tol, || format!("σ={}", sigmas[i]));
        pv.see(ps[i] - 1.0 - tol, || format!("σ={}", sigmas[i]));
        if i > 0 {
            pv.see(ps[i - 1] - ps[i], || format!("σ={}", sigmas[i]));
        }
        for j in i + 2..ns {
            let m = phi(0.5 * (sigmas[i] + sigmas[j]));
            pv.see(0.5 * (ps[i] + ps[j]) - m - tol, || format!("σ pair ({}, {})", sigmas[i], sigmas[j]));
        }
    }
    b.push(PHI_VALID, Scope::Rate, true, pv.violation(), pv.witness_if_failing(), format!("{ns} samples"));

    let nu = plan.u_samples.max(2);
    let grid_u: Vec<f64> = (0..nu).map(|i| upper * i as f64 / (nu - 1) as f64).collect();
    let exec = Execution::default();
    let per_sigma: Vec<(f64, String)> = exec.map(&sigmas, |&s| {
        let ph = phi(s);
        grid_u
            .iter()
            .map(|&u| {
                let gu = g.eval(u);
                (ph * gu - g.eval(s * u) - tol * (1.0 + gu), format!("σ={s}, u={u}"))
            })
            .fold((f64::NEG_INFINITY, String::new()), |acc, x| if x.0 > acc.0 { x } else { acc })
    });
    let mut sub = Worst::new();
    for (excess, w) in per_sigma {
        sub.see(excess, || w);
    }
    b.push(
        SUBHOMOGENEITY,
        Scope::Rate,
        true,
        sub.violation(),
        sub.witness_if_failing(),
        format!("{ns}×{nu} samples on [0,1]×[0,{upper}]"),
    );
}

