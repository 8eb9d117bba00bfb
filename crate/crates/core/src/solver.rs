//! Monotone Picard iteration for the discretized integral equation.
//!
//! Starting above the solution (`u₀ = ξ − β + g`, or `η − β + g` when the
//! kernel loses mass) the iterates decrease; starting from `g` they
//! increase. Both sequences are produced by the same order-preserving map
//! [`picard_step`].

use crate::convolution;
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::kernel::{Kernel, KernelTable};
use crate::problem::{check_assumptions, duhamel, ProblemInstance, SamplingPlan, SourceField, Threshold};
use crate::space::{GridFunction, TimeGrid};

/// Iterates below this are rejected; values in `[−NEGATIVE_SLACK, 0)` are
/// clamped to zero before applying `G`.
pub const NEGATIVE_SLACK: f64 = 1e-12;

/// Tolerance on the monotonicity assertion.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// `g(x,t) = ∫ K(x,y;t) u₀(y) dμ(y) + ∫_0^t ∫ K(x,y;t−s) f(y,s) dμ(y) ds`.
pub fn propagate_source(kernel: &Kernel, grid: &TimeGrid, u0: &[f64], f: &GridFunction, t0: f64) -> Result<SourceField> {
    let table = KernelTable::build(kernel, grid);
    let g = duhamel(&table, grid, u0, f)?;
    SourceField::new(g, grid, t0)
}

/// One application of `u ↦ g + Volterra(K·h·G(u))`.
pub fn picard_step(problem: &ProblemInstance, u: &GridFunction) -> Result<GridFunction> {
    picard_step_with(problem, u, Execution::default())
}

pub fn picard_step_with(problem: &ProblemInstance, u: &GridFunction, exec: Execution) -> Result<GridFunction> {
    u.check_shape(problem.points(), problem.nodes())?;
    for x in 0..u.points() {
        if let Some((node, &value)) = u.row(x).iter().enumerate().find(|(_, v)| !(**v >= -NEGATIVE_SLACK)) {
            return Err(Error::InvalidIterate { point: x, node, value });
        }
    }
    Ok(apply_map(problem, u, exec))
}

/// The fixed-point map without the sign precondition (negatives clamped).
fn apply_map(problem: &ProblemInstance, u: &GridFunction, exec: Execution) -> GridFunction {
    let g = problem.nonlinearity();
    let integrand = problem.weight_values().zip_map(u, |h, v| h * g.eval(v.max(0.0)));
    let volterra = convolution::convolve(problem.table(), problem.grid().dt(), &integrand, exec);
    problem.source().values().zip_map(&volterra, |a, b| a + b)
}

/// `sup |u − g − Volterra(K·h·G(u))|` over the grid.
pub fn residual(problem: &ProblemInstance, u: &GridFunction) -> f64 {
    residual_with(problem, u, Execution::default())
}

pub fn residual_with(problem: &ProblemInstance, u: &GridFunction, exec: Execution) -> f64 {
    apply_map(problem, u, exec).sup_distance(u)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// `threshold − β + g`; the iterates decrease.
    Upper,
    /// `g`; the iterates increase.
    Lower,
    Custom(GridFunction),
}

impl Start {
    pub fn name(&self) -> &'static str {
        match self {
            Start::Upper => "upper",
            Start::Lower => "lower",
            Start::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub start: Start,
    /// Skip the assumption gate; recorded in the solution.
    pub force: bool,
    /// Keep every iterate `u_0, u_1, …` in the solution.
    pub record_iterates: bool,
    pub execution: Execution,
    pub sampling: SamplingPlan,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            start: Start::Upper,
            force: false,
            record_iterates: false,
            execution: Execution::default(),
            sampling: SamplingPlan::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: GridFunction,
    /// `‖u_{m+1} − u_m‖∞` for each step taken.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// Largest step against the expected direction (`max(u_{m+1} − u_m)`
    /// from above, `max(u_m − u_{m+1})` from below); `None` for custom starts.
    pub monotonicity_violation: Option<f64>,
    pub start: &'static str,
    pub forced: bool,
    pub threshold: Option<Threshold>,
    /// `u_0, …, u_final` when requested.
    pub iterates: Vec<GridFunction>,
}

impl Solution {
    /// `u − g`.
    pub fn volterra_part(&self, problem: &ProblemInstance) -> GridFunction {
        self.u.zip_map(problem.source().values(), |u, g| u - g)
    }

    pub fn monotone(&self) -> bool {
        self.monotonicity_violation.is_none_or(|v| v <= MONOTONE_SLACK)
    }

    /// `sup (u_{m+1} − u_final)` for `m = 0, 1, …` (needs recorded iterates).
    pub fn distances_to_final(&self) -> Vec<f64> {
        self.iterates
            .iter()
            .skip(1)
            .map(|it| it.max_excess_over(&self.u))
            .collect()
    }
}

pub fn solve(problem: &ProblemInstance, options: &SolveOptions) -> Result<Solution> {
    if !(options.tol > 0.0) {
        return Err(invalid(format!("tolerance {} must be positive", options.tol)));
    }
    if options.max_iter == 0 {
        return Err(invalid("max_iter must be positive"));
    }
    if !options.force {
        let report = check_assumptions(problem, &options.sampling);
        if !report.existence_pass() {
            return Err(Error::AssumptionsFailed(Box::new(report)));
        }
    }
    let g = problem.source().values();
    let threshold = problem.threshold().ok();
    let mut u = match &options.start {
        Start::Upper => {
            let t = threshold.ok_or_else(|| invalid("upper start needs the threshold root"))?;
            let lift = t.value() - problem.source().beta();
            g.map(|v| v + lift)
        }
        Start::Lower => g.clone(),
        Start::Custom(c) => {
            c.check_shape(problem.points(), problem.nodes())?;
            c.clone()
        }
    };
    let direction = match options.start {
        Start::Upper => Some(1.0),
        Start::Lower => Some(-1.0),
        Start::Custom(_) => None,
    };

    let mut iterates = Vec::new();
    if options.record_iterates {
        iterates.push(u.clone());
    }
    let mut history = Vec::new();
    let mut violation = direction.map(|_| f64::NEG_INFINITY);
    let mut converged = false;
    while history.len() < options.max_iter {
        let next = picard_step_with(problem, &u, options.execution)?;
        let gap = next.sup_distance(&u);
        if let (Some(sign), Some(worst)) = (direction, violation.as_mut()) {
            let step = if sign > 0.0 { next.max_excess_over(&u) } else { u.max_excess_over(&next) };
            *worst = worst.max(step);
        }
        history.push(gap);
        u = next;
        if options.record_iterates {
            iterates.push(u.clone());
        }
        if gap <= options.tol {
            converged = true;
            break;
        }
    }
    let residual = residual_with(problem, &u, options.execution);
    Ok(Solution {
        u,
        iterations: history.len(),
        history,
        converged,
        residual,
        monotonicity_violation: violation.map(|v| v.max(0.0)),
        start: options.start.name(),
        forced: options.force,
        threshold,
        iterates,
    })
}

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub upper: Solution,
    pub lower: Solution,
    /// `‖u↑ − u↓‖∞`
    pub gap: f64,
    /// `max_m max(u↓_m − u↑_m)`, iterates of the shorter run padded with its limit.
    pub order_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Iterates from above and from below and compares the two limits.
pub fn uniqueness_probe(problem: &ProblemInstance, tol: f64, max_iter: usize) -> Result<UniquenessReport> {
    uniqueness_probe_with(problem, tol, max_iter, false)
}

pub fn uniqueness_probe_with(problem: &ProblemInstance, tol: f64, max_iter: usize, force: bool) -> Result<UniquenessReport> {
    let options = |start| SolveOptions { tol, max_iter, start, force, record_iterates: true, ..SolveOptions::default() };
    let upper = solve(problem, &options(Start::Upper))?;
    let lower = solve(problem, &options(Start::Lower))?;
    for (name, s) in [("upper", &upper), ("lower", &lower)] {
        if !s.converged {
            return Err(Error::ProbeInconclusive(format!(
                "{name} iteration did not reach {tol:e} in {max_iter} steps (last gap {:e})",
                s.history.last().copied().unwrap_or(f64::NAN)
            )));
        }
    }
    let steps = upper.iterates.len().max(lower.iterates.len());
    let at = |s: &Solution, m: usize| s.iterates.get(m).unwrap_or(&s.u).clone();
    let order_violation = (0..steps)
        .map(|m| at(&lower, m).max_excess_over(&at(&upper, m)))
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = upper.u.sup_distance(&lower.u);
    let tolerance = 10.0 * tol;
    Ok(UniquenessReport { pass: gap <= tolerance, upper, lower, gap, order_violation, tolerance })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    use super::*;
    use crate::problem::{Nonlinearity, SourceSpec, WeightField};
    use crate::space::DiscreteMeasureSpace;

    fn one_state(m: f64) -> Kernel {
        let space = Arc::new(DiscreteMeasureSpace::finite(&[1.0]).unwrap());
        let k = Kernel::matrix_semigroup(space, DMatrix::zeros(1, 1)).unwrap();
        if m > 0.0 {
            k.damp(m).unwrap()
        } else {
            k
        }
    }

    fn decaying_weight_problem(steps: usize) -> ProblemInstance {
        ProblemInstance::new(
            one_state(0.0),
            TimeGrid::new(1.0, steps).unwrap(),
            Nonlinearity::power(0.5).unwrap(),
            WeightField::canonical_mixture(1.0, 0.5, vec![1.0]).unwrap(),
            SourceSpec::Constant(0.0),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn step_of_zero_is_source() {
        let p = decaying_weight_problem(10);
        let out = picard_step(&p, &GridFunction::zeros(1, 11)).unwrap();
        assert_eq!(&out, p.source().values());
    }

    #[test]
    fn step_keeps_initial_row() {
        let space = Arc::new(DiscreteMeasureSpace::finite(&[1.0, 2.0]).unwrap());
        let kernel = Kernel::matrix_semigroup(space, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -0.5, 0.5])).unwrap();
        let p = ProblemInstance::new(
            kernel,
            TimeGrid::new(2.0, 8).unwrap(),
            Nonlinearity::power(0.5).unwrap(),
            WeightField::canonical_mixture(1.0, 0.5, vec![0.2, 0.9]).unwrap(),
            SourceSpec::Duhamel { u0: vec![0.3, 1.0], forcing: crate::problem::Forcing::Constant(0.1) },
            2.0,
        )
        .unwrap();
        let out = picard_step(&p, &GridFunction::constant(2, 9, 7.0)).unwrap();
        assert_eq!(out.column(0), p.source().values().column(0));
        assert_eq!(p.source().values().column(0), vec![0.3, 1.0]);
    }

    #[test]
    fn step_analytic_value() {
        // ∫_0^1 e^{-s}·√1 ds
        let exact = 1.0 - (-1.0f64).exp();
        let err = |n: usize| {
            let p = decaying_weight_problem(n);
            let out = picard_step(&p, &GridFunction::constant(1, n + 1, 1.0)).unwrap();
            (out.get(0, n) - exact).abs()
        };
        assert!(err(100) < 1e-5);
        assert_abs_diff_eq!(exact, 0.632121, epsilon = 1e-6);
        let ratio = err(50) / err(100);
        assert!((3.9..4.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn step_rejects_negative_iterates() {
        let p = decaying_weight_problem(4);
        let mut u = GridFunction::zeros(1, 5);
        u.set(0, 2, -1e-6);
        assert!(matches!(picard_step(&p, &u), Err(Error::InvalidIterate { point: 0, node: 2, .. })));
        u.set(0, 2, -1e-13);
        assert!(picard_step(&p, &u).is_ok());
    }

    #[test]
    fn zero_source_converges_immediately_from_below() {
        let p = decaying_weight_problem(20);
        let s = solve(&p, &SolveOptions { start: Start::Lower, force: true, ..Default::default() }).unwrap();
        assert!(s.converged);
        assert_eq!(s.iterations, 1);
        assert_eq!(s.u.sup_norm(), 0.0);
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn duhamel_examples() {
        let grid = TimeGrid::new(2.0, 20).unwrap();
        let stochastic = one_state(0.0);
        let g = propagate_source(&stochastic, &grid, &[0.7], &GridFunction::zeros(1, 21), 1.0).unwrap();
        assert!(g.values().as_slice().iter().all(|v| (v - 0.7).abs() < 1e-15));

        let g = propagate_source(&stochastic, &grid, &[0.0], &GridFunction::constant(1, 21, 1.0), 1.0).unwrap();
        for (j, t) in grid.nodes().enumerate() {
            assert_abs_diff_eq!(g.values().get(0, j), t, epsilon = 1e-13);
        }

        let m = 0.8;
        let damped = one_state(m);
        let err = |n: usize| {
            let grid = TimeGrid::new(2.0, n).unwrap();
            let g = propagate_source(&damped, &grid, &[0.0], &GridFunction::constant(1, n + 1, 1.0), 1.0).unwrap();
            grid.nodes()
                .enumerate()
                .map(|(j, t)| (g.values().get(0, j) - (1.0 - (-m * t).exp()) / m).abs())
                .fold(0.0, f64::max)
        };
        assert!(err(20) < 1e-3);
        let ratio = err(20) / err(40);
        assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");

        assert!(propagate_source(&stochastic, &grid, &[-1.0], &GridFunction::zeros(1, 21), 1.0).is_err());
        assert!(propagate_source(&stochastic, &grid, &[1.0], &GridFunction::constant(1, 21, -0.5), 1.0).is_err());
    }

    #[test]
    fn residual_of_fixed_point_is_zero() {
        let p = decaying_weight_problem(10);
        assert_eq!(residual(&p, &GridFunction::zeros(1, 11)), 0.0);
    }
}
