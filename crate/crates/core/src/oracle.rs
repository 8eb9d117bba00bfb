//! Brute-force references that share only problem data with the solver.
//!
//! [`ode_reference`] integrates the finite-state system
//! `u' = −Qu + h∘G(u) + f` with classical RK4, whose mild form is the
//! integral equation with `K = e^{-tQ}`. [`volterra_reference`] reruns the
//! fixed-point iteration on a refined grid with its own pointwise kernel
//! evaluations and its own quadrature loop.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::problem::{Nonlinearity, ProblemInstance, WeightField};
use crate::space::{GridFunction, TimeGrid};

const BLOW_UP: f64 = 1e12;

/// RK4 trajectory with `substeps` fine steps per grid step, sampled on `grid`.
///
/// The forcing is linearly interpolated between grid nodes; `h` is
/// evaluated exactly.
pub fn ode_reference(
    generator: &DMatrix<f64>,
    u0: &[f64],
    forcing: &GridFunction,
    weight: &WeightField,
    nonlinearity: &Nonlinearity,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<GridFunction> {
    let n = generator.nrows();
    if generator.ncols() != n || u0.len() != n {
        return Err(invalid("generator and initial data disagree in size"));
    }
    forcing.check_shape(n, grid.len())?;
    if substeps < 4 {
        return Err(invalid(format!("oracle step must be at least 4x finer than the grid, got {substeps}")));
    }
    let h = grid.dt() / substeps as f64;
    let force_at = |t: f64| -> DVector<f64> {
        let pos = (t / grid.dt()).clamp(0.0, grid.steps() as f64);
        let i = (pos.floor() as usize).min(grid.steps() - 1);
        let frac = pos - i as f64;
        DVector::from_fn(n, |x, _| forcing.get(x, i) * (1.0 - frac) + forcing.get(x, i + 1) * frac)
    };
    let rhs = |t: f64, u: &DVector<f64>| -> DVector<f64> {
        let reaction = DVector::from_fn(n, |x, _| weight.eval(x, t) * nonlinearity.eval(u[x].max(0.0)));
        -(generator * u) + reaction + force_at(t)
    };

    let mut out = GridFunction::zeros(n, grid.len());
    let mut u = DVector::from_column_slice(u0);
    for x in 0..n {
        out.set(x, 0, u[x]);
    }
    for step in 0..grid.steps() {
        for sub in 0..substeps {
            let t = grid.node(step) + sub as f64 * h;
            let k1 = rhs(t, &u);
            let k2 = rhs(t + 0.5 * h, &(&u + &k1 * (0.5 * h)));
            let k3 = rhs(t + 0.5 * h, &(&u + &k2 * (0.5 * h)));
            let k4 = rhs(t + h, &(&u + &k3 * h));
            u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        if u.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP) {
            return Err(Error::OracleFailure(format!("RK4 trajectory blew up by t = {}", grid.node(step + 1))));
        }
        for x in 0..n {
            out.set(x, step + 1, u[x]);
        }
    }
    Ok(out)
}

/// Converged lower-start iteration on a grid `refinement` times finer,
/// restricted to the problem's grid.
pub fn volterra_reference(problem: &ProblemInstance, refinement: usize, tol: f64, max_iter: usize) -> Result<GridFunction> {
    if problem.points() > 4 {
        return Err(invalid(format!("volterra_reference is limited to 4 points, got {}", problem.points())));
    }
    if refinement < 4 {
        return Err(invalid(format!("refinement must be at least 4, got {refinement}")));
    }
    let fine = problem.refined(refinement)?;
    let kernel = fine.kernel();
    let space = fine.space();
    let grid = fine.grid();
    let (n, nodes, dt) = (space.len(), grid.len(), grid.dt());

    // lag[l][x][y] = K(x, y; l·Δt)·μ(y), identity at lag 0
    let mut lag = vec![vec![vec![0.0; n]; n]; nodes];
    for (x, row) in lag[0].iter_mut().enumerate() {
        row[x] = 1.0;
    }
    for (l, m) in lag.iter_mut().enumerate().skip(1) {
        for (x, row) in m.iter_mut().enumerate() {
            for (y, v) in row.iter_mut().enumerate() {
                *v = kernel.evaluate(x, y, l as f64 * dt) * space.weight(y);
            }
        }
    }
    let g = fine.source().values();
    let h: Vec<Vec<f64>> = (0..n).map(|x| grid.nodes().map(|t| fine.weight().eval(x, t)).collect()).collect();
    let nl = fine.nonlinearity();

    let mut u: Vec<Vec<f64>> = (0..n).map(|x| g.row(x).to_vec()).collect();
    let budget = max_iter * refinement;
    for _ in 0..budget {
        let f: Vec<Vec<f64>> = (0..n)
            .map(|y| (0..nodes).map(|j| h[y][j] * nl.eval(u[y][j].max(0.0))).collect())
            .collect();
        let mut next = vec![vec![0.0; nodes]; n];
        let mut change = 0.0f64;
        for x in 0..n {
            for k in 0..nodes {
                let mut acc = 0.0;
                for j in 0..=k {
                    let w = if j == 0 || j == k { 0.5 } else { 1.0 };
                    for y in 0..n {
                        acc += w * lag[k - j][x][y] * f[y][j];
                    }
                }
                let value = if k == 0 { g.get(x, 0) } else { g.get(x, k) + dt * acc };
                change = change.max((value - u[x][k]).abs());
                next[x][k] = value;
            }
        }
        u = next;
        if change <= tol {
            let full = GridFunction::from_rows(&u)?;
            return Ok(full.restrict_time(refinement));
        }
    }
    Err(Error::OracleFailure(format!("fine-grid iteration did not reach {tol:e} in {budget} steps")))
}
