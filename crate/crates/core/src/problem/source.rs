use crate::convolution;
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::kernel::{Kernel, KernelTable};
use crate::space::{GridFunction, TimeGrid};

/// Forcing term `f(x, t)` of the linear Cauchy problem behind `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Constant(f64),
    /// Values on the instance grid; linearly interpolated on refinement.
    Tabulated(GridFunction),
}

/// How the source `g` is produced; re-evaluable on refined grids.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Constant(f64),
    /// Values on the instance grid; linearly interpolated on refinement.
    Tabulated(GridFunction),
    /// `g = e^{-t𝓛}u₀ + ∫_0^t e^{-(t-s)𝓛} f(s) ds`.
    Duhamel { u0: Vec<f64>, forcing: Forcing },
    /// `base + shift`.
    Offset { base: Box<SourceSpec>, shift: f64 },
}

impl SourceSpec {
    pub(crate) fn realize(&self, kernel: &Kernel, table: &KernelTable, grid: &TimeGrid) -> Result<GridFunction> {
        let (points, nodes) = (kernel.space().len(), grid.len());
        match self {
            SourceSpec::Constant(c) => Ok(GridFunction::constant(points, nodes, *c)),
            SourceSpec::Tabulated(g) => resample(g, points, nodes),
            SourceSpec::Duhamel { u0, forcing } => {
                let f = match forcing {
                    Forcing::Constant(c) => GridFunction::constant(points, nodes, *c),
                    Forcing::Tabulated(f) => resample(f, points, nodes)?,
                };
                duhamel(table, grid, u0, &f)
            }
            SourceSpec::Offset { base, shift } => Ok(base.realize(kernel, table, grid)?.map(|v| v + shift)),
        }
    }
}

/// Linear interpolation in time onto `nodes` uniformly spaced nodes.
fn resample(g: &GridFunction, points: usize, nodes: usize) -> Result<GridFunction> {
    if g.points() != points {
        return Err(invalid(format!("tabulated data has {} points, space has {points}", g.points())));
    }
    if g.nodes() == nodes {
        return Ok(g.clone());
    }
    if g.nodes() < 2 {
        return Err(invalid("tabulated data needs at least two time nodes"));
    }
    let scale = (g.nodes() - 1) as f64 / (nodes - 1) as f64;
    Ok(GridFunction::from_fn(points, nodes, |x, j| {
        let pos = j as f64 * scale;
        let i = (pos.floor() as usize).min(g.nodes() - 2);
        let frac = pos - i as f64;
        g.get(x, i) * (1.0 - frac) + g.get(x, i + 1) * frac
    }))
}

pub(crate) fn duhamel(table: &KernelTable, grid: &TimeGrid, u0: &[f64], f: &GridFunction) -> Result<GridFunction> {
    let points = table.points();
    if u0.len() != points {
        return Err(invalid(format!("u0 has {} values, space has {points}", u0.len())));
    }
    f.check_shape(points, grid.len())?;
    if let Some(v) = u0.iter().find(|v| !(**v >= 0.0)) {
        return Err(invalid(format!("initial data {v} is negative")));
    }
    if f.min() < 0.0 {
        return Err(invalid(format!("forcing {} is negative", f.min())));
    }
    let free = convolution::propagate(table, u0, grid.len());
    let forced = convolution::convolve(table, grid.dt(), f, Execution::default());
    Ok(free.zip_map(&forced, |a, b| a + b))
}

/// The source `g` with its sup `β` and its floor `β₀` on `[0, T₀]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceField {
    g: GridFunction,
    beta: f64,
    beta0: f64,
    t0: f64,
}

impl SourceField {
    /// `β₀` is the minimum over grid nodes in `[0, T₀]`, the closure of the
    /// window `(0, T₀)`.
    pub fn new(g: GridFunction, grid: &TimeGrid, t0: f64) -> Result<Self> {
        if !(t0 > 0.0) {
            return Err(invalid(format!("T0 = {t0} must be positive")));
        }
        if g.nodes() != grid.len() {
            return Err(invalid(format!("source has {} nodes, grid has {}", g.nodes(), grid.len())));
        }
        let beta = g.sup_norm();
        let last = grid.nodes().take_while(|t| *t <= t0 * (1.0 + 1e-12)).count().max(1);
        let beta0 = (0..g.points())
            .flat_map(|x| g.row(x)[..last].iter().copied())
            .fold(f64::INFINITY, f64::min);
        Ok(Self { g, beta, beta0, t0 })
    }

    pub fn values(&self) -> &GridFunction {
        &self.g
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }
}
