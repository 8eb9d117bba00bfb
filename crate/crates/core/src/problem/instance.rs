use std::sync::Arc;

use super::roots::{solve_eta, solve_xi};
use super::{Nonlinearity, SourceField, SourceSpec, WeightField};
use crate::error::{invalid, Result};
use crate::kernel::{Kernel, KernelTable, Regime};
use crate::space::{DiscreteMeasureSpace, GridFunction, TimeGrid};

/// Upper threshold defining the decreasing iteration's starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// `ξ − G(ξ) = β`
    Xi(f64),
    /// `γG(η) = (η − β)λ₋`
    Eta(f64),
}

impl Threshold {
    pub fn value(&self) -> f64 {
        match self {
            Threshold::Xi(v) | Threshold::Eta(v) => *v,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Threshold::Xi(_) => "xi",
            Threshold::Eta(_) => "eta",
        }
    }
}

/// `u(x,t) = g(x,t) + ∫_0^t ∫_X K(x,y;t−s) h(y,s) G(u(y,s)) dμ(y) ds`,
/// discretized on a uniform time grid.
///
/// Construction evaluates the source and the weight on the grid and caches
/// the kernel at every grid lag.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    kernel: Kernel,
    grid: TimeGrid,
    table: Arc<KernelTable>,
    nonlinearity: Nonlinearity,
    weight: WeightField,
    weight_values: GridFunction,
    source_spec: SourceSpec,
    source: SourceField,
}

impl ProblemInstance {
    pub fn new(
        kernel: Kernel,
        grid: TimeGrid,
        nonlinearity: Nonlinearity,
        weight: WeightField,
        source_spec: SourceSpec,
        t0: f64,
    ) -> Result<Self> {
        let points = kernel.space().len();
        if let Some(n) = weight.points() {
            if n != points {
                return Err(invalid(format!("weight field has {n} points, space has {points}")));
            }
        }
        let table = Arc::new(KernelTable::build(&kernel, &grid));
        let g = source_spec.realize(&kernel, &table, &grid)?;
        if g.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(invalid("source has non-finite values"));
        }
        let source = SourceField::new(g, &grid, t0)?;
        let weight_values = GridFunction::from_fn(points, grid.len(), |x, j| weight.eval(x, grid.node(j)));
        Ok(Self { kernel, grid, table, nonlinearity, weight, weight_values, source_spec, source })
    }

    /// The same problem on a grid with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(
            self.kernel.clone(),
            self.grid.refined(factor)?,
            self.nonlinearity.clone(),
            self.weight.clone(),
            self.source_spec.clone(),
            self.source.t0(),
        )
    }

    /// Same data on a different grid with the same horizon handling.
    pub fn with_grid(&self, grid: TimeGrid) -> Result<Self> {
        Self::new(
            self.kernel.clone(),
            grid,
            self.nonlinearity.clone(),
            self.weight.clone(),
            self.source_spec.clone(),
            self.source.t0(),
        )
    }

    pub fn space(&self) -> &Arc<DiscreteMeasureSpace> {
        self.kernel.space()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn weight(&self) -> &WeightField {
        &self.weight
    }

    /// `h` on the grid.
    pub fn weight_values(&self) -> &GridFunction {
        &self.weight_values
    }

    pub fn source(&self) -> &SourceField {
        &self.source
    }

    pub fn source_spec(&self) -> &SourceSpec {
        &self.source_spec
    }

    pub fn regime(&self) -> Regime {
        self.kernel.regime()
    }

    pub fn points(&self) -> usize {
        self.kernel.space().len()
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    /// `ξ` in the stochastic regime, `η` in the substochastic one.
    pub fn threshold(&self) -> Result<Threshold> {
        let beta = self.source.beta();
        match self.regime() {
            Regime::Stochastic => Ok(Threshold::Xi(solve_xi(&self.nonlinearity, beta)?)),
            Regime::Substochastic => Ok(Threshold::Eta(solve_eta(
                &self.nonlinearity,
                beta,
                self.weight.gamma(),
                self.kernel.lambda_minus(),
            )?)),
        }
    }
}
