//! Vertical shift: trades a positive floor on the source for a
//! nonlinearity defined on `[−β₀, ∞)`.
//!
//! With `g = g̃ + β₀` and `G(u) = G̃(u − β₀)`, a solution `u` of the
//! unshifted equation gives `v = u − β₀` solving
//! `v = g̃ + ∫∫ K h G̃(v)`.

use std::sync::Arc;

use super::nonlinearity::ScalarFn;
use super::{Nonlinearity, ProblemInstance, SourceSpec, WeightField};
use crate::error::{invalid, Error, Result};
use crate::kernel::Kernel;
use crate::space::{GridFunction, TimeGrid};

/// `G̃` on `[−offset, ∞)` with `G̃(−offset) = 0`.
#[derive(Clone)]
pub struct ShiftedNonlinearity {
    pub label: String,
    pub g: ScalarFn,
    pub offset: f64,
    /// Concavity modulus of the unshifted `G(u) = G̃(u − offset)`, if known.
    pub phi: Option<ScalarFn>,
}

#[derive(Debug, Clone)]
pub struct ShiftedProblem {
    problem: ProblemInstance,
    offset: f64,
}

impl ShiftedProblem {
    /// The equivalent unshifted instance.
    pub fn problem(&self) -> &ProblemInstance {
        &self.problem
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `v = u − β₀`.
    pub fn back_map(&self, u: &GridFunction) -> GridFunction {
        let offset = self.offset;
        u.map(|x| x - offset)
    }
}

pub fn shift_problem(
    kernel: Kernel,
    grid: TimeGrid,
    shifted: ShiftedNonlinearity,
    weight: WeightField,
    source: SourceSpec,
    t0: f64,
) -> Result<ShiftedProblem> {
    let offset = shifted.offset;
    if !(offset >= 0.0 && offset.is_finite()) {
        return Err(invalid(format!("shift {offset} must be finite and non-negative")));
    }
    let at_end = (shifted.g)(-offset);
    let scale = 1.0 + (shifted.g)(0.0).abs();
    if !(at_end.abs() <= 1e-12 * scale) {
        return Err(Error::InvalidShift(at_end));
    }
    let g_tilde = shifted.g.clone();
    let g: ScalarFn = if offset == 0.0 { g_tilde } else { Arc::new(move |u: f64| g_tilde(u - offset)) };
    let nonlinearity = Nonlinearity::custom(format!("shifted({}, {offset})", shifted.label), g, shifted.phi);
    let source = if offset == 0.0 { source } else { SourceSpec::Offset { base: Box::new(source), shift: offset } };
    let problem = ProblemInstance::new(kernel, grid, nonlinearity, weight, source, t0)?;
    Ok(ShiftedProblem { problem, offset })
}
