#![allow(dead_code)]

use std::sync::Arc;

use hammerstein::kernel::Kernel;
use hammerstein::problem::{Nonlinearity, ProblemInstance, SourceSpec, WeightField};
use hammerstein::space::{DiscreteMeasureSpace, TimeGrid};
use nalgebra::DMatrix;

pub fn two_state_kernel() -> Kernel {
    let space = Arc::new(DiscreteMeasureSpace::finite(&[0.5, 0.5]).unwrap());
    Kernel::matrix_semigroup(space, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])).unwrap()
}

pub fn one_state_damped(m: f64) -> Kernel {
    let space = Arc::new(DiscreteMeasureSpace::finite(&[1.0]).unwrap());
    Kernel::matrix_semigroup(space, DMatrix::zeros(1, 1)).unwrap().damp(m).unwrap()
}

/// Stochastic desk instance: two-state conservative kernel, `G = √·`,
/// `h = 0.75·e^{-t}`, `g ≡ 0.25`.
pub fn desk_stochastic(horizon: f64, steps: usize) -> ProblemInstance {
    desk_stochastic_with(horizon, steps, 0.5, SourceSpec::Constant(0.25))
}

pub fn desk_stochastic_with(horizon: f64, steps: usize, ratio: f64, source: SourceSpec) -> ProblemInstance {
    ProblemInstance::new(
        two_state_kernel(),
        TimeGrid::new(horizon, steps).unwrap(),
        Nonlinearity::power(0.5).unwrap(),
        WeightField::canonical_mixture(1.0, ratio, vec![0.5]).unwrap(),
        source,
        horizon,
    )
    .unwrap()
}

/// Substochastic desk instance: one state damped by `m = 1`, `h ≡ 1`,
/// `g ≡ 1`, `G = √·`.
pub fn desk_substochastic(horizon: f64, steps: usize) -> ProblemInstance {
    ProblemInstance::new(
        one_state_damped(1.0),
        TimeGrid::new(horizon, steps).unwrap(),
        Nonlinearity::power(0.5).unwrap(),
        WeightField::constant(1.0).unwrap(),
        SourceSpec::Constant(1.0),
        horizon,
    )
    .unwrap()
}
