//! Problem data: the nonlinearity, the weight field, the source, the
//! assembled instance, its threshold roots and its assumption checkers.

mod assumptions;
mod instance;
mod nonlinearity;
mod roots;
mod shift;
mod source;
mod weight;

pub use assumptions::*;
pub use instance::{ProblemInstance, Threshold};
pub use nonlinearity::{Nonlinearity, ScalarFn};
pub use roots::{solve_eta, solve_xi};
pub use shift::{shift_problem, ShiftedNonlinearity, ShiftedProblem};
pub use source::{Forcing, SourceField, SourceSpec};
pub use weight::{ratio_limit_at_zero, Envelope, WeightField};

pub(crate) use source::duhamel;
