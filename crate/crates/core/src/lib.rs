//! Monotone Picard solver for Hammerstein–Volterra integral equations
//!
//! ```text
//! u(x,t) = g(x,t) + ∫_0^t ∫_X K(x,y;t−s) h(y,s) G(u(y,s)) dμ(y) ds
//! ```
//!
//! with a non-negative (sub)stochastic heat kernel `K` and a concave,
//! increasing nonlinearity `G`. These are the mild solutions of
//! `∂_t u + 𝓛u = h·G(u) + f`.
//!
//! The crate provides finite quadrature spaces ([`space`]), heat kernels
//! ([`kernel`]), problem assembly with assumption checkers ([`problem`]),
//! the monotone iteration ([`solver`]), a-priori rate certificates
//! ([`certificate`]) and independent references ([`oracle`]).
//!
//! The `parallel` feature (on by default) runs the Picard sweep and the
//! samplers on rayon; [`Execution::Sequential`] is always available.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
mod convolution;
pub mod error;
mod exec;
pub mod kernel;
pub mod oracle;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
pub use exec::Execution;
