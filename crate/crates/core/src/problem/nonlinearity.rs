use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Concave nonlinearity `G` with an optional concavity modulus `φ` such
/// that `G(σu) ≥ φ(σ)G(u)`.
#[derive(Clone)]
pub struct Nonlinearity {
    g: ScalarFn,
    phi: Option<ScalarFn>,
    label: String,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("label", &self.label)
            .field("has_phi", &self.phi.is_some())
            .finish()
    }
}

impl Nonlinearity {
    pub fn custom(label: impl Into<String>, g: ScalarFn, phi: Option<ScalarFn>) -> Self {
        Self { g, phi, label: label.into() }
    }

    /// `G(u) = u^α`, `φ(σ) = σ^α`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("power exponent {alpha} outside (0, 1)")));
        }
        Ok(Self {
            g: Arc::new(move |u: f64| u.powf(alpha)),
            phi: Some(Arc::new(move |s: f64| s.powf(alpha))),
            label: format!("power(alpha={alpha})"),
        })
    }

    /// `G(u) = γ(1 − e^{-u^α})`, `φ(σ) = σ^α`. Bounded, hence strongly concave.
    pub fn saturating(gamma: f64, alpha: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(invalid(format!("saturation level {gamma} must exceed 1")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("saturating exponent {alpha} outside (0, 1)")));
        }
        Ok(Self {
            g: Arc::new(move |u: f64| gamma * -(-u.powf(alpha)).exp_m1()),
            phi: Some(Arc::new(move |s: f64| s.powf(alpha))),
            label: format!("saturating(gamma={gamma}, alpha={alpha})"),
        })
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.g)(u)
    }

    pub fn phi(&self, sigma: f64) -> Option<f64> {
        self.phi.as_ref().map(|p| p(sigma))
    }

    pub fn has_phi(&self) -> bool {
        self.phi.is_some()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn phi_fn(&self) -> Option<&ScalarFn> {
        self.phi.as_ref()
    }
}
