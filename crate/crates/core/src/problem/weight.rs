use std::fmt;

use super::nonlinearity::ScalarFn;
use crate::error::{invalid, Result};
use crate::quadrature;

/// A rate function `p: ℝ₊ → ℝ₊` bounding the weight field.
#[derive(Clone)]
pub enum Envelope {
    /// `amplitude · e^{-rate·t}`.
    Exponential { amplitude: f64, rate: f64 },
    /// Arbitrary continuous non-negative function; integrals by quadrature.
    Custom { label: String, f: ScalarFn },
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Envelope::Exponential { amplitude, rate } => {
                write!(f, "Exponential {{ amplitude: {amplitude}, rate: {rate} }}")
            }
            Envelope::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// Tail length beyond which custom envelope integrals are declared settled.
const CUSTOM_TAIL_LIMIT: f64 = 1e6;

impl Envelope {
    pub fn exponential(amplitude: f64, rate: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite() && rate >= 0.0 && rate.is_finite()) {
            return Err(invalid(format!("exponential envelope needs amplitude, rate ≥ 0, got {amplitude}, {rate}")));
        }
        Ok(Envelope::Exponential { amplitude, rate })
    }

    pub fn custom(label: impl Into<String>, f: ScalarFn) -> Self {
        Envelope::Custom { label: label.into(), f }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Envelope::Exponential { amplitude, rate } => amplitude * (-rate * t).exp(),
            Envelope::Custom { f, .. } => f(t),
        }
    }

    /// `∫_0^t p`.
    pub fn integral_to(&self, t: f64) -> f64 {
        match self {
            Envelope::Exponential { amplitude, rate } if *rate == 0.0 => amplitude * t,
            Envelope::Exponential { amplitude, rate } => -amplitude / rate * (-rate * t).exp_m1(),
            Envelope::Custom { f, .. } => quadrature::integrate(|s| f(s), 0.0, t, 1e-12),
        }
    }

    /// `∫_0^∞ p`. Custom envelopes integrate over doubling windows until the
    /// last window contributes less than `1e-10`; infinite if that never
    /// happens before a horizon of `1e6`.
    pub fn total_integral(&self) -> f64 {
        match self {
            Envelope::Exponential { amplitude, rate } if *rate == 0.0 => {
                if *amplitude == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Envelope::Exponential { amplitude, rate } => amplitude / rate,
            Envelope::Custom { f, .. } => {
                let mut total = quadrature::integrate(|s| f(s), 0.0, 1.0, 1e-12);
                let mut a = 1.0;
                while a < CUSTOM_TAIL_LIMIT {
                    let piece = quadrature::integrate(|s| f(s), a, 2.0 * a, 1e-12);
                    total += piece;
                    if piece.abs() < 1e-10 {
                        return total;
                    }
                    a *= 2.0;
                }
                f64::INFINITY
            }
        }
    }

    /// `inf_{t ≥ 0} p(t)` for exponential envelopes; sampled otherwise.
    pub fn infimum(&self) -> f64 {
        match self {
            Envelope::Exponential { amplitude, rate } => {
                if *rate == 0.0 {
                    *amplitude
                } else {
                    0.0
                }
            }
            Envelope::Custom { f, .. } => (0..=400)
                .map(|i| f(1e-3 * 1.05f64.powi(i)))
                .fold(f(0.0), f64::min),
        }
    }

    /// `sup_{t ≥ 0} p(t)` for exponential envelopes; sampled otherwise.
    pub fn supremum(&self) -> f64 {
        match self {
            Envelope::Exponential { amplitude, .. } => *amplitude,
            Envelope::Custom { f, .. } => (0..=400)
                .map(|i| f(1e-3 * 1.05f64.powi(i)))
                .fold(f(0.0), f64::max),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Envelope::Exponential { amplitude, rate } => format!("{amplitude}*exp(-{rate} t)"),
            Envelope::Custom { label, .. } => label.clone(),
        }
    }
}

/// Limit of `p₁(t)/p₂(t)` as `t → 0⁺`.
///
/// Exact for exponential pairs. Otherwise the ratio is read at `t₁` and
/// `t₂` (the two smallest positive grid times) and accepted only when the
/// two readings agree within 5%.
pub fn ratio_limit_at_zero(p1: &Envelope, p2: &Envelope, t1: f64, t2: f64) -> Option<f64> {
    match (p1, p2) {
        (Envelope::Exponential { amplitude: a1, .. }, Envelope::Exponential { amplitude: a2, .. }) => {
            if *a2 > 0.0 {
                Some(a1 / a2)
            } else {
                None
            }
        }
        _ => {
            let r1 = p1.eval(t1) / p2.eval(t1);
            let r2 = p1.eval(t2) / p2.eval(t2);
            if r1.is_finite() && r2.is_finite() && (r1 - r2).abs() <= 0.05 * r1.abs().max(r2.abs()) {
                Some(r1)
            } else {
                None
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    /// `p₁(t)(1 − λ₀(x)) + p₂(t)λ₀(x)`
    Mixture { lambda0: Vec<f64> },
    Constant(f64),
}

/// The weight `h(x, t) ≥ 0` multiplying the nonlinearity.
#[derive(Debug, Clone)]
pub struct WeightField {
    shape: Shape,
    p1: Option<Envelope>,
    p2: Option<Envelope>,
    alpha: f64,
    gamma: f64,
}

impl WeightField {
    /// Convex mixture of the two envelopes with per-point mixing `λ₀ ∈ [0, 1]`.
    pub fn mixture(p1: Envelope, p2: Envelope, lambda0: Vec<f64>) -> Result<Self> {
        if lambda0.is_empty() {
            return Err(invalid("λ₀ needs one value per point"));
        }
        if let Some(l) = lambda0.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(invalid(format!("λ₀ = {l} outside [0, 1]")));
        }
        let (lo, hi) = lambda0
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), l| (a.min(*l), b.max(*l)));
        // h is affine in λ₀, so its extremes over x sit at the extreme λ₀.
        let alpha = [lo, hi]
            .iter()
            .map(|l| (1.0 - l) * p1.infimum() + l * p2.infimum())
            .fold(f64::INFINITY, f64::min);
        let gamma = [lo, hi]
            .iter()
            .map(|l| (1.0 - l) * p1.supremum() + l * p2.supremum())
            .fold(0.0, f64::max);
        Ok(Self { shape: Shape::Mixture { lambda0 }, p1: Some(p1), p2: Some(p2), alpha, gamma })
    }

    /// The canonical family `p₂ = r·e^{-rt}`, `p₁ = c·p₂`.
    pub fn canonical_mixture(rate: f64, ratio: f64, lambda0: Vec<f64>) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(invalid(format!("rate {rate} must be positive")));
        }
        if !(0.0..=1.0).contains(&ratio) {
            return Err(invalid(format!("ratio {ratio} outside [0, 1]")));
        }
        Self::mixture(Envelope::exponential(ratio * rate, rate)?, Envelope::exponential(rate, rate)?, lambda0)
    }

    /// `h ≡ value`; carries no envelopes.
    pub fn constant(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(invalid(format!("constant weight {value} must be finite and non-negative")));
        }
        Ok(Self { shape: Shape::Constant(value), p1: None, p2: None, alpha: value, gamma: value })
    }

    #[inline]
    pub fn eval(&self, x: usize, t: f64) -> f64 {
        match &self.shape {
            Shape::Constant(v) => *v,
            Shape::Mixture { lambda0 } => {
                let l = if lambda0.len() == 1 { lambda0[0] } else { lambda0[x] };
                let (p1, p2) = (self.p1.as_ref().unwrap(), self.p2.as_ref().unwrap());
                p1.eval(t) * (1.0 - l) + p2.eval(t) * l
            }
        }
    }

    /// Number of points the field is defined for, or `None` when uniform in x.
    pub fn points(&self) -> Option<usize> {
        match &self.shape {
            Shape::Mixture { lambda0 } if lambda0.len() > 1 => Some(lambda0.len()),
            _ => None,
        }
    }

    pub fn p1(&self) -> Option<&Envelope> {
        self.p1.as_ref()
    }

    pub fn p2(&self) -> Option<&Envelope> {
        self.p2.as_ref()
    }

    /// `inf h` over the whole domain.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `sup h` over the whole domain.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn label(&self) -> String {
        match (&self.shape, &self.p1, &self.p2) {
            (Shape::Constant(v), ..) => format!("constant({v})"),
            (Shape::Mixture { .. }, Some(p1), Some(p2)) => format!("mixture(p1={}, p2={})", p1.label(), p2.label()),
            _ => "mixture".into(),
        }
    }
}
