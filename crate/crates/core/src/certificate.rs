//! A-priori convergence constants for the decreasing iteration.
//!
//! The stochastic certificate lower-bounds the ratio of the second to the
//! first Volterra iterate by `σ* = min(σ₁, σ₂)`, where `σ₁` bounds the
//! function `𝔏` from below. The substochastic certificate uses the closed
//! form `σ♯` and its rescaling `σ# = (λ₋/λ₊)σ♯`. Either factor `σ` and the
//! concavity modulus `φ` yield the contraction factor
//! `k(ε) = (1 − φ(εσ)) / (1 − εσ)` and the bound
//! `0 ≤ u_{m+1} − u ≤ C·kᵐ`, `C = (threshold − β)(1 − σ)/(1 − k)`.

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::kernel::Regime;
use crate::problem::{Envelope, ProblemInstance, Threshold};
use crate::quadrature;

/// Multiplier applied to the sampled infimum of `𝔏`.
pub const SIGMA1_SAFETY: f64 = 0.99;

/// `ε` candidates searched when the caller does not fix one.
pub const EPSILON_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Certificates with `σ` below this are flagged as degraded.
pub const DEGRADED_SIGMA: f64 = 1e-3;

const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonChoice {
    /// Minimize `k` over [`EPSILON_GRID`].
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factors {
    Stochastic { sigma1: f64, sigma2: f64, sigma_star: f64 },
    Substochastic { sigma_sharp: f64, sigma_hash: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCertificate {
    pub regime: Regime,
    pub threshold: Threshold,
    pub beta: f64,
    pub beta0: f64,
    pub t0: f64,
    pub factors: Factors,
    /// `σ*` or `σ#`, whichever enters `k` and `C`.
    pub sigma: f64,
    pub epsilon: f64,
    pub k: f64,
    pub c: f64,
    pub degraded: bool,
    /// `C·kᵐ` for `m = 0..table.len()`.
    pub table: Vec<f64>,
}

impl ConvergenceCertificate {
    pub fn error_bound(&self, m: usize) -> f64 {
        self.c * self.k.powi(m as i32)
    }
}

struct LData<'a> {
    p1: &'a Envelope,
    p2: &'a Envelope,
    gap: f64,
    lift: f64,
    beta0: f64,
    problem: &'a ProblemInstance,
}

impl<'a> LData<'a> {
    fn new(problem: &'a ProblemInstance, xi: f64) -> Result<Self> {
        if problem.regime() != Regime::Stochastic {
            return Err(invalid("𝔏 is defined for stochastic kernels"));
        }
        let weight = problem.weight();
        let (Some(p1), Some(p2)) = (weight.p1(), weight.p2()) else {
            return Err(invalid("𝔏 needs envelopes p1, p2"));
        };
        let beta = problem.source().beta();
        let beta0 = problem.source().beta0();
        if !(beta0 > 0.0) {
            return Err(invalid(format!("𝔏 needs β₀ > 0, got {beta0}")));
        }
        let gap = xi - beta;
        if !(gap > 0.0) {
            return Err(invalid(format!("ξ − β = {gap} must be positive")));
        }
        let lift = problem.nonlinearity().eval(gap + beta0);
        Ok(Self { p1, p2, gap, lift, beta0, problem })
    }

    fn g(&self, u: f64) -> f64 {
        self.problem.nonlinearity().eval(u)
    }

    fn numerator_integrand(&self, s: f64) -> f64 {
        self.p1.eval(s) * self.g(self.lift * self.p1.integral_to(s) + self.beta0)
    }

    fn numerator(&self, t: f64) -> f64 {
        quadrature::integrate(|s| self.numerator_integrand(s), 0.0, t, QUAD_TOL)
    }

    fn value(&self, t: f64) -> f64 {
        self.numerator(t) / (self.gap * self.p2.integral_to(t))
    }

    /// Horizon past which the numerator's tail is below `1e-15`.
    fn settle_time(&self) -> Result<f64> {
        match self.p1 {
            Envelope::Exponential { amplitude, rate } if *rate > 0.0 => {
                let peak = self.g(self.lift * amplitude / rate + self.beta0);
                let bound = peak * amplitude / rate;
                Ok((bound / 1e-15).ln().max(1.0) / rate)
            }
            Envelope::Exponential { amplitude, .. } if *amplitude == 0.0 => Ok(1.0),
            Envelope::Exponential { .. } => Err(Error::CertificateFailure("∫ p1 diverges".into())),
            Envelope::Custom { .. } => {
                let mut a = 1.0;
                while a < 1e6 {
                    let piece = quadrature::integrate(|s| self.numerator_integrand(s), a, 2.0 * a, QUAD_TOL);
                    if piece.abs() < 1e-14 {
                        return Ok(2.0 * a);
                    }
                    a *= 2.0;
                }
                Err(Error::CertificateFailure("∫ p1 G(…) does not settle".into()))
            }
        }
    }

    fn limit_at_zero(&self) -> Result<f64> {
        let dt = self.problem.grid().dt();
        let ratio = crate::problem::ratio_limit_at_zero(self.p1, self.p2, dt, 2.0 * dt)
            .ok_or_else(|| Error::CertificateFailure("lim p1/p2 at 0+ not resolved".into()))?;
        Ok(self.g(self.beta0) / self.gap * ratio)
    }

    fn limit_at_infinity(&self) -> Result<f64> {
        let horizon = self.settle_time()?;
        Ok(self.numerator(horizon) / (self.gap * self.p2.total_integral()))
    }
}

/// `𝔏(t) = ∫_0^t p₁(s) G(G(ξ−β+β₀)∫_0^s p₁ + β₀) ds / ((ξ−β)∫_0^t p₂)`.
pub fn l_function(problem: &ProblemInstance, xi: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("𝔏 needs t > 0, got {t}")));
    }
    Ok(LData::new(problem, xi)?.value(t))
}

/// `(lim_{t→0⁺} 𝔏, lim_{t→∞} 𝔏)`. The limit at infinity keeps `β₀`
/// inside `G`, as in the definition of `𝔏`.
pub fn l_function_limits(problem: &ProblemInstance, xi: f64) -> Result<(f64, f64)> {
    let data = LData::new(problem, xi)?;
    Ok((data.limit_at_zero()?, data.limit_at_infinity()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaStar {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma_star: f64,
    pub limit_at_zero: f64,
    pub limit_at_infinity: f64,
    /// `(t, 𝔏(t))` at the sampled times.
    pub samples: Vec<(f64, f64)>,
}

/// Sample times for `𝔏`: log-spaced from `10⁻⁶·T` to the settle horizon
/// plus the instance grid.
fn l_sample_times(problem: &ProblemInstance, horizon: f64) -> Vec<f64> {
    let grid = problem.grid();
    let lo = 1e-6 * grid.horizon().min(horizon);
    let hi = horizon.max(grid.horizon());
    let n = 240;
    let mut ts: Vec<f64> = (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect();
    let stride = (grid.steps() / 100).max(1);
    ts.extend((1..=grid.steps()).step_by(stride).map(|j| grid.node(j)));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

pub fn sigma_star(problem: &ProblemInstance, xi: f64) -> Result<SigmaStar> {
    let data = LData::new(problem, xi)?;
    let limit_at_zero = data.limit_at_zero()?;
    let limit_at_infinity = data.limit_at_infinity()?;
    let ts = l_sample_times(problem, data.settle_time()?);
    let values = Execution::default().map(&ts, |&t| data.value(t));
    let inf = values
        .iter()
        .copied()
        .chain([limit_at_zero, limit_at_infinity])
        .fold(f64::INFINITY, f64::min);
    let sigma1 = SIGMA1_SAFETY * inf;

    let t0 = problem.source().t0();
    let g_gap = data.g(data.gap);
    let sigma2 = quadrature::integrate(
        |s| data.p1.eval(s) * data.g(g_gap * data.p1.integral_to(s)),
        0.0,
        t0,
        QUAD_TOL,
    ) / data.gap;

    let sigma_star = sigma1.min(sigma2);
    if !(sigma_star > 0.0 && sigma_star < 1.0) {
        return Err(Error::CertificateFailure(format!(
            "σ* = {sigma_star} (σ₁ = {sigma1}, σ₂ = {sigma2}) outside (0, 1)"
        )));
    }
    Ok(SigmaStar {
        sigma1,
        sigma2,
        sigma_star,
        limit_at_zero,
        limit_at_infinity,
        samples: ts.into_iter().zip(values).collect(),
    })
}

/// `(σ♯, σ#)` for the substochastic regime.
pub fn sigma_sharp(problem: &ProblemInstance, eta: f64) -> Result<(f64, f64)> {
    if problem.regime() != Regime::Substochastic {
        return Err(invalid("σ♯ is defined for substochastic kernels"));
    }
    let g = problem.nonlinearity();
    let alpha = problem.weight().alpha();
    let beta = problem.source().beta();
    let beta0 = problem.source().beta0();
    let t0 = problem.source().t0();
    let (lm, lp) = (problem.kernel().lambda_minus(), problem.kernel().lambda_plus());
    if !(alpha > 0.0 && beta0 > 0.0 && lm > 0.0 && lp >= lm) {
        return Err(invalid(format!(
            "σ♯ needs α > 0, β₀ > 0, λ₊ ≥ λ₋ > 0; got α = {alpha}, β₀ = {beta0}, λ₋ = {lm}, λ₊ = {lp}"
        )));
    }
    let gap = eta - beta;
    let scale = alpha / (gap * lm);
    let first = scale * g.eval(beta0);
    let second = scale * g.eval(alpha / lp * g.eval(gap) * -(-t0 * lp).exp_m1());
    let sharp = first.min(second);
    let hash = lm / lp * sharp;
    for (name, v) in [("σ♯", sharp), ("σ#", hash)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::CertificateFailure(format!("{name} = {v} outside (0, 1)")));
        }
    }
    Ok((sharp, hash))
}

/// `k(ε) = (1 − φ(εσ)) / (1 − εσ)`, required to lie in `(0, 1)`.
pub fn contraction_factor(phi: impl Fn(f64) -> f64, sigma: f64, epsilon: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(invalid(format!("σ = {sigma} outside (0, 1)")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("ε = {epsilon} outside (0, 1)")));
    }
    let s = epsilon * sigma;
    let k = (1.0 - phi(s)) / (1.0 - s);
    // φ(s) = s rounds to k = 1 ± ulp; treat that as the boundary it is
    if !(k > 0.0 && k < 1.0 - 4.0 * f64::EPSILON) {
        return Err(Error::CertificateFailure(format!("k = {k} not in (0, 1) at ε = {epsilon}, σ = {sigma}")));
    }
    Ok(k)
}

/// Smallest `k` over [`EPSILON_GRID`] as `(ε, k)`.
pub fn best_contraction(phi: impl Fn(f64) -> f64, sigma: f64) -> Result<(f64, f64)> {
    EPSILON_GRID
        .iter()
        .filter_map(|&e| contraction_factor(&phi, sigma, e).ok().map(|k| (e, k)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::CertificateFailure(format!("no ε in the search grid gives k ∈ (0, 1) at σ = {sigma}")))
}

/// Full certificate for the problem's regime, with `table_len` bound entries.
pub fn certify(problem: &ProblemInstance, epsilon: EpsilonChoice, table_len: usize) -> Result<ConvergenceCertificate> {
    let threshold = problem.threshold()?;
    let g = problem.nonlinearity();
    if !g.has_phi() {
        return Err(Error::CertificateFailure("no concavity modulus φ".into()));
    }
    let phi = |s: f64| g.phi(s).unwrap();
    let (factors, sigma) = match threshold {
        Threshold::Xi(xi) => {
            let s = sigma_star(problem, xi)?;
            (Factors::Stochastic { sigma1: s.sigma1, sigma2: s.sigma2, sigma_star: s.sigma_star }, s.sigma_star)
        }
        Threshold::Eta(eta) => {
            let (sharp, hash) = sigma_sharp(problem, eta)?;
            (Factors::Substochastic { sigma_sharp: sharp, sigma_hash: hash }, hash)
        }
    };
    let (epsilon, k) = match epsilon {
        EpsilonChoice::Auto => best_contraction(phi, sigma)?,
        EpsilonChoice::Fixed(e) => (e, contraction_factor(phi, sigma, e)?),
    };
    let beta = problem.source().beta();
    let c = (threshold.value() - beta) * (1.0 - sigma) / (1.0 - k);
    let table = (0..table_len).map(|m| c * k.powi(m as i32)).collect();
    Ok(ConvergenceCertificate {
        regime: problem.regime(),
        threshold,
        beta,
        beta0: problem.source().beta0(),
        t0: problem.source().t0(),
        factors,
        sigma,
        epsilon,
        k,
        c,
        degraded: sigma < DEGRADED_SIGMA,
        table,
    })
}

/// `(t, 𝔏(t))` at `count` uniformly spaced times in `(0, horizon]`.
pub fn l_function_curve(problem: &ProblemInstance, xi: f64, horizon: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    let data = LData::new(problem, xi)?;
    let ts: Vec<f64> = (1..=count).map(|i| horizon * i as f64 / count as f64).collect();
    let values = Execution::default().map(&ts, |&t| data.value(t));
    Ok(ts.into_iter().zip(values).collect())
}
