//! Threshold roots `ξ − G(ξ) = β` and `γG(η) = (η − β)λ₋`.

use super::Nonlinearity;
use crate::error::{invalid, Error, Result};

const CEILING_EXPONENT: i32 = 60;

/// Root of `ξ − G(ξ) = β` above `β`.
pub fn solve_xi(g: &Nonlinearity, beta: f64) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!("β = {beta} must be finite and non-negative")));
    }
    bracket_and_bisect("xi - G(xi) - beta", beta, |xi| xi - g.eval(xi) - beta)
}

/// Root of `γG(η) = (η − β)λ₋` above `β`.
pub fn solve_eta(g: &Nonlinearity, beta: f64, gamma: f64, lambda_minus: f64) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!("β = {beta} must be finite and non-negative")));
    }
    if !(lambda_minus > 0.0 && lambda_minus.is_finite()) {
        return Err(invalid(format!("λ₋ = {lambda_minus} must be positive")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("γ = {gamma} must be positive")));
    }
    bracket_and_bisect("(eta - beta) lambda - gamma G(eta)", beta, |eta| {
        (eta - beta) * lambda_minus - gamma * g.eval(eta)
    })
}

/// Starting from `F(start) ≤ 0`, doubles an upper bracket until `F > 0`,
/// then bisects to machine resolution keeping `F(lo) ≤ 0 < F(hi)`.
fn bracket_and_bisect(what: &'static str, start: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let ceiling = 2f64.powi(CEILING_EXPONENT) * start.max(1.0);
    let mut lo = start;
    let mut hi = 2.0 * start.max(0.5);
    loop {
        let fhi = f(hi);
        if fhi.is_nan() {
            return Err(Error::NoRoot { what, ceiling });
        }
        if fhi > 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > ceiling {
            return Err(Error::NoRoot { what, ceiling });
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}
