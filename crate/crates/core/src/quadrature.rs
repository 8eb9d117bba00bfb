//! Adaptive Simpson quadrature for smooth scalar integrands.

const MAX_DEPTH: u32 = 50;

/// `∫_a^b f` to roughly `tol` absolute error.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Pre-split so narrow features near the left end are not skipped.
    let pieces = 16;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == pieces { b } else { lo + h };
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = simpson(lo, hi, fa, fm, fb);
            refine(&f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, MAX_DEPTH)
        })
        .sum()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomials_and_exponentials() {
        assert_abs_diff_eq!(integrate(|x| x * x, 0.0, 3.0, 1e-12), 9.0, epsilon = 1e-11);
        assert_abs_diff_eq!(integrate(|x| (-x).exp(), 0.0, 40.0, 1e-13), 1.0 - (-40.0f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(integrate(f64::sqrt, 0.0, 1.0, 1e-12), 2.0 / 3.0, epsilon = 1e-9);
        assert_eq!(integrate(|x| x, 2.0, 2.0, 1e-12), 0.0);
    }
}
