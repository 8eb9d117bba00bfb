//! Trapezoidal Volterra convolution against a cached kernel table.

use crate::exec::Execution;
use crate::kernel::KernelTable;
use crate::space::GridFunction;

/// `out(x, t_n) = Δt Σ_{j=0}^{n} w_{nj} Σ_y P_{n-j}[x, y] F(y, t_j)` with
/// trapezoid weights (`½` at both ends); `out(·, 0) = 0`.
pub(crate) fn convolve(table: &KernelTable, dt: f64, integrand: &GridFunction, exec: Execution) -> GridFunction {
    let (points, nodes) = (integrand.points(), integrand.nodes());
    debug_assert_eq!(points, table.points());
    debug_assert!(nodes <= table.lags());
    // time-major copy so the inner products run over contiguous memory
    let by_time: Vec<f64> = (0..nodes)
        .flat_map(|j| (0..points).map(move |y| (j, y)))
        .map(|(j, y)| integrand.get(y, j))
        .collect();
    let mut out = GridFunction::zeros(points, nodes);
    exec.for_each_row(out.as_mut_slice(), nodes, |x, row| {
        for (n, slot) in row.iter_mut().enumerate().skip(1) {
            let mut acc = 0.0;
            for j in 0..=n {
                let p = table.row(n - j, x);
                let f = &by_time[j * points..(j + 1) * points];
                let s: f64 = p.iter().zip(f).map(|(a, b)| a * b).sum();
                acc += if j == 0 || j == n { 0.5 * s } else { s };
            }
            *slot = dt * acc;
        }
    });
    out
}

/// `out(x, t_n) = Σ_y P_n[x, y] u₀(y)`.
pub(crate) fn propagate(table: &KernelTable, u0: &[f64], nodes: usize) -> GridFunction {
    GridFunction::from_fn(u0.len(), nodes, |x, n| table.row(n, x).iter().zip(u0).map(|(p, u)| p * u).sum())
}
