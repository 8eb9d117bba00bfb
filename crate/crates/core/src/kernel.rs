//! Heat kernels `K(x, y; t)` on discrete measure spaces.
//!
//! Two families ship: the transition semigroup `e^{-tQ}` of a finite-state
//! generator, and the Neumann heat kernel of a box written as a truncated
//! cosine series. Either can be damped by a mass term `m`, which multiplies
//! the kernel by `e^{-mt}` and shifts both decay rates by `m`.
//!
//! Solvers never evaluate kernels pointwise. They consume a [`KernelTable`]
//! holding the transition matrices `P_j[x, y] = K(x, y; jΔt)·μ(y)` at every
//! grid lag.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::space::{BoxGeometry, DiscreteMeasureSpace, TimeGrid};

/// Row sums below this magnitude count as conservative.
const CONSERVATION_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Mass identically one.
    Stochastic,
    /// Mass sandwiched between `e^{-tλ₊}` and `e^{-tλ₋}`.
    Substochastic,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Stochastic => "stochastic",
            Regime::Substochastic => "substochastic",
        }
    }
}

#[derive(Debug, Clone)]
enum Family {
    Matrix { generator: DMatrix<f64> },
    NeumannBox { geometry: BoxGeometry, diffusivity: f64, cutoff: usize },
}

#[derive(Debug, Clone)]
pub struct Kernel {
    space: Arc<DiscreteMeasureSpace>,
    family: Family,
    damping: f64,
    lambda_minus: f64,
    lambda_plus: f64,
}

impl Kernel {
    /// Kernel of the semigroup `e^{-tQ}` on a finite space.
    ///
    /// `K(x, y; t) = [e^{-tQ}]_{xy} / μ(y)`, so the mass at `x` is the row
    /// sum of `e^{-tQ}`. The decay rates are the extreme row sums of `Q`.
    pub fn matrix_semigroup(space: Arc<DiscreteMeasureSpace>, generator: DMatrix<f64>) -> Result<Self> {
        let n = space.len();
        if generator.nrows() != n || generator.ncols() != n {
            return Err(invalid(format!(
                "generator is {}x{}, space has {n} points",
                generator.nrows(),
                generator.ncols()
            )));
        }
        if let Some(value) = generator.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("generator has non-finite entry {value}")));
        }
        for row in 0..n {
            for col in 0..n {
                let value = generator[(row, col)];
                if row != col && value > 0.0 {
                    return Err(Error::InvalidGenerator { row, col, value });
                }
            }
        }
        let row_sums: Vec<f64> = generator.row_iter().map(|r| r.sum()).collect();
        let scale = generator.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let clean = |s: f64| if s.abs() <= CONSERVATION_EPS * scale { 0.0 } else { s };
        let min = clean(row_sums.iter().copied().fold(f64::INFINITY, f64::min));
        let max = clean(row_sums.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        if min < 0.0 {
            return Err(invalid(format!("generator has negative row sum {min}")));
        }
        Ok(Self {
            space,
            family: Family::Matrix { generator },
            damping: 0.0,
            lambda_minus: min,
            lambda_plus: max,
        })
    }

    /// Neumann heat kernel of `∂_t − D·Δ` on a box, truncated after `cutoff`
    /// cosine modes per axis.
    pub fn neumann_box(space: Arc<DiscreteMeasureSpace>, diffusivity: f64, cutoff: usize) -> Result<Self> {
        let geometry = *space
            .geometry()
            .ok_or_else(|| invalid("the Neumann kernel needs a box space"))?;
        if !(diffusivity.is_finite() && diffusivity > 0.0) {
            return Err(invalid(format!("diffusivity {diffusivity} is not positive")));
        }
        Ok(Self {
            space,
            family: Family::NeumannBox { geometry, diffusivity, cutoff },
            damping: 0.0,
            lambda_minus: 0.0,
            lambda_plus: 0.0,
        })
    }

    /// Multiplies the kernel by `e^{-mt}`.
    pub fn damp(&self, m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(invalid(format!("damping {m} is not positive")));
        }
        Ok(Self {
            damping: self.damping + m,
            lambda_minus: self.lambda_minus + m,
            lambda_plus: self.lambda_plus + m,
            ..self.clone()
        })
    }

    /// Overrides the declared decay rates. Used to construct deliberately
    /// mis-declared kernels for checker tests.
    pub fn with_declared_rates(&self, lambda_minus: f64, lambda_plus: f64) -> Result<Self> {
        if !(0.0 <= lambda_minus && lambda_minus <= lambda_plus) {
            return Err(invalid(format!("need 0 ≤ λ₋ ≤ λ₊, got {lambda_minus}, {lambda_plus}")));
        }
        Ok(Self { lambda_minus, lambda_plus, ..self.clone() })
    }

    pub fn space(&self) -> &Arc<DiscreteMeasureSpace> {
        &self.space
    }

    pub fn lambda_minus(&self) -> f64 {
        self.lambda_minus
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn regime(&self) -> Regime {
        if self.lambda_plus == 0.0 {
            Regime::Stochastic
        } else {
            Regime::Substochastic
        }
    }

    pub fn label(&self) -> String {
        let base = match &self.family {
            Family::Matrix { generator } => format!("matrix({}x{})", generator.nrows(), generator.ncols()),
            Family::NeumannBox { diffusivity, cutoff, .. } => {
                format!("neumann_box(D={diffusivity}, cutoff={cutoff})")
            }
        };
        if self.damping > 0.0 {
            format!("{base} damped by {}", self.damping)
        } else {
            base
        }
    }

    /// `Q + m·I` for matrix kernels: the generator whose semigroup this kernel is.
    pub fn effective_generator(&self) -> Option<DMatrix<f64>> {
        match &self.family {
            Family::Matrix { generator } => {
                let n = generator.nrows();
                Some(generator + DMatrix::<f64>::identity(n, n) * self.damping)
            }
            Family::NeumannBox { .. } => None,
        }
    }

    /// Bound on the dropped cosine-series tail of the kernel at time `t`
    /// (zero for matrix kernels).
    pub fn series_tail_bound(&self, t: f64) -> f64 {
        match &self.family {
            Family::Matrix { .. } => 0.0,
            Family::NeumannBox { geometry, diffusivity, cutoff } => {
                let a = diffusivity * (PI / geometry.length).powi(2) * t;
                let n = *cutoff as f64;
                let tail = (-a * (n + 1.0).powi(2)).exp() / (1.0 - (-a * (2.0 * n + 3.0)).exp());
                let axis_max = (1.0 + 2.0 * n) / geometry.length;
                let axis_tail = 2.0 / geometry.length * tail;
                // (K₁ + δ)^d − K₁^d with |K₁| ≤ axis_max
                match geometry.dim {
                    1 => axis_tail,
                    _ => 2.0 * axis_max * axis_tail + axis_tail * axis_tail,
                }
            }
        }
    }

    /// `K(x, y; t)` for `t > 0`.
    pub fn evaluate(&self, x: usize, y: usize, t: f64) -> f64 {
        let decay = (-self.damping * t).exp();
        match &self.family {
            Family::Matrix { generator } => {
                let p = (generator * -t).exp();
                decay * p[(x, y)] / self.space.weight(y)
            }
            Family::NeumannBox { geometry, diffusivity, cutoff } => {
                let (xi, yi) = (geometry.axis_indices(x), geometry.axis_indices(y));
                let h = geometry.spacing();
                let mut value = decay;
                for axis in 0..geometry.dim {
                    value *= neumann_axis(
                        xi[axis] as f64 * h,
                        yi[axis] as f64 * h,
                        t,
                        geometry.length,
                        *diffusivity,
                        *cutoff,
                    );
                }
                value
            }
        }
    }

    /// Transition matrix `P[x, y] = K(x, y; t)·μ(y)`; the identity at `t = 0`.
    pub fn transition(&self, t: f64) -> DMatrix<f64> {
        let n = self.space.len();
        if t == 0.0 {
            return DMatrix::identity(n, n);
        }
        let decay = (-self.damping * t).exp();
        match &self.family {
            Family::Matrix { generator } => (generator * -t).exp() * decay,
            Family::NeumannBox { geometry, diffusivity, cutoff } => {
                let na = geometry.points_per_axis;
                let h = geometry.spacing();
                let axis: Vec<f64> = (0..na * na)
                    .map(|k| {
                        let (i, j) = (k / na, k % na);
                        neumann_axis(i as f64 * h, j as f64 * h, t, geometry.length, *diffusivity, *cutoff)
                    })
                    .collect();
                DMatrix::from_fn(n, n, |x, y| {
                    let (xi, yi) = (geometry.axis_indices(x), geometry.axis_indices(y));
                    let mut k = decay;
                    for a in 0..geometry.dim {
                        k *= axis[xi[a] * na + yi[a]];
                    }
                    k * self.space.weight(y)
                })
            }
        }
    }

    /// `∫_X K(x, y; t) dμ(y)`.
    pub fn mass(&self, x: usize, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(invalid(format!("kernel mass needs t > 0, got {t}")));
        }
        if x >= self.space.len() {
            return Err(invalid(format!("point {x} out of range")));
        }
        Ok(self.transition(t).row(x).sum())
    }

    /// Samples the mass sandwich `e^{-tλ₊} ≤ mass(x, t) ≤ e^{-tλ₋}` and the
    /// sign of the kernel density.
    pub fn verify_bounds(&self, xs: &[usize], ts: &[f64], tolerance: f64) -> MassReport {
        let mut samples = Vec::with_capacity(xs.len() * ts.len());
        let mut min_density = f64::INFINITY;
        for &t in ts.iter().filter(|t| **t > 0.0) {
            let p = self.transition(t);
            for &x in xs.iter().filter(|x| **x < self.space.len()) {
                let row = p.row(x);
                for (y, v) in row.iter().enumerate() {
                    min_density = min_density.min(v / self.space.weight(y));
                }
                samples.push(MassSample {
                    point: x,
                    t,
                    mass: row.sum(),
                    lower: (-t * self.lambda_plus).exp(),
                    upper: (-t * self.lambda_minus).exp(),
                });
            }
        }
        MassReport::new(samples, min_density, tolerance)
    }
}

/// One axis factor of the Neumann heat kernel on `[0, length]`.
fn neumann_axis(a: f64, b: f64, t: f64, length: f64, diffusivity: f64, cutoff: usize) -> f64 {
    let w = PI / length;
    let rate = diffusivity * w * w * t;
    let mut sum = 1.0;
    for k in 1..=cutoff {
        let kf = k as f64;
        let decay = (-rate * kf * kf).exp();
        if decay == 0.0 {
            break;
        }
        sum += 2.0 * (kf * w * a).cos() * (kf * w * b).cos() * decay;
    }
    sum / length
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassSample {
    pub point: usize,
    pub t: f64,
    pub mass: f64,
    /// `e^{-tλ₊}`
    pub lower: f64,
    /// `e^{-tλ₋}`
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassReport {
    pub samples: Vec<MassSample>,
    /// `max(0, lower − mass)` over samples.
    pub worst_lower_violation: f64,
    /// `max(0, mass − upper)` over samples.
    pub worst_upper_violation: f64,
    /// Smallest sampled kernel density value.
    pub min_density: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl MassReport {
    fn new(samples: Vec<MassSample>, min_density: f64, tolerance: f64) -> Self {
        let worst_lower_violation = samples.iter().fold(0.0f64, |m, s| m.max(s.lower - s.mass));
        let worst_upper_violation = samples.iter().fold(0.0f64, |m, s| m.max(s.mass - s.upper));
        let pass = !samples.is_empty()
            && worst_lower_violation <= tolerance
            && worst_upper_violation <= tolerance
            && min_density >= -tolerance;
        Self { samples, worst_lower_violation, worst_upper_violation, min_density, tolerance, pass }
    }

    pub fn worst_violation(&self) -> f64 {
        self.worst_lower_violation
            .max(self.worst_upper_violation)
            .max(-self.min_density.min(0.0))
    }
}

/// Transition matrices at every lag `jΔt`, `j = 0..=n_t`, stored lag-major.
#[derive(Debug, Clone)]
pub struct KernelTable {
    points: usize,
    lags: usize,
    data: Vec<f64>,
}

impl KernelTable {
    /// Matrix kernels use the semigroup law `P_j = P_{j-1}·P_1`; box kernels
    /// evaluate the series at every lag.
    pub fn build(kernel: &Kernel, grid: &TimeGrid) -> Self {
        let n = kernel.space.len();
        let lags = grid.len();
        let mut data = Vec::with_capacity(lags * n * n);
        let mut push = |m: &DMatrix<f64>| {
            for x in 0..n {
                for y in 0..n {
                    data.push(m[(x, y)]);
                }
            }
        };
        match kernel.family {
            Family::Matrix { .. } => {
                let step = kernel.transition(grid.dt());
                let mut current = DMatrix::<f64>::identity(n, n);
                push(&current);
                for _ in 1..lags {
                    current = &current * &step;
                    push(&current);
                }
            }
            Family::NeumannBox { .. } => {
                for j in 0..lags {
                    push(&kernel.transition(j as f64 * grid.dt()));
                }
            }
        }
        Self { points: n, lags, data }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    /// Row `x` of the lag-`j` transition matrix.
    #[inline]
    pub fn row(&self, lag: usize, x: usize) -> &[f64] {
        let start = (lag * self.points + x) * self.points;
        &self.data[start..start + self.points]
    }
}
