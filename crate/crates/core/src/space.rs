//! Finite quadrature representations of the measure space and the time axis.
//!
//! Every function on the space is a plain slice indexed by point; the space
//! carries the positive quadrature weights that realize `∫_X · dμ`. Box
//! spaces additionally remember their tensor geometry so that the Neumann
//! heat kernel can be evaluated at point coordinates.

use crate::error::{invalid, Error, Result};

/// Tensor geometry of a box space `[0, length]^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGeometry {
    pub dim: usize,
    pub points_per_axis: usize,
    pub length: f64,
}

impl BoxGeometry {
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.points_per_axis - 1) as f64
    }

    /// Per-axis indices of a flat point index (axis 0 varies slowest).
    pub fn axis_indices(&self, point: usize) -> [usize; 2] {
        match self.dim {
            1 => [point, 0],
            _ => [point / self.points_per_axis, point % self.points_per_axis],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasureSpace {
    weights: Vec<f64>,
    coords: Vec<[f64; 2]>,
    geometry: Option<BoxGeometry>,
    label: String,
}

impl DiscreteMeasureSpace {
    /// One abstract point per weight.
    pub fn finite(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("weight list is empty"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(invalid(format!("weight {i} = {w} is not positive")));
        }
        Ok(Self {
            weights: weights.to_vec(),
            coords: (0..weights.len()).map(|i| [i as f64, 0.0]).collect(),
            geometry: None,
            label: format!("finite({})", weights.len()),
        })
    }

    /// Tensor grid on `[0, length]^dim` with trapezoidal weights.
    pub fn unit_box(dim: usize, points_per_axis: usize, length: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Unsupported(format!("box dimension {dim}")));
        }
        if points_per_axis < 2 {
            return Err(invalid("a box needs at least 2 points per axis"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid(format!("box side length {length} is not positive")));
        }
        let geometry = BoxGeometry { dim, points_per_axis, length };
        let h = geometry.spacing();
        let axis_weight = |i: usize| {
            if i == 0 || i == points_per_axis - 1 {
                0.5 * h
            } else {
                h
            }
        };
        let n = points_per_axis.pow(dim as u32);
        let mut weights = Vec::with_capacity(n);
        let mut coords = Vec::with_capacity(n);
        for p in 0..n {
            let [i, j] = geometry.axis_indices(p);
            match dim {
                1 => {
                    weights.push(axis_weight(i));
                    coords.push([i as f64 * h, 0.0]);
                }
                _ => {
                    weights.push(axis_weight(i) * axis_weight(j));
                    coords.push([i as f64 * h, j as f64 * h]);
                }
            }
        }
        Ok(Self {
            weights,
            coords,
            geometry: Some(geometry),
            label: format!("box(dim={dim}, n={points_per_axis}, L={length})"),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, point: usize) -> f64 {
        self.weights[point]
    }

    /// Coordinates of a point; finite spaces use the point index on axis 0.
    pub fn coord(&self, point: usize) -> [f64; 2] {
        self.coords[point]
    }

    pub fn geometry(&self) -> Option<&BoxGeometry> {
        self.geometry.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ_y f(y)·μ(y)`.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.len() {
            return Err(invalid(format!(
                "function has {} values, space has {} points",
                f.len(),
                self.len()
            )));
        }
        Ok(f.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }
}

/// Uniform grid `0 = t_0 < … < t_n = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid(format!("time horizon {horizon} is not positive")));
        }
        if steps == 0 {
            return Err(invalid("time grid needs at least one step"));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j == self.steps {
            self.horizon
        } else {
            j as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(|j| self.node(j))
    }

    /// Same horizon, `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(invalid("refinement factor must be positive"));
        }
        Self::new(self.horizon, self.steps * factor)
    }
}

/// Values over (space point × time node), stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    points: usize,
    nodes: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(points: usize, nodes: usize) -> Self {
        Self { points, nodes, values: vec![0.0; points * nodes] }
    }

    pub fn constant(points: usize, nodes: usize, value: f64) -> Self {
        Self { points, nodes, values: vec![value; points * nodes] }
    }

    pub fn from_fn(points: usize, nodes: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(points * nodes);
        for x in 0..points {
            for j in 0..nodes {
                values.push(f(x, j));
            }
        }
        Self { points, nodes, values }
    }

    /// Builds from one row of time values per point.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nodes = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || nodes == 0 {
            return Err(invalid("grid function needs at least one point and one node"));
        }
        if rows.iter().any(|r| r.len() != nodes) {
            return Err(invalid("grid function rows have unequal lengths"));
        }
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid function has non-finite values"));
        }
        Ok(Self { points: rows.len(), nodes, values })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn get(&self, point: usize, node: usize) -> f64 {
        self.values[point * self.nodes + node]
    }

    pub fn set(&mut self, point: usize, node: usize, value: f64) {
        self.values[point * self.nodes + node] = value;
    }

    pub fn row(&self, point: usize) -> &[f64] {
        &self.values[point * self.nodes..(point + 1) * self.nodes]
    }

    pub fn row_mut(&mut self, point: usize) -> &mut [f64] {
        &mut self.values[point * self.nodes..(point + 1) * self.nodes]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Values at one time node, one per point.
    pub fn column(&self, node: usize) -> Vec<f64> {
        (0..self.points).map(|x| self.get(x, node)).collect()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.points == other.points && self.nodes == other.nodes
    }

    pub fn check_shape(&self, points: usize, nodes: usize) -> Result<()> {
        if self.points != points || self.nodes != nodes {
            return Err(invalid(format!(
                "grid function is {}x{}, expected {points}x{nodes}",
                self.points, self.nodes
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { points: self.points, nodes: self.nodes, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(self.same_shape(other), "grid function shape mismatch");
        Self {
            points: self.points,
            nodes: self.nodes,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sup |self − other|`.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "grid function shape mismatch");
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `max (self − other)`, signed.
    pub fn max_excess_over(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "grid function shape mismatch");
        self.values.iter().zip(&other.values).fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b))
    }

    /// Keeps every `factor`-th node; maps a refined grid back onto the coarse one.
    pub fn restrict_time(&self, factor: usize) -> Self {
        let coarse = (self.nodes - 1) / factor + 1;
        Self::from_fn(self.points, coarse, |x, j| self.get(x, j * factor))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finite_spaces() {
        assert_eq!(DiscreteMeasureSpace::finite(&[1.0]).unwrap().total_mass(), 1.0);
        let s = DiscreteMeasureSpace::finite(&[0.5, 0.5]).unwrap();
        assert_eq!((s.len(), s.total_mass()), (2, 1.0));
        assert_eq!(DiscreteMeasureSpace::finite(&[1.0; 4]).unwrap().total_mass(), 4.0);
    }

    #[test]
    fn finite_space_rejects_bad_weights() {
        assert!(matches!(DiscreteMeasureSpace::finite(&[]), Err(Error::InvalidArgument(_))));
        assert!(matches!(DiscreteMeasureSpace::finite(&[1.0, 0.0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(DiscreteMeasureSpace::finite(&[-1.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn box_weights() {
        let s = DiscreteMeasureSpace::unit_box(1, 3, 1.0).unwrap();
        assert_eq!(s.weights(), &[0.25, 0.5, 0.25]);
        let s = DiscreteMeasureSpace::unit_box(1, 2, 2.0).unwrap();
        assert_eq!(s.weights(), &[1.0, 1.0]);
        let s = DiscreteMeasureSpace::unit_box(2, 3, 1.0).unwrap();
        assert_eq!(s.len(), 9);
        assert_relative_eq!(s.weight(0), 1.0 / 16.0);
        assert_relative_eq!(s.weight(4), 0.25);
        assert_relative_eq!(s.total_mass(), 1.0);
        assert_eq!(s.coord(5), [0.5, 1.0]);
    }

    #[test]
    fn box_rejects_bad_dimension() {
        assert!(matches!(DiscreteMeasureSpace::unit_box(3, 3, 1.0), Err(Error::Unsupported(_))));
        assert!(matches!(DiscreteMeasureSpace::unit_box(0, 3, 1.0), Err(Error::Unsupported(_))));
        assert!(DiscreteMeasureSpace::unit_box(1, 1, 1.0).is_err());
    }

    #[test]
    fn box_integrates_linear_functions_exactly() {
        let s = DiscreteMeasureSpace::unit_box(2, 7, 3.0).unwrap();
        let f: Vec<f64> = (0..s.len())
            .map(|p| {
                let [x, y] = s.coord(p);
                2.0 + 0.5 * x - 1.5 * y + 0.25 * x * y
            })
            .collect();
        // ∫∫ (2 + x/2 − 3y/2 + xy/4) over [0,3]² = 18 + 6.75 − 20.25 + 5.0625
        assert_relative_eq!(s.integrate(&f).unwrap(), 9.5625, epsilon = 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let s = DiscreteMeasureSpace::finite(&[0.5, 0.5]).unwrap();
        assert_eq!(s.integrate(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(s.integrate(&[2.0, 0.0]).unwrap(), 1.0);
        let s = DiscreteMeasureSpace::finite(&[0.3, 0.7, 1.1]).unwrap();
        assert_eq!(s.integrate(&[0.0, 1.0, 0.0]).unwrap(), 0.7);
        assert!(s.integrate(&[1.0]).is_err());
    }

    #[test]
    fn time_grid_nodes() {
        let g = TimeGrid::new(5.0, 200).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(200), 5.0);
        assert_relative_eq!(g.dt(), 0.025);
        assert!(g.nodes().zip(g.nodes().skip(1)).all(|(a, b)| b > a));
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn restrict_time_picks_coarse_nodes() {
        let fine = GridFunction::from_fn(2, 9, |x, j| (x * 100 + j) as f64);
        let coarse = fine.restrict_time(4);
        assert_eq!(coarse.nodes(), 3);
        assert_eq!(coarse.row(1), &[100.0, 104.0, 108.0]);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn integrate_is_linear(
                w in proptest::collection::vec(0.01f64..10.0, 1..8),
                a in -5.0f64..5.0,
                b in -5.0f64..5.0,
                seed in any::<u64>(),
            ) {
                let s = DiscreteMeasureSpace::finite(&w).unwrap();
                let f: Vec<f64> = (0..w.len()).map(|i| ((seed >> (i % 60)) & 0xff) as f64 / 17.0).collect();
                let h: Vec<f64> = (0..w.len()).map(|i| (i as f64).sin()).collect();
                let mix: Vec<f64> = f.iter().zip(&h).map(|(p, q)| a * p + b * q).collect();
                let lhs = s.integrate(&mix).unwrap();
                let rhs = a * s.integrate(&f).unwrap() + b * s.integrate(&h).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
            }

            #[test]
            fn integrate_preserves_sign(
                w in proptest::collection::vec(0.01f64..10.0, 1..8),
                f in proptest::collection::vec(0.0f64..10.0, 8),
            ) {
                let s = DiscreteMeasureSpace::finite(&w).unwrap();
                prop_assert!(s.integrate(&f[..w.len()]).unwrap() >= 0.0);
            }
        }
    }
}
