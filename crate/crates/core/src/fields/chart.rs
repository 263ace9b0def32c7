use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Number of seeded random interior points added to the grid when a
/// pointwise contract is checked "on U".
pub const RANDOM_INTERIOR_POINTS: usize = 32;

/// A single coordinate chart: a product of closed intervals with a
/// rectangular sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    bounds: Vec<(f64, f64)>,
    grid: Vec<usize>,
}

impl Chart {
    pub fn new(bounds: Vec<(f64, f64)>, grid: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidChart("chart must have dimension ≥ 1".into()));
        }
        if bounds.len() != grid.len() {
            return Err(Error::InvalidChart(format!(
                "{} intervals but {} grid counts",
                bounds.len(),
                grid.len()
            )));
        }
        for (lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidChart(format!("empty interval [{lo}, {hi}]")));
            }
        }
        if grid.iter().any(|&n| n < 2) {
            return Err(Error::InvalidChart("grid counts must be ≥ 2".into()));
        }
        Ok(Self { bounds, grid })
    }

    /// Unit cube `[0,1]^d` with `n` samples per axis.
    pub fn unit_cube(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![(0.0, 1.0); d], vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    /// Replaces every per-axis sample count.
    pub fn with_grid_count(&self, n: usize) -> Result<Self> {
        Self::new(self.bounds.clone(), vec![n; self.dim()])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.bounds)
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Strictly interior, with enough margin for finite differences.
    pub fn contains_interior(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.bounds)
                .all(|(v, (lo, hi))| *v > *lo && *v < *hi)
    }

    /// All points of the rectangular grid, axis 0 slowest.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .bounds
            .iter()
            .zip(&self.grid)
            .map(|((lo, hi), &n)| {
                (0..n)
                    .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                    .collect()
            })
            .collect();
        let total: usize = self.grid.iter().product();
        let mut points = Vec::with_capacity(total);
        let mut index = vec![0usize; self.dim()];
        for _ in 0..total {
            points.push(index.iter().enumerate().map(|(i, &k)| axes[i][k]).collect());
            for i in (0..self.dim()).rev() {
                index[i] += 1;
                if index[i] < self.grid[i] {
                    break;
                }
                index[i] = 0;
            }
        }
        points
    }

    /// Seeded random interior points, kept 5% of the width away from the
    /// boundary so finite differences stay inside the chart.
    pub fn random_interior_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.bounds
                    .iter()
                    .map(|(lo, hi)| {
                        let margin = 0.05 * (hi - lo);
                        rng.random_range((lo + margin)..(hi - margin))
                    })
                    .collect()
            })
            .collect()
    }

    /// The evaluation set for pointwise contracts: the full grid plus 32
    /// seeded random interior points.
    pub fn evaluation_points(&self) -> Vec<Vec<f64>> {
        let mut points = self.grid_points();
        points.extend(self.random_interior_points(RANDOM_INTERIOR_POINTS, 0xC0FFEE));
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_linspace_and_order() {
        let chart = Chart::new(vec![(0.0, 1.0)], vec![3]).unwrap();
        assert_eq!(chart.grid_points(), vec![vec![0.0], vec![0.5], vec![1.0]]);

        // Axis 0 varies slowest.
        let chart = Chart::new(vec![(0.0, 1.0), (2.0, 3.0)], vec![2, 2]).unwrap();
        assert_eq!(
            chart.grid_points(),
            vec![
                vec![0.0, 2.0],
                vec![0.0, 3.0],
                vec![1.0, 2.0],
                vec![1.0, 3.0]
            ]
        );
    }

    #[test]
    fn containment_and_interior() {
        let chart = Chart::unit_cube(2, 4).unwrap();
        assert!(chart.contains(&[0.0, 1.0]));
        assert!(!chart.contains(&[0.0, 1.0 + 1e-9]));
        assert!(chart.contains_interior(&[0.5, 0.5]));
        assert!(!chart.contains_interior(&[0.0, 0.5]));
        assert!(!chart.contains(&[0.5]));
    }

    #[test]
    fn evaluation_points_are_deterministic() {
        let chart = Chart::unit_cube(3, 3).unwrap();
        let a = chart.evaluation_points();
        let b = chart.evaluation_points();
        assert_eq!(a, b);
        assert_eq!(a.len(), 27 + RANDOM_INTERIOR_POINTS);
        for x in &a {
            assert!(chart.contains(x));
        }
    }

    #[test]
    fn random_points_respect_margin() {
        let chart = Chart::new(vec![(-1.0, 1.0), (0.0, 2.0)], vec![2, 2]).unwrap();
        for x in chart.random_interior_points(100, 7) {
            assert!(x[0] >= -0.9 && x[0] <= 0.9);
            assert!(x[1] >= 0.1 && x[1] <= 1.9);
        }
    }

    #[test]
    fn invalid_charts_are_rejected() {
        assert!(Chart::new(vec![], vec![]).is_err());
        assert!(Chart::new(vec![(0.0, 1.0)], vec![1]).is_err());
        assert!(Chart::new(vec![(1.0, 0.0)], vec![2]).is_err());
        assert!(Chart::new(vec![(0.0, 1.0)], vec![2, 2]).is_err());
    }

    #[test]
    fn with_grid_count_keeps_bounds() {
        let chart = Chart::new(vec![(-2.0, 5.0)], vec![3]).unwrap();
        let finer = chart.with_grid_count(9).unwrap();
        assert_eq!(finer.bounds(), chart.bounds());
        assert_eq!(finer.grid(), &[9]);
    }
}
