//! Uniform grids and sampled functions on them.

use std::ops::{Add, Sub};

use crate::error::{Error, Result};

/// Uniform grid `t_j = a + j (b - a)/(n - 1)` with an odd node count `n >= 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Grid(format!(
                "interval [{a}, {b}] is empty or not finite"
            )));
        }
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "node count must be odd and >= 3, got {n}"
            )));
        }
        Ok(Grid { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.n {
            self.b
        } else {
            self.a + j as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }

    /// Grid with every cell halved (`2n - 1` nodes).
    pub fn refined(&self) -> Grid {
        Grid {
            n: 2 * self.n - 1,
            ..*self
        }
    }

    /// Indices of the nodes lying in `[lo, hi]`, with a relative slack for round-off.
    pub fn indices_in(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        let eps = 1e-12 * (self.b - self.a);
        (0..self.n).filter(move |&j| {
            let t = self.node(j);
            t >= lo - eps && t <= hi + eps
        })
    }

    /// Cell index `k` and local coordinate `theta` with `x = (1 - theta) t_k + theta t_{k+1}`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.step();
        let k = (((x - self.a) / h).floor().max(0.0) as usize).min(self.n - 2);
        let theta = ((x - self.node(k)) / h).clamp(0.0, 1.0);
        (k, theta)
    }
}

/// Values of a function at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("non-finite value {v}")));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self::from_fn(grid, |_| value)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Piecewise-linear interpolant at `x`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let (k, theta) = self.grid.locate(x);
        if theta == 0.0 {
            self.values[k]
        } else {
            (1.0 - theta) * self.values[k] + theta * self.values[k + 1]
        }
    }

    /// Interpolates onto another grid over the same interval.
    pub fn resample(&self, grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, |t| self.interpolate(t))
    }

    pub fn scale(&self, s: f64) -> GridFunction {
        self.map(|v| s * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    fn zip(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.zip(rhs, |a, b| a - b)
    }
}

/// An element `(u1, u2)` of the product space, sampled on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub u1: GridFunction,
    pub u2: GridFunction,
}

impl Pair {
    pub fn new(u1: GridFunction, u2: GridFunction) -> Result<Self> {
        if u1.grid() != u2.grid() {
            return Err(Error::Grid("components live on different grids".into()));
        }
        Ok(Pair { u1, u2 })
    }

    pub fn constant(grid: Grid, values: [f64; 2]) -> Self {
        Pair {
            u1: GridFunction::constant(grid, values[0]),
            u2: GridFunction::constant(grid, values[1]),
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, [0.0, 0.0])
    }

    pub fn grid(&self) -> Grid {
        self.u1.grid()
    }

    pub fn component(&self, i: usize) -> &GridFunction {
        match i {
            0 => &self.u1,
            1 => &self.u2,
            _ => panic!("component index {i} out of range"),
        }
    }

    pub fn components(&self) -> [&GridFunction; 2] {
        [&self.u1, &self.u2]
    }

    /// `max(||u1||, ||u2||)`.
    pub fn norm(&self) -> f64 {
        self.u1.sup_norm().max(self.u2.sup_norm())
    }

    pub fn scale(&self, s: f64) -> Pair {
        Pair {
            u1: self.u1.scale(s),
            u2: self.u2.scale(s),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Copy) -> Pair {
        Pair {
            u1: self.u1.map(f),
            u2: self.u2.map(f),
        }
    }

    pub fn resample(&self, grid: Grid) -> Pair {
        Pair {
            u1: self.u1.resample(grid),
            u2: self.u2.resample(grid),
        }
    }

    /// Stacked nodal values `[u1..., u2...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.u1.values().to_vec();
        v.extend_from_slice(self.u2.values());
        v
    }

    pub fn from_vec(grid: Grid, v: &[f64]) -> Result<Self> {
        let n = grid.len();
        if v.len() != 2 * n {
            return Err(Error::Grid(format!(
                "expected {} values, got {}",
                2 * n,
                v.len()
            )));
        }
        Pair::new(
            GridFunction::new(grid, v[..n].to_vec())?,
            GridFunction::new(grid, v[n..].to_vec())?,
        )
    }

    pub fn min_value(&self) -> f64 {
        self.u1
            .values()
            .iter()
            .chain(self.u2.values())
            .fold(f64::INFINITY, |m, v| m.min(*v))
    }
}

impl Add for &Pair {
    type Output = Pair;
    fn add(self, rhs: &Pair) -> Pair {
        Pair {
            u1: &self.u1 + &rhs.u1,
            u2: &self.u2 + &rhs.u2,
        }
    }
}

impl Sub for &Pair {
    type Output = Pair;
    fn sub(self, rhs: &Pair) -> Pair {
        Pair {
            u1: &self.u1 - &rhs.u1,
            u2: &self.u2 - &rhs.u2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        assert!(Grid::new(0.0, 1.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(1.0, 1.0, 5).is_err());
        let g = Grid::new(0.0, 1.0, 5).unwrap();
        assert_eq!(
            g.nodes().collect::<Vec<_>>(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(g.refined().len(), 9);
        assert_eq!(
            g.indices_in(0.0, 4.0 / 7.0).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        assert_eq!(g.locate(1.0), (3, 1.0));
        assert_eq!(g.locate(0.5), (2, 0.0));
    }

    #[test]
    fn interpolation_is_exact_on_lines() {
        let g = Grid::new(0.0, 2.0, 9).unwrap();
        let f = GridFunction::from_fn(g, |t| 3.0 * t - 1.0);
        for x in [0.0, 0.1, 0.77, 1.3, 2.0] {
            assert!((f.interpolate(x) - (3.0 * x - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn pair_norm_and_vec() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let p = Pair::constant(g, [1.5, 0.2]);
        assert_eq!(p.norm(), 1.5);
        assert_eq!(Pair::zeros(g).norm(), 0.0);
        let back = Pair::from_vec(g, &p.to_vec()).unwrap();
        assert_eq!(back, p);
        assert!(GridFunction::new(g, vec![0.0, f64::NAN, 1.0]).is_err());
    }
}
