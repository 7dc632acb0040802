//! Kink-aware composite Simpson quadrature and the discretized operator `T`.
//!
//! The discrete operator uses one Simpson panel per grid cell, with cells
//! further split at vertical kinks of the kernel. Every node is a panel
//! boundary, so the diagonal kink `s = t_j` of row `j` never falls inside a
//! panel. Between nodes `u` is interpolated linearly.

use crate::defaults;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Pair};
use crate::kernels::{KernelSpec, Kink};
use crate::system::SystemSpec;

/// Composite Simpson rule on `[a, b]`, with panel boundaries at `breakpoints`
/// and `subintervals` Simpson cells (rounded up to even) per panel.
///
/// Breakpoints that coincide with an endpoint are ignored; ones outside
/// `[a, b]` are rejected.
pub fn integrate<F, E>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    subintervals: usize,
) -> std::result::Result<f64, E>
where
    F: FnMut(f64) -> std::result::Result<f64, E>,
    E: From<Error>,
{
    let edges = panel_edges(a, b, breakpoints)?;
    let m = subintervals.max(2).next_multiple_of(2);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (p, q) = (w[0], w[1]);
        let h = (q - p) / m as f64;
        let mut sum = f(p)? + f(q)?;
        for k in 1..m {
            let x = p + k as f64 * h;
            sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x)?;
        }
        total += sum * h / 3.0;
    }
    Ok(total)
}

/// [`integrate`] for infallible integrands.
pub fn integrate_fn(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    subintervals: usize,
) -> Result<f64> {
    integrate(|x| Ok::<_, Error>(f(x)), a, b, breakpoints, subintervals)
}

fn panel_edges(a: f64, b: f64, breakpoints: &[f64]) -> Result<Vec<f64>> {
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidPanel(format!("empty interval [{a}, {b}]")));
    }
    let eps = 1e-13 * (b - a).max(1.0);
    let mut inner = Vec::with_capacity(breakpoints.len());
    for &x in breakpoints {
        if !x.is_finite() || x < a - eps || x > b + eps {
            return Err(Error::InvalidPanel(format!(
                "breakpoint {x} outside [{a}, {b}]"
            )));
        }
        if x > a + eps && x < b - eps {
            inner.push(x);
        }
    }
    inner.sort_by(f64::total_cmp);
    inner.dedup_by(|x, y| (*x - *y).abs() <= eps);
    let mut edges = Vec::with_capacity(inner.len() + 2);
    edges.push(a);
    edges.extend(inner);
    edges.push(b);
    Ok(edges)
}

/// A quadrature node of the discrete operator with its interpolation data.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Sample {
    s: f64,
    cell: usize,
    theta: f64,
}

impl Sample {
    fn value(&self, u: &[f64]) -> f64 {
        if self.theta == 0.0 {
            u[self.cell]
        } else {
            (1.0 - self.theta) * u[self.cell] + self.theta * u[self.cell + 1]
        }
    }
}

/// Quadrature rows of one equation: `matrix[j][q] = w_q k(t_j, s_q) g(s_q)`.
#[derive(Debug, Clone)]
struct Rows {
    samples: Vec<Sample>,
    matrix: Vec<f64>,
}

impl Rows {
    fn build(kernel: &KernelSpec, eq: &crate::system::Equation, grid: Grid) -> Result<Rows> {
        let n = grid.len();
        let h = grid.step();
        let eps = 1e-10 * h;
        let mut edges: Vec<f64> = grid.nodes().collect();
        for kink in kernel.kinks() {
            if let Kink::Vertical(s0) = kink {
                let (_, theta) = grid.locate(s0);
                if theta * h > eps && (1.0 - theta) * h > eps {
                    edges.push(s0);
                }
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup();

        // Simpson on each panel: weights h/6, 4h/6, h/6.
        let mut points = Vec::with_capacity(2 * edges.len());
        let mut weights = Vec::with_capacity(2 * edges.len());
        points.push(edges[0]);
        weights.push(0.0);
        for w in edges.windows(2) {
            let (p, q) = (w[0], w[1]);
            let len = q - p;
            *weights.last_mut().expect("non-empty") += len / 6.0;
            points.push(0.5 * (p + q));
            weights.push(4.0 * len / 6.0);
            points.push(q);
            weights.push(len / 6.0);
        }

        let samples: Vec<Sample> = points
            .iter()
            .map(|&s| {
                let (cell, theta) = grid.locate(s);
                // exact node hits keep theta = 0 so nodal values are used untouched
                let (cell, theta) = if theta >= 1.0 - 1e-12 && cell + 1 < n - 1 {
                    (cell + 1, 0.0)
                } else if theta <= 1e-12 {
                    (cell, 0.0)
                } else {
                    (cell, theta)
                };
                Sample { s, cell, theta }
            })
            .collect();

        let g: Vec<f64> = points.iter().map(|&s| eq.g(s)).collect::<Result<_>>()?;
        let q = samples.len();
        let mut matrix = vec![0.0; n * q];
        for j in 0..n {
            let t = grid.node(j);
            let row = &mut matrix[j * q..(j + 1) * q];
            for (k, smp) in samples.iter().enumerate() {
                row[k] = weights[k] * kernel.eval(t, smp.s)? * g[k];
            }
        }
        Ok(Rows { samples, matrix })
    }
}

/// The operator `T` on a fixed grid, with quadrature rows precomputed.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    sys: SystemSpec,
    grid: Grid,
    rows: [Rows; 2],
}

impl DiscreteOperator {
    pub fn new(sys: &SystemSpec, grid: Grid) -> Result<Self> {
        let eps = 1e-12 * (sys.b - sys.a);
        if (grid.a() - sys.a).abs() > eps || (grid.b() - sys.b).abs() > eps {
            return Err(Error::Grid(format!(
                "grid covers [{}, {}] but the system is posed on [{}, {}]",
                grid.a(),
                grid.b(),
                sys.a,
                sys.b
            )));
        }
        let rows = [
            Rows::build(&sys.equations[0].kernel, &sys.equations[0], grid)?,
            Rows::build(&sys.equations[1].kernel, &sys.equations[1], grid)?,
        ];
        Ok(DiscreteOperator {
            sys: sys.clone(),
            grid,
            rows,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn system(&self) -> &SystemSpec {
        &self.sys
    }

    fn check_grid(&self, u: &Pair) -> Result<()> {
        if u.grid() != self.grid {
            return Err(Error::Grid("argument lives on a different grid".into()));
        }
        Ok(())
    }

    pub fn apply(&self, u: &Pair) -> Result<Pair> {
        self.check_grid(u)?;
        let n = self.grid.len();
        let (v1, v2) = (u.u1.values(), u.u2.values());
        let mut out = [vec![0.0; n], vec![0.0; n]];
        for (i, rows) in self.rows.iter().enumerate() {
            let eq = &self.sys.equations[i];
            let fvals: Vec<f64> = rows
                .samples
                .iter()
                .map(|smp| eq.f(smp.value(v1), smp.value(v2)))
                .collect::<Result<_>>()?;
            let q = fvals.len();
            for (j, o) in out[i].iter_mut().enumerate() {
                let row = &rows.matrix[j * q..(j + 1) * q];
                let sum: f64 = row.iter().zip(&fvals).map(|(a, f)| a * f).sum();
                *o = eq.lambda * sum;
            }
        }
        let [o1, o2] = out;
        Pair::new(
            GridFunction::new(self.grid, o1)?,
            GridFunction::new(self.grid, o2)?,
        )
    }

    /// Dense Jacobian of `u -> T u` with respect to the stacked nodal values
    /// `[u1..., u2...]`, row-major `2n x 2n`. Partial derivatives of `f` are
    /// central differences with step `FD_STEP * max(1, |x|)`, one-sided where
    /// the backward point would leave the nonnegative quadrant.
    pub fn jacobian(&self, u: &Pair) -> Result<Vec<f64>> {
        self.check_grid(u)?;
        let n = self.grid.len();
        let dim = 2 * n;
        let mut jac = vec![0.0; dim * dim];
        let (v1, v2) = (u.u1.values(), u.u2.values());
        for (i, rows) in self.rows.iter().enumerate() {
            let eq = &self.sys.equations[i];
            let q = rows.samples.len();
            // partials[m][k] = d f_i / d u_m at sample k
            let mut partials = [vec![0.0; q], vec![0.0; q]];
            for (k, smp) in rows.samples.iter().enumerate() {
                let x = [smp.value(v1), smp.value(v2)];
                for (m, p) in partials.iter_mut().enumerate() {
                    p[k] = partial(eq, x, m)?;
                }
            }
            for j in 0..n {
                let row = &rows.matrix[j * q..(j + 1) * q];
                let out = &mut jac[(i * n + j) * dim..(i * n + j + 1) * dim];
                for (k, smp) in rows.samples.iter().enumerate() {
                    for (m, p) in partials.iter().enumerate() {
                        let d = eq.lambda * row[k] * p[k];
                        if d == 0.0 {
                            continue;
                        }
                        let col = m * n + smp.cell;
                        if smp.theta == 0.0 {
                            out[col] += d;
                        } else {
                            out[col] += (1.0 - smp.theta) * d;
                            out[col + 1] += smp.theta * d;
                        }
                    }
                }
            }
        }
        Ok(jac)
    }

    /// `lambda_i * int k_i(t_j, s) g_i(s) ds` at every node, i.e. `T` applied with `f == 1`.
    pub fn row_integrals(&self, i: usize) -> Vec<f64> {
        let rows = &self.rows[i];
        let q = rows.samples.len();
        (0..self.grid.len())
            .map(|j| rows.matrix[j * q..(j + 1) * q].iter().sum::<f64>())
            .collect()
    }
}

fn partial(eq: &crate::system::Equation, x: [f64; 2], m: usize) -> Result<f64> {
    let h = defaults::FD_STEP * x[m].abs().max(1.0);
    let mut up = x;
    up[m] += h;
    let mut down = x;
    if x[m] - h >= 0.0 {
        down[m] -= h;
        Ok((eq.f(up[0], up[1])? - eq.f(down[0], down[1])?) / (2.0 * h))
    } else {
        Ok((eq.f(up[0], up[1])? - eq.f(x[0], x[1])?) / h)
    }
}

/// One-shot application of `T`; builds the quadrature rows on every call.
pub fn apply_operator(sys: &SystemSpec, grid: Grid, u: &Pair) -> Result<Pair> {
    DiscreteOperator::new(sys, grid)?.apply(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::in_cone_with_tol;

    fn constant_f_system() -> SystemSpec {
        SystemSpec::builtin_pair(0.25, 0.5, "1", "1", [1.0, 1.0]).unwrap()
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let v = integrate_fn(|s| s * s * s, 0.0, 1.0, &[], 2).unwrap();
        assert_eq!(v, 0.25);
    }

    #[test]
    fn kernel_row_integrals() {
        let v = integrate(
            |s| Ok::<_, Error>(KernelSpec::K1.eval(0.0, s)?),
            0.0,
            1.0,
            &KernelSpec::K1.breakpoints(0.0),
            4,
        )
        .unwrap();
        assert!((v - 1.5).abs() < 1e-12);
        let k2 = KernelSpec::k2(0.25, 0.5).unwrap();
        let v = integrate(
            |s| Ok::<_, Error>(k2.eval(0.0, s)?),
            0.0,
            1.0,
            &k2.breakpoints(0.0),
            4,
        )
        .unwrap();
        assert!((v - 0.625).abs() < 1e-12);
    }

    #[test]
    fn rejects_outside_breakpoints() {
        assert!(matches!(
            integrate_fn(|s| s, 0.0, 1.0, &[1.5], 4),
            Err(Error::InvalidPanel(_))
        ));
        assert!(integrate_fn(|s| s, 0.0, 1.0, &[0.0, 1.0, 0.5, 0.5], 4).is_ok());
    }

    #[test]
    fn constant_nonlinearity_gives_closed_forms() {
        let grid = Grid::new(0.0, 1.0, 257).unwrap();
        let sys = constant_f_system();
        let out = apply_operator(&sys, grid, &Pair::zeros(grid)).unwrap();
        for (j, t) in grid.nodes().enumerate() {
            assert!((out.u1.values()[j] - (1.5 - t * t / 2.0)).abs() < 1e-10);
            assert!((out.u2.values()[j] - (0.625 - t * t / 2.0)).abs() < 1e-10);
        }
        assert!((out.u2.values()[0] - 0.625).abs() < 1e-10);
    }

    #[test]
    fn riemann_sum_oracle_for_k1_rows() {
        // midpoint sums on 200k cells, independent of the Simpson machinery
        let grid = Grid::new(0.0, 1.0, 17).unwrap();
        let sys = constant_f_system();
        let out = apply_operator(&sys, grid, &Pair::zeros(grid)).unwrap();
        let m = 200_000;
        for (j, t) in grid.nodes().enumerate() {
            let sum: f64 = (0..m)
                .map(|k| {
                    let s = (k as f64 + 0.5) / m as f64;
                    KernelSpec::K1.eval(t, s).unwrap()
                })
                .sum::<f64>()
                / m as f64;
            assert!((out.u1.values()[j] - sum).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_is_fixed_for_the_worked_example() {
        let grid = Grid::new(0.0, 1.0, 65).unwrap();
        let sys = SystemSpec::worked_example([1.0, 1.0]);
        let out = apply_operator(&sys, grid, &Pair::zeros(grid)).unwrap();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn linear_in_constant_nonlinearity() {
        let grid = Grid::new(0.0, 1.0, 65).unwrap();
        let base = apply_operator(&constant_f_system(), grid, &Pair::zeros(grid)).unwrap();
        let sys = SystemSpec::builtin_pair(0.25, 0.5, "3.7", "3.7", [1.0, 1.0]).unwrap();
        let scaled = apply_operator(&sys, grid, &Pair::constant(grid, [0.4, 0.9])).unwrap();
        assert!((&scaled - &base.scale(3.7)).norm() < 1e-10);
    }

    #[test]
    fn refinement_error_is_second_order() {
        let sys = SystemSpec::worked_example([1.0, 1.0]);
        let u_exact = |t: f64| 0.3 + (3.0 * t).sin().abs();
        let errors: Vec<f64> = [17usize, 33, 65]
            .iter()
            .map(|&n| {
                let grid = Grid::new(0.0, 1.0, n).unwrap();
                let u = Pair::new(
                    GridFunction::from_fn(grid, u_exact),
                    GridFunction::from_fn(grid, |t| 0.5 * u_exact(t)),
                )
                .unwrap();
                let fine = Grid::new(0.0, 1.0, 2049).unwrap();
                let uf = Pair::new(
                    GridFunction::from_fn(fine, u_exact),
                    GridFunction::from_fn(fine, |t| 0.5 * u_exact(t)),
                )
                .unwrap();
                let reference = apply_operator(&sys, fine, &uf).unwrap().resample(grid);
                (&apply_operator(&sys, grid, &u).unwrap() - &reference).norm()
            })
            .collect();
        for w in errors.windows(2) {
            assert!(w[0] / w[1] > 3.0, "ratios {errors:?}");
        }
    }

    #[test]
    fn output_stays_in_the_cone() {
        let grid = Grid::new(0.0, 1.0, 129).unwrap();
        let sys = SystemSpec::worked_example([1.0, 1.0]);
        for shift in [0.0, 0.3, 1.0] {
            let u = Pair::new(
                GridFunction::from_fn(grid, |t| shift + (5.0 * t).sin().abs()),
                GridFunction::from_fn(grid, |t| 1.0 + t * t),
            )
            .unwrap();
            let out = apply_operator(&sys, grid, &u).unwrap();
            assert!(in_cone_with_tol(&out, &sys.cone, 1e-9).member);
        }
    }

    #[test]
    fn jacobian_matches_difference_quotients() {
        let grid = Grid::new(0.0, 1.0, 9).unwrap();
        let sys = SystemSpec::worked_example([1.0, 1.0]);
        let op = DiscreteOperator::new(&sys, grid).unwrap();
        let u = Pair::new(
            GridFunction::from_fn(grid, |t| 1.0 + t),
            GridFunction::from_fn(grid, |t| 2.0 - t * t),
        )
        .unwrap();
        let jac = op.jacobian(&u).unwrap();
        let base = op.apply(&u).unwrap().to_vec();
        let x = u.to_vec();
        let dim = x.len();
        for col in 0..dim {
            let mut xp = x.clone();
            let h = 1e-6;
            xp[col] += h;
            let tp = op
                .apply(&Pair::from_vec(grid, &xp).unwrap())
                .unwrap()
                .to_vec();
            for row in 0..dim {
                let fd = (tp[row] - base[row]) / h;
                assert!((fd - jac[row * dim + col]).abs() < 1e-4, "({row},{col})");
            }
        }
    }

    #[test]
    fn vertical_kinks_off_the_grid_are_split() {
        // eta = 0.3 is not a node of the 9-point grid; the row integral must still be exact
        let sys = SystemSpec::builtin_pair(0.5, 0.3, "1", "1", [1.0, 1.0]).unwrap();
        let grid = Grid::new(0.0, 1.0, 9).unwrap();
        let op = DiscreteOperator::new(&sys, grid).unwrap();
        let rows = op.row_integrals(1);
        let (xi, eta) = (0.5, 0.3);
        for (j, t) in grid.nodes().enumerate() {
            let exact = (1.0 - xi * eta * eta) / (2.0 * (1.0 - xi)) - t * t / 2.0;
            assert!((rows[j] - exact).abs() < 1e-13);
        }
    }
}
