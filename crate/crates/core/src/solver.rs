//! Fixed points of the discretized operator: monotone iteration between an
//! ordered lower/upper pair, plain Picard iteration and damped Newton.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::cone::{
    in_cone, localize, order_leq, order_leq_with_tol, ConeVerdict, Localization, Region,
};
use crate::defaults;
use crate::error::Error;
use crate::grid::Pair;
use crate::hypotheses::check_h6;
use crate::quadrature::DiscreteOperator;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("initial pair is not bracketed: {0}")]
    NotBracketed(String),
    #[error("{side} iterate {iteration} breaks the cone order (slack {slack:.3e})")]
    NonMonotoneStep {
        side: &'static str,
        iteration: usize,
        slack: f64,
    },
    #[error("iteration diverged: norm {norm:.3e} after {iteration} steps")]
    Diverged { iteration: usize, norm: f64 },
    #[error("singular Jacobian: pivot {pivot:.3e} in row {row}")]
    SingularJacobian { row: usize, pivot: f64 },
    #[error("Newton stalled at residual {residual:.3e} after {iteration} steps")]
    Stalled { iteration: usize, residual: f64 },
    #[error("invalid initial guess: {0}")]
    InvalidInitialGuess(String),
}

pub type SolveResult<T> = std::result::Result<T, SolverError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub maxiter: usize,
    /// Picard iterates above this norm are reported as diverged.
    pub ceiling: f64,
    /// Sets used to tag the solution; no tags are produced without it.
    pub localization: Option<Localization>,
}

impl SolverOptions {
    /// Iteration-delta tolerance `1e-10`, at most 10 000 steps.
    pub fn iteration() -> Self {
        SolverOptions {
            tol: defaults::ITER_TOL,
            maxiter: defaults::ITER_MAX,
            ceiling: defaults::DIVERGENCE_CEILING,
            localization: None,
        }
    }

    /// Residual tolerance `1e-8`, at most 100 steps.
    pub fn newton() -> Self {
        SolverOptions {
            tol: defaults::NEWTON_TOL,
            maxiter: defaults::NEWTON_MAX,
            ..Self::iteration()
        }
    }

    pub fn with_localization(mut self, loc: Localization) -> Self {
        self.localization = Some(loc);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Pair,
    pub iterations: usize,
    /// `||u - T u||` at the returned solution.
    pub residual_sup: f64,
    pub converged: bool,
    /// Norms of the iterates, starting with the initial guess.
    pub monotone_trace: Option<Vec<f64>>,
    pub localization: Vec<Region>,
    pub cone_verdict: ConeVerdict,
    /// Set when a Newton step produced negative nodes that were clamped to zero.
    pub projected: bool,
    pub warnings: Vec<String>,
}

impl SolveReport {
    fn finish(
        op: &DiscreteOperator,
        solution: Pair,
        iterations: usize,
        residual_sup: f64,
        converged: bool,
        opts: &SolverOptions,
    ) -> SolveReport {
        let cp = &op.system().cone;
        let localization = opts
            .localization
            .map(|loc| localize(&solution, cp, &loc))
            .unwrap_or_default();
        SolveReport {
            cone_verdict: in_cone(&solution, cp),
            solution,
            iterations,
            residual_sup,
            converged,
            monotone_trace: None,
            localization,
            projected: false,
            warnings: Vec::new(),
        }
    }

    pub fn region_label(&self) -> String {
        if self.localization.is_empty() {
            "-".into()
        } else {
            self.localization
                .iter()
                .map(|r| r.label())
                .collect::<Vec<_>>()
                .join("|")
        }
    }
}

/// `||u - T u||` in the max-of-sup norm.
pub fn residual(op: &DiscreteOperator, u: &Pair) -> SolveResult<f64> {
    let tu = op.apply(u)?;
    Ok((u - &tu).norm())
}

/// Iterates `T` from both ends of the order interval `[alpha0, beta0]`.
///
/// Returns the limits from below and from above; with `f` non-decreasing on
/// the box they are the smallest and the greatest fixed point in the interval.
pub fn monotone_iterate(
    op: &DiscreteOperator,
    alpha0: &Pair,
    beta0: &Pair,
    opts: &SolverOptions,
) -> SolveResult<(SolveReport, SolveReport)> {
    let cp = &op.system().cone;
    if !order_leq(alpha0, beta0, cp) {
        return Err(SolverError::NotBracketed(
            "alpha0 is not below beta0".into(),
        ));
    }
    let t_alpha = op.apply(alpha0)?;
    if !order_leq(alpha0, &t_alpha, cp) {
        return Err(SolverError::NotBracketed(
            "alpha0 is not a lower solution (T alpha0 < alpha0)".into(),
        ));
    }
    let t_beta = op.apply(beta0)?;
    if !order_leq(&t_beta, beta0, cp) {
        return Err(SolverError::NotBracketed(
            "beta0 is not an upper solution (T beta0 > beta0)".into(),
        ));
    }

    let mut warnings = Vec::new();
    let sys = op.system();
    let hi = [beta0.u1.sup_norm(), beta0.u2.sup_norm()];
    if hi[0] > 0.0 && hi[1] > 0.0 {
        let mono = check_h6(
            &sys.equation(0).nonlinearity,
            &sys.equation(1).nonlinearity,
            hi[0],
            hi[1],
            defaults::LATTICE_DENSITY,
        )?;
        if !mono.status.is_pass() {
            let note = mono.witness.map(|w| w.note).unwrap_or_default();
            warnings.push(format!("f is not monotone on the enclosing box: {note}"));
        }
    }

    let mut lower = ordered_iteration(op, alpha0.clone(), Side::Lower, opts)?;
    let mut upper = ordered_iteration(op, beta0.clone(), Side::Upper, opts)?;
    lower.warnings.clone_from(&warnings);
    upper.warnings = warnings;
    Ok((lower, upper))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

fn ordered_iteration(
    op: &DiscreteOperator,
    start: Pair,
    side: Side,
    opts: &SolverOptions,
) -> SolveResult<SolveReport> {
    let cp = &op.system().cone;
    let mut u = start;
    let mut trace = vec![u.norm()];
    let mut iterations = 0;
    loop {
        let next = op.apply(&u)?;
        let change = (&next - &u).norm();
        if change < opts.tol || iterations >= opts.maxiter {
            let converged = change < opts.tol;
            let mut report = SolveReport::finish(op, u, iterations, change, converged, opts);
            report.monotone_trace = Some(trace);
            return Ok(report);
        }
        let tol = defaults::CONE_TOL * u.norm().max(1.0);
        let ordered = match side {
            Side::Lower => order_leq_with_tol(&u, &next, cp, tol),
            Side::Upper => order_leq_with_tol(&next, &u, cp, tol),
        };
        iterations += 1;
        if !ordered {
            let diff = match side {
                Side::Lower => &next - &u,
                Side::Upper => &u - &next,
            };
            return Err(SolverError::NonMonotoneStep {
                side: if side == Side::Lower {
                    "lower"
                } else {
                    "upper"
                },
                iteration: iterations,
                slack: in_cone(&diff, cp).margin,
            });
        }
        trace.push(next.norm());
        u = next;
    }
}

/// Unordered fixed-point iteration `u <- T u` from a cone element.
pub fn picard(op: &DiscreteOperator, u0: &Pair, opts: &SolverOptions) -> SolveResult<SolveReport> {
    let verdict = in_cone(u0, &op.system().cone);
    if !verdict.member {
        return Err(SolverError::InvalidInitialGuess(format!(
            "u0 is not in the cone (slack {:.3e} in component {} at t = {})",
            verdict.margin,
            verdict.component + 1,
            verdict.t
        )));
    }
    let mut u = u0.clone();
    let mut trace = vec![u.norm()];
    let mut iterations = 0;
    loop {
        let next = match op.apply(&u) {
            Ok(v) => v,
            Err(Error::Grid(_)) if u.norm() > 0.0 => {
                return Err(SolverError::Diverged {
                    iteration: iterations + 1,
                    norm: f64::INFINITY,
                })
            }
            Err(e) => return Err(e.into()),
        };
        let change = (&next - &u).norm();
        if change < opts.tol || iterations >= opts.maxiter {
            let converged = change < opts.tol;
            let mut report = SolveReport::finish(op, u, iterations, change, converged, opts);
            report.monotone_trace = Some(trace);
            return Ok(report);
        }
        iterations += 1;
        let norm = next.norm();
        if norm > opts.ceiling {
            return Err(SolverError::Diverged {
                iteration: iterations,
                norm,
            });
        }
        trace.push(norm);
        u = next;
    }
}

/// Damped Newton on `F(u) = u - T u` over the stacked nodal values.
///
/// A step that would leave the nonnegative orthant is shortened so it shrinks
/// no positive node by more than half its value; steps are then halved until the sup-norm residual decreases; negative nodes of an
/// accepted step are clamped to zero and the report's `projected` flag set.
pub fn newton_solve(
    op: &DiscreteOperator,
    u0: &Pair,
    opts: &SolverOptions,
) -> SolveResult<SolveReport> {
    if u0.min_value() < 0.0 {
        return Err(SolverError::InvalidInitialGuess(format!(
            "u0 has a negative node ({:.3e})",
            u0.min_value()
        )));
    }
    let grid = op.grid();
    let dim = 2 * grid.len();
    let mut u = u0.clone();
    let mut res_vec = (&u - &op.apply(&u)?).to_vec();
    let mut res = sup(&res_vec);
    let mut trace = vec![u.norm()];
    let mut projected = false;
    let mut iterations = 0;
    while res > opts.tol && iterations < opts.maxiter {
        let jt = op.jacobian(&u)?;
        // F'(u) = I - T'(u)
        let jac = DMatrix::from_fn(dim, dim, |r, c| {
            let d = if r == c { 1.0 } else { 0.0 };
            d - jt[r * dim + c]
        });
        let delta = solve_dense(jac, DVector::from_vec(res_vec.clone()))?;
        let x = u.to_vec();
        let mut step = max_step(&x, delta.as_slice());
        let mut accepted = None;
        for _ in 0..=defaults::NEWTON_MAX_HALVINGS {
            let mut clamped = false;
            let cand: Vec<f64> = x
                .iter()
                .zip(delta.iter())
                .map(|(xi, di)| {
                    let v = xi - step * di;
                    if v < 0.0 {
                        clamped = true;
                        0.0
                    } else {
                        v
                    }
                })
                .collect();
            if let Ok(cand) = Pair::from_vec(grid, &cand) {
                if let Ok(t) = op.apply(&cand) {
                    let r = (&cand - &t).to_vec();
                    let rs = sup(&r);
                    if rs < res {
                        accepted = Some((cand, r, rs, clamped));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let Some((cand, r, rs, clamped)) = accepted else {
            return Err(SolverError::Stalled {
                iteration: iterations,
                residual: res,
            });
        };
        iterations += 1;
        projected |= clamped;
        u = cand;
        res_vec = r;
        res = rs;
        trace.push(u.norm());
    }
    let converged = res <= opts.tol;
    let mut report = SolveReport::finish(op, u, iterations, res, converged, opts);
    report.monotone_trace = None;
    report.projected = projected;
    if trace.len() > 1 && projected {
        report
            .warnings
            .push("negative nodes were clamped to zero during the iteration".into());
    }
    Ok(report)
}

/// Full step when it stays in the nonnegative orthant; otherwise the largest
/// step that shrinks no positive node by more than `STEP_TO_BOUNDARY` of its value.
fn max_step(x: &[f64], delta: &[f64]) -> f64 {
    if x.iter().zip(delta).all(|(xi, di)| xi - di >= 0.0) {
        return 1.0;
    }
    x.iter().zip(delta).fold(1.0f64, |s, (xi, di)| {
        if *xi > 0.0 && *di > 0.0 {
            s.min(defaults::STEP_TO_BOUNDARY * xi / di)
        } else {
            s
        }
    })
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// LU with partial pivoting; pivots below `PIVOT_TOL` are rejected.
fn solve_dense(a: DMatrix<f64>, b: DVector<f64>) -> SolveResult<DVector<f64>> {
    let lu = a.lu();
    let u = lu.u();
    for (row, pivot) in u.diagonal().iter().enumerate() {
        if pivot.abs() < defaults::PIVOT_TOL {
            return Err(SolverError::SingularJacobian { row, pivot: *pivot });
        }
    }
    lu.solve(&b)
        .ok_or(SolverError::SingularJacobian { row: 0, pivot: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridFunction};
    use crate::system::SystemSpec;

    fn grid() -> Grid {
        Grid::new(0.0, 1.0, 257).unwrap()
    }

    fn constant_f() -> DiscreteOperator {
        let sys = SystemSpec::builtin_pair(0.25, 0.5, "1", "1", [1.0, 1.0]).unwrap();
        DiscreteOperator::new(&sys, grid()).unwrap()
    }

    fn example(lambda: [f64; 2], g: Grid) -> DiscreteOperator {
        DiscreteOperator::new(&SystemSpec::worked_example(lambda), g).unwrap()
    }

    fn exact(g: Grid) -> Pair {
        Pair::new(
            GridFunction::from_fn(g, |t| 1.5 - t * t / 2.0),
            GridFunction::from_fn(g, |t| 0.625 - t * t / 2.0),
        )
        .unwrap()
    }

    #[test]
    fn residual_examples() {
        let op = constant_f();
        assert!(residual(&op, &exact(grid())).unwrap() <= 1e-10);
        let ones = Pair::constant(grid(), [1.0, 1.0]);
        assert!((residual(&op, &ones).unwrap() - 0.875).abs() < 1e-12);
        let ex = example([1.0, 1.0], grid());
        assert_eq!(residual(&ex, &Pair::zeros(grid())).unwrap(), 0.0);
    }

    #[test]
    fn monotone_constant_map_converges_in_one_step() {
        let op = constant_f();
        let (lo, hi) = monotone_iterate(
            &op,
            &Pair::zeros(grid()),
            &Pair::constant(grid(), [2.0, 2.0]),
            &SolverOptions::iteration(),
        )
        .unwrap();
        for r in [&lo, &hi] {
            assert!(r.converged);
            assert_eq!(r.iterations, 1);
            assert!((&r.solution - &exact(grid())).norm() <= 1e-9);
        }
    }

    #[test]
    fn monotone_example_collapses_to_zero_from_small_beta() {
        let op = example([1.0, 1.0], grid());
        let (lo, hi) = monotone_iterate(
            &op,
            &Pair::zeros(grid()),
            &Pair::constant(grid(), [0.1, 0.1]),
            &SolverOptions::iteration(),
        )
        .unwrap();
        assert!(lo.converged && hi.converged);
        assert!(hi.solution.norm() < 1e-9);
        let trace = hi.monotone_trace.unwrap();
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(hi.warnings.is_empty());
    }

    #[test]
    fn monotone_rejects_unordered_pairs() {
        let op = constant_f();
        let err = monotone_iterate(
            &op,
            &Pair::constant(grid(), [2.0, 2.0]),
            &Pair::zeros(grid()),
            &SolverOptions::iteration(),
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::NotBracketed(_)));
        // beta0 below T beta0
        let err = monotone_iterate(
            &op,
            &Pair::zeros(grid()),
            &Pair::constant(grid(), [0.5, 0.5]),
            &SolverOptions::iteration(),
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::NotBracketed(_)));
    }

    #[test]
    fn picard_examples() {
        let op = constant_f();
        let r = picard(&op, &Pair::zeros(grid()), &SolverOptions::iteration()).unwrap();
        assert!(r.converged && r.iterations == 1);
        assert!((&r.solution - &exact(grid())).norm() <= 1e-9);

        let ex = example([1.0, 1.0], grid());
        let r = picard(
            &ex,
            &Pair::constant(grid(), [0.05, 0.05]),
            &SolverOptions::iteration(),
        )
        .unwrap();
        assert!(r.converged && r.solution.norm() < 1e-9);

        let err = picard(
            &ex,
            &Pair::constant(grid(), [100.0, 100.0]),
            &SolverOptions::iteration(),
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::Diverged { .. }), "{err}");

        let bump = Pair::new(
            GridFunction::from_fn(grid(), |t| if t < 0.5 { 1.0 } else { 0.0 }),
            GridFunction::constant(grid(), 1.0),
        )
        .unwrap();
        assert!(matches!(
            picard(&ex, &bump, &SolverOptions::iteration()),
            Err(SolverError::InvalidInitialGuess(_))
        ));
    }

    #[test]
    fn newton_linear_problem_in_one_step() {
        let op = constant_f();
        let r = newton_solve(
            &op,
            &Pair::constant(grid(), [1.0, 1.0]),
            &SolverOptions::newton(),
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!((&r.solution - &exact(grid())).norm() <= 1e-9);
    }

    #[test]
    fn newton_finds_a_nontrivial_solution() {
        let g = Grid::new(0.0, 1.0, 129).unwrap();
        let op = example([1.0, 1.0], g);
        let r = newton_solve(
            &op,
            &Pair::constant(g, [3.0, 3.0]),
            &SolverOptions::newton(),
        )
        .unwrap();
        assert!(r.converged, "residual {}", r.residual_sup);
        assert!(r.residual_sup <= 1e-8);
        assert!(r.solution.norm() > 0.5);
        assert!(r.cone_verdict.member);
        assert!(residual(&op, &r.solution).unwrap() <= 1e-8);
    }

    #[test]
    fn newton_rejects_negative_guess() {
        let op = constant_f();
        let mut u = Pair::constant(grid(), [1.0, 1.0]);
        u.u1.values_mut()[3] = -0.1;
        assert!(matches!(
            newton_solve(&op, &u, &SolverOptions::newton()),
            Err(SolverError::InvalidInitialGuess(_))
        ));
    }

    #[test]
    fn singular_system_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let err = solve_dense(a, DVector::from_vec(vec![1.0, 1.0])).unwrap_err();
        assert!(matches!(err, SolverError::SingularJacobian { .. }));
    }

    #[test]
    fn localization_tags_are_reported() {
        let op = constant_f();
        let opts =
            SolverOptions::iteration().with_localization(Localization::new(0.1, 10.0, [2.0, 2.0]));
        let r = picard(&op, &Pair::zeros(grid()), &opts).unwrap();
        assert!(r.localization.contains(&Region::P));
        assert!(r.localization.contains(&Region::V));
        assert_eq!(r.region_label(), "P|V|V-K_R");
    }
}
