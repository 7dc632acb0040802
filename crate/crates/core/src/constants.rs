//! Quadrature-based kernel constants:
//!
//! * `gamma_star = max_{t in [a,b]} int_a^b g(s) k(t,s) ds`
//! * `gamma_lower = min_{t in [a_i,b_i]} int_{a_i}^{b_i} g(s) k(t,s) ds`
//! * the envelope inequalities `k(t,s) <= Phi(s)` and `c Phi(s) <= k(t,s)` for `t in [a_i,b_i]`.
//!
//! Extrema are taken over grid nodes (plus the endpoints of the sub-interval)
//! and the grid is doubled until successive values agree.

use crate::cone::Envelope;
use crate::defaults;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::grid::{Grid, GridFunction};
use crate::kernels::KernelSpec;
use crate::quadrature::integrate;
use crate::system::SystemSpec;

/// Ties within this distance keep the earlier (smaller `t`) candidate.
const TIE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaEstimate {
    pub value: f64,
    /// Abscissa of the extremum.
    pub at: f64,
    /// Grid doublings performed before the value settled.
    pub refinements: usize,
}

/// `t -> int_lo^hi g(s) k(t, s) ds`, split at the kernel's kinks.
pub fn weighted_row_integral(
    k: &KernelSpec,
    g: &Expression,
    t: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let bps: Vec<f64> = k
        .breakpoints(t)
        .into_iter()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    integrate(
        |s| Ok::<_, Error>(g.eval(&[s])? * k.eval(t, s)?),
        lo,
        hi,
        &bps,
        defaults::SIMPSON_SUBINTERVALS,
    )
}

fn check_weight(g: &Expression, grid: Grid) -> Result<()> {
    for s in grid.nodes() {
        let value = g.eval(&[s])?;
        if value < -defaults::WEIGHT_TOL {
            return Err(Error::NegativeWeight { s, value });
        }
    }
    Ok(())
}

/// Grid nodes in `[lo, hi]` together with both endpoints, ascending.
fn candidates(grid: Grid, lo: f64, hi: f64) -> Vec<f64> {
    let eps = 1e-12 * (grid.b() - grid.a());
    let mut ts = vec![lo];
    ts.extend(grid.indices_in(lo, hi).map(|j| grid.node(j)));
    ts.push(hi);
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() <= eps);
    ts
}

#[derive(Clone, Copy)]
enum Extremum {
    Max,
    Min,
}

fn search(
    k: &KernelSpec,
    g: &Expression,
    grid: Grid,
    t_range: (f64, f64),
    s_range: (f64, f64),
    kind: Extremum,
) -> Result<GammaEstimate> {
    check_weight(g, grid)?;
    let scan = |grid: Grid| -> Result<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for t in candidates(grid, t_range.0, t_range.1) {
            let v = weighted_row_integral(k, g, t, s_range.0, s_range.1)?;
            let better = match (best, kind) {
                (None, _) => true,
                (Some((b, _)), Extremum::Max) => v > b + TIE,
                (Some((b, _)), Extremum::Min) => v < b - TIE,
            };
            if better {
                best = Some((v, t));
            }
        }
        Ok(best.expect("at least the endpoints are scanned"))
    };
    let (mut value, mut at) = scan(grid)?;
    let mut level = grid;
    let mut refinements = 0;
    while refinements < defaults::GAMMA_MAX_REFINEMENTS {
        level = level.refined();
        let (v, t) = scan(level)?;
        refinements += 1;
        let settled = (v - value).abs() < defaults::GAMMA_REFINE_TOL;
        value = v;
        at = t;
        if settled {
            break;
        }
    }
    Ok(GammaEstimate {
        value,
        at,
        refinements,
    })
}

/// `max_t int_a^b g(s) k(t,s) ds` over the grid; ties go to the smallest `t`.
pub fn compute_gamma_star(k: &KernelSpec, g: &Expression, grid: Grid) -> Result<GammaEstimate> {
    let range = (grid.a(), grid.b());
    search(k, g, grid, range, range, Extremum::Max)
}

/// `min_{t in sub} int_sub g(s) k(t,s) ds` over the grid nodes in `sub` and its endpoints.
pub fn compute_gamma_lower(
    k: &KernelSpec,
    g: &Expression,
    sub: (f64, f64),
    grid: Grid,
) -> Result<GammaEstimate> {
    if sub.0 < grid.a() || sub.1 > grid.b() || sub.0 >= sub.1 {
        return Err(Error::Argument(format!(
            "sub-interval [{}, {}] not inside [{}, {}]",
            sub.0,
            sub.1,
            grid.a(),
            grid.b()
        )));
    }
    search(k, g, grid, sub, sub, Extremum::Min)
}

/// Outcome of the envelope scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H5Report {
    /// `max (k - Phi)` over the full grid.
    pub upper_violation: f64,
    pub upper_at: (f64, f64),
    /// `max (c Phi - k)` over `t` in the sub-interval.
    pub lower_violation: f64,
    pub lower_at: (f64, f64),
    pub passed: bool,
}

impl H5Report {
    pub fn worst_violation(&self) -> f64 {
        self.upper_violation.max(self.lower_violation)
    }
}

pub fn verify_h5(
    k: &KernelSpec,
    phi: &Envelope,
    c: f64,
    sub: (f64, f64),
    grid: Grid,
) -> Result<H5Report> {
    let phis: Vec<f64> = grid.nodes().map(|s| phi.eval(s)).collect::<Result<_>>()?;
    let mut upper = (f64::NEG_INFINITY, (grid.a(), grid.a()));
    for t in grid.nodes() {
        for (s, ph) in grid.nodes().zip(&phis) {
            let v = k.eval(t, s)? - ph;
            if v > upper.0 + TIE {
                upper = (v, (t, s));
            }
        }
    }
    let mut lower = (f64::NEG_INFINITY, (sub.0, grid.a()));
    for t in candidates(grid, sub.0, sub.1) {
        for (s, ph) in grid.nodes().zip(&phis) {
            let v = c * ph - k.eval(t, s)?;
            if v > lower.0 + TIE {
                lower = (v, (t, s));
            }
        }
    }
    let tol = defaults::ENVELOPE_TOL;
    Ok(H5Report {
        upper_violation: upper.0,
        upper_at: upper.1,
        lower_violation: lower.0,
        lower_at: lower.1,
        passed: upper.0 <= tol && lower.0 <= tol,
    })
}

/// Largest `c` with `c Phi(s) <= k(t, s)` on the scanned points, less a safety margin.
pub fn estimate_c(k: &KernelSpec, phi: &Envelope, sub: (f64, f64), grid: Grid) -> Result<f64> {
    let tol = defaults::ENVELOPE_TOL;
    let phis: Vec<f64> = grid.nodes().map(|s| phi.eval(s)).collect::<Result<_>>()?;
    let mut inf = 1.0f64;
    for t in candidates(grid, sub.0, sub.1) {
        for (s, ph) in grid.nodes().zip(&phis) {
            let kv = k.eval(t, s)?;
            if *ph <= tol {
                if kv <= tol {
                    continue;
                }
                return Ok(0.0);
            }
            inf = inf.min(kv / ph);
        }
    }
    Ok((inf.clamp(0.0, 1.0) - defaults::C_SAFETY_MARGIN).max(0.0))
}

/// `Phi(s) = max_t k(t, s)` sampled at the grid nodes.
pub fn estimate_envelope(k: &KernelSpec, grid: Grid) -> Result<GridFunction> {
    let values = grid
        .nodes()
        .map(|s| {
            grid.nodes()
                .map(|t| k.eval(t, s))
                .try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v)))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    GridFunction::new(grid, values)
}

/// Constants of one equation of a system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationConstants {
    pub gamma_star: GammaEstimate,
    pub gamma_lower: GammaEstimate,
    pub c_estimate: f64,
    pub h5: H5Report,
}

impl EquationConstants {
    pub fn h5_worst_violation(&self) -> f64 {
        self.h5.worst_violation()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsReport {
    pub equations: [EquationConstants; 2],
}

impl ConstantsReport {
    pub fn gamma_star(&self, i: usize) -> f64 {
        self.equations[i].gamma_star.value
    }

    pub fn gamma_lower(&self, i: usize) -> f64 {
        self.equations[i].gamma_lower.value
    }
}

pub fn compute_constants(sys: &SystemSpec, grid: Grid) -> Result<ConstantsReport> {
    let one = |i: usize| -> Result<EquationConstants> {
        let eq = sys.equation(i);
        let cone = sys.cone.equation(i);
        Ok(EquationConstants {
            gamma_star: compute_gamma_star(&eq.kernel, &eq.weight, grid)?,
            gamma_lower: compute_gamma_lower(&eq.kernel, &eq.weight, cone.interval, grid)?,
            c_estimate: estimate_c(&eq.kernel, &cone.phi, cone.interval, grid)?,
            h5: verify_h5(&eq.kernel, &cone.phi, cone.c, cone.interval, grid)?,
        })
    };
    Ok(ConstantsReport {
        equations: [one(0)?, one(1)?],
    })
}
