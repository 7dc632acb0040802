//! Sampled verification of the existence hypotheses.
//!
//! Monotonicity, growth and infimum conditions are continuum statements; here
//! they are evaluated on lattices and reported as [`Status::HeuristicPass`]
//! when no sample violates them. Checks that are exact for the discretized
//! problem (ordering of `T beta` and `beta`, parameter inequalities) report
//! [`Status::Pass`].

use std::fmt;

use crate::cone::{ball_in_cone_radius, in_cone, ConeParams};
use crate::defaults;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::grid::{Grid, Pair};
use crate::quadrature::DiscreteOperator;
use crate::system::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    HeuristicPass,
    Fail,
}

impl Status {
    pub fn is_pass(self) -> bool {
        self != Status::Fail
    }

    fn sampled(ok: bool) -> Status {
        if ok {
            Status::HeuristicPass
        } else {
            Status::Fail
        }
    }

    fn exact(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::HeuristicPass => "heuristic-pass",
            Status::Fail => "FAIL",
        })
    }
}

/// Location and values of the worst case found by a check.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub at: Vec<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Signed slack of the worst sample; negative means violated.
    pub margin: f64,
    pub witness: Option<Witness>,
}

impl Check {
    fn new(name: &str, status: Status, margin: f64, witness: Option<Witness>) -> Check {
        Check {
            name: name.to_string(),
            status,
            margin,
            witness,
        }
    }

    fn with_witness(name: &str, status: Status, margin: f64, at: Vec<f64>, note: String) -> Check {
        Check::new(name, status, margin, Some(Witness { at, note }))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<24} {:<15} margin {:>12.5e}",
            self.name, self.status, self.margin
        )?;
        if let Some(w) = &self.witness {
            write!(f, "  [{}]", w.note)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status.is_pass())
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisConfig {
    /// Monotonicity box `[0, B1] x [0, B2]`.
    pub b1: f64,
    pub b2: f64,
    /// Growth level for the index-zero premise; derived from the constants when absent.
    pub m: Option<f64>,
    pub rho: Option<f64>,
    /// Lattice points per axis.
    pub density: usize,
}

impl HypothesisConfig {
    pub fn new(b1: f64, b2: f64) -> Self {
        HypothesisConfig {
            b1,
            b2,
            m: None,
            rho: None,
            density: defaults::LATTICE_DENSITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.b1) && positive(self.b2)) {
            return Err(Error::Argument(format!(
                "box bounds must be positive, got B1={}, B2={}",
                self.b1, self.b2
            )));
        }
        if self.m.is_some_and(|m| !positive(m)) || self.rho.is_some_and(|r| !positive(r)) {
            return Err(Error::Argument("M and rho must be positive".into()));
        }
        check_density(self.density)
    }
}

fn check_density(density: usize) -> Result<()> {
    if density < defaults::MIN_LATTICE_DENSITY {
        return Err(Error::Argument(format!(
            "lattice density must be at least {}, got {density}",
            defaults::MIN_LATTICE_DENSITY
        )));
    }
    Ok(())
}

/// `density` equally spaced points on `[lo, hi]`, endpoints included.
fn closed_axis(lo: f64, hi: f64, density: usize) -> Vec<f64> {
    let d = density.max(2);
    (0..d)
        .map(|k| {
            if k + 1 == d {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (d - 1) as f64
            }
        })
        .collect()
}

/// Cell midpoints of `(0, hi)` split into `density` cells.
fn open_axis(hi: f64, density: usize) -> Vec<f64> {
    (0..density)
        .map(|k| hi * (k as f64 + 0.5) / density as f64)
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    NonDecreasing,
    NonIncreasing,
}

/// Smallest signed increment of `f` along axis-neighbour chains of the lattice.
fn monotone_scan(
    f: &Expression,
    hi: [f64; 2],
    density: usize,
    dir: Direction,
) -> Result<(f64, Vec<f64>, String)> {
    let xs = closed_axis(0.0, hi[0], density);
    let ys = closed_axis(0.0, hi[1], density);
    let mut values = vec![0.0; xs.len() * ys.len()];
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            values[i * ys.len() + j] = f.eval(&[*x, *y])?;
        }
    }
    let sign = if dir == Direction::NonDecreasing {
        1.0
    } else {
        -1.0
    };
    let mut worst = (f64::INFINITY, vec![0.0, 0.0], String::new());
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            let here = values[i * ys.len() + j];
            let mut consider = |ni: usize, nj: usize| {
                let next = values[ni * ys.len() + nj];
                let inc = sign * (next - here);
                // relative slack for round-off in large values
                let scaled = inc + 1e-12 * here.abs().max(next.abs());
                let scaled = scaled.min(inc.max(0.0));
                if scaled < worst.0 {
                    worst = (
                        scaled,
                        vec![xs[i], ys[j], xs[ni], ys[nj]],
                        format!(
                            "f({:.6}, {:.6}) = {here:.6e} -> f({:.6}, {:.6}) = {next:.6e}",
                            xs[i], ys[j], xs[ni], ys[nj]
                        ),
                    );
                }
            };
            if i + 1 < xs.len() {
                consider(i + 1, j);
            }
            if j + 1 < ys.len() {
                consider(i, j + 1);
            }
        }
    }
    Ok(worst)
}

fn monotone_check(
    name: &str,
    f1: &Expression,
    f2: &Expression,
    hi: [f64; 2],
    density: usize,
    dir: Direction,
) -> Result<Check> {
    check_density(density)?;
    let mut worst: Option<(f64, Vec<f64>, String)> = None;
    for (i, f) in [f1, f2].into_iter().enumerate() {
        let (m, at, note) = monotone_scan(f, hi, density, dir)?;
        if worst.as_ref().is_none_or(|w| m < w.0) {
            worst = Some((m, at, format!("f{}: {note}", i + 1)));
        }
    }
    let (margin, at, note) = worst.expect("two scans");
    Ok(Check::with_witness(
        name,
        Status::sampled(margin >= 0.0),
        margin,
        at,
        note,
    ))
}

/// `f_i` non-decreasing on `[0, B1] x [0, B2]`, sampled on a `density x density` lattice.
pub fn check_h6(
    f1: &Expression,
    f2: &Expression,
    b1: f64,
    b2: f64,
    density: usize,
) -> Result<Check> {
    monotone_check("H6", f1, f2, [b1, b2], density, Direction::NonDecreasing)
}

/// Sampled infima of `f1/rho` on `[rho, rho/c] x [0, rho/c]` and of `f2/rho` on
/// `[0, rho/c] x [rho, rho/c]`; passes when both exceed `M`.
pub fn check_h7(
    f1: &Expression,
    f2: &Expression,
    c: f64,
    rho: f64,
    m: f64,
    density: usize,
) -> Check {
    let hi = rho / c;
    let boxes = [
        (closed_axis(rho, hi, density), closed_axis(0.0, hi, density)),
        (closed_axis(0.0, hi, density), closed_axis(rho, hi, density)),
    ];
    let mut worst = (f64::INFINITY, vec![], String::new());
    for (i, (f, (xs, ys))) in [f1, f2].into_iter().zip(&boxes).enumerate() {
        for x in xs {
            for y in ys {
                let v = match f.eval(&[*x, *y]) {
                    Ok(v) => v / rho,
                    Err(e) => {
                        return Check::with_witness(
                            "H7",
                            Status::Fail,
                            f64::NEG_INFINITY,
                            vec![*x, *y],
                            format!("f{} failed to evaluate: {e}", i + 1),
                        )
                    }
                };
                if v < worst.0 {
                    worst = (
                        v,
                        vec![*x, *y],
                        format!("inf f{}/rho = {v:.6e} at ({x:.6}, {y:.6}), M = {m}", i + 1),
                    );
                }
            }
        }
    }
    let margin = worst.0 - m;
    Check::with_witness(
        "H7",
        Status::sampled(margin >= defaults::STRICT_MARGIN),
        margin,
        worst.1,
        worst.2,
    )
}

/// Superlinear growth `f_i(u)/u_i -> infinity` uniformly in the other variable,
/// probed at the given magnitudes.
pub fn check_h7_star(
    f1: &Expression,
    f2: &Expression,
    probes: &[f64],
    threshold: f64,
    density: usize,
) -> Result<Check> {
    if probes.len() < 3 || probes.windows(2).any(|w| w[0] >= w[1]) || probes[0] <= 0.0 {
        return Err(Error::Argument(
            "probes must be at least three increasing positive magnitudes".into(),
        ));
    }
    let mut margin = f64::INFINITY;
    let mut witness = (vec![], String::new());
    let mut ok = true;
    for (i, f) in [f1, f2].into_iter().enumerate() {
        let mut ratios = Vec::with_capacity(probes.len());
        for &m in probes {
            let mut least = f64::INFINITY;
            for v in closed_axis(0.0, m, density) {
                let x = if i == 0 { [m, v] } else { [v, m] };
                let r = f.eval(&x).map(|y| y / m).unwrap_or(f64::NEG_INFINITY);
                least = least.min(r);
            }
            ratios.push(least);
        }
        let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
        let last = *ratios.last().expect("non-empty");
        let slack = last - threshold;
        let this_ok = increasing && slack > 0.0;
        ok &= this_ok;
        if !this_ok || slack < margin {
            margin = if increasing { slack } else { slack.min(0.0) };
            witness = (
                probes.to_vec(),
                format!(
                    "f{}: min f/u{} at probes = {}",
                    i + 1,
                    i + 1,
                    ratios
                        .iter()
                        .map(|r| format!("{r:.4e}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            );
        }
        if !this_ok {
            break;
        }
    }
    Ok(Check::with_witness(
        "H7*",
        Status::sampled(ok),
        margin,
        witness.0,
        witness.1,
    ))
}

/// Grid estimate of `sup_{r in (0,B1)x(0,B2)} (1 - c) r_i / (f_i(r) gamma_i*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSup {
    pub sup: f64,
    pub at: [f64; 2],
    /// Set when a zero of `f_i` was hit or the lattice maximum keeps growing under refinement.
    pub unbounded: bool,
    /// Relative growth of the maximum between the last two refinements.
    pub last_growth: f64,
}

impl LambdaSup {
    /// `lambda < sup`, with unbounded estimates admitting every positive value.
    pub fn admits(&self, lambda: f64) -> bool {
        lambda > 0.0 && (self.unbounded || lambda < self.sup)
    }
}

pub fn lambda_supremum(
    sys: &SystemSpec,
    cp: &ConeParams,
    gamma_star: [f64; 2],
    b1: f64,
    b2: f64,
    density: usize,
) -> Result<[LambdaSup; 2]> {
    check_density(density)?;
    if gamma_star.iter().any(|g| *g <= 0.0) {
        return Err(Error::Argument("gamma* must be positive".into()));
    }
    let c = cp.c();
    let one = |i: usize| -> Result<LambdaSup> {
        let f = &sys.equation(i).nonlinearity;
        let mut history: Vec<f64> = Vec::new();
        let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
        for level in 0..=defaults::LAMBDA_SUP_REFINEMENTS {
            let d = density << level;
            let mut level_best = f64::NEG_INFINITY;
            for r1 in open_axis(b1, d) {
                for r2 in open_axis(b2, d) {
                    let fv = f.eval(&[r1, r2])?;
                    let ri = if i == 0 { r1 } else { r2 };
                    let q = if fv <= 0.0 {
                        f64::INFINITY
                    } else {
                        (1.0 - c) * ri / (fv * gamma_star[i])
                    };
                    if q > level_best {
                        level_best = q;
                    }
                    if q > best.0 {
                        best = (q, [r1, r2]);
                    }
                }
            }
            history.push(level_best);
            if level_best.is_infinite() {
                break;
            }
        }
        let n = history.len();
        let last_growth = if n >= 2 {
            (history[n - 1] - history[n - 2]) / history[n - 2].abs()
        } else {
            f64::INFINITY
        };
        let growing = history.windows(2).all(|w| w[1] > w[0]);
        let unbounded =
            best.0.is_infinite() || (growing && last_growth > defaults::LAMBDA_SUP_GROWTH);
        Ok(LambdaSup {
            sup: best.0,
            at: best.1,
            unbounded,
            last_growth,
        })
    };
    Ok([one(0)?, one(1)?])
}

/// A constant upper-solution candidate `beta` with its slacks
/// `beta_i - lambda_i gamma_i* f_i(beta) - c beta_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaCandidate {
    pub beta: [f64; 2],
    pub slack: [f64; 2],
}

impl BetaCandidate {
    pub fn min_slack(&self) -> f64 {
        self.slack[0].min(self.slack[1])
    }
}

pub fn beta_slack(
    sys: &SystemSpec,
    c: f64,
    gamma_star: [f64; 2],
    beta: [f64; 2],
) -> Result<[f64; 2]> {
    let mut slack = [0.0; 2];
    for (i, s) in slack.iter_mut().enumerate() {
        let eq = sys.equation(i);
        let fv = eq.f(beta[0], beta[1])?;
        *s = beta[i] - eq.lambda * gamma_star[i] * fv - c * beta[i];
    }
    Ok(slack)
}

/// Searches lattices of `(0, B1/2^k) x (0, B2/2^k)` for the constant pair with
/// the largest minimal slack. Shrinking boxes reach the small `beta` that
/// large `lambda` requires.
pub fn find_beta(
    sys: &SystemSpec,
    cp: &ConeParams,
    gamma_star: [f64; 2],
    b1: f64,
    b2: f64,
    density: usize,
) -> Result<Option<BetaCandidate>> {
    check_density(density)?;
    let c = cp.c();
    let mut best: Option<BetaCandidate> = None;
    for k in 0..=defaults::BETA_MAX_HALVINGS {
        let scale = 0.5f64.powi(k as i32);
        for x in open_axis(b1 * scale, density) {
            for y in open_axis(b2 * scale, density) {
                let Ok(slack) = beta_slack(sys, c, gamma_star, [x, y]) else {
                    continue;
                };
                let cand = BetaCandidate {
                    beta: [x, y],
                    slack,
                };
                if cand.min_slack() >= defaults::STRICT_MARGIN
                    && best.is_none_or(|b| cand.min_slack() > b.min_slack())
                {
                    best = Some(cand);
                }
            }
        }
    }
    Ok(best)
}

/// Inputs of the monotone-operator existence statement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceParams {
    pub beta: [f64; 2],
    pub r: f64,
    pub rho: f64,
    pub m: f64,
}

/// Checks the premises of the non-decreasing-operator existence statement for
/// a constant upper solution `beta`, radius `R`, and the set `V` at level `rho`:
///
/// * (a) `R <= (1-c)/(1+c) min beta_i` and `R < rho`;
/// * (b) `T beta <= beta` in the cone order;
/// * (c) `f` non-decreasing on `[0, beta1] x [0, beta2]` (sampled);
/// * (d) the growth condition at `rho` for `M`, and `lambda_i M gamma_{i,*} > 1`.
pub fn check_existence(
    sys: &SystemSpec,
    grid: Grid,
    params: &ExistenceParams,
    gamma_lower: [f64; 2],
    density: usize,
) -> Result<CheckReport> {
    let ExistenceParams { beta, r, rho, m } = *params;
    if beta.iter().any(|b| *b <= 0.0) || r <= 0.0 || rho <= 0.0 || m <= 0.0 {
        return Err(Error::Argument(
            "beta, R, rho and M must be positive".into(),
        ));
    }
    let cp = &sys.cone;
    let mut report = CheckReport::default();

    let radius = ball_in_cone_radius(beta, cp);
    let margin = (radius - r).min(rho - r);
    report.push(Check::with_witness(
        "(a) ball in cone",
        Status::exact(radius - r >= 0.0 && rho - r >= defaults::STRICT_MARGIN),
        margin,
        vec![r, radius, rho],
        format!("R = {r:.6e}, ball radius = {radius:.6e}, rho = {rho:.6e}"),
    ));

    let op = DiscreteOperator::new(sys, grid)?;
    let beta_fn = Pair::constant(grid, beta);
    let t_beta = op.apply(&beta_fn)?;
    let verdict = in_cone(&(&beta_fn - &t_beta), cp);
    report.push(Check::with_witness(
        "(b) T beta <= beta",
        Status::exact(verdict.member),
        verdict.margin,
        vec![verdict.component as f64, verdict.t],
        format!(
            "worst slack in component {} at t = {:.6}",
            verdict.component + 1,
            verdict.t
        ),
    ));

    let mut mono = check_h6(
        &sys.equation(0).nonlinearity,
        &sys.equation(1).nonlinearity,
        beta[0],
        beta[1],
        density,
    )?;
    mono.name = "(c) monotone below beta".into();
    report.push(mono);

    let mut h7 = check_h7(
        &sys.equation(0).nonlinearity,
        &sys.equation(1).nonlinearity,
        cp.c(),
        rho,
        m,
        density,
    );
    h7.name = "(d) growth at rho".into();
    report.push(h7);

    let products = [0, 1].map(|i| sys.equation(i).lambda * m * gamma_lower[i]);
    let worst = if products[0] <= products[1] { 0 } else { 1 };
    report.push(Check::with_witness(
        "(d) lambda M gamma_* > 1",
        Status::exact(products[worst] - 1.0 >= defaults::STRICT_MARGIN),
        products[worst] - 1.0,
        products.to_vec(),
        format!(
            "equation {}: lambda M gamma_* = {:.6e}",
            worst + 1,
            products[worst]
        ),
    ));
    Ok(report)
}

/// Checks the premises of the non-increasing-operator existence statement for
/// a constant lower solution `alpha` and radius `R`.
pub fn check_decreasing(
    sys: &SystemSpec,
    grid: Grid,
    alpha: [f64; 2],
    r: f64,
    density: usize,
) -> Result<CheckReport> {
    if alpha.iter().any(|a| *a <= 0.0) {
        return Err(Error::Argument(
            "alpha must be a positive constant pair".into(),
        ));
    }
    let cp = &sys.cone;
    let mut report = CheckReport::default();
    let op = DiscreteOperator::new(sys, grid)?;
    let alpha_fn = Pair::constant(grid, alpha);
    let verdict = in_cone(&(&alpha_fn - &op.apply(&alpha_fn)?), cp);
    report.push(Check::with_witness(
        "(a') T alpha <= alpha",
        Status::exact(verdict.member),
        verdict.margin,
        vec![verdict.component as f64, verdict.t],
        format!(
            "worst slack in component {} at t = {:.6}",
            verdict.component + 1,
            verdict.t
        ),
    ));
    let norm = alpha[0].max(alpha[1]);
    let margin = r.min(norm - r);
    report.push(Check::with_witness(
        "(a') 0 < R < ||alpha||",
        Status::exact(r > 0.0 && norm - r >= defaults::STRICT_MARGIN),
        margin,
        vec![r, norm],
        format!("R = {r:.6e}, ||alpha|| = {norm:.6e}"),
    ));
    let radius = ball_in_cone_radius(alpha, cp);
    report.push(Check::with_witness(
        "(a') ball in cone",
        Status::exact(radius - r >= 0.0),
        radius - r,
        vec![r, radius],
        format!("R = {r:.6e}, ball radius = {radius:.6e}"),
    ));
    report.push(monotone_check(
        "(b') non-increasing",
        &sys.equation(0).nonlinearity,
        &sys.equation(1).nonlinearity,
        [norm, norm],
        density,
        Direction::NonIncreasing,
    )?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(src: &str) -> Expression {
        Expression::parse(src, &["u1", "u2"]).unwrap()
    }

    fn exf() -> (Expression, Expression) {
        (f("(2 + sin(u2)) * u1^2"), f("(2 + sin(u1)) * u2^2"))
    }

    const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

    #[test]
    fn h6_examples() {
        let (f1, f2) = exf();
        let c = check_h6(&f1, &f2, HALF_PI, HALF_PI, 32).unwrap();
        assert_eq!(c.status, Status::HeuristicPass);
        let c = check_h6(&f("u1 - u2"), &f2, 1.0, 1.0, 16).unwrap();
        assert_eq!(c.status, Status::Fail);
        assert!(c.witness.is_some());
        let c = check_h6(&f("5"), &f("5"), 1.0, 1.0, 16).unwrap();
        assert_eq!(c.status, Status::HeuristicPass);
        assert_eq!(c.margin, 0.0);
        assert!(check_h6(&f1, &f2, 1.0, 1.0, 8).is_err());
        // the same f is not monotone past pi/2 in the second variable
        let c = check_h6(&f1, &f2, 4.0, 4.0, 32).unwrap();
        assert_eq!(c.status, Status::Fail);
    }

    #[test]
    fn h7_examples() {
        let (sq1, sq2) = (f("u1^2"), f("u2^2"));
        let c = check_h7(&sq1, &sq2, 0.5, 10.0, 5.0, 32);
        assert_eq!(c.status, Status::HeuristicPass);
        assert!((c.margin - 5.0).abs() < 1e-12);
        let c = check_h7(&sq1, &sq2, 0.5, 3.0, 5.0, 32);
        assert_eq!(c.status, Status::Fail);
        assert!((c.margin + 2.0).abs() < 1e-12);
        let c = check_h7(&f("0"), &sq2, 0.5, 10.0, 0.1, 32);
        assert_eq!(c.status, Status::Fail);
    }

    #[test]
    fn h7_star_examples() {
        let (f1, f2) = exf();
        let c = check_h7_star(
            &f1,
            &f2,
            &[10.0, 100.0, 1000.0],
            defaults::GROWTH_THRESHOLD,
            64,
        )
        .unwrap();
        assert_eq!(c.status, Status::HeuristicPass, "{c}");
        let c = check_h7_star(&f("u1"), &f2, &[10.0, 100.0, 1000.0], 1e3, 64).unwrap();
        assert_eq!(c.status, Status::Fail);
        // log growth is slow: it passes with a threshold suited to the probe range
        let c = check_h7_star(
            &f("u1 * log(1 + u1)"),
            &f("u2 * log(1 + u2)"),
            &[10.0, 100.0, 1000.0],
            5.0,
            64,
        )
        .unwrap();
        assert_eq!(c.status, Status::HeuristicPass);
        assert!(check_h7_star(&f1, &f2, &[10.0, 5.0, 100.0], 1e3, 64).is_err());
    }

    fn pair_system(f1: &str, f2: &str, lambda: [f64; 2]) -> SystemSpec {
        SystemSpec::builtin_pair(0.25, 0.5, f1, f2, lambda).unwrap()
    }

    #[test]
    fn lambda_sup_examples() {
        let sys = SystemSpec::worked_example([1.0, 1.0]);
        let sups = lambda_supremum(&sys, &sys.cone, [1.5, 0.625], HALF_PI, HALF_PI, 32).unwrap();
        assert!(sups[0].unbounded && sups[1].unbounded);

        let sys = pair_system("1 + u1 + u2", "1 + u1 + u2", [1.0, 1.0]);
        let sups = lambda_supremum(&sys, &sys.cone, [1.5, 1.5], 1.0, 1.0, 32).unwrap();
        assert!(!sups[0].unbounded);
        assert!(
            sups[0].sup < 1.0 / 6.0 && sups[0].sup > 1.0 / 6.0 - 1e-3,
            "{:?}",
            sups[0]
        );
        assert!(sups[0].at[0] > 0.99 && sups[0].at[1] < 0.01);

        let sys = pair_system("(u1 - 0.53125)^2 + (u2 - 0.28125)^2", "1", [1.0, 1.0]);
        let sups = lambda_supremum(&sys, &sys.cone, [1.5, 1.5], 1.0, 1.0, 16).unwrap();
        assert!(sups[0].unbounded);
        assert!(sups[0].sup.is_infinite());
    }

    #[test]
    fn lambda_sup_inverse_scaling() {
        let sys = pair_system("1 + u1 + u2^2", "2 + u1*u2", [1.0, 1.0]);
        let scaled = pair_system("2.5 * (1 + u1 + u2^2)", "2.5 * (2 + u1*u2)", [1.0, 1.0]);
        let a = lambda_supremum(&sys, &sys.cone, [1.5, 0.625], 1.0, 2.0, 16).unwrap();
        let b = lambda_supremum(&scaled, &sys.cone, [1.5, 0.625], 1.0, 2.0, 16).unwrap();
        for i in 0..2 {
            assert!((a[i].sup / 2.5 - b[i].sup).abs() < 1e-12 * a[i].sup);
            assert_eq!(a[i].unbounded, b[i].unbounded);
        }
    }

    #[test]
    fn find_beta_examples() {
        let sys = SystemSpec::worked_example([1.0, 1.0]);
        let slack = beta_slack(&sys, 0.5, [1.5, 0.625], [0.1, 0.1]).unwrap();
        assert!((slack[0] - (0.05 - 1.5 * (2.0 + 0.1f64.sin()) * 0.01)).abs() < 1e-15);
        assert!(slack[0] > 0.018 && slack[1] > 0.0);
        let b = find_beta(&sys, &sys.cone, [1.5, 0.625], HALF_PI, HALF_PI, 32)
            .unwrap()
            .unwrap();
        let again = beta_slack(&sys, 0.5, [1.5, 0.625], b.beta).unwrap();
        assert!(again[0] > 0.0 && again[1] > 0.0);

        let sys = pair_system("1 + u1 + u2", "1 + u1 + u2", [0.1, 0.1]);
        let s = beta_slack(&sys, 0.5, [1.5, 1.5], [0.9, 0.05]).unwrap();
        assert!(s[0] > 0.0);
        assert!((s[0] - (0.45 - 0.15 * 1.95)).abs() < 1e-15);

        let sys = pair_system("1 + u1 + u2", "1 + u1 + u2", [1e6, 1e6]);
        assert!(find_beta(&sys, &sys.cone, [1.5, 0.625], 1.0, 1.0, 16)
            .unwrap()
            .is_none());
    }

    #[test]
    fn find_beta_reaches_small_boxes_for_large_lambda() {
        let sys = SystemSpec::worked_example([10.0, 10.0]);
        let b = find_beta(&sys, &sys.cone, [1.5, 0.625], HALF_PI, HALF_PI, 16)
            .unwrap()
            .unwrap();
        assert!(b.beta[0] < 0.02 && b.min_slack() > 0.0);
    }

    #[test]
    fn existence_on_the_worked_example() {
        let grid = Grid::new(0.0, 1.0, 129).unwrap();
        let sys = SystemSpec::worked_example([1.0, 1.0]);
        let params = ExistenceParams {
            beta: [0.1, 0.1],
            r: 0.02,
            rho: 8.0,
            m: 4.0,
        };
        let r = check_existence(&sys, grid, &params, [1.0, 19.0 / 56.0], 32).unwrap();
        assert!(r.passed(), "{r}");

        let too_big = ExistenceParams { r: 0.05, ..params };
        let r = check_existence(&sys, grid, &too_big, [1.0, 19.0 / 56.0], 32).unwrap();
        assert_eq!(r.get("(a) ball in cone").unwrap().status, Status::Fail);

        let wavy = sys
            .with_nonlinearities("(2 + sin(20 * u2)) * u1^2", "(2 + sin(u1)) * u2^2")
            .unwrap();
        let r = check_existence(&wavy, grid, &params, [1.0, 19.0 / 56.0], 32).unwrap();
        let c = r.get("(c) monotone below beta").unwrap();
        assert_eq!(c.status, Status::Fail);
        assert!(c.witness.is_some());

        let weak = ExistenceParams { m: 2.0, ..params };
        let r = check_existence(&sys, grid, &weak, [1.0, 19.0 / 56.0], 32).unwrap();
        assert_eq!(
            r.get("(d) lambda M gamma_* > 1").unwrap().status,
            Status::Fail
        );
    }

    #[test]
    fn decreasing_premises_examples() {
        let grid = Grid::new(0.0, 1.0, 65).unwrap();
        let dec = pair_system("1 / (1 + u1 + u2)", "1 / (1 + u1 + u2)", [1.0, 1.0]);
        let r = check_decreasing(&dec, grid, [2.0, 2.0], 0.5, 32).unwrap();
        assert!(r.passed(), "{r}");
        let sys = SystemSpec::worked_example([1.0, 1.0]);
        let r = check_decreasing(&sys, grid, [0.1, 0.1], 0.01, 32).unwrap();
        assert_eq!(r.get("(b') non-increasing").unwrap().status, Status::Fail);
        let r = check_decreasing(&dec, grid, [2.0, 2.0], 2.5, 32).unwrap();
        assert_eq!(
            r.get("(a') 0 < R < ||alpha||").unwrap().status,
            Status::Fail
        );
    }
}
