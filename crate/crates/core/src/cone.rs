//! The cone
//! `K = { (u1, u2) : u_i >= 0, min_{[a_i, b_i]} u_i >= c ||u_i|| }`
//! on grid functions, its partial order, and the localization sets used to
//! describe where a fixed point lives.

use std::fmt;

use crate::defaults;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::grid::{GridFunction, Pair};

/// Upper envelope `Phi(s)` of a kernel: either closed-form or sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    Expr(Expression),
    Sampled(GridFunction),
}

impl Envelope {
    pub fn eval(&self, s: f64) -> Result<f64> {
        match self {
            Envelope::Expr(e) => Ok(e.eval(&[s])?),
            Envelope::Sampled(f) => Ok(f.interpolate(s)),
        }
    }
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Envelope::Expr(e) => write!(f, "{e}"),
            Envelope::Sampled(g) => write!(f, "<sampled on {} nodes>", g.grid().len()),
        }
    }
}

/// Cone data of one equation.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationCone {
    pub interval: (f64, f64),
    pub c: f64,
    pub phi: Envelope,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeParams {
    equations: [EquationCone; 2],
}

impl ConeParams {
    pub fn new(first: EquationCone, second: EquationCone) -> Result<Self> {
        for (i, eq) in [&first, &second].into_iter().enumerate() {
            if !(eq.c > 0.0 && eq.c < 1.0) {
                return Err(Error::System(format!(
                    "cone constant c{} = {} must lie in (0, 1)",
                    i + 1,
                    eq.c
                )));
            }
            if eq.interval.0.partial_cmp(&eq.interval.1) != Some(std::cmp::Ordering::Less) {
                return Err(Error::System(format!(
                    "sub-interval [{}, {}] of equation {} is empty",
                    eq.interval.0,
                    eq.interval.1,
                    i + 1
                )));
            }
        }
        Ok(ConeParams {
            equations: [first, second],
        })
    }

    pub fn equation(&self, i: usize) -> &EquationCone {
        &self.equations[i]
    }

    pub fn equations(&self) -> &[EquationCone; 2] {
        &self.equations
    }

    /// Pair-level constant `c = min(c1, c2)`.
    pub fn c(&self) -> f64 {
        self.equations[0].c.min(self.equations[1].c)
    }
}

/// `max(||u1||, ||u2||)`.
pub fn norm_pair(u: &Pair) -> f64 {
    u.norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeVerdict {
    pub member: bool,
    /// Smallest slack over all membership inequalities (negative when violated).
    pub margin: f64,
    /// Component (0 or 1) and node abscissa where the smallest slack occurs.
    pub component: usize,
    pub t: f64,
}

pub fn in_cone(u: &Pair, cp: &ConeParams) -> ConeVerdict {
    in_cone_with_tol(u, cp, defaults::CONE_TOL)
}

pub fn in_cone_with_tol(u: &Pair, cp: &ConeParams, tol: f64) -> ConeVerdict {
    let c = cp.c();
    let grid = u.grid();
    let mut worst = ConeVerdict {
        member: true,
        margin: f64::INFINITY,
        component: 0,
        t: grid.a(),
    };
    for (i, comp) in u.components().into_iter().enumerate() {
        let values = comp.values();
        for (j, v) in values.iter().enumerate() {
            if *v < worst.margin {
                worst = ConeVerdict {
                    margin: *v,
                    component: i,
                    t: grid.node(j),
                    ..worst
                };
            }
        }
        let (lo, hi) = cp.equation(i).interval;
        let bound = c * comp.sup_norm();
        let mut min_slack = f64::INFINITY;
        let mut at = grid.a();
        for j in grid.indices_in(lo, hi) {
            let slack = values[j] - bound;
            if slack < min_slack {
                min_slack = slack;
                at = grid.node(j);
            }
        }
        if min_slack < worst.margin {
            worst = ConeVerdict {
                margin: min_slack,
                component: i,
                t: at,
                ..worst
            };
        }
    }
    worst.member = worst.margin >= -tol;
    worst
}

/// `u <= v` in the cone order, i.e. `v - u` lies in the cone.
pub fn order_leq(u: &Pair, v: &Pair, cp: &ConeParams) -> bool {
    in_cone(&(v - u), cp).member
}

pub fn order_leq_with_tol(u: &Pair, v: &Pair, cp: &ConeParams, tol: f64) -> bool {
    in_cone_with_tol(&(v - u), cp, tol).member
}

/// Largest `R` with the closed ball `B[beta, R]` inside the cone, for a constant `beta`.
///
/// A function `w` with `|w - beta_i| <= R` has `min w_i >= beta_i - R` and
/// `||w_i|| <= beta_i + R`, so membership needs `beta_i - R >= c (beta_i + R)`.
pub fn ball_in_cone_radius(beta: [f64; 2], cp: &ConeParams) -> f64 {
    let c = cp.c();
    let r = beta[0].min(beta[1]);
    r * (1.0 - c) / (1.0 + c)
}

/// Sets of the localization statement a fixed point may fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    /// `{ x <= beta, ||x|| >= R/d }`
    P,
    /// `{ min_{[a_i, b_i]} u_i < rho, i = 1, 2 }`
    V,
    /// On the boundary of `V` within tolerance.
    VBoundary,
    /// `||x|| < R`
    KR,
    /// `V` minus the closed `R`-ball.
    VMinusClosedKR,
    /// `K_R` minus the closure of `V`.
    KRMinusClosedV,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::P => "P",
            Region::V => "V",
            Region::VBoundary => "dV",
            Region::KR => "K_R",
            Region::VMinusClosedKR => "V-K_R",
            Region::KRMinusClosedV => "K_R-V",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parameters of the localization sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    pub r: f64,
    pub rho: f64,
    pub beta: [f64; 2],
    /// Normal constant of the cone; the sup-norm cone has `d = 1`.
    pub d: f64,
}

impl Localization {
    pub fn new(r: f64, rho: f64, beta: [f64; 2]) -> Self {
        Localization {
            r,
            rho,
            beta,
            d: 1.0,
        }
    }
}

/// Every region tag that applies to `u`. `u` is expected to lie in the cone.
pub fn localize(u: &Pair, cp: &ConeParams, loc: &Localization) -> Vec<Region> {
    let tol = defaults::CONE_TOL;
    let norm = u.norm();
    let grid = u.grid();
    let mut tags = Vec::new();

    let beta = Pair::constant(grid, loc.beta);
    if order_leq(u, &beta, cp) && norm >= loc.r / loc.d - tol {
        tags.push(Region::P);
    }

    let minima: Vec<f64> = (0..2)
        .map(|i| {
            let (lo, hi) = cp.equation(i).interval;
            let values = u.component(i).values();
            grid.indices_in(lo, hi)
                .map(|j| values[j])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let in_closed_v = minima.iter().all(|m| *m <= loc.rho + tol);
    let on_boundary = in_closed_v && minima.iter().any(|m| (m - loc.rho).abs() <= tol);
    let in_v = !on_boundary && minima.iter().all(|m| *m < loc.rho);
    if in_v {
        tags.push(Region::V);
    }
    if on_boundary {
        tags.push(Region::VBoundary);
    }

    let in_kr = norm < loc.r;
    let in_closed_kr = norm <= loc.r + tol;
    if in_kr {
        tags.push(Region::KR);
    }
    if in_v && !in_closed_kr {
        tags.push(Region::VMinusClosedKR);
    }
    if in_kr && !in_closed_v {
        tags.push(Region::KRMinusClosedV);
    }
    tags
}

/// `R <= ||x|| <= ||alpha||`, the shell used with non-increasing operators.
pub fn in_shell(u: &Pair, r: f64, alpha_norm: f64) -> bool {
    let n = u.norm();
    n >= r - defaults::CONE_TOL && n <= alpha_norm + defaults::CONE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn params(c: f64, sub2: (f64, f64)) -> ConeParams {
        let phi = Envelope::Expr(Expression::constant(1.0, &["s"]));
        ConeParams::new(
            EquationCone {
                interval: (0.0, 1.0),
                c,
                phi: phi.clone(),
            },
            EquationCone {
                interval: sub2,
                c,
                phi,
            },
        )
        .unwrap()
    }

    fn grid() -> Grid {
        Grid::new(0.0, 1.0, 33).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        let phi = Envelope::Expr(Expression::constant(1.0, &["s"]));
        let eq = |c, interval| EquationCone {
            interval,
            c,
            phi: phi.clone(),
        };
        assert!(ConeParams::new(eq(1.0, (0.0, 1.0)), eq(0.5, (0.0, 1.0))).is_err());
        assert!(ConeParams::new(eq(0.5, (0.5, 0.5)), eq(0.5, (0.0, 1.0))).is_err());
    }

    #[test]
    fn norms() {
        let g = grid();
        assert_eq!(norm_pair(&Pair::constant(g, [1.5, 0.2])), 1.5);
        assert_eq!(norm_pair(&Pair::zeros(g)), 0.0);
        let u = Pair::new(
            GridFunction::from_fn(g, |t| 1.5 - t * t / 2.0),
            GridFunction::from_fn(g, |t| 0.625 - t * t / 2.0),
        )
        .unwrap();
        assert_eq!(norm_pair(&u), 1.5);
    }

    #[test]
    fn membership_examples() {
        let g = grid();
        let cp = params(0.5, (0.0, 1.0));
        let f = GridFunction::from_fn(g, |t| 1.0 + t);
        let v = in_cone(&Pair::new(f.clone(), f).unwrap(), &cp);
        assert!(v.member);
        assert_eq!(v.margin, 0.0);

        let mut neg = Pair::constant(g, [1.0, 1.0]);
        neg.u2.values_mut()[5] = -0.1;
        let v = in_cone(&neg, &cp);
        assert!(!v.member);
        assert_eq!(v.component, 1);

        assert!(in_cone(&Pair::constant(g, [0.3, 2.0]), &cp).member);
    }

    #[test]
    fn order_examples() {
        let g = grid();
        let cp = params(0.5, (0.0, 1.0));
        let v = Pair::constant(g, [0.4, 0.7]);
        assert!(order_leq(&Pair::zeros(g), &v, &cp));
        assert!(order_leq(&v, &v, &cp));
        assert!(!order_leq(
            &Pair::constant(g, [0.1, 0.1]),
            &Pair::constant(g, [0.2, 0.05]),
            &cp
        ));
    }

    #[test]
    fn ball_radius_examples() {
        let cp = params(0.5, (0.0, 1.0));
        assert!((ball_in_cone_radius([0.1, 0.1], &cp) - 1.0 / 30.0).abs() < 1e-16);
        assert!((ball_in_cone_radius([1.0, 2.0], &cp) - 1.0 / 3.0).abs() < 1e-16);
        let cp = params(1e-12, (0.0, 1.0));
        assert!((ball_in_cone_radius([0.3, 2.0], &cp) - 0.3).abs() < 1e-11);
    }

    #[test]
    fn localization_examples() {
        let g = grid();
        let cp = params(0.5, (0.0, 0.5));
        let tags = localize(
            &Pair::constant(g, [0.05, 0.05]),
            &cp,
            &Localization::new(0.2, 1.0, [0.1, 0.1]),
        );
        assert!(tags.contains(&Region::KR));
        assert!(tags.contains(&Region::V));
        assert!(!tags.contains(&Region::VMinusClosedKR));

        let u = Pair::constant(g, [1.0, 0.5]);
        let tags = localize(&u, &cp, &Localization::new(0.2, 1.0, [2.0, 2.0]));
        assert!(tags.contains(&Region::VBoundary));
        assert!(!tags.contains(&Region::V));

        let beta = [0.3, 0.4];
        let tags = localize(
            &Pair::constant(g, beta),
            &cp,
            &Localization::new(0.1, 1.0, beta),
        );
        assert!(tags.contains(&Region::P));
        assert!(tags.contains(&Region::VMinusClosedKR));

        let tags = localize(
            &Pair::constant(g, [2.0, 0.1]),
            &cp,
            &Localization::new(3.0, 1.0, [4.0, 4.0]),
        );
        assert!(tags.contains(&Region::KRMinusClosedV));
        assert!(in_shell(&Pair::constant(g, [2.0, 0.1]), 1.0, 4.0));
    }

    fn arb_cone_pair(n: usize) -> impl Strategy<Value = Pair> {
        // lower part plus a nonnegative bump bounded by the lower part
        (
            prop::collection::vec(0.0..1.0f64, n),
            prop::collection::vec(0.0..1.0f64, n),
            0.1..5.0f64,
            0.1..5.0f64,
        )
            .prop_map(move |(x, y, s1, s2)| {
                let g = Grid::new(0.0, 1.0, n).unwrap();
                let f1 = GridFunction::new(g, x.iter().map(|v| s1 * (1.0 + v)).collect()).unwrap();
                let f2 = GridFunction::new(g, y.iter().map(|v| s2 * (1.0 + v)).collect()).unwrap();
                Pair::new(f1, f2).unwrap()
            })
    }

    proptest! {
        #[test]
        fn cone_axioms(u in arb_cone_pair(9), v in arb_cone_pair(9), s in 0.0..10.0f64) {
            let cp = params(0.5, (0.0, 0.5));
            prop_assert!(in_cone(&u, &cp).member);
            prop_assert!(in_cone(&v, &cp).member);
            prop_assert!(in_cone(&(&u + &v), &cp).member);
            prop_assert!(in_cone(&u.scale(s), &cp).member);
        }

        #[test]
        fn order_is_a_partial_order(u in arb_cone_pair(9), v in arb_cone_pair(9), w in arb_cone_pair(9)) {
            let cp = params(0.5, (0.0, 0.5));
            prop_assert!(order_leq(&u, &u, &cp));
            let uv = &u + &v;
            let uvw = &uv + &w;
            prop_assert!(order_leq(&u, &uv, &cp));
            prop_assert!(order_leq(&uv, &uvw, &cp));
            prop_assert!(order_leq(&u, &uvw, &cp));
            if order_leq(&u, &v, &cp) && order_leq(&v, &u, &cp) {
                prop_assert!((&u - &v).norm() <= 2e-9);
            }
        }
    }
}
