//! End-to-end verification of a system: constants, every hypothesis, the
//! admissible parameter range, an upper solution and the premises of the
//! existence statement for non-decreasing operators.

use crate::cone::{ball_in_cone_radius, Localization};
use crate::constants::{compute_constants, ConstantsReport};
use crate::defaults;
use crate::error::Result;
use crate::grid::Grid;
use crate::hypotheses::{
    check_existence, check_h6, check_h7, check_h7_star, find_beta, lambda_supremum, BetaCandidate,
    Check, CheckReport, ExistenceParams, HypothesisConfig, LambdaSup, Status, Witness,
};
use crate::system::SystemSpec;

/// Probe magnitudes of the superlinear-growth diagnostic.
pub const GROWTH_PROBES: [f64; 3] = [10.0, 100.0, 1000.0];

/// Doublings tried when searching for a level `rho` that satisfies the growth condition.
const RHO_MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemCheck {
    pub constants: ConstantsReport,
    /// (H1)-(H7), the parameter range and the upper-solution search.
    pub hypotheses: CheckReport,
    /// Superlinear growth; informational, (H7) itself is checked directly.
    pub h7_star: Check,
    pub lambda_sup: [LambdaSup; 2],
    pub beta: Option<BetaCandidate>,
    pub existence: Option<(ExistenceParams, CheckReport)>,
}

impl SystemCheck {
    pub fn passed(&self) -> bool {
        self.hypotheses.passed() && self.existence.as_ref().is_some_and(|(_, r)| r.passed())
    }
}

fn check(name: &str, status: Status, margin: f64, note: String) -> Check {
    Check {
        name: name.into(),
        status,
        margin,
        witness: Some(Witness {
            at: Vec::new(),
            note,
        }),
    }
}

fn sampled(ok: bool) -> Status {
    if ok {
        Status::HeuristicPass
    } else {
        Status::Fail
    }
}

/// Growth level used for the index-zero premise: half again the smallest admissible value.
pub fn default_m(sys: &SystemSpec, gamma_lower: [f64; 2]) -> f64 {
    let need = (0..2)
        .map(|i| 1.0 / (sys.equation(i).lambda * gamma_lower[i]))
        .fold(1.0f64, f64::max);
    1.5 * need
}

/// Smallest `rho = 2^k` (k >= 0) at which the sampled growth condition holds for `m`.
pub fn find_rho(sys: &SystemSpec, m: f64, density: usize) -> Option<f64> {
    let c = sys.cone.c();
    let mut rho = 1.0;
    for _ in 0..=RHO_MAX_DOUBLINGS {
        let h7 = check_h7(
            &sys.equation(0).nonlinearity,
            &sys.equation(1).nonlinearity,
            c,
            rho,
            m,
            density,
        );
        if h7.status.is_pass() {
            return Some(rho);
        }
        rho *= 2.0;
    }
    None
}

fn existence_params(sys: &SystemSpec, beta: [f64; 2], rho: f64, m: f64) -> ExistenceParams {
    let radius = ball_in_cone_radius(beta, &sys.cone);
    ExistenceParams {
        beta,
        r: 0.5 * radius.min(rho),
        rho,
        m,
    }
}

/// `beta`, `R`, `rho` and `M` as chosen by [`check_system_with`], when a
/// constant upper solution and a growth level exist.
pub fn derive_params(
    sys: &SystemSpec,
    cfg: &HypothesisConfig,
    constants: &ConstantsReport,
) -> Result<Option<ExistenceParams>> {
    cfg.validate()?;
    let gamma_star = [constants.gamma_star(0), constants.gamma_star(1)];
    let gamma_lower = [constants.gamma_lower(0), constants.gamma_lower(1)];
    let m = cfg.m.unwrap_or_else(|| default_m(sys, gamma_lower));
    let Some(rho) = cfg.rho.or_else(|| find_rho(sys, m, cfg.density)) else {
        return Ok(None);
    };
    let beta = find_beta(sys, &sys.cone, gamma_star, cfg.b1, cfg.b2, cfg.density)?;
    Ok(beta.map(|b| existence_params(sys, b.beta, rho, m)))
}

/// Localization sets for the given parameters.
pub fn localization(params: &ExistenceParams) -> Localization {
    Localization::new(params.r, params.rho, params.beta)
}

pub fn check_system(sys: &SystemSpec, grid: Grid, cfg: &HypothesisConfig) -> Result<SystemCheck> {
    let constants = compute_constants(sys, grid)?;
    check_system_with(sys, grid, cfg, &constants)
}

/// Same as [`check_system`] with precomputed constants; they depend only on
/// kernels, weights and cone data, not on `lambda` or `f`.
pub fn check_system_with(
    sys: &SystemSpec,
    grid: Grid,
    cfg: &HypothesisConfig,
    constants: &ConstantsReport,
) -> Result<SystemCheck> {
    cfg.validate()?;
    let f1 = &sys.equation(0).nonlinearity;
    let f2 = &sys.equation(1).nonlinearity;
    let gamma_star = [constants.gamma_star(0), constants.gamma_star(1)];
    let gamma_lower = [constants.gamma_lower(0), constants.gamma_lower(1)];
    let mut report = CheckReport::default();

    let lambdas = [sys.equation(0).lambda, sys.equation(1).lambda];
    let least = lambdas[0].min(lambdas[1]);
    report.push(check(
        "H1",
        if least > 0.0 {
            Status::Pass
        } else {
            Status::Fail
        },
        least,
        format!("lambda = ({}, {})", lambdas[0], lambdas[1]),
    ));

    let mut kmin = (f64::INFINITY, String::new());
    for i in 0..2 {
        let k = &sys.equation(i).kernel;
        for t in grid.nodes() {
            for s in grid.nodes() {
                let v = k.eval(t, s)?;
                if v < kmin.0 {
                    kmin = (v, format!("k{}({t:.6}, {s:.6}) = {v:.6e}", i + 1));
                }
            }
        }
    }
    report.push(check(
        "H2",
        sampled(kmin.0 >= -defaults::ENVELOPE_TOL),
        kmin.0,
        kmin.1,
    ));

    let mut gmin = (f64::INFINITY, String::new());
    for i in 0..2 {
        for s in grid.nodes() {
            let v = sys.equation(i).g(s)?;
            if v < gmin.0 {
                gmin = (v, format!("g{}({s:.6}) = {v:.6e}", i + 1));
            }
        }
    }
    report.push(check("H3", sampled(gmin.0 > 0.0), gmin.0, gmin.1));

    let mut fmin = (f64::INFINITY, String::new());
    let d = cfg.density;
    for (i, f) in [f1, f2].into_iter().enumerate() {
        for a in 0..d {
            for b in 0..d {
                let x = [
                    cfg.b1 * a as f64 / (d - 1) as f64,
                    cfg.b2 * b as f64 / (d - 1) as f64,
                ];
                let v = f.eval(&x)?;
                if v < fmin.0 {
                    fmin = (v, format!("f{}({:.6}, {:.6}) = {v:.6e}", i + 1, x[0], x[1]));
                }
            }
        }
    }
    report.push(check("H4", sampled(fmin.0 >= 0.0), fmin.0, fmin.1));

    let mut h5_ok = true;
    let mut h5_margin = f64::INFINITY;
    let mut notes = Vec::new();
    for i in 0..2 {
        let eqc = &constants.equations[i];
        let cone = sys.cone.equation(i);
        let ok = eqc.h5.passed && cone.c > 0.0 && cone.c < 1.0 && gamma_lower[i] > 0.0;
        h5_ok &= ok;
        h5_margin = h5_margin.min(-eqc.h5_worst_violation());
        notes.push(format!(
            "c{} = {:.6}, gamma{}* = {:.6}, gamma{},* = {:.6}",
            i + 1,
            cone.c,
            i + 1,
            gamma_star[i],
            i + 1,
            gamma_lower[i]
        ));
    }
    report.push(check("H5", sampled(h5_ok), h5_margin, notes.join("; ")));

    report.push(check_h6(f1, f2, cfg.b1, cfg.b2, cfg.density)?);

    let m = cfg.m.unwrap_or_else(|| default_m(sys, gamma_lower));
    let rho = cfg.rho.or_else(|| find_rho(sys, m, cfg.density));
    match rho {
        Some(rho) => report.push(check_h7(f1, f2, sys.cone.c(), rho, m, cfg.density)),
        None => report.push(check(
            "H7",
            Status::Fail,
            f64::NEG_INFINITY,
            format!(
                "no rho up to 2^{RHO_MAX_DOUBLINGS} satisfies the growth condition for M = {m}"
            ),
        )),
    }

    let h7_star = check_h7_star(
        f1,
        f2,
        &GROWTH_PROBES,
        defaults::GROWTH_THRESHOLD,
        cfg.density,
    )?;

    let lambda_sup = lambda_supremum(sys, &sys.cone, gamma_star, cfg.b1, cfg.b2, cfg.density)?;
    let admitted = (0..2).all(|i| lambda_sup[i].admits(lambdas[i]));
    let describe = |s: &LambdaSup| {
        if s.unbounded {
            "unbounded".to_string()
        } else {
            format!("{:.6e}", s.sup)
        }
    };
    report.push(check(
        "lambda range",
        sampled(admitted),
        (0..2)
            .map(|i| lambda_sup[i].sup - lambdas[i])
            .fold(f64::INFINITY, f64::min),
        format!(
            "sup1 = {}, sup2 = {}",
            describe(&lambda_sup[0]),
            describe(&lambda_sup[1])
        ),
    ));

    let beta = find_beta(sys, &sys.cone, gamma_star, cfg.b1, cfg.b2, cfg.density)?;
    report.push(match &beta {
        Some(b) => check(
            "upper solution",
            Status::Pass,
            b.min_slack(),
            format!("beta = ({:.6e}, {:.6e})", b.beta[0], b.beta[1]),
        ),
        None => check(
            "upper solution",
            Status::Fail,
            f64::NEG_INFINITY,
            "no constant pair in the box satisfies the slack inequalities".into(),
        ),
    });

    let existence = match (beta, rho) {
        (Some(b), Some(rho)) => {
            let params = existence_params(sys, b.beta, rho, m);
            let r = check_existence(sys, grid, &params, gamma_lower, cfg.density)?;
            Some((params, r))
        }
        _ => None,
    };

    Ok(SystemCheck {
        constants: *constants,
        hypotheses: report,
        h7_star,
        lambda_sup,
        beta,
        existence,
    })
}
