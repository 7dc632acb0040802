//! Green's-function kernels and their cone constants.
//!
//! Two kernels are built in, both on `[0, 1]^2`:
//!
//! * `K1`, for `u'' + f = 0`, `u'(0) = 0`, `u(1) + u'(1) = 0`:
//!   `k(t, s) = 2 - max(s, t)`.
//! * `K2(xi, eta)`, for `u'' + f = 0`, `u'(0) = 0`, `u(1) = xi u(eta)`:
//!   `k(t, s) = (1 - s)/(1 - xi) - [s <= eta] xi (eta - s)/(1 - xi) - [s <= t] (t - s)`.
//!
//! Custom kernels are expressions in `(t, s)` with declared kink curves.

use thiserror::Error;

use crate::expr::{ExprError, Expression};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("point (t, s) = ({t}, {s}) lies outside [{a}, {b}]^2")]
    OutOfDomain { t: f64, s: f64, a: f64, b: f64 },
    #[error("invalid kernel parameters: {0}")]
    Parameter(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A curve along which a kernel is allowed to be non-smooth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kink {
    /// The diagonal `s = t`.
    Diagonal,
    /// The vertical line `s = s0`.
    Vertical(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    K1,
    K2 {
        xi: f64,
        eta: f64,
    },
    Custom {
        /// Expression over the variables `(t, s)`.
        expr: Expression,
        kinks: Vec<Kink>,
        domain: (f64, f64),
    },
}

const DOMAIN_SLACK: f64 = 1e-12;

impl KernelSpec {
    pub fn k2(xi: f64, eta: f64) -> Result<Self, KernelError> {
        check_k2_params(xi, eta)?;
        Ok(KernelSpec::K2 { xi, eta })
    }

    /// Parses a custom kernel over `(t, s)` on `[a, b]^2`.
    pub fn custom(source: &str, kinks: Vec<Kink>, domain: (f64, f64)) -> Result<Self, KernelError> {
        if domain.0.partial_cmp(&domain.1) != Some(std::cmp::Ordering::Less) {
            return Err(KernelError::Parameter(format!(
                "empty domain [{}, {}]",
                domain.0, domain.1
            )));
        }
        let expr = Expression::parse(source, &["t", "s"])?;
        Ok(KernelSpec::Custom {
            expr,
            kinks,
            domain,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            KernelSpec::Custom { domain, .. } => *domain,
            _ => (0.0, 1.0),
        }
    }

    pub fn kinks(&self) -> Vec<Kink> {
        match self {
            KernelSpec::K1 => vec![Kink::Diagonal],
            KernelSpec::K2 { eta, .. } => vec![Kink::Diagonal, Kink::Vertical(*eta)],
            KernelSpec::Custom { kinks, .. } => kinks.clone(),
        }
    }

    /// Points in `s` where row `t` of the kernel may be non-smooth, sorted.
    pub fn breakpoints(&self, t: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .kinks()
            .into_iter()
            .map(|k| match k {
                Kink::Diagonal => t,
                Kink::Vertical(s0) => s0,
            })
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn eval(&self, t: f64, s: f64) -> Result<f64, KernelError> {
        let (a, b) = self.domain();
        let inside = |x: f64| x >= a - DOMAIN_SLACK && x <= b + DOMAIN_SLACK;
        if !(inside(t) && inside(s)) {
            return Err(KernelError::OutOfDomain { t, s, a, b });
        }
        Ok(match self {
            KernelSpec::K1 => k1(t, s),
            KernelSpec::K2 { xi, eta } => k2(*xi, *eta, t, s),
            KernelSpec::Custom { expr, .. } => expr.eval(&[t, s])?,
        })
    }

    pub fn name(&self) -> String {
        match self {
            KernelSpec::K1 => "k1".into(),
            KernelSpec::K2 { xi, eta } => format!("k2(xi={xi}, eta={eta})"),
            KernelSpec::Custom { expr, .. } => format!("custom({expr})"),
        }
    }
}

fn check_k2_params(xi: f64, eta: f64) -> Result<(), KernelError> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if open_unit(xi) && open_unit(eta) {
        Ok(())
    } else {
        Err(KernelError::Parameter(format!(
            "k2 needs 0 < xi < 1 and 0 < eta < 1, got xi={xi}, eta={eta}"
        )))
    }
}

// On the diagonal the `s <= t` branch is used.
fn k1(t: f64, s: f64) -> f64 {
    if s <= t {
        2.0 - t
    } else {
        2.0 - s
    }
}

fn k2(xi: f64, eta: f64, t: f64, s: f64) -> f64 {
    let mut k = (1.0 - s) / (1.0 - xi);
    if s <= eta {
        k -= xi / (1.0 - xi) * (eta - s);
    }
    if s <= t {
        k -= t - s;
    }
    k
}

/// Closed-form cone data of `K1` with unit weight.
#[derive(Debug, Clone, PartialEq)]
pub struct K1Constants {
    pub phi: Expression,
    pub c: f64,
    pub interval: (f64, f64),
    pub gamma_star: f64,
    pub gamma_lower: f64,
}

pub fn k1_constants() -> K1Constants {
    K1Constants {
        phi: Expression::parse("2 - s", &["s"]).expect("static expression"),
        c: 0.5,
        interval: (0.0, 1.0),
        gamma_star: 1.5,
        gamma_lower: 1.0,
    }
}

/// Which branch of the `b2` case split applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K2Case {
    /// `1 + xi eta <= 2 eta`
    EtaLarge,
    /// `1 + xi eta > 2 eta`
    EtaSmall,
}

/// Closed-form cone data of `K2(xi, eta)` with unit weight, on `[0, b2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct K2Constants {
    pub case: K2Case,
    pub b2: f64,
    pub c2: f64,
    pub gamma_star: f64,
    pub gamma_lower: f64,
    /// `Phi2(s) = k2(0, s)`.
    pub phi: Expression,
}

pub fn k2_constants(xi: f64, eta: f64) -> Result<K2Constants, KernelError> {
    check_k2_params(xi, eta)?;
    let case = if 1.0 + xi * eta <= 2.0 * eta {
        K2Case::EtaLarge
    } else {
        K2Case::EtaSmall
    };
    let b2 = match case {
        K2Case::EtaLarge => (1.0 - xi * eta) / (2.0 * (1.0 - xi)),
        K2Case::EtaSmall => 1.0 / (2.0 - xi),
    };
    let c2 = (1.0 - xi * eta - (1.0 - xi) * b2) / (1.0 - xi * eta);
    let gamma_star = (1.0 - xi * eta * eta) / (2.0 * (1.0 - xi));
    let gamma_lower = match case {
        K2Case::EtaLarge => b2 * b2,
        K2Case::EtaSmall => {
            (1.0 - 2.0 * xi * eta * eta + xi * xi * eta * eta) / (2.0 * (1.0 - xi) * (2.0 - xi))
        }
    };
    let phi = Expression::parse(
        &format!("(1 - s - {xi} * max({eta} - s, 0)) / (1 - {xi})"),
        &["s"],
    )?;
    Ok(K2Constants {
        case,
        b2,
        c2,
        gamma_star,
        gamma_lower,
        phi,
    })
}
