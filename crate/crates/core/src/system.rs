//! Problem description for the pair of integral equations
//! `u_i(t) = lambda_i * int_a^b k_i(t, s) g_i(s) f_i(u1(s), u2(s)) ds`.

use crate::cone::{ConeParams, Envelope, EquationCone};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::kernels::{k1_constants, k2_constants, KernelSpec};

/// One equation of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub lambda: f64,
    pub kernel: KernelSpec,
    /// Weight `g(s)`.
    pub weight: Expression,
    /// Nonlinearity `f(u1, u2)`.
    pub nonlinearity: Expression,
}

impl Equation {
    pub fn new(lambda: f64, kernel: KernelSpec, weight: &str, nonlinearity: &str) -> Result<Self> {
        Ok(Equation {
            lambda,
            kernel,
            weight: Expression::parse(weight, &["s"])?,
            nonlinearity: Expression::parse(nonlinearity, &["u1", "u2"])?,
        })
    }

    pub fn f(&self, u1: f64, u2: f64) -> Result<f64> {
        Ok(self.nonlinearity.eval(&[u1, u2])?)
    }

    pub fn g(&self, s: f64) -> Result<f64> {
        Ok(self.weight.eval(&[s])?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub a: f64,
    pub b: f64,
    pub equations: [Equation; 2],
    pub cone: ConeParams,
}

impl SystemSpec {
    pub fn new(a: f64, b: f64, equations: [Equation; 2], cone: ConeParams) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::System(format!("interval [{a}, {b}] is empty")));
        }
        for (i, eq) in equations.iter().enumerate() {
            let (ka, kb) = eq.kernel.domain();
            if ka != a || kb != b {
                return Err(Error::System(format!(
                    "kernel {} lives on [{ka}, {kb}] but the system is posed on [{a}, {b}]",
                    i + 1
                )));
            }
            let (lo, hi) = cone.equation(i).interval;
            if lo < a || hi > b {
                return Err(Error::System(format!(
                    "sub-interval [{lo}, {hi}] of equation {} is not inside [{a}, {b}]",
                    i + 1
                )));
            }
        }
        Ok(SystemSpec {
            a,
            b,
            equations,
            cone,
        })
    }

    pub fn equation(&self, i: usize) -> &Equation {
        &self.equations[i]
    }

    /// Same system with new parameters `lambda`.
    pub fn with_lambdas(&self, lambda: [f64; 2]) -> SystemSpec {
        let mut s = self.clone();
        s.equations[0].lambda = lambda[0];
        s.equations[1].lambda = lambda[1];
        s
    }

    /// Same system with the nonlinearities replaced.
    pub fn with_nonlinearities(&self, f1: &str, f2: &str) -> Result<SystemSpec> {
        let mut s = self.clone();
        s.equations[0].nonlinearity = Expression::parse(f1, &["u1", "u2"])?;
        s.equations[1].nonlinearity = Expression::parse(f2, &["u1", "u2"])?;
        Ok(s)
    }

    /// Kernels `K1` and `K2(xi, eta)` on `[0, 1]` with unit weights and the
    /// closed-form cone data of both kernels.
    pub fn builtin_pair(xi: f64, eta: f64, f1: &str, f2: &str, lambda: [f64; 2]) -> Result<Self> {
        let k1 = k1_constants();
        let k2 = k2_constants(xi, eta)?;
        let cone = ConeParams::new(
            EquationCone {
                interval: k1.interval,
                c: k1.c,
                phi: Envelope::Expr(k1.phi),
            },
            EquationCone {
                interval: (0.0, k2.b2),
                c: k2.c2,
                phi: Envelope::Expr(k2.phi),
            },
        )?;
        SystemSpec::new(
            0.0,
            1.0,
            [
                Equation::new(lambda[0], KernelSpec::K1, "1", f1)?,
                Equation::new(lambda[1], KernelSpec::k2(xi, eta)?, "1", f2)?,
            ],
            cone,
        )
    }

    /// The two-kernel example with `xi = 1/4`, `eta = 1/2` and
    /// `f1 = (2 + sin u2) u1^2`, `f2 = (2 + sin u1) u2^2`.
    pub fn worked_example(lambda: [f64; 2]) -> Self {
        Self::builtin_pair(
            0.25,
            0.5,
            "(2 + sin(u2)) * u1^2",
            "(2 + sin(u1)) * u2^2",
            lambda,
        )
        .expect("static example")
    }
}
