//! Problem files: TOML with sections `[problem]`, `[equation.1]`,
//! `[equation.2]`, `[cone]`, `[hypotheses]`, `[solver]` and an optional
//! `[sweep]`. Expressions are quoted strings in the expression language.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use hammerstein_core::cone::{ConeParams, Envelope, EquationCone};
use hammerstein_core::constants::{estimate_c, estimate_envelope};
use hammerstein_core::defaults;
use hammerstein_core::kernels::{k1_constants, k2_constants};
use hammerstein_core::{
    Equation, Expression, Grid, HypothesisConfig, KernelSpec, Kink, SystemSpec,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] hammerstein_core::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Monotone,
    Picard,
    #[default]
    Newton,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "monotone" => Ok(Method::Monotone),
            "picard" => Ok(Method::Picard),
            "newton" => Ok(Method::Newton),
            other => Err(format!(
                "unknown method `{other}` (monotone, picard, newton)"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Monotone => "monotone",
            Method::Picard => "picard",
            Method::Newton => "newton",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
}

fn one() -> f64 {
    1.0
}

fn unit_weight() -> String {
    "1".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSection {
    pub lambda: f64,
    /// `k1`, `k2` or `custom`.
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Kernel over `(t, s)` for `kernel = "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_expr: Option<String>,
    /// Kink lines of a custom kernel: `"diagonal"` or `"s=<value>"`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kinks: Vec<String>,
    #[serde(default = "unit_weight")]
    pub weight: String,
    pub f: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval2: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2: Option<String>,
}

fn default_density() -> usize {
    defaults::LATTICE_DENSITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesSection {
    pub b1: f64,
    pub b2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default = "default_density")]
    pub density: usize,
}

fn default_grid() -> usize {
    defaults::GRID_NODES
}

fn default_initial() -> [f64; 2] {
    [3.0, 3.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub method: Method,
    /// Defaults to the method's own tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxiter: Option<usize>,
    /// Constant initial guess for Newton and Picard.
    #[serde(default = "default_initial")]
    pub initial: [f64; 2],
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            grid: default_grid(),
            method: Method::default(),
            tol: None,
            maxiter: None,
            initial: default_initial(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub problem: ProblemSection,
    /// Keys `"1"` and `"2"`.
    pub equation: BTreeMap<String, EquationSection>,
    #[serde(default)]
    pub cone: ConeSection,
    pub hypotheses: HypothesesSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl FromStr for ProblemConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: ProblemConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ProblemConfig {
    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        text.parse()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn equation(&self, i: usize) -> &EquationSection {
        &self.equation[&(i + 1).to_string()]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let keys: Vec<&str> = self.equation.keys().map(String::as_str).collect();
        if keys != ["1", "2"] {
            return invalid(format!(
                "expected sections [equation.1] and [equation.2], found {keys:?}"
            ));
        }
        for i in 0..2 {
            let lambda = self.equation(i).lambda;
            if !(lambda > 0.0 && lambda.is_finite()) {
                return invalid(format!(
                    "(H1) requires lambda_i > 0, but equation {} has lambda = {lambda}",
                    i + 1
                ));
            }
        }
        let h = &self.hypotheses;
        if !(h.b1 > 0.0 && h.b2 > 0.0) {
            return invalid(format!(
                "B1 and B2 must be positive, got {} and {}",
                h.b1, h.b2
            ));
        }
        let n = self.solver.grid;
        if n < 3 || n.is_multiple_of(2) {
            return invalid(format!("grid size must be odd and at least 3, got {n}"));
        }
        if let Some(sw) = &self.sweep {
            if sw.lambda1.is_empty() || sw.lambda2.is_empty() {
                return invalid("sweep lists must not be empty");
            }
            if sw
                .lambda1
                .iter()
                .chain(&sw.lambda2)
                .any(|l| l.is_nan() || *l <= 0.0)
            {
                return invalid("(H1) requires every swept lambda to be positive");
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Ok(Grid::new(self.problem.a, self.problem.b, self.solver.grid)?)
    }

    pub fn hypothesis_config(&self) -> HypothesisConfig {
        let h = &self.hypotheses;
        HypothesisConfig {
            b1: h.b1,
            b2: h.b2,
            m: h.m,
            rho: h.rho,
            density: h.density,
        }
    }

    fn kernel(&self, i: usize) -> Result<KernelSpec, ConfigError> {
        let eq = self.equation(i);
        let domain = (self.problem.a, self.problem.b);
        let builtin_domain = || {
            if domain != (0.0, 1.0) {
                invalid(format!(
                    "built-in kernel `{}` is defined on [0, 1], not [{}, {}]",
                    eq.kernel, domain.0, domain.1
                ))
            } else {
                Ok(())
            }
        };
        match eq.kernel.as_str() {
            "k1" => {
                builtin_domain()?;
                Ok(KernelSpec::K1)
            }
            "k2" => {
                builtin_domain()?;
                let (Some(xi), Some(eta)) = (eq.xi, eq.eta) else {
                    return invalid(format!("equation {}: kernel k2 needs xi and eta", i + 1));
                };
                Ok(KernelSpec::k2(xi, eta).map_err(hammerstein_core::Error::from)?)
            }
            "custom" => {
                let Some(src) = &eq.kernel_expr else {
                    return invalid(format!(
                        "equation {}: custom kernel needs kernel_expr",
                        i + 1
                    ));
                };
                let kinks = eq
                    .kinks
                    .iter()
                    .map(|k| parse_kink(k))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(
                    KernelSpec::custom(src, kinks, domain)
                        .map_err(hammerstein_core::Error::from)?,
                )
            }
            other => invalid(format!(
                "equation {}: unknown kernel `{other}` (k1, k2, custom)",
                i + 1
            )),
        }
    }

    /// Builds the system; cone data missing from `[cone]` come from the
    /// closed forms of built-in kernels or from a grid estimate.
    pub fn system(&self) -> Result<SystemSpec, ConfigError> {
        let grid = self.grid()?;
        let mut cones = Vec::with_capacity(2);
        let mut equations = Vec::with_capacity(2);
        for i in 0..2 {
            let kernel = self.kernel(i)?;
            let (interval, c, phi) = match i {
                0 => (self.cone.interval1, self.cone.c1, &self.cone.phi1),
                _ => (self.cone.interval2, self.cone.c2, &self.cone.phi2),
            };
            let builtin: Option<([f64; 2], f64, Expression)> = match &kernel {
                KernelSpec::K1 => {
                    let k = k1_constants();
                    Some(([k.interval.0, k.interval.1], k.c, k.phi))
                }
                KernelSpec::K2 { xi, eta } => {
                    let k = k2_constants(*xi, *eta).map_err(hammerstein_core::Error::from)?;
                    Some(([0.0, k.b2], k.c2, k.phi))
                }
                KernelSpec::Custom { .. } => None,
            };
            let interval = match (interval, &builtin) {
                (Some(iv), _) => iv,
                (None, Some((iv, _, _))) => *iv,
                (None, None) => {
                    return invalid(format!(
                        "equation {}: a custom kernel needs cone.interval{}",
                        i + 1,
                        i + 1
                    ))
                }
            };
            let phi = match (phi, &builtin) {
                (Some(src), _) => Envelope::Expr(
                    Expression::parse(src, &["s"]).map_err(hammerstein_core::Error::from)?,
                ),
                (None, Some((_, _, p))) => Envelope::Expr(p.clone()),
                (None, None) => Envelope::Sampled(estimate_envelope(&kernel, grid)?),
            };
            let c = match (c, &builtin, phi_overridden(i, &self.cone)) {
                (Some(c), _, _) => c,
                (None, Some((_, c, _)), false) => *c,
                _ => estimate_c(&kernel, &phi, (interval[0], interval[1]), grid)?,
            };
            let eq = self.equation(i);
            equations.push(Equation::new(eq.lambda, kernel, &eq.weight, &eq.f)?);
            cones.push(EquationCone {
                interval: (interval[0], interval[1]),
                c,
                phi,
            });
        }
        let cone = {
            let second = cones.pop().expect("two cones");
            let first = cones.pop().expect("two cones");
            ConeParams::new(first, second)?
        };
        let second = equations.pop().expect("two equations");
        let first = equations.pop().expect("two equations");
        Ok(SystemSpec::new(
            self.problem.a,
            self.problem.b,
            [first, second],
            cone,
        )?)
    }
}

fn phi_overridden(i: usize, cone: &ConeSection) -> bool {
    if i == 0 {
        cone.phi1.is_some()
    } else {
        cone.phi2.is_some()
    }
}

pub fn parse_kink(src: &str) -> Result<Kink, ConfigError> {
    let s = src.trim();
    if s == "diagonal" {
        return Ok(Kink::Diagonal);
    }
    if let Some(v) = s.strip_prefix("s=").or_else(|| s.strip_prefix("s =")) {
        if let Ok(x) = v.trim().parse::<f64>() {
            return Ok(Kink::Vertical(x));
        }
    }
    invalid(format!(
        "bad kink `{src}` (expected \"diagonal\" or \"s=<value>\")"
    ))
}
