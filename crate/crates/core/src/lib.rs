//! Positive solutions of systems of two Hammerstein integral equations
//!
//! ```text
//! u1(t) = lambda1 * int_a^b k1(t, s) g1(s) f1(u1(s), u2(s)) ds
//! u2(t) = lambda2 * int_a^b k2(t, s) g2(s) f2(u1(s), u2(s)) ds
//! ```
//!
//! in the cone of nonnegative pairs whose minimum on a sub-interval
//! `[a_i, b_i]` controls their sup norm. The crate computes the kernel
//! constants the existence theory needs, checks its hypotheses numerically,
//! and finds fixed points of the discretized operator.

pub mod cone;
pub mod constants;
pub mod defaults;
pub mod error;
pub mod expr;
pub mod grid;
pub mod hypotheses;
pub mod kernels;
pub mod pipeline;
pub mod quadrature;
pub mod solver;
pub mod system;

pub use cone::{ConeParams, ConeVerdict, Envelope, EquationCone, Localization, Region};
pub use error::{Error, Result};
pub use expr::{ExprError, Expression};
pub use grid::{Grid, GridFunction, Pair};
pub use hypotheses::{Check, CheckReport, HypothesisConfig, Status};
pub use kernels::{KernelError, KernelSpec, Kink};
pub use pipeline::{check_system, SystemCheck};
pub use quadrature::DiscreteOperator;
pub use solver::{SolveReport, SolverError, SolverOptions};
pub use system::{Equation, SystemSpec};
