use thiserror::Error;

use crate::expr::ExprError;
use crate::kernels::KernelError;

/// Errors raised by discretization, constants and hypothesis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid panel: {0}")]
    InvalidPanel(String),
    #[error("weight is negative ({value}) at s = {s}")]
    NegativeWeight { s: f64, value: f64 },
    #[error("invalid system: {0}")]
    System(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
