//! Default tolerances and sizes, in one place.

/// Grid nodes used when nothing else is requested.
pub const GRID_NODES: usize = 257;

/// Absolute slack for cone membership and order comparisons.
pub const CONE_TOL: f64 = 1e-9;

/// Slack for the pointwise envelope inequalities `k <= Phi`, `c Phi <= k`.
pub const ENVELOPE_TOL: f64 = 1e-12;

/// Strict inequalities `x > y` are evaluated as `x >= y + STRICT_MARGIN`.
pub const STRICT_MARGIN: f64 = 1e-9;

/// Subtracted from a grid infimum so the returned cone constant passes its own scan.
pub const C_SAFETY_MARGIN: f64 = 1e-9;

/// Simpson subintervals per smooth panel in stand-alone integrals.
pub const SIMPSON_SUBINTERVALS: usize = 64;

/// Grid refinement of the gamma searches stops once successive values agree to this.
pub const GAMMA_REFINE_TOL: f64 = 1e-8;
pub const GAMMA_MAX_REFINEMENTS: usize = 4;

/// Weights below this are treated as negative.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Lattice points per axis in hypothesis scans.
pub const LATTICE_DENSITY: usize = 32;
pub const MIN_LATTICE_DENSITY: usize = 16;

/// Value the last growth-ratio probe has to exceed for a superlinearity pass.
pub const GROWTH_THRESHOLD: f64 = 1e3;

/// Box halvings tried when searching for a constant upper solution.
pub const BETA_MAX_HALVINGS: usize = 40;

/// Lattice doublings used to estimate an admissible-parameter supremum.
pub const LAMBDA_SUP_REFINEMENTS: usize = 4;
/// Relative growth between the last two refinements above which the supremum is flagged unbounded.
pub const LAMBDA_SUP_GROWTH: f64 = 0.25;

/// Stopping tolerance on the sup-norm change between fixed-point iterates.
pub const ITER_TOL: f64 = 1e-10;
pub const ITER_MAX: usize = 10_000;

/// Stopping tolerance on the Newton residual.
pub const NEWTON_TOL: f64 = 1e-8;
pub const NEWTON_MAX: usize = 100;
pub const NEWTON_MAX_HALVINGS: usize = 30;
/// Relative finite-difference step for partial derivatives of f.
pub const FD_STEP: f64 = 1e-6;
pub const PIVOT_TOL: f64 = 1e-12;

/// Iterates with a larger norm are reported as diverged.
pub const DIVERGENCE_CEILING: f64 = 1e8;
/// Fraction of a positive nodal value a single Newton step may remove.
pub const STEP_TO_BOUNDARY: f64 = 0.5;
