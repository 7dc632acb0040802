//! Shared fixtures for the criterion benchmarks.

use hammerstein_core::{DiscreteOperator, Grid, Pair, SystemSpec};

/// Grid sizes exercised by every benchmark group.
pub const SIZES: [usize; 3] = [65, 129, 257];

pub fn grid(n: usize) -> Grid {
    Grid::new(0.0, 1.0, n).expect("odd grid")
}

/// The two-equation example at `lambda = (1, 1)`.
pub fn example() -> SystemSpec {
    SystemSpec::worked_example([1.0, 1.0])
}

pub fn operator(n: usize) -> DiscreteOperator {
    DiscreteOperator::new(&example(), grid(n)).expect("operator builds")
}

/// Constant start `(3, 3)`, from which Newton reaches the nontrivial solution.
pub fn newton_start(n: usize) -> Pair {
    Pair::constant(grid(n), [3.0, 3.0])
}
