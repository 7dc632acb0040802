//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use hammerstein_core::cone::order_leq_with_tol;
use hammerstein_core::hypotheses::find_beta;
use hammerstein_core::kernels::{k1_constants, k2_constants};
use hammerstein_core::solver::{monotone_iterate, residual, SolverOptions};
use hammerstein_core::{DiscreteOperator, Grid, Pair, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A system with non-decreasing polynomial nonlinearities and a verified
/// constant upper solution.
pub struct MonotoneCase {
    pub sys: SystemSpec,
    pub beta: [f64; 2],
}

fn coefficient(rng: &mut ChaCha8Rng, hi: f64) -> f64 {
    (rng.random::<f64>() * hi * 1000.0).round() / 1000.0
}

pub fn random_monotone_cases(seed: u64, count: usize) -> Vec<MonotoneCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let xi = 0.05 + 0.85 * rng.random::<f64>();
        let eta = 0.05 + 0.9 * rng.random::<f64>();
        let mut f = Vec::new();
        for i in 1..=2 {
            f.push(format!(
                "{} + {} * u1 + {} * u2 + {} * u{i}^2",
                0.05 + coefficient(&mut rng, 1.0),
                coefficient(&mut rng, 1.0),
                coefficient(&mut rng, 1.0),
                coefficient(&mut rng, 2.0),
            ));
        }
        let lambda = [
            0.02 + 0.3 * rng.random::<f64>(),
            0.02 + 0.3 * rng.random::<f64>(),
        ];
        let sys = SystemSpec::builtin_pair(xi, eta, &f[0], &f[1], lambda).unwrap();
        let gamma_star = [
            k1_constants().gamma_star,
            k2_constants(xi, eta).unwrap().gamma_star,
        ];
        if let Some(b) = find_beta(&sys, &sys.cone, gamma_star, 2.0, 2.0, 16).unwrap() {
            out.push(MonotoneCase { sys, beta: b.beta });
        }
    }
    out
}

/// Outcome of the monotone-iteration property checks for one case.
#[derive(Debug)]
pub struct MonotoneOutcome {
    pub worst_order_violation: f64,
    pub worst_trace_violation: f64,
    pub sandwich: bool,
    pub lower_residual: f64,
    pub upper_residual: f64,
}

/// Runs the solver on the bracket `[0, beta]` and re-checks its claims by
/// iterating `T` independently.
pub fn check_monotone_case(case: &MonotoneCase, grid: Grid) -> MonotoneOutcome {
    let op = DiscreteOperator::new(&case.sys, grid).unwrap();
    let opts = SolverOptions::iteration();
    let alpha0 = Pair::zeros(grid);
    let beta0 = Pair::constant(grid, case.beta);
    let (lo, hi) = monotone_iterate(&op, &alpha0, &beta0, &opts).unwrap();

    let mut worst_order: f64 = 0.0;
    for (start, up) in [(&alpha0, true), (&beta0, false)] {
        let mut u = start.clone();
        for _ in 0..=lo.iterations.max(hi.iterations) {
            let next = op.apply(&u).unwrap();
            let diff = if up { &next - &u } else { &u - &next };
            worst_order = worst_order.max(-diff.min_value());
            u = next;
        }
    }

    let mut worst_trace: f64 = 0.0;
    for w in lo.monotone_trace.as_ref().unwrap().windows(2) {
        worst_trace = worst_trace.max(w[0] - w[1]);
    }
    for w in hi.monotone_trace.as_ref().unwrap().windows(2) {
        worst_trace = worst_trace.max(w[1] - w[0]);
    }

    MonotoneOutcome {
        worst_order_violation: worst_order,
        worst_trace_violation: worst_trace,
        sandwich: order_leq_with_tol(&lo.solution, &hi.solution, &case.sys.cone, opts.tol),
        lower_residual: residual(&op, &lo.solution).unwrap(),
        upper_residual: residual(&op, &hi.solution).unwrap(),
    }
}
