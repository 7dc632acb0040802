//! Command-line front end: loads a problem file and runs the constants,
//! check, lambda-range, solve and sweep workflows.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;

use clap::{Parser, Subcommand};
use hammerstein_core::constants::{compute_constants, ConstantsReport};
use hammerstein_core::hypotheses::lambda_supremum;
use hammerstein_core::pipeline::{check_system_with, derive_params, localization};
use hammerstein_core::solver::{
    monotone_iterate, newton_solve, picard, SolveReport, SolverError, SolverOptions,
};
use hammerstein_core::{DiscreteOperator, Grid, Pair, SystemSpec};
use rayon::prelude::*;

pub use config::{ConfigError, Method, ProblemConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hammerstein",
    version,
    about = "Positive solutions of Hammerstein systems"
)]
pub struct Cli {
    /// Problem file (TOML).
    #[arg(long, value_name = "PATH", global = true)]
    pub config: Option<String>,
    /// Grid nodes (odd, at least 3); overrides `solver.grid`.
    #[arg(long, value_name = "N", global = true)]
    pub grid: Option<usize>,
    /// Overrides `solver.method`.
    #[arg(long, global = true)]
    pub method: Option<Method>,
    /// Write CSV output here instead of standard output.
    #[arg(long, value_name = "PATH", global = true)]
    pub out: Option<String>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Kernel constants and the envelope scan per equation.
    Constants,
    /// Every hypothesis plus the premises of the existence statement.
    Check,
    /// Admissible range of each lambda.
    LambdaRange,
    /// Solve and write the solution as CSV.
    Solve,
    /// Solve over the `[sweep]` lambda grid and write a summary CSV.
    Sweep,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }
}

impl From<hammerstein_core::Error> for Failure {
    fn from(e: hammerstein_core::Error) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message: e.to_string(),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e {
            SolverError::NotBracketed(_) | SolverError::InvalidInitialGuess(_) => EXIT_VERIFICATION,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &str, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: format!("cannot write {path}: {e}"),
    }
}

/// Parses `args` (including the program name) and runs the command. The
/// human-readable report goes to `out`; CSV goes to `--out` or, without it,
/// to `out` with the report moved to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(cli: &Cli) -> Result<ProblemConfig, Failure> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| ConfigError::Invalid("--config <PATH> is required".into()))?;
    let mut cfg = ProblemConfig::load(path)?;
    if let Some(n) = cli.grid {
        cfg.solver.grid = n;
    }
    if let Some(m) = cli.method {
        cfg.solver.method = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = load(cli)?;
    if cli.dump_config {
        write_text(out, &cfg.to_toml())?;
        return Ok(EXIT_OK);
    }
    let Some(command) = cli.command else {
        return Err(Failure {
            code: EXIT_CONFIG,
            message: "a subcommand is required (constants, check, lambda-range, solve, sweep)"
                .into(),
        });
    };
    let sys = cfg.system()?;
    let grid = cfg.grid()?;
    match command {
        Command::Constants => constants(&sys, grid, out),
        Command::Check => check(&cfg, &sys, grid, out),
        Command::LambdaRange => lambda_range(&cfg, &sys, grid, out),
        Command::Solve => solve(cli, &cfg, &sys, grid, out, err),
        Command::Sweep => sweep(cli, &cfg, &sys, grid, out, err),
    }
}

fn write_text(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| io_failure("output", e))
}

fn constants_text(sys: &SystemSpec, report: &ConstantsReport) -> String {
    let mut s = String::new();
    for i in 0..2 {
        let eq = &report.equations[i];
        let cone = sys.cone.equation(i);
        let _ = writeln!(
            s,
            "equation {}: kernel {}",
            i + 1,
            sys.equation(i).kernel.name()
        );
        let _ = writeln!(
            s,
            "  gamma*       = {:.9}  (t = {:.6})",
            eq.gamma_star.value, eq.gamma_star.at
        );
        let _ = writeln!(
            s,
            "  gamma_*      = {:.9}  (t = {:.6})",
            eq.gamma_lower.value, eq.gamma_lower.at
        );
        let _ = writeln!(
            s,
            "  c            = {:.9}  (grid estimate {:.9})",
            cone.c, eq.c_estimate
        );
        let _ = writeln!(
            s,
            "  [a{}, b{}]     = [{:.9}, {:.9}]",
            i + 1,
            i + 1,
            cone.interval.0,
            cone.interval.1
        );
        let _ = writeln!(
            s,
            "  envelope scan: {} (worst violation {:.3e})",
            if eq.h5.passed { "pass" } else { "FAIL" },
            eq.h5.worst_violation()
        );
    }
    s
}

fn constants(sys: &SystemSpec, grid: Grid, out: &mut dyn Write) -> Result<i32, Failure> {
    let report = compute_constants(sys, grid)?;
    write_text(out, &constants_text(sys, &report))?;
    let ok = report.equations.iter().all(|e| e.h5.passed);
    Ok(if ok { EXIT_OK } else { EXIT_VERIFICATION })
}

fn check(
    cfg: &ProblemConfig,
    sys: &SystemSpec,
    grid: Grid,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let constants = compute_constants(sys, grid)?;
    let r = check_system_with(sys, grid, &cfg.hypothesis_config(), &constants)?;
    let mut s = constants_text(sys, &constants);
    let _ = writeln!(s, "\nhypotheses");
    let _ = write!(s, "{}", r.hypotheses);
    let _ = writeln!(s, "\ndiagnostic (not required)\n{}", r.h7_star);
    match &r.existence {
        Some((p, rep)) => {
            let _ = writeln!(
                s,
                "\nexistence premises with beta = ({:.6e}, {:.6e}), R = {:.6e}, rho = {}, M = {:.6}",
                p.beta[0], p.beta[1], p.r, p.rho, p.m
            );
            let _ = write!(s, "{rep}");
        }
        None => {
            let _ = writeln!(
                s,
                "\nexistence premises not evaluated: no beta or rho available"
            );
        }
    }
    let passed = r.passed();
    let _ = writeln!(s, "\nverdict: {}", if passed { "PASS" } else { "FAIL" });
    write_text(out, &s)?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFICATION })
}

fn lambda_range(
    cfg: &ProblemConfig,
    sys: &SystemSpec,
    grid: Grid,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let constants = compute_constants(sys, grid)?;
    let h = cfg.hypothesis_config();
    let sups = lambda_supremum(
        sys,
        &sys.cone,
        [constants.gamma_star(0), constants.gamma_star(1)],
        h.b1,
        h.b2,
        h.density,
    )?;
    let mut s = String::new();
    for (i, sup) in sups.iter().enumerate() {
        let lambda = sys.equation(i).lambda;
        let bound = if sup.unbounded {
            "unbounded".to_string()
        } else {
            format!("lambda < {:.9e}", sup.sup)
        };
        let _ = writeln!(
            s,
            "equation {}: {bound}  (lattice max {:.6e} at ({:.6}, {:.6}), last growth {:.3e}); lambda = {lambda} {}",
            i + 1,
            sup.sup,
            sup.at[0],
            sup.at[1],
            sup.last_growth,
            if sup.admits(lambda) { "admissible" } else { "NOT admissible" }
        );
    }
    write_text(out, &s)?;
    Ok(EXIT_OK)
}

fn solver_options(cfg: &ProblemConfig, method: Method) -> SolverOptions {
    let mut opts = match method {
        Method::Newton => SolverOptions::newton(),
        Method::Picard | Method::Monotone => SolverOptions::iteration(),
    };
    if let Some(t) = cfg.solver.tol {
        opts.tol = t;
    }
    if let Some(m) = cfg.solver.maxiter {
        opts.maxiter = m;
    }
    opts
}

/// Solves one system; monotone iteration reports the limit from above.
fn solve_one(
    cfg: &ProblemConfig,
    sys: &SystemSpec,
    grid: Grid,
    constants: &ConstantsReport,
) -> Result<(SolveReport, Option<SolveReport>), Failure> {
    let method = cfg.solver.method;
    let mut opts = solver_options(cfg, method);
    let params = derive_params(sys, &cfg.hypothesis_config(), constants)?;
    if let Some(p) = &params {
        opts = opts.with_localization(localization(p));
    }
    let op = DiscreteOperator::new(sys, grid)?;
    let initial = Pair::constant(grid, cfg.solver.initial);
    match method {
        Method::Newton => Ok((newton_solve(&op, &initial, &opts)?, None)),
        Method::Picard => Ok((picard(&op, &initial, &opts)?, None)),
        Method::Monotone => {
            let Some(p) = params else {
                return Err(Failure {
                    code: EXIT_VERIFICATION,
                    message: "monotone iteration needs a constant upper solution; none was found"
                        .into(),
                });
            };
            let (lower, upper) = monotone_iterate(
                &op,
                &Pair::zeros(grid),
                &Pair::constant(grid, p.beta),
                &opts,
            )?;
            Ok((upper, Some(lower)))
        }
    }
}

fn report_text(label: &str, r: &SolveReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{label}");
    let _ = writeln!(s, "  converged    : {}", r.converged);
    let _ = writeln!(s, "  iterations   : {}", r.iterations);
    let _ = writeln!(s, "  residual     : {:.6e}", r.residual_sup);
    let _ = writeln!(
        s,
        "  norm         : {:.9} (u1 {:.9}, u2 {:.9})",
        r.solution.norm(),
        r.solution.u1.sup_norm(),
        r.solution.u2.sup_norm()
    );
    let _ = writeln!(
        s,
        "  in cone      : {} (margin {:.3e})",
        r.cone_verdict.member, r.cone_verdict.margin
    );
    let _ = writeln!(s, "  regions      : {}", r.region_label());
    if r.projected {
        let _ = writeln!(s, "  projected    : negative nodes were clamped to zero");
    }
    for w in &r.warnings {
        let _ = writeln!(s, "  warning      : {w}");
    }
    s
}

fn solution_csv(u: &Pair) -> String {
    let grid = u.grid();
    let mut s = String::from("t,u1,u2\n");
    for j in 0..grid.len() {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e}",
            grid.node(j),
            u.u1.values()[j],
            u.u2.values()[j]
        );
    }
    s
}

fn emit_csv(
    cli: &Cli,
    csv: &str,
    report: &str,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| io_failure(path, e))?;
            write_text(out, report)
        }
        None => {
            write_text(err, report)?;
            write_text(out, csv)
        }
    }
}

fn solve(
    cli: &Cli,
    cfg: &ProblemConfig,
    sys: &SystemSpec,
    grid: Grid,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let constants = compute_constants(sys, grid)?;
    let (main, lower) = solve_one(cfg, sys, grid, &constants)?;
    let mut text = String::new();
    if let Some(lower) = &lower {
        text.push_str(&report_text("monotone iteration from below", lower));
        text.push_str(&report_text(
            "monotone iteration from above (written)",
            &main,
        ));
    } else {
        text.push_str(&report_text(
            &format!("{} iteration", cfg.solver.method),
            &main,
        ));
    }
    let converged = main.converged && lower.as_ref().is_none_or(|l| l.converged);
    emit_csv(cli, &solution_csv(&main.solution), &text, out, err)?;
    Ok(if converged { EXIT_OK } else { EXIT_NUMERICAL })
}

fn sweep(
    cli: &Cli,
    cfg: &ProblemConfig,
    sys: &SystemSpec,
    grid: Grid,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let Some(sw) = &cfg.sweep else {
        return Err(Failure {
            code: EXIT_CONFIG,
            message: "sweep needs a [sweep] section with lambda1 and lambda2 lists".into(),
        });
    };
    let constants = compute_constants(sys, grid)?;
    let mut cells: Vec<(f64, f64)> = sw
        .lambda1
        .iter()
        .flat_map(|l1| sw.lambda2.iter().map(move |l2| (*l1, *l2)))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    cells.dedup();
    let rows: Vec<(String, Option<String>)> = cells
        .par_iter()
        .map(|&(l1, l2)| {
            let cell = sys.with_lambdas([l1, l2]);
            match solve_one(cfg, &cell, grid, &constants) {
                Ok((r, _)) => (
                    format!(
                        "{l1},{l2},{},{:.16e},{:.16e},{}",
                        r.converged,
                        r.residual_sup,
                        r.solution.norm(),
                        r.region_label()
                    ),
                    (!r.converged).then(|| "not converged".to_string()),
                ),
                Err(e) => (format!("{l1},{l2},false,NaN,NaN,-"), Some(e.message)),
            }
        })
        .collect();
    let mut csv = String::from("lambda1,lambda2,converged,residual,norm,region\n");
    for (row, _) in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    let failed = rows.iter().filter(|(_, e)| e.is_some()).count();
    let mut report = format!(
        "sweep: {} cells, {} converged, {failed} failed\n",
        rows.len(),
        rows.len() - failed
    );
    for ((l1, l2), (_, e)) in cells.iter().zip(&rows) {
        if let Some(e) = e {
            let _ = writeln!(report, "  lambda = ({l1}, {l2}): {e}");
        }
    }
    emit_csv(cli, &csv, &report, out, err)?;
    Ok(EXIT_OK)
}
