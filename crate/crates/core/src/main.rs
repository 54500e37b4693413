//! Command line front end: build, solve, verify, tabulate, export and plot
//! the relaxation bounds.
//!
//! Exit codes: 0 on success, 2 when a verification check fails or a solved
//! value disagrees with its recorded closed form, 3 on parse, build or IO
//! errors.

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::One;

use cpbounds::certify::{
    aggregation_recipe, closed_form_bound, gamma_to_radius, proof_point, rlt_redundancy_check,
    sdp1_reduction, ClosedForm,
};
use cpbounds::io::{
    bound_table, bound_table_csv, bundled_exact_values, emit_plot, load_exact_values, lp_text,
    sdpa_text, ExactValuesTable, IoError, TableMethod, DISPLAY_SIG,
};
use cpbounds::model::decimal_string;
use cpbounds::relax::{build_any, AnyModel, CutStrategy, Family};
use cpbounds::simplex::{
    dual_certificate_check, solve_exact, solve_with_row_generation, RowGenConfig, SolveStatus,
};
use cpbounds::{Rat, RelaxationId};

#[derive(Parser)]
#[command(
    name = "cpbounds",
    about = "Exact rational bounds on spreading n points in the unit square",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a relaxation and print its shape.
    Build {
        #[command(flatten)]
        target: Target,
        /// Cut family for the matrix models.
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
    },
    /// Solve a linear relaxation exactly and print the optimal value.
    Solve {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
        /// Significant digits for decimal renderings.
        #[arg(long, default_value_t = DISPLAY_SIG)]
        precision: usize,
    },
    /// Re-derive and check every recorded value at the given sizes.
    Verify {
        /// Relaxations to check; all twelve when omitted.
        #[arg(long = "relaxation", value_parser = RelaxationId::from_str)]
        relaxations: Vec<RelaxationId>,
        /// Single size to check.
        #[arg(long, conflicts_with = "n_range")]
        n: Option<u32>,
        /// Inclusive size range A..B to check.
        #[arg(long = "n-range", value_parser = NRange::from_str)]
        n_range: Option<NRange>,
        #[arg(long, default_value_t = DISPLAY_SIG)]
        precision: usize,
    },
    /// Emit a bound table as CSV.
    Table {
        #[command(flatten)]
        series: Series,
        /// Solve each instance instead of evaluating closed forms; any
        /// disagreement with a recorded value aborts the table.
        #[arg(long, value_enum, default_value_t = Method::ClosedForm)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a model (lp, sdpa) or a table (csv, svg) to a file or stdout.
    Export {
        #[arg(long = "relaxation", value_parser = RelaxationId::from_str, required = true)]
        relaxations: Vec<RelaxationId>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long = "n-range", value_parser = NRange::from_str)]
        n_range: Option<NRange>,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
        /// CSV of best known values for the table formats.
        #[arg(long = "exact-values")]
        exact_values: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit an SVG chart of bounds against the best known values.
    Plot {
        #[command(flatten)]
        series: Series,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Target {
    #[arg(long, value_parser = RelaxationId::from_str)]
    relaxation: RelaxationId,
    #[arg(long)]
    n: u32,
}

#[derive(Args)]
struct Series {
    /// Repeatable; series appear in the order given.
    #[arg(long = "relaxation", value_parser = RelaxationId::from_str, required = true)]
    relaxations: Vec<RelaxationId>,
    /// Inclusive size range A..B.
    #[arg(long = "n-range", value_parser = NRange::from_str)]
    n_range: NRange,
    /// CSV of best known values; the bundled snapshot when omitted.
    #[arg(long = "exact-values")]
    exact_values: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    /// Every clique cut up to the instance size.
    Exhaustive,
    /// Only the size-3, level-1 cuts.
    Triangle,
    /// Separate violated cuts on demand.
    Rowgen,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    ClosedForm,
    Solve,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Lp,
    Sdpa,
    Csv,
    Svg,
}

/// Inclusive `A..B` size range.
#[derive(Clone)]
struct NRange(RangeInclusive<u32>);

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
        let a: u32 = a.trim().parse().map_err(|_| format!("bad start {a:?}"))?;
        let b: u32 = b.trim().parse().map_err(|_| format!("bad end {b:?}"))?;
        if a > b {
            return Err(format!("empty range {a}..{b}"));
        }
        Ok(NRange(a..=b))
    }
}

/// Anything the subcommands can fail with; rendered once in `main`.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Relax(#[from] cpbounds::relax::RelaxError),
    #[error(transparent)]
    Solve(#[from] cpbounds::simplex::SolveError),
    #[error(transparent)]
    Certify(#[from] cpbounds::certify::CertifyError),
    #[error(transparent)]
    Model(#[from] cpbounds::model::ModelError),
    #[error("{0}")]
    Usage(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Keep help and version on the conventional success path, but pull
        // argument mistakes onto the same exit code as every other usage
        // error so 2 stays reserved for failed verifications.
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(3);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                // A solved bound disagreeing with its recorded value is a
                // verification failure, not an IO accident.
                CliError::Io(IoError::MismatchDetected { .. }) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| IoError::IoFailure {
                path: path.display().to_string(),
                source,
            })?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cut_strategy(s: Strategy, n: u32) -> CutStrategy {
    match s {
        Strategy::Exhaustive => CutStrategy::Exhaustive { max_m: n },
        Strategy::Triangle => CutStrategy::TriangleOnly,
        Strategy::Rowgen => CutStrategy::RowGeneration,
    }
}

/// Solves a linear relaxation with the same routing the tables use:
/// separation for the clique models, the prescribed cut set otherwise.
fn solve_linear(
    id: RelaxationId,
    n: u32,
    strategy: Option<Strategy>,
) -> Result<(Rat, String), CliError> {
    if id.family() == Family::Sdp {
        return Err(CliError::Usage(format!(
            "{id} needs a semidefinite solver; export it with --format sdpa instead"
        )));
    }
    let (result, note) = match (strategy, id) {
        (None | Some(Strategy::Rowgen), RelaxationId::MtClique | RelaxationId::MtBndClique) => {
            let out = solve_with_row_generation(id, n, &RowGenConfig::default())?;
            let note = format!("{} rounds, {} cuts", out.rounds, out.cuts_added);
            (out.result, note)
        }
        (Some(Strategy::Rowgen), _) => {
            let out = solve_with_row_generation(id, n, &RowGenConfig::default())?;
            let note = format!("{} rounds, {} cuts", out.rounds, out.cuts_added);
            (out.result, note)
        }
        (Some(s), _) => {
            let model = match build_any(id, n, Some(cut_strategy(s, n)))? {
                AnyModel::Linear(m) => m,
                AnyModel::Sdp(_) => unreachable!("sdp handled above"),
            };
            (solve_exact(&model)?, String::new())
        }
        (None, _) => {
            let model = match build_any(id, n, None)? {
                AnyModel::Linear(m) => m,
                AnyModel::Sdp(_) => unreachable!("sdp handled above"),
            };
            (solve_exact(&model)?, String::new())
        }
    };
    if result.status != SolveStatus::Optimal {
        return Err(CliError::Usage(format!(
            "{id} at n = {n} finished {:?} instead of optimal",
            result.status
        )));
    }
    Ok((result.value.expect("optimal carries a value"), note))
}

fn rat_display(r: &Rat, precision: usize) -> String {
    if r.denom().is_one() {
        format!("{} ({})", r.numer(), decimal_string(r, precision))
    } else {
        format!(
            "{}/{} ({})",
            r.numer(),
            r.denom(),
            decimal_string(r, precision)
        )
    }
}

fn load_series_exact(path: Option<&PathBuf>) -> Result<ExactValuesTable, CliError> {
    Ok(match path {
        Some(p) => load_exact_values(p)?,
        None => bundled_exact_values(),
    })
}

fn run(cmd: Cmd) -> Result<bool, CliError> {
    match cmd {
        Cmd::Build { target, strategy } => {
            let strat = strategy.map(|s| cut_strategy(s, target.n));
            match build_any(target.relaxation, target.n, strat)? {
                AnyModel::Linear(m) => {
                    m.validate()?;
                    println!(
                        "{} n={}: linear, {} variables, {} rows",
                        target.relaxation,
                        target.n,
                        m.num_variables(),
                        m.constraints.len()
                    );
                }
                AnyModel::Sdp(m) => {
                    m.base.validate()?;
                    let blocks: Vec<String> = m
                        .psd_blocks
                        .iter()
                        .map(|b| format!("{} dim {}", b.label, b.dim()))
                        .collect();
                    println!(
                        "{} n={}: sdp, {} variables, {} rows, psd [{}]",
                        target.relaxation,
                        target.n,
                        m.base.num_variables(),
                        m.base.constraints.len(),
                        blocks.join(", ")
                    );
                }
            }
            Ok(true)
        }
        Cmd::Solve {
            target,
            strategy,
            precision,
        } => {
            let (value, note) = solve_linear(target.relaxation, target.n, strategy)?;
            let suffix = if note.is_empty() {
                String::new()
            } else {
                format!("  [{note}]")
            };
            println!(
                "{} n={}: {}{}",
                target.relaxation,
                target.n,
                rat_display(&value, precision),
                suffix
            );
            if let Ok(r) = gamma_to_radius(&value) {
                println!(
                    "  radius bound for equal circles in the unit square: {}",
                    decimal_string(&r, precision)
                );
            }
            Ok(true)
        }
        Cmd::Verify {
            relaxations,
            n,
            n_range,
            precision,
        } => {
            let ids: Vec<RelaxationId> = if relaxations.is_empty() {
                RelaxationId::ALL.to_vec()
            } else {
                relaxations
            };
            let range = match (n, n_range) {
                (Some(k), None) => k..=k,
                (None, Some(r)) => r.0,
                (None, None) => {
                    return Err(CliError::Usage("pass --n or --n-range".into()));
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let mut failures = 0usize;
            for n in range {
                for &id in &ids {
                    if n < id.min_n() {
                        continue;
                    }
                    failures += verify_one(id, n, precision)?;
                }
            }
            if failures == 0 {
                println!("all checks passed");
                Ok(true)
            } else {
                println!("{failures} check(s) failed");
                Ok(false)
            }
        }
        Cmd::Table {
            series,
            method,
            out,
        } => {
            let exact = load_series_exact(series.exact_values.as_ref())?;
            let rows = bound_table(
                series.n_range.0,
                &series.relaxations,
                Some(&exact),
                match method {
                    Method::ClosedForm => TableMethod::ClosedForm,
                    Method::Solve => TableMethod::Solve,
                },
            )?;
            emit(out.as_ref(), &bound_table_csv(&rows))?;
            Ok(true)
        }
        Cmd::Export {
            relaxations,
            n,
            n_range,
            format,
            strategy,
            exact_values,
            out,
        } => match format {
            Format::Lp | Format::Sdpa => {
                if relaxations.len() != 1 {
                    return Err(CliError::Usage(
                        "model export takes exactly one --relaxation".into(),
                    ));
                }
                let id = relaxations[0];
                let n = n.ok_or_else(|| CliError::Usage("model export needs --n".into()))?;
                let strat = strategy.map(|s| cut_strategy(s, n));
                let text = match (format, build_any(id, n, strat)?) {
                    (Format::Lp, AnyModel::Linear(m)) => lp_text(&m),
                    (Format::Lp, AnyModel::Sdp(_)) => {
                        return Err(CliError::Usage(format!(
                            "{id} is semidefinite; export it with --format sdpa"
                        )));
                    }
                    (Format::Sdpa, AnyModel::Sdp(m)) => sdpa_text(&m),
                    (Format::Sdpa, AnyModel::Linear(_)) => {
                        return Err(CliError::Usage(format!(
                            "{id} is linear; export it with --format lp"
                        )));
                    }
                    _ => unreachable!("table formats handled in the outer match"),
                };
                emit(out.as_ref(), &text)?;
                Ok(true)
            }
            Format::Csv | Format::Svg => {
                let range = n_range
                    .or_else(|| n.map(|k| NRange(k..=k)))
                    .ok_or_else(|| CliError::Usage("table export needs --n-range".into()))?;
                let exact = load_series_exact(exact_values.as_ref())?;
                let rows = bound_table(
                    range.0,
                    &relaxations,
                    Some(&exact),
                    TableMethod::ClosedForm,
                )?;
                let text = match format {
                    Format::Csv => bound_table_csv(&rows),
                    Format::Svg => emit_plot(&rows)?,
                    _ => unreachable!(),
                };
                emit(out.as_ref(), &text)?;
                Ok(true)
            }
        },
        Cmd::Plot { series, out } => {
            let exact = load_series_exact(series.exact_values.as_ref())?;
            let rows = bound_table(
                series.n_range.0,
                &series.relaxations,
                Some(&exact),
                TableMethod::ClosedForm,
            )?;
            emit(out.as_ref(), &emit_plot(&rows)?)?;
            Ok(true)
        }
    }
}

/// Runs every check recorded for one relaxation at one size; returns the
/// failure count and prints one line per check.
fn verify_one(id: RelaxationId, n: u32, precision: usize) -> Result<usize, CliError> {
    let mut failures = 0usize;
    let mut line = |what: &str, ok: bool, detail: String| {
        if ok {
            println!("{id} n={n} {what}: ok{detail}");
        } else {
            println!("{id} n={n} {what}: FAIL{detail}");
        }
        if !ok {
            failures += 1;
        }
    };

    let closed = match closed_form_bound(id, n)? {
        ClosedForm::Value(v) => v,
        ClosedForm::Unavailable => {
            println!("{id} n={n}: no recorded value, export-only");
            return Ok(0);
        }
    };

    if id.family() == Family::Sdp {
        // Primal side only: the recorded value is attained by an exactly
        // feasible moment matrix.
        let point = proof_point(id, n)?;
        let model = match build_any(id, n, None)? {
            AnyModel::Sdp(m) => m,
            AnyModel::Linear(_) => unreachable!("sdp family"),
        };
        let report = model.check_feasible(&point)?;
        line(
            "proof point feasible (rows and psd)",
            report.ok(),
            if report.ok() {
                String::new()
            } else {
                format!(" ({} violations)", report.violations.len())
            },
        );
        let attained = model.base.objective.eval(&point)?;
        line(
            "proof point attains the recorded value",
            attained == closed,
            format!(
                " ({} vs {})",
                decimal_string(&attained, precision),
                decimal_string(&closed, precision)
            ),
        );
        if id == RelaxationId::Sdp1 {
            let red = sdp1_reduction(n)?;
            line(
                "symmetric reduction reproduces the value",
                red.bound == closed,
                String::new(),
            );
        }
        if id == RelaxationId::Sdp2 {
            let redundant = rlt_redundancy_check(n)?;
            line("product floors already satisfied", redundant, String::new());
        }
        return Ok(failures);
    }

    let (solved, _) = solve_linear(id, n, None)?;
    line(
        "solved value matches the recorded one",
        solved == closed,
        format!(
            " ({} vs {})",
            rat_display(&solved, precision),
            rat_display(&closed, precision)
        ),
    );

    let point = proof_point(id, n)?;
    let model = match build_any(id, n, None)? {
        AnyModel::Linear(m) => m,
        AnyModel::Sdp(_) => unreachable!("linear family"),
    };
    let report = model.check_feasible(&point)?;
    let attained = model.objective.eval(&point)?;
    line(
        "proof point feasible and attaining",
        report.ok() && attained == closed,
        if report.ok() {
            format!(" (objective {})", decimal_string(&attained, precision))
        } else {
            format!(" ({} violations)", report.violations.len())
        },
    );

    let recipe = aggregation_recipe(id, n)?;
    match dual_certificate_check(&model, &recipe) {
        Ok(implied) => line(
            "aggregation recipe certifies the value",
            implied <= closed && recipe.claimed == closed,
            format!(" (implied {})", rat_display(&implied, precision)),
        ),
        Err(e) => line(
            "aggregation recipe certifies the value",
            false,
            format!(" ({e})"),
        ),
    }
    Ok(failures)
}
