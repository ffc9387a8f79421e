//! Batch front-end: solve a scenario, sweep a parameter grid, simulate the
//! solved equilibria agent by agent, or just check feasibility.
//!
//! Exit codes: 0 success, 1 scenario parse/validation error, 2 hard
//! infeasibility without `--override-feasibility`, 3 solver failure.

mod scenario;

use clap::{Args, Parser, Subcommand};
use ecsearch::sim::{simulate, SimConfig};
use ecsearch::{report, solve_market, sweep, SolveOptions};
use scenario::{parse_scenario, Scenario};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ecsearch",
    about = "Equilibrium solver for retail markets with on-line and physical shops and costly consumer search",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML)
    path: PathBuf,
    /// Solve even when the parameter restrictions fail; violations become
    /// warnings in the output
    #[arg(long)]
    override_feasibility: bool,
    /// Price the incumbent's virtual shop at min(cost, monopoly price)
    /// instead of min(reservation price, monopoly price)
    #[arg(long = "literal-s5-rule")]
    literal_s5_rule: bool,
    /// Write output here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve thresholds, per-profile price equilibria and the opening game
    Solve(CommonArgs),
    /// Evaluate a parameter grid and emit one CSV row per point
    Sweep(CommonArgs),
    /// Solve, then verify each profile's equilibrium with seeded agents
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of simulated consumers
        #[arg(long, default_value_t = 100_000)]
        agents: usize,
        /// Master RNG seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Parse the scenario and report the parameter restrictions only
    Check {
        /// Scenario file (TOML)
        path: PathBuf,
        /// Write output here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_PARSE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {path:?}: {e}")),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| format!("cannot write to stdout: {e}"))
        }
    }
}

fn load(path: &Path) -> Result<Scenario, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path:?}: {e}"))?;
    parse_scenario(&text).map_err(|e| e.to_string())
}

/// Shared preamble: parse, check feasibility, build solver options.
fn prepare(common: &CommonArgs) -> Result<(Scenario, SolveOptions), (u8, String)> {
    let scenario = load(&common.path).map_err(|e| (EXIT_PARSE, e))?;
    let feasibility = ecsearch::search::check_feasibility(&scenario.cfg, scenario.mode);
    if !feasibility.hard_ok && !common.override_feasibility {
        return Err((
            EXIT_INFEASIBLE,
            format!(
                "configuration fails the parameter restrictions: {}; pass --override-feasibility to solve anyway",
                feasibility.failure_summary()
            ),
        ));
    }
    let opts = SolveOptions {
        mode: scenario.mode,
        literal_old_virtual_rule: common.literal_s5_rule,
        lenient: common.override_feasibility,
    };
    Ok((scenario, opts))
}

fn cmd_solve(common: CommonArgs) -> ExitCode {
    let (scenario, opts) = match prepare(&common) {
        Ok(v) => v,
        Err((code, msg)) => return fail(code, &msg),
    };
    match solve_market(&scenario.cfg, opts) {
        Ok(sol) => {
            let text = report::render_solution(&scenario.cfg, scenario.mode, &sol);
            match emit(&common.out, &text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_PARSE, &e),
            }
        }
        Err(e) => fail(EXIT_SOLVER, &format!("solver failed: {e}")),
    }
}

fn cmd_sweep(common: CommonArgs) -> ExitCode {
    let (scenario, opts) = match prepare(&common) {
        Ok(v) => v,
        Err((code, msg)) => return fail(code, &msg),
    };
    let Some(spec) = scenario.sweep.clone() else {
        return fail(EXIT_PARSE, "scenario has no sweep block");
    };
    match sweep::run_sweep(&scenario.cfg, &spec, opts) {
        Ok(rows) => {
            let mut buf = Vec::new();
            if let Err(e) = sweep::write_csv(&rows, &mut buf) {
                return fail(EXIT_PARSE, &format!("cannot render csv: {e}"));
            }
            let text = String::from_utf8(buf).expect("csv is utf-8");
            match emit(&common.out, &text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_PARSE, &e),
            }
        }
        Err(e) => fail(EXIT_PARSE, &format!("sweep failed: {e}")),
    }
}

fn cmd_simulate(common: CommonArgs, agents: usize, seed: u64) -> ExitCode {
    let (scenario, opts) = match prepare(&common) {
        Ok(v) => v,
        Err((code, msg)) => return fail(code, &msg),
    };
    let sol = match solve_market(&scenario.cfg, opts) {
        Ok(sol) => sol,
        Err(e) => return fail(EXIT_SOLVER, &format!("solver failed: {e}")),
    };
    let mut text = report::render_config(&scenario.cfg, scenario.mode);
    let (a_n, a_o) = sol.opening.selected_probabilities();
    text.push_str(&format!("selected_opening: a_n={a_n} a_o={a_o}\n\n"));
    for profile in &sol.profiles {
        let sim = SimConfig::from_solution(&scenario.cfg, profile, agents, seed);
        match simulate(&sim) {
            Ok(rep) => {
                text.push_str(&report::render_sim(&rep));
                text.push('\n');
            }
            Err(e) => return fail(EXIT_SOLVER, &format!("simulation failed: {e}")),
        }
    }
    match emit(&common.out, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_PARSE, &e),
    }
}

fn cmd_check(path: PathBuf, out: Option<PathBuf>) -> ExitCode {
    let scenario = match load(&path) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_PARSE, &e),
    };
    let feasibility = ecsearch::search::check_feasibility(&scenario.cfg, scenario.mode);
    let mut text = report::render_config(&scenario.cfg, scenario.mode);
    text.push('\n');
    text.push_str(&report::render_feasibility(&feasibility));
    if let Err(e) = emit(&out, &text) {
        return fail(EXIT_PARSE, &e);
    }
    if feasibility.hard_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INFEASIBLE)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(common) => cmd_solve(common),
        Command::Sweep(common) => cmd_sweep(common),
        Command::Simulate { common, agents, seed } => cmd_simulate(common, agents, seed),
        Command::Check { path, out } => cmd_check(path, out),
    }
}
