//! `wmp`: command-line front end for the window mean-payoff solvers.
//!
//! Exit codes: 0 Eve wins (or the lasso is a member), 1 Adam wins (or it is
//! not), 2 other errors, 3 undecidable objective, 4 malformed input,
//! 5 resource limit.

mod crosscheck;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use wmp_core::antichain::{solve_dirfix_antichain_with, AntichainConfig};
use wmp_core::arena::{Arena, MooreStrategy, Objective, ObjectiveKind, StateSet};
use wmp_core::dirfix::{build_safety_game_with, solve_dirfix_with, ExplicitConfig};
use wmp_core::observers::{build_fix_nba_with, build_ufix_nba_with, ParityObserver};
use wmp_core::oracle::check_lasso_with_limits;
use wmp_core::parity::{product_game, solve_fix_with, solve_ufix_with, ParityEngine};
use wmp_core::reductions::{safety_to_dirfix, simulation_gadget, universality_gadget, SafetySpec, WeightedAutomaton};
use wmp_core::{Error, Limits, Player};

use report::{Format, RunReport};

#[derive(Parser)]
#[command(name = "wmp", version, about = "Solve window mean-payoff games with partial observation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the winner of a fixed-window objective.
    Solve(SolveArgs),
    /// Decide membership of an abstract lasso.
    Check(CheckArgs),
    /// Build an arena from a safety game or a weighted automaton.
    Reduce(ReduceArgs),
    /// Differential testing of the engines on random arenas.
    Crosscheck(crosscheck::CrosscheckArgs),
    /// Write a DOT graph of an arena or of a constructed game.
    ExportDot(ExportArgs),
}

#[derive(Args)]
struct Common {
    /// Threshold `a/b` (or an integer); weights become `b*w - a`.
    #[arg(long, default_value = "0", value_parser = parse_nu)]
    nu: Rational64,
    /// Bound on the number of states of any constructed object.
    #[arg(long, default_value_t = Limits::DEFAULT_MAX_STATES)]
    max_states: usize,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_parser = parse_kind)]
    objective: ObjectiveKind,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write Eve's Moore strategy here (DirFix, explicit engine).
    #[arg(long)]
    strategy: Option<PathBuf>,
    /// Write the solved game as DOT here.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Safety game on window functions (DirFix).
    Explicit,
    /// Antichain fixpoint (DirFix).
    Antichain,
    /// Observer product solved by Zielonka's algorithm (Fix, UFix).
    Zielonka,
    /// Observer product solved by progress measures (Fix, UFix).
    Spm,
}

#[derive(Args)]
struct CheckArgs {
    file: PathBuf,
    /// `prefix | cycle`, each a sequence of `observation action` pairs.
    #[arg(long)]
    lasso: String,
    /// Objective to check; all three fixed-window kinds when omitted.
    #[arg(long, value_parser = parse_kind)]
    objective: Option<ObjectiveKind>,
    #[arg(long)]
    lmax: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(subcommand)]
    kind: ReduceKind,
}

#[derive(Subcommand)]
enum ReduceKind {
    /// Safety game (the weights of the `.wga` are ignored) to DirFix arena.
    Safety {
        file: PathBuf,
        /// Trapping unsafe states.
        #[arg(long, value_delimiter = ',', required = true)]
        unsafe_states: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Weighted automaton (`.wfa`) to blind gadget arena.
    Universality {
        file: PathBuf,
        /// Emit only the automaton-simulation gadget.
        #[arg(long)]
        simulation_only: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DotGraph {
    Arena,
    /// Safety game on window functions.
    Dirfix,
    /// Product with the complemented Fix observer.
    Fix,
    /// Product with the complemented UFix observer.
    Ufix,
}

#[derive(Args)]
struct ExportArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = DotGraph::Arena)]
    graph: DotGraph,
    #[arg(long, default_value_t = 1)]
    lmax: usize,
    #[command(flatten)]
    common: Common,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_nu(s: &str) -> std::result::Result<Rational64, String> {
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let a: i64 = a.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
    let b: i64 = b.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
    if b < 1 {
        return Err("denominator must be positive".into());
    }
    Ok(Rational64::new(a, b))
}

fn parse_kind(s: &str) -> std::result::Result<ObjectiveKind, String> {
    s.parse().map_err(|_| format!("unknown objective `{s}`"))
}

fn load_arena(path: &Path, common: &Common) -> Result<Arena> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let arena = Arena::parse(&text)?;
    Ok(arena.rescale(*common.nu.numer(), *common.nu.denom())?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_for(winner: Player) -> ExitCode {
    match winner {
        Player::Eve => ExitCode::from(0),
        Player::Adam => ExitCode::from(1),
    }
}

fn objective_of(kind: ObjectiveKind, lmax: Option<usize>) -> Result<Objective> {
    if kind.is_bounded_window() {
        return Err(Error::Undecidable(kind.name().into()).into());
    }
    let Some(lmax) = lmax else {
        bail!(Error::Invalid(format!("`{kind}` needs --lmax")));
    };
    Ok(Objective::fixed(kind, lmax)?)
}

fn format_strategy(arena: &Arena, s: &MooreStrategy) -> String {
    let mut out = format!("memory: {}\ninitial: {}\n", s.memory_size(), s.initial_memory);
    for m in 0..s.memory_size() {
        for o in 0..arena.num_observations() {
            out.push_str(&format!(
                "{m} {} -> {} {}\n",
                arena.observation_name(o),
                arena.action_name(s.output[m][o]),
                s.update[m][o]
            ));
        }
    }
    out
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let objective = objective_of(args.objective, args.lmax)?;
    let lmax = objective.solvable_lmax()?;
    let arena = load_arena(&args.file, &args.common)?;
    let limits = Limits::new(args.common.max_states);
    let start = Instant::now();
    let mut report = RunReport::new(&arena, &objective, args.common.nu);
    let dot;
    match objective.kind {
        ObjectiveKind::DirFix => {
            let engine = args.engine.unwrap_or(Engine::Explicit);
            match engine {
                Engine::Explicit => {
                    let config = ExplicitConfig { limits, mutate_zeta: false };
                    let sol = solve_dirfix_with(&arena, lmax, &config)?;
                    report.engine = "explicit".into();
                    report.winner = Some(sol.winner);
                    report.counts.push(("safety game vertices", sol.game_vertices));
                    report.counts.push(("unsafe vertices", sol.unsafe_vertices));
                    if let Some(s) = &sol.strategy {
                        report.strategy_size = Some(s.memory_size());
                        if let Some(path) = &args.strategy {
                            write_out(Some(path), &format_strategy(&arena, s))?;
                        }
                    }
                    dot = args.dot.is_some().then(|| build_safety_game_with(&arena, lmax, &config).map(|g| g.to_dot(&arena))).transpose()?;
                }
                Engine::Antichain => {
                    let config = AntichainConfig { limits, explicit_upre: false };
                    let sol = solve_dirfix_antichain_with(&arena, lmax, &config)?;
                    report.engine = "antichain".into();
                    report.winner = Some(sol.winner);
                    report.counts.push(("iterations", sol.iterations));
                    report.counts.push(("max antichain size", sol.sizes.iter().copied().max().unwrap_or(0)));
                    report.counts.push(("fixpoint size", sol.fixpoint.len()));
                    dot = None;
                }
                _ => bail!(Error::Invalid("DirFix is solved by the explicit or antichain engine".into())),
            }
        }
        ObjectiveKind::Fix | ObjectiveKind::UFix => {
            let engine = match args.engine.unwrap_or(Engine::Zielonka) {
                Engine::Zielonka => ParityEngine::Zielonka,
                Engine::Spm => ParityEngine::ProgressMeasures,
                _ => bail!(Error::Invalid("Fix and UFix are solved by the zielonka or spm engine".into())),
            };
            let sol = if objective.kind == ObjectiveKind::Fix {
                solve_fix_with(&arena, lmax, engine, &limits)?
            } else {
                solve_ufix_with(&arena, lmax, engine, &limits)?
            };
            report.engine = if engine == ParityEngine::Zielonka { "zielonka" } else { "spm" }.into();
            report.winner = Some(sol.winner);
            report.counts.push(("observer states", sol.nba_states));
            report.counts.push(("parity observer states", sol.parity_states));
            report.counts.push(("product vertices", sol.product.game.num_vertices()));
            report.strategy_size = (sol.winner == Player::Eve).then_some(sol.parity_states);
            dot = args.dot.is_some().then(|| sol.product.to_dot(&arena));
        }
        _ => unreachable!("objective_of accepts fixed-window kinds only"),
    }
    report.wall_time = start.elapsed();
    if let Some(path) = &args.dot {
        match dot {
            Some(text) => write_out(Some(path), &text)?,
            None => bail!(Error::Invalid("--dot needs the explicit, zielonka or spm engine".into())),
        }
    }
    print!("{}", report.render(args.format));
    Ok(exit_for(report.winner.expect("set by every engine")))
}

fn cmd_check(args: &CheckArgs) -> Result<ExitCode> {
    let arena = load_arena(&args.file, &args.common)?;
    let lasso = arena.parse_lasso(&args.lasso)?;
    let limits = Limits::new(args.common.max_states);
    let kinds = match args.objective {
        Some(k) => vec![k],
        None => vec![ObjectiveKind::DirFix, ObjectiveKind::UFix, ObjectiveKind::Fix],
    };
    let mut all = true;
    for kind in kinds {
        let objective = objective_of(kind, Some(args.lmax))?;
        let verdict = check_lasso_with_limits(&arena, &lasso, &objective, &limits)?;
        all &= verdict.member;
        println!("{}({}): {}", kind, args.lmax, if verdict.member { "yes" } else { "no" });
        if let Some(w) = verdict.witness {
            println!("  open window from position {}", w.position);
        }
    }
    Ok(if all { ExitCode::from(0) } else { ExitCode::from(1) })
}

fn cmd_reduce(args: &ReduceArgs) -> Result<ExitCode> {
    match &args.kind {
        ReduceKind::Safety { file, unsafe_states, output } => {
            let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let arena = Arena::parse(&text)?;
            let mut bad = StateSet::empty(arena.num_states());
            for name in unsafe_states {
                bad.insert(arena.state_index(name).ok_or_else(|| Error::Unknown(name.clone()))?);
            }
            let spec = SafetySpec::new(arena, bad)?;
            write_out(output.as_deref(), &safety_to_dirfix(&spec)?.to_wga())?;
        }
        ReduceKind::Universality { file, simulation_only, output } => {
            let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let automaton = WeightedAutomaton::parse(&text)?;
            let arena = if *simulation_only { simulation_gadget(&automaton)? } else { universality_gadget(&automaton)? };
            write_out(output.as_deref(), &arena.to_wga())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_export(args: &ExportArgs) -> Result<ExitCode> {
    let arena = load_arena(&args.file, &args.common)?;
    let limits = Limits::new(args.common.max_states);
    let text = match args.graph {
        DotGraph::Arena => arena.to_dot(),
        DotGraph::Dirfix => {
            let config = ExplicitConfig { limits, mutate_zeta: false };
            build_safety_game_with(&arena, args.lmax, &config)?.to_dot(&arena)
        }
        DotGraph::Fix => {
            let nba = build_fix_nba_with(&arena, args.lmax, &limits)?;
            let mut det = ParityObserver::lazy(&nba, &limits).complement();
            product_game(&arena, &mut det, &limits)?.to_dot(&arena)
        }
        DotGraph::Ufix => {
            let nba = build_ufix_nba_with(&arena, args.lmax, &limits)?;
            let mut det = ParityObserver::lazy(&nba, &limits).complement();
            product_game(&arena, &mut det, &limits)?.to_dot(&arena)
        }
    };
    write_out(args.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

/// Exit code for a failed command.
fn error_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Undecidable(_)) => 3,
        Some(
            Error::Syntax { .. }
            | Error::NotTotal { .. }
            | Error::NotPartition(_)
            | Error::InitialNotSingleton
            | Error::Duplicate(_)
            | Error::ParallelEdge(_)
            | Error::Unknown(_)
            | Error::IllegalPath(_),
        ) => 4,
        Some(Error::ResourceLimit { .. }) => 5,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Check(a) => cmd_check(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Crosscheck(a) => crosscheck::run(a),
        Command::ExportDot(a) => cmd_export(a),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(error_code(&err))
        }
    }
}
