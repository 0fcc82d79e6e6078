//! Differential testing on seeded random arenas.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wmp_core::antichain::solve_dirfix_antichain_with;
use wmp_core::antichain::AntichainConfig;
use wmp_core::arena::{Arena, Objective};
use wmp_core::dirfix::{solve_dirfix_with, ExplicitConfig};
use wmp_core::observers::{build_fix_nba_with, build_ufix_nba_with, lasso_belief_word, lasso_word};
use wmp_core::oracle::check_lasso_with_limits;
use wmp_core::parity::{solve_fix_with, solve_ufix_with, ParityEngine};
use wmp_core::random::{random_arena, random_lasso, ArenaBounds};
use wmp_core::{Limits, Player};

#[derive(Args)]
pub struct CrosscheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long = "states", default_value_t = 4)]
    max_states: usize,
    #[arg(long = "actions", default_value_t = 2)]
    max_actions: usize,
    #[arg(long = "weight", default_value_t = 2)]
    max_weight: i64,
    #[arg(long = "branching", default_value_t = 2)]
    max_branching: usize,
    /// Window bounds 1..=lmax are checked.
    #[arg(long, default_value_t = 3)]
    lmax: usize,
    /// Random lassos per arena for the observer checks.
    #[arg(long, default_value_t = 4)]
    lassos: usize,
    /// Where a minimized failing arena is written.
    #[arg(long, default_value = "crosscheck-repro.wga")]
    repro: PathBuf,
    /// Corrupt the explicit engine's successor function (harness self-test).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

struct Checker {
    lmax: usize,
    lassos: usize,
    mutate: bool,
    limits: Limits,
}

#[derive(Default)]
struct Tally {
    engine_runs: usize,
    chain_runs: usize,
    lassos: usize,
    eve: [usize; 3],
}

impl Checker {
    /// First disagreement found on `arena`, if any.
    fn check(&self, arena: &Arena, rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<Option<String>> {
        let explicit = ExplicitConfig {
            limits: self.limits,
            mutate_zeta: self.mutate,
        };
        let anti = AntichainConfig {
            limits: self.limits,
            explicit_upre: false,
        };
        for lmax in 1..=self.lmax {
            let d = solve_dirfix_with(arena, lmax, &explicit)?.winner;
            let a = solve_dirfix_antichain_with(arena, lmax, &anti)?.winner;
            tally.engine_runs += 1;
            if d != a {
                return Ok(Some(format!("DirFix({lmax}): explicit says {d}, antichain says {a}")));
            }
            let u = solve_ufix_with(arena, lmax, ParityEngine::Zielonka, &self.limits)?.winner;
            let f = solve_fix_with(arena, lmax, ParityEngine::Zielonka, &self.limits)?.winner;
            tally.chain_runs += 1;
            if lmax == self.lmax {
                for (k, w) in [d, u, f].into_iter().enumerate() {
                    tally.eve[k] += usize::from(w == Player::Eve);
                }
            }
            if (d == Player::Eve && u != Player::Eve) || (u == Player::Eve && f != Player::Eve) {
                return Ok(Some(format!("implication chain broken at lmax {lmax}: DirFix {d}, UFix {u}, Fix {f}")));
            }
        }
        let lmax = self.lmax.min(2);
        let fix_nba = build_fix_nba_with(arena, lmax, &self.limits)?;
        let ufix_nba = build_ufix_nba_with(arena, lmax, &self.limits)?;
        for _ in 0..self.lassos {
            let Some(lasso) = random_lasso(rng, arena, 3, 3) else { continue };
            tally.lassos += 1;
            let fix = check_lasso_with_limits(arena, &lasso, &Objective::fix(lmax), &self.limits)?.member;
            let ufix = check_lasso_with_limits(arena, &lasso, &Objective::ufix(lmax), &self.limits)?.member;
            if fix_nba.accepts(&lasso_word(arena, &lasso)?)? == fix {
                return Ok(Some(format!("Fix({lmax}) observer disagrees with the oracle on {}", arena.format_lasso(&lasso))));
            }
            if ufix_nba.accepts(&lasso_belief_word(arena, &lasso)?)? == ufix {
                return Ok(Some(format!("UFix({lmax}) observer disagrees with the oracle on {}", arena.format_lasso(&lasso))));
            }
        }
        Ok(None)
    }

    /// Does the engine comparison alone fail on `arena`?
    fn fails(&self, arena: &Arena) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let probe = Checker { lassos: 0, ..*self };
        matches!(probe.check(arena, &mut rng, &mut Tally::default()), Ok(Some(_)))
    }
}

type Parts = (Vec<String>, String, Vec<String>, Vec<Vec<String>>, Vec<(String, String, i64, String)>);

fn parts(arena: &Arena) -> Parts {
    let states: Vec<String> = (0..arena.num_states()).map(|q| arena.state_name(q).to_string()).collect();
    let actions: Vec<String> = (0..arena.num_actions()).map(|a| arena.action_name(a).to_string()).collect();
    let blocks = (0..arena.num_observations())
        .map(|o| arena.observation(o).iter().map(|&q| states[q].clone()).collect())
        .collect();
    let trans = arena
        .transitions()
        .map(|t| (states[t.source].clone(), actions[t.action].clone(), t.weight, states[t.target].clone()))
        .collect();
    let initial = arena.state_name(arena.initial()).to_string();
    (states, initial, actions, blocks, trans)
}

fn build(p: &Parts) -> Option<Arena> {
    let s: Vec<&str> = p.0.iter().map(String::as_str).collect();
    let a: Vec<&str> = p.2.iter().map(String::as_str).collect();
    let b: Vec<Vec<&str>> = p.3.iter().map(|b| b.iter().map(String::as_str).collect()).collect();
    let t: Vec<(&str, &str, i64, &str)> = p.4.iter().map(|(x, y, w, z)| (x.as_str(), y.as_str(), *w, z.as_str())).collect();
    Arena::new(&s, &p.1, &a, &b, &t).ok()
}

/// Greedily drops actions and transitions, and moves weights towards 0,
/// while the failure persists.
fn minimize(checker: &Checker, arena: Arena) -> Arena {
    let mut best = arena;
    loop {
        let p = parts(&best);
        let mut candidates: Vec<Parts> = Vec::new();
        if p.2.len() > 1 {
            for a in &p.2 {
                let mut c = p.clone();
                c.2.retain(|x| x != a);
                c.4.retain(|t| &t.1 != a);
                candidates.push(c);
            }
        }
        for i in 0..p.4.len() {
            let mut c = p.clone();
            c.4.remove(i);
            candidates.push(c);
            if p.4[i].2 != 0 {
                let mut c = p.clone();
                c.4[i].2 -= p.4[i].2.signum();
                candidates.push(c);
            }
        }
        match candidates.iter().filter_map(build).find(|a| checker.fails(a)) {
            Some(smaller) => best = smaller,
            None => return best,
        }
    }
}

pub fn run(args: &CrosscheckArgs) -> Result<ExitCode> {
    let bounds = ArenaBounds {
        max_states: args.max_states,
        max_actions: args.max_actions,
        max_weight: args.max_weight,
        max_branching: args.max_branching,
    };
    let checker = Checker {
        lmax: args.lmax.max(1),
        lassos: args.lassos,
        mutate: args.inject_fault,
        limits: Limits::default(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut tally = Tally::default();
    for case in 0..args.count {
        let arena = random_arena(&mut rng, &bounds);
        if let Some(problem) = checker.check(&arena, &mut rng, &mut tally)? {
            println!("case {case}: {problem}");
            let repro = if checker.fails(&arena) { minimize(&checker, arena) } else { arena };
            fs::write(&args.repro, repro.to_wga()).with_context(|| format!("writing {}", args.repro.display()))?;
            println!("reproduction written to {}", args.repro.display());
            println!("result: FAIL");
            return Ok(ExitCode::from(1));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "seed: {}", args.seed);
    let _ = writeln!(out, "cases: {}", args.count);
    let _ = writeln!(out, "DirFix explicit = antichain: {} comparisons", tally.engine_runs);
    let _ = writeln!(out, "DirFix => UFix => Fix: {} checks", tally.chain_runs);
    let _ = writeln!(out, "observer = oracle: {} lassos", tally.lassos);
    let _ = writeln!(
        out,
        "Eve wins at lmax {}: DirFix {}, UFix {}, Fix {}",
        checker.lmax, tally.eve[0], tally.eve[1], tally.eve[2]
    );
    let _ = writeln!(out, "result: PASS");
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}
