//! Perfect-information parity games and their solvers.
//!
//! Convention used throughout: the largest priority seen infinitely often
//! decides the play, even priorities favour Eve.

mod brute;
mod product;

use std::fmt::Write as _;

use crate::{Error, Player, Result};

pub use brute::{brute_force_parity, perfect_information_winner};
pub use product::{product_game, solve_fix, solve_fix_with, solve_ufix, solve_ufix_with, PipelineSolution, ProductGame, ProductLetter, ProductVertex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityGame {
    owner: Vec<Player>,
    priority: Vec<u32>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    initial: usize,
}

impl ParityGame {
    pub fn new(owner: Vec<Player>, priority: Vec<u32>, succ: Vec<Vec<usize>>, initial: usize) -> Result<Self> {
        let n = owner.len();
        if priority.len() != n || succ.len() != n {
            return Err(Error::Invalid("owner, priority and successor tables differ in length".into()));
        }
        if initial >= n {
            return Err(Error::OutOfRange { index: initial, len: n });
        }
        let mut pred = vec![Vec::new(); n];
        for (v, out) in succ.iter().enumerate() {
            if out.is_empty() {
                return Err(Error::Invalid(format!("vertex {v} has no outgoing edge")));
            }
            for &u in out {
                if u >= n {
                    return Err(Error::OutOfRange { index: u, len: n });
                }
                pred[u].push(v);
            }
        }
        Ok(ParityGame {
            owner,
            priority,
            succ,
            pred,
            initial,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.owner.len()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn priority(&self, v: usize) -> u32 {
        self.priority[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[v]
    }

    pub fn max_priority(&self) -> u32 {
        self.priority.iter().copied().max().unwrap_or(0)
    }

    /// DOT rendering; `label` names each vertex.
    pub fn to_dot_with(&self, label: impl Fn(usize) -> String) -> String {
        let mut out = String::from("digraph parity {\n");
        for v in 0..self.num_vertices() {
            let shape = match self.owner[v] {
                Player::Eve => "ellipse",
                Player::Adam => "box",
            };
            let style = if v == self.initial { ", style=bold" } else { "" };
            let _ = writeln!(out, "  v{v} [shape={shape}{style}, label=\"{} / {}\"];", label(v).replace('"', "\\\""), self.priority[v]);
        }
        for (v, succ) in self.succ.iter().enumerate() {
            for u in succ {
                let _ = writeln!(out, "  v{v} -> v{u};");
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_dot(&self) -> String {
        self.to_dot_with(|v| v.to_string())
    }
}

/// Winning regions and positional strategies. `strategy[v]` is the move of
/// the owner of `v` when `v` is won by its owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParitySolution {
    pub winner: Player,
    pub winning: Vec<Player>,
    pub strategy: Vec<Option<usize>>,
}

impl ParitySolution {
    /// Checks that both strategies are winning, by solving the one-player
    /// games they induce.
    pub fn verify(&self, game: &ParityGame) -> bool {
        for player in [Player::Eve, Player::Adam] {
            let succ: Vec<Vec<usize>> = (0..game.num_vertices())
                .map(|v| {
                    if game.owner(v) == player && self.winning[v] == player {
                        vec![self.strategy[v].expect("winning vertex has a move")]
                    } else {
                        game.successors(v).to_vec()
                    }
                })
                .collect();
            let opp = brute::one_player_regions(game, &succ, player.opponent());
            for v in 0..game.num_vertices() {
                if self.winning[v] == player && opp[v] {
                    return false;
                }
            }
        }
        true
    }
}

fn mask_count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&b| b).count()
}

/// Attractor of `target` for `player` inside the subgame `within`, with the
/// attracting moves of `player`.
fn attractor(game: &ParityGame, within: &[bool], target: &[bool], player: Player, strategy: &mut [Option<usize>]) -> Vec<bool> {
    let n = game.num_vertices();
    let mut attr = vec![false; n];
    let mut count: Vec<usize> = (0..n).map(|v| game.successors(v).iter().filter(|&&u| within[u]).count()).collect();
    let mut queue = Vec::new();
    for v in 0..n {
        if within[v] && target[v] {
            attr[v] = true;
            queue.push(v);
        }
    }
    while let Some(u) = queue.pop() {
        for &v in game.predecessors(u) {
            if !within[v] || attr[v] {
                continue;
            }
            if game.owner(v) == player {
                attr[v] = true;
                strategy[v] = Some(u);
                queue.push(v);
            } else {
                count[v] -= 1;
                if count[v] == 0 {
                    attr[v] = true;
                    queue.push(v);
                }
            }
        }
    }
    attr
}

/// Recursive (Zielonka) solver.
pub fn zielonka(game: &ParityGame) -> ParitySolution {
    let n = game.num_vertices();
    let mut winning = vec![Player::Eve; n];
    let mut strategy = vec![None; n];
    let all = vec![true; n];
    zielonka_rec(game, &all, &mut winning, &mut strategy);
    ParitySolution {
        winner: winning[game.initial()],
        winning,
        strategy,
    }
}

fn zielonka_rec(game: &ParityGame, within: &[bool], winning: &mut [Player], strategy: &mut [Option<usize>]) {
    let n = game.num_vertices();
    if mask_count(within) == 0 {
        return;
    }
    let p = (0..n).filter(|&v| within[v]).map(|v| game.priority(v)).max().unwrap();
    let alpha = Player::of_priority(p);
    let top: Vec<bool> = (0..n).map(|v| within[v] && game.priority(v) == p).collect();
    let mut attr_strategy = vec![None; n];
    let a = attractor(game, within, &top, alpha, &mut attr_strategy);
    let rest: Vec<bool> = (0..n).map(|v| within[v] && !a[v]).collect();
    zielonka_rec(game, &rest, winning, strategy);
    let opp_wins: Vec<bool> = (0..n).map(|v| rest[v] && winning[v] == alpha.opponent()).collect();
    if mask_count(&opp_wins) == 0 {
        for v in 0..n {
            if !within[v] {
                continue;
            }
            winning[v] = alpha;
            if a[v] && game.owner(v) == alpha {
                strategy[v] = if top[v] {
                    game.successors(v).iter().copied().find(|&u| within[u])
                } else {
                    attr_strategy[v]
                };
            }
        }
        return;
    }
    let mut b_strategy = vec![None; n];
    let b = attractor(game, within, &opp_wins, alpha.opponent(), &mut b_strategy);
    let rest2: Vec<bool> = (0..n).map(|v| within[v] && !b[v]).collect();
    zielonka_rec(game, &rest2, winning, strategy);
    for v in 0..n {
        if b[v] {
            winning[v] = alpha.opponent();
            if !opp_wins[v] && game.owner(v) == alpha.opponent() {
                strategy[v] = b_strategy[v];
            }
        }
    }
}

/// Small progress measures. Returns Eve's winning region and her strategy;
/// Adam's side is obtained on the dual game.
fn spm_eve(game: &ParityGame) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = game.num_vertices();
    let d = game.max_priority() as usize;
    // bound per odd priority: number of vertices carrying it
    let mut bound = vec![0usize; d + 1];
    for v in 0..n {
        let p = game.priority(v) as usize;
        if p % 2 == 1 {
            bound[p] += 1;
        }
    }
    // measure: None is top; otherwise counters indexed by priority
    type Measure = Option<Vec<usize>>;
    let cmp_from = |a: &Measure, b: &Measure, from: usize| -> std::cmp::Ordering {
        match (a, b) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, _) => std::cmp::Ordering::Greater,
            (_, None) => std::cmp::Ordering::Less,
            (Some(x), Some(y)) => {
                for k in (from..=d).rev() {
                    if k % 2 == 1 && x[k] != y[k] {
                        return x[k].cmp(&y[k]);
                    }
                }
                std::cmp::Ordering::Equal
            }
        }
    };
    let prog = |m: &Measure, p: usize| -> Measure {
        let m = m.as_ref()?;
        let mut out = vec![0; d + 1];
        out[p..].copy_from_slice(&m[p..]);
        if p % 2 == 1 {
            let mut k = p;
            loop {
                if k > d {
                    return None;
                }
                if out[k] < bound[k] {
                    out[k] += 1;
                    break;
                }
                out[k] = 0;
                k += 2;
            }
        }
        Some(out)
    };
    let mut rho: Vec<Measure> = vec![Some(vec![0; d + 1]); n];
    let mut queue: std::collections::VecDeque<usize> = (0..n).collect();
    let mut queued = vec![true; n];
    let best = |rho: &[Measure], v: usize| -> (Measure, usize) {
        let p = game.priority(v) as usize;
        let mut choice: Option<(Measure, usize)> = None;
        for &u in game.successors(v) {
            let m = prog(&rho[u], p);
            let better = match &choice {
                None => true,
                Some((c, _)) => {
                    let ord = cmp_from(&m, c, 0);
                    match game.owner(v) {
                        Player::Eve => ord == std::cmp::Ordering::Less,
                        Player::Adam => ord == std::cmp::Ordering::Greater,
                    }
                }
            };
            if better {
                choice = Some((m, u));
            }
        }
        choice.unwrap()
    };
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let (m, _) = best(&rho, v);
        if cmp_from(&m, &rho[v], 0) == std::cmp::Ordering::Greater {
            rho[v] = m;
            for &u in game.predecessors(v) {
                if !queued[u] {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    let wins: Vec<bool> = rho.iter().map(Option::is_some).collect();
    let strategy = (0..n)
        .map(|v| (wins[v] && game.owner(v) == Player::Eve).then(|| best(&rho, v).1))
        .collect();
    (wins, strategy)
}

/// The game with roles swapped: owners exchanged, priorities shifted by one.
pub fn dual(game: &ParityGame) -> ParityGame {
    ParityGame {
        owner: game.owner.iter().map(|p| p.opponent()).collect(),
        priority: game.priority.iter().map(|p| p + 1).collect(),
        succ: game.succ.clone(),
        pred: game.pred.clone(),
        initial: game.initial,
    }
}

/// Small-progress-measures solver (both sides).
pub fn small_progress_measures(game: &ParityGame) -> ParitySolution {
    let (eve, eve_strategy) = spm_eve(game);
    let (adam, adam_strategy) = spm_eve(&dual(game));
    let n = game.num_vertices();
    let winning: Vec<Player> = (0..n)
        .map(|v| {
            debug_assert_ne!(eve[v], adam[v], "determinacy");
            if eve[v] {
                Player::Eve
            } else {
                Player::Adam
            }
        })
        .collect();
    let strategy = (0..n)
        .map(|v| match game.owner(v) {
            Player::Eve => eve_strategy[v],
            Player::Adam => adam_strategy[v],
        })
        .collect();
    ParitySolution {
        winner: winning[game.initial()],
        winning,
        strategy,
    }
}

/// Solver selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParityEngine {
    #[default]
    Zielonka,
    ProgressMeasures,
}

pub fn solve_parity(game: &ParityGame, engine: ParityEngine) -> ParitySolution {
    match engine {
        ParityEngine::Zielonka => zielonka(game),
        ParityEngine::ProgressMeasures => small_progress_measures(game),
    }
}
