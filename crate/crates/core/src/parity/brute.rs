//! Exhaustive reference solvers.

use indexmap::IndexSet;

use super::ParityGame;
use crate::arena::{Arena, Objective, ObjectiveKind};
use crate::{Error, Player, Result};

/// Vertices from which `who` wins the game in which every move is chosen
/// by `who` along the successor lists `succ`: some reachable cycle has a
/// maximal priority of `who`'s parity.
pub(crate) fn one_player_regions(game: &ParityGame, succ: &[Vec<usize>], who: Player) -> Vec<bool> {
    let n = game.num_vertices();
    let mut good = vec![false; n];
    let mut prios: Vec<u32> = (0..n).map(|v| game.priority(v)).filter(|&p| Player::of_priority(p) == who).collect();
    prios.sort_unstable();
    prios.dedup();
    for p in prios {
        let allowed = |v: usize| game.priority(v) <= p;
        let comp = crate::oracle::scc(n, |v| {
            if allowed(v) {
                succ[v].iter().copied().filter(|&u| allowed(u)).collect()
            } else {
                Vec::new()
            }
        });
        let mut size = std::collections::HashMap::new();
        for v in 0..n {
            *size.entry(comp[v]).or_insert(0usize) += 1;
        }
        for v in 0..n {
            if game.priority(v) == p && (size[&comp[v]] > 1 || succ[v].contains(&v)) {
                good[v] = true;
            }
        }
    }
    // backward reachability
    let mut pred = vec![Vec::new(); n];
    for v in 0..n {
        for &u in &succ[v] {
            pred[u].push(v);
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| good[v]).collect();
    while let Some(u) = stack.pop() {
        for &v in &pred[u] {
            if !good[v] {
                good[v] = true;
                stack.push(v);
            }
        }
    }
    good
}

/// Winner of every vertex by enumerating Eve's positional strategies.
/// Fails when there are more than `2^20` of them.
pub fn brute_force_parity(game: &ParityGame) -> Result<Vec<Player>> {
    let n = game.num_vertices();
    let eve: Vec<usize> = (0..n).filter(|&v| game.owner(v) == Player::Eve).collect();
    let mut total: u64 = 1;
    for &v in &eve {
        total = total.saturating_mul(game.successors(v).len() as u64);
        if total > 1 << 20 {
            return Err(Error::ResourceLimit {
                what: "positional strategies",
                limit: 1 << 20,
            });
        }
    }
    let mut won = vec![false; n];
    let mut choice = vec![0usize; eve.len()];
    loop {
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|v| match eve.iter().position(|&e| e == v) {
                Some(k) => vec![game.successors(v)[choice[k]]],
                None => game.successors(v).to_vec(),
            })
            .collect();
        let adam = one_player_regions(game, &succ, Player::Adam);
        for v in 0..n {
            won[v] |= !adam[v];
        }
        // next strategy in mixed radix
        let mut k = 0;
        loop {
            if k == eve.len() {
                return Ok(won.into_iter().map(|w| if w { Player::Eve } else { Player::Adam }).collect());
            }
            choice[k] += 1;
            if choice[k] < game.successors(eve[k]).len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Open windows as `(length so far, running sum)`; a step returns the new
/// list and whether some window stayed negative for `lmax` steps.
fn advance(open: &[(usize, i64)], w: i64, lmax: usize) -> (Vec<(usize, i64)>, bool) {
    let mut next = Vec::new();
    let mut violated = false;
    if w < 0 {
        if lmax == 1 {
            violated = true;
        } else {
            next.push((1, w));
        }
    }
    for &(k, s) in open {
        let s = s + w;
        if s >= 0 {
            continue;
        }
        if k + 1 == lmax {
            violated = true;
        } else {
            next.push((k + 1, s));
        }
    }
    next.sort_unstable();
    (next, violated)
}

/// Winner of a fixed-window objective on a perfect-information arena, by
/// solving the game on (state, open windows) directly: a safety game for
/// DirFix, a co-Büchi game for UFix and Fix (which coincide here).
pub fn perfect_information_winner(arena: &Arena, objective: &Objective) -> Result<Player> {
    if !arena.is_perfect_information() {
        return Err(Error::Invalid("arena does not have perfect information".into()));
    }
    let lmax = objective.solvable_lmax()?;
    let arena = arena.rescale(*objective.threshold.numer(), *objective.threshold.denom())?;
    // vertices: Eve (q, windows), Adam (q, windows, σ), marker for a violation
    #[derive(Clone, PartialEq, Eq, Hash)]
    enum V {
        Eve(usize, Vec<(usize, i64)>),
        Adam(usize, Vec<(usize, i64)>, usize),
        Bad(usize),
    }
    let mut vs: IndexSet<V> = IndexSet::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    vs.insert(V::Eve(arena.initial(), Vec::new()));
    let mut i = 0;
    while i < vs.len() {
        let v = vs[i].clone();
        let mut out = Vec::new();
        match v {
            V::Eve(q, open) => {
                for a in 0..arena.num_actions() {
                    out.push(vs.insert_full(V::Adam(q, open.clone(), a)).0);
                }
            }
            V::Adam(q, open, a) => {
                for &(q2, w) in arena.successors(q, a) {
                    let (next, bad) = advance(&open, w, lmax);
                    let e = vs.insert_full(V::Eve(q2, next)).0;
                    out.push(if bad { vs.insert_full(V::Bad(e)).0 } else { e });
                }
            }
            V::Bad(e) => out.push(e),
        }
        succ.push(out);
        i += 1;
    }
    let n = vs.len();
    let owner: Vec<Player> = vs.iter().map(|v| if matches!(v, V::Eve(..)) { Player::Eve } else { Player::Adam }).collect();
    let bad: Vec<bool> = vs.iter().map(|v| matches!(v, V::Bad(_))).collect();
    let mut pred = vec![Vec::new(); n];
    for v in 0..n {
        for &u in &succ[v] {
            pred[u].push(v);
        }
    }
    let attr = |within: &[bool], target: &[bool], player: Player| -> Vec<bool> {
        let mut inside = vec![false; n];
        let mut count: Vec<usize> = (0..n).map(|v| succ[v].iter().filter(|&&u| within[u]).count()).collect();
        let mut stack = Vec::new();
        for v in 0..n {
            if within[v] && target[v] {
                inside[v] = true;
                stack.push(v);
            }
        }
        while let Some(u) = stack.pop() {
            for &v in &pred[u] {
                if !within[v] || inside[v] {
                    continue;
                }
                count[v] -= 1;
                if owner[v] == player || count[v] == 0 {
                    inside[v] = true;
                    stack.push(v);
                }
            }
        }
        inside
    };
    let all = vec![true; n];
    let adam_region = match objective.kind {
        ObjectiveKind::DirFix => attr(&all, &bad, Player::Adam),
        _ => {
            let mut r = all;
            loop {
                let reach = attr(&r, &bad, Player::Adam);
                let trap: Vec<bool> = (0..n).map(|v| r[v] && !reach[v]).collect();
                if !trap.contains(&true) {
                    break r;
                }
                let eve = attr(&r, &trap, Player::Eve);
                for v in 0..n {
                    r[v] &= !eve[v];
                }
            }
        }
    };
    Ok(if adam_region[0] { Player::Adam } else { Player::Eve })
}
