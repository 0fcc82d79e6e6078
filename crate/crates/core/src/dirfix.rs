//! Explicit solver for the direct fixed window objective.
//!
//! Window functions combine the knowledge (support) with, for every state
//! and every length `l`, the worst sum of a window of length `l` that is
//! still open when the play reaches that state. The game on window
//! functions is a perfect-information safety game: Eve picks actions, Adam
//! picks the next observation, and Eve must avoid functions with an open
//! window of length `lmax`.

use std::fmt::{self, Write as _};

use indexmap::IndexSet;

use crate::arena::{AbstractPrefix, Arena, MooreStrategy, StateSet};
use crate::{Error, Limits, Player, Result};

/// An element of the window-function space: `⊥` or a vector of `lmax`
/// values in `[-W*lmax, 0]` per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowFunction {
    entries: Vec<Option<Vec<i64>>>,
}

impl WindowFunction {
    /// The function with empty support.
    pub fn bottom(num_states: usize) -> Self {
        WindowFunction {
            entries: vec![None; num_states],
        }
    }

    pub fn from_entries(entries: Vec<Option<Vec<i64>>>) -> Self {
        WindowFunction { entries }
    }

    pub fn entries(&self) -> &[Option<Vec<i64>>] {
        &self.entries
    }

    pub fn num_states(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, q: usize) -> Option<&[i64]> {
        self.entries[q].as_deref()
    }

    pub fn set(&mut self, q: usize, value: Option<Vec<i64>>) {
        self.entries[q] = value;
    }

    /// `f(q)_l` with `l` counted from 1.
    pub fn value(&self, q: usize, l: usize) -> Option<i64> {
        self.entries[q].as_ref().map(|v| v[l - 1])
    }

    pub fn support(&self) -> StateSet {
        StateSet::from_states(
            self.entries.len(),
            self.entries.iter().enumerate().filter(|(_, e)| e.is_some()).map(|(q, _)| q),
        )
    }

    pub fn support_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().enumerate().filter(|(_, e)| e.is_some()).map(|(q, _)| q)
    }

    /// Has some support state an open window of length `lmax`?
    pub fn is_unsafe(&self) -> bool {
        self.entries.iter().flatten().any(|v| *v.last().unwrap() < 0)
    }

    /// Renders as `{q0↦(0,0), q1↦(-1,0)}`.
    pub fn display<'a>(&'a self, arena: &'a Arena) -> impl fmt::Display + 'a {
        FunctionDisplay { f: self, arena }
    }
}

struct FunctionDisplay<'a> {
    f: &'a WindowFunction,
    arena: &'a Arena,
}

impl fmt::Display for FunctionDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{{")?;
        let mut first = true;
        for q in self.f.support_states() {
            if !first {
                write!(out, ", ")?;
            }
            first = false;
            let vals: Vec<String> = self.f.get(q).unwrap().iter().map(|v| v.to_string()).collect();
            write!(out, "{}↦({})", self.arena.state_name(q), vals.join(","))?;
        }
        write!(out, "}}")
    }
}

/// `f_I`: all zeros on `q_I`, `⊥` elsewhere.
pub fn initial_function(arena: &Arena, lmax: usize) -> WindowFunction {
    let mut f = WindowFunction::bottom(arena.num_states());
    f.set(arena.initial(), Some(vec![0; lmax]));
    f
}

pub fn supp(f: &WindowFunction) -> StateSet {
    f.support()
}

/// The σ-successor of `f` whose support lies in observation `o`, if any.
pub fn sigma_successor(arena: &Arena, f: &WindowFunction, action: usize, o: usize) -> Option<WindowFunction> {
    successor(arena, f, action, o, false)
}

/// Successor computation; `mutate` drops the `f(p)_{j-1} < 0` guard and is
/// only used to check that differential tests catch a broken ζ.
pub(crate) fn successor(
    arena: &Arena,
    f: &WindowFunction,
    action: usize,
    o: usize,
    mutate: bool,
) -> Option<WindowFunction> {
    let n = arena.num_states();
    let lmax = f.entries.iter().flatten().next().map(|v| v.len())?;
    let floor = -arena.max_abs_weight() * lmax as i64;
    let mut out = WindowFunction::bottom(n);
    let mut any = false;
    for &q in arena.observation(o) {
        let preds: Vec<(&[i64], i64)> = arena
            .predecessors(q, action)
            .iter()
            .filter_map(|&(p, w)| f.get(p).map(|v| (v, w)))
            .collect();
        if preds.is_empty() {
            continue;
        }
        any = true;
        let mut vals = Vec::with_capacity(lmax);
        for j in 1..=lmax {
            let zeta = if j == 1 {
                preds.iter().map(|&(_, w)| w).min()
            } else {
                preds
                    .iter()
                    .filter(|(v, _)| mutate || v[j - 2] < 0)
                    .map(|&(v, w)| v[j - 2] + w)
                    .min()
            };
            vals.push(zeta.map_or(0, |z| z.min(0).max(floor)));
        }
        out.set(q, Some(vals));
    }
    any.then_some(out)
}

/// `supp⁻¹`: the function sequence induced by an abstract prefix from `phi`.
pub fn supp_inverse(arena: &Arena, prefix: &AbstractPrefix, phi: &WindowFunction) -> Result<Vec<WindowFunction>> {
    if !phi.support().is_subset(&arena.observation_set(prefix.observations[0])) {
        return Err(Error::Invalid("support not inside the first observation".into()));
    }
    let mut seq = vec![phi.clone()];
    for (i, &a) in prefix.actions.iter().enumerate() {
        let next = sigma_successor(arena, seq.last().unwrap(), a, prefix.observations[i + 1])
            .ok_or_else(|| Error::IllegalPath(format!("no successor at step {}", i + 1)))?;
        seq.push(next);
    }
    Ok(seq)
}

/// Every element of the function space (exhaustive; desk scale only).
pub fn enumerate_functions(arena: &Arena, lmax: usize, limits: &Limits) -> Result<Vec<WindowFunction>> {
    let n = arena.num_states();
    let range = arena.max_abs_weight() * lmax as i64;
    let mut vectors: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..lmax {
        let mut next = Vec::new();
        for v in &vectors {
            for x in -range..=0 {
                let mut v2 = v.clone();
                v2.push(x);
                next.push(v2);
            }
        }
        vectors = next;
    }
    let per_state = vectors.len() + 1;
    let total = (per_state as f64).powi(n as i32);
    if total > limits.max_states as f64 {
        return Err(Error::ResourceLimit {
            what: "window functions",
            limit: limits.max_states,
        });
    }
    let mut out = vec![WindowFunction::bottom(n)];
    for q in 0..n {
        let mut next = Vec::with_capacity(out.len() * per_state);
        for f in &out {
            next.push(f.clone());
            for v in &vectors {
                let mut g = f.clone();
                g.set(q, Some(v.clone()));
                next.push(g);
            }
        }
        out = next;
    }
    out.sort();
    Ok(out)
}

/// Number of elements of the function space: `(1 + (W*lmax+1)^lmax)^|Q|`.
pub fn function_space_size(arena: &Arena, lmax: usize) -> f64 {
    let per = ((arena.max_abs_weight() * lmax as i64 + 1) as f64).powi(lmax as i32) + 1.0;
    per.powi(arena.num_states() as i32)
}

/// Configuration of the explicit engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExplicitConfig {
    pub limits: Limits,
    #[doc(hidden)]
    pub mutate_zeta: bool,
}

/// The reachable part of the safety game on window functions.
#[derive(Clone, Debug)]
pub struct SafetyGame {
    pub lmax: usize,
    /// Vertices in breadth-first order; vertex 0 is `f_I`.
    pub vertices: IndexSet<WindowFunction>,
    /// `moves[v][σ]`: `(observation, successor)` pairs Adam chooses from.
    /// Empty for unsafe vertices, which are absorbing.
    pub moves: Vec<Vec<Vec<(usize, usize)>>>,
    pub unsafe_: Vec<bool>,
}

impl SafetyGame {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_unsafe(&self) -> usize {
        self.unsafe_.iter().filter(|&&u| u).count()
    }

    pub fn to_dot(&self, arena: &Arena) -> String {
        let mut out = String::from("digraph safety {\n");
        for (v, f) in self.vertices.iter().enumerate() {
            let style = if self.unsafe_[v] { ", style=filled, fillcolor=salmon" } else { "" };
            let _ = writeln!(out, "  v{v} [label=\"{}\"{style}];", f.display(arena));
        }
        for (v, per_action) in self.moves.iter().enumerate() {
            for (a, succs) in per_action.iter().enumerate() {
                for &(o, u) in succs {
                    let _ = writeln!(
                        out,
                        "  v{v} -> v{u} [label=\"{},{}\"];",
                        arena.action_name(a),
                        arena.observation_name(o)
                    );
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_safety_game(arena: &Arena, lmax: usize) -> Result<SafetyGame> {
    build_safety_game_with(arena, lmax, &ExplicitConfig::default())
}

pub fn build_safety_game_with(arena: &Arena, lmax: usize, config: &ExplicitConfig) -> Result<SafetyGame> {
    if lmax == 0 {
        return Err(Error::Invalid("lmax must be at least 1".into()));
    }
    let mut vertices = IndexSet::new();
    vertices.insert(initial_function(arena, lmax));
    let mut moves = Vec::new();
    let mut unsafe_ = Vec::new();
    let mut i = 0;
    while i < vertices.len() {
        let f = vertices.get_index(i).unwrap().clone();
        let bad = f.is_unsafe();
        unsafe_.push(bad);
        let mut per_action = vec![Vec::new(); arena.num_actions()];
        if !bad {
            for (a, slot) in per_action.iter_mut().enumerate() {
                for o in 0..arena.num_observations() {
                    if let Some(g) = successor(arena, &f, a, o, config.mutate_zeta) {
                        let (j, fresh) = vertices.insert_full(g);
                        if fresh {
                            config.limits.check("safety game vertices", vertices.len())?;
                        }
                        slot.push((o, j));
                    }
                }
            }
        }
        moves.push(per_action);
        i += 1;
    }
    Ok(SafetyGame {
        lmax,
        vertices,
        moves,
        unsafe_,
    })
}

/// Solution of a safety game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetySolution {
    pub winner: Player,
    /// Eve's winning region.
    pub winning: Vec<bool>,
    /// A safe action for every winning vertex.
    pub strategy: Vec<Option<usize>>,
}

/// Backward attractor of the unsafe vertices for Adam.
pub fn solve_safety(game: &SafetyGame) -> SafetySolution {
    let n = game.num_vertices();
    let num_actions = game.moves.first().map_or(0, |m| m.len());
    // preds[u] = (v, a) such that u is an a-successor of v
    let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (v, per_action) in game.moves.iter().enumerate() {
        for (a, succs) in per_action.iter().enumerate() {
            for &(_, u) in succs {
                preds[u].push((v, a));
            }
        }
    }
    let mut losing = vec![false; n];
    let mut action_lost = vec![vec![false; num_actions]; n];
    let mut remaining = vec![num_actions; n];
    let mut queue = Vec::new();
    for v in 0..n {
        if game.unsafe_[v] {
            losing[v] = true;
            queue.push(v);
        }
    }
    while let Some(u) = queue.pop() {
        for &(v, a) in &preds[u] {
            if losing[v] || action_lost[v][a] {
                continue;
            }
            action_lost[v][a] = true;
            remaining[v] -= 1;
            if remaining[v] == 0 {
                losing[v] = true;
                queue.push(v);
            }
        }
    }
    let strategy = (0..n)
        .map(|v| {
            if losing[v] {
                None
            } else {
                (0..num_actions).find(|&a| !action_lost[v][a])
            }
        })
        .collect();
    SafetySolution {
        winner: if losing[0] { Player::Adam } else { Player::Eve },
        winning: losing.iter().map(|&l| !l).collect(),
        strategy,
    }
}

/// Winner of the direct fixed window objective, with a Moore strategy for
/// Eve when she wins.
#[derive(Clone, Debug)]
pub struct DirfixSolution {
    pub winner: Player,
    pub strategy: Option<MooreStrategy>,
    pub game_vertices: usize,
    pub unsafe_vertices: usize,
}

pub fn solve_dirfix(arena: &Arena, lmax: usize) -> Result<DirfixSolution> {
    solve_dirfix_with(arena, lmax, &ExplicitConfig::default())
}

pub fn solve_dirfix_with(arena: &Arena, lmax: usize, config: &ExplicitConfig) -> Result<DirfixSolution> {
    let game = build_safety_game_with(arena, lmax, config)?;
    let sol = solve_safety(&game);
    let strategy = (sol.winner == Player::Eve).then(|| transfer_strategy(arena, &game, &sol));
    Ok(DirfixSolution {
        winner: sol.winner,
        strategy,
        game_vertices: game.num_vertices(),
        unsafe_vertices: game.num_unsafe(),
    })
}

/// Reads the positional safety strategy through `supp⁻¹`: memory 0 is a
/// start marker, the others are the winning vertices the strategy reaches;
/// memory after `o_0 … o_{n-1}` holds `f_{n-1}`.
fn transfer_strategy(arena: &Arena, game: &SafetyGame, sol: &SafetySolution) -> MooreStrategy {
    let nobs = arena.num_observations();
    let succ_of = |v: usize, o: usize| -> Option<usize> {
        let a = sol.strategy[v]?;
        game.moves[v][a].iter().find(|&&(o2, _)| o2 == o).map(|&(_, u)| u)
    };
    // memory index -> game vertex (None for the start marker)
    let mut memory: IndexSet<Option<usize>> = IndexSet::new();
    memory.insert(None);
    memory.insert(Some(0));
    let mut i = 1;
    while i < memory.len() {
        let v = memory.get_index(i).unwrap().unwrap();
        for o in 0..nobs {
            if let Some(u) = succ_of(v, o) {
                memory.insert(Some(u));
            }
        }
        i += 1;
    }
    let index = |v: usize| memory.get_index_of(&Some(v)).unwrap();
    let mut update = Vec::with_capacity(memory.len());
    let mut output = Vec::with_capacity(memory.len());
    for (m, slot) in memory.iter().enumerate() {
        let mut up = Vec::with_capacity(nobs);
        let mut out = Vec::with_capacity(nobs);
        for o in 0..nobs {
            let next = match slot {
                None => Some(0),
                Some(v) => succ_of(*v, o),
            };
            match next {
                Some(u) => {
                    up.push(index(u));
                    out.push(sol.strategy[u].unwrap_or(0));
                }
                None => {
                    up.push(m);
                    out.push(0);
                }
            }
        }
        update.push(up);
        output.push(out);
    }
    MooreStrategy::new(arena, 0, update, output).expect("transfer builds total strategies")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn fun(arena: &Arena, entries: &[(&str, &[i64])]) -> WindowFunction {
        let mut f = WindowFunction::bottom(arena.num_states());
        for (q, v) in entries {
            f.set(arena.state_index(q).unwrap(), Some(v.to_vec()));
        }
        f
    }

    #[test]
    fn initial_function_examples() {
        let fig3 = fixtures::fig3();
        assert_eq!(initial_function(&fig3, 2), fun(&fig3, &[("q0", &[0, 0])]));
        let one = fixtures::single_state(0);
        assert_eq!(initial_function(&one, 3), fun(&one, &[("q", &[0, 0, 0])]));
        let fig2 = fixtures::fig2();
        let f = initial_function(&fig2, 1);
        assert_eq!(f, fun(&fig2, &[("q0", &[0])]));
        assert_eq!(supp(&f), StateSet::singleton(2, 0));
        assert!(supp(&WindowFunction::bottom(2)).is_empty());
    }

    #[test]
    fn sigma_successor_examples() {
        let fig3 = fixtures::fig3();
        let o1 = fig3.obs_of(fig3.state_index("q1").unwrap());
        let f1 = sigma_successor(&fig3, &initial_function(&fig3, 2), 0, o1).unwrap();
        assert_eq!(f1, fun(&fig3, &[("q1", &[-1, 0])]));
        let f2 = sigma_successor(&fig3, &f1, 0, o1).unwrap();
        assert_eq!(f2, fun(&fig3, &[("q1", &[0, -1])]));
        assert!(f2.is_unsafe());
        assert!(sigma_successor(&fig3, &initial_function(&fig3, 2), 0, fig3.obs_of(0)).is_none());

        let fig2 = fixtures::fig2();
        let g = sigma_successor(&fig2, &initial_function(&fig2, 2), 0, 0).unwrap();
        assert_eq!(g, fun(&fig2, &[("q0", &[0, 0]), ("q1", &[-1, 0])]));
        assert_eq!(supp(&g).len(), 2);
        assert_eq!(format!("{}", g.display(&fig2)), "{q0↦(0,0), q1↦(-1,0)}");
    }

    #[test]
    fn supp_inverse_examples() {
        let fig3 = fixtures::fig3();
        let fi = initial_function(&fig3, 2);
        let empty = AbstractPrefix::new(vec![0], vec![]).unwrap();
        assert_eq!(supp_inverse(&fig3, &empty, &fi).unwrap(), vec![fi.clone()]);
        let pre = AbstractPrefix::new(vec![0, 1, 1], vec![0, 0]).unwrap();
        let seq = supp_inverse(&fig3, &pre, &fi).unwrap();
        assert_eq!(
            seq,
            vec![fi.clone(), fun(&fig3, &[("q1", &[-1, 0])]), fun(&fig3, &[("q1", &[0, -1])])]
        );
        let bad = AbstractPrefix::new(vec![0, 0], vec![0]).unwrap();
        assert!(matches!(supp_inverse(&fig3, &bad, &fi), Err(Error::IllegalPath(_))));
    }

    #[test]
    fn safety_game_examples() {
        let one = fixtures::single_state(0);
        let g = build_safety_game(&one, 1).unwrap();
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(g.num_unsafe(), 0);
        assert_eq!(solve_safety(&g).winner, Player::Eve);

        let fig3 = fixtures::fig3();
        let g = build_safety_game(&fig3, 2).unwrap();
        assert!(g.vertices.contains(&fun(&fig3, &[("q1", &[0, -1])])));
        assert!((g.num_vertices() as f64) <= function_space_size(&fig3, 2));
        assert_eq!(solve_safety(&g).winner, Player::Adam);
        assert!(g.to_dot(&fig3).contains("salmon"));
    }

    #[test]
    fn solve_dirfix_examples() {
        let fig2 = fixtures::fig2();
        for lmax in 1..=4 {
            assert_eq!(solve_dirfix(&fig2, lmax).unwrap().winner, Player::Adam);
        }
        let one = fixtures::single_state(0);
        let sol = solve_dirfix(&one, 1).unwrap();
        assert_eq!(sol.winner, Player::Eve);
        let s = sol.strategy.unwrap();
        assert_eq!(s.play(&[0]), 0);
    }

    #[test]
    fn resource_guard_triggers() {
        let fig2 = fixtures::fig2();
        let config = ExplicitConfig {
            limits: Limits::new(1),
            mutate_zeta: false,
        };
        assert!(matches!(
            build_safety_game_with(&fig2, 2, &config),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn exhaustive_space_matches_size_formula() {
        let fig3 = fixtures::fig3();
        let all = enumerate_functions(&fig3, 2, &Limits::default()).unwrap();
        assert_eq!(all.len() as f64, function_space_size(&fig3, 2));
    }
}
