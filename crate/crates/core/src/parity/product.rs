//! Synchronized product of an arena with a deterministic parity observer.

use std::fmt::Debug;
use std::hash::Hash;

use indexmap::IndexSet;

use super::{solve_parity, ParityEngine, ParityGame, ParitySolution};
use crate::arena::{Arena, StateSet};
use crate::observers::{build_fix_nba_with, build_ufix_nba_with, BeliefLetter, Letter, ParityObserver};
use crate::{Limits, Player, Result};

/// Letters the product can feed to an observer after Eve plays `action`,
/// Adam reveals `obs` and the belief becomes `belief`.
pub trait ProductLetter: Clone + Eq + Hash + Debug {
    fn make(action: usize, obs: usize, belief: &StateSet) -> Self;
}

impl ProductLetter for Letter {
    fn make(action: usize, obs: usize, _: &StateSet) -> Self {
        Letter { action, obs }
    }
}

impl ProductLetter for BeliefLetter {
    fn make(action: usize, obs: usize, belief: &StateSet) -> Self {
        BeliefLetter {
            action,
            obs,
            belief: belief.clone(),
        }
    }
}

/// A product vertex: Eve's belief and the observer state, plus the chosen
/// action at Adam's vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductVertex {
    pub belief: StateSet,
    pub observer: usize,
    pub action: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ProductGame {
    pub game: ParityGame,
    pub vertices: Vec<ProductVertex>,
}

impl ProductGame {
    pub fn to_dot(&self, arena: &Arena) -> String {
        self.game.to_dot_with(|v| {
            let pv = &self.vertices[v];
            let names: Vec<&str> = pv.belief.iter().map(|q| arena.state_name(q)).collect();
            match pv.action {
                Some(a) => format!("{{{}}}, d{}, {}", names.join(","), pv.observer, arena.action_name(a)),
                None => format!("{{{}}}, d{}", names.join(","), pv.observer),
            }
        })
    }
}

/// Eve vertices `(s, d)` choose `σ`; Adam vertices `(s, d, σ)` choose an
/// observation `o` meeting `post_σ(s)` and move to `(post_σ(s) ∩ o, δ(d, ℓ))`.
/// Eve vertices carry the observer priority, Adam vertices priority 0.
pub fn product_game<L: ProductLetter>(arena: &Arena, observer: &mut ParityObserver<L>, limits: &Limits) -> Result<ProductGame> {
    let mut vs: IndexSet<ProductVertex> = IndexSet::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    vs.insert(ProductVertex {
        belief: StateSet::singleton(arena.num_states(), arena.initial()),
        observer: observer.initial(),
        action: None,
    });
    let mut i = 0;
    while i < vs.len() {
        let v = vs[i].clone();
        let mut out = Vec::new();
        match v.action {
            None => {
                for a in 0..arena.num_actions() {
                    out.push(
                        vs.insert_full(ProductVertex {
                            action: Some(a),
                            ..v.clone()
                        })
                        .0,
                    );
                }
            }
            Some(a) => {
                let post = arena.post(&v.belief, a);
                for o in 0..arena.num_observations() {
                    let next = post.intersection(&arena.observation_set(o));
                    if next.is_empty() {
                        continue;
                    }
                    let letter = observer.letter_index(&L::make(a, o, &next))?;
                    let d = observer.step(v.observer, letter)?;
                    out.push(
                        vs.insert_full(ProductVertex {
                            belief: next,
                            observer: d,
                            action: None,
                        })
                        .0,
                    );
                }
            }
        }
        limits.check("product game vertices", vs.len())?;
        succ.push(out);
        i += 1;
    }
    let vertices: Vec<ProductVertex> = vs.into_iter().collect();
    let owner = vertices.iter().map(|v| if v.action.is_none() { Player::Eve } else { Player::Adam }).collect();
    let priority = vertices
        .iter()
        .map(|v| if v.action.is_none() { observer.priority(v.observer) } else { 0 })
        .collect();
    Ok(ProductGame {
        game: ParityGame::new(owner, priority, succ, 0)?,
        vertices,
    })
}

/// Outcome of an observer pipeline, with the sizes of each stage.
#[derive(Clone, Debug)]
pub struct PipelineSolution {
    pub winner: Player,
    pub nba_states: usize,
    pub parity_states: usize,
    pub product: ProductGame,
    pub solution: ParitySolution,
}

fn run<L: ProductLetter>(arena: &Arena, det: ParityObserver<L>, nba_states: usize, engine: ParityEngine, limits: &Limits) -> Result<PipelineSolution> {
    let mut observer = det.complement();
    let product = product_game(arena, &mut observer, limits)?;
    let solution = solve_parity(&product.game, engine);
    Ok(PipelineSolution {
        winner: solution.winner,
        nba_states,
        parity_states: observer.num_states(),
        product,
        solution,
    })
}

/// Winner of `Fix(lmax)`: the ¬Fix observer is determinized, complemented
/// and composed with the arena.
pub fn solve_fix(arena: &Arena, lmax: usize) -> Result<PipelineSolution> {
    solve_fix_with(arena, lmax, ParityEngine::default(), &Limits::default())
}

pub fn solve_fix_with(arena: &Arena, lmax: usize, engine: ParityEngine, limits: &Limits) -> Result<PipelineSolution> {
    let nba = build_fix_nba_with(arena, lmax, limits)?;
    let det = ParityObserver::lazy(&nba, limits);
    run(arena, det, nba.num_states(), engine, limits)
}

/// Winner of `UFix(lmax)`, through the belief-annotated ¬UFix observer.
pub fn solve_ufix(arena: &Arena, lmax: usize) -> Result<PipelineSolution> {
    solve_ufix_with(arena, lmax, ParityEngine::default(), &Limits::default())
}

pub fn solve_ufix_with(arena: &Arena, lmax: usize, engine: ParityEngine, limits: &Limits) -> Result<PipelineSolution> {
    let nba = build_ufix_nba_with(arena, lmax, limits)?;
    let det = ParityObserver::lazy(&nba, limits);
    run(arena, det, nba.num_states(), engine, limits)
}
