//! Exhaustive checks of the structural facts behind the DirFix engines, on
//! arenas with at most three states and window bounds 1 and 2.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wmp_core::antichain::{self, leq, minimal, Antichain};
use wmp_core::arena::{AbstractPrefix, Arena, StateSet};
use wmp_core::dirfix::{self, enumerate_functions, initial_function, supp_inverse, WindowFunction};
use wmp_core::fixtures;
use wmp_core::random::{random_arena, ArenaBounds};
use wmp_core::Limits;

fn arenas(seed: u64, count: usize, max_weight: i64) -> Vec<Arena> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = ArenaBounds {
        max_states: 3,
        max_actions: 2,
        max_weight,
        max_branching: 2,
    };
    let mut out = vec![fixtures::fig2(), fixtures::fig3()];
    out.extend((0..count).map(|_| random_arena(&mut rng, &bounds)));
    out
}

/// Every legal abstract prefix with at most `max_len` actions.
fn prefixes(arena: &Arena, max_len: usize) -> Vec<AbstractPrefix> {
    let mut out = Vec::new();
    let start = StateSet::singleton(arena.num_states(), arena.initial());
    let mut stack = vec![(vec![arena.initial_observation()], Vec::new(), start)];
    while let Some((obs, acts, belief)) = stack.pop() {
        out.push(AbstractPrefix::new(obs.clone(), acts.clone()).unwrap());
        if acts.len() == max_len {
            continue;
        }
        for a in 0..arena.num_actions() {
            let post = arena.post(&belief, a);
            for o in 0..arena.num_observations() {
                let next = post.intersection(&arena.observation_set(o));
                if !next.is_empty() {
                    let mut obs2 = obs.clone();
                    obs2.push(o);
                    let mut acts2 = acts.clone();
                    acts2.push(a);
                    stack.push((obs2, acts2, next));
                }
            }
        }
    }
    out
}

/// Is the window of length `l` ending after the `n`-th transition still
/// open (every partial sum from its start negative)?
fn open_window(weights: &[i64], n: usize, l: usize) -> bool {
    let mut sum = 0;
    for &w in &weights[n - l..n] {
        sum += w;
        if sum >= 0 {
            return false;
        }
    }
    true
}

pub fn support_is_the_set_of_reachable_endpoints() {
    for arena in arenas(41, 30, 2) {
        for lmax in 1..=2 {
            for prefix in prefixes(&arena, 4) {
                let seq = supp_inverse(&arena, &prefix, &initial_function(&arena, lmax)).unwrap();
                let ends: StateSet = StateSet::from_states(
                    arena.num_states(),
                    arena.concretizations(&prefix).iter().map(|p| *p.states.last().unwrap()),
                );
                assert_eq!(seq.last().unwrap().support(), ends, "{}", arena.to_wga());
            }
        }
    }
}

pub fn negative_entries_are_open_windows() {
    for arena in arenas(42, 30, 2) {
        for lmax in 1..=2 {
            for prefix in prefixes(&arena, 4) {
                let n = prefix.actions.len();
                let f = supp_inverse(&arena, &prefix, &initial_function(&arena, lmax)).unwrap().pop().unwrap();
                let paths = arena.concretizations(&prefix);
                for p in f.support_states() {
                    let ending: Vec<Vec<i64>> = paths
                        .iter()
                        .filter(|c| *c.states.last().unwrap() == p)
                        .map(|c| (0..n).map(|i| c.weight_at(&arena, i).unwrap()).collect())
                        .collect();
                    for l in 1..=lmax {
                        let v = f.value(p, l).unwrap();
                        if l > n {
                            assert_eq!(v, 0);
                        } else {
                            let open = ending.iter().any(|w| open_window(w, n, l));
                            assert_eq!(v < 0, open, "p {p} l {l} prefix {prefix:?}\n{}", arena.to_wga());
                        }
                    }
                }
            }
        }
    }
}

pub fn reachable_functions_respect_the_size_bound() {
    for arena in arenas(43, 30, 2) {
        for lmax in 1..=2 {
            let game = dirfix::build_safety_game(&arena, lmax).unwrap();
            let space = dirfix::function_space_size(&arena, lmax);
            assert!(game.num_vertices() as f64 <= space);
            // (1 + x^l)^|Q| <= 2^{|Q| (l log x + 1)} with x = W*lmax + 1
            let x = (arena.max_abs_weight() * lmax as i64 + 1) as f64;
            let bound = 2f64.powf(arena.num_states() as f64 * (lmax as f64 * x.log2() + 1.0));
            assert!(space <= bound + 1e-9);
        }
    }
}

fn universe(arena: &Arena, lmax: usize) -> Vec<WindowFunction> {
    enumerate_functions(arena, lmax, &Limits::default()).unwrap()
}

fn is_upward_closed(set: &HashSet<WindowFunction>, universe: &[WindowFunction]) -> bool {
    set.iter().all(|f| universe.iter().filter(|g| leq(f, g)).all(|g| set.contains(g)))
}

pub fn unsafe_set_is_upward_closed() {
    for arena in arenas(44, 12, 1) {
        for lmax in 1..=2 {
            let all = universe(&arena, lmax);
            let bad: HashSet<WindowFunction> = all.iter().filter(|f| f.is_unsafe()).cloned().collect();
            assert!(is_upward_closed(&bad, &all));
            assert_eq!(bad, antichain::minimal_unsafe(&arena, lmax).up_closure(&all).into_iter().collect());
        }
    }
}

fn random_antichain<R: Rng>(rng: &mut R, all: &[WindowFunction], k: usize) -> Antichain {
    minimal((0..k).map(|_| all[rng.gen_range(0..all.len())].clone()))
}

pub fn union_of_upward_closed_sets_is_upward_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for arena in arenas(45, 8, 1) {
        let all = universe(&arena, 2);
        for _ in 0..5 {
            let a = random_antichain(&mut rng, &all, 3);
            let b = random_antichain(&mut rng, &all, 3);
            let mut union: HashSet<WindowFunction> = a.up_closure(&all).into_iter().collect();
            union.extend(b.up_closure(&all));
            assert!(is_upward_closed(&union, &all));
            let joined: HashSet<WindowFunction> = antichain::join(&a, &b).up_closure(&all).into_iter().collect();
            assert_eq!(union, joined);
        }
    }
}

pub fn upre_of_unsafe_is_not_upward_closed() {
    let arena = fixtures::fig3();
    let all = universe(&arena, 2);
    let bad: HashSet<WindowFunction> = all.iter().filter(|f| f.is_unsafe()).cloned().collect();
    let pre: HashSet<WindowFunction> = antichain::upre_explicit(&arena, &all, &bad).into_iter().collect();
    let witness = pre.iter().any(|f| all.iter().any(|g| leq(f, g) && !pre.contains(g)));
    assert!(witness);
}

/// Upward-closed sets containing the unsafe set, from a few random seeds.
fn closed_supersets<R: Rng>(rng: &mut R, arena: &Arena, lmax: usize, all: &[WindowFunction]) -> Vec<(Antichain, HashSet<WindowFunction>)> {
    let base = antichain::minimal_unsafe(arena, lmax);
    (0..4)
        .map(|k| {
            let extra = random_antichain(rng, all, k);
            let a = antichain::join(&base, &extra);
            let set = a.up_closure(all).into_iter().collect();
            (a, set)
        })
        .collect()
}

pub fn upre_is_upward_closed_outside_unsafe() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    for arena in arenas(46, 10, 1) {
        for lmax in 1..=2 {
            let all = universe(&arena, lmax);
            let mut sets = closed_supersets(&mut rng, &arena, lmax, &all);
            // an upward-closed set not containing the unsafe set
            let a = random_antichain(&mut rng, &all, 2);
            let s = a.up_closure(&all).into_iter().collect();
            sets.push((a, s));
            for (_, s) in sets {
                let pre: HashSet<WindowFunction> = antichain::upre_explicit(&arena, &all, &s).into_iter().collect();
                for f in pre.iter().filter(|f| !f.is_unsafe()) {
                    for g in all.iter().filter(|g| !g.is_unsafe() && leq(f, g)) {
                        assert!(pre.contains(g), "{}", arena.to_wga());
                    }
                }
            }
        }
    }
}

pub fn symbolic_upre_is_the_minimal_part_of_upre_minus_unsafe() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for arena in arenas(47, 10, 1) {
        for lmax in 1..=2 {
            let all = universe(&arena, lmax);
            for (a, s) in closed_supersets(&mut rng, &arena, lmax, &all) {
                let pre = antichain::upre_explicit(&arena, &all, &s);
                let expected = minimal(pre.into_iter().filter(|f| !f.is_unsafe()));
                let got = antichain::ac_upre(&arena, lmax, &a).unwrap();
                assert!(antichain::equivalent(&got, &expected), "{}\n{got:?}\n{expected:?}", arena.to_wga());
            }
        }
    }
}
