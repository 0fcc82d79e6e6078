//! Seeded generators for differential testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::arena::{AbstractLasso, Arena, StateSet};
use crate::reductions::SafetySpec;

/// Size bounds for [`random_arena`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArenaBounds {
    pub max_states: usize,
    pub max_actions: usize,
    pub max_weight: i64,
    /// Largest number of successors per `(state, action)`.
    pub max_branching: usize,
}

impl Default for ArenaBounds {
    fn default() -> Self {
        ArenaBounds {
            max_states: 4,
            max_actions: 2,
            max_weight: 2,
            max_branching: 2,
        }
    }
}

pub fn state_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i}")).collect()
}

pub fn action_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

/// A random total arena within `bounds`. Roughly one arena in five is blind,
/// one in five has perfect information.
pub fn random_arena<R: Rng + ?Sized>(rng: &mut R, bounds: &ArenaBounds) -> Arena {
    let n = rng.gen_range(1..=bounds.max_states.max(1));
    let m = rng.gen_range(1..=bounds.max_actions.max(1));
    let states = state_names(n);
    let actions = action_names(m);

    let style = rng.gen_range(0..5);
    let blocks: Vec<Vec<String>> = if style == 0 || n == 1 {
        vec![states.clone()]
    } else if style == 1 {
        states.iter().map(|q| vec![q.clone()]).collect()
    } else {
        let k = rng.gen_range(1..n);
        let mut rest: Vec<Vec<String>> = vec![Vec::new(); k];
        for q in &states[1..] {
            rest[rng.gen_range(0..k)].push(q.clone());
        }
        let mut blocks = vec![vec![states[0].clone()]];
        blocks.extend(rest.into_iter().filter(|b| !b.is_empty()));
        blocks
    };

    let mut trans = Vec::new();
    for p in &states {
        for a in &actions {
            let k = rng.gen_range(1..=bounds.max_branching.clamp(1, n));
            let mut targets = states.clone();
            targets.shuffle(rng);
            for q in targets.into_iter().take(k) {
                let w = rng.gen_range(-bounds.max_weight..=bounds.max_weight);
                trans.push((p.clone(), a.clone(), w, q));
            }
        }
    }
    Arena::from_parts(states.clone(), states[0].clone(), actions, blocks, trans)
        .expect("generator builds valid arenas")
}

/// A random safety game: a random arena in which each non-initial state is
/// unsafe with probability 1/3 and unsafe states loop on every action.
pub fn random_safety_spec<R: Rng + ?Sized>(rng: &mut R, bounds: &ArenaBounds) -> SafetySpec {
    let base = random_arena(rng, bounds);
    let n = base.num_states();
    let bad: Vec<usize> = (1..n).filter(|_| rng.gen_bool(1.0 / 3.0)).collect();
    let states = state_names(n);
    let actions = action_names(base.num_actions());
    let blocks = (0..base.num_observations())
        .map(|o| base.observation(o).iter().map(|&q| states[q].clone()).collect())
        .collect();
    let mut trans = Vec::new();
    for t in base.transitions() {
        if !bad.contains(&t.source) {
            trans.push((states[t.source].clone(), actions[t.action].clone(), t.weight, states[t.target].clone()));
        }
    }
    for &u in &bad {
        for a in &actions {
            trans.push((states[u].clone(), a.clone(), 0, states[u].clone()));
        }
    }
    let arena = Arena::from_parts(states.clone(), states[0].clone(), actions, blocks, trans).expect("generator builds valid arenas");
    SafetySpec::new(arena, StateSet::from_states(n, bad)).expect("unsafe states are trapping")
}

/// Random legal lasso with `|prefix| <= max_prefix` and
/// `1 <= |cycle| <= max_cycle`, or `None` if no legal one was found after a
/// bounded number of attempts.
pub fn random_lasso<R: Rng + ?Sized>(
    rng: &mut R,
    arena: &Arena,
    max_prefix: usize,
    max_cycle: usize,
) -> Option<AbstractLasso> {
    for _ in 0..200 {
        let p = rng.gen_range(0..=max_prefix);
        let c = rng.gen_range(1..=max_cycle.max(1));
        let letters = random_walk(rng, arena, p + c);
        let lasso = AbstractLasso::new(letters[..p].to_vec(), letters[p..].to_vec());
        if arena.check_lasso(&lasso).is_ok() {
            return Some(lasso);
        }
    }
    None
}

/// A random abstract path of `len` letters following the belief dynamics.
pub fn random_walk<R: Rng + ?Sized>(rng: &mut R, arena: &Arena, len: usize) -> Vec<(usize, usize)> {
    let mut belief = StateSet::singleton(arena.num_states(), arena.initial());
    let mut obs = arena.initial_observation();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let a = rng.gen_range(0..arena.num_actions());
        out.push((obs, a));
        let post = arena.post(&belief, a);
        let options: Vec<usize> = (0..arena.num_observations())
            .filter(|&o| !post.is_disjoint(&arena.observation_set(o)))
            .collect();
        obs = *options.choose(rng).expect("post of a nonempty belief is nonempty");
        belief = post.intersection(&arena.observation_set(obs));
    }
    out
}

/// Every legal lasso with `|prefix| + |cycle| <= max_len`.
pub fn all_lassos(arena: &Arena, max_len: usize) -> Vec<AbstractLasso> {
    let mut words: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut stack = vec![(
        Vec::new(),
        StateSet::singleton(arena.num_states(), arena.initial()),
        arena.initial_observation(),
    )];
    while let Some((word, belief, obs)) = stack.pop() {
        if !word.is_empty() {
            words.push(word.clone());
        }
        if word.len() == max_len {
            continue;
        }
        for a in 0..arena.num_actions() {
            let post = arena.post(&belief, a);
            for o in 0..arena.num_observations() {
                let next = post.intersection(&arena.observation_set(o));
                if !next.is_empty() {
                    let mut w = word.clone();
                    w.push((obs, a));
                    stack.push((w, next, o));
                }
            }
        }
    }
    let mut out = Vec::new();
    for w in words {
        for p in 0..w.len() {
            let lasso = AbstractLasso::new(w[..p].to_vec(), w[p..].to_vec());
            if arena.check_lasso(&lasso).is_ok() {
                out.push(lasso);
            }
        }
    }
    out.sort_by(|x, y| (x.period_end(), &x.prefix, &x.cycle).cmp(&(y.period_end(), &y.prefix, &y.cycle)));
    out.dedup();
    out
}
