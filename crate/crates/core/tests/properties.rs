use std::collections::HashSet;

use num_rational::Rational64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wmp_core::antichain::{self, leq, minimal};
use wmp_core::arena::{payoff, AbstractLasso, Arena, ConcretePath, MooreStrategy, Objective};
use wmp_core::dirfix::{self, enumerate_functions, WindowFunction};
use wmp_core::oracle::{check_lasso, consistent_lassos, good_window, verify_mp_strategy, MpVerdict};
use wmp_core::parity::{self, ParityGame};
use wmp_core::random::{random_arena, random_lasso, ArenaBounds};
use wmp_core::{Limits, Player};

fn bounds(states: usize, weight: i64) -> ArenaBounds {
    ArenaBounds {
        max_states: states,
        max_actions: 2,
        max_weight: weight,
        max_branching: 2,
    }
}

fn arena_from(seed: u64, states: usize, weight: i64) -> Arena {
    random_arena(&mut ChaCha8Rng::seed_from_u64(seed), &bounds(states, weight))
}

/// A random finite concrete path of `len` transitions.
fn concrete_walk(arena: &Arena, rng: &mut ChaCha8Rng, len: usize) -> ConcretePath {
    let mut states = vec![arena.initial()];
    let mut actions = Vec::new();
    for _ in 0..len {
        let a = rng.gen_range(0..arena.num_actions());
        let succ = arena.successors(*states.last().unwrap(), a);
        states.push(succ[rng.gen_range(0..succ.len())].0);
        actions.push(a);
    }
    ConcretePath::finite(arena, states, actions).unwrap()
}

/// Open windows as `(start, running sum)` after one more weight; the flag
/// reports a window that reached `lmax` transitions without closing.
fn step_windows(open: &[(usize, i64)], t: usize, w: i64, lmax: usize) -> (Vec<(usize, i64)>, bool) {
    let mut next = Vec::new();
    let mut bad = false;
    for &(start, s) in open.iter().chain([(t, 0)].iter()) {
        let s = s + w;
        if s >= 0 {
            continue;
        }
        if t + 1 - start == lmax {
            bad = true;
        } else {
            next.push((start, s));
        }
    }
    (next, bad)
}

/// DirFix membership by unrolling the lasso: windows must close on every
/// concretization up to `horizon`, among paths that survive long enough to
/// be pumped into infinite ones.
fn naive_dirfix(arena: &Arena, lasso: &AbstractLasso, lmax: usize) -> bool {
    let n = arena.num_states();
    let horizon = lasso.prefix.len() + lasso.cycle.len() * (n + lmax + 1);
    let live_until = horizon + lasso.cycle.len() * (n + 1);
    let obs = |t: usize| lasso.observation(t);
    let act = |t: usize| lasso.action(t);
    // live[t][q]: q at time t extends to time live_until
    let mut live = vec![vec![false; n]; live_until + 1];
    for q in 0..n {
        live[live_until][q] = arena.obs_of(q) == obs(live_until);
    }
    for t in (0..live_until).rev() {
        for q in 0..n {
            live[t][q] = arena.obs_of(q) == obs(t) && arena.successors(q, act(t)).iter().any(|&(r, _)| live[t + 1][r]);
        }
    }
    if !live[0][arena.initial()] {
        return true;
    }
    let mut seen = HashSet::new();
    let mut stack = vec![(0usize, arena.initial(), Vec::<(usize, i64)>::new())];
    while let Some((t, q, open)) = stack.pop() {
        if t == horizon || !seen.insert((t, q, open.clone())) {
            continue;
        }
        for &(r, w) in arena.successors(q, act(t)) {
            if !live[t + 1][r] {
                continue;
            }
            let (next, bad) = step_windows(&open, t, w, lmax);
            if bad {
                return false;
            }
            stack.push((t + 1, r, next));
        }
    }
    true
}

fn random_game(rng: &mut ChaCha8Rng, n: usize) -> ParityGame {
    let owner = (0..n).map(|_| if rng.gen_bool(0.5) { Player::Eve } else { Player::Adam }).collect();
    let priority = (0..n).map(|_| rng.gen_range(0..5)).collect();
    let succ = (0..n)
        .map(|_| {
            let mut s: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..n)).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    ParityGame::new(owner, priority, succ, 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arenas_are_total_partitioned_and_round_trip(seed in any::<u64>()) {
        let arena = arena_from(seed, 4, 2);
        let mut covered = vec![0; arena.num_states()];
        for o in 0..arena.num_observations() {
            for &q in arena.observation(o) {
                covered[q] += 1;
            }
        }
        prop_assert!(covered.iter().all(|&c| c == 1));
        for q in 0..arena.num_states() {
            for a in 0..arena.num_actions() {
                prop_assert!(!arena.successors(q, a).is_empty());
            }
        }
        prop_assert_eq!(Arena::parse(&arena.to_wga()).unwrap(), arena);
    }

    #[test]
    fn payoff_is_additive(seed in any::<u64>(), len in 1usize..12, cut in 0usize..12) {
        let arena = arena_from(seed, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let path = concrete_walk(&arena, &mut rng, len);
        let m = cut.min(len);
        let suffix = ConcretePath::finite(&arena, path.states[m..].to_vec(), path.actions[m..].to_vec()).unwrap();
        prop_assert_eq!(
            payoff(&arena, &path, m).unwrap() + payoff(&arena, &suffix, len - m).unwrap(),
            payoff(&arena, &path, len).unwrap()
        );
    }

    #[test]
    fn rescaling_moves_the_threshold(seed in any::<u64>(), a in -3i64..=3, b in 1i64..=3, lmax in 1usize..=3) {
        let arena = arena_from(seed, 4, 2);
        let scaled = arena.rescale(a, b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let path = concrete_walk(&arena, &mut rng, 8);
        let nu = Rational64::new(a, b);
        for i in 0..=8 - lmax {
            let direct = (1..=lmax).any(|j| {
                let sum: i64 = (i..i + j).map(|k| path.weight_at(&arena, k).unwrap()).sum();
                Rational64::from_integer(sum) >= nu * j as i64
            });
            prop_assert_eq!(good_window(&scaled, &path, i, lmax).unwrap().is_good(), direct);
        }
    }

    #[test]
    fn rescaling_by_identity_keeps_winners(seed in any::<u64>(), lmax in 1usize..=3) {
        let arena = arena_from(seed, 4, 2);
        let same = arena.rescale(0, 1).unwrap();
        prop_assert_eq!(dirfix::solve_dirfix(&arena, lmax).unwrap().winner, dirfix::solve_dirfix(&same, lmax).unwrap().winner);
    }

    #[test]
    fn good_windows_are_monotone_in_lmax(seed in any::<u64>(), lmax in 1usize..=4) {
        let arena = arena_from(seed, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let path = concrete_walk(&arena, &mut rng, 10);
        for i in 0..=10 - (lmax + 1) {
            if good_window(&arena, &path, i, lmax).unwrap().is_good() {
                prop_assert!(good_window(&arena, &path, i, lmax + 1).unwrap().is_good());
            }
        }
    }

    #[test]
    fn lasso_memberships_form_a_chain(seed in any::<u64>(), lmax in 1usize..=3) {
        let arena = arena_from(seed, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        if let Some(lasso) = random_lasso(&mut rng, &arena, 3, 3) {
            let d = check_lasso(&arena, &lasso, &Objective::dirfix(lmax)).unwrap().member;
            let u = check_lasso(&arena, &lasso, &Objective::ufix(lmax)).unwrap().member;
            let f = check_lasso(&arena, &lasso, &Objective::fix(lmax)).unwrap().member;
            prop_assert!(!d || u);
            prop_assert!(!u || f);
        }
    }

    #[test]
    fn dirfix_membership_matches_unrolling(seed in any::<u64>(), lmax in 1usize..=2) {
        let arena = arena_from(seed, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        if let Some(lasso) = random_lasso(&mut rng, &arena, 2, 2) {
            let member = check_lasso(&arena, &lasso, &Objective::dirfix(lmax)).unwrap().member;
            prop_assert_eq!(member, naive_dirfix(&arena, &lasso, lmax), "{}\n{}", arena.to_wga(), arena.format_lasso(&lasso));
        }
    }

    #[test]
    fn certified_strategies_satisfy_dirfix(seed in any::<u64>()) {
        let arena = arena_from(seed, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
        let word: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..arena.num_actions())).collect();
        let strategy = MooreStrategy::cyclic_word(&arena, &word).unwrap();
        if let MpVerdict::Certified { mu, .. } = verify_mp_strategy(&arena, &strategy, Rational64::new(1, 2)).unwrap() {
            let obj = Objective::dirfix(mu as usize);
            for lasso in consistent_lassos(&arena, &strategy, 4) {
                prop_assert!(check_lasso(&arena, &lasso, &obj).unwrap().member);
            }
        }
    }

    #[test]
    fn order_is_a_preorder_and_minimal_is_an_antichain(seed in any::<u64>()) {
        let arena = arena_from(seed, 2, 1);
        let all = enumerate_functions(&arena, 2, &Limits::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let pick: Vec<WindowFunction> = (0..8).map(|_| all[rng.gen_range(0..all.len())].clone()).collect();
        for f in &pick {
            prop_assert!(leq(f, f));
            for g in &pick {
                for h in &pick {
                    if leq(f, g) && leq(g, h) {
                        prop_assert!(leq(f, h));
                    }
                }
            }
        }
        let m = minimal(pick.clone());
        for x in m.elements() {
            for y in m.elements() {
                prop_assert!(x == y || !leq(x, y));
            }
        }
        for f in &pick {
            prop_assert!(m.dominates(f));
        }
    }

    #[test]
    fn antichain_fixpoint_is_the_least_fixpoint(seed in any::<u64>(), lmax in 1usize..=2) {
        let arena = arena_from(seed, 3, 1);
        let all = enumerate_functions(&arena, lmax, &Limits::default()).unwrap();
        let mut x: HashSet<WindowFunction> = all.iter().filter(|f| f.is_unsafe()).cloned().collect();
        loop {
            let mut next = x.clone();
            next.extend(antichain::upre_explicit(&arena, &all, &x));
            if next.len() == x.len() {
                break;
            }
            x = next;
        }
        let sol = antichain::solve_dirfix_antichain(&arena, lmax).unwrap();
        let closure: HashSet<WindowFunction> = sol.fixpoint.up_closure(&all).into_iter().collect();
        prop_assert_eq!(closure, x);
    }

    #[test]
    fn parity_engines_agree_and_regions_partition(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let game = random_game(&mut rng, n);
        let z = parity::zielonka(&game);
        let s = parity::small_progress_measures(&game);
        prop_assert_eq!(&z.winning, &s.winning);
        prop_assert_eq!(z.winner, z.winning[game.initial()]);
        prop_assert!(z.verify(&game));
    }
}
