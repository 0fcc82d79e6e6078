use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wmp_core::antichain::solve_dirfix_antichain;
use wmp_core::arena::Objective;
use wmp_core::dirfix::solve_dirfix;
use wmp_core::fixtures;
use wmp_core::parity::{self, brute_force_parity, perfect_information_winner, ParityEngine, ParityGame};
use wmp_core::random::{random_arena, ArenaBounds};
use wmp_core::{Limits, Player};

pub fn random_game<R: Rng>(rng: &mut R, max_vertices: usize, max_priority: u32) -> ParityGame {
    let n = rng.gen_range(1..=max_vertices);
    let owner = (0..n).map(|_| if rng.gen_bool(0.5) { Player::Eve } else { Player::Adam }).collect();
    let priority = (0..n).map(|_| rng.gen_range(0..max_priority)).collect();
    let succ = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3.min(n));
            let mut s: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    ParityGame::new(owner, priority, succ, 0).unwrap()
}

pub fn solvers_agree_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let g = random_game(&mut rng, 12, 4);
        let z = parity::zielonka(&g);
        let s = parity::small_progress_measures(&g);
        let b = brute_force_parity(&g).unwrap();
        assert_eq!(z.winning, b);
        assert_eq!(s.winning, b);
        assert!(z.verify(&g));
        assert!(s.verify(&g));
    }
}

fn bounds() -> ArenaBounds {
    ArenaBounds {
        max_states: 3,
        max_actions: 2,
        max_weight: 2,
        max_branching: 2,
    }
}

pub fn implication_chain_on_fuzzed_arenas() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..60 {
        let arena = random_arena(&mut rng, &bounds());
        for lmax in 1..=2 {
            let d = solve_dirfix(&arena, lmax).unwrap().winner;
            let u = parity::solve_ufix(&arena, lmax).unwrap().winner;
            let f = parity::solve_fix(&arena, lmax).unwrap().winner;
            if d == Player::Eve {
                assert_eq!(u, Player::Eve, "lmax {lmax}\n{}", arena.to_wga());
            }
            if u == Player::Eve {
                assert_eq!(f, Player::Eve, "lmax {lmax}\n{}", arena.to_wga());
            }
        }
    }
}

pub fn engines_agree_on_product_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..30 {
        let arena = random_arena(&mut rng, &bounds());
        let lmax = rng.gen_range(1..=2);
        let a = parity::solve_fix_with(&arena, lmax, ParityEngine::Zielonka, &Limits::default()).unwrap();
        let b = parity::solve_fix_with(&arena, lmax, ParityEngine::ProgressMeasures, &Limits::default()).unwrap();
        assert_eq!(a.solution.winning, b.solution.winning);
        assert!(a.solution.verify(&a.product.game));
    }
}

pub fn perfect_information_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let mut seen = 0;
    while seen < 40 {
        let arena = random_arena(&mut rng, &bounds());
        if !arena.is_perfect_information() {
            continue;
        }
        seen += 1;
        for lmax in 1..=2 {
            let f = perfect_information_winner(&arena, &Objective::fix(lmax)).unwrap();
            let d = perfect_information_winner(&arena, &Objective::dirfix(lmax)).unwrap();
            assert_eq!(parity::solve_fix(&arena, lmax).unwrap().winner, f, "{}", arena.to_wga());
            assert_eq!(parity::solve_ufix(&arena, lmax).unwrap().winner, f, "{}", arena.to_wga());
            assert_eq!(solve_dirfix(&arena, lmax).unwrap().winner, d, "{}", arena.to_wga());
            assert_eq!(solve_dirfix_antichain(&arena, lmax).unwrap().winner, d);
        }
    }
}

pub fn fig7_fixed_window_verdicts() {
    for lmax in 1..=2 {
        let arena = fixtures::fig7(lmax + 2);
        assert_eq!(parity::solve_fix(&arena, lmax).unwrap().winner, Player::Eve);
        assert_eq!(solve_dirfix(&arena, lmax).unwrap().winner, Player::Adam);
        // the lower chain only violates once, so no position is violated
        // infinitely often
        assert_eq!(parity::solve_ufix(&arena, lmax).unwrap().winner, Player::Eve);
    }
}
