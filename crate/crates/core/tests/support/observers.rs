use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wmp_core::arena::Objective;
use wmp_core::observers::{self, determinize};
use wmp_core::oracle::{check_lasso, ufix_by_merging, violation_positions, TimeGraph};
use wmp_core::random::{random_arena, random_lasso, ArenaBounds};

pub fn fix_observer_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    for _ in 0..60 {
        let arena = random_arena(&mut rng, &ArenaBounds::default());
        let lmax = rng.gen_range(1..=3);
        let nba = observers::build_fix_nba(&arena, lmax).unwrap();
        for _ in 0..10 {
            let Some(lasso) = random_lasso(&mut rng, &arena, 2, 4) else { continue };
            let word = observers::lasso_word(&arena, &lasso).unwrap();
            let member = check_lasso(&arena, &lasso, &Objective::fix(lmax)).unwrap().member;
            assert_eq!(nba.accepts(&word).unwrap(), !member, "lmax {lmax} {}\n{}", arena.format_lasso(&lasso), arena.to_wga());
            checked += 1;
        }
    }
    assert!(checked >= 500);
}

pub fn ufix_observer_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut checked = 0;
    for _ in 0..60 {
        let arena = random_arena(&mut rng, &ArenaBounds::default());
        let lmax = rng.gen_range(1..=3);
        let nba = observers::build_ufix_nba(&arena, lmax).unwrap();
        for _ in 0..10 {
            let Some(lasso) = random_lasso(&mut rng, &arena, 2, 4) else { continue };
            let word = observers::lasso_belief_word(&arena, &lasso).unwrap();
            let member = check_lasso(&arena, &lasso, &Objective::ufix(lmax)).unwrap().member;
            assert_eq!(nba.accepts(&word).unwrap(), !member, "lmax {lmax} {}\n{}", arena.format_lasso(&lasso), arena.to_wga());
            checked += 1;
        }
    }
    assert!(checked >= 500);
}

pub fn merging_matches_bounded_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..60 {
        let arena = random_arena(&mut rng, &ArenaBounds::default());
        let lmax = rng.gen_range(1..=2);
        for _ in 0..5 {
            let Some(lasso) = random_lasso(&mut rng, &arena, 2, 3) else { continue };
            let by_merging = ufix_by_merging(&arena, &lasso, lmax).unwrap();
            let member = check_lasso(&arena, &lasso, &Objective::ufix(lmax)).unwrap().member;
            assert_eq!(by_merging, member);
            // quantifier form: only finitely many positions may be violated
            let g = TimeGraph::new(&arena, &lasso).unwrap();
            let positions = violation_positions(&arena, &lasso, lmax, 2 * g.len()).unwrap();
            let infinitely_many = positions.iter().any(|&p| p >= g.len());
            assert_eq!(by_merging, !infinitely_many, "{}\n{}", arena.format_lasso(&lasso), arena.to_wga());
        }
    }
}

pub fn determinization_preserves_and_complement_flips() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let bounds = ArenaBounds {
        max_states: 3,
        ..ArenaBounds::default()
    };
    for _ in 0..30 {
        let arena = random_arena(&mut rng, &bounds);
        let lmax = rng.gen_range(1..=2);
        let fix = observers::build_fix_nba(&arena, lmax).unwrap();
        let mut det = determinize(&fix).unwrap();
        assert!(det.max_priority() <= 2 * fix.num_states() as u32 + 2);
        let mut co = det.complement();
        let ufix = observers::build_ufix_nba(&arena, lmax).unwrap();
        let mut udet = wmp_core::observers::ParityObserver::lazy(&ufix, &Default::default());
        let mut uco = udet.complement();
        for _ in 0..10 {
            let Some(lasso) = random_lasso(&mut rng, &arena, 2, 6) else { continue };
            let w = observers::lasso_word(&arena, &lasso).unwrap();
            let expected = fix.accepts(&w).unwrap();
            assert_eq!(det.accepts(&w).unwrap(), expected, "{}\n{}", arena.format_lasso(&lasso), arena.to_wga());
            assert_eq!(co.accepts(&w).unwrap(), !expected);
            let bw = observers::lasso_belief_word(&arena, &lasso).unwrap();
            let expected = ufix.accepts(&bw).unwrap();
            assert_eq!(udet.accepts(&bw).unwrap(), expected, "{}\n{}", arena.format_lasso(&lasso), arena.to_wga());
            assert_eq!(uco.accepts(&bw).unwrap(), !expected);
        }
    }
}
