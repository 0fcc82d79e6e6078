use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wmp_core::arena::{AbstractLasso, MooreStrategy, Objective};
use wmp_core::dirfix::solve_dirfix;
use wmp_core::oracle::{check_lasso, consistent_lassos, strategy_dirfix_violation, strategy_product, verify_mp_strategy, MpVerdict};
use wmp_core::parity;
use wmp_core::random::{random_safety_spec, ArenaBounds};
use wmp_core::reductions::*;

fn safety_bounds() -> ArenaBounds {
    ArenaBounds {
        max_states: 4,
        max_actions: 2,
        max_weight: 0,
        max_branching: 2,
    }
}

pub fn safety_reduction_preserves_the_winner() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut verdicts = [0usize; 2];
    for _ in 0..50 {
        let spec = random_safety_spec(&mut rng, &safety_bounds());
        let expected = solve_safety_spec(&spec);
        verdicts[expected.index()] += 1;
        let arena = safety_to_dirfix(&spec).unwrap();
        for lmax in 1..=3 {
            assert_eq!(solve_dirfix(&arena, lmax).unwrap().winner, expected, "lmax {lmax}\n{}", arena.to_wga());
        }
        for lmax in 1..=2 {
            assert_eq!(parity::solve_ufix(&arena, lmax).unwrap().winner, expected);
            assert_eq!(parity::solve_fix(&arena, lmax).unwrap().winner, expected);
        }
    }
    assert!(verdicts[0] > 0 && verdicts[1] > 0, "{verdicts:?}");
}

/// `ab` has a single accepting run, of cost 0; the other `a` move is a
/// dead end.
pub fn non_universal() -> (WeightedAutomaton, Vec<usize>) {
    let n = WeightedAutomaton::new(
        &["s", "t", "u", "f"],
        "s",
        &["a", "b"],
        &["f"],
        &[("s", "a", 0, "t"), ("s", "a", -2, "u"), ("t", "b", 0, "f"), ("f", "a", 1, "t")],
    )
    .unwrap();
    (n, vec![0, 1])
}

fn universal() -> WeightedAutomaton {
    WeightedAutomaton::new(&["s", "t"], "s", &["a"], &["t"], &[("s", "a", -1, "t"), ("t", "a", -1, "t")]).unwrap()
}

pub fn non_universal_demo_certifies_a_window_bound() {
    let (n, w1) = non_universal();
    assert_eq!(n.cost(&w1), Some(0));
    let arena = simulation_gadget(&n).unwrap();
    assert_eq!(arena.weight_scale(), GADGET_SCALE);
    let strategy = separator_strategy(&arena, &n, &w1).unwrap();
    let b = w1.len() as i64 + 1;
    let epsilon = Rational64::new(GADGET_SCALE / 2, b);
    let (mu, mean) = match verify_mp_strategy(&arena, &strategy, epsilon).unwrap() {
        MpVerdict::Certified { mu, min_cycle_mean } => (mu, min_cycle_mean),
        other => panic!("not certified: {other:?}"),
    };
    assert!(mean >= epsilon);
    // ceil(W (|M||Q|)^2 / eps), computed by hand for this product
    let size = strategy.memory_size() as i64 * arena.num_states() as i64;
    let expected = (Rational64::from_integer(arena.max_abs_weight() * size * size) / epsilon).ceil().to_integer();
    assert_eq!(mu as i64, expected);
    let graph = strategy_product(&arena, &strategy);
    assert!(strategy_dirfix_violation(&graph, mu as usize).is_none());
    let lassos = consistent_lassos(&arena, &strategy, size as usize);
    assert!(!lassos.is_empty());
    let obj = Objective::dirfix(mu as usize);
    for lasso in &lassos {
        assert!(check_lasso(&arena, lasso, &obj).unwrap().member, "{}", arena.format_lasso(lasso));
    }
}

pub fn universal_demo_defeats_blind_strategies() {
    let n = universal();
    assert_eq!(is_universal_bounded(&n, 6), Universality::UpTo(6));
    let arena = universality_gadget(&n).unwrap();
    let a = arena.action_index("a").unwrap();
    let sep = arena.action_index(SEPARATOR).unwrap();
    // no separator at all: the first gadget keeps a window open forever
    let no_sep = AbstractLasso::new(vec![], vec![(0, a)]);
    let late = AbstractLasso::new(vec![(0, sep)], vec![(0, a)]);
    for lasso in [no_sep, late] {
        for lmax in 1..=4 {
            assert!(!check_lasso(&arena, &lasso, &Objective::fix(lmax)).unwrap().member);
        }
    }
    // with separators, the simulated runs all have negative cost
    for k in 1..=3 {
        let mut word = vec![sep];
        word.extend(std::iter::repeat_n(a, k));
        let strategy = MooreStrategy::cyclic_word(&arena, &word).unwrap();
        let verdict = verify_mp_strategy(&arena, &strategy, Rational64::new(1, 100)).unwrap();
        assert!(matches!(verdict, MpVerdict::Refuted { .. }));
        let lasso = AbstractLasso::new(vec![], word.iter().map(|&x| (0, x)).collect());
        let lmax = 4 * (k + 1);
        assert!(!check_lasso(&arena, &lasso, &Objective::fix(lmax)).unwrap().member);
    }
}

pub fn gadget_is_blind_and_total() {
    for n in [universal(), non_universal().0] {
        let g = universality_gadget(&n).unwrap();
        assert_eq!(g.num_observations(), 1);
        for q in 0..g.num_states() {
            for a in 0..g.num_actions() {
                assert!(!g.successors(q, a).is_empty());
            }
        }
    }
}
