//! Small hand-made arenas used throughout the tests and examples.

use crate::arena::Arena;

/// Blind two-state arena: a 0-loop on `q0`, a `-1` edge to `q1` and a
/// 0-loop on `q1`.
pub const FIG2_WGA: &str = "\
# blind: Fix holds on the only play, UFix does not
states: q0 q1
init: q0
alphabet: a
obs: {q0 q1}
trans: q0 a 0 q0
trans: q0 a -1 q1
trans: q1 a 0 q1
";

/// Perfect-information arena with a `-1`/`+1` cycle and a 0-loop on `q1`.
pub const FIG3_WGA: &str = "\
# perfect information: positive mean payoff, no window objective
states: q0 q1
init: q0
alphabet: a
obs: {q0} {q1}
trans: q0 a -1 q1
trans: q1 a 1 q0
trans: q1 a 0 q1
";

pub fn fig2() -> Arena {
    Arena::parse(FIG2_WGA).expect("fixture parses")
}

pub fn fig3() -> Arena {
    Arena::parse(FIG3_WGA).expect("fixture parses")
}

/// Two chains of length `n` leaving `q0` and observed in lockstep: the
/// upper chain (weight 0) returns to `q0`, the lower one starts with `-1`
/// and ends in a 0-loop. Observation `o_i` is `{q_i, q_i'}`.
pub fn fig7_wga(n: usize) -> String {
    assert!(n >= 1, "chain length must be positive");
    let upper = |i: usize| format!("u{i}");
    let lower = |i: usize| format!("v{i}");
    let mut states = vec!["q0".to_string()];
    let mut obs = vec!["{q0}".to_string()];
    let mut trans = vec![
        format!("trans: q0 a 0 {}", upper(1)),
        format!("trans: q0 a -1 {}", lower(1)),
    ];
    for i in 1..=n {
        states.push(upper(i));
        states.push(lower(i));
        obs.push(format!("{{{} {}}}", upper(i), lower(i)));
        if i < n {
            trans.push(format!("trans: {} a 0 {}", upper(i), upper(i + 1)));
            trans.push(format!("trans: {} a 0 {}", lower(i), lower(i + 1)));
        }
    }
    trans.push(format!("trans: {} a 0 q0", upper(n)));
    trans.push(format!("trans: {} a 0 {}", lower(n), lower(n)));
    format!(
        "states: {}\ninit: q0\nalphabet: a\nobs: {}\n{}\n",
        states.join(" "),
        obs.join(" "),
        trans.join("\n")
    )
}

pub fn fig7(n: usize) -> Arena {
    Arena::parse(&fig7_wga(n)).expect("fixture parses")
}

/// The periodic play `(o_0 o_1 … o_n)^ω` of [`fig7`].
pub fn fig7_lasso(arena: &Arena) -> crate::arena::AbstractLasso {
    let n = (arena.num_states() - 1) / 2;
    let mut cycle = vec![(arena.obs_of(arena.initial()), 0)];
    for i in 1..=n {
        let q = arena.state_index(&format!("u{i}")).expect("chain state");
        cycle.push((arena.obs_of(q), 0));
    }
    crate::arena::AbstractLasso::new(Vec::new(), cycle)
}

/// One state `q`, one action, a self-loop of the given weight.
pub fn single_state(weight: i64) -> Arena {
    Arena::new(&["q"], "q", &["a"], &[vec!["q"]], &[("q", "a", weight, "q")]).expect("valid")
}

/// Every weight of `arena` replaced by 0.
pub fn zeroed(arena: &Arena) -> Arena {
    let text: String = arena
        .to_wga()
        .lines()
        .map(|line| match line.strip_prefix("trans: ") {
            Some(rest) => {
                let t: Vec<&str> = rest.split_whitespace().collect();
                format!("trans: {} {} 0 {}\n", t[0], t[1], t[3])
            }
            None => format!("{line}\n"),
        })
        .collect();
    Arena::parse(&text).expect("zeroing keeps validity")
}
