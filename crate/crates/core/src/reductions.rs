//! Hardness constructions: safety games with imperfect information as
//! DirFix arenas, and blind gadget arenas simulating a weighted automaton.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use indexmap::IndexSet;

use crate::arena::{Arena, MooreStrategy, StateSet};
use crate::{Error, Player, Result};

/// Name of the separator letter in gadget arenas. The `.wga` format uses
/// `#` for comments, so the letter is spelled out.
pub const SEPARATOR: &str = "hash";

/// Factor applied to every gadget weight so that half-units are integers.
pub const GADGET_SCALE: i64 = 2;

/// Weighted finite automaton with final states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedAutomaton {
    states: Vec<String>,
    alphabet: Vec<String>,
    initial: usize,
    finals: Vec<bool>,
    /// `(source, letter, weight, target)`
    transitions: Vec<(usize, usize, i64, usize)>,
}

impl WeightedAutomaton {
    pub fn new(states: &[&str], initial: &str, alphabet: &[&str], finals: &[&str], transitions: &[(&str, &str, i64, &str)]) -> Result<Self> {
        let uniq = |names: &[&str], what: &str| -> Result<Vec<String>> {
            let mut seen = BTreeSet::new();
            for n in names {
                if !seen.insert(*n) {
                    return Err(Error::Duplicate(format!("{what} `{n}`")));
                }
            }
            Ok(names.iter().map(|s| s.to_string()).collect())
        };
        let states = uniq(states, "state")?;
        let alphabet = uniq(alphabet, "letter")?;
        if states.is_empty() {
            return Err(Error::Invalid("automaton has no states".into()));
        }
        let state = |n: &str| states.iter().position(|s| s == n).ok_or_else(|| Error::Unknown(format!("state `{n}`")));
        let letter = |n: &str| alphabet.iter().position(|s| s == n).ok_or_else(|| Error::Unknown(format!("letter `{n}`")));
        let initial = state(initial)?;
        let mut is_final = vec![false; states.len()];
        for f in finals {
            is_final[state(f)?] = true;
        }
        let mut seen = BTreeSet::new();
        let mut trans = Vec::new();
        for &(p, a, w, q) in transitions {
            let t = (state(p)?, letter(a)?, w, state(q)?);
            if !seen.insert((t.0, t.1, t.3)) {
                return Err(Error::ParallelEdge(format!("{p} {a} {q}")));
            }
            trans.push(t);
        }
        Ok(WeightedAutomaton {
            states,
            alphabet,
            initial,
            finals: is_final,
            transitions: trans,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == name)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn transitions(&self) -> &[(usize, usize, i64, usize)] {
        &self.transitions
    }

    /// Parses the `.wfa` format: `.wga` lines without `obs`, plus
    /// `final: <states>`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut states = None;
        let mut initial = None;
        let mut alphabet = None;
        let mut finals = None;
        let mut trans = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| Error::Syntax { line: lineno + 1, message };
            let (key, value) = line.split_once(':').ok_or_else(|| syntax(format!("expected `key: value`, found `{line}`")))?;
            let toks: Vec<String> = value.split_whitespace().map(String::from).collect();
            let slot = match key.trim() {
                "states" => &mut states,
                "init" => &mut initial,
                "alphabet" => &mut alphabet,
                "final" => &mut finals,
                "trans" => {
                    if toks.len() != 4 {
                        return Err(syntax("`trans` expects `source letter weight target`".into()));
                    }
                    let w: i64 = toks[2].parse().map_err(|_| syntax(format!("invalid weight `{}`", toks[2])))?;
                    trans.push((toks[0].clone(), toks[1].clone(), w, toks[3].clone()));
                    continue;
                }
                other => return Err(syntax(format!("unknown key `{other}`"))),
            };
            if slot.is_some() {
                return Err(syntax(format!("duplicate `{}` line", key.trim())));
            }
            *slot = Some(toks);
        }
        let missing = |key: &str| Error::Syntax {
            line: text.lines().count().max(1),
            message: format!("missing `{key}` line"),
        };
        let states = states.ok_or_else(|| missing("states"))?;
        let initial = initial.ok_or_else(|| missing("init"))?;
        if initial.len() != 1 {
            return Err(Error::Invalid("`init` takes exactly one state".into()));
        }
        let alphabet = alphabet.ok_or_else(|| missing("alphabet"))?;
        let finals = finals.unwrap_or_default();
        fn refs(v: &[String]) -> Vec<&str> {
            v.iter().map(String::as_str).collect()
        }
        let trans: Vec<(&str, &str, i64, &str)> = trans.iter().map(|(p, a, w, q)| (p.as_str(), a.as_str(), *w, q.as_str())).collect();
        WeightedAutomaton::new(&refs(&states), &initial[0], &refs(&alphabet), &refs(&finals), &trans)
    }

    pub fn to_wfa(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", self.states.join(" "));
        let _ = writeln!(out, "init: {}", self.states[self.initial]);
        let _ = writeln!(out, "alphabet: {}", self.alphabet.join(" "));
        let finals: Vec<&str> = (0..self.num_states()).filter(|&q| self.finals[q]).map(|q| self.state_name(q)).collect();
        let _ = writeln!(out, "final: {}", finals.join(" "));
        for &(p, a, w, q) in &self.transitions {
            let _ = writeln!(out, "trans: {} {} {} {}", self.states[p], self.alphabet[a], w, self.states[q]);
        }
        out
    }

    /// Cheapest cost of reaching each state on `word` (`None`: unreachable).
    fn costs(&self, word: &[usize]) -> Vec<Option<i64>> {
        let mut cur = vec![None; self.num_states()];
        cur[self.initial] = Some(0);
        for &a in word {
            let mut next: Vec<Option<i64>> = vec![None; self.num_states()];
            for &(p, b, w, q) in &self.transitions {
                if b != a {
                    continue;
                }
                if let Some(c) = cur[p] {
                    next[q] = Some(next[q].map_or(c + w, |d: i64| d.min(c + w)));
                }
            }
            cur = next;
        }
        cur
    }

    /// Minimum cost over accepting runs on `word`, `None` without one.
    pub fn cost(&self, word: &[usize]) -> Option<i64> {
        self.costs(word)
            .into_iter()
            .enumerate()
            .filter(|&(q, _)| self.finals[q])
            .filter_map(|(_, c)| c)
            .min()
    }
}

pub fn wfa_cost(automaton: &WeightedAutomaton, word: &[usize]) -> Option<i64> {
    automaton.cost(word)
}

/// Outcome of a bounded universality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Universality {
    /// Every word of length at most the bound without an accepting run or
    /// with negative cost.
    UpTo(usize),
    /// A shortest word whose cost is defined and nonnegative.
    Counterexample(Vec<usize>),
}

/// Checks `cost(x) < 0` for every word `x` with `|x| <= max_len`, in
/// shortlex order. Words without an accepting run satisfy the condition.
pub fn is_universal_bounded(automaton: &WeightedAutomaton, max_len: usize) -> Universality {
    let k = automaton.alphabet.len();
    for len in 0..=max_len {
        if k == 0 && len > 0 {
            break;
        }
        let mut word = vec![0usize; len];
        loop {
            if automaton.cost(&word).is_some_and(|c| c >= 0) {
                return Universality::Counterexample(word);
            }
            let mut i = len;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                word[i] += 1;
                if word[i] < k {
                    break;
                }
                word[i] = 0;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX || len == 0 {
                break;
            }
        }
    }
    Universality::UpTo(max_len)
}

/// A safety game with imperfect information: an arena whose weights are
/// ignored and a set of trapping unsafe states.
#[derive(Clone, Debug)]
pub struct SafetySpec {
    arena: Arena,
    unsafe_states: StateSet,
}

impl SafetySpec {
    pub fn new(arena: Arena, unsafe_states: StateSet) -> Result<Self> {
        for u in unsafe_states.iter() {
            for a in 0..arena.num_actions() {
                if arena.successors(u, a).iter().any(|&(q, _)| q != u) {
                    return Err(Error::Invalid(format!(
                        "unsafe state `{}` is not trapping on `{}`",
                        arena.state_name(u),
                        arena.action_name(a)
                    )));
                }
            }
        }
        Ok(SafetySpec { arena, unsafe_states })
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn unsafe_states(&self) -> &StateSet {
        &self.unsafe_states
    }
}

/// Rebuilds `arena` with new weights.
fn reweight(arena: &Arena, weight: impl Fn(usize, usize, usize) -> i64) -> Result<Arena> {
    let states: Vec<String> = (0..arena.num_states()).map(|q| arena.state_name(q).to_string()).collect();
    let actions: Vec<String> = (0..arena.num_actions()).map(|a| arena.action_name(a).to_string()).collect();
    let blocks: Vec<Vec<String>> = (0..arena.num_observations())
        .map(|o| arena.observation(o).iter().map(|&q| states[q].clone()).collect())
        .collect();
    let trans = arena
        .transitions()
        .map(|t| (states[t.source].clone(), actions[t.action].clone(), weight(t.source, t.action, t.target), states[t.target].clone()))
        .collect();
    Arena::from_parts(states.clone(), states[arena.initial()].clone(), actions, blocks, trans)
}

/// Weight `-1` on every transition leaving an unsafe state, `0` elsewhere.
pub fn safety_to_dirfix(spec: &SafetySpec) -> Result<Arena> {
    reweight(&spec.arena, |p, _, _| if spec.unsafe_states.contains(p) { -1 } else { 0 })
}

/// Winner of the safety game, on the knowledge game: Eve loses from a
/// belief that meets the unsafe set, and Adam picks the next observation.
pub fn solve_safety_spec(spec: &SafetySpec) -> Player {
    let arena = &spec.arena;
    let mut beliefs: IndexSet<StateSet> = IndexSet::new();
    beliefs.insert(StateSet::singleton(arena.num_states(), arena.initial()));
    // succ[k][σ] = possible next beliefs
    let mut succ: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut k = 0;
    while k < beliefs.len() {
        let s = beliefs[k].clone();
        let mut per_action = Vec::new();
        for a in 0..arena.num_actions() {
            let post = arena.post(&s, a);
            let mut next = Vec::new();
            for o in 0..arena.num_observations() {
                let t = post.intersection(&arena.observation_set(o));
                if !t.is_empty() {
                    next.push(beliefs.insert_full(t).0);
                }
            }
            per_action.push(next);
        }
        succ.push(per_action);
        k += 1;
    }
    let mut losing: Vec<bool> = beliefs.iter().map(|b| !b.is_disjoint(&spec.unsafe_states)).collect();
    loop {
        let mut changed = false;
        for k in 0..beliefs.len() {
            if !losing[k] && succ[k].iter().all(|next| next.iter().any(|&t| losing[t])) {
                losing[k] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if losing[0] {
        Player::Adam
    } else {
        Player::Eve
    }
}

fn check_alphabet(automaton: &WeightedAutomaton) -> Result<()> {
    if automaton.alphabet.iter().any(|a| a == SEPARATOR) {
        return Err(Error::Invalid(format!("automaton alphabet already contains the separator `{SEPARATOR}`")));
    }
    if automaton.alphabet.is_empty() {
        return Err(Error::Invalid("automaton alphabet is empty".into()));
    }
    Ok(())
}

/// Transitions of the automaton-simulation gadget (doubled weights): the
/// entry `q5` reads the separator into a copy of the automaton; final states
/// return to its initial state on the separator with weight 1, other states
/// fall into the sink `bot`; missing automaton moves also lead to `bot`.
fn simulation_part(automaton: &WeightedAutomaton, trans: &mut Vec<(String, String, i64, String)>) -> Vec<String> {
    let n = |q: usize| format!("n_{}", automaton.state_name(q));
    let sep = SEPARATOR.to_string();
    let bot = "bot".to_string();
    let mut states: Vec<String> = (0..automaton.num_states()).map(n).collect();
    trans.push(("q5".into(), sep.clone(), GADGET_SCALE / 2, n(automaton.initial)));
    for q in 0..automaton.num_states() {
        for (a, letter) in automaton.alphabet.iter().enumerate() {
            let moves: Vec<_> = automaton.transitions.iter().filter(|t| t.0 == q && t.1 == a).collect();
            if moves.is_empty() {
                trans.push((n(q), letter.clone(), 0, bot.clone()));
            }
            for &&(_, _, w, t) in &moves {
                trans.push((n(q), letter.clone(), GADGET_SCALE * w, n(t)));
            }
        }
        if automaton.is_final(q) {
            trans.push((n(q), sep.clone(), GADGET_SCALE / 2, n(automaton.initial)));
        } else {
            trans.push((n(q), sep.clone(), 0, bot.clone()));
        }
    }
    for letter in automaton.alphabet.iter().chain([&sep]) {
        trans.push((bot.clone(), letter.clone(), GADGET_SCALE, bot.clone()));
    }
    states.push(bot);
    states
}

fn blind_arena(states: Vec<String>, initial: &str, automaton: &WeightedAutomaton, trans: Vec<(String, String, i64, String)>) -> Result<Arena> {
    let mut actions = automaton.alphabet.clone();
    actions.push(SEPARATOR.into());
    let arena = Arena::from_parts(states.clone(), initial.into(), actions, vec![states], trans)?;
    Ok(arena.with_weight_scale(GADGET_SCALE))
}

/// The blind arena wiring the three gadgets: `q1 q2 q3` force infinitely
/// many separators, `q4 q5` force them at bounded distance, and `q5` also
/// enters the automaton copy. A fresh initial state `init` moves with
/// weight 0 on every letter to `q1`, `q4` or `q5`. Weights are doubled.
pub fn universality_gadget(automaton: &WeightedAutomaton) -> Result<Arena> {
    check_alphabet(automaton)?;
    let s = GADGET_SCALE;
    let sep = SEPARATOR.to_string();
    let mut trans: Vec<(String, String, i64, String)> = Vec::new();
    let mut t = |p: &str, a: &str, w: i64, q: &str| trans.push((p.into(), a.into(), w, q.into()));
    let letters: Vec<String> = automaton.alphabet.clone();
    for a in letters.iter().chain([&sep]) {
        t("init", a, 0, "q1");
        t("init", a, 0, "q4");
        t("init", a, 0, "q5");
        t("q1", a, 0, "q1");
        t("q4", a, 0, "q4");
    }
    for a in &letters {
        t("q1", a, -s, "q2");
        t("q2", a, -s, "q2");
        t("q3", a, s, "q3");
        t("q5", a, 0, "q5");
    }
    t("q2", &sep, s, "q3");
    t("q3", &sep, s, "q3");
    t("q4", &sep, -s, "q5");
    t("q5", &sep, s, "q4");
    let mut states: Vec<String> = ["init", "q1", "q2", "q3", "q4", "q5"].iter().map(|x| x.to_string()).collect();
    states.extend(simulation_part(automaton, &mut trans));
    blind_arena(states, "init", automaton, trans)
}

/// The automaton-simulation gadget on its own, entered at `q5` (which
/// loops with weight 0 on automaton letters).
pub fn simulation_gadget(automaton: &WeightedAutomaton) -> Result<Arena> {
    check_alphabet(automaton)?;
    let mut trans = Vec::new();
    for a in &automaton.alphabet {
        trans.push(("q5".to_string(), a.clone(), 0, "q5".to_string()));
    }
    let mut states = vec!["q5".to_string()];
    states.extend(simulation_part(automaton, &mut trans));
    blind_arena(states, "q5", automaton, trans)
}

/// Eve's blind strategy `(separator · word)^ω` in a gadget arena.
pub fn separator_strategy(arena: &Arena, automaton: &WeightedAutomaton, word: &[usize]) -> Result<MooreStrategy> {
    let sep = arena.action_index(SEPARATOR).ok_or_else(|| Error::Unknown(format!("action `{SEPARATOR}`")))?;
    let mut actions = vec![sep];
    for &a in word {
        let name = automaton.alphabet.get(a).ok_or(Error::OutOfRange {
            index: a,
            len: automaton.alphabet.len(),
        })?;
        actions.push(arena.action_index(name).ok_or_else(|| Error::Unknown(format!("action `{name}`")))?);
    }
    MooreStrategy::cyclic_word(arena, &actions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_runs() -> WeightedAutomaton {
        WeightedAutomaton::new(
            &["s", "t", "u"],
            "s",
            &["a", "b"],
            &["u"],
            &[("s", "a", -2, "t"), ("s", "a", 1, "u"), ("t", "b", 1, "u"), ("u", "b", 2, "u")],
        )
        .unwrap()
    }

    #[test]
    fn cost_examples() {
        let n = two_runs();
        assert_eq!(n.cost(&[0, 1]), Some(-1));
        assert_eq!(n.cost(&[]), None);
        assert_eq!(n.cost(&[1]), None);
        let one = WeightedAutomaton::new(&["s"], "s", &["a"], &["s"], &[("s", "a", -1, "s")]).unwrap();
        assert_eq!(wfa_cost(&one, &[]), Some(0));
    }

    #[test]
    fn universality_examples() {
        let neg = WeightedAutomaton::new(&["s"], "s", &["a"], &["s"], &[("s", "a", -1, "s")]).unwrap();
        assert_eq!(is_universal_bounded(&neg, 4), Universality::Counterexample(vec![]));
        let neg_nonempty = WeightedAutomaton::new(&["s", "t"], "s", &["a"], &["t"], &[("s", "a", -1, "t"), ("t", "a", -1, "t")]).unwrap();
        assert_eq!(is_universal_bounded(&neg_nonempty, 5), Universality::UpTo(5));
        let dead = WeightedAutomaton::new(&["s"], "s", &["a"], &[], &[]).unwrap();
        assert_eq!(is_universal_bounded(&dead, 3), Universality::UpTo(3));
        let pos = WeightedAutomaton::new(&["s", "t"], "s", &["a"], &["t"], &[("s", "a", 1, "t"), ("t", "a", 1, "t")]).unwrap();
        assert_eq!(is_universal_bounded(&pos, 3), Universality::Counterexample(vec![0]));
    }

    #[test]
    fn wfa_round_trip() {
        let n = two_runs();
        assert_eq!(WeightedAutomaton::parse(&n.to_wfa()).unwrap(), n);
        assert!(matches!(WeightedAutomaton::parse("states: s\ninit: s\nfoo: x\n"), Err(Error::Syntax { line: 3, .. })));
    }

    #[test]
    fn gadget_structure() {
        let n = two_runs();
        let g = universality_gadget(&n).unwrap();
        assert!(g.is_blind());
        assert_eq!(g.num_states(), 5 + n.num_states() + 1 + 1);
        assert_eq!(g.num_actions(), 3);
        assert_eq!(g.weight_scale(), 2);
        // Fig. 4 with doubled weights
        let q = |s: &str| g.state_index(s).unwrap();
        let a = |s: &str| g.action_index(s).unwrap();
        assert_eq!(g.weight(q("q1"), a("a"), q("q2")), Some(-2));
        assert_eq!(g.weight(q("q2"), a(SEPARATOR), q("q3")), Some(2));
        assert_eq!(g.weight(q("q4"), a(SEPARATOR), q("q5")), Some(-2));
        assert_eq!(g.weight(q("q5"), a(SEPARATOR), q("n_s")), Some(1));
        assert_eq!(g.weight(q("n_u"), a(SEPARATOR), q("n_s")), Some(1));
        assert_eq!(g.weight(q("n_t"), a(SEPARATOR), q("bot")), Some(0));
        assert_eq!(g.weight(q("n_s"), a("a"), q("n_t")), Some(-4));
        assert_eq!(g.weight(q("n_s"), a("b"), q("bot")), Some(0));
        let sim = simulation_gadget(&n).unwrap();
        assert_eq!(sim.num_states(), 1 + n.num_states() + 1);
    }

    #[test]
    fn separator_clash_is_rejected() {
        let n = WeightedAutomaton::new(&["s"], "s", &[SEPARATOR], &["s"], &[]).unwrap();
        assert!(universality_gadget(&n).is_err());
    }

    #[test]
    fn safety_reduction_examples() {
        let arena = Arena::new(
            &["ok", "bad"],
            "ok",
            &["a"],
            &[vec!["ok"], vec!["bad"]],
            &[("ok", "a", 0, "ok"), ("bad", "a", 0, "bad")],
        )
        .unwrap();
        let bad = StateSet::singleton(2, arena.state_index("bad").unwrap());
        let spec = SafetySpec::new(arena.clone(), bad.clone()).unwrap();
        assert_eq!(solve_safety_spec(&spec), Player::Eve);
        let reduced = safety_to_dirfix(&spec).unwrap();
        assert_eq!(crate::dirfix::solve_dirfix(&reduced, 1).unwrap().winner, Player::Eve);
        let doomed = Arena::new(
            &["ok", "bad"],
            "ok",
            &["a"],
            &[vec!["ok"], vec!["bad"]],
            &[("ok", "a", 0, "bad"), ("bad", "a", 0, "bad")],
        )
        .unwrap();
        let spec = SafetySpec::new(doomed, bad).unwrap();
        assert_eq!(solve_safety_spec(&spec), Player::Adam);
        assert_eq!(crate::dirfix::solve_dirfix(&safety_to_dirfix(&spec).unwrap(), 1).unwrap().winner, Player::Adam);
        let leaky = Arena::new(&["ok", "bad"], "ok", &["a"], &[vec!["ok"], vec!["bad"]], &[("ok", "a", 0, "ok"), ("bad", "a", 0, "ok")]).unwrap();
        assert!(SafetySpec::new(leaky, StateSet::singleton(2, 0)).is_err());
    }
}
