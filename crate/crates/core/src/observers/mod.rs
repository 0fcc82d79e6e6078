//! Automata that watch abstract plays: the Büchi observers for the
//! complements of Fix and UFix, the belief transducer that annotates plays
//! with knowledge sets, and determinization into parity observers.

mod safra;

use std::collections::VecDeque;
use std::fmt::{self, Debug, Write as _};
use std::hash::Hash;

use fixedbitset::FixedBitSet;
use indexmap::IndexSet;

use crate::arena::{AbstractLasso, Arena, StateSet};
use crate::{Error, Limits, Result};

pub use safra::{determinize, determinize_with, ParityObserver};

/// An ultimately periodic word `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word<L> {
    pub prefix: Vec<L>,
    pub cycle: Vec<L>,
}

impl<L> Word<L> {
    pub fn new(prefix: Vec<L>, cycle: Vec<L>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Invalid("word cycle must be nonempty".into()));
        }
        Ok(Word { prefix, cycle })
    }

    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, pos: usize) -> &L {
        if pos < self.prefix.len() {
            &self.prefix[pos]
        } else {
            &self.cycle[pos - self.prefix.len()]
        }
    }

    pub fn next(&self, pos: usize) -> usize {
        if pos + 1 == self.len() {
            self.prefix.len()
        } else {
            pos + 1
        }
    }
}

/// Letter read by the Fix observer: Eve's action and the observation
/// revealed after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub action: usize,
    pub obs: usize,
}

/// Letter read by the UFix observer: a [`Letter`] together with the belief
/// reached after it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeliefLetter {
    pub action: usize,
    pub obs: usize,
    pub belief: StateSet,
}

/// The letters `(σ_i, o_{i+1})` of an abstract lasso. Prefix and cycle
/// lengths are kept.
pub fn lasso_word(arena: &Arena, lasso: &AbstractLasso) -> Result<Word<Letter>> {
    arena.check_lasso(lasso)?;
    let letter = |pos: usize| Letter {
        action: lasso.letter_at(pos).1,
        obs: lasso.letter_at(lasso.next_position(pos)).0,
    };
    let p = lasso.prefix.len();
    Word::new((0..p).map(letter).collect(), (p..lasso.period_end()).map(letter).collect())
}

/// Observer state. `second` is only used by the UFix observer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObserverState {
    pub q: usize,
    pub second: Option<usize>,
    pub i: usize,
    pub n: Counter,
}

/// Weight of the tracked window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Counter {
    Bottom,
    Value(i64),
    Top,
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counter::Bottom => f.write_str("⊥"),
            Counter::Top => f.write_str("⊤"),
            Counter::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Nondeterministic Büchi automaton over a materialized alphabet. Only
/// reachable states are stored.
#[derive(Clone, Debug)]
pub struct BuchiObserver<L> {
    states: IndexSet<ObserverState>,
    initial: usize,
    accepting: FixedBitSet,
    letters: IndexSet<L>,
    /// `delta[state][letter]`, sorted.
    delta: Vec<Vec<Vec<usize>>>,
}

impl<L: Clone + Eq + Hash + Debug> BuchiObserver<L> {
    fn explore<F>(initial: ObserverState, letters: IndexSet<L>, accepting: impl Fn(&ObserverState) -> bool, step: F, limits: &Limits) -> Result<Self>
    where
        F: Fn(&ObserverState, &L) -> Vec<ObserverState>,
    {
        let mut states = IndexSet::new();
        states.insert(initial);
        let mut delta: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(s) = queue.pop_front() {
            let src = states[s];
            let mut row = Vec::with_capacity(letters.len());
            for letter in &letters {
                let mut succ: Vec<usize> = step(&src, letter)
                    .into_iter()
                    .map(|t| {
                        let (idx, fresh) = states.insert_full(t);
                        if fresh {
                            queue.push_back(idx);
                        }
                        idx
                    })
                    .collect();
                succ.sort_unstable();
                succ.dedup();
                row.push(succ);
            }
            limits.check("observer states", states.len())?;
            if delta.len() <= s {
                delta.resize(s + 1, Vec::new());
            }
            delta[s] = row;
        }
        let mut acc = FixedBitSet::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if accepting(s) {
                acc.insert(i);
            }
        }
        Ok(BuchiObserver {
            states,
            initial: 0,
            accepting: acc,
            letters,
            delta,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state(&self, s: usize) -> &ObserverState {
        &self.states[s]
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        self.accepting.contains(s)
    }

    pub fn letters(&self) -> &IndexSet<L> {
        &self.letters
    }

    pub fn letter_index(&self, letter: &L) -> Result<usize> {
        self.letters
            .get_index_of(letter)
            .ok_or_else(|| Error::Invalid(format!("letter {letter:?} is not in the observer alphabet")))
    }

    pub fn successors(&self, s: usize, letter: usize) -> &[usize] {
        &self.delta[s][letter]
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().flatten().map(Vec::len).sum()
    }

    /// Some run on `word` visits accepting states infinitely often.
    pub fn accepts(&self, word: &Word<L>) -> Result<bool> {
        let ids: Vec<usize> = (0..word.len()).map(|p| self.letter_index(word.at(p))).collect::<Result<_>>()?;
        let n = self.num_states();
        let node = |pos: usize, s: usize| pos * n + s;
        let total = word.len() * n;
        let succ = |v: usize| {
            let (pos, s) = (v / n, v % n);
            let next = word.next(pos);
            self.delta[s][ids[pos]].iter().map(move |&t| node(next, t)).collect::<Vec<_>>()
        };
        let mut reach = FixedBitSet::with_capacity(total);
        let start = node(0, self.initial);
        reach.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for u in succ(v) {
                if !reach.contains(u) {
                    reach.insert(u);
                    stack.push(u);
                }
            }
        }
        let restricted = |v: usize| -> Vec<usize> {
            if reach.contains(v) {
                succ(v)
            } else {
                Vec::new()
            }
        };
        let cyclic = crate::oracle::cyclic_nodes(total, restricted);
        Ok((0..total).any(|v| reach.contains(v) && cyclic[v] && self.accepting.contains(v % n)))
    }

    /// HOA-like listing of states, letters and transitions.
    pub fn to_hoa(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "States: {}", self.num_states());
        let _ = writeln!(out, "Start: {}", self.initial);
        let _ = writeln!(out, "Acceptance: Buchi");
        for (i, l) in self.letters.iter().enumerate() {
            let _ = writeln!(out, "Letter {i}: {l:?}");
        }
        let _ = writeln!(out, "--BODY--");
        for (s, st) in self.states.iter().enumerate() {
            let acc = if self.is_accepting(s) { " {0}" } else { "" };
            let second = st.second.map(|x| format!(",{x}")).unwrap_or_default();
            let _ = writeln!(out, "State: {s} \"({}{second},{},{})\"{acc}", st.q, st.i, st.n);
            for (l, succ) in self.delta[s].iter().enumerate() {
                for t in succ {
                    let _ = writeln!(out, "  [{l}] {t}");
                }
            }
        }
        out.push_str("--END--\n");
        out
    }
}

fn fix_letters(arena: &Arena) -> IndexSet<Letter> {
    let mut letters = IndexSet::new();
    for action in 0..arena.num_actions() {
        for obs in 0..arena.num_observations() {
            letters.insert(Letter { action, obs });
        }
    }
    letters
}

/// The Büchi observer for plays outside `Fix(lmax)`.
pub fn build_fix_nba(arena: &Arena, lmax: usize) -> Result<BuchiObserver<Letter>> {
    build_fix_nba_with(arena, lmax, &Limits::default())
}

pub fn build_fix_nba_with(arena: &Arena, lmax: usize, limits: &Limits) -> Result<BuchiObserver<Letter>> {
    if lmax == 0 {
        return Err(Error::Invalid("lmax must be at least 1".into()));
    }
    let initial = ObserverState {
        q: arena.initial(),
        second: None,
        i: 1,
        n: Counter::Bottom,
    };
    let step = |s: &ObserverState, l: &Letter| {
        let obs = arena.observation_set(l.obs);
        let mut out = Vec::new();
        for &(q, w) in arena.successors(s.q, l.action) {
            if !obs.contains(q) {
                continue;
            }
            out.extend(window_moves(s.i, s.n, w, lmax, None).into_iter().map(|(i, n)| ObserverState {
                q,
                second: None,
                i,
                n,
            }));
        }
        out
    };
    BuchiObserver::explore(initial, fix_letters(arena), |s| s.i == lmax && s.n != Counter::Bottom, step, limits)
}

/// Counter updates along an edge of weight `w`. `top` enables the move to
/// `⊤` once a window has stayed open for `lmax` steps; it carries whether the
/// two tracked paths currently coincide.
fn window_moves(i: usize, n: Counter, w: i64, lmax: usize, top: Option<bool>) -> Vec<(usize, Counter)> {
    let mut out = Vec::new();
    if w < 0 {
        out.push((1, Counter::Value(w)));
    }
    if let Counter::Value(v) = n {
        if i < lmax && v + w < 0 {
            out.push((i + 1, Counter::Value(v + w)));
        }
    }
    if top.is_some_and(|merged| n != Counter::Bottom && (n != Counter::Top || !merged) && i == lmax) {
        out.push((lmax, Counter::Top));
    }
    if out.is_empty() {
        out.push((1, Counter::Bottom));
    }
    out
}

/// Subset-construction transducer annotating plays with Eve's knowledge:
/// reading `(σ, o)` in belief `s` moves to `post_σ(s) ∩ o`.
#[derive(Clone, Debug)]
pub struct BeliefMachine {
    beliefs: IndexSet<StateSet>,
    /// `delta[s][σ][o]`
    delta: Vec<Vec<Vec<Option<usize>>>>,
}

impl BeliefMachine {
    pub fn num_beliefs(&self) -> usize {
        self.beliefs.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn belief(&self, s: usize) -> &StateSet {
        &self.beliefs[s]
    }

    pub fn beliefs(&self) -> impl Iterator<Item = &StateSet> {
        self.beliefs.iter()
    }

    pub fn step(&self, s: usize, action: usize, obs: usize) -> Option<usize> {
        self.delta[s][action][obs]
    }

    /// Annotates a word with beliefs. The result is unrolled until
    /// `(position, belief)` repeats, so its cycle may be a multiple of the
    /// input cycle.
    pub fn annotate(&self, word: &Word<Letter>) -> Result<Word<BeliefLetter>> {
        let mut seen: std::collections::HashMap<(usize, usize), usize> = Default::default();
        let mut letters = Vec::new();
        let (mut pos, mut s) = (0usize, self.initial());
        loop {
            if pos >= word.prefix.len() {
                if let Some(&start) = seen.get(&(pos, s)) {
                    let cycle = letters.split_off(start);
                    return Word::new(letters, cycle);
                }
                seen.insert((pos, s), letters.len());
            }
            let l = word.at(pos);
            let t = self
                .step(s, l.action, l.obs)
                .ok_or_else(|| Error::IllegalPath(format!("observation {} impossible after step {}", l.obs, letters.len())))?;
            letters.push(BeliefLetter {
                action: l.action,
                obs: l.obs,
                belief: self.beliefs[t].clone(),
            });
            pos = word.next(pos);
            s = t;
        }
    }
}

pub fn build_belief_machine(arena: &Arena) -> Result<BeliefMachine> {
    build_belief_machine_with(arena, &Limits::default())
}

pub fn build_belief_machine_with(arena: &Arena, limits: &Limits) -> Result<BeliefMachine> {
    let mut beliefs = IndexSet::new();
    beliefs.insert(StateSet::singleton(arena.num_states(), arena.initial()));
    let mut delta = Vec::new();
    let mut k = 0;
    while k < beliefs.len() {
        let s = beliefs[k].clone();
        let mut per_action = Vec::with_capacity(arena.num_actions());
        for a in 0..arena.num_actions() {
            let post = arena.post(&s, a);
            let mut per_obs = Vec::with_capacity(arena.num_observations());
            for o in 0..arena.num_observations() {
                let next = post.intersection(&arena.observation_set(o));
                per_obs.push(if next.is_empty() { None } else { Some(beliefs.insert_full(next).0) });
            }
            per_action.push(per_obs);
        }
        limits.check("beliefs", beliefs.len())?;
        delta.push(per_action);
        k += 1;
    }
    Ok(BeliefMachine { beliefs, delta })
}

/// The Büchi observer for plays outside `UFix(lmax)`, over belief-annotated
/// letters. The first component tracks a path that opens a window for
/// `lmax` steps and then runs until it meets the second component, a
/// concrete play; meeting is accepting.
pub fn build_ufix_nba(arena: &Arena, lmax: usize) -> Result<BuchiObserver<BeliefLetter>> {
    build_ufix_nba_with(arena, lmax, &Limits::default())
}

pub fn build_ufix_nba_with(arena: &Arena, lmax: usize, limits: &Limits) -> Result<BuchiObserver<BeliefLetter>> {
    if lmax == 0 {
        return Err(Error::Invalid("lmax must be at least 1".into()));
    }
    let machine = build_belief_machine_with(arena, limits)?;
    let mut letters = IndexSet::new();
    for s in 0..machine.num_beliefs() {
        for action in 0..arena.num_actions() {
            for obs in 0..arena.num_observations() {
                if let Some(t) = machine.step(s, action, obs) {
                    letters.insert(BeliefLetter {
                        action,
                        obs,
                        belief: machine.belief(t).clone(),
                    });
                }
            }
        }
    }
    let mut sorted: Vec<BeliefLetter> = letters.into_iter().collect();
    sorted.sort();
    let letters: IndexSet<BeliefLetter> = sorted.into_iter().collect();
    let initial = ObserverState {
        q: arena.initial(),
        second: Some(arena.initial()),
        i: 1,
        n: Counter::Bottom,
    };
    let step = |s: &ObserverState, l: &BeliefLetter| {
        let p2 = s.second.expect("UFix observer states are pairs");
        let obs = arena.observation_set(l.obs);
        let mut out = Vec::new();
        for &(q2, _) in arena.successors(p2, l.action) {
            if !obs.contains(q2) {
                continue;
            }
            for q in l.belief.iter() {
                let moves = match arena.weight(s.q, l.action, q) {
                    Some(w) => window_moves(s.i, s.n, w, lmax, Some(s.q == p2)),
                    None => vec![(1, Counter::Bottom)],
                };
                out.extend(moves.into_iter().map(|(i, n)| ObserverState {
                    q,
                    second: Some(q2),
                    i,
                    n,
                }));
            }
        }
        out
    };
    BuchiObserver::explore(initial, letters, |s| s.n == Counter::Top && s.second == Some(s.q), step, limits)
}

/// The belief-annotated word of an abstract lasso.
pub fn lasso_belief_word(arena: &Arena, lasso: &AbstractLasso) -> Result<Word<BeliefLetter>> {
    build_belief_machine(arena)?.annotate(&lasso_word(arena, lasso)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::Objective;
    use crate::fixtures;
    use crate::oracle::check_lasso;

    #[test]
    fn fig3_fix_observer_reaches_accepting_state() {
        let fig3 = fixtures::fig3();
        let nba = build_fix_nba(&fig3, 2).unwrap();
        let q1 = fig3.state_index("q1").unwrap();
        let target = ObserverState {
            q: q1,
            second: None,
            i: 2,
            n: Counter::Value(-1),
        };
        assert!(nba.states.contains(&target));
        assert!(nba.is_accepting(nba.states.get_index_of(&target).unwrap()));
        let lasso = fig3.parse_lasso("| q0 a q1 a q1 a").unwrap();
        assert!(nba.accepts(&lasso_word(&fig3, &lasso).unwrap()).unwrap());
        assert!(!check_lasso(&fig3, &lasso, &Objective::fix(2)).unwrap().member);
        // -1 then +1 closes every window at length 2
        let closing = fig3.parse_lasso("| q0 a q1 a").unwrap();
        assert!(!nba.accepts(&lasso_word(&fig3, &closing).unwrap()).unwrap());
        assert!(check_lasso(&fig3, &closing, &Objective::fix(2)).unwrap().member);
    }

    #[test]
    fn nonnegative_weights_give_empty_language() {
        let a = fixtures::zeroed(&fixtures::fig3());
        let nba = build_fix_nba(&a, 2).unwrap();
        assert!((0..nba.num_states()).all(|s| nba.state(s).n == Counter::Bottom));
        let one = fixtures::single_state(0);
        let nba = build_fix_nba(&one, 1).unwrap();
        let lasso = one.parse_lasso("| q a").unwrap();
        assert!(!nba.accepts(&lasso_word(&one, &lasso).unwrap()).unwrap());
        let u = build_ufix_nba(&a, 2).unwrap();
        assert!((0..u.num_states()).all(|s| !u.is_accepting(s)));
    }

    #[test]
    fn belief_machine_examples() {
        let fig2 = fixtures::fig2();
        let m = build_belief_machine(&fig2).unwrap();
        assert_eq!(m.num_beliefs(), 2);
        assert_eq!(m.step(1, 0, 0), Some(1));
        let fig3 = fixtures::fig3();
        let m = build_belief_machine(&fig3).unwrap();
        assert_eq!(m.num_beliefs(), 2);
        assert!(m.beliefs().all(|b| b.len() == 1));
        assert_eq!(build_belief_machine(&fixtures::single_state(1)).unwrap().num_beliefs(), 1);
    }

    #[test]
    fn fig2_ufix_observer_accepts_the_play() {
        let fig2 = fixtures::fig2();
        let nba = build_ufix_nba(&fig2, 2).unwrap();
        let lasso = fig2.parse_lasso("| q0 a").unwrap();
        assert!(nba.accepts(&lasso_belief_word(&fig2, &lasso).unwrap()).unwrap());
        let fix = build_fix_nba(&fig2, 2).unwrap();
        assert!(!fix.accepts(&lasso_word(&fig2, &lasso).unwrap()).unwrap());
    }

    #[test]
    fn unknown_letter_is_rejected() {
        let fig3 = fixtures::fig3();
        let nba = build_fix_nba(&fig3, 1).unwrap();
        let w = Word::new(vec![], vec![Letter { action: 3, obs: 0 }]).unwrap();
        assert!(matches!(nba.accepts(&w), Err(Error::Invalid(_))));
    }
}
