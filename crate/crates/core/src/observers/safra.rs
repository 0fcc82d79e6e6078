//! Determinization of Büchi observers with compact Safra trees.
//!
//! Tree nodes are kept in a vector ordered by age; the position of a node is
//! its name. After each step the names are compacted, so the youngest node
//! always has the largest name. A step is labelled with the smallest name
//! that was removed (odd) or flashed (even), which yields a min-parity
//! condition; it is converted to the project-wide max-parity convention.

use std::collections::HashMap;
use std::fmt::{Debug, Write as _};
use std::hash::Hash;

use fixedbitset::FixedBitSet;
use indexmap::IndexSet;

use super::{BuchiObserver, Word};
use crate::{Error, Limits, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    parent: Option<usize>,
    label: FixedBitSet,
}

/// A Safra tree; empty when every run has died.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Tree(Vec<Node>);

/// Deterministic parity automaton built on demand from a Büchi observer.
/// Each state carries the priority of the step that entered it; a run is
/// accepting iff the largest priority seen infinitely often is even.
#[derive(Clone, Debug)]
pub struct ParityObserver<L> {
    nba: BuchiObserver<L>,
    productive: FixedBitSet,
    states: IndexSet<(Tree, u32)>,
    delta: Vec<Vec<Option<usize>>>,
    shift: u32,
    limits: Limits,
}

/// States of `nba` from which an accepting state on a cycle is reachable.
fn productive_states<L: Clone + Eq + Hash + Debug>(nba: &BuchiObserver<L>) -> FixedBitSet {
    let n = nba.num_states();
    let succ = |s: usize| (0..nba.letters().len()).flat_map(move |l| nba.successors(s, l).iter().copied());
    let cyclic = crate::oracle::cyclic_nodes(n, |s| succ(s).collect::<Vec<_>>());
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for t in succ(s) {
            pred[t].push(s);
        }
    }
    let mut good = FixedBitSet::with_capacity(n);
    let mut stack: Vec<usize> = (0..n).filter(|&s| nba.is_accepting(s) && cyclic[s]).collect();
    for &s in &stack {
        good.insert(s);
    }
    while let Some(t) = stack.pop() {
        for &s in &pred[t] {
            if !good.contains(s) {
                good.insert(s);
                stack.push(s);
            }
        }
    }
    good
}

impl<L: Clone + Eq + Hash + Debug> ParityObserver<L> {
    /// An observer that determinizes lazily, as transitions are queried.
    pub fn lazy(nba: &BuchiObserver<L>, limits: &Limits) -> Self {
        let productive = productive_states(nba);
        let n = nba.num_states();
        let mut root = FixedBitSet::with_capacity(n);
        let tree = if productive.contains(nba.initial()) {
            root.insert(nba.initial());
            Tree(vec![Node { parent: None, label: root }])
        } else {
            Tree(Vec::new())
        };
        let mut states = IndexSet::new();
        states.insert((tree, 1));
        ParityObserver {
            nba: nba.clone(),
            productive,
            states,
            delta: vec![vec![None; nba.letters().len()]],
            shift: 0,
            limits: *limits,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn priority(&self, s: usize) -> u32 {
        self.states[s].1 + self.shift
    }

    /// Largest priority any state can carry.
    pub fn max_priority(&self) -> u32 {
        2 * self.nba.num_states() as u32 + 1 + self.shift
    }

    pub fn letters(&self) -> &IndexSet<L> {
        self.nba.letters()
    }

    pub fn letter_index(&self, letter: &L) -> Result<usize> {
        self.nba.letter_index(letter)
    }

    /// Number of nodes of the Safra tree behind state `s`.
    pub fn tree_size(&self, s: usize) -> usize {
        self.states[s].0 .0.len()
    }

    /// The flipped-acceptance observer: every priority shifted by one.
    pub fn complement(&self) -> Self {
        let mut c = self.clone();
        c.shift += 1;
        c
    }

    /// Successor of state `s` on letter index `letter`, computed on first use.
    pub fn step(&mut self, s: usize, letter: usize) -> Result<usize> {
        if let Some(t) = self.delta[s][letter] {
            return Ok(t);
        }
        let next = self.successor_tree(&self.states[s].0, letter);
        let (t, fresh) = self.states.insert_full(next);
        if fresh {
            self.limits.check("parity observer states", self.states.len())?;
            self.delta.push(vec![None; self.nba.letters().len()]);
        }
        self.delta[s][letter] = Some(t);
        Ok(t)
    }

    /// Materializes every reachable state.
    pub fn explore_all(&mut self) -> Result<()> {
        let mut k = 0;
        while k < self.states.len() {
            for l in 0..self.letters().len() {
                self.step(k, l)?;
            }
            k += 1;
        }
        Ok(())
    }

    /// Runs the observer on a lasso word.
    pub fn accepts(&mut self, word: &Word<L>) -> Result<bool> {
        let ids: Vec<usize> = (0..word.len()).map(|p| self.letter_index(word.at(p))).collect::<Result<_>>()?;
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut visited = Vec::new();
        let (mut pos, mut s) = (0, self.initial());
        loop {
            if pos >= word.prefix.len() {
                if let Some(&start) = seen.get(&(pos, s)) {
                    let top = visited[start..].iter().map(|&v| self.priority(v)).max().unwrap();
                    return Ok(top % 2 == 0);
                }
                seen.insert((pos, s), visited.len());
            }
            visited.push(s);
            s = self.step(s, ids[pos])?;
            pos = word.next(pos);
        }
    }

    fn successor_tree(&self, tree: &Tree, letter: usize) -> (Tree, u32) {
        let nba = &self.nba;
        let n = nba.num_states();
        let top_min = 2 * n as u32 + 1;
        let mut nodes = tree.0.clone();
        let old = nodes.len();
        if old == 0 {
            return (Tree(Vec::new()), 2 * n as u32 + 2 - top_min);
        }
        // spawn children for accepting states
        let accepting: FixedBitSet = (0..n).filter(|&s| nba.is_accepting(s)).collect();
        for v in 0..old {
            let mut label = nodes[v].label.clone();
            label.intersect_with(&accepting);
            if !label.is_clear() {
                nodes.push(Node { parent: Some(v), label });
            }
        }
        // powerset step
        for node in &mut nodes {
            let mut next = FixedBitSet::with_capacity(n);
            for s in node.label.ones() {
                for &t in nba.successors(s, letter) {
                    if self.productive.contains(t) {
                        next.insert(t);
                    }
                }
            }
            node.label = next;
        }
        // horizontal merge: older branches keep shared states
        let mut forbidden: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); nodes.len()];
        let mut taken: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); nodes.len()];
        for v in 0..nodes.len() {
            if let Some(p) = nodes[v].parent {
                let mut f = forbidden[p].clone();
                f.union_with(&taken[p]);
                nodes[v].label.difference_with(&f);
                taken[p].union_with(&nodes[v].label);
                forbidden[v] = f;
            }
        }
        // removal of empty nodes, then vertical merge
        let mut alive = vec![true; nodes.len()];
        let mut best = top_min;
        let mark = |v: usize, p: u32, best: &mut u32| {
            if v < old {
                *best = (*best).min(p);
            }
        };
        for v in 0..nodes.len() {
            let parent_dead = nodes[v].parent.is_some_and(|p| !alive[p]);
            if parent_dead || nodes[v].label.is_clear() {
                alive[v] = false;
                mark(v, 2 * v as u32 + 1, &mut best);
            }
        }
        for v in 0..nodes.len() {
            if !alive[v] {
                continue;
            }
            let mut kids = FixedBitSet::with_capacity(n);
            let mut has_kids = false;
            for u in v + 1..nodes.len() {
                if alive[u] && nodes[u].parent == Some(v) {
                    kids.union_with(&nodes[u].label);
                    has_kids = true;
                }
            }
            if has_kids && kids == nodes[v].label {
                mark(v, 2 * v as u32 + 2, &mut best);
                for u in v + 1..nodes.len() {
                    let mut a = nodes[u].parent;
                    while let Some(x) = a {
                        if x == v {
                            if alive[u] {
                                alive[u] = false;
                                mark(u, 2 * u as u32 + 1, &mut best);
                            }
                            break;
                        }
                        a = nodes[x].parent;
                    }
                }
            }
        }
        // compact names
        let mut rename = vec![usize::MAX; nodes.len()];
        let mut out = Vec::new();
        for (v, node) in nodes.into_iter().enumerate() {
            if alive[v] {
                rename[v] = out.len();
                out.push(Node {
                    parent: node.parent.map(|p| rename[p]),
                    label: node.label,
                });
            }
        }
        (Tree(out), 2 * n as u32 + 2 - best)
    }

    /// HOA-like listing of the states built so far.
    pub fn to_hoa(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "States: {}", self.num_states());
        let _ = writeln!(out, "Start: 0");
        let _ = writeln!(out, "Acceptance: parity max even, priorities 0..={}", self.max_priority());
        for (i, l) in self.letters().iter().enumerate() {
            let _ = writeln!(out, "Letter {i}: {l:?}");
        }
        let _ = writeln!(out, "--BODY--");
        for s in 0..self.num_states() {
            let tree: Vec<String> = self.states[s]
                .0
                 .0
                .iter()
                .map(|node| {
                    let label: Vec<String> = node.label.ones().map(|x| x.to_string()).collect();
                    format!("{}:{{{}}}", node.parent.map_or("-".into(), |p| p.to_string()), label.join(","))
                })
                .collect();
            let _ = writeln!(out, "State: {s} \"[{}]\" {{{}}}", tree.join(" "), self.priority(s));
            for (l, t) in self.delta[s].iter().enumerate() {
                if let Some(t) = t {
                    let _ = writeln!(out, "  [{l}] {t}");
                }
            }
        }
        out.push_str("--END--\n");
        out
    }
}

/// Full determinization (every reachable state).
pub fn determinize<L: Clone + Eq + Hash + Debug>(nba: &BuchiObserver<L>) -> Result<ParityObserver<L>> {
    determinize_with(nba, &Limits::default())
}

pub fn determinize_with<L: Clone + Eq + Hash + Debug>(nba: &BuchiObserver<L>, limits: &Limits) -> Result<ParityObserver<L>> {
    let mut det = ParityObserver::lazy(nba, limits);
    det.explore_all()?;
    if det.num_states() == 0 {
        return Err(Error::Invalid("determinization produced no states".into()));
    }
    Ok(det)
}
