//! Brute-force semantics on ultimately periodic plays.
//!
//! A lasso is unrolled, together with its belief sequence, until the pair
//! (lasso position, belief) repeats. The resulting finite "time graph" has a
//! node `(t, q)` for every time `t` and every state `q` of the belief at `t`;
//! its infinite paths from `(0, q_I)` are exactly the concretizations of the
//! play. Objective membership then reduces to path questions on this graph
//! (or on its product with a window tracker).

use std::collections::{HashMap, HashSet, VecDeque};

use indexmap::IndexSet;
use num_rational::Rational64;

use crate::arena::{AbstractLasso, Arena, ConcretePath, MooreStrategy, Objective, ObjectiveKind, StateSet};
use crate::{Error, Limits, Result};

/// Outcome of a good-window test at one position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowVerdict {
    pub position: usize,
    /// Smallest `j <= lmax` whose window sum is non-negative.
    pub closed_at: Option<usize>,
    /// Window sums for lengths `1..` up to the closing length (or `lmax`).
    pub sums: Vec<i64>,
}

impl WindowVerdict {
    pub fn is_good(&self) -> bool {
        self.closed_at.is_some()
    }
}

/// Does some window of length at most `lmax` starting at `i` have a
/// non-negative sum?
pub fn good_window(arena: &Arena, path: &ConcretePath, i: usize, lmax: usize) -> Result<WindowVerdict> {
    if lmax == 0 {
        return Err(Error::Invalid("lmax must be at least 1".into()));
    }
    if !path.is_lasso() && i + lmax > path.len() {
        return Err(Error::OutOfRange {
            index: i + lmax,
            len: path.len(),
        });
    }
    let mut sums = Vec::new();
    let mut sum = 0i64;
    for j in 1..=lmax {
        sum += path.weight_at(arena, i + j - 1)?;
        sums.push(sum);
        if sum >= 0 {
            return Ok(WindowVerdict {
                position: i,
                closed_at: Some(j),
                sums,
            });
        }
    }
    Ok(WindowVerdict {
        position: i,
        closed_at: None,
        sums,
    })
}

/// A concrete witness of a window violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Start of the open window.
    pub position: usize,
    /// Finite concrete path from `q_I` through the end of the open window.
    pub path: ConcretePath,
}

/// Result of [`check_lasso`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoVerdict {
    pub member: bool,
    pub witness: Option<Violation>,
}

/// The unrolled belief-annotated graph of a lasso.
#[derive(Clone, Debug)]
pub struct TimeGraph {
    n: usize,
    beliefs: Vec<StateSet>,
    actions: Vec<usize>,
    loop_time: usize,
    live: Vec<bool>,
}

impl TimeGraph {
    pub fn new(arena: &Arena, lasso: &AbstractLasso) -> Result<TimeGraph> {
        arena.check_lasso(lasso)?;
        let n = arena.num_states();
        let mut beliefs = Vec::new();
        let mut actions = Vec::new();
        let mut seen: HashMap<(usize, StateSet), usize> = HashMap::new();
        let mut belief = StateSet::singleton(n, arena.initial());
        let mut i = 0;
        let loop_time = loop {
            let pos = lasso.position(i);
            if pos >= lasso.prefix.len() {
                if let Some(&s) = seen.get(&(pos, belief.clone())) {
                    break s;
                }
                seen.insert((pos, belief.clone()), i);
            }
            let a = lasso.action(i);
            let next = arena
                .post(&belief, a)
                .intersection(&arena.observation_set(lasso.observation(i + 1)));
            beliefs.push(belief);
            actions.push(a);
            belief = next;
            i += 1;
        };
        let mut g = TimeGraph {
            n,
            beliefs,
            actions,
            loop_time,
            live: Vec::new(),
        };
        g.compute_live(arena);
        Ok(g)
    }

    /// Number of distinct times.
    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    pub fn loop_time(&self) -> usize {
        self.loop_time
    }

    pub fn next(&self, t: usize) -> usize {
        if t + 1 < self.len() {
            t + 1
        } else {
            self.loop_time
        }
    }

    /// Time of step `i` of the infinite play.
    pub fn time_of_step(&self, i: usize) -> usize {
        if i < self.len() {
            i
        } else {
            let period = self.len() - self.loop_time;
            self.loop_time + (i - self.loop_time) % period
        }
    }

    pub fn belief(&self, t: usize) -> &StateSet {
        &self.beliefs[t]
    }

    pub fn action(&self, t: usize) -> usize {
        self.actions[t]
    }

    pub fn node(&self, t: usize, q: usize) -> usize {
        t * self.n + q
    }

    pub fn num_nodes(&self) -> usize {
        self.len() * self.n
    }

    /// Has `(t, q)` an infinite continuation (i.e. lies on an infinite
    /// concretization)?
    pub fn is_live(&self, t: usize, q: usize) -> bool {
        self.live[self.node(t, q)]
    }

    /// Successors `(q', w)` of `(t, q)` inside the beliefs.
    pub fn successors<'a>(&'a self, arena: &'a Arena, t: usize, q: usize) -> impl Iterator<Item = (usize, i64)> + 'a {
        let next = self.next(t);
        arena
            .successors(q, self.actions[t])
            .iter()
            .copied()
            .filter(move |&(q2, _)| self.beliefs[next].contains(q2))
    }

    /// Successors restricted to live nodes.
    pub fn live_successors<'a>(&'a self, arena: &'a Arena, t: usize, q: usize) -> impl Iterator<Item = (usize, i64)> + 'a {
        let next = self.next(t);
        self.successors(arena, t, q)
            .filter(move |&(q2, _)| self.live[self.node(next, q2)])
    }

    fn compute_live(&mut self, arena: &Arena) {
        let total = self.num_nodes();
        let mut present = vec![false; total];
        let mut out_count = vec![0usize; total];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); total];
        for t in 0..self.len() {
            for q in self.beliefs[t].iter() {
                let v = self.node(t, q);
                present[v] = true;
                let next = self.next(t);
                for (q2, _) in self.successors(arena, t, q) {
                    out_count[v] += 1;
                    preds[self.node(next, q2)].push(v);
                }
            }
        }
        let mut live = present.clone();
        let mut queue: VecDeque<usize> = (0..total).filter(|&v| present[v] && out_count[v] == 0).collect();
        for &v in &queue {
            live[v] = false;
        }
        while let Some(v) = queue.pop_front() {
            for &p in &preds[v] {
                if live[p] {
                    out_count[p] -= 1;
                    if out_count[p] == 0 {
                        live[p] = false;
                        queue.push_back(p);
                    }
                }
            }
        }
        self.live = live;
    }

    fn path_of(&self, nodes: &[(usize, usize)]) -> ConcretePath {
        ConcretePath {
            states: nodes.iter().map(|&(_, q)| q).collect(),
            actions: nodes[..nodes.len() - 1].iter().map(|&(t, _)| self.actions[t]).collect(),
            loop_start: None,
        }
    }

    /// Shortest path of `(time, state)` nodes from `(0, q_I)` to `(t, q)`.
    fn path_to(&self, arena: &Arena, t: usize, q: usize) -> Vec<(usize, usize)> {
        let start = (0, arena.initial());
        let mut parent: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut queue = VecDeque::from([start]);
        let mut seen = HashSet::from([start]);
        while let Some((t0, q0)) = queue.pop_front() {
            if (t0, q0) == (t, q) {
                break;
            }
            for (q1, _) in self.successors(arena, t0, q0) {
                let nxt = (self.next(t0), q1);
                if seen.insert(nxt) {
                    parent.insert(nxt, (t0, q0));
                    queue.push_back(nxt);
                }
            }
        }
        let mut path = vec![(t, q)];
        let mut cur = (t, q);
        while cur != start {
            cur = parent[&cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

/// Search for a path of exactly `lmax` edges whose prefix sums are all
/// negative. `adj` lists `(target, weight)` per node; only nodes with
/// `valid[v]` are considered. Returns the start node and the edge sequence.
pub(crate) fn open_window_search(
    adj: &[Vec<(usize, i64)>],
    valid: &[bool],
    lmax: usize,
) -> Option<(usize, Vec<(usize, i64)>)> {
    const INF: i64 = i64::MAX;
    let n = adj.len();
    let mut layers: Vec<Vec<i64>> = vec![vec![0; n]];
    for _ in 1..=lmax {
        let prev = layers.last().unwrap();
        let mut cur = vec![INF; n];
        for v in 0..n {
            if !valid[v] {
                continue;
            }
            for &(u, w) in &adj[v] {
                if !valid[u] || prev[u] == INF {
                    continue;
                }
                let val = w.max(w + prev[u]);
                if val < cur[v] {
                    cur[v] = val;
                }
            }
        }
        layers.push(cur);
    }
    let start = (0..n).find(|&v| valid[v] && layers[lmax][v] < 0)?;
    let mut edges = Vec::new();
    let mut v = start;
    for l in (1..=lmax).rev() {
        let target = layers[l][v];
        let &(u, w) = adj[v]
            .iter()
            .find(|&&(u, w)| valid[u] && layers[l - 1][u] != INF && w.max(w + layers[l - 1][u]) == target)
            .expect("argmin exists");
        edges.push((u, w));
        v = u;
    }
    Some((start, edges))
}

fn dirfix_violation(arena: &Arena, g: &TimeGraph, lmax: usize) -> Option<Violation> {
    let total = g.num_nodes();
    let mut adj = vec![Vec::new(); total];
    let mut valid = vec![false; total];
    for t in 0..g.len() {
        for q in g.belief(t).iter() {
            let v = g.node(t, q);
            if !g.live[v] {
                continue;
            }
            valid[v] = true;
            adj[v] = g
                .live_successors(arena, t, q)
                .map(|(q2, w)| (g.node(g.next(t), q2), w))
                .collect();
        }
    }
    let (start, edges) = open_window_search(&adj, &valid, lmax)?;
    let (t0, q0) = (start / g.n, start % g.n);
    let mut nodes = g.path_to(arena, t0, q0);
    let position = nodes.len() - 1;
    for (u, _) in edges {
        nodes.push((u / g.n, u % g.n));
    }
    Some(Violation {
        position,
        path: g.path_of(&nodes),
    })
}

/// Open-window tracker: entry `k` is the running sum of the window opened
/// `k + 1` steps ago, if it is still open.
pub(crate) type Tracker = Vec<Option<i64>>;

/// Advances a tracker over an edge of weight `w`; the flag reports that a
/// window of length `lmax` has just stayed open throughout.
pub(crate) fn step_tracker(tr: &[Option<i64>], w: i64, lmax: usize) -> (Tracker, bool) {
    let violation = if lmax == 1 {
        w < 0
    } else {
        matches!(tr[lmax - 2], Some(s) if s + w < 0)
    };
    let mut next = vec![None; lmax - 1];
    if lmax > 1 {
        next[0] = (w < 0).then_some(w);
        for k in 1..lmax - 1 {
            next[k] = tr[k - 1].map(|s| s + w).filter(|&s| s < 0);
        }
    }
    (next, violation)
}

struct WindowProduct {
    nodes: IndexSet<(usize, usize, Tracker)>,
    adj: Vec<Vec<(usize, bool)>>,
    parent: Vec<Option<usize>>,
}

fn window_product(arena: &Arena, g: &TimeGraph, lmax: usize, limits: &Limits) -> Result<WindowProduct> {
    let mut nodes = IndexSet::new();
    let mut adj: Vec<Vec<(usize, bool)>> = Vec::new();
    let mut parent = Vec::new();
    let q0 = arena.initial();
    if !g.is_live(0, q0) {
        return Ok(WindowProduct { nodes, adj, parent });
    }
    nodes.insert((0, q0, vec![None; lmax - 1]));
    parent.push(None);
    let mut i = 0;
    while i < nodes.len() {
        let (t, q, tr) = nodes.get_index(i).unwrap().clone();
        let mut out = Vec::new();
        for (q2, w) in g.live_successors(arena, t, q) {
            let (tr2, viol) = step_tracker(&tr, w, lmax);
            let (j, fresh) = nodes.insert_full((g.next(t), q2, tr2));
            if fresh {
                parent.push(Some(i));
                limits.check("window product nodes", nodes.len())?;
            }
            out.push((j, viol));
        }
        adj.push(out);
        i += 1;
    }
    Ok(WindowProduct { nodes, adj, parent })
}

/// Tarjan's algorithm, iterative. Returns the component index of every node
/// (components numbered in reverse topological order).
pub(crate) fn scc<F, I>(n: usize, succ: F) -> Vec<usize>
where
    F: Fn(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0; n];
    let mut comp = vec![UNSET; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, succ(root).into_iter().collect(), 0));
        while let Some((v, children, pos)) = call.last_mut() {
            let v = *v;
            if *pos < children.len() {
                let w = children[*pos];
                *pos += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succ(w).into_iter().collect(), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some((p, _, _)) = call.last() {
                    low[*p] = low[*p].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Nodes that lie on some cycle.
pub(crate) fn cyclic_nodes<F, I>(n: usize, succ: F) -> Vec<bool>
where
    F: Fn(usize) -> I + Copy,
    I: IntoIterator<Item = usize>,
{
    let comp = scc(n, succ);
    let mut size = HashMap::new();
    for &c in &comp {
        *size.entry(c).or_insert(0usize) += 1;
    }
    (0..n)
        .map(|v| size[&comp[v]] > 1 || succ(v).into_iter().any(|u| u == v))
        .collect()
}

fn product_witness(g: &TimeGraph, prod: &WindowProduct, src: usize, dst: usize, lmax: usize) -> Violation {
    let mut chain = vec![dst, src];
    let mut cur = src;
    while let Some(p) = prod.parent[cur] {
        chain.push(p);
        cur = p;
    }
    chain.reverse();
    let nodes: Vec<(usize, usize)> = chain
        .iter()
        .map(|&i| {
            let (t, q, _) = prod.nodes.get_index(i).unwrap();
            (*t, *q)
        })
        .collect();
    let path = g.path_of(&nodes);
    Violation {
        position: path.len() - lmax,
        path,
    }
}

/// Decides membership of an abstract lasso in DirFix, UFix or Fix at
/// threshold 0, returning a violation witness when it is not a member.
pub fn check_lasso(arena: &Arena, lasso: &AbstractLasso, objective: &Objective) -> Result<LassoVerdict> {
    check_lasso_with_limits(arena, lasso, objective, &Limits::default())
}

pub fn check_lasso_with_limits(
    arena: &Arena,
    lasso: &AbstractLasso,
    objective: &Objective,
    limits: &Limits,
) -> Result<LassoVerdict> {
    let lmax = objective.solvable_lmax()?;
    let g = TimeGraph::new(arena, lasso)?;
    let witness = match objective.kind {
        ObjectiveKind::DirFix => dirfix_violation(arena, &g, lmax),
        ObjectiveKind::Fix => {
            let prod = window_product(arena, &g, lmax, limits)?;
            let comp = scc(prod.adj.len(), |v| prod.adj[v].iter().map(|&(u, _)| u).collect::<Vec<_>>());
            let mut found = None;
            'outer: for (v, out) in prod.adj.iter().enumerate() {
                for &(u, viol) in out {
                    if viol && comp[u] == comp[v] {
                        found = Some(product_witness(&g, &prod, v, u, lmax));
                        break 'outer;
                    }
                }
            }
            found
        }
        ObjectiveKind::UFix => {
            let prod = window_product(arena, &g, lmax, limits)?;
            let n = prod.adj.len();
            let cyclic = cyclic_nodes(n, |v| prod.adj[v].iter().map(|&(u, _)| u).collect::<Vec<_>>());
            let mut after_cycle = cyclic.clone();
            let mut queue: VecDeque<usize> = (0..n).filter(|&v| cyclic[v]).collect();
            while let Some(v) = queue.pop_front() {
                for &(u, _) in &prod.adj[v] {
                    if !after_cycle[u] {
                        after_cycle[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            let mut found = None;
            'outer: for (v, out) in prod.adj.iter().enumerate() {
                if !after_cycle[v] {
                    continue;
                }
                for &(u, viol) in out {
                    if viol {
                        found = Some(product_witness(&g, &prod, v, u, lmax));
                        break 'outer;
                    }
                }
            }
            found
        }
        _ => unreachable!("solvable_lmax rejects other kinds"),
    };
    Ok(LassoVerdict {
        member: witness.is_none(),
        witness,
    })
}

/// Phase of the violating path tracked by [`ufix_by_merging`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Phase {
    Free,
    Open(usize, i64),
    Violated,
    Merged,
}

/// Alternative UFix decision procedure: search for an infinite
/// concretization that infinitely often merges with a finite path that has
/// just completed an open window of length `lmax`. Returns membership.
pub fn ufix_by_merging(arena: &Arena, lasso: &AbstractLasso, lmax: usize) -> Result<bool> {
    if lmax == 0 {
        return Err(Error::Invalid("lmax must be at least 1".into()));
    }
    let g = TimeGraph::new(arena, lasso)?;
    let q0 = arena.initial();
    if !g.is_live(0, q0) {
        return Ok(true);
    }
    let mut nodes: IndexSet<(usize, usize, usize, Phase)> = IndexSet::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    nodes.insert((0, q0, q0, Phase::Free));
    let mut i = 0;
    while i < nodes.len() {
        let (t, p, c, phase) = *nodes.get_index(i).unwrap();
        let sources: Vec<(usize, Phase)> = if phase == Phase::Merged {
            g.belief(t).iter().map(|c| (c, Phase::Free)).collect()
        } else {
            vec![(c, phase)]
        };
        let t2 = g.next(t);
        let mut out = Vec::new();
        for (p2, _) in g.live_successors(arena, t, p) {
            for &(c, phase) in &sources {
                for (c2, w) in g.successors(arena, t, c) {
                    let mut phases = Vec::new();
                    match phase {
                        Phase::Free => {
                            phases.push(Phase::Free);
                            if w < 0 {
                                phases.push(if lmax == 1 { Phase::Violated } else { Phase::Open(1, w) });
                            }
                        }
                        Phase::Open(age, sum) => {
                            if sum + w < 0 {
                                phases.push(if age + 1 == lmax {
                                    Phase::Violated
                                } else {
                                    Phase::Open(age + 1, sum + w)
                                });
                            }
                        }
                        Phase::Violated => phases.push(Phase::Violated),
                        Phase::Merged => unreachable!(),
                    }
                    for ph in phases {
                        let ph = if ph == Phase::Violated && c2 == p2 { Phase::Merged } else { ph };
                        let (j, _) = nodes.insert_full((t2, p2, c2, ph));
                        out.push(j);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        adj.push(out);
        i += 1;
    }
    let comp = scc(adj.len(), |v| adj[v].clone());
    let mut size = HashMap::new();
    for &c in &comp {
        *size.entry(c).or_insert(0usize) += 1;
    }
    let accepting_cycle = (0..adj.len()).any(|v| {
        nodes.get_index(v).unwrap().3 == Phase::Merged && (size[&comp[v]] > 1 || adj[v].contains(&v))
    });
    Ok(!accepting_cycle)
}

/// Positions `j < horizon` at which some infinite concretization of the
/// lasso fails the good-window property. Computed layer by layer on the
/// step-indexed unrolling; used as an independent reference.
pub fn violation_positions(arena: &Arena, lasso: &AbstractLasso, lmax: usize, horizon: usize) -> Result<Vec<usize>> {
    let g = TimeGraph::new(arena, lasso)?;
    let mut out = Vec::new();
    let mut reach: Vec<StateSet> = vec![StateSet::singleton(arena.num_states(), arena.initial())];
    for i in 0..horizon {
        let t = g.time_of_step(i);
        let mut next = arena.empty_set();
        for q in reach[i].iter() {
            for (q2, _) in g.successors(arena, t, q) {
                next.insert(q2);
            }
        }
        reach.push(next);
    }
    for j in 0..horizon {
        // frontier: (state, running sum) pairs with all prefix sums negative
        let mut frontier: HashSet<(usize, i64)> = reach[j]
            .iter()
            .filter(|&q| g.is_live(g.time_of_step(j), q))
            .map(|q| (q, 0))
            .collect();
        for k in 0..lmax {
            let t = g.time_of_step(j + k);
            let mut nxt = HashSet::new();
            for &(q, s) in &frontier {
                for (q2, w) in g.live_successors(arena, t, q) {
                    if s + w < 0 {
                        nxt.insert((q2, s + w));
                    }
                }
            }
            frontier = nxt;
        }
        if !frontier.is_empty() {
            out.push(j);
        }
    }
    Ok(out)
}

/// The product of an arena with a Moore strategy: nodes are reachable
/// `(state, memory)` pairs, node 0 is `(q_I, m_0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyGraph {
    pub nodes: Vec<(usize, usize)>,
    /// `(target, weight, action)` per node.
    pub edges: Vec<Vec<(usize, i64, usize)>>,
}

impl StrategyGraph {
    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn node_index(&self, q: usize, m: usize) -> Option<usize> {
        self.nodes.iter().position(|&n| n == (q, m))
    }

    fn weighted_adj(&self) -> Vec<Vec<(usize, i64)>> {
        self.edges
            .iter()
            .map(|out| out.iter().map(|&(u, w, _)| (u, w)).collect())
            .collect()
    }
}

pub fn strategy_product(arena: &Arena, strategy: &MooreStrategy) -> StrategyGraph {
    let mut index: IndexSet<(usize, usize)> = IndexSet::new();
    index.insert((arena.initial(), strategy.initial_memory));
    let mut edges = Vec::new();
    let mut i = 0;
    while i < index.len() {
        let (q, m) = *index.get_index(i).unwrap();
        let o = arena.obs_of(q);
        let a = strategy.output[m][o];
        let m2 = strategy.update[m][o];
        let mut out = Vec::new();
        for &(q2, w) in arena.successors(q, a) {
            let (j, _) = index.insert_full((q2, m2));
            out.push((j, w, a));
        }
        edges.push(out);
        i += 1;
    }
    StrategyGraph {
        nodes: index.into_iter().collect(),
        edges,
    }
}

/// Minimum mean weight over all cycles (Karp), with a cycle attaining it.
pub fn min_mean_cycle(graph: &StrategyGraph) -> Option<(Rational64, Vec<usize>)> {
    let n = graph.nodes.len();
    const INF: i64 = i64::MAX;
    let mut d = vec![vec![INF; n]; n + 1];
    d[0] = vec![0; n];
    for k in 1..=n {
        for v in 0..n {
            if d[k - 1][v] == INF {
                continue;
            }
            for &(u, w, _) in &graph.edges[v] {
                let val = d[k - 1][v] + w;
                if val < d[k][u] {
                    d[k][u] = val;
                }
            }
        }
    }
    let mut best: Option<Rational64> = None;
    for v in 0..n {
        if d[n][v] == INF {
            continue;
        }
        let mut worst: Option<Rational64> = None;
        for k in 0..n {
            if d[k][v] == INF {
                continue;
            }
            let r = Rational64::new(d[n][v] - d[k][v], (n - k) as i64);
            worst = Some(worst.map_or(r, |x| x.max(r)));
        }
        if let Some(r) = worst {
            best = Some(best.map_or(r, |x| x.min(r)));
        }
    }
    let mean = best?;
    // Reweight so the minimum cycle mean is 0, compute potentials, then any
    // cycle of tight edges has mean exactly `mean`.
    let (num, den) = (*mean.numer(), *mean.denom());
    let mut pot = vec![0i64; n];
    for _ in 0..n {
        let mut changed = false;
        for v in 0..n {
            for &(u, w, _) in &graph.edges[v] {
                let val = pot[v] + w * den - num;
                if val < pot[u] {
                    pot[u] = val;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let tight: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            graph.edges[v]
                .iter()
                .filter(|&&(u, w, _)| pot[v] + w * den - num == pot[u])
                .map(|&(u, _, _)| u)
                .collect()
        })
        .collect();
    let cyc = cyclic_nodes(n, |v| tight[v].clone());
    let start = (0..n).find(|&v| cyc[v])?;
    // walk tight edges inside the cyclic part until a node repeats
    let comp = scc(n, |v| tight[v].clone());
    let mut path = vec![start];
    let mut pos = HashMap::from([(start, 0usize)]);
    let mut v = start;
    loop {
        let u = *tight[v].iter().find(|&&u| comp[u] == comp[start]).expect("cycle continues");
        if let Some(&k) = pos.get(&u) {
            return Some((mean, path[k..].to_vec()));
        }
        pos.insert(u, path.len());
        path.push(u);
        v = u;
    }
}

/// Outcome of [`verify_mp_strategy`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MpVerdict {
    /// Every cycle has mean at least `epsilon`; the strategy wins the direct
    /// fixed window objective with window bound `mu`.
    Certified { mu: u64, min_cycle_mean: Rational64 },
    /// A reachable cycle (product nodes) with mean below `epsilon`.
    Refuted { cycle: Vec<usize>, mean: Rational64 },
}

/// Checks that every cycle of the strategy product has mean at least
/// `epsilon` and, if so, returns the window bound
/// `ceil(W * (|M||Q|)^2 / epsilon)`.
pub fn verify_mp_strategy(arena: &Arena, strategy: &MooreStrategy, epsilon: Rational64) -> Result<MpVerdict> {
    if epsilon <= Rational64::new(0, 1) {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    let graph = strategy_product(arena, strategy);
    let (mean, cycle) = min_mean_cycle(&graph).expect("total arenas have cycles");
    if mean < epsilon {
        return Ok(MpVerdict::Refuted { cycle, mean });
    }
    let size = (strategy.memory_size() * arena.num_states()) as i64;
    let bound = Rational64::from_integer(arena.max_abs_weight() * size * size) / epsilon;
    let mu = bound.ceil().to_integer().max(1) as u64;
    Ok(MpVerdict::Certified {
        mu,
        min_cycle_mean: mean,
    })
}

/// Does every play consistent with the strategy satisfy DirFix(lmax)? On
/// failure returns the product nodes of an open window (start node first).
pub fn strategy_dirfix_violation(graph: &StrategyGraph, lmax: usize) -> Option<Vec<usize>> {
    let adj = graph.weighted_adj();
    let valid = vec![true; adj.len()];
    let (start, edges) = open_window_search(&adj, &valid, lmax)?;
    let mut nodes = vec![start];
    nodes.extend(edges.into_iter().map(|(u, _)| u));
    Some(nodes)
}

/// Is the lasso consistent with the strategy?
pub fn lasso_consistent(strategy: &MooreStrategy, lasso: &AbstractLasso) -> bool {
    let mut m = strategy.initial_memory;
    let mut seen = HashSet::new();
    let mut i = 0;
    loop {
        let pos = lasso.position(i);
        if pos >= lasso.prefix.len() && !seen.insert((pos, m)) {
            return true;
        }
        let (o, a) = lasso.letter_at(pos);
        if strategy.output[m][o] != a {
            return false;
        }
        m = strategy.update[m][o];
        i += 1;
    }
}

/// Legal lassos consistent with the strategy, with `|prefix| + |cycle|`
/// at most `max_len`.
pub fn consistent_lassos(arena: &Arena, strategy: &MooreStrategy, max_len: usize) -> Vec<AbstractLasso> {
    let mut words = Vec::new();
    let mut stack = vec![(
        Vec::new(),
        StateSet::singleton(arena.num_states(), arena.initial()),
        arena.initial_observation(),
        strategy.initial_memory,
    )];
    while let Some((word, belief, o, m)) = stack.pop() {
        if word.len() == max_len {
            continue;
        }
        let a = strategy.output[m][o];
        let m2 = strategy.update[m][o];
        let mut w: Vec<(usize, usize)> = word;
        w.push((o, a));
        words.push(w.clone());
        let post = arena.post(&belief, a);
        for o2 in 0..arena.num_observations() {
            let next = post.intersection(&arena.observation_set(o2));
            if !next.is_empty() {
                stack.push((w.clone(), next, o2, m2));
            }
        }
    }
    let mut out = Vec::new();
    for w in words {
        for p in 0..w.len() {
            let lasso = AbstractLasso::new(w[..p].to_vec(), w[p..].to_vec());
            if arena.check_lasso(&lasso).is_ok() && lasso_consistent(strategy, &lasso) {
                out.push(lasso);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn lasso(arena: &Arena, text: &str) -> AbstractLasso {
        arena.parse_lasso(text).unwrap()
    }

    #[test]
    fn good_window_examples() {
        let one = fixtures::single_state(0);
        let p = ConcretePath::lasso(&one, vec![0, 0], vec![0], 0).unwrap();
        assert_eq!(good_window(&one, &p, 5, 1).unwrap().closed_at, Some(1));

        let fig2 = fixtures::fig2();
        let p = ConcretePath::lasso(&fig2, vec![0, 1, 1], vec![0, 0], 1).unwrap();
        let v = good_window(&fig2, &p, 0, 3).unwrap();
        assert_eq!(v.closed_at, None);
        assert_eq!(v.sums, vec![-1, -1, -1]);

        let fig3 = fixtures::fig3();
        let p = ConcretePath::lasso(&fig3, vec![0, 1, 0], vec![0, 0], 0).unwrap();
        assert_eq!(good_window(&fig3, &p, 0, 2).unwrap().closed_at, Some(2));
        let short = ConcretePath::finite(&fig3, vec![0, 1], vec![0]).unwrap();
        assert!(good_window(&fig3, &short, 0, 2).is_err());
    }

    #[test]
    fn fig2_lasso_memberships() {
        let fig2 = fixtures::fig2();
        let l = lasso(&fig2, "| {q0,q1} a");
        assert!(check_lasso(&fig2, &l, &Objective::fix(2)).unwrap().member);
        let u = check_lasso(&fig2, &l, &Objective::ufix(2)).unwrap();
        assert!(!u.member);
        assert!(u.witness.is_some());
        let d = check_lasso(&fig2, &l, &Objective::dirfix(2)).unwrap();
        assert!(!d.member);
        let w = d.witness.unwrap();
        assert_eq!(w.path.len(), w.position + 2);
        assert!(!ufix_by_merging(&fig2, &l, 2).unwrap());
    }

    #[test]
    fn fig7_periodic_play_has_a_single_concretization() {
        // The lower branch never re-enters o_0, so the only infinite
        // concretization is the all-zero upper cycle.
        let f7 = fixtures::fig7(4);
        let l = fixtures::fig7_lasso(&f7);
        for obj in [Objective::dirfix(2), Objective::ufix(2), Objective::fix(2)] {
            assert!(check_lasso(&f7, &l, &obj).unwrap().member, "{obj:?}");
        }
        assert!(ufix_by_merging(&f7, &l, 2).unwrap());
    }

    #[test]
    fn fig3_lasso_examples() {
        let fig3 = fixtures::fig3();
        let l = lasso(&fig3, "| q0 a q1 a q1 a");
        for obj in [Objective::dirfix(2), Objective::ufix(2), Objective::fix(2)] {
            assert!(!check_lasso(&fig3, &l, &obj).unwrap().member);
        }
        // a single violation at the start: only the direct objective fails
        let stay = lasso(&fig3, "q0 a | q1 a");
        assert!(!check_lasso(&fig3, &stay, &Objective::dirfix(2)).unwrap().member);
        assert!(check_lasso(&fig3, &stay, &Objective::ufix(2)).unwrap().member);
        assert!(check_lasso(&fig3, &stay, &Objective::fix(2)).unwrap().member);
        let alt = lasso(&fig3, "| q0 a q1 a");
        assert!(check_lasso(&fig3, &alt, &Objective::fix(2)).unwrap().member);
        assert!(!check_lasso(&fig3, &alt, &Objective::fix(1)).unwrap().member);
    }

    #[test]
    fn bounded_window_kinds_are_undecidable() {
        let fig2 = fixtures::fig2();
        let l = lasso(&fig2, "| {q0,q1} a");
        let obj = Objective::unbounded(ObjectiveKind::UDirBnd).unwrap();
        assert!(matches!(check_lasso(&fig2, &l, &obj), Err(Error::Undecidable(_))));
    }

    #[test]
    fn strategy_product_examples() {
        let fig3 = fixtures::fig3();
        let g = strategy_product(&fig3, &MooreStrategy::constant(&fig3, 0));
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.num_edges(), 3);
        let one = fixtures::single_state(1);
        let g = strategy_product(&one, &MooreStrategy::constant(&one, 0));
        assert_eq!(g.edges, vec![vec![(0, 1, 0)]]);
        let fig2 = fixtures::fig2();
        let g = strategy_product(&fig2, &MooreStrategy::constant(&fig2, 0));
        assert!(g.edges[0].iter().any(|&(u, w, _)| g.nodes[u].0 == 1 && w == -1));
    }

    #[test]
    fn verify_mp_examples() {
        let eps = Rational64::new(1, 1);
        let zero = fixtures::single_state(0);
        assert!(matches!(
            verify_mp_strategy(&zero, &MooreStrategy::constant(&zero, 0), eps).unwrap(),
            MpVerdict::Refuted { .. }
        ));
        let one = fixtures::single_state(1);
        assert_eq!(
            verify_mp_strategy(&one, &MooreStrategy::constant(&one, 0), eps).unwrap(),
            MpVerdict::Certified {
                mu: 1,
                min_cycle_mean: eps
            }
        );
        let fig3 = fixtures::fig3();
        match verify_mp_strategy(&fig3, &MooreStrategy::constant(&fig3, 0), Rational64::new(1, 100)).unwrap() {
            MpVerdict::Refuted { cycle, mean } => {
                assert_eq!(mean, Rational64::new(0, 1));
                assert!(!cycle.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn consistent_lassos_follow_the_strategy() {
        let fig3 = fixtures::fig3();
        let s = MooreStrategy::constant(&fig3, 0);
        let ls = consistent_lassos(&fig3, &s, 3);
        assert!(!ls.is_empty());
        assert!(ls.iter().all(|l| lasso_consistent(&s, l)));
    }
}
