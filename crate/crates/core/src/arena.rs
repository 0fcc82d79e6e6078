//! Weighted game arenas with partial observation.
//!
//! States and actions are arbitrary tokens; internally they are indexed in
//! lexicographic order of their names so that every iteration (and thus
//! every solver run) is reproducible.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use fixedbitset::FixedBitSet;
use num_rational::Rational64;

use crate::{Error, Result};

/// A set of arena states, stored as a fixed-capacity bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    pub fn empty(capacity: usize) -> Self {
        StateSet(FixedBitSet::with_capacity(capacity))
    }

    pub fn singleton(capacity: usize, q: usize) -> Self {
        let mut s = Self::empty(capacity);
        s.insert(q);
        s
    }

    pub fn from_states(capacity: usize, states: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(capacity);
        for q in states {
            s.insert(q);
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, q: usize) {
        self.0.insert(q);
    }

    pub fn remove(&mut self, q: usize) {
        self.0.set(q, false);
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0.contains(q)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let mut s = self.0.clone();
        s.intersect_with(&other.0);
        StateSet(s)
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut s = self.0.clone();
        s.union_with(&other.0);
        StateSet(s)
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        let mut s = self.0.clone();
        s.difference_with(&other.0);
        StateSet(s)
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &StateSet) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

/// One transition `(source, action, weight, target)` by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: usize,
    pub action: usize,
    pub weight: i64,
    pub target: usize,
}

/// A weighted game arena with partial observation.
///
/// Invariants (checked by [`Arena::new`]): the transition relation is total,
/// observations partition the states, the initial block is `{q_I}` unless the
/// arena is blind, identifiers are unique and there are no parallel edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arena {
    state_names: Vec<String>,
    action_names: Vec<String>,
    initial: usize,
    observations: Vec<Vec<usize>>,
    obs_of: Vec<usize>,
    succ: Vec<Vec<Vec<(usize, i64)>>>,
    pred: Vec<Vec<Vec<(usize, i64)>>>,
    max_abs_weight: i64,
    /// Factor by which weights were scaled relative to the model they encode
    /// (1 for ordinary arenas).
    weight_scale: i64,
}

impl Arena {
    /// Builds and validates an arena from named components.
    pub fn new(
        states: &[&str],
        initial: &str,
        actions: &[&str],
        observations: &[Vec<&str>],
        transitions: &[(&str, &str, i64, &str)],
    ) -> Result<Arena> {
        let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let actions: Vec<String> = actions.iter().map(|s| s.to_string()).collect();
        let observations: Vec<Vec<String>> = observations
            .iter()
            .map(|b| b.iter().map(|s| s.to_string()).collect())
            .collect();
        let transitions: Vec<(String, String, i64, String)> = transitions
            .iter()
            .map(|(p, a, w, q)| (p.to_string(), a.to_string(), *w, q.to_string()))
            .collect();
        Self::from_parts(states, initial.to_string(), actions, observations, transitions)
    }

    pub(crate) fn from_parts(
        states: Vec<String>,
        initial: String,
        actions: Vec<String>,
        observations: Vec<Vec<String>>,
        transitions: Vec<(String, String, i64, String)>,
    ) -> Result<Arena> {
        let state_names = sorted_unique(states)?;
        let action_names = sorted_unique(actions)?;
        if state_names.is_empty() {
            return Err(Error::Invalid("arena has no states".into()));
        }
        if action_names.is_empty() {
            return Err(Error::Invalid("arena has no actions".into()));
        }
        let state_index = |name: &str| -> Result<usize> {
            state_names
                .binary_search_by(|s| s.as_str().cmp(name))
                .map_err(|_| Error::Unknown(name.to_string()))
        };
        let action_index = |name: &str| -> Result<usize> {
            action_names
                .binary_search_by(|s| s.as_str().cmp(name))
                .map_err(|_| Error::Unknown(name.to_string()))
        };
        let n = state_names.len();
        let initial = state_index(&initial)?;

        let mut obs_of = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for block in &observations {
            if block.is_empty() {
                return Err(Error::NotPartition("empty observation block".into()));
            }
            let mut b = Vec::new();
            for name in block {
                let q = state_index(name)?;
                if obs_of[q] != usize::MAX {
                    return Err(Error::NotPartition(format!(
                        "state `{name}` occurs in more than one block"
                    )));
                }
                obs_of[q] = 0;
                b.push(q);
            }
            b.sort_unstable();
            blocks.push(b);
        }
        if let Some(q) = obs_of.iter().position(|&o| o == usize::MAX) {
            return Err(Error::NotPartition(format!(
                "state `{}` is in no block",
                state_names[q]
            )));
        }
        blocks.sort_by_key(|b| b[0]);
        for (o, b) in blocks.iter().enumerate() {
            for &q in b {
                obs_of[q] = o;
            }
        }
        // Blind arenas are accepted even though their single block is not {q_I}.
        if blocks.len() > 1 && blocks[obs_of[initial]].len() != 1 {
            return Err(Error::InitialNotSingleton);
        }

        let m = action_names.len();
        let mut succ = vec![vec![Vec::new(); m]; n];
        let mut pred = vec![vec![Vec::new(); m]; n];
        let mut seen = HashSet::new();
        let mut max_abs_weight = 0i64;
        for (p, a, w, q) in &transitions {
            let (pi, ai, qi) = (state_index(p)?, action_index(a)?, state_index(q)?);
            if !seen.insert((pi, ai, qi)) {
                return Err(Error::ParallelEdge(format!("{p} {a} {q}")));
            }
            let abs = w
                .checked_abs()
                .ok_or_else(|| Error::Range(format!("weight {w}")))?;
            max_abs_weight = max_abs_weight.max(abs);
            succ[pi][ai].push((qi, *w));
            pred[qi][ai].push((pi, *w));
        }
        for (q, row) in succ.iter_mut().enumerate() {
            for (a, list) in row.iter_mut().enumerate() {
                if list.is_empty() {
                    return Err(Error::NotTotal {
                        state: state_names[q].clone(),
                        action: action_names[a].clone(),
                    });
                }
                list.sort_unstable();
            }
        }
        for row in pred.iter_mut() {
            for list in row.iter_mut() {
                list.sort_unstable();
            }
        }
        Ok(Arena {
            state_names,
            action_names,
            initial,
            observations: blocks,
            obs_of,
            succ,
            pred,
            max_abs_weight,
            weight_scale: 1,
        })
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.state_names[q]
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.action_names[a]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.binary_search_by(|s| s.as_str().cmp(name)).ok()
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_names.binary_search_by(|s| s.as_str().cmp(name)).ok()
    }

    /// The states of observation block `o`, ascending.
    pub fn observation(&self, o: usize) -> &[usize] {
        &self.observations[o]
    }

    pub fn observation_set(&self, o: usize) -> StateSet {
        StateSet::from_states(self.num_states(), self.observations[o].iter().copied())
    }

    pub fn obs_of(&self, q: usize) -> usize {
        self.obs_of[q]
    }

    pub fn initial_observation(&self) -> usize {
        self.obs_of[self.initial]
    }

    /// `W`, the largest absolute transition weight.
    pub fn max_abs_weight(&self) -> i64 {
        self.max_abs_weight
    }

    pub fn weight_scale(&self) -> i64 {
        self.weight_scale
    }

    pub(crate) fn with_weight_scale(mut self, scale: i64) -> Arena {
        self.weight_scale = scale;
        self
    }

    pub fn is_blind(&self) -> bool {
        self.observations.len() == 1
    }

    pub fn is_perfect_information(&self) -> bool {
        self.observations.iter().all(|b| b.len() == 1)
    }

    /// `(target, weight)` pairs of the `action`-successors of `q`.
    pub fn successors(&self, q: usize, action: usize) -> &[(usize, i64)] {
        &self.succ[q][action]
    }

    /// `(source, weight)` pairs of the `action`-predecessors of `q`.
    pub fn predecessors(&self, q: usize, action: usize) -> &[(usize, i64)] {
        &self.pred[q][action]
    }

    pub fn weight(&self, p: usize, action: usize, q: usize) -> Option<i64> {
        self.succ[p][action]
            .binary_search_by_key(&q, |&(t, _)| t)
            .ok()
            .map(|i| self.succ[p][action][i].1)
    }

    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.succ.iter().enumerate().flat_map(|(p, row)| {
            row.iter().enumerate().flat_map(move |(a, list)| {
                list.iter().map(move |&(q, w)| Transition {
                    source: p,
                    action: a,
                    weight: w,
                    target: q,
                })
            })
        })
    }

    pub fn state_set(&self) -> StateSet {
        StateSet::from_states(self.num_states(), 0..self.num_states())
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.num_states())
    }

    /// The `action`-successors of a set of states.
    pub fn post(&self, source: &StateSet, action: usize) -> StateSet {
        let mut out = self.empty_set();
        for p in source.iter() {
            for &(q, _) in &self.succ[p][action] {
                out.insert(q);
            }
        }
        out
    }

    /// Checked variant of [`Arena::post`] taking an action name.
    pub fn post_named(&self, source: &StateSet, action: &str) -> Result<StateSet> {
        let a = self
            .action_index(action)
            .ok_or_else(|| Error::Unknown(action.to_string()))?;
        Ok(self.post(source, a))
    }

    /// Replaces every weight `w` by `b*w - a`, so that threshold `a/b` on the
    /// original arena becomes threshold 0 on the result.
    pub fn rescale(&self, a: i64, b: i64) -> Result<Arena> {
        if b < 1 {
            return Err(Error::Invalid(format!("threshold denominator {b} must be >= 1")));
        }
        let map = |w: i64| -> Result<i64> {
            b.checked_mul(w)
                .and_then(|x| x.checked_sub(a))
                .filter(|x| x.checked_abs().is_some())
                .ok_or_else(|| Error::Range(format!("{b}*{w} - {a}")))
        };
        let mut out = self.clone();
        out.max_abs_weight = 0;
        for row in out.succ.iter_mut() {
            for list in row.iter_mut() {
                for (_, w) in list.iter_mut() {
                    *w = map(*w)?;
                    out.max_abs_weight = out.max_abs_weight.max(w.abs());
                }
            }
        }
        for row in out.pred.iter_mut() {
            for list in row.iter_mut() {
                for (_, w) in list.iter_mut() {
                    *w = map(*w)?;
                }
            }
        }
        Ok(out)
    }

    /// Checks that an abstract lasso starts in the initial observation and
    /// that every finite prefix has a concretization.
    pub fn check_lasso(&self, lasso: &AbstractLasso) -> Result<()> {
        if lasso.cycle.is_empty() {
            return Err(Error::IllegalPath("empty cycle".into()));
        }
        for &(o, a) in lasso.prefix.iter().chain(&lasso.cycle) {
            if o >= self.num_observations() || a >= self.num_actions() {
                return Err(Error::IllegalPath("letter out of range".into()));
            }
        }
        if lasso.observation(0) != self.initial_observation() {
            return Err(Error::IllegalPath(
                "first observation is not the initial block".into(),
            ));
        }
        let mut belief = StateSet::singleton(self.num_states(), self.initial);
        let mut seen = HashSet::new();
        let mut i = 0usize;
        loop {
            let pos = lasso.position(i);
            if pos >= lasso.prefix.len() && !seen.insert((pos, belief.clone())) {
                return Ok(());
            }
            let next = self
                .post(&belief, lasso.action(i))
                .intersection(&self.observation_set(lasso.observation(i + 1)));
            if next.is_empty() {
                return Err(Error::IllegalPath(format!(
                    "no concrete path reaches step {}",
                    i + 1
                )));
            }
            belief = next;
            i += 1;
        }
    }

    /// All concrete paths from `q_I` agreeing with a finite abstract path.
    /// Exponential in the length; for small oracles only.
    pub fn concretizations(&self, prefix: &AbstractPrefix) -> Vec<ConcretePath> {
        let mut out = Vec::new();
        if prefix.observations.is_empty()
            || self.obs_of(self.initial) != prefix.observations[0]
        {
            return out;
        }
        let mut stack = vec![ConcretePath::single(self.initial)];
        while let Some(path) = stack.pop() {
            let k = path.actions.len();
            if k == prefix.actions.len() {
                out.push(path);
                continue;
            }
            let last = *path.states.last().unwrap();
            let a = prefix.actions[k];
            for &(q, _) in self.successors(last, a).iter().rev() {
                if self.obs_of(q) == prefix.observations[k + 1] {
                    let mut next = path.clone();
                    next.actions.push(a);
                    next.states.push(q);
                    stack.push(next);
                }
            }
        }
        out.sort_by(|x, y| x.states.cmp(&y.states));
        out
    }

    /// Canonical `.wga` text.
    pub fn to_wga(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", self.state_names.join(" "));
        let _ = writeln!(out, "init: {}", self.state_names[self.initial]);
        let _ = writeln!(out, "alphabet: {}", self.action_names.join(" "));
        let blocks: Vec<String> = self
            .observations
            .iter()
            .map(|b| self.format_block(b))
            .collect();
        let _ = writeln!(out, "obs: {}", blocks.join(" "));
        for t in self.transitions() {
            let _ = writeln!(
                out,
                "trans: {} {} {} {}",
                self.state_names[t.source], self.action_names[t.action], t.weight, self.state_names[t.target]
            );
        }
        out
    }

    fn format_block(&self, block: &[usize]) -> String {
        let names: Vec<&str> = block.iter().map(|&q| self.state_names[q].as_str()).collect();
        format!("{{{}}}", names.join(" "))
    }

    /// Human-readable name of an observation block.
    pub fn observation_name(&self, o: usize) -> String {
        let names: Vec<&str> = self.observations[o]
            .iter()
            .map(|&q| self.state_names[q].as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    /// Graphviz rendering: one dashed cluster per observation block, edges
    /// labelled `action,weight`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph arena {\n  rankdir=LR;\n");
        let _ = writeln!(out, "  __init [shape=point];");
        for (o, block) in self.observations.iter().enumerate() {
            let _ = writeln!(out, "  subgraph cluster_obs{o} {{\n    style=dashed;");
            for &q in block {
                let _ = writeln!(out, "    \"{}\" [shape=circle];", self.state_names[q]);
            }
            let _ = writeln!(out, "  }}");
        }
        let _ = writeln!(out, "  __init -> \"{}\";", self.state_names[self.initial]);
        for t in self.transitions() {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{},{}\"];",
                self.state_names[t.source],
                self.state_names[t.target],
                self.action_names[t.action],
                t.weight
            );
        }
        out.push_str("}\n");
        out
    }

    /// Parses the line-oriented `.wga` format.
    pub fn parse(text: &str) -> Result<Arena> {
        let mut states: Option<Vec<String>> = None;
        let mut initial: Option<String> = None;
        let mut actions: Option<Vec<String>> = None;
        let mut obs: Option<Vec<Vec<String>>> = None;
        let mut trans = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| Error::Syntax {
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| syntax(format!("expected `key: value`, found `{line}`")))?;
            let value = value.trim();
            let once = |set: bool, key: &str| {
                if set {
                    Err(syntax(format!("duplicate `{key}` line")))
                } else {
                    Ok(())
                }
            };
            match key.trim() {
                "states" => {
                    once(states.is_some(), "states")?;
                    states = Some(value.split_whitespace().map(String::from).collect());
                }
                "init" => {
                    once(initial.is_some(), "init")?;
                    let toks: Vec<&str> = value.split_whitespace().collect();
                    if toks.len() != 1 {
                        return Err(syntax("`init` takes exactly one state".into()));
                    }
                    initial = Some(toks[0].to_string());
                }
                "alphabet" => {
                    once(actions.is_some(), "alphabet")?;
                    actions = Some(value.split_whitespace().map(String::from).collect());
                }
                "obs" => {
                    once(obs.is_some(), "obs")?;
                    obs = Some(parse_blocks(value).map_err(syntax)?);
                }
                "trans" => {
                    let toks: Vec<&str> = value.split_whitespace().collect();
                    if toks.len() != 4 {
                        return Err(syntax(
                            "`trans` expects `source action weight target`".into(),
                        ));
                    }
                    let w: i64 = toks[2]
                        .parse()
                        .map_err(|_| syntax(format!("invalid weight `{}`", toks[2])))?;
                    trans.push((toks[0].to_string(), toks[1].to_string(), w, toks[3].to_string()));
                }
                other => return Err(syntax(format!("unknown key `{other}`"))),
            }
        }
        let missing = |key: &str| Error::Syntax {
            line: text.lines().count().max(1),
            message: format!("missing `{key}` line"),
        };
        Arena::from_parts(
            states.ok_or_else(|| missing("states"))?,
            initial.ok_or_else(|| missing("init"))?,
            actions.ok_or_else(|| missing("alphabet"))?,
            obs.ok_or_else(|| missing("obs"))?,
            trans,
        )
    }

    /// Parses an inline lasso `prefix | cycle`, each side a sequence of
    /// `observation action` pairs. An observation is written either as a
    /// braced block `{q0,q1}` or as the name of any state of the block.
    pub fn parse_lasso(&self, text: &str) -> Result<AbstractLasso> {
        let (prefix, cycle) = text
            .split_once('|')
            .ok_or_else(|| Error::Syntax {
                line: 1,
                message: "lasso must have the form `prefix | cycle`".into(),
            })?;
        let side = |s: &str| -> Result<Vec<(usize, usize)>> {
            let toks = tokenize_lasso(s)?;
            if toks.len() % 2 != 0 {
                return Err(Error::Syntax {
                    line: 1,
                    message: "lasso tokens must come in `observation action` pairs".into(),
                });
            }
            toks.chunks(2)
                .map(|pair| Ok((self.parse_observation(&pair[0])?, self.parse_action(&pair[1])?)))
                .collect()
        };
        let lasso = AbstractLasso {
            prefix: side(prefix)?,
            cycle: side(cycle)?,
        };
        self.check_lasso(&lasso)?;
        Ok(lasso)
    }

    fn parse_action(&self, tok: &str) -> Result<usize> {
        self.action_index(tok)
            .ok_or_else(|| Error::Unknown(tok.to_string()))
    }

    fn parse_observation(&self, tok: &str) -> Result<usize> {
        if let Some(inner) = tok.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
            let mut qs = Vec::new();
            for name in inner.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
                qs.push(
                    self.state_index(name)
                        .ok_or_else(|| Error::Unknown(name.to_string()))?,
                );
            }
            qs.sort_unstable();
            qs.dedup();
            self.observations
                .iter()
                .position(|b| *b == qs)
                .ok_or_else(|| Error::Unknown(format!("observation {tok}")))
        } else {
            self.state_index(tok)
                .map(|q| self.obs_of(q))
                .ok_or_else(|| Error::Unknown(tok.to_string()))
        }
    }

    /// Renders a lasso in the syntax accepted by [`Arena::parse_lasso`].
    pub fn format_lasso(&self, lasso: &AbstractLasso) -> String {
        let side = |v: &[(usize, usize)]| -> String {
            v.iter()
                .map(|&(o, a)| {
                    format!("{} {}", self.observation_name(o), self.action_names[a])
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!("{} | {}", side(&lasso.prefix), side(&lasso.cycle))
    }
}

impl fmt::Display for Arena {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_wga())
    }
}

fn sorted_unique(names: Vec<String>) -> Result<Vec<String>> {
    let mut set = BTreeSet::new();
    for n in names {
        if !set.insert(n.clone()) {
            return Err(Error::Duplicate(n));
        }
    }
    Ok(set.into_iter().collect())
}

fn parse_blocks(value: &str) -> std::result::Result<Vec<Vec<String>>, String> {
    let mut blocks = Vec::new();
    let mut rest = value.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('{')
            .ok_or_else(|| format!("expected `{{` in observation list, found `{rest}`"))?;
        let end = body
            .find('}')
            .ok_or_else(|| "unterminated observation block".to_string())?;
        let block: Vec<String> = body[..end]
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        blocks.push(block);
        rest = body[end + 1..].trim_start();
    }
    Ok(blocks)
}

fn tokenize_lasso(s: &str) -> Result<Vec<String>> {
    let mut toks = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '{' {
            let mut tok = String::new();
            loop {
                match chars.next() {
                    Some('}') => {
                        tok.push('}');
                        break;
                    }
                    Some(ch) => tok.push(ch),
                    None => {
                        return Err(Error::Syntax {
                            line: 1,
                            message: "unterminated `{` in lasso".into(),
                        })
                    }
                }
            }
            toks.push(tok);
        } else {
            let mut tok = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() || ch == '{' {
                    break;
                }
                tok.push(ch);
                chars.next();
            }
            toks.push(tok);
        }
    }
    Ok(toks)
}

/// A finite abstract path `o_0 σ_0 … o_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbstractPrefix {
    pub observations: Vec<usize>,
    pub actions: Vec<usize>,
}

impl AbstractPrefix {
    pub fn new(observations: Vec<usize>, actions: Vec<usize>) -> Result<Self> {
        if observations.len() != actions.len() + 1 {
            return Err(Error::Invalid(
                "an abstract prefix has one more observation than actions".into(),
            ));
        }
        Ok(AbstractPrefix {
            observations,
            actions,
        })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// An ultimately periodic abstract play: `prefix · cycle^ω` over
/// `(observation, action)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbstractLasso {
    pub prefix: Vec<(usize, usize)>,
    pub cycle: Vec<(usize, usize)>,
}

impl AbstractLasso {
    pub fn new(prefix: Vec<(usize, usize)>, cycle: Vec<(usize, usize)>) -> Self {
        AbstractLasso { prefix, cycle }
    }

    /// Number of distinct positions (`|prefix| + |cycle|`).
    pub fn period_end(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    /// Position in `0..period_end()` of step `i` of the infinite play.
    pub fn position(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            i
        } else {
            self.prefix.len() + (i - self.prefix.len()) % self.cycle.len()
        }
    }

    /// Successor position, wrapping the cycle.
    pub fn next_position(&self, pos: usize) -> usize {
        if pos + 1 < self.period_end() {
            pos + 1
        } else {
            self.prefix.len()
        }
    }

    pub fn letter_at(&self, pos: usize) -> (usize, usize) {
        if pos < self.prefix.len() {
            self.prefix[pos]
        } else {
            self.cycle[pos - self.prefix.len()]
        }
    }

    pub fn observation(&self, i: usize) -> usize {
        self.letter_at(self.position(i)).0
    }

    pub fn action(&self, i: usize) -> usize {
        self.letter_at(self.position(i)).1
    }

    /// The abstract prefix `o_0 σ_0 … o_n` of length `n`.
    pub fn abstract_prefix(&self, n: usize) -> AbstractPrefix {
        AbstractPrefix {
            observations: (0..=n).map(|i| self.observation(i)).collect(),
            actions: (0..n).map(|i| self.action(i)).collect(),
        }
    }
}

/// A concrete path `q_0 σ_0 q_1 …`, finite or ultimately periodic.
///
/// When `loop_start` is `Some(k)`, the last state equals `states[k]` and the
/// path repeats the transitions from `k` onwards forever.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConcretePath {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub loop_start: Option<usize>,
}

impl ConcretePath {
    pub fn single(q: usize) -> Self {
        ConcretePath {
            states: vec![q],
            actions: Vec::new(),
            loop_start: None,
        }
    }

    /// Builds a finite path, checking every triple against the arena.
    pub fn finite(arena: &Arena, states: Vec<usize>, actions: Vec<usize>) -> Result<Self> {
        let path = ConcretePath {
            states,
            actions,
            loop_start: None,
        };
        path.validate(arena)?;
        Ok(path)
    }

    /// Builds `prefix · cycle^ω` from a state list whose last state closes
    /// the cycle back to `states[loop_start]`.
    pub fn lasso(
        arena: &Arena,
        states: Vec<usize>,
        actions: Vec<usize>,
        loop_start: usize,
    ) -> Result<Self> {
        let path = ConcretePath {
            states,
            actions,
            loop_start: Some(loop_start),
        };
        path.validate(arena)?;
        Ok(path)
    }

    fn validate(&self, arena: &Arena) -> Result<()> {
        if self.states.len() != self.actions.len() + 1 {
            return Err(Error::Invalid(
                "a concrete path has one more state than actions".into(),
            ));
        }
        for i in 0..self.actions.len() {
            if arena
                .weight(self.states[i], self.actions[i], self.states[i + 1])
                .is_none()
            {
                return Err(Error::IllegalPath(format!(
                    "({}, {}, {}) is not a transition",
                    arena.state_name(self.states[i]),
                    arena.action_name(self.actions[i]),
                    arena.state_name(self.states[i + 1])
                )));
            }
        }
        if let Some(k) = self.loop_start {
            if k >= self.actions.len() {
                return Err(Error::IllegalPath("empty cycle".into()));
            }
            if self.states[k] != *self.states.last().unwrap() {
                return Err(Error::IllegalPath("cycle does not close".into()));
            }
        }
        Ok(())
    }

    pub fn is_lasso(&self) -> bool {
        self.loop_start.is_some()
    }

    /// Number of stored transitions (one unrolling for lassos).
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    fn index(&self, i: usize) -> Option<usize> {
        match self.loop_start {
            _ if i < self.actions.len() => Some(i),
            Some(k) => Some(k + (i - k) % (self.actions.len() - k)),
            None => None,
        }
    }

    /// Weight of the `i`-th transition, unrolling the cycle if needed.
    pub fn weight_at(&self, arena: &Arena, i: usize) -> Result<i64> {
        let j = self.index(i).ok_or(Error::OutOfRange {
            index: i,
            len: self.actions.len(),
        })?;
        Ok(arena
            .weight(self.states[j], self.actions[j], self.states[j + 1])
            .expect("validated path"))
    }

    /// The `i`-th state, unrolling the cycle if needed.
    pub fn state_at(&self, i: usize) -> Option<usize> {
        if i == self.actions.len() {
            return self.states.last().copied();
        }
        self.index(i).map(|j| self.states[j])
    }
}

/// `w(π[..n])`: the sum of the first `n` transition weights.
pub fn payoff(arena: &Arena, path: &ConcretePath, n: usize) -> Result<i64> {
    if !path.is_lasso() && n > path.len() {
        return Err(Error::OutOfRange {
            index: n,
            len: path.len(),
        });
    }
    let mut sum = 0i64;
    for i in 0..n {
        sum = sum
            .checked_add(path.weight_at(arena, i)?)
            .ok_or_else(|| Error::Range("payoff overflow".into()))?;
    }
    Ok(sum)
}

/// Mean payoff of an ultimately periodic path: the cycle average.
pub fn mean_payoff_of_lasso(arena: &Arena, path: &ConcretePath) -> Result<Rational64> {
    let k = path
        .loop_start
        .ok_or_else(|| Error::Invalid("path is not ultimately periodic".into()))?;
    let len = path.len() - k;
    if len == 0 {
        return Err(Error::IllegalPath("empty cycle".into()));
    }
    let mut sum = 0i64;
    for i in k..path.len() {
        sum += path.weight_at(arena, i)?;
    }
    Ok(Rational64::new(sum, len as i64))
}

/// A finite-memory observation-based strategy `⟨M, m_0, α_u, α_o⟩` with
/// `M = {0, …, memory_size-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MooreStrategy {
    pub initial_memory: usize,
    /// `update[m][o]`
    pub update: Vec<Vec<usize>>,
    /// `output[m][o]`
    pub output: Vec<Vec<usize>>,
}

impl MooreStrategy {
    pub fn new(
        arena: &Arena,
        initial_memory: usize,
        update: Vec<Vec<usize>>,
        output: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let m = update.len();
        if m == 0 || output.len() != m || initial_memory >= m {
            return Err(Error::Invalid("malformed strategy memory".into()));
        }
        for (u, o) in update.iter().zip(&output) {
            if u.len() != arena.num_observations() || o.len() != arena.num_observations() {
                return Err(Error::Invalid("strategy is not total on M × Obs".into()));
            }
            if u.iter().any(|&x| x >= m) || o.iter().any(|&a| a >= arena.num_actions()) {
                return Err(Error::Invalid("strategy entry out of range".into()));
            }
        }
        Ok(MooreStrategy {
            initial_memory,
            update,
            output,
        })
    }

    /// Memoryless strategy playing `action` everywhere.
    pub fn constant(arena: &Arena, action: usize) -> Self {
        MooreStrategy {
            initial_memory: 0,
            update: vec![vec![0; arena.num_observations()]],
            output: vec![vec![action; arena.num_observations()]],
        }
    }

    /// Blind strategy repeating a word of actions forever; memory = word length.
    pub fn cyclic_word(arena: &Arena, word: &[usize]) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::Invalid("empty word".into()));
        }
        let k = word.len();
        let nobs = arena.num_observations();
        let update = (0..k).map(|m| vec![(m + 1) % k; nobs]).collect();
        let output = word.iter().map(|&a| vec![a; nobs]).collect();
        MooreStrategy::new(arena, 0, update, output)
    }

    pub fn memory_size(&self) -> usize {
        self.update.len()
    }

    /// Action chosen after reading the observation sequence `o_0 … o_n`.
    pub fn play(&self, observations: &[usize]) -> usize {
        let mut m = self.initial_memory;
        let (last, init) = observations.split_last().expect("nonempty history");
        for &o in init {
            m = self.update[m][o];
        }
        self.output[m][*last]
    }
}

/// The objective families. The bounded-window kinds and the plain
/// mean-payoff kinds are representable but have no solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectiveKind {
    DirFix,
    UFix,
    Fix,
    UDirBnd,
    DirBnd,
    UBnd,
    Bnd,
    MPInf,
    MPSup,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 9] = [
        ObjectiveKind::DirFix,
        ObjectiveKind::UFix,
        ObjectiveKind::Fix,
        ObjectiveKind::UDirBnd,
        ObjectiveKind::DirBnd,
        ObjectiveKind::UBnd,
        ObjectiveKind::Bnd,
        ObjectiveKind::MPInf,
        ObjectiveKind::MPSup,
    ];

    pub fn is_fixed_window(self) -> bool {
        matches!(self, ObjectiveKind::DirFix | ObjectiveKind::UFix | ObjectiveKind::Fix)
    }

    pub fn is_bounded_window(self) -> bool {
        matches!(
            self,
            ObjectiveKind::UDirBnd | ObjectiveKind::DirBnd | ObjectiveKind::UBnd | ObjectiveKind::Bnd
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::DirFix => "dirfix",
            ObjectiveKind::UFix => "ufix",
            ObjectiveKind::Fix => "fix",
            ObjectiveKind::UDirBnd => "udirbnd",
            ObjectiveKind::DirBnd => "dirbnd",
            ObjectiveKind::UBnd => "ubnd",
            ObjectiveKind::Bnd => "bnd",
            ObjectiveKind::MPInf => "mpinf",
            ObjectiveKind::MPSup => "mpsup",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        ObjectiveKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| Error::Unknown(s.to_string()))
    }
}

/// An objective with its window bound and threshold `a/b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub lmax: Option<usize>,
    pub threshold: Rational64,
}

impl Objective {
    /// A fixed-window objective at threshold 0.
    pub fn fixed(kind: ObjectiveKind, lmax: usize) -> Result<Objective> {
        if !kind.is_fixed_window() {
            return Err(Error::Invalid(format!("`{kind}` takes no window bound")));
        }
        if lmax == 0 {
            return Err(Error::Invalid("lmax must be at least 1".into()));
        }
        Ok(Objective {
            kind,
            lmax: Some(lmax),
            threshold: Rational64::new(0, 1),
        })
    }

    pub fn dirfix(lmax: usize) -> Objective {
        Objective::fixed(ObjectiveKind::DirFix, lmax).expect("lmax >= 1")
    }

    pub fn ufix(lmax: usize) -> Objective {
        Objective::fixed(ObjectiveKind::UFix, lmax).expect("lmax >= 1")
    }

    pub fn fix(lmax: usize) -> Objective {
        Objective::fixed(ObjectiveKind::Fix, lmax).expect("lmax >= 1")
    }

    /// An objective without window bound (bounded-window or mean-payoff).
    pub fn unbounded(kind: ObjectiveKind) -> Result<Objective> {
        if kind.is_fixed_window() {
            return Err(Error::Invalid(format!("`{kind}` needs a window bound")));
        }
        Ok(Objective {
            kind,
            lmax: None,
            threshold: Rational64::new(0, 1),
        })
    }

    pub fn with_threshold(mut self, threshold: Rational64) -> Objective {
        self.threshold = threshold;
        self
    }

    /// The window bound, or the appropriate error for kinds no solver
    /// handles.
    pub fn solvable_lmax(&self) -> Result<usize> {
        if self.kind.is_bounded_window() {
            return Err(Error::Undecidable(self.kind.name().into()));
        }
        match self.lmax {
            Some(l) if self.kind.is_fixed_window() && l >= 1 => Ok(l),
            _ => Err(Error::Invalid(format!("no window solver for `{}`", self.kind))),
        }
    }
}

/// Groups transitions by `(source, action)` as a name-keyed map; handy for
/// debugging output.
pub fn transition_table(arena: &Arena) -> BTreeMap<(String, String), Vec<(String, i64)>> {
    let mut map = BTreeMap::new();
    for t in arena.transitions() {
        map.entry((
            arena.state_name(t.source).to_string(),
            arena.action_name(t.action).to_string(),
        ))
        .or_insert_with(Vec::new)
        .push((arena.state_name(t.target).to_string(), t.weight));
    }
    map
}
