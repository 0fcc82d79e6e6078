//! Antichain-based solver for the direct fixed window objective.
//!
//! Window functions are ordered by `f ⪯ g` iff `supp(f) ⊆ supp(g)` and every
//! entry of `f` is at least the suffix minimum of the matching entry of `g`.
//! Larger functions know about more states and worse open windows, so Adam
//! wins from them whenever he wins from a smaller one. The relation is a
//! preorder: two functions are equivalent iff they have the same support and
//! the same suffix-minimum vectors. Antichains keep one representative per
//! class (the least in the derived total order).

use std::collections::HashSet;

use crate::arena::Arena;
use crate::dirfix::{initial_function, sigma_successor, WindowFunction};
use crate::{Error, Limits, Player, Result};

fn suffix_min(v: &[i64]) -> Vec<i64> {
    let mut out = v.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].min(out[i + 1]);
    }
    out
}

/// `f ⪯ g`.
pub fn leq(f: &WindowFunction, g: &WindowFunction) -> bool {
    assert_eq!(f.num_states(), g.num_states(), "functions over different arenas");
    for (a, b) in f.entries().iter().zip(g.entries()) {
        match (a, b) {
            (None, _) => {}
            (Some(_), None) => return false,
            (Some(a), Some(b)) => {
                assert_eq!(a.len(), b.len(), "functions with different lmax");
                let mut m = 0i64;
                for i in (0..a.len()).rev() {
                    m = if i + 1 == a.len() { b[i] } else { m.min(b[i]) };
                    if a[i] < m {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Least upper bound: union of supports, pointwise minimum of suffix minima.
pub fn lub(f: &WindowFunction, g: &WindowFunction) -> WindowFunction {
    let entries = f
        .entries()
        .iter()
        .zip(g.entries())
        .map(|(a, b)| match (a, b) {
            (None, None) => None,
            (Some(a), None) => Some(suffix_min(a)),
            (None, Some(b)) => Some(suffix_min(b)),
            (Some(a), Some(b)) => Some(
                suffix_min(a)
                    .into_iter()
                    .zip(suffix_min(b))
                    .map(|(x, y)| x.min(y))
                    .collect(),
            ),
        })
        .collect();
    WindowFunction::from_entries(entries)
}

/// A set of pairwise incomparable window functions, sorted. May be empty,
/// standing for the empty upward-closed set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Antichain {
    elements: Vec<WindowFunction>,
}

impl Antichain {
    pub fn empty() -> Self {
        Antichain::default()
    }

    pub fn elements(&self) -> &[WindowFunction] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Is `f` in the upward closure?
    pub fn dominates(&self, f: &WindowFunction) -> bool {
        self.elements.iter().any(|y| leq(y, f))
    }

    /// Members of `universe` in the upward closure.
    pub fn up_closure(&self, universe: &[WindowFunction]) -> Vec<WindowFunction> {
        universe.iter().filter(|f| self.dominates(f)).cloned().collect()
    }
}

/// `⌊S⌋`: the ⪯-minimal elements of `S`, one per equivalence class.
pub fn minimal<I: IntoIterator<Item = WindowFunction>>(set: I) -> Antichain {
    let mut items: Vec<WindowFunction> = set.into_iter().collect();
    items.sort();
    items.dedup();
    let mut out: Vec<WindowFunction> = Vec::new();
    for x in items {
        if out.iter().any(|y| leq(y, &x)) {
            continue;
        }
        out.retain(|y| !leq(&x, y));
        out.push(x);
    }
    out.sort();
    Antichain { elements: out }
}

/// `a ⊑ b`: every element of `b` is above some element of `a`.
pub fn ac_leq(a: &Antichain, b: &Antichain) -> bool {
    b.elements.iter().all(|x| a.dominates(x))
}

/// `a ⊔ b = ⌊a ∪ b⌋`.
pub fn join(a: &Antichain, b: &Antichain) -> Antichain {
    minimal(a.elements.iter().chain(&b.elements).cloned())
}

/// Do two antichains denote the same upward-closed set?
pub fn equivalent(a: &Antichain, b: &Antichain) -> bool {
    ac_leq(a, b) && ac_leq(b, a)
}

/// `upre(S) = {p | ∀σ ∃q ∈ S: (p, σ, q) ∈ Δ'}` restricted to `universe`.
pub fn upre_explicit(arena: &Arena, universe: &[WindowFunction], set: &HashSet<WindowFunction>) -> Vec<WindowFunction> {
    universe
        .iter()
        .filter(|p| {
            (0..arena.num_actions()).all(|a| {
                (0..arena.num_observations())
                    .any(|o| sigma_successor(arena, p, a, o).is_some_and(|q| set.contains(&q)))
            })
        })
        .cloned()
        .collect()
}

/// `⌊𝒰⌋`: for every state `q`, the function with support `{q}` and vector
/// `(0, …, 0, -1)`; empty when no window can be open.
pub fn minimal_unsafe(arena: &Arena, lmax: usize) -> Antichain {
    if arena.max_abs_weight() * (lmax as i64) < 1 {
        return Antichain::empty();
    }
    minimal((0..arena.num_states()).map(|q| {
        let mut f = WindowFunction::bottom(arena.num_states());
        let mut v = vec![0; lmax];
        v[lmax - 1] = -1;
        f.set(q, Some(v));
        f
    }))
}

fn atom(n: usize, x: usize, lmax: usize, entry: Option<(usize, i64)>) -> WindowFunction {
    let mut f = WindowFunction::bottom(n);
    let mut v = vec![0; lmax];
    if let Some((k, val)) = entry {
        v[k - 1] = val;
    }
    f.set(x, Some(v));
    f
}

/// Minimal `p` with an `(action, o)`-successor `r` such that `target ⪯ r`,
/// up to unsafe functions (which the caller discards).
fn pre_candidates(arena: &Arena, lmax: usize, action: usize, o: usize, target: &WindowFunction, limits: &Limits) -> Result<Vec<WindowFunction>> {
    let n = arena.num_states();
    let floor = -arena.max_abs_weight() * lmax as i64;
    let obs = arena.observation_set(o);
    let mut constraints: Vec<Vec<WindowFunction>> = Vec::new();
    let support: Vec<usize> = target.support_states().collect();
    if support.is_empty() {
        let atoms: Vec<WindowFunction> = (0..n)
            .filter(|&x| arena.successors(x, action).iter().any(|&(q, _)| obs.contains(q)))
            .map(|x| atom(n, x, lmax, None))
            .collect();
        constraints.push(atoms);
    }
    for &q in &support {
        if !obs.contains(q) {
            return Ok(Vec::new());
        }
        let preds = arena.predecessors(q, action);
        constraints.push(preds.iter().map(|&(x, _)| atom(n, x, lmax, None)).collect());
        let vals = target.get(q).unwrap();
        for (idx, &c) in vals.iter().enumerate() {
            if c >= 0 {
                continue;
            }
            let i = idx + 1;
            let k0 = (i.max(2)) - 1;
            let mut atoms = Vec::new();
            for &(x, w) in preds {
                if i == 1 && w <= c {
                    atoms.push(atom(n, x, lmax, None));
                }
                let v = (c - w).min(-1);
                if k0 < lmax && v >= floor {
                    atoms.push(atom(n, x, lmax, Some((k0, v))));
                }
            }
            constraints.push(atoms);
        }
    }
    // conjunction of disjunctions: pairwise least upper bounds, kept minimal
    let mut acc = vec![WindowFunction::bottom(n)];
    for atoms in constraints {
        let mut next = Vec::with_capacity(acc.len() * atoms.len());
        for f in &acc {
            for g in &atoms {
                next.push(lub(f, g));
            }
        }
        limits.check("antichain candidates", next.len())?;
        acc = minimal(next).elements;
        if acc.is_empty() {
            break;
        }
    }
    Ok(acc)
}

/// Configuration of the antichain engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AntichainConfig {
    pub limits: Limits,
    /// Compute `⌊upre⌋` by filtering the explicit operator over the whole
    /// function space (exponential; for differential testing).
    pub explicit_upre: bool,
}

/// `⌊upre⌋(a)`: minimal non-unsafe functions from which Adam can force a
/// successor above some element of `a`, whatever Eve plays.
pub fn ac_upre(arena: &Arena, lmax: usize, a: &Antichain) -> Result<Antichain> {
    ac_upre_with(arena, lmax, a, &AntichainConfig::default())
}

pub fn ac_upre_with(arena: &Arena, lmax: usize, a: &Antichain, config: &AntichainConfig) -> Result<Antichain> {
    if config.explicit_upre {
        let universe = crate::dirfix::enumerate_functions(arena, lmax, &config.limits)?;
        let closed: HashSet<WindowFunction> = a.up_closure(&universe).into_iter().collect();
        let pre = upre_explicit(arena, &universe, &closed);
        return Ok(minimal(pre.into_iter().filter(|p| !p.is_unsafe())));
    }
    if a.is_empty() {
        return Ok(Antichain::empty());
    }
    let mut acc: Option<Vec<WindowFunction>> = None;
    for action in 0..arena.num_actions() {
        let mut union = Vec::new();
        for o in 0..arena.num_observations() {
            for target in a.elements() {
                union.extend(pre_candidates(arena, lmax, action, o, target, &config.limits)?);
            }
        }
        let per_action = minimal(union).elements;
        acc = Some(match acc {
            None => per_action,
            Some(prev) => {
                let mut next = Vec::with_capacity(prev.len() * per_action.len());
                for f in &prev {
                    for g in &per_action {
                        next.push(lub(f, g));
                    }
                }
                config.limits.check("antichain candidates", next.len())?;
                minimal(next).elements
            }
        });
    }
    Ok(minimal(acc.unwrap_or_default().into_iter().filter(|p| !p.is_unsafe())))
}

/// Result of the antichain fixpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AntichainSolution {
    pub winner: Player,
    /// Number of Kleene iterations until stabilization.
    pub iterations: usize,
    /// Antichain size after each iteration (the first entry is `⌊𝒰⌋`).
    pub sizes: Vec<usize>,
    pub fixpoint: Antichain,
}

pub fn solve_dirfix_antichain(arena: &Arena, lmax: usize) -> Result<AntichainSolution> {
    solve_dirfix_antichain_with(arena, lmax, &AntichainConfig::default())
}

/// Iterates `X ↦ ⌊𝒰⌋ ⊔ ⌊upre⌋(X)` from `⌊𝒰⌋`; Eve wins iff no element of
/// the fixpoint lies below `f_I`.
pub fn solve_dirfix_antichain_with(arena: &Arena, lmax: usize, config: &AntichainConfig) -> Result<AntichainSolution> {
    if lmax == 0 {
        return Err(Error::Invalid("lmax must be at least 1".into()));
    }
    let bad = minimal_unsafe(arena, lmax);
    let mut x = bad.clone();
    let mut sizes = vec![x.len()];
    let mut iterations = 0;
    loop {
        let next = join(&bad, &ac_upre_with(arena, lmax, &x, config)?);
        iterations += 1;
        sizes.push(next.len());
        config.limits.check("antichain elements", next.len())?;
        if equivalent(&next, &x) {
            x = next;
            break;
        }
        x = next;
    }
    let fi = initial_function(arena, lmax);
    let winner = if x.dominates(&fi) { Player::Adam } else { Player::Eve };
    Ok(AntichainSolution {
        winner,
        iterations,
        sizes,
        fixpoint: x,
    })
}
