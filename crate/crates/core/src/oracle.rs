//! Ground-truth semantic predicates, decided by exhaustive exploration.
//!
//! These procedures are deliberately brute force: they enumerate the whole
//! reachability graph and, for the self-lock search, every non-empty subset
//! of parallel components at every reachable state. They serve as the
//! independent oracle against which the compositional static analysis is
//! cross-checked, so they must not share any machinery with it.

use serde::Serialize;

use crate::process::{CanonicalProcess, Name, Polarity, Process};
use crate::semantics::{self, ReductionGraph, Step};
use crate::typing;

/// An unguarded input prefix on `a` exists in some parallel component.
pub fn pred_in(a: &Name, p: &Process) -> bool {
    canonical_in(a, &p.canonical())
}

/// An unguarded output prefix on `a` exists in some parallel component.
pub fn pred_out(a: &Name, p: &Process) -> bool {
    canonical_out(a, &p.canonical())
}

/// Both an unguarded input and an unguarded output on `a` exist.
pub fn pred_sync(a: &Name, p: &Process) -> bool {
    let c = p.canonical();
    canonical_in(a, &c) && canonical_out(a, &c)
}

/// Exactly one of the two unguarded polarities on `a` exists.
pub fn pred_wait(a: &Name, p: &Process) -> bool {
    let c = p.canonical();
    canonical_in(a, &c) != canonical_out(a, &c)
}

/// An input on `a` occurs anywhere in the term, guarded or not.
pub fn pred_cin(a: &Name, p: &Process) -> bool {
    p.occurs(a, Polarity::In)
}

/// An output on `a` occurs anywhere in the term, guarded or not.
pub fn pred_cout(a: &Name, p: &Process) -> bool {
    p.occurs(a, Polarity::Out)
}

fn canonical_in(a: &Name, p: &CanonicalProcess) -> bool {
    p.components()
        .iter()
        .any(|c| c.action.name == *a && c.action.polarity == Polarity::In)
}

fn canonical_out(a: &Name, p: &CanonicalProcess) -> bool {
    p.components()
        .iter()
        .any(|c| c.action.name == *a && c.action.polarity == Polarity::Out)
}

/// Every name occurring in the term occurs with both polarities in it.
pub fn is_complete(p: &Process) -> bool {
    p.names()
        .iter()
        .all(|a| p.occurs(a, Polarity::In) == p.occurs(a, Polarity::Out))
}

/// Every unguarded action has its co-action somewhere in the term.
pub fn is_top_complete(p: &Process) -> bool {
    canonical_top_complete(&p.canonical())
}

fn canonical_top_complete(p: &CanonicalProcess) -> bool {
    p.components()
        .iter()
        .all(|c| p.occurs(&c.action.name, c.action.polarity.co()))
}

/// Deadlocked and top-complete: no linearity-respecting context can supply
/// the missing co-actions, so the process can never be released.
pub fn is_self_deadlocked(p: &Process) -> bool {
    semantics::is_deadlocked(p) && is_top_complete(p)
}

fn canonical_self_deadlocked(p: &CanonicalProcess) -> bool {
    !p.is_inert() && semantics::steps(p).is_empty() && canonical_top_complete(p)
}

/// Exploration ran past its work budget.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("oracle budget of {budget} work units exceeded")]
pub struct BudgetExceeded {
    pub budget: u64,
}

/// Evidence that a self-deadlocked group of components is reachable: a
/// shortest trace to the state containing it and the components themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockWitness {
    pub trace: Vec<Step>,
    pub locked: CanonicalProcess,
}

/// Every semantic predicate for one process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub linear: bool,
    pub complete: bool,
    pub lock_free: bool,
    pub deadlocked: bool,
    pub top_complete: bool,
    pub self_deadlocked: bool,
    /// A reachable state contains a self-deadlocked group of components.
    pub self_lock_reachable: bool,
    /// Complete and a self-deadlock is reachable.
    pub potentially_self_locking: bool,
}

/// Brute-force decision procedures with a work budget.
///
/// The budget counts node expansions and per-state subset checks; exceeding
/// it is a hard error rather than a silent truncation, because a truncated
/// oracle is worse than none.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    budget: u64,
}

pub const DEFAULT_BUDGET: u64 = 1_000_000;

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Oracle {
    pub fn new(budget: u64) -> Self {
        Oracle { budget }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn explore(&self, p: &Process) -> Result<ReductionGraph, BudgetExceeded> {
        // Node count bounds the expansion work; each expansion costs one unit.
        let max_nodes = usize::try_from(self.budget).unwrap_or(usize::MAX);
        semantics::reachable_bounded(p.canonical(), max_nodes).map_err(|_| BudgetExceeded {
            budget: self.budget,
        })
    }

    /// Every waiting action in every reachable state can eventually
    /// synchronise.
    pub fn is_lock_free(&self, p: &Process) -> Result<bool, BudgetExceeded> {
        let graph = self.explore(p)?;
        let mut spent = graph.node_count() as u64;
        for idx in 0..graph.node_count() {
            let state = graph.node(idx);
            let descendants = graph.reachable_from(idx);
            for name in state.names() {
                let waiting = canonical_in(&name, state) != canonical_out(&name, state);
                if !waiting {
                    continue;
                }
                spent += descendants.len() as u64;
                if spent > self.budget {
                    return Err(BudgetExceeded {
                        budget: self.budget,
                    });
                }
                let resolvable = descendants.iter().any(|&d| {
                    let r = graph.node(d);
                    canonical_in(&name, r) && canonical_out(&name, r)
                });
                if !resolvable {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Searches reachable states for a self-deadlocked group of components.
    ///
    /// The witness is minimal: shortest trace first, then smallest component
    /// subset, then least printed form of the locked group.
    pub fn find_self_lock(&self, p: &Process) -> Result<Option<LockWitness>, BudgetExceeded> {
        let graph = self.explore(p)?;
        let mut spent = graph.node_count() as u64;

        // Nodes grouped by BFS depth so shorter traces win outright.
        let max_depth = (0..graph.node_count())
            .map(|i| graph.depth(i))
            .max()
            .unwrap_or(0);
        let mut by_depth: Vec<Vec<usize>> = vec![Vec::new(); max_depth + 1];
        for idx in 0..graph.node_count() {
            by_depth[graph.depth(idx)].push(idx);
        }

        for level in &by_depth {
            let widest = level
                .iter()
                .map(|&idx| graph.node(idx).components().len())
                .max()
                .unwrap_or(0);
            for size in 1..=widest {
                let mut best: Option<(String, usize, CanonicalProcess)> = None;
                for &idx in level {
                    let state = graph.node(idx);
                    let mut subsets = SubsetIter::new(state.components().len(), size);
                    while let Some(subset) = subsets.next() {
                        spent += 1;
                        if spent > self.budget {
                            return Err(BudgetExceeded {
                                budget: self.budget,
                            });
                        }
                        let group = state.select(subset);
                        if canonical_self_deadlocked(&group) {
                            let key = group.to_string();
                            if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                                best = Some((key, idx, group));
                            }
                        }
                    }
                }
                if let Some((_, idx, locked)) = best {
                    return Ok(Some(LockWitness {
                        trace: graph.trace_to(idx),
                        locked,
                    }));
                }
            }
        }
        Ok(None)
    }

    /// The bare reachability bit of [`Oracle::find_self_lock`].
    pub fn is_psl(&self, p: &Process) -> Result<bool, BudgetExceeded> {
        Ok(self.find_self_lock(p)?.is_some())
    }

    pub fn classify(&self, p: &Process) -> Result<Classification, BudgetExceeded> {
        let linear = typing::is_linear(p);
        let complete = is_complete(p);
        let lock_free = self.is_lock_free(p)?;
        let self_lock_reachable = self.is_psl(p)?;
        Ok(Classification {
            linear,
            complete,
            lock_free,
            deadlocked: semantics::is_deadlocked(p),
            top_complete: is_top_complete(p),
            self_deadlocked: is_self_deadlocked(p),
            self_lock_reachable,
            potentially_self_locking: complete && self_lock_reachable,
        })
    }

    /// Checks that "potentially self-locking" and "complete but not
    /// lock-free" agree on this process. Expected to hold on every linear
    /// process.
    pub fn psl_characterisation_holds(&self, p: &Process) -> Result<bool, BudgetExceeded> {
        let c = self.classify(p)?;
        Ok((c.complete && !c.lock_free) == c.potentially_self_locking)
    }
}

/// Strictly increasing index tuples of a fixed size, yielded lazily in
/// lexicographic order so the budget can cut the enumeration short.
struct SubsetIter {
    n: usize,
    indices: Vec<usize>,
    started: bool,
    exhausted: bool,
}

impl SubsetIter {
    fn new(n: usize, size: usize) -> Self {
        SubsetIter {
            n,
            indices: (0..size).collect(),
            started: false,
            exhausted: size > n,
        }
    }

    fn next(&mut self) -> Option<&[usize]> {
        if self.exhausted {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.indices);
        }
        let size = self.indices.len();
        // Rightmost index that can still move right.
        let Some(pos) = (0..size).rev().find(|&i| self.indices[i] < self.n - (size - i)) else {
            self.exhausted = true;
            return None;
        };
        self.indices[pos] += 1;
        for i in pos + 1..size {
            self.indices[i] = self.indices[i - 1] + 1;
        }
        Some(&self.indices)
    }
}
