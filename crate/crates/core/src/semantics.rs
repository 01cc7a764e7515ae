//! Reduction semantics and the reachability graph.
//!
//! Reduction is defined directly on canonical forms: a step synchronises two
//! components headed by complementary actions on the same channel and
//! replaces them with their continuations. Evaluation contexts and the
//! congruence rule are absorbed by canonicalisation, since the only
//! evaluation positions are parallel components.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::process::{CanonicalProcess, Name, Polarity, Process};

/// One reduction step: the channel that synchronised and the resulting state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub channel: Name,
    pub target: CanonicalProcess,
}

/// All reduction steps out of a canonical form, one per unordered pair of
/// components with complementary head actions, sorted by channel and then by
/// printed target.
pub fn steps(p: &CanonicalProcess) -> Vec<Step> {
    let components = p.components();
    let mut out = Vec::new();
    for i in 0..components.len() {
        for j in i + 1..components.len() {
            let (a, b) = (&components[i].action, &components[j].action);
            if a.name != b.name || a.polarity == b.polarity {
                continue;
            }
            let mut rest: Vec<_> = components
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i && *k != j)
                .map(|(_, c)| c.clone())
                .collect();
            rest.extend(components[i].continuation.components().iter().cloned());
            rest.extend(components[j].continuation.components().iter().cloned());
            out.push(Step {
                channel: a.name.clone(),
                target: CanonicalProcess::from_components(rest),
            });
        }
    }
    out.sort_by_cached_key(|s| (s.channel.clone(), s.target.to_string()));
    out
}

/// True when the process has no reduction and is not structurally inert.
pub fn is_deadlocked(p: &Process) -> bool {
    let canonical = p.canonical();
    !canonical.is_inert() && steps(&canonical).is_empty()
}

/// Exhaustive breadth-first closure of [`steps`].
///
/// Nodes are deduplicated by canonical form, stored in discovery order, and
/// each node keeps the edge through which it was first discovered, so the
/// trace back to the root is a shortest one.
#[derive(Debug, Clone)]
pub struct ReductionGraph {
    nodes: Vec<CanonicalProcess>,
    /// Outgoing edges per node: synchronised channel and target node index.
    edges: Vec<Vec<(Name, usize)>>,
    /// BFS discovery edge per node: (parent index, channel). `None` at the root.
    parent: Vec<Option<(usize, Name)>>,
    /// BFS depth per node.
    depth: Vec<usize>,
}

impl ReductionGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> &CanonicalProcess {
        &self.nodes[0]
    }

    pub fn node(&self, idx: usize) -> &CanonicalProcess {
        &self.nodes[idx]
    }

    pub fn nodes(&self) -> &[CanonicalProcess] {
        &self.nodes
    }

    pub fn edges(&self, idx: usize) -> &[(Name, usize)] {
        &self.edges[idx]
    }

    pub fn depth(&self, idx: usize) -> usize {
        self.depth[idx]
    }

    /// Steps out of a node, reconstructed from the edge list.
    pub fn steps_of(&self, idx: usize) -> Vec<Step> {
        self.edges[idx]
            .iter()
            .map(|(channel, target)| Step {
                channel: channel.clone(),
                target: self.nodes[*target].clone(),
            })
            .collect()
    }

    /// The BFS discovery trace from the root to a node.
    pub fn trace_to(&self, idx: usize) -> Vec<Step> {
        let mut rev = Vec::new();
        let mut cur = idx;
        while let Some((parent, channel)) = &self.parent[cur] {
            rev.push(Step {
                channel: channel.clone(),
                target: self.nodes[cur].clone(),
            });
            cur = *parent;
        }
        rev.reverse();
        rev
    }

    /// Node indices reachable from `idx`, including `idx` itself.
    pub fn reachable_from(&self, idx: usize) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![idx];
        seen[idx] = true;
        let mut out = Vec::new();
        while let Some(n) = stack.pop() {
            out.push(n);
            for (_, target) in &self.edges[n] {
                if !seen[*target] {
                    seen[*target] = true;
                    stack.push(*target);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// More states than the given limit are reachable.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("state space exceeds {limit} nodes")]
pub struct StateSpaceTooLarge {
    pub limit: usize,
}

/// Explores every state reachable from `p`. Termination is guaranteed:
/// every step removes two prefixes.
pub fn reachable(p: &Process) -> ReductionGraph {
    reachable_canonical(p.canonical())
}

pub fn reachable_canonical(root: CanonicalProcess) -> ReductionGraph {
    reachable_bounded(root, usize::MAX).expect("unbounded exploration cannot exceed usize::MAX")
}

/// Bounded exploration: fails as soon as more than `max_nodes` states have
/// been discovered, before the excess states are expanded.
pub fn reachable_bounded(
    root: CanonicalProcess,
    max_nodes: usize,
) -> Result<ReductionGraph, StateSpaceTooLarge> {
    let mut index: HashMap<CanonicalProcess, usize> = HashMap::new();
    let mut graph = ReductionGraph {
        nodes: vec![root.clone()],
        edges: Vec::new(),
        parent: vec![None],
        depth: vec![0],
    };
    index.insert(root, 0);
    if max_nodes < 1 {
        return Err(StateSpaceTooLarge { limit: max_nodes });
    }
    let mut next = 0;
    while next < graph.nodes.len() {
        let node_steps = steps(&graph.nodes[next]);
        let mut out_edges = Vec::with_capacity(node_steps.len());
        for step in node_steps {
            let target_idx = match index.get(&step.target) {
                Some(&idx) => idx,
                None => {
                    let idx = graph.nodes.len();
                    if idx >= max_nodes {
                        return Err(StateSpaceTooLarge { limit: max_nodes });
                    }
                    index.insert(step.target.clone(), idx);
                    graph.nodes.push(step.target);
                    graph.parent.push(Some((next, step.channel.clone())));
                    graph.depth.push(graph.depth[next] + 1);
                    idx
                }
            };
            out_edges.push((step.channel, target_idx));
        }
        graph.edges.push(out_edges);
        next += 1;
    }
    Ok(graph)
}

/// Renders a trace, one line per step: `--a--> <process>`.
pub fn render_trace(trace: &[Step]) -> String {
    let mut out = String::new();
    for step in trace {
        let _ = writeln!(out, "--{}--> {}", step.channel, step.target);
    }
    out
}

/// Occurrence count of a (name, polarity) pair at any depth.
pub fn occurrence_count(p: &CanonicalProcess, name: &Name, polarity: Polarity) -> usize {
    p.components()
        .iter()
        .map(|c| {
            let head = (c.action.name == *name && c.action.polarity == polarity) as usize;
            head + occurrence_count(&c.continuation, name, polarity)
        })
        .sum()
}
