//! Linear use of names.
//!
//! A process is linear when no name is used more than once with the same
//! polarity, i.e. each name carries at most one input and one output
//! occurrence in the whole term. Everything downstream (the static analysis
//! and the disentangling functions) assumes this discipline.

use std::collections::BTreeMap;
use std::fmt;

use crate::process::{Name, Polarity, Process};

/// Occurrence counts for one name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UsageCount {
    pub inputs: usize,
    pub outputs: usize,
}

impl UsageCount {
    pub fn is_linear(&self) -> bool {
        self.inputs <= 1 && self.outputs <= 1
    }
}

/// A name used more than once with the same polarity.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct LinearityViolation {
    pub name: Name,
    pub polarity: Polarity,
    pub count: usize,
}

impl fmt::Display for LinearityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.polarity {
            Polarity::In => "input",
            Polarity::Out => "output",
        };
        write!(
            f,
            "name '{}' used {} times as {}",
            self.name, self.count, kind
        )
    }
}

/// Per-name usage counts over the whole term, at any depth.
pub fn usage_counts(p: &Process) -> BTreeMap<Name, UsageCount> {
    let mut counts = BTreeMap::new();
    collect(p, &mut counts);
    counts
}

fn collect(p: &Process, counts: &mut BTreeMap<Name, UsageCount>) {
    match p {
        Process::Inert => {}
        Process::Prefix(act, cont) => {
            let entry = counts.entry(act.name.clone()).or_default();
            match act.polarity {
                Polarity::In => entry.inputs += 1,
                Polarity::Out => entry.outputs += 1,
            }
            collect(cont, counts);
        }
        Process::Par(l, r) => {
            collect(l, counts);
            collect(r, counts);
        }
    }
}

/// Checks the linearity discipline, returning the usage map on success.
/// On failure the first offending name in name order is reported, inputs
/// before outputs.
pub fn check_linear(p: &Process) -> Result<BTreeMap<Name, UsageCount>, LinearityViolation> {
    let counts = usage_counts(p);
    for (name, usage) in &counts {
        if usage.inputs > 1 {
            return Err(LinearityViolation {
                name: name.clone(),
                polarity: Polarity::In,
                count: usage.inputs,
            });
        }
        if usage.outputs > 1 {
            return Err(LinearityViolation {
                name: name.clone(),
                polarity: Polarity::Out,
                count: usage.outputs,
            });
        }
    }
    Ok(counts)
}

pub fn is_linear(p: &Process) -> bool {
    check_linear(p).is_ok()
}
