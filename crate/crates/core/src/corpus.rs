//! Deterministic generation of linear processes for property tests and
//! soundness measurement.
//!
//! Linearity is guaranteed by construction: a multiset of action tokens is
//! sampled first, at most one token per name and polarity, and the tokens are
//! then arranged into a term by recursively choosing between extending a
//! prefix chain and splitting into parallel branches. With
//! [`GenParams::force_complete`] every used name contributes both polarities,
//! so the output is additionally complete.

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::process::{Action, Name, Process};

/// Generation knobs. Identical parameters yield identical processes, on any
/// platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    /// Size of the name pool; must be at least 1.
    pub names: usize,
    /// Target bound on prefix nesting along a path.
    pub max_depth: usize,
    /// Maximum branches per parallel split.
    pub max_width: usize,
    /// Use both polarities of every chosen name.
    pub force_complete: bool,
}

impl GenParams {
    pub fn new(seed: u64) -> Self {
        GenParams {
            seed,
            names: 3,
            max_depth: 4,
            max_width: 3,
            force_complete: false,
        }
    }
}

/// The i-th pool name: `a`..`z`, then `n26`, `n27`, ...
pub fn pool_name(i: usize) -> Name {
    let id = if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("n{i}")
    };
    Name::new(id).expect("pool names are valid identifiers")
}

/// Generates a linear process; complete as well when
/// [`GenParams::force_complete`] is set.
pub fn gen_linear(params: &GenParams) -> Process {
    assert!(params.names >= 1, "names must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut tokens: Vec<Action> = Vec::new();
    for i in 0..params.names {
        let name = pool_name(i);
        if params.force_complete {
            if rng.random_bool(0.8) {
                tokens.push(Action::input(name.clone()));
                tokens.push(Action::output(name));
            }
        } else {
            match rng.random_range(0..4u8) {
                0 => {}
                1 => tokens.push(Action::input(name)),
                2 => tokens.push(Action::output(name)),
                _ => {
                    tokens.push(Action::input(name.clone()));
                    tokens.push(Action::output(name));
                }
            }
        }
    }
    tokens.shuffle(&mut rng);

    build(&tokens, params.max_depth, params.max_width.max(1), &mut rng)
}

fn build(tokens: &[Action], depth: usize, max_width: usize, rng: &mut ChaCha8Rng) -> Process {
    match tokens {
        [] => Process::Inert,
        [t] => Process::prefix(t.clone(), Process::Inert),
        _ if depth <= 1 || max_width == 1 => flat(tokens, max_width),
        _ => {
            let width_cap = max_width.min(tokens.len());
            if width_cap < 2 || rng.random_bool(0.5) {
                // Extend the prefix chain.
                Process::prefix(
                    tokens[0].clone(),
                    build(&tokens[1..], depth - 1, max_width, rng),
                )
            } else {
                // Split into parallel branches at distinct cut points.
                let branches = rng.random_range(2..=width_cap);
                let mut cuts = std::collections::BTreeSet::new();
                while cuts.len() < branches - 1 {
                    cuts.insert(rng.random_range(1..tokens.len()));
                }
                let mut bounds = vec![0];
                bounds.extend(cuts);
                bounds.push(tokens.len());
                let mut groups = bounds.windows(2).rev().map(|w| &tokens[w[0]..w[1]]);
                let last = build(groups.next().unwrap(), depth, max_width, rng);
                groups.fold(last, |acc, g| {
                    Process::par(build(g, depth, max_width, rng), acc)
                })
            }
        }
    }
}

/// Depth budget exhausted: every remaining token becomes its own component,
/// except in the degenerate single-width configuration where only a chain is
/// possible.
fn flat(tokens: &[Action], max_width: usize) -> Process {
    if max_width == 1 {
        tokens
            .iter()
            .rev()
            .fold(Process::Inert, |acc, t| Process::prefix(t.clone(), acc))
    } else {
        let mut iter = tokens.iter().rev();
        let first = Process::prefix(iter.next().unwrap().clone(), Process::Inert);
        iter.fold(first, |acc, t| {
            Process::par(Process::prefix(t.clone(), Process::Inert), acc)
        })
    }
}
