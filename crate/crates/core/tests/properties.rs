//! Property tests: syntactic round trips, structural-congruence laws,
//! reduction invariants, environment algebra, and rewrite safety on randomly
//! generated terms.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selflock_core::analysis::{self, DlMode, Env, Permission, Verdict};
use selflock_core::corpus::{gen_linear, GenParams};
use selflock_core::oracle::{self, Oracle};
use selflock_core::process::{struct_eq, Action, Name, Polarity, Process};
use selflock_core::refactor::{self, Strategy as RefactorStrategy};
use selflock_core::semantics;
use selflock_core::typing;

fn arb_name() -> impl Strategy<Value = Name> {
    prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(|s| Name::new(s).unwrap())
}

fn arb_action() -> impl Strategy<Value = Action> {
    (arb_name(), prop::bool::ANY).prop_map(|(name, out)| {
        if out {
            Action::output(name)
        } else {
            Action::input(name)
        }
    })
}

/// Arbitrary (not necessarily linear) process trees.
fn arb_process() -> impl Strategy<Value = Process> {
    let leaf = Just(Process::Inert);
    leaf.prop_recursive(5, 24, 3, |inner| {
        prop_oneof![
            (arb_action(), inner.clone()).prop_map(|(act, p)| Process::prefix(act, p)),
            (inner.clone(), inner).prop_map(|(l, r)| Process::par(l, r)),
        ]
    })
}

/// Linear processes, by construction.
fn arb_linear() -> impl Strategy<Value = Process> {
    (
        any::<u64>(),
        1usize..=4,
        1usize..=5,
        1usize..=4,
        prop::bool::ANY,
    )
        .prop_map(|(seed, names, max_depth, max_width, force_complete)| {
            gen_linear(&GenParams {
                seed,
                names,
                max_depth,
                max_width,
                force_complete,
            })
        })
}

/// Linear and complete processes.
fn arb_complete() -> impl Strategy<Value = Process> {
    (any::<u64>(), 1usize..=4, 1usize..=5, 2usize..=4).prop_map(
        |(seed, names, max_depth, max_width)| {
            gen_linear(&GenParams {
                seed,
                names,
                max_depth,
                max_width,
                force_complete: true,
            })
        },
    )
}

/// A structurally congruent variant: components shuffled, re-associated at
/// random, with inert padding thrown in.
fn congruent_variant(p: &Process, seed: u64) -> Process {
    fn rebuild(p: &Process, rng: &mut ChaCha8Rng) -> Process {
        let mut components = Vec::new();
        fn collect(p: &Process, out: &mut Vec<Process>) {
            match p {
                Process::Inert => {}
                Process::Par(l, r) => {
                    collect(l, out);
                    collect(r, out);
                }
                Process::Prefix(act, cont) => out.push(Process::Prefix(act.clone(), cont.clone())),
            }
        }
        collect(p, &mut components);
        let mut components: Vec<Process> = components
            .iter()
            .map(|c| {
                let Process::Prefix(act, cont) = c else {
                    unreachable!()
                };
                Process::prefix(act.clone(), rebuild(cont, rng))
            })
            .collect();
        components.shuffle(rng);
        if rng.random_bool(0.3) {
            components.push(Process::Inert);
            components.shuffle(rng);
        }
        let mut iter = components.into_iter();
        let Some(first) = iter.next() else {
            return Process::Inert;
        };
        iter.fold(first, |acc, c| {
            if rng.random_bool(0.5) {
                Process::par(acc, c)
            } else {
                Process::par(c, acc)
            }
        })
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rebuild(p, &mut rng)
}

fn arb_env() -> impl Strategy<Value = Env> {
    prop::collection::btree_map(
        arb_name(),
        prop::sample::select(vec![Permission::In, Permission::Out, Permission::Both]),
        0..4,
    )
    .prop_map(|m| m.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_of_print_is_identity(p in arb_process()) {
        let printed = p.to_string();
        let reparsed = Process::parse(&printed).unwrap();
        prop_assert_eq!(reparsed, p);
    }

    #[test]
    fn print_of_parse_is_identity_up_to_whitespace(p in arb_process(), pad in 0usize..3) {
        let printed = p.to_string();
        // Mangle the whitespace around every separator.
        let filler = [" ", "\t", "\n  ", " # noise\n "][pad % 4];
        let mangled = printed
            .replace('.', &format!(" .{filler}"))
            .replace('|', &format!("{filler}| "));
        let reparsed = Process::parse(&mangled).unwrap();
        prop_assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn canonical_is_idempotent(p in arb_process()) {
        let c = p.canonical();
        let reparsed = Process::parse(&c.to_string()).unwrap();
        prop_assert_eq!(reparsed.canonical(), c);
    }

    #[test]
    fn struct_eq_is_congruent_equivalence(p in arb_process(), q in arb_process(), r in arb_process(), seed in any::<u64>()) {
        // Reflexivity on each, symmetry across the pair.
        prop_assert!(struct_eq(&p, &p));
        prop_assert_eq!(struct_eq(&p, &q), struct_eq(&q, &p));

        // Congruent variants really are equated, and composing with the same
        // term preserves the relation.
        let p_variant = congruent_variant(&p, seed);
        prop_assert!(struct_eq(&p, &p_variant));
        prop_assert!(struct_eq(&Process::par(p.clone(), r.clone()), &Process::par(p_variant.clone(), r.clone())));

        // Transitivity through the variant chain.
        let p_variant2 = congruent_variant(&p_variant, seed.wrapping_add(1));
        prop_assert!(struct_eq(&p_variant2, &p));

        let _ = q;
    }

    #[test]
    fn names_invariant_under_canonicalisation(p in arb_process()) {
        prop_assert_eq!(p.canonical().names(), p.names());
    }

    #[test]
    fn step_targets_drop_one_occurrence_per_polarity(p in arb_process()) {
        let c = p.canonical();
        for step in semantics::steps(&c) {
            for polarity in [Polarity::In, Polarity::Out] {
                let before = semantics::occurrence_count(&c, &step.channel, polarity);
                let after = semantics::occurrence_count(&step.target, &step.channel, polarity);
                prop_assert_eq!(after + 1, before);
            }
        }
    }

    #[test]
    fn steps_consume_a_synchronising_channel(p in arb_linear()) {
        // Each reduction removes its channel from the name set entirely and
        // the channel synchronised in the source state.
        let names = p.names();
        let term = p.clone();
        for step in semantics::steps(&p.canonical()) {
            let target_names = step.target.names();
            prop_assert!(!target_names.contains(&step.channel));
            let mut expected = target_names.clone();
            expected.insert(step.channel.clone());
            prop_assert_eq!(&expected, &names);
            prop_assert!(oracle::pred_sync(&step.channel, &term));
        }
    }

    #[test]
    fn reachable_names_shrink(p in arb_linear()) {
        let names = p.names();
        let graph = semantics::reachable(&p);
        for node in graph.nodes() {
            prop_assert!(node.names().is_subset(&names));
        }
    }

    #[test]
    fn exploration_terminates_within_prefix_budget(p in arb_linear()) {
        let graph = semantics::reachable(&p);
        let bound = p.prefix_count() / 2;
        for idx in 0..graph.node_count() {
            prop_assert!(graph.depth(idx) <= bound);
        }
    }

    #[test]
    fn guarded_occurrences_persist_or_vanish(p in arb_linear()) {
        let graph = semantics::reachable(&p);
        for idx in 0..graph.node_count() {
            let source = graph.node(idx).to_process();
            for &desc in &graph.reachable_from(idx) {
                let target = graph.node(desc).to_process();
                let target_names = target.names();
                for a in source.names() {
                    if oracle::pred_cin(&a, &source) {
                        prop_assert!(oracle::pred_cin(&a, &target) || !target_names.contains(&a));
                    }
                    if oracle::pred_cout(&a, &source) {
                        prop_assert!(oracle::pred_cout(&a, &target) || !target_names.contains(&a));
                    }
                }
            }
        }
    }

    #[test]
    fn completeness_is_preserved_by_reduction(p in arb_complete()) {
        let graph = semantics::reachable(&p);
        for node in graph.nodes() {
            prop_assert!(oracle::is_complete(&node.to_process()));
        }
    }

    #[test]
    fn linearity_is_preserved_by_reduction(p in arb_linear()) {
        prop_assert!(typing::is_linear(&p));
        let graph = semantics::reachable(&p);
        for node in graph.nodes() {
            prop_assert!(typing::is_linear(&node.to_process()));
        }
    }

    #[test]
    fn linearity_is_invariant_under_congruence(p in arb_process(), seed in any::<u64>()) {
        let variant = congruent_variant(&p, seed);
        prop_assert_eq!(typing::is_linear(&p), typing::is_linear(&variant));
    }

    #[test]
    fn classification_internal_implications(p in arb_linear()) {
        let c = Oracle::default().classify(&p).unwrap();
        if c.self_deadlocked {
            prop_assert!(c.deadlocked && c.top_complete);
        }
        if c.potentially_self_locking {
            prop_assert!(c.complete);
        }
        if c.complete {
            prop_assert_eq!(c.potentially_self_locking, !c.lock_free);
        }
    }

    #[test]
    fn witnesses_are_self_deadlocked_and_monotone(p in arb_complete()) {
        let oracle = Oracle::default();
        if let Some(witness) = oracle.find_self_lock(&p).unwrap() {
            let locked = witness.locked.to_process();
            prop_assert!(oracle::is_self_deadlocked(&locked));
            // Every top action of the locked group has its co-action inside
            // the group, so no linear context can release it.
            for component in witness.locked.components() {
                prop_assert!(witness.locked.occurs(&component.action.name, component.action.polarity.co()));
            }
            // Replaying the trace lands on a state that witnesses with no
            // further steps.
            let reached = witness.trace.last().map(|s| s.target.clone()).unwrap_or_else(|| p.canonical());
            let again = oracle.find_self_lock(&reached.to_process()).unwrap().unwrap();
            prop_assert!(again.trace.is_empty());
        }
    }

    #[test]
    fn env_merge_is_commutative_and_associative(a in arb_env(), b in arb_env(), c in arb_env()) {
        let ab = a.merge(&b);
        let ba = b.merge(&a);
        match (&ab, &ba) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "merge defined in one order only"),
        }
        let left = a.merge(&b).and_then(|ab| ab.merge(&c));
        let right = b.merge(&c).and_then(|bc| a.merge(&bc));
        match (&left, &right) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "merge associated in one order only"),
        }
    }

    #[test]
    fn env_complement_is_involutive_on_unmatched(a in arb_env()) {
        let co = a.complement();
        prop_assert_eq!(co.complement(), a.clone());
        for (name, p) in a.iter() {
            let q = co.get(name).unwrap();
            if p == Permission::Both {
                prop_assert_eq!(q, Permission::Both);
            } else {
                prop_assert!(q != p);
            }
        }
    }

    #[test]
    fn analysis_is_invariant_under_congruence(p in arb_linear(), seed in any::<u64>()) {
        let variant = congruent_variant(&p, seed);
        for mode in [DlMode::Relaxed, DlMode::Strict] {
            prop_assert_eq!(
                analysis::analyze_with(&p, mode).unwrap(),
                analysis::analyze_with(&variant, mode).unwrap()
            );
        }
    }

    #[test]
    fn reported_environments_are_deadlocks(p in arb_linear()) {
        for mode in [DlMode::Relaxed, DlMode::Strict] {
            if let Verdict::Detected(reports) = analysis::analyze_with(&p, mode).unwrap() {
                for env in reports {
                    prop_assert!(env.is_deadlock(mode), "{} not a deadlock env", env);
                }
            }
        }
    }

    #[test]
    fn rewrites_preserve_linearity_on_complete_terms(p in arb_complete()) {
        if let Verdict::Detected(reports) = analysis::analyze(&p).unwrap() {
            for strategy in [RefactorStrategy::PrefixToParallel, RefactorStrategy::PullOutput] {
                let out = refactor::disentangle(strategy, &reports[0], &p);
                prop_assert!(typing::is_linear(&out), "{:?} broke linearity: {} -> {}", strategy, p, out);
            }
        }
    }

    #[test]
    fn rewrites_preserve_action_multiset_on_complete_terms(p in arb_complete()) {
        if let Verdict::Detected(reports) = analysis::analyze(&p).unwrap() {
            for strategy in [RefactorStrategy::PrefixToParallel, RefactorStrategy::PullOutput] {
                let out = refactor::disentangle(strategy, &reports[0], &p);
                prop_assert_eq!(typing::usage_counts(&out), typing::usage_counts(&p));
            }
        }
    }

    #[test]
    fn pull_rewrite_preserves_input_order(p in arb_complete()) {
        if let Verdict::Detected(reports) = analysis::analyze(&p).unwrap() {
            let out = refactor::disentangle_pull(&reports[0], &p);
            let before = input_paths(&p);
            let after = input_paths(&out);
            // Every root-to-leaf input sequence survives unchanged.
            for seq in &before {
                prop_assert!(
                    count_of(&after, seq) >= count_of(&before, seq),
                    "input path {:?} lost: {} -> {}", seq, p, out
                );
            }
        }
    }
}

/// Input-name sequences along every root-to-leaf path.
fn input_paths(p: &Process) -> Vec<Vec<Name>> {
    fn walk(p: &Process, current: &mut Vec<Name>, out: &mut Vec<Vec<Name>>) {
        match p {
            Process::Inert => out.push(current.clone()),
            Process::Prefix(act, cont) => {
                let pushed = act.polarity == Polarity::In;
                if pushed {
                    current.push(act.name.clone());
                }
                walk(cont, current, out);
                if pushed {
                    current.pop();
                }
            }
            Process::Par(l, r) => {
                walk(l, current, out);
                walk(r, current, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(p, &mut Vec::new(), &mut out);
    out
}

fn count_of(paths: &[Vec<Name>], seq: &[Name]) -> usize {
    paths.iter().filter(|p| p.as_slice() == seq).count()
}

/// The default complete corpus covers both sides of the classification.
#[test]
fn corpus_covers_locking_and_non_locking_processes() {
    let oracle = Oracle::default();
    let mut locking = 0usize;
    let mut free = 0usize;
    for seed in 0..1000u64 {
        let p = gen_linear(&GenParams {
            seed,
            names: 3,
            max_depth: 4,
            max_width: 3,
            force_complete: true,
        });
        if oracle.is_psl(&p).unwrap() {
            locking += 1;
        } else {
            free += 1;
        }
    }
    assert!(
        locking > 0,
        "no potentially self-locking process in 1000 seeds"
    );
    assert!(free > 0, "no lock-free process in 1000 seeds");
    println!("corpus coverage: {locking} locking / {free} non-locking");
}

/// Detection does not depend on how the parallel components are grouped —
/// measured, not assumed: the fold order of verdict merging is unproven to
/// be associative, so this test only reports the observed disagreement rate.
#[test]
fn verdict_merge_grouping_sensitivity_is_measured() {
    let mut checked = 0usize;
    let mut disagreements = 0usize;
    for seed in 0..400u64 {
        let p = gen_linear(&GenParams {
            seed,
            names: 4,
            max_depth: 4,
            max_width: 4,
            force_complete: true,
        });
        let canonical = p.canonical();
        if canonical.components().len() < 3 {
            continue;
        }
        let verdicts = analysis::component_verdicts(&canonical, DlMode::Relaxed).unwrap();
        let left = verdicts
            .clone()
            .into_iter()
            .reduce(|a, b| analysis::verdict_merge(a, b, DlMode::Relaxed).unwrap())
            .unwrap();
        let right = verdicts
            .into_iter()
            .rev()
            .reduce(|a, b| analysis::verdict_merge(b, a, DlMode::Relaxed).unwrap())
            .unwrap();
        checked += 1;
        if left.is_detection() != right.is_detection() {
            disagreements += 1;
        }
    }
    assert!(checked > 0);
    println!(
        "verdict-merge grouping sensitivity: {disagreements}/{checked} detection disagreements \
         between left and right folds"
    );
}
