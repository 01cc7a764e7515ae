//! Source-level disentangling of detected locks.
//!
//! Both strategies take the offending top-layer environment of a detection
//! and rewrite the prefixes it names so the circular wait cannot form:
//!
//! * [`Strategy::PrefixToParallel`] turns each offending prefix `α.P` into
//!   the composition `α.0 | P`, releasing the continuation immediately. The
//!   continuation is left as-is, so the name order of the innermost
//!   prefixing is what survives.
//! * [`Strategy::PullOutput`] keeps every input prefix in place and instead
//!   pulls the matching output up to the input's own level: `a.P` becomes
//!   `a.P' | ~a.0` and the original output prefix on `a` is dropped from
//!   wherever it was buried. Offending outputs are parallelised as in the
//!   first strategy, but with the rewrite carried into the continuation.

use serde::Serialize;

use crate::analysis::{self, DlMode, Env, MergeConflict, Permission, Verdict};
use crate::oracle::{BudgetExceeded, Oracle};
use crate::process::{Polarity, Process};
use crate::typing;

/// Which disentangling function to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    PrefixToParallel,
    PullOutput,
}

/// Rewrites prefixes named by `env` into parallel compositions.
pub fn disentangle_par(env: &Env, p: &Process) -> Process {
    match p {
        Process::Inert => Process::Inert,
        Process::Par(l, r) => Process::par(disentangle_par(env, l), disentangle_par(env, r)),
        Process::Prefix(act, cont) => {
            let offending = env.get(&act.name) == Some(Permission::from(act.polarity));
            if offending {
                Process::par(
                    Process::prefix(act.clone(), Process::Inert),
                    cont.as_ref().clone(),
                )
            } else {
                Process::prefix(act.clone(), disentangle_par(env, cont))
            }
        }
    }
}

/// Keeps input prefixes in place and pulls their outputs out next to them.
pub fn disentangle_pull(env: &Env, p: &Process) -> Process {
    match p {
        Process::Inert => Process::Inert,
        Process::Par(l, r) => Process::par(disentangle_pull(env, l), disentangle_pull(env, r)),
        Process::Prefix(act, cont) => match (act.polarity, env.get(&act.name)) {
            (Polarity::In, Some(Permission::In)) => Process::par(
                Process::prefix(act.clone(), disentangle_pull(env, cont)),
                Process::prefix(act.co(), Process::Inert),
            ),
            (Polarity::Out, Some(Permission::Out)) => Process::par(
                Process::prefix(act.clone(), Process::Inert),
                disentangle_pull(env, cont),
            ),
            // The output that the input case re-creates at its own level.
            (Polarity::Out, Some(Permission::In)) => disentangle_pull(env, cont),
            _ => Process::prefix(act.clone(), disentangle_pull(env, cont)),
        },
    }
}

pub fn disentangle(strategy: Strategy, env: &Env, p: &Process) -> Process {
    match strategy {
        Strategy::PrefixToParallel => disentangle_par(env, p),
        Strategy::PullOutput => disentangle_pull(env, p),
    }
}

/// One applied rewrite together with its re-verification evidence.
#[derive(Debug, Clone)]
pub struct RefactorResult {
    pub original: Process,
    pub strategy: Strategy,
    pub env_used: Env,
    pub output: Process,
    pub still_linear: bool,
    /// Checked by the semantic oracle, not by the static analysis.
    pub output_lock_free: bool,
    /// Environments still reported when re-running the analysis on the output.
    pub residual_reports: Vec<Env>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefactorError {
    #[error("no lock detected")]
    NoLockDetected,
    #[error(transparent)]
    Analysis(#[from] MergeConflict),
    #[error(transparent)]
    Oracle(#[from] BudgetExceeded),
}

/// Detects, rewrites with the first reported environment, and re-verifies.
pub fn refactor(p: &Process, strategy: Strategy) -> Result<RefactorResult, RefactorError> {
    refactor_with(p, strategy, DlMode::default(), &Oracle::default())
}

pub fn refactor_with(
    p: &Process,
    strategy: Strategy,
    mode: DlMode,
    oracle: &Oracle,
) -> Result<RefactorResult, RefactorError> {
    match analysis::analyze_with(p, mode)? {
        Verdict::Layers(_) => Err(RefactorError::NoLockDetected),
        Verdict::Detected(reports) => {
            let env = reports[0].clone();
            apply_and_verify(p, strategy, env, mode, oracle)
        }
    }
}

/// Repeatedly detects and rewrites until no lock is reported, re-analysing
/// between applications so later rewrites use fresh environments. One round
/// is spent per report of the initial analysis.
pub fn refactor_all(
    p: &Process,
    strategy: Strategy,
    mode: DlMode,
    oracle: &Oracle,
) -> Result<Vec<RefactorResult>, RefactorError> {
    let rounds = match analysis::analyze_with(p, mode)? {
        Verdict::Layers(_) => return Err(RefactorError::NoLockDetected),
        Verdict::Detected(reports) => reports.len(),
    };
    let mut results = Vec::new();
    let mut current = p.clone();
    for _ in 0..rounds {
        match analysis::analyze_with(&current, mode)? {
            Verdict::Layers(_) => break,
            Verdict::Detected(reports) => {
                let result =
                    apply_and_verify(&current, strategy, reports[0].clone(), mode, oracle)?;
                current = result.output.clone();
                results.push(result);
            }
        }
    }
    Ok(results)
}

fn apply_and_verify(
    p: &Process,
    strategy: Strategy,
    env: Env,
    mode: DlMode,
    oracle: &Oracle,
) -> Result<RefactorResult, RefactorError> {
    let output = disentangle(strategy, &env, p);
    let still_linear = typing::is_linear(&output);
    let output_lock_free = oracle.is_lock_free(&output)?;
    let residual_reports = match analysis::analyze_with(&output, mode)? {
        Verdict::Detected(reports) => reports,
        Verdict::Layers(_) => Vec::new(),
    };
    Ok(RefactorResult {
        original: p.clone(),
        strategy,
        env_used: env,
        output,
        still_linear,
        output_lock_free,
        residual_reports,
    })
}
