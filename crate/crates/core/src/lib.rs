//! Deadlock detection and disentangling for a finite linear CCS.
//!
//! The crate works on processes built from the inert process, input/output
//! prefixes and parallel composition, under a linear use of names (each name
//! at most once per polarity). It provides:
//!
//! * [`process`] — AST, parser, printer, canonical forms modulo structural
//!   congruence;
//! * [`semantics`] — reduction steps, exhaustive reachability, deadlock;
//! * [`typing`] — the linearity check;
//! * [`oracle`] — brute-force semantic classification: lock-freedom,
//!   completeness, self-deadlock, and the search for reachable self-locked
//!   component groups, with witnesses;
//! * [`analysis`] — the compositional static detector based on layered
//!   permission environments;
//! * [`refactor`] — the two disentangling rewrites and the
//!   detect/rewrite/re-verify pipeline;
//! * [`corpus`] — deterministic generation of linear (optionally complete)
//!   processes.
//!
//! Concrete syntax: `0` is inert, `a.P` prefixes an input on `a`, `~a.P` an
//! output, `P | Q` composes in parallel, parentheses group, `#` starts a
//! line comment. Prefixing binds tighter than `|`.
//!
//! ```
//! use selflock_core::process::Process;
//! use selflock_core::{analysis, oracle};
//!
//! let p = Process::parse("a.b.0 | ~b.~c.0 | c.~a.0").unwrap();
//! let verdict = analysis::analyze(&p).unwrap();
//! assert!(verdict.is_detection());
//! let class = oracle::Oracle::default().classify(&p).unwrap();
//! assert!(class.potentially_self_locking);
//! ```

pub mod analysis;
pub mod corpus;
pub mod oracle;
pub mod parser;
pub mod process;
pub mod refactor;
pub mod semantics;
pub mod typing;

pub use analysis::{analyze, analyze_with, DlMode, Env, LayeredEnv, Permission, Verdict};
pub use oracle::{Classification, LockWitness, Oracle};
pub use parser::{parse_file, ParseError};
pub use process::{struct_eq, Action, CanonicalProcess, Name, Polarity, Process};
pub use refactor::{refactor, RefactorResult, Strategy};
pub use typing::{check_linear, LinearityViolation};
