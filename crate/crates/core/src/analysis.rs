//! Compositional static detection of potential self-locks.
//!
//! Each prefix contributes a permission (`i`, `o`, or the matched pair `io`)
//! to a layer of a layered environment, one layer per prefix depth. A
//! detection fires when a layer with no matched permission finds all of its
//! complements in the layers below it: the actions at that depth wait on each
//! other in a cycle, and the co-actions they would need are locked underneath
//! them, so no external process can help without breaking linearity.
//!
//! The analysis is compositional: parallel components are analysed in
//! isolation and their verdicts merged. A fully matched top layer is
//! discarded on merge, which lets the sub-layers be examined as the new top,
//! mirroring the synchronisation of the guarding actions.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::process::{CanonicalProcess, Name, Polarity, Process};

/// Static capability recorded for a name: input, output, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Permission {
    In,
    Out,
    Both,
}

impl Permission {
    /// Merge of two permissions. Only `i + o` (either way) is defined; a
    /// clash of equal polarities or anything already matched signals a
    /// non-linear use of the name.
    pub fn merge(self, other: Permission) -> Option<Permission> {
        match (self, other) {
            (Permission::In, Permission::Out) | (Permission::Out, Permission::In) => {
                Some(Permission::Both)
            }
            _ => None,
        }
    }

    /// Complement: swaps `i` and `o`, fixes `io`.
    pub fn co(self) -> Permission {
        match self {
            Permission::In => Permission::Out,
            Permission::Out => Permission::In,
            Permission::Both => Permission::Both,
        }
    }

    /// Sub-permission order: reflexive, plus `i ⊑ io` and `o ⊑ io`.
    pub fn within(self, other: Permission) -> bool {
        self == other || other == Permission::Both
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Permission::In => "i",
            Permission::Out => "o",
            Permission::Both => "io",
        }
    }
}

impl From<Polarity> for Permission {
    fn from(p: Polarity) -> Self {
        match p {
            Polarity::In => Permission::In,
            Polarity::Out => Permission::Out,
        }
    }
}

impl fmt::Display for Permission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Permission {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// Two permissions for the same name failed to merge.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("conflicting permissions for name '{0}'")]
pub struct MergeConflict(pub Name);

/// A permission environment: a finite map from names to permissions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Env(BTreeMap<Name, Permission>);

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn singleton(name: Name, permission: Permission) -> Self {
        Env(BTreeMap::from([(name, permission)]))
    }

    pub fn get(&self, name: &Name) -> Option<Permission> {
        self.0.get(name).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, Permission)> {
        self.0.iter().map(|(n, p)| (n, *p))
    }

    /// Pointwise union; shared names merge their permissions.
    pub fn merge(&self, other: &Env) -> Result<Env, MergeConflict> {
        let mut out = self.0.clone();
        for (name, perm) in &other.0 {
            match out.entry(name.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(*perm);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let merged = e
                        .get()
                        .merge(*perm)
                        .ok_or_else(|| MergeConflict(name.clone()))?;
                    e.insert(merged);
                }
            }
        }
        Ok(Env(out))
    }

    /// Same domain, every permission complemented.
    pub fn complement(&self) -> Env {
        Env(self.0.iter().map(|(n, p)| (n.clone(), p.co())).collect())
    }

    /// The deadlock predicate on environments.
    ///
    /// Strict mode requires the range to be exactly `{i, o}`. Relaxed mode
    /// (the default) only requires a non-empty environment with no matched
    /// `io` entry, which also covers one-sided cycles such as a pair of
    /// inputs waiting on each other's guarded outputs.
    pub fn is_deadlock(&self, mode: DlMode) -> bool {
        if self.0.is_empty() {
            return false;
        }
        match mode {
            DlMode::Strict => {
                self.0.values().any(|p| *p == Permission::In)
                    && self.0.values().any(|p| *p == Permission::Out)
                    && !self.0.values().any(|p| *p == Permission::Both)
            }
            DlMode::Relaxed => !self.0.values().any(|p| *p == Permission::Both),
        }
    }

    /// Non-empty and every permission matched.
    pub fn is_complete(&self) -> bool {
        !self.0.is_empty() && self.0.values().all(|p| *p == Permission::Both)
    }

    /// Pointwise containment under the sub-permission order.
    pub fn is_subset_of(&self, other: &Env) -> bool {
        self.0
            .iter()
            .all(|(n, p)| other.get(n).is_some_and(|q| p.within(q)))
    }
}

impl FromIterator<(Name, Permission)> for Env {
    fn from_iter<T: IntoIterator<Item = (Name, Permission)>>(iter: T) -> Self {
        Env(iter.into_iter().collect())
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (name, perm)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}:{perm}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for Env {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, perm) in &self.0 {
            map.serialize_entry(name.as_str(), perm.as_str())?;
        }
        map.end()
    }
}

/// An ordered list of environments, one per prefix depth; empty is `ε`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LayeredEnv(Vec<Env>);

impl LayeredEnv {
    pub fn empty() -> Self {
        LayeredEnv::default()
    }

    pub fn from_layers(layers: Vec<Env>) -> Self {
        LayeredEnv(layers)
    }

    pub fn layers(&self) -> &[Env] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn prepend(&self, top: Env) -> LayeredEnv {
        let mut layers = Vec::with_capacity(self.0.len() + 1);
        layers.push(top);
        layers.extend(self.0.iter().cloned());
        LayeredEnv(layers)
    }

    fn split_top(&self) -> Option<(&Env, LayeredEnv)> {
        let (top, rest) = self.0.split_first()?;
        Some((top, LayeredEnv(rest.to_vec())))
    }

    /// Layerwise merge; the shorter list behaves as if padded with `ε`.
    pub fn merge(&self, other: &LayeredEnv) -> Result<LayeredEnv, MergeConflict> {
        let len = self.0.len().max(other.0.len());
        let mut layers = Vec::with_capacity(len);
        for depth in 0..len {
            let layer = match (self.0.get(depth), other.0.get(depth)) {
                (Some(a), Some(b)) => a.merge(b)?,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            };
            layers.push(layer);
        }
        Ok(LayeredEnv(layers))
    }

    /// Merge-fold of all layers into a single environment.
    pub fn flatten(&self) -> Result<Env, MergeConflict> {
        let mut out = Env::new();
        for layer in &self.0 {
            out = out.merge(layer)?;
        }
        Ok(out)
    }
}

impl fmt::Display for LayeredEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for layer in &self.0 {
            write!(f, "{layer}; ")?;
        }
        f.write_str("ε")
    }
}

impl Serialize for LayeredEnv {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(&self.0)
    }
}

/// Which deadlock predicate the detection checks use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DlMode {
    Strict,
    #[default]
    Relaxed,
}

/// Analysis outcome: either the layered environment of the process or a
/// detection carrying the offending top-layer environments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Layers(LayeredEnv),
    Detected(Vec<Env>),
}

impl Verdict {
    pub fn is_detection(&self) -> bool {
        matches!(self, Verdict::Detected(_))
    }

    pub fn reports(&self) -> &[Env] {
        match self {
            Verdict::Detected(reports) => reports,
            Verdict::Layers(_) => &[],
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Layers(h) => write!(f, "{h}"),
            Verdict::Detected(reports) => {
                f.write_str("DL")?;
                for report in reports {
                    write!(f, " {report}")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Verdict::Detected(reports) => {
                let mut s = serializer.serialize_struct("Verdict", 2)?;
                s.serialize_field("verdict", "locked")?;
                s.serialize_field("reports", reports)?;
                s.end()
            }
            Verdict::Layers(layers) => {
                let mut s = serializer.serialize_struct("Verdict", 2)?;
                s.serialize_field("verdict", "no-detection")?;
                s.serialize_field("layers", layers)?;
                s.end()
            }
        }
    }
}

/// Extends a verdict with the permission of one more guarding prefix.
///
/// A detection below passes through untouched. Otherwise the new singleton
/// environment either fires a detection of its own (it is deadlocked and its
/// complement is already locked underneath it) or becomes the new top layer.
pub fn verdict_prefix(env: Env, verdict: Verdict, mode: DlMode) -> Result<Verdict, MergeConflict> {
    match verdict {
        Verdict::Detected(reports) => Ok(Verdict::Detected(reports)),
        Verdict::Layers(layers) => {
            if env.is_deadlock(mode) && env.complement().is_subset_of(&layers.flatten()?) {
                Ok(Verdict::Detected(vec![env]))
            } else {
                Ok(Verdict::Layers(layers.prepend(env)))
            }
        }
    }
}

/// Merges the verdicts of two parallel components.
///
/// Detections absorb, concatenating their reports. For two layered verdicts
/// the merged top layer is tested for a deadlock whose complements all sit in
/// the merged sub-layers; a fully matched top layer is dropped so the
/// sub-layers can be examined; otherwise the layered environments merge
/// pointwise.
pub fn verdict_merge(v1: Verdict, v2: Verdict, mode: DlMode) -> Result<Verdict, MergeConflict> {
    match (v1, v2) {
        (Verdict::Detected(mut r1), Verdict::Detected(r2)) => {
            r1.extend(r2);
            Ok(Verdict::Detected(r1))
        }
        (Verdict::Detected(r), Verdict::Layers(_)) | (Verdict::Layers(_), Verdict::Detected(r)) => {
            Ok(Verdict::Detected(r))
        }
        (Verdict::Layers(h1), Verdict::Layers(h2)) => {
            if let (Some((top1, rest1)), Some((top2, rest2))) = (h1.split_top(), h2.split_top()) {
                let top = top1.merge(top2)?;
                if top.is_deadlock(mode)
                    && top
                        .complement()
                        .is_subset_of(&rest1.merge(&rest2)?.flatten()?)
                {
                    return Ok(Verdict::Detected(vec![top]));
                }
                if top.is_complete() {
                    return verdict_merge(Verdict::Layers(rest1), Verdict::Layers(rest2), mode);
                }
            }
            Ok(Verdict::Layers(h1.merge(&h2)?))
        }
    }
}

/// Runs the analysis with the default relaxed deadlock predicate.
///
/// The input is expected to be linear (see [`crate::typing::check_linear`]);
/// on non-linear input a [`MergeConflict`] may surface.
pub fn analyze(p: &Process) -> Result<Verdict, MergeConflict> {
    analyze_with(p, DlMode::default())
}

pub fn analyze_with(p: &Process, mode: DlMode) -> Result<Verdict, MergeConflict> {
    analyze_canonical(&p.canonical(), mode)
}

/// Analysis of a canonical form: component verdicts folded left-to-right in
/// canonical component order, so the result is deterministic.
pub fn analyze_canonical(p: &CanonicalProcess, mode: DlMode) -> Result<Verdict, MergeConflict> {
    let mut verdicts = component_verdicts(p, mode)?.into_iter();
    let Some(first) = verdicts.next() else {
        return Ok(Verdict::Layers(LayeredEnv::empty()));
    };
    verdicts.try_fold(first, |acc, v| verdict_merge(acc, v, mode))
}

/// The verdict of each canonical component in isolation, in canonical order.
pub fn component_verdicts(
    p: &CanonicalProcess,
    mode: DlMode,
) -> Result<Vec<Verdict>, MergeConflict> {
    p.components()
        .iter()
        .map(|c| {
            let below = analyze_canonical(&c.continuation, mode)?;
            let env = Env::singleton(c.action.name.clone(), c.action.polarity.into());
            verdict_prefix(env, below, mode)
        })
        .collect()
}

/// The layered environment of a process, built without any detection checks:
/// each prefix stacks its permission on the layers of its continuation, and
/// parallel components merge layerwise.
pub fn layering(p: &Process) -> Result<LayeredEnv, MergeConflict> {
    fn canonical_layering(p: &CanonicalProcess) -> Result<LayeredEnv, MergeConflict> {
        let mut out = LayeredEnv::empty();
        for c in p.components() {
            let below = canonical_layering(&c.continuation)?;
            let env = Env::singleton(c.action.name.clone(), c.action.polarity.into());
            out = out.merge(&below.prepend(env))?;
        }
        Ok(out)
    }
    canonical_layering(&p.canonical())
}
