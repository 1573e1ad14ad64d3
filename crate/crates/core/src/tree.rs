//! Finite approximations of rational trees and their path-set view.
//!
//! Truncating a state at depth n yields a finite tree whose nodes beyond
//! level n are replaced by the cut marker ⊥.  The family of truncations of a
//! fixed state is coherent — truncating the depth-m approximation at depth
//! n < m gives the depth-n approximation — and conversely any coherent family
//! of finite trees describes a unique tree.  A tree can equivalently be given
//! by the set of shape-labelled paths it supports; membership along a
//! coalgebra state is decidable by walking the step map, and a set of
//! sequences describes a tree exactly when the two coherence clauses below
//! hold.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::coalgebra::{Coalgebra, CoalgebraError, TreeHandle};
use crate::signature::Signature;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("the signature is not pointed")]
    NotPointed,
    #[error("sequence must alternate shapes and positions and start and end with a shape")]
    BadSequenceLength,
    #[error("`{0}` is not a shape of the signature")]
    UnknownShape(String),
    #[error("`{position}` is not a position of shape `{shape}`")]
    BadSequencePosition { shape: String, position: String },
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
}

/// A finite tree over a signature: either a node with one subtree per
/// position of its shape, or the cut marker ⊥ standing for an unexpanded
/// remainder.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FiniteTree {
    Cut,
    Node { shape: String, children: BTreeMap<String, FiniteTree> },
}

impl FiniteTree {
    pub fn node(shape: impl Into<String>, children: BTreeMap<String, FiniteTree>) -> Self {
        FiniteTree::Node { shape: shape.into(), children }
    }

    /// Depth of the deepest node, counting nodes: ⊥ has depth 0, a node is
    /// one deeper than its deepest child.
    pub fn depth(&self) -> usize {
        match self {
            FiniteTree::Cut => 0,
            FiniteTree::Node { children, .. } => {
                1 + children.values().map(FiniteTree::depth).max().unwrap_or(0)
            }
        }
    }

    /// Replace everything below level n with ⊥ (level 0 is everything).
    pub fn truncate(&self, n: usize) -> FiniteTree {
        if n == 0 {
            return FiniteTree::Cut;
        }
        match self {
            FiniteTree::Cut => FiniteTree::Cut,
            FiniteTree::Node { shape, children } => FiniteTree::Node {
                shape: shape.clone(),
                children: children
                    .iter()
                    .map(|(p, t)| (p.clone(), t.truncate(n - 1)))
                    .collect(),
            },
        }
    }

    /// The JSON form: `{"cut": true}` for ⊥, otherwise
    /// `{"shape": …, "children": {position: subtree, …}}`.
    pub fn to_json(&self) -> Value {
        match self {
            FiniteTree::Cut => json!({"cut": true}),
            FiniteTree::Node { shape, children } => {
                let mut kids = Map::new();
                for (p, t) in children {
                    kids.insert(p.clone(), t.to_json());
                }
                json!({"shape": shape, "children": Value::Object(kids)})
            }
        }
    }
}

impl Serialize for FiniteTree {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl Coalgebra {
    /// The depth-n unfolding of a state: level-n truncation of the tree it
    /// presents.  Depth 0 is ⊥.
    pub fn unfold(&self, state: &str, depth: usize) -> Result<FiniteTree, CoalgebraError> {
        if !self.has_state(state) {
            return Err(CoalgebraError::UnknownState(state.to_string()));
        }
        Ok(self.unfold_unchecked(state, depth))
    }

    fn unfold_unchecked(&self, state: &str, depth: usize) -> FiniteTree {
        if depth == 0 {
            return FiniteTree::Cut;
        }
        let e = self.step(state);
        let children = e
            .assignment()
            .iter()
            .map(|(p, child)| (p.clone(), self.unfold_unchecked(child, depth - 1)))
            .collect();
        FiniteTree::Node { shape: e.shape().to_string(), children }
    }
}

impl TreeHandle {
    /// Truncate the presented tree at depth n.
    pub fn truncate(&self, depth: usize) -> FiniteTree {
        self.universe().unfold(self.state(), depth).expect("handle state exists")
    }

    /// Does the presented tree support this shape-labelled sequence?  The
    /// first shape must be the root shape and each following shape must sit
    /// at the indicated child.
    pub fn path_set_contains(&self, seq: &PathSequence) -> bool {
        contains_from(self.universe(), self.state(), seq, 0)
    }

    /// Check the two path-set coherence clauses for the presented tree's
    /// membership oracle over the window of sequences with at most `max_len`
    /// shape entries.
    pub fn path_set_coherent(&self, max_len: usize) -> bool {
        let sig = self.signature().clone();
        path_set_coherent(&sig, |seq| self.path_set_contains(seq), max_len)
    }
}

fn contains_from(c: &Coalgebra, state: &str, seq: &PathSequence, at: usize) -> bool {
    let e = c.step(state);
    if e.shape() != seq.shapes[at] {
        return false;
    }
    if at == seq.labels.len() {
        return true;
    }
    match e.child(&seq.labels[at]) {
        Some(next) => contains_from(c, next, seq, at + 1),
        None => false,
    }
}

/// Is `seq` (indexed 1..=k by depth) a coherent approximation sequence, i.e.
/// does truncating the depth-m entry at depth n give the depth-n entry for
/// all n < m?
pub fn is_approximation_sequence(seq: &[FiniteTree]) -> bool {
    for m in 0..seq.len() {
        for n in 0..m {
            if seq[m].truncate(n + 1) != seq[n] {
                return false;
            }
        }
    }
    true
}

/// Reinterpret a state of a coalgebra over a pointed signature as a tree
/// over the unpointed base: `None` when ⊥ occurs among the states reachable
/// from `state`, otherwise the handle of `state` over the base signature.
pub fn strip_point(c: &Coalgebra, state: &str) -> Result<Option<TreeHandle>, TreeError> {
    let point = c.signature().point().ok_or(TreeError::NotPointed)?.to_string();
    let reach = c.reachable(state)?;
    if reach.states().iter().any(|s| reach.step(s).shape() == point) {
        return Ok(None);
    }
    let base_decls: Vec<(String, Vec<String>)> = c
        .signature()
        .shapes()
        .iter()
        .filter(|s| **s != point)
        .map(|s| (s.clone(), c.signature().positions(s).unwrap().to_vec()))
        .collect();
    let base = Signature::new(base_decls, None).expect("dropping the point keeps validity");
    let step = reach
        .states()
        .iter()
        .map(|s| (s.clone(), reach.step(s).clone()))
        .collect();
    let stripped = Coalgebra::new(base, reach.states().to_vec(), step)
        .expect("no reachable state uses the point shape");
    Ok(Some(stripped.minimize(state)))
}

/// A shape-labelled sequence a₀ b₀ a₁ … aₙ with every bᵢ a position of aᵢ:
/// the address vocabulary of path sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PathSequence {
    shapes: Vec<String>,
    labels: Vec<String>,
}

impl PathSequence {
    pub fn new(
        sig: &Signature,
        shapes: Vec<String>,
        labels: Vec<String>,
    ) -> Result<Self, TreeError> {
        if shapes.is_empty() || shapes.len() != labels.len() + 1 {
            return Err(TreeError::BadSequenceLength);
        }
        for a in &shapes {
            if !sig.has_shape(a) {
                return Err(TreeError::UnknownShape(a.clone()));
            }
        }
        for (i, b) in labels.iter().enumerate() {
            if !sig.positions(&shapes[i]).unwrap().contains(b) {
                return Err(TreeError::BadSequencePosition {
                    shape: shapes[i].clone(),
                    position: b.clone(),
                });
            }
        }
        Ok(PathSequence { shapes, labels })
    }

    pub fn shapes(&self) -> &[String] {
        &self.shapes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Extend by one step: `… aₙ` becomes `… aₙ bₙ aₙ₊₁`.
    pub fn extended(&self, sig: &Signature, label: &str, shape: &str) -> Result<Self, TreeError> {
        let mut shapes = self.shapes.clone();
        let mut labels = self.labels.clone();
        labels.push(label.to_string());
        shapes.push(shape.to_string());
        PathSequence::new(sig, shapes, labels)
    }

    /// All valid sequences with at most `max_len` shape entries, shortest
    /// first; shapes and positions scanned in declared order.
    pub fn enumerate(sig: &Signature, max_len: usize) -> Vec<PathSequence> {
        let mut out = Vec::new();
        if max_len == 0 {
            return out;
        }
        let mut frontier: Vec<PathSequence> = sig
            .shapes()
            .iter()
            .map(|a| PathSequence { shapes: vec![a.clone()], labels: vec![] })
            .collect();
        out.extend(frontier.iter().cloned());
        for _ in 1..max_len {
            let mut next = Vec::new();
            for seq in &frontier {
                let last = seq.shapes.last().unwrap();
                for b in sig.positions(last).unwrap() {
                    for a in sig.shapes() {
                        let mut shapes = seq.shapes.clone();
                        let mut labels = seq.labels.clone();
                        labels.push(b.clone());
                        shapes.push(a.clone());
                        next.push(PathSequence { shapes, labels });
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

impl std::fmt::Display for PathSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{}", self.shapes[0])?;
        for i in 0..self.labels.len() {
            write!(f, ",{},{}", self.labels[i], self.shapes[i + 1])?;
        }
        write!(f, ">")
    }
}

/// Check the coherence clauses for an arbitrary membership oracle over the
/// window of sequences with at most `max_len` shape entries:
///
/// 1. exactly one single-shape sequence is a member, and
/// 2. every member that still fits an extension inside the window extends
///    uniquely along every position of its last shape.
pub fn path_set_coherent(
    sig: &Signature,
    mut member: impl FnMut(&PathSequence) -> bool,
    max_len: usize,
) -> bool {
    if max_len == 0 {
        return true;
    }
    let roots = sig
        .shapes()
        .iter()
        .filter(|a| {
            member(&PathSequence { shapes: vec![(*a).clone()], labels: vec![] })
        })
        .count();
    if roots != 1 {
        return false;
    }
    for seq in PathSequence::enumerate(sig, max_len.saturating_sub(1)) {
        if !member(&seq) {
            continue;
        }
        let last = seq.shapes.last().unwrap();
        for b in sig.positions(last).unwrap() {
            let extensions = sig
                .shapes()
                .iter()
                .filter(|a| member(&seq.extended(sig, b, a).unwrap()))
                .count();
            if extensions != 1 {
                return false;
            }
        }
    }
    true
}
