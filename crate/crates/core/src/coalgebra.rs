//! Finite coalgebras of a polynomial functor and the rational trees they
//! present.
//!
//! A coalgebra is a finite state set X with a step map γ: X → P(X); each
//! state presents the (possibly infinite, always rational) tree obtained by
//! unfolding γ.  Two states present the same tree exactly when they are
//! bisimilar, which partition refinement decides.  Minimisation quotients the
//! reachable part by bisimilarity and renumbers states breadth-first, so the
//! result is a canonical representative: two handles are equal as values if
//! and only if they present the same tree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signature::{PfElement, Signature, SignatureError, SignatureMorphism};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoalgebraError {
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` has no step")]
    MissingStep(String),
    #[error("step declared for `{0}`, which is not a state")]
    StepForUnknownState(String),
    #[error("step of `{state}` is malformed: {source}")]
    BadStep {
        state: String,
        #[source]
        source: SignatureError,
    },
    #[error("step of `{state}` points at `{value}`, which is not a state")]
    StepValueNotAState { state: String, value: String },
    #[error("the two coalgebras are not over the same signature")]
    SignatureMismatch,
    #[error("candidate morphism is not defined on state `{0}`")]
    MorphismNotTotal(String),
    #[error("candidate morphism sends `{state}` to `{value}`, which is not a target state")]
    MorphismBadValue { state: String, value: String },
    #[error("the supplied map is not a coalgebra morphism")]
    NotAMorphism,
    #[error("invalid path: {0}")]
    BadPath(String),
    #[error("path lifting requires h(start) to be the first entry of the target path")]
    LiftStartMismatch,
}

/// A finite P-coalgebra: ordered states and a total step map into P(states).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coalgebra {
    signature: Signature,
    states: Vec<String>,
    step: BTreeMap<String, PfElement<String>>,
}

impl Coalgebra {
    pub fn new(
        signature: Signature,
        states: Vec<String>,
        step: BTreeMap<String, PfElement<String>>,
    ) -> Result<Self, CoalgebraError> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &states {
            if !seen.insert(s.clone()) {
                return Err(CoalgebraError::DuplicateState(s.clone()));
            }
        }
        for s in step.keys() {
            if !seen.contains(s) {
                return Err(CoalgebraError::StepForUnknownState(s.clone()));
            }
        }
        for s in &states {
            let e = step.get(s).ok_or_else(|| CoalgebraError::MissingStep(s.clone()))?;
            // Re-validate the element against the signature.
            PfElement::new(&signature, e.shape(), e.assignment().clone()).map_err(|err| {
                CoalgebraError::BadStep { state: s.clone(), source: err }
            })?;
            for v in e.assignment().values() {
                if !seen.contains(v) {
                    return Err(CoalgebraError::StepValueNotAState {
                        state: s.clone(),
                        value: v.clone(),
                    });
                }
            }
        }
        Ok(Coalgebra { signature, states, step })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn has_state(&self, state: &str) -> bool {
        self.step.contains_key(state)
    }

    /// The step of a state.  States are validated at construction, so this
    /// panics on identifiers that are not states.
    pub fn step(&self, state: &str) -> &PfElement<String> {
        &self.step[state]
    }

    /// The sub-coalgebra of everything reachable from `start`, states in
    /// breadth-first discovery order (positions scanned in declared order).
    pub fn reachable(&self, start: &str) -> Result<Coalgebra, CoalgebraError> {
        if !self.has_state(start) {
            return Err(CoalgebraError::UnknownState(start.to_string()));
        }
        let mut order = vec![start.to_string()];
        let mut seen: std::collections::BTreeSet<String> =
            std::iter::once(start.to_string()).collect();
        let mut front = 0;
        while front < order.len() {
            let x = order[front].clone();
            front += 1;
            let e = self.step(&x);
            for p in self.signature.positions(e.shape()).unwrap() {
                let child = &e.assignment()[p];
                if seen.insert(child.clone()) {
                    order.push(child.clone());
                }
            }
        }
        let step = order.iter().map(|s| (s.clone(), self.step(s).clone())).collect();
        Coalgebra::new(self.signature.clone(), order, step)
    }

    /// All paths from `start` visiting at most `max_states` state entries,
    /// shortest first; within a length, parents in discovery order and
    /// positions in declared order.
    pub fn paths_from(&self, start: &str, max_states: usize) -> Result<Vec<Path>, CoalgebraError> {
        if !self.has_state(start) {
            return Err(CoalgebraError::UnknownState(start.to_string()));
        }
        let mut out = Vec::new();
        if max_states == 0 {
            return Ok(out);
        }
        let mut frontier = vec![Path { states: vec![start.to_string()], labels: vec![] }];
        out.extend(frontier.iter().cloned());
        for _ in 1..max_states {
            let mut next = Vec::new();
            for path in &frontier {
                let last = path.states.last().unwrap();
                let e = self.step(last);
                for p in self.signature.positions(e.shape()).unwrap() {
                    let child = e.assignment()[p].clone();
                    let mut states = path.states.clone();
                    let mut labels = path.labels.clone();
                    states.push(child);
                    labels.push(p.clone());
                    next.push(Path { states, labels });
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        Ok(out)
    }

    /// Unfold a state into classes of bisimilar reachable states and renumber
    /// them breadth-first from the class of `start`: the canonical
    /// representative of the tree presented by `start`.
    pub fn minimize(&self, start: &str) -> TreeHandle {
        self.minimize_with_map(start).0
    }

    /// As [`minimize`](Self::minimize), also returning the class map from
    /// reachable states onto universe states — a coalgebra morphism from the
    /// reachable part onto the universe.
    pub fn minimize_with_map(&self, start: &str) -> (TreeHandle, BTreeMap<String, String>) {
        let reach = self.reachable(start).expect("minimize called on an unknown state");
        let idx: BTreeMap<&str, usize> =
            reach.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let blocks = refine(
            &reach.signature,
            reach.states.len(),
            |i| reach.step(&reach.states[i]),
            |s| idx[s.as_str()],
        );
        // Breadth-first renumbering of blocks, starting from the class of `start`.
        let mut block_name: BTreeMap<usize, String> = BTreeMap::new();
        let mut order: Vec<usize> = vec![blocks[idx[start]]];
        block_name.insert(blocks[idx[start]], "0".to_string());
        // Representative of a block: its first state in reachable order.
        let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, b) in blocks.iter().enumerate() {
            rep.entry(*b).or_insert(i);
        }
        let mut front = 0;
        while front < order.len() {
            let b = order[front];
            front += 1;
            let e = reach.step(&reach.states[rep[&b]]);
            for p in reach.signature.positions(e.shape()).unwrap() {
                let child_block = blocks[idx[e.assignment()[p].as_str()]];
                if !block_name.contains_key(&child_block) {
                    block_name.insert(child_block, order.len().to_string());
                    order.push(child_block);
                }
            }
        }
        let states: Vec<String> = (0..order.len()).map(|i| i.to_string()).collect();
        let mut step = BTreeMap::new();
        for b in &order {
            let e = reach.step(&reach.states[rep[b]]);
            let assignment = e
                .assignment()
                .iter()
                .map(|(p, v)| (p.clone(), block_name[&blocks[idx[v.as_str()]]].clone()))
                .collect();
            step.insert(
                block_name[b].clone(),
                PfElement::new(&reach.signature, e.shape(), assignment).unwrap(),
            );
        }
        let universe = Coalgebra::new(self.signature.clone(), states, step)
            .expect("quotient of a valid coalgebra is valid");
        let class_map = reach
            .states
            .iter()
            .map(|s| (s.clone(), block_name[&blocks[idx[s.as_str()]]].clone()))
            .collect();
        (TreeHandle { universe, state: "0".to_string() }, class_map)
    }
}

/// Partition refinement: start from the partition by root shape and split by
/// child blocks until stable.  Returns a block id per state index.
fn refine<'a>(
    sig: &Signature,
    n: usize,
    step: impl Fn(usize) -> &'a PfElement<String>,
    idx: impl Fn(&String) -> usize,
) -> Vec<usize> {
    let mut blocks: Vec<usize> = {
        let mut ids = BTreeMap::new();
        (0..n)
            .map(|i| {
                let shape = step(i).shape().to_string();
                let next = ids.len();
                *ids.entry(shape).or_insert(next)
            })
            .collect()
    };
    loop {
        let mut ids: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..n)
            .map(|i| {
                let e = step(i);
                let children: Vec<usize> = sig
                    .positions(e.shape())
                    .unwrap()
                    .iter()
                    .map(|p| blocks[idx(&e.assignment()[p])])
                    .collect();
                let key = (blocks[i], children);
                let fresh = ids.len();
                *ids.entry(key).or_insert(fresh)
            })
            .collect();
        if next == blocks {
            return blocks;
        }
        blocks = next;
    }
}

/// Decide whether two states present the same tree: partition refinement on
/// the disjoint union, starting from the partition by root shape.  Both
/// coalgebras must be over the same signature and the states must exist.
/// Child state names are resolved on the side of the union their parent
/// lives on, so overlapping state namespaces are harmless.
pub fn bisimilar(c1: &Coalgebra, x1: &str, c2: &Coalgebra, x2: &str) -> bool {
    assert_eq!(c1.signature, c2.signature, "bisimilar requires a common signature");
    assert!(c1.has_state(x1), "unknown state `{x1}`");
    assert!(c2.has_state(x2), "unknown state `{x2}`");
    let n1 = c1.states.len();
    let n = n1 + c2.states.len();
    let idx1: BTreeMap<&str, usize> =
        c1.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let idx2: BTreeMap<&str, usize> =
        c2.states.iter().enumerate().map(|(i, s)| (s.as_str(), n1 + i)).collect();
    let step_of = |i: usize| -> &PfElement<String> {
        if i < n1 {
            c1.step(&c1.states[i])
        } else {
            c2.step(&c2.states[i - n1])
        }
    };
    let child_idx = |parent: usize, v: &String| -> usize {
        if parent < n1 {
            idx1[v.as_str()]
        } else {
            idx2[v.as_str()]
        }
    };
    let sig = &c1.signature;
    let mut blocks: Vec<usize> = {
        let mut ids = BTreeMap::new();
        (0..n)
            .map(|i| {
                let shape = step_of(i).shape().to_string();
                let fresh = ids.len();
                *ids.entry(shape).or_insert(fresh)
            })
            .collect()
    };
    loop {
        let mut ids: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..n)
            .map(|i| {
                let e = step_of(i);
                let children: Vec<usize> = sig
                    .positions(e.shape())
                    .unwrap()
                    .iter()
                    .map(|p| blocks[child_idx(i, &e.assignment()[p])])
                    .collect();
                let key = (blocks[i], children);
                let fresh = ids.len();
                *ids.entry(key).or_insert(fresh)
            })
            .collect();
        if next == blocks {
            break;
        }
        blocks = next;
    }
    blocks[idx1[x1]] == blocks[idx2[x2]]
}

/// Check that `h` is a coalgebra morphism `source → target`: total, into the
/// target states, and commuting with both steps.
pub fn check_coalgebra_morphism(
    source: &Coalgebra,
    target: &Coalgebra,
    h: &BTreeMap<String, String>,
) -> Result<bool, CoalgebraError> {
    if source.signature != target.signature {
        return Err(CoalgebraError::SignatureMismatch);
    }
    for x in &source.states {
        let y = h.get(x).ok_or_else(|| CoalgebraError::MorphismNotTotal(x.clone()))?;
        if !target.has_state(y) {
            return Err(CoalgebraError::MorphismBadValue { state: x.clone(), value: y.clone() });
        }
    }
    for x in &source.states {
        let lhs = target.step(&h[x]);
        let rhs = source.step(x).map(h).expect("h is total on states");
        if lhs != &rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Transport a coalgebra covariantly along a signature morphism: same states,
/// every step relabelled through the induced natural transformation.  The
/// coalgebra must be over the morphism's source signature.
pub fn relabel(m: &SignatureMorphism, c: &Coalgebra) -> Coalgebra {
    assert_eq!(c.signature(), m.source(), "relabel requires a coalgebra over the source signature");
    let step = c
        .states
        .iter()
        .map(|x| (x.clone(), m.apply(c.step(x)).expect("validated step")))
        .collect();
    Coalgebra::new(m.target().clone(), c.states.clone(), step)
        .expect("relabelling preserves validity")
}

/// A path: alternating states and position labels, x₀ b₀ x₁ … xₙ, where each
/// xᵢ₊₁ is the bᵢ-child of γ(xᵢ).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Path {
    states: Vec<String>,
    labels: Vec<String>,
}

impl Path {
    /// Validate path data against a coalgebra.
    pub fn new(
        c: &Coalgebra,
        states: Vec<String>,
        labels: Vec<String>,
    ) -> Result<Self, CoalgebraError> {
        if states.is_empty() || states.len() != labels.len() + 1 {
            return Err(CoalgebraError::BadPath(
                "a path holds n+1 states and n labels, n ≥ 0".to_string(),
            ));
        }
        for s in &states {
            if !c.has_state(s) {
                return Err(CoalgebraError::UnknownState(s.clone()));
            }
        }
        for i in 0..labels.len() {
            let e = c.step(&states[i]);
            match e.child(&labels[i]) {
                Some(next) if *next == states[i + 1] => {}
                Some(_) => {
                    return Err(CoalgebraError::BadPath(format!(
                        "entry {} does not follow the step of `{}` at `{}`",
                        i + 1,
                        states[i],
                        labels[i]
                    )))
                }
                None => {
                    return Err(CoalgebraError::BadPath(format!(
                        "`{}` is not a position of the shape of `{}`",
                        labels[i], states[i]
                    )))
                }
            }
        }
        Ok(Path { states, labels })
    }

    pub fn single(c: &Coalgebra, state: &str) -> Result<Self, CoalgebraError> {
        Path::new(c, vec![state.to_string()], vec![])
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of state entries (one more than the number of steps).
    pub fn len_states(&self) -> usize {
        self.states.len()
    }

    /// Push the path forward along a state map, validating the result in the
    /// target coalgebra.
    pub fn map_states(
        &self,
        h: &BTreeMap<String, String>,
        target: &Coalgebra,
    ) -> Result<Path, CoalgebraError> {
        let states = self
            .states
            .iter()
            .map(|s| h.get(s).cloned().ok_or_else(|| CoalgebraError::MorphismNotTotal(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Path::new(target, states, self.labels.clone())
    }
}

impl std::fmt::Display for Path {
    /// `<x0,b0,x1,…>` — the odd-length alternating form.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{}", self.states[0])?;
        for i in 0..self.labels.len() {
            write!(f, ",{},{}", self.labels[i], self.states[i + 1])?;
        }
        write!(f, ">")
    }
}

/// Lift a path in the target of a verified coalgebra morphism to the unique
/// path in the source starting at `start`.  The morphism is re-verified; the
/// first entry of `tau` must be h(start).
pub fn lift_path(
    source: &Coalgebra,
    target: &Coalgebra,
    h: &BTreeMap<String, String>,
    tau: &Path,
    start: &str,
) -> Result<Path, CoalgebraError> {
    if !check_coalgebra_morphism(source, target, h)? {
        return Err(CoalgebraError::NotAMorphism);
    }
    // Re-validate the path in the target.
    let tau = Path::new(target, tau.states.clone(), tau.labels.clone())?;
    if !source.has_state(start) {
        return Err(CoalgebraError::UnknownState(start.to_string()));
    }
    if h[start] != tau.states[0] {
        return Err(CoalgebraError::LiftStartMismatch);
    }
    let mut states = vec![start.to_string()];
    for label in &tau.labels {
        let x = states.last().unwrap();
        let e = source.step(x);
        // h is a morphism, so the source shape matches the target shape and
        // carries the same positions.
        let next = e.child(label).ok_or_else(|| {
            CoalgebraError::BadPath(format!("`{label}` is not a position of the shape of `{x}`"))
        })?;
        states.push(next.clone());
    }
    Path::new(source, states, tau.labels.clone())
}

/// A tree presented by its canonical (minimised, breadth-first renumbered)
/// universe together with a distinguished state — always state `"0"`.
/// Equality of handles is equality of presented trees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeHandle {
    universe: Coalgebra,
    state: String,
}

impl TreeHandle {
    pub fn universe(&self) -> &Coalgebra {
        &self.universe
    }

    pub fn state(&self) -> &str {
        &self.state
    }

    pub fn signature(&self) -> &Signature {
        self.universe.signature()
    }

    pub fn bisimilar_to(&self, other: &TreeHandle) -> bool {
        bisimilar(&self.universe, &self.state, &other.universe, &other.state)
    }
}
