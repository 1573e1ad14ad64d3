//! Signatures and the polynomial functor P(X) = Σ_a X^{B_a} they induce.
//!
//! A signature declares an ordered set of shapes, each with an ordered set of
//! position labels.  An element of P(X) is a shape a together with an
//! assignment of one carrier element to every position of a.  The root map
//! sends such an element to its shape; applying the functor to a function
//! relabels assignment values and leaves the shape alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("duplicate shape identifier `{0}`")]
    DuplicateShape(String),
    #[error("duplicate position label `{position}` on shape `{shape}`")]
    DuplicatePosition { shape: String, position: String },
    #[error("designated point `{0}` is not a declared shape")]
    UnknownPoint(String),
    #[error("designated point `{0}` must have no positions")]
    PointNotNullary(String),
    #[error("unknown shape `{0}`")]
    UnknownShape(String),
    #[error("assignment does not cover exactly the positions of shape `{shape}`: {detail}")]
    BadAssignment { shape: String, detail: String },
    #[error("assignment value outside the domain of the supplied function")]
    ValueOutsideDomain,
    #[error("shape map does not cover source shape `{0}`")]
    ShapeMapIncomplete(String),
    #[error("shape map sends `{from_shape}` to `{to_shape}`, which is not a target shape")]
    ShapeMapBadTarget { from_shape: String, to_shape: String },
    #[error("position map for shape `{shape}` is not a bijection onto the positions of its image: {detail}")]
    BadPositionBijection { shape: String, detail: String },
    #[error("element over shape `{0}` does not belong to the source signature")]
    ElementNotInSource(String),
}

/// A finite single-sorted signature: ordered shapes, ordered positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    shapes: Vec<String>,
    positions: BTreeMap<String, Vec<String>>,
    point: Option<String>,
}

impl Signature {
    /// Build and validate a signature from `(shape, positions)` declarations
    /// in the order they should keep.
    pub fn new(
        decls: Vec<(String, Vec<String>)>,
        point: Option<String>,
    ) -> Result<Self, SignatureError> {
        let mut shapes = Vec::with_capacity(decls.len());
        let mut positions = BTreeMap::new();
        for (shape, poss) in decls {
            if positions.contains_key(&shape) {
                return Err(SignatureError::DuplicateShape(shape));
            }
            let mut seen = BTreeSet::new();
            for p in &poss {
                if !seen.insert(p.clone()) {
                    return Err(SignatureError::DuplicatePosition {
                        shape: shape.clone(),
                        position: p.clone(),
                    });
                }
            }
            shapes.push(shape.clone());
            positions.insert(shape, poss);
        }
        if let Some(ref pt) = point {
            match positions.get(pt) {
                None => return Err(SignatureError::UnknownPoint(pt.clone())),
                Some(poss) if !poss.is_empty() => {
                    return Err(SignatureError::PointNotNullary(pt.clone()))
                }
                _ => {}
            }
        }
        Ok(Signature { shapes, positions, point })
    }

    /// Shape identifiers in declared order.
    pub fn shapes(&self) -> &[String] {
        &self.shapes
    }

    pub fn has_shape(&self, shape: &str) -> bool {
        self.positions.contains_key(shape)
    }

    /// Position labels of a shape in declared order.
    pub fn positions(&self, shape: &str) -> Result<&[String], SignatureError> {
        self.positions
            .get(shape)
            .map(|v| v.as_slice())
            .ok_or_else(|| SignatureError::UnknownShape(shape.to_string()))
    }

    pub fn arity(&self, shape: &str) -> Result<usize, SignatureError> {
        Ok(self.positions(shape)?.len())
    }

    /// The freely added bottom shape, when this signature is pointed.
    pub fn point(&self) -> Option<&str> {
        self.point.as_deref()
    }

    /// All elements of P(X) for the finite carrier `X`, in a fixed order:
    /// shapes in declared order, assignments in odometer order with the last
    /// position varying fastest and values in carrier order.
    pub fn apply<V: Ord + Clone>(&self, carrier: &[V]) -> Vec<PfElement<V>> {
        let mut out = Vec::new();
        for shape in &self.shapes {
            let poss = &self.positions[shape];
            if poss.is_empty() {
                out.push(PfElement { shape: shape.clone(), assignment: BTreeMap::new() });
                continue;
            }
            if carrier.is_empty() {
                continue;
            }
            let mut counters = vec![0usize; poss.len()];
            loop {
                let assignment: BTreeMap<String, V> = poss
                    .iter()
                    .zip(&counters)
                    .map(|(p, &i)| (p.clone(), carrier[i].clone()))
                    .collect();
                out.push(PfElement { shape: shape.clone(), assignment });
                let mut k = poss.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    counters[k] += 1;
                    if counters[k] < carrier.len() {
                        break;
                    }
                    counters[k] = 0;
                    if k == 0 {
                        break;
                    }
                }
                if counters.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
        out
    }

    /// Freely adjoin a nullary bottom shape; returns the pointed signature and
    /// the inclusion of the old shapes.  The fresh identifier is `⊥`, suffixed
    /// with a counter if that name is already taken.
    pub fn pointed(&self) -> (Signature, SignatureMorphism) {
        let mut fresh = "⊥".to_string();
        let mut n = 0usize;
        while self.positions.contains_key(&fresh) {
            n += 1;
            fresh = format!("⊥{n}");
        }
        let mut decls: Vec<(String, Vec<String>)> = self
            .shapes
            .iter()
            .map(|s| (s.clone(), self.positions[s].clone()))
            .collect();
        decls.push((fresh.clone(), Vec::new()));
        let pointed = Signature::new(decls, Some(fresh)).expect("fresh point cannot clash");
        let shape_map = self.shapes.iter().map(|s| (s.clone(), s.clone())).collect();
        let position_bijections = self
            .shapes
            .iter()
            .map(|s| {
                let id = self.positions[s]
                    .iter()
                    .map(|p| (p.clone(), p.clone()))
                    .collect::<BTreeMap<_, _>>();
                (s.clone(), id)
            })
            .collect();
        let inclusion = SignatureMorphism::new(self.clone(), pointed.clone(), shape_map, position_bijections)
            .expect("inclusion into the pointed signature is a morphism");
        (pointed, inclusion)
    }
}

/// An element of P(X): a shape together with one carrier value per position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PfElement<V: Ord> {
    shape: String,
    assignment: BTreeMap<String, V>,
}

impl<V: Ord + Clone> PfElement<V> {
    /// Validated constructor: the assignment must cover exactly the positions
    /// of `shape` in `sig`.
    pub fn new(
        sig: &Signature,
        shape: impl Into<String>,
        assignment: BTreeMap<String, V>,
    ) -> Result<Self, SignatureError> {
        let shape = shape.into();
        let poss = sig.positions(&shape)?;
        let declared: BTreeSet<&str> = poss.iter().map(|s| s.as_str()).collect();
        let given: BTreeSet<&str> = assignment.keys().map(|s| s.as_str()).collect();
        if declared != given {
            let missing: Vec<_> = declared.difference(&given).cloned().collect();
            let extra: Vec<_> = given.difference(&declared).cloned().collect();
            return Err(SignatureError::BadAssignment {
                shape,
                detail: format!("missing {missing:?}, extraneous {extra:?}"),
            });
        }
        Ok(PfElement { shape, assignment })
    }

    /// The root map: the shape of the element.
    pub fn shape(&self) -> &str {
        &self.shape
    }

    pub fn assignment(&self) -> &BTreeMap<String, V> {
        &self.assignment
    }

    pub fn child(&self, position: &str) -> Option<&V> {
        self.assignment.get(position)
    }

    /// The functor on maps: relabel every assignment value through `phi`,
    /// keeping the shape.  Fails if some value is outside the domain of `phi`.
    pub fn map<W: Ord + Clone>(
        &self,
        phi: &BTreeMap<V, W>,
    ) -> Result<PfElement<W>, SignatureError> {
        let mut assignment = BTreeMap::new();
        for (p, v) in &self.assignment {
            let w = phi.get(v).ok_or(SignatureError::ValueOutsideDomain)?;
            assignment.insert(p.clone(), w.clone());
        }
        Ok(PfElement { shape: self.shape.clone(), assignment })
    }
}

impl<V: Ord + fmt::Display> fmt::Display for PfElement<V> {
    /// `shape(p: v, q: w)` with positions in lexicographic order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.shape)?;
        for (i, (p, v)) in self.assignment.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}: {v}")?;
        }
        write!(f, ")")
    }
}

/// A morphism of signatures, stored fibrewise: a map on shapes together with
/// a position bijection over every source shape.  This is exactly the data of
/// a pullback square between the underlying families, and it induces a
/// natural transformation between the polynomial functors that commutes with
/// the root maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureMorphism {
    source: Signature,
    target: Signature,
    shape_map: BTreeMap<String, String>,
    /// Per source shape a, a bijection positions(a) → positions(shape_map(a)).
    position_bijections: BTreeMap<String, BTreeMap<String, String>>,
}

impl SignatureMorphism {
    pub fn new(
        source: Signature,
        target: Signature,
        shape_map: BTreeMap<String, String>,
        position_bijections: BTreeMap<String, BTreeMap<String, String>>,
    ) -> Result<Self, SignatureError> {
        for a in source.shapes() {
            let b = shape_map
                .get(a)
                .ok_or_else(|| SignatureError::ShapeMapIncomplete(a.clone()))?;
            if !target.has_shape(b) {
                return Err(SignatureError::ShapeMapBadTarget {
                    from_shape: a.clone(),
                    to_shape: b.clone(),
                });
            }
            let bij = position_bijections.get(a).ok_or_else(|| {
                SignatureError::BadPositionBijection {
                    shape: a.clone(),
                    detail: "no position map given".to_string(),
                }
            })?;
            let src_pos: BTreeSet<&str> = source.positions(a)?.iter().map(|s| s.as_str()).collect();
            let tgt_pos: BTreeSet<&str> = target.positions(b)?.iter().map(|s| s.as_str()).collect();
            let keys: BTreeSet<&str> = bij.keys().map(|s| s.as_str()).collect();
            let vals: BTreeSet<&str> = bij.values().map(|s| s.as_str()).collect();
            if keys != src_pos {
                return Err(SignatureError::BadPositionBijection {
                    shape: a.clone(),
                    detail: "domain differs from the source positions".to_string(),
                });
            }
            if vals != tgt_pos || vals.len() != bij.len() {
                return Err(SignatureError::BadPositionBijection {
                    shape: a.clone(),
                    detail: "values are not a bijection onto the target positions".to_string(),
                });
            }
        }
        Ok(SignatureMorphism { source, target, shape_map, position_bijections })
    }

    pub fn source(&self) -> &Signature {
        &self.source
    }

    pub fn target(&self) -> &Signature {
        &self.target
    }

    pub fn shape_image(&self, shape: &str) -> Option<&str> {
        self.shape_map.get(shape).map(|s| s.as_str())
    }

    pub fn position_image(&self, shape: &str, position: &str) -> Option<&str> {
        self.position_bijections.get(shape).and_then(|b| b.get(position)).map(|s| s.as_str())
    }

    /// The induced natural transformation on elements: `(a, t)` becomes
    /// `(α(a), t ∘ bijection⁻¹)`, so the child sitting at position p moves to
    /// position bijection(p).  Commutes with the root maps by construction.
    pub fn apply<V: Ord + Clone>(
        &self,
        e: &PfElement<V>,
    ) -> Result<PfElement<V>, SignatureError> {
        let a = &e.shape;
        if !self.source.has_shape(a) {
            return Err(SignatureError::ElementNotInSource(a.clone()));
        }
        // Re-validate the element against the source so garbage cannot flow through.
        let checked = PfElement::new(&self.source, a.clone(), e.assignment.clone())?;
        let b = self.shape_map[a].clone();
        let bij = &self.position_bijections[a];
        let assignment = checked
            .assignment
            .into_iter()
            .map(|(p, v)| (bij[&p].clone(), v))
            .collect();
        Ok(PfElement { shape: b, assignment })
    }
}
