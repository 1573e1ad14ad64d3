//! Signatures fibred over a finite index set, and trees that stay inside one
//! fibre.
//!
//! An indexed signature assigns every shape an index.  Over a carrier with an
//! indexing map ξ, the fibred application keeps exactly the elements whose
//! children all carry the index of the shape — the equaliser carving the
//! fibred functor out of the plain one.  A tree is fibre-coherent when every
//! reachable shape lives in the fibre of the root; this is equivalent to a
//! tagging comparison: tagging every shape with its own fibre agrees with
//! tagging everything with the root's fibre.  Reindexing along x: J → I
//! replaces each shape by one copy per index mapped onto its fibre.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalgebra::{bisimilar, relabel, Coalgebra, TreeHandle};
use crate::signature::{PfElement, Signature, SignatureMorphism};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexedError {
    #[error("duplicate index `{0}`")]
    DuplicateIndex(String),
    #[error("no fibre assigned to shape `{0}`")]
    FibreMissing(String),
    #[error("shape `{shape}` is assigned to `{index}`, which is not an index")]
    FibreBadValue { shape: String, index: String },
    #[error("ξ is not defined on carrier element `{0}`")]
    XiNotTotal(String),
    #[error("ξ maps a carrier element to `{0}`, which is not an index")]
    XiBadValue(String),
    #[error("`{0}` is not an index")]
    UnknownIndex(String),
    #[error("x is not defined on `{0}`")]
    XNotTotal(String),
    #[error("x maps `{j}` to `{value}`, which is not an index")]
    XBadValue { j: String, value: String },
}

/// Shape identifier for a (shape, tag) pair in a product or reindexed
/// signature.
pub fn pair_shape(left: &str, right: &str) -> String {
    format!("{left}*{right}")
}

/// A signature together with an index per shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedSignature {
    base: Signature,
    index: Vec<String>,
    fibre_of: BTreeMap<String, String>,
}

impl IndexedSignature {
    pub fn new(
        base: Signature,
        index: Vec<String>,
        fibre_of: BTreeMap<String, String>,
    ) -> Result<Self, IndexedError> {
        let mut seen = std::collections::BTreeSet::new();
        for i in &index {
            if !seen.insert(i.clone()) {
                return Err(IndexedError::DuplicateIndex(i.clone()));
            }
        }
        for a in base.shapes() {
            let i = fibre_of.get(a).ok_or_else(|| IndexedError::FibreMissing(a.clone()))?;
            if !seen.contains(i) {
                return Err(IndexedError::FibreBadValue { shape: a.clone(), index: i.clone() });
            }
        }
        Ok(IndexedSignature { base, index, fibre_of })
    }

    pub fn base(&self) -> &Signature {
        &self.base
    }

    pub fn index(&self) -> &[String] {
        &self.index
    }

    pub fn fibre_of(&self, shape: &str) -> &str {
        &self.fibre_of[shape]
    }

    /// The fibred application: elements of P(carrier) whose children all
    /// carry (under ξ) the fibre of the shape.
    pub fn apply<V: Ord + Clone>(
        &self,
        carrier: &[V],
        xi: &BTreeMap<V, String>,
    ) -> Result<Vec<PfElement<V>>, IndexedError> {
        for v in carrier {
            let i = xi.get(v).ok_or_else(|| IndexedError::XiNotTotal(format_value(carrier, v)))?;
            if !self.index.contains(i) {
                return Err(IndexedError::XiBadValue(i.clone()));
            }
        }
        Ok(self
            .base
            .apply(carrier)
            .into_iter()
            .filter(|e| {
                let fibre = &self.fibre_of[e.shape()];
                e.assignment().values().all(|v| &xi[v] == fibre)
            })
            .collect())
    }

    /// Does every reachable shape of the presented tree live in the fibre of
    /// the root?
    pub fn fibre_coherent(&self, h: &TreeHandle) -> bool {
        assert_eq!(h.signature(), &self.base, "handle must live over the base signature");
        let u = h.universe();
        let root_fibre = &self.fibre_of[u.step(h.state()).shape()];
        u.states().iter().all(|s| &self.fibre_of[u.step(s).shape()] == root_fibre)
    }

    /// The product signature with one copy of every shape per index, shapes
    /// ordered shape-major, plus the lookup table back to the components.
    pub fn product_signature(&self) -> (Signature, BTreeMap<String, (String, String)>) {
        let mut decls = Vec::new();
        let mut table = BTreeMap::new();
        for a in self.base.shapes() {
            for i in &self.index {
                let id = pair_shape(a, i);
                decls.push((id.clone(), self.base.positions(a).unwrap().to_vec()));
                table.insert(id, (a.clone(), i.clone()));
            }
        }
        let sig = Signature::new(decls, None).expect("pairing keeps identifiers distinct");
        (sig, table)
    }

    /// Tag every reachable shape of the presented tree with the fixed index
    /// `i`, over the product signature.
    pub fn chi(&self, h: &TreeHandle, i: &str) -> Result<TreeHandle, IndexedError> {
        if !self.index.contains(&i.to_string()) {
            return Err(IndexedError::UnknownIndex(i.to_string()));
        }
        let (product, _) = self.product_signature();
        let u = h.universe();
        let step = u
            .states()
            .iter()
            .map(|s| {
                let e = u.step(s);
                let tagged =
                    PfElement::new(&product, pair_shape(e.shape(), i), e.assignment().clone())
                        .expect("tagged shape exists in the product");
                (s.clone(), tagged)
            })
            .collect();
        let tagged = Coalgebra::new(product, u.states().to_vec(), step)
            .expect("tagging preserves validity");
        Ok(tagged.minimize(h.state()))
    }

    /// The tagging comparison deciding fibre membership: tagging every shape
    /// with its own fibre agrees (up to bisimilarity over the product
    /// signature) with tagging everything with the root's fibre.
    pub fn equaliser_agrees(&self, h: &TreeHandle) -> Result<bool, IndexedError> {
        assert_eq!(h.signature(), &self.base, "handle must live over the base signature");
        let (product, _) = self.product_signature();
        let shape_map = self
            .base
            .shapes()
            .iter()
            .map(|a| (a.clone(), pair_shape(a, &self.fibre_of[a])))
            .collect();
        let bijections = self
            .base
            .shapes()
            .iter()
            .map(|a| {
                let id = self
                    .base
                    .positions(a)
                    .unwrap()
                    .iter()
                    .map(|p| (p.clone(), p.clone()))
                    .collect::<BTreeMap<_, _>>();
                (a.clone(), id)
            })
            .collect();
        let tag_own = SignatureMorphism::new(self.base.clone(), product, shape_map, bijections)
            .expect("tagging by own fibre is a morphism");
        let lhs = relabel(&tag_own, h.universe()).minimize(h.state());
        let root_fibre = self.fibre_of[h.universe().step(h.state()).shape()].clone();
        let rhs = self.chi(h, &root_fibre)?;
        Ok(bisimilar(lhs.universe(), lhs.state(), rhs.universe(), rhs.state()))
    }

    /// Reindex along x: J → I: one shape (j, a) for every j and every shape a
    /// whose fibre is x(j), fibred over J, together with the projection back
    /// onto the base signature.
    pub fn reindex(
        &self,
        index_j: Vec<String>,
        x: &BTreeMap<String, String>,
    ) -> Result<(IndexedSignature, SignatureMorphism), IndexedError> {
        for j in &index_j {
            let i = x.get(j).ok_or_else(|| IndexedError::XNotTotal(j.clone()))?;
            if !self.index.contains(i) {
                return Err(IndexedError::XBadValue { j: j.clone(), value: i.clone() });
            }
        }
        let mut decls = Vec::new();
        let mut fibre = BTreeMap::new();
        let mut shape_map = BTreeMap::new();
        let mut bijections = BTreeMap::new();
        for j in &index_j {
            for a in self.base.shapes() {
                if self.fibre_of[a] != x[j] {
                    continue;
                }
                let id = pair_shape(j, a);
                let poss = self.base.positions(a).unwrap().to_vec();
                bijections.insert(
                    id.clone(),
                    poss.iter().map(|p| (p.clone(), p.clone())).collect::<BTreeMap<_, _>>(),
                );
                decls.push((id.clone(), poss));
                fibre.insert(id.clone(), j.clone());
                shape_map.insert(id, a.clone());
            }
        }
        let new_base = Signature::new(decls, None).expect("pairing keeps identifiers distinct");
        let reindexed = IndexedSignature::new(new_base.clone(), index_j, fibre)?;
        let projection =
            SignatureMorphism::new(new_base, self.base.clone(), shape_map, bijections)
                .expect("projection onto the base is a morphism");
        Ok((reindexed, projection))
    }

    /// Transport a fibre-coherent tree whose root fibre is x(j) across the
    /// reindexing: relabel every shape a to (j, a).  `None` when the tree is
    /// not fibre-coherent or its root fibre is not x(j).
    pub fn reindex_handle(
        &self,
        j: &str,
        x: &BTreeMap<String, String>,
        h: &TreeHandle,
    ) -> Result<Option<TreeHandle>, IndexedError> {
        let i = x.get(j).ok_or_else(|| IndexedError::XNotTotal(j.to_string()))?;
        if !self.index.contains(i) {
            return Err(IndexedError::XBadValue { j: j.to_string(), value: i.clone() });
        }
        if !self.fibre_coherent(h) {
            return Ok(None);
        }
        let root_fibre = &self.fibre_of[h.universe().step(h.state()).shape()];
        if root_fibre != i {
            return Ok(None);
        }
        let (reindexed, _) = self.reindex(vec![j.to_string()], x)?;
        // The tree only touches shapes in the selected fibre, so it lives
        // over the sub-signature those shapes span.
        let sub_decls: Vec<(String, Vec<String>)> = self
            .base
            .shapes()
            .iter()
            .filter(|a| &self.fibre_of[*a] == i)
            .map(|a| (a.clone(), self.base.positions(a).unwrap().to_vec()))
            .collect();
        let sub = Signature::new(sub_decls, None).expect("sub-signature of the base");
        let u = h.universe();
        let step = u.states().iter().map(|s| (s.clone(), u.step(s).clone())).collect();
        let over_sub = Coalgebra::new(sub.clone(), u.states().to_vec(), step)
            .expect("fibre-coherent trees live over the fibre's shapes");
        let shape_map = sub.shapes().iter().map(|a| (a.clone(), pair_shape(j, a))).collect();
        let bijections = sub
            .shapes()
            .iter()
            .map(|a| {
                let id = sub
                    .positions(a)
                    .unwrap()
                    .iter()
                    .map(|p| (p.clone(), p.clone()))
                    .collect::<BTreeMap<_, _>>();
                (a.clone(), id)
            })
            .collect();
        let tag = SignatureMorphism::new(sub, reindexed.base().clone(), shape_map, bijections)
            .expect("fibre inclusion into the reindexed signature");
        Ok(Some(relabel(&tag, &over_sub).minimize(h.state())))
    }
}

fn format_value<V: Ord>(carrier: &[V], v: &V) -> String {
    let pos = carrier.iter().position(|c| c == v).unwrap_or(usize::MAX);
    format!("carrier element #{pos}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::FiniteTree;

    fn sig1() -> Signature {
        Signature::new(
            vec![
                ("leaf".into(), vec![]),
                ("node".into(), vec!["L".into(), "R".into()]),
            ],
            None,
        )
        .unwrap()
    }

    fn indexed1() -> IndexedSignature {
        IndexedSignature::new(
            sig1(),
            vec!["0".into(), "1".into()],
            BTreeMap::from([("node".to_string(), "0".to_string()), ("leaf".to_string(), "1".to_string())]),
        )
        .unwrap()
    }

    fn elem(sig: &Signature, shape: &str, pairs: &[(&str, &str)]) -> PfElement<String> {
        PfElement::new(
            sig,
            shape,
            pairs.iter().map(|(p, v)| (p.to_string(), v.to_string())).collect(),
        )
        .unwrap()
    }

    fn c1() -> Coalgebra {
        let sig = sig1();
        let step = BTreeMap::from([("s".to_string(), elem(&sig, "node", &[("L", "s"), ("R", "s")]))]);
        Coalgebra::new(sig, vec!["s".into()], step).unwrap()
    }

    #[test]
    fn fibred_application_filters_by_child_index() {
        let isig = indexed1();
        let carrier = vec!["x".to_string()];
        let xi0 = BTreeMap::from([("x".to_string(), "0".to_string())]);
        let got = isig.apply(&carrier, &xi0).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].shape(), "leaf");
        assert_eq!(got[1], elem(&sig1(), "node", &[("L", "x"), ("R", "x")]));
        let xi1 = BTreeMap::from([("x".to_string(), "1".to_string())]);
        let got = isig.apply(&carrier, &xi1).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].shape(), "leaf");
    }

    #[test]
    fn fibre_coherence_on_frozen_examples() {
        let isig = indexed1();
        assert!(isig.fibre_coherent(&c1().minimize("s")));
        let sig = sig1();
        let step = BTreeMap::from([
            ("a".to_string(), elem(&sig, "node", &[("L", "b"), ("R", "a")])),
            ("b".to_string(), elem(&sig, "leaf", &[])),
        ]);
        let c = Coalgebra::new(sig, vec!["a".into(), "b".into()], step).unwrap();
        assert!(!isig.fibre_coherent(&c.minimize("a")));
        assert!(isig.fibre_coherent(&c.minimize("b")));
    }

    #[test]
    fn chi_tags_every_shape_with_the_fixed_index() {
        let isig = indexed1();
        let h = c1().minimize("s");
        let tagged = isig.chi(&h, "0").unwrap();
        assert_eq!(tagged.universe().states().len(), 1);
        assert_eq!(tagged.universe().step("0").shape(), "node*0");
        // Tagging with the other index also makes sense pointwise; the
        // comparison against own-fibre tagging is what detects mixtures.
        let other = isig.chi(&h, "1").unwrap();
        assert_eq!(other.universe().step("0").shape(), "node*1");
    }

    #[test]
    fn equaliser_characterisation_matches_fibre_coherence() {
        let isig = indexed1();
        let sig = sig1();
        let step = BTreeMap::from([
            ("a".to_string(), elem(&sig, "node", &[("L", "b"), ("R", "a")])),
            ("b".to_string(), elem(&sig, "leaf", &[])),
        ]);
        let c = Coalgebra::new(sig, vec!["a".into(), "b".into()], step).unwrap();
        for (coalg, state) in [(&c1(), "s"), (&c, "a"), (&c, "b")] {
            let h = coalg.minimize(state);
            assert_eq!(isig.equaliser_agrees(&h).unwrap(), isig.fibre_coherent(&h));
        }
    }

    #[test]
    fn reindex_keeps_only_matching_fibres() {
        let isig = indexed1();
        let x = BTreeMap::from([("j".to_string(), "0".to_string())]);
        let (reindexed, projection) = isig.reindex(vec!["j".into()], &x).unwrap();
        assert_eq!(reindexed.base().shapes(), &["j*node".to_string()]);
        assert_eq!(reindexed.fibre_of("j*node"), "j");
        assert_eq!(projection.shape_image("j*node"), Some("node"));
    }

    #[test]
    fn reindexed_handle_matches_retagged_truncations() {
        let isig = indexed1();
        let h = c1().minimize("s");
        let x = BTreeMap::from([("j".to_string(), "0".to_string())]);
        let moved = isig.reindex_handle("j", &x, &h).unwrap().unwrap();
        fn retag(t: &FiniteTree, j: &str) -> FiniteTree {
            match t {
                FiniteTree::Cut => FiniteTree::Cut,
                FiniteTree::Node { shape, children } => FiniteTree::Node {
                    shape: pair_shape(j, shape),
                    children: children.iter().map(|(p, c)| (p.clone(), retag(c, j))).collect(),
                },
            }
        }
        for depth in 0..5 {
            assert_eq!(moved.truncate(depth), retag(&h.truncate(depth), "j"));
        }
        // A tree whose root fibre is not x(j) does not transport.
        let sig = sig1();
        let step = BTreeMap::from([("b".to_string(), elem(&sig, "leaf", &[]))]);
        let leaf = Coalgebra::new(sig, vec!["b".into()], step).unwrap();
        assert_eq!(isig.reindex_handle("j", &x, &leaf.minimize("b")).unwrap(), None);
    }
}
