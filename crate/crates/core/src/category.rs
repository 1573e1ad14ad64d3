//! Finite categories presented by explicit tables, with chosen pullbacks.
//!
//! Objects, morphisms, identities, the full composition table and one chosen
//! pullback square per cospan are all part of the data; validation checks the
//! category laws, that composition is total on composable pairs, and that
//! every chosen square commutes and satisfies the universal property against
//! every cone the category contains.  Composition is written in application
//! order: `compose(f, g)` is "f, then g", i.e. g ∘ f.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CategoryError {
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
    #[error("duplicate morphism `{0}`")]
    DuplicateMorphism(String),
    #[error("morphism `{morphism}` has endpoint `{object}`, which is not an object")]
    BadEndpoint { morphism: String, object: String },
    #[error("object `{0}` has no identity")]
    MissingIdentity(String),
    #[error("identity of `{object}` must be an endomorphism of it")]
    BadIdentity { object: String },
    #[error("no composite declared for `{first}` then `{second}`")]
    CompositionMissing { first: String, second: String },
    #[error("composite declared for `{first}` then `{second}`, which are not composable")]
    CompositionExtraneous { first: String, second: String },
    #[error("composite of `{first}` then `{second}` has the wrong endpoints")]
    CompositionBadEndpoints { first: String, second: String },
    #[error("identity law fails at `{0}`")]
    IdentityLawFails(String),
    #[error("associativity fails on `{0}`, `{1}`, `{2}`")]
    AssociativityFails(String, String, String),
    #[error("no chosen pullback for the cospan (`{left}`, `{right}`)")]
    PullbackMissing { left: String, right: String },
    #[error("chosen pullback declared for (`{left}`, `{right}`), which is not a cospan")]
    PullbackExtraneous { left: String, right: String },
    #[error("chosen pullback for (`{left}`, `{right}`) has malformed legs")]
    PullbackBadLegs { left: String, right: String },
    #[error("chosen pullback for (`{left}`, `{right}`) does not commute")]
    PullbackNotCommuting { left: String, right: String },
    #[error("chosen pullback for (`{left}`, `{right}`) is not universal: cone (`{u}`, `{v}`) has {count} mediating morphisms")]
    PullbackNotUniversal { left: String, right: String, u: String, v: String, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Morphism {
    pub id: String,
    pub dom: String,
    pub cod: String,
}

/// A chosen pullback square for a cospan (f: X → Z, g: Y → Z): an apex with
/// projections to_left: apex → X and to_right: apex → Y.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackSquare {
    pub apex: String,
    pub to_left: String,
    pub to_right: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteCategory {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identities: BTreeMap<String, String>,
    /// (first, then) → composite, in application order.
    composition: BTreeMap<(String, String), String>,
    /// Cospan (left, right) → chosen square; required for every cospan.
    pullbacks: BTreeMap<(String, String), PullbackSquare>,
}

impl FiniteCategory {
    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: BTreeMap<String, String>,
        composition: BTreeMap<(String, String), String>,
        pullbacks: BTreeMap<(String, String), PullbackSquare>,
    ) -> Result<Self, CategoryError> {
        let mut object_set = BTreeSet::new();
        for o in &objects {
            if !object_set.insert(o.clone()) {
                return Err(CategoryError::DuplicateObject(o.clone()));
            }
        }
        let mut mor: BTreeMap<String, &Morphism> = BTreeMap::new();
        for m in &morphisms {
            if mor.insert(m.id.clone(), m).is_some() {
                return Err(CategoryError::DuplicateMorphism(m.id.clone()));
            }
            for end in [&m.dom, &m.cod] {
                if !object_set.contains(end) {
                    return Err(CategoryError::BadEndpoint {
                        morphism: m.id.clone(),
                        object: end.clone(),
                    });
                }
            }
        }
        for o in &objects {
            let id = identities.get(o).ok_or_else(|| CategoryError::MissingIdentity(o.clone()))?;
            match mor.get(id) {
                Some(m) if m.dom == *o && m.cod == *o => {}
                _ => return Err(CategoryError::BadIdentity { object: o.clone() }),
            }
        }
        // Composition: total on composable pairs, nothing else, endpoints right.
        for f in &morphisms {
            for g in &morphisms {
                let key = (f.id.clone(), g.id.clone());
                match composition.get(&key) {
                    Some(c) if f.cod == g.dom => {
                        let cm = mor.get(c).ok_or_else(|| CategoryError::CompositionBadEndpoints {
                            first: f.id.clone(),
                            second: g.id.clone(),
                        })?;
                        if cm.dom != f.dom || cm.cod != g.cod {
                            return Err(CategoryError::CompositionBadEndpoints {
                                first: f.id.clone(),
                                second: g.id.clone(),
                            });
                        }
                    }
                    Some(_) => {
                        return Err(CategoryError::CompositionExtraneous {
                            first: f.id.clone(),
                            second: g.id.clone(),
                        })
                    }
                    None if f.cod == g.dom => {
                        return Err(CategoryError::CompositionMissing {
                            first: f.id.clone(),
                            second: g.id.clone(),
                        })
                    }
                    None => {}
                }
            }
        }
        let cat = FiniteCategory { objects, morphisms, identities, composition, pullbacks };
        // Identity laws.
        for m in &cat.morphisms {
            if cat.compose(cat.identity(&m.dom), &m.id) != m.id
                || cat.compose(&m.id, cat.identity(&m.cod)) != m.id
            {
                return Err(CategoryError::IdentityLawFails(m.id.clone()));
            }
        }
        // Associativity.
        for f in &cat.morphisms {
            for g in &cat.morphisms {
                if f.cod != g.dom {
                    continue;
                }
                for h in &cat.morphisms {
                    if g.cod != h.dom {
                        continue;
                    }
                    let left = cat.compose(&cat.compose(&f.id, &g.id).to_string(), &h.id);
                    let right = cat.compose(&f.id, &cat.compose(&g.id, &h.id).to_string());
                    if left != right {
                        return Err(CategoryError::AssociativityFails(
                            f.id.clone(),
                            g.id.clone(),
                            h.id.clone(),
                        ));
                    }
                }
            }
        }
        cat.validate_pullbacks()?;
        Ok(cat)
    }

    fn validate_pullbacks(&self) -> Result<(), CategoryError> {
        let mor: BTreeMap<&str, &Morphism> =
            self.morphisms.iter().map(|m| (m.id.as_str(), m)).collect();
        for ((l, r), sq) in &self.pullbacks {
            match (mor.get(l.as_str()), mor.get(r.as_str())) {
                (Some(f), Some(g)) if f.cod == g.cod => {
                    let p1 = mor.get(sq.to_left.as_str());
                    let p2 = mor.get(sq.to_right.as_str());
                    let ok = matches!((p1, p2), (Some(p1), Some(p2))
                        if p1.dom == sq.apex && p2.dom == sq.apex
                            && p1.cod == f.dom && p2.cod == g.dom
                            && self.objects.contains(&sq.apex));
                    if !ok {
                        return Err(CategoryError::PullbackBadLegs { left: l.clone(), right: r.clone() });
                    }
                    if self.compose(&sq.to_left, l) != self.compose(&sq.to_right, r) {
                        return Err(CategoryError::PullbackNotCommuting {
                            left: l.clone(),
                            right: r.clone(),
                        });
                    }
                }
                _ => {
                    return Err(CategoryError::PullbackExtraneous { left: l.clone(), right: r.clone() })
                }
            }
        }
        for f in &self.morphisms {
            for g in &self.morphisms {
                if f.cod != g.cod {
                    continue;
                }
                let sq = self
                    .pullbacks
                    .get(&(f.id.clone(), g.id.clone()))
                    .ok_or_else(|| CategoryError::PullbackMissing {
                        left: f.id.clone(),
                        right: g.id.clone(),
                    })?;
                // Universal property against every cone in the category.
                for w in &self.objects {
                    for u in self.hom(w, &f.dom) {
                        for v in self.hom(w, &g.dom) {
                            if self.compose(u, &f.id) != self.compose(v, &g.id) {
                                continue;
                            }
                            let count = self
                                .hom(w, &sq.apex)
                                .into_iter()
                                .filter(|m| {
                                    self.compose(m, &sq.to_left) == u
                                        && self.compose(m, &sq.to_right) == v
                                })
                                .count();
                            if count != 1 {
                                return Err(CategoryError::PullbackNotUniversal {
                                    left: f.id.clone(),
                                    right: g.id.clone(),
                                    u: u.to_string(),
                                    v: v.to_string(),
                                    count,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn has_object(&self, o: &str) -> bool {
        self.objects.iter().any(|x| x == o)
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn morphism(&self, id: &str) -> Option<&Morphism> {
        self.morphisms.iter().find(|m| m.id == id)
    }

    pub fn dom(&self, id: &str) -> &str {
        &self.morphism(id).expect("unknown morphism").dom
    }

    pub fn cod(&self, id: &str) -> &str {
        &self.morphism(id).expect("unknown morphism").cod
    }

    pub fn identity(&self, object: &str) -> &str {
        &self.identities[object]
    }

    /// The composite "first, then second" (= second ∘ first).  Panics on
    /// non-composable arguments; composability is part of validation.
    pub fn compose(&self, first: &str, second: &str) -> &str {
        &self.composition[&(first.to_string(), second.to_string())]
    }

    /// hom(d, c) in declared morphism order.
    pub fn hom(&self, dom: &str, cod: &str) -> Vec<&str> {
        self.morphisms
            .iter()
            .filter(|m| m.dom == dom && m.cod == cod)
            .map(|m| m.id.as_str())
            .collect()
    }

    /// All morphisms with the given codomain, in declared order.
    pub fn morphisms_into(&self, cod: &str) -> Vec<&str> {
        self.morphisms
            .iter()
            .filter(|m| m.cod == cod)
            .map(|m| m.id.as_str())
            .collect()
    }

    pub fn pullback(&self, left: &str, right: &str) -> &PullbackSquare {
        &self.pullbacks[&(left.to_string(), right.to_string())]
    }
}

/// The one-object one-morphism category, with its only (identity) pullback.
pub fn trivial_category(object: &str) -> FiniteCategory {
    let id = format!("id_{object}");
    FiniteCategory::new(
        vec![object.to_string()],
        vec![Morphism { id: id.clone(), dom: object.to_string(), cod: object.to_string() }],
        BTreeMap::from([(object.to_string(), id.clone())]),
        BTreeMap::from([((id.clone(), id.clone()), id.clone())]),
        BTreeMap::from([(
            (id.clone(), id.clone()),
            PullbackSquare { apex: object.to_string(), to_left: id.clone(), to_right: id },
        )]),
    )
    .expect("the trivial category is a category")
}
