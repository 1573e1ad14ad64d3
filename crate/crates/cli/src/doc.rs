//! Elaborate a parsed document into checked objects.
//!
//! Declarations bind in order, each name once per kind, and every reference
//! must resolve to an earlier declaration.  Identities and their composites
//! are generated for categories (`id_C` is reserved), objects missing from a
//! presheaf get empty section sets, and `@` is rejected in declared names
//! because generated shape names use it as a separator.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use mtypes_core::indexed::IndexedSignature;
use mtypes_core::presheaf::underlying_map;
use mtypes_core::proto::ProtoCoalgebra;
use mtypes_core::{
    Coalgebra, CompatibleFamily, FiniteCategory, Morphism, PfElement, Presheaf,
    PresheafMorphism, PullbackSquare, Signature, Site, TreeHandle,
};

use crate::ast::{Decl, Document, Over, StateDecl};

#[derive(Debug, Error)]
pub enum DocError {
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("`{name}` contains `@`, which is reserved for generated shape names")]
    ReservedAt { name: String },
    #[error("in `{decl}`: {message}")]
    Invalid { decl: String, message: String },
}

fn invalid(decl: &str, err: impl std::fmt::Display) -> DocError {
    DocError::Invalid { decl: decl.to_string(), message: err.to_string() }
}

fn no_at(name: &str) -> Result<(), DocError> {
    if name.contains('@') {
        Err(DocError::ReservedAt { name: name.to_string() })
    } else {
        Ok(())
    }
}

/// A presheaf morphism together with the names it was declared from.
#[derive(Debug, Clone)]
pub struct FMap {
    pub category: String,
    pub from: String,
    pub to: String,
    pub map: PresheafMorphism,
}

/// A coalgebra and the signature reference it was declared over.
#[derive(Debug, Clone)]
pub struct CoalgebraEntry {
    pub over: Over,
    pub coalgebra: Coalgebra,
}

#[derive(Debug, Clone)]
pub struct FamilyEntry {
    pub site: String,
    pub fmap: String,
    pub family: CompatibleFamily,
}

/// All objects of a document, fully validated.  Each kind has its own
/// namespace; the maps are keyed by declared name.
#[derive(Debug, Default)]
pub struct Checked {
    pub signatures: BTreeMap<String, Signature>,
    pub categories: BTreeMap<String, FiniteCategory>,
    pub presheaves: BTreeMap<String, (String, Presheaf)>,
    pub morphisms: BTreeMap<String, FMap>,
    pub coalgebras: BTreeMap<String, CoalgebraEntry>,
    pub indexed: BTreeMap<String, (String, IndexedSignature)>,
    pub protos: BTreeMap<String, (String, ProtoCoalgebra<String>)>,
    pub sites: BTreeMap<String, (String, Site)>,
    pub families: BTreeMap<String, FamilyEntry>,
}

impl Checked {
    pub fn from_document(doc: &Document) -> Result<Checked, DocError> {
        let mut checked = Checked::default();
        for decl in &doc.decls {
            checked.add(decl)?;
        }
        Ok(checked)
    }

    pub fn coalgebra(&self, name: &str) -> Result<&CoalgebraEntry, DocError> {
        self.coalgebras
            .get(name)
            .ok_or_else(|| DocError::Unknown { kind: "coalgebra", name: name.to_string() })
    }

    pub fn signature(&self, name: &str) -> Result<&Signature, DocError> {
        self.signatures
            .get(name)
            .ok_or_else(|| DocError::Unknown { kind: "signature", name: name.to_string() })
    }

    /// The morphism context (category, presheaf morphism) behind a coalgebra
    /// declared over an underlying signature.
    pub fn underlying_context(
        &self,
        entry: &CoalgebraEntry,
    ) -> Option<(&FiniteCategory, &FMap)> {
        match &entry.over {
            Over::Signature(_) => None,
            Over::Underlying(f) => {
                let fmap = &self.morphisms[f];
                Some((&self.categories[&fmap.category], fmap))
            }
        }
    }

    fn add(&mut self, decl: &Decl) -> Result<(), DocError> {
        match decl {
            Decl::Signature { name, shapes, point } => {
                self.fresh("signature", name, self.signatures.contains_key(name))?;
                no_at(name)?;
                for (shape, positions) in shapes {
                    no_at(shape)?;
                    for p in positions {
                        no_at(p)?;
                    }
                }
                if let Some(p) = point {
                    no_at(p)?;
                }
                let sig = Signature::new(shapes.clone(), point.clone())
                    .map_err(|e| invalid(name, e))?;
                self.signatures.insert(name.clone(), sig);
            }
            Decl::Coalgebra { name, over, states } => {
                self.fresh("coalgebra", name, self.coalgebras.contains_key(name))?;
                let sig = self.resolve_over(over)?;
                let mut step = BTreeMap::new();
                let mut order = Vec::new();
                for s in states {
                    let el = element(name, &sig, s)?;
                    if step.insert(s.name.clone(), el).is_some() {
                        return Err(invalid(name, format!("state `{}` declared twice", s.name)));
                    }
                    order.push(s.name.clone());
                }
                let coalgebra =
                    Coalgebra::new(sig, order, step).map_err(|e| invalid(name, e))?;
                self.coalgebras
                    .insert(name.clone(), CoalgebraEntry { over: over.clone(), coalgebra });
            }
            Decl::Indexed { name, over, index, fibres } => {
                self.fresh("indexed signature", name, self.indexed.contains_key(name))?;
                no_at(name)?;
                for i in index {
                    no_at(i)?;
                }
                let base = self.signature(over)?.clone();
                let mut fibre_of = BTreeMap::new();
                for (shape, i) in fibres {
                    if fibre_of.insert(shape.clone(), i.clone()).is_some() {
                        return Err(invalid(name, format!("fibre of `{shape}` given twice")));
                    }
                }
                let indexed = IndexedSignature::new(base, index.clone(), fibre_of)
                    .map_err(|e| invalid(name, e))?;
                self.indexed.insert(name.clone(), (over.clone(), indexed));
            }
            Decl::Proto { name, over, carrier, ambient, gamma, branch } => {
                self.fresh("proto-coalgebra", name, self.protos.contains_key(name))?;
                let sig = self.signature(over)?.clone();
                let mut gamma_map = BTreeMap::new();
                for (x, y) in gamma {
                    if gamma_map.insert(x.clone(), y.clone()).is_some() {
                        return Err(invalid(name, format!("gamma of `{x}` given twice")));
                    }
                }
                let mut m = BTreeMap::new();
                for (el_decl, y) in branch {
                    let el = element(name, &sig, el_decl)?;
                    if m.insert(el, y.clone()).is_some() {
                        return Err(invalid(name, "branching entry given twice".to_string()));
                    }
                }
                let proto =
                    ProtoCoalgebra::new(sig, carrier.clone(), ambient.clone(), gamma_map, m)
                        .map_err(|e| invalid(name, e))?;
                self.protos.insert(name.clone(), (over.clone(), proto));
            }
            Decl::Category { name, objects, morphisms, composites, pullbacks } => {
                self.fresh("category", name, self.categories.contains_key(name))?;
                no_at(name)?;
                let cat = build_category(name, objects, morphisms, composites, pullbacks)?;
                self.categories.insert(name.clone(), cat);
            }
            Decl::Presheaf { name, over, sections, restrictions } => {
                self.fresh("presheaf", name, self.presheaves.contains_key(name))?;
                no_at(name)?;
                let cat = self
                    .categories
                    .get(over)
                    .ok_or_else(|| DocError::Unknown { kind: "category", name: over.clone() })?;
                let mut section_map: BTreeMap<String, Vec<String>> = BTreeMap::new();
                for (object, secs) in sections {
                    for s in secs {
                        no_at(s)?;
                    }
                    if section_map.insert(object.clone(), secs.clone()).is_some() {
                        return Err(invalid(name, format!("sections at `{object}` given twice")));
                    }
                }
                for o in cat.objects() {
                    section_map.entry(o.clone()).or_default();
                }
                let mut restriction = BTreeMap::new();
                for (m, s, v) in restrictions {
                    if restriction.insert((m.clone(), s.clone()), v.clone()).is_some() {
                        return Err(invalid(
                            name,
                            format!("restriction of `{s}` along `{m}` given twice"),
                        ));
                    }
                }
                let psh = Presheaf::new(cat, section_map, restriction)
                    .map_err(|e| invalid(name, e))?;
                self.presheaves.insert(name.clone(), (over.clone(), psh));
            }
            Decl::PshMorphism { name, from, to, components } => {
                self.fresh("morphism", name, self.morphisms.contains_key(name))?;
                let (from_cat, source) = self
                    .presheaves
                    .get(from)
                    .ok_or_else(|| DocError::Unknown { kind: "presheaf", name: from.clone() })?;
                let (to_cat, target) = self
                    .presheaves
                    .get(to)
                    .ok_or_else(|| DocError::Unknown { kind: "presheaf", name: to.clone() })?;
                if from_cat != to_cat {
                    return Err(invalid(
                        name,
                        format!("`{from}` is over `{from_cat}` but `{to}` is over `{to_cat}`"),
                    ));
                }
                let cat = &self.categories[from_cat];
                let mut comps = BTreeMap::new();
                for (object, s, v) in components {
                    if comps.insert((object.clone(), s.clone()), v.clone()).is_some() {
                        return Err(invalid(
                            name,
                            format!("component at `{object}` for `{s}` given twice"),
                        ));
                    }
                }
                let map = PresheafMorphism::new(cat, source, target, comps)
                    .map_err(|e| invalid(name, e))?;
                self.morphisms.insert(
                    name.clone(),
                    FMap { category: from_cat.clone(), from: from.clone(), to: to.clone(), map },
                );
            }
            Decl::Site { name, over, covers } => {
                self.fresh("site", name, self.sites.contains_key(name))?;
                let cat = self
                    .categories
                    .get(over)
                    .ok_or_else(|| DocError::Unknown { kind: "category", name: over.clone() })?;
                let mut cover_map: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
                for (object, legs) in covers {
                    cover_map.entry(object.clone()).or_default().push(legs.clone());
                }
                let site =
                    Site::new(cat.clone(), cover_map).map_err(|e| invalid(name, e))?;
                self.sites.insert(name.clone(), (over.clone(), site));
            }
            Decl::Family { name, site, using, at, cover, legs } => {
                self.fresh("family", name, self.families.contains_key(name))?;
                let (site_cat, site_obj) = self
                    .sites
                    .get(site)
                    .ok_or_else(|| DocError::Unknown { kind: "site", name: site.clone() })?;
                let fmap = self
                    .morphisms
                    .get(using)
                    .ok_or_else(|| DocError::Unknown { kind: "morphism", name: using.clone() })?;
                if &fmap.category != site_cat {
                    return Err(invalid(
                        name,
                        format!("site `{site}` and morphism `{using}` live over different categories"),
                    ));
                }
                if legs.len() != cover.len() {
                    return Err(invalid(
                        name,
                        format!("cover has {} legs but {} are assigned", cover.len(), legs.len()),
                    ));
                }
                let mut trees = Vec::new();
                for (i, (leg, coalg, state)) in legs.iter().enumerate() {
                    if leg != &cover[i] {
                        return Err(invalid(
                            name,
                            format!("leg {} must be `{}`, found `{leg}`", i + 1, cover[i]),
                        ));
                    }
                    trees.push(self.leg_tree(name, using, coalg, state)?);
                }
                let family =
                    CompatibleFamily::new(site_obj, &fmap.map, at.clone(), cover.clone(), trees)
                        .map_err(|e| invalid(name, e))?;
                self.families.insert(
                    name.clone(),
                    FamilyEntry { site: site.clone(), fmap: using.clone(), family },
                );
            }
        }
        Ok(())
    }

    fn fresh(&self, kind: &'static str, name: &str, taken: bool) -> Result<(), DocError> {
        if taken {
            Err(DocError::Duplicate { kind, name: name.to_string() })
        } else {
            Ok(())
        }
    }

    fn resolve_over(&self, over: &Over) -> Result<Signature, DocError> {
        match over {
            Over::Signature(s) => Ok(self.signature(s)?.clone()),
            Over::Underlying(f) => {
                let fmap = self
                    .morphisms
                    .get(f)
                    .ok_or_else(|| DocError::Unknown { kind: "morphism", name: f.clone() })?;
                Ok(underlying_map(&self.categories[&fmap.category], &fmap.map))
            }
        }
    }

    fn leg_tree(
        &self,
        family: &str,
        using: &str,
        coalg: &str,
        state: &str,
    ) -> Result<TreeHandle, DocError> {
        let entry = self.coalgebra(coalg)?;
        match &entry.over {
            Over::Underlying(f) if f == using => {}
            _ => {
                return Err(invalid(
                    family,
                    format!("`{coalg}` is not a coalgebra over `underlying {using}`"),
                ));
            }
        }
        if !entry.coalgebra.has_state(state) {
            return Err(invalid(family, format!("`{coalg}` has no state `{state}`")));
        }
        Ok(entry.coalgebra.minimize(state))
    }
}

/// State declaration → functor element, with an explicit duplicate check:
/// collapsing the list into a map must not drop a child.
fn element(
    decl: &str,
    sig: &Signature,
    s: &StateDecl,
) -> Result<PfElement<String>, DocError> {
    let mut assignment = BTreeMap::new();
    for (position, value) in &s.children {
        if assignment.insert(position.clone(), value.clone()).is_some() {
            return Err(invalid(
                decl,
                format!("position `{position}` of shape `{}` assigned twice", s.shape),
            ));
        }
    }
    PfElement::new(sig, s.shape.clone(), assignment).map_err(|e| invalid(decl, e))
}

/// Complete and validate a declared category: identities `id_O`, identity
/// composites and identity-cospan pullback squares are generated, everything
/// else must be written out.
fn build_category(
    name: &str,
    objects: &[String],
    arrows: &[(String, String, String)],
    composites: &[(String, String, String)],
    pullbacks: &[(String, String, String, String, String)],
) -> Result<FiniteCategory, DocError> {
    let mut morphisms = Vec::new();
    let mut identities = BTreeMap::new();
    for o in objects {
        no_at(o)?;
        let id = format!("id_{o}");
        morphisms.push(Morphism { id: id.clone(), dom: o.clone(), cod: o.clone() });
        identities.insert(o.clone(), id);
    }
    for (id, dom, cod) in arrows {
        no_at(id)?;
        if identities.values().any(|i| i == id) {
            return Err(invalid(name, format!("morphism name `{id}` is reserved")));
        }
        morphisms.push(Morphism { id: id.clone(), dom: dom.clone(), cod: cod.clone() });
        if !identities.contains_key(dom) {
            return Err(invalid(name, format!("morphism `{id}`: unknown object `{dom}`")));
        }
        if !identities.contains_key(cod) {
            return Err(invalid(name, format!("morphism `{id}`: unknown object `{cod}`")));
        }
    }
    let mut composition = BTreeMap::new();
    for m in &morphisms {
        composition.insert((identities[&m.dom].clone(), m.id.clone()), m.id.clone());
        composition.insert((m.id.clone(), identities[&m.cod].clone()), m.id.clone());
    }
    let mut declared = BTreeSet::new();
    for (f, g, h) in composites {
        if !declared.insert((f.clone(), g.clone())) {
            return Err(invalid(name, format!("composite of `{f}` then `{g}` given twice")));
        }
        composition.insert((f.clone(), g.clone()), h.clone());
    }
    let mut squares = BTreeMap::new();
    for m in &morphisms {
        let id_cod = identities[&m.cod].clone();
        let id_dom = identities[&m.dom].clone();
        squares.insert(
            (id_cod.clone(), m.id.clone()),
            PullbackSquare { apex: m.dom.clone(), to_left: m.id.clone(), to_right: id_dom.clone() },
        );
        squares.insert(
            (m.id.clone(), id_cod),
            PullbackSquare { apex: m.dom.clone(), to_left: id_dom, to_right: m.id.clone() },
        );
    }
    let mut declared_squares = BTreeSet::new();
    for (l, r, apex, p1, p2) in pullbacks {
        if !declared_squares.insert((l.clone(), r.clone())) {
            return Err(invalid(name, format!("pullback of `{l}` with `{r}` given twice")));
        }
        squares.insert(
            (l.clone(), r.clone()),
            PullbackSquare { apex: apex.clone(), to_left: p1.clone(), to_right: p2.clone() },
        );
    }
    FiniteCategory::new(objects.to_vec(), morphisms, identities, composition, squares)
        .map_err(|e| invalid(name, e))
}
