//! Finite presheaves and the polynomial functor of a presheaf morphism.
//!
//! A presheaf X on a finite category assigns a finite set of sections X(C) to
//! each object and a restriction map X(C) → X(D) to each morphism D → C,
//! functorially.  A presheaf morphism f: 𝔹 → 𝔸 induces a polynomial functor
//! whose value on X has, at C, the pairs (a, t) of a section a ∈ 𝔸(C) and a
//! presheaf morphism t from the fibre of f over a into X.
//!
//! Trees branching over f are handled through the *underlying* plain
//! signature: one shape `a@C` per section a ∈ 𝔸(C), with one position `β.b`
//! per pair of a morphism β: D → C and a section b ∈ 𝔹(D) lying over a·β.
//! A tree over that signature is *natural* when re-rooting it along a
//! morphism (keeping its subtrees, moving the root section) agrees with the
//! positional data; the natural trees are exactly the ones that come from
//! coalgebras in presheaves.  Generated names use `@`, `.`, `#` and assume
//! the input names avoid them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::FiniteCategory;
use crate::coalgebra::{bisimilar, Coalgebra, TreeHandle};
use crate::signature::{PfElement, Signature};
use crate::util::{all_functions, cartesian};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresheafError {
    #[error("object `{0}` has no section list")]
    MissingObject(String),
    #[error("section table mentions unknown object `{0}`")]
    UnknownObject(String),
    #[error("duplicate section `{section}` at `{object}`")]
    DuplicateSection { object: String, section: String },
    #[error("no restriction along `{morphism}` for `{section}`")]
    RestrictionMissing { morphism: String, section: String },
    #[error("restriction entry for `{morphism}` and `{section}` matches no morphism/section pair")]
    RestrictionExtraneous { morphism: String, section: String },
    #[error("restriction of `{section}` along `{morphism}` is not a section of the domain object")]
    RestrictionBadValue { morphism: String, section: String },
    #[error("restriction along the identity of `{object}` moves `{section}`")]
    IdentityRestrictionFails { object: String, section: String },
    #[error("restrictions along `{first}` then `{second}` disagree with their composite on `{section}`")]
    FunctorialityFails { first: String, second: String, section: String },
    #[error("no component for section `{section}` at `{object}`")]
    ComponentMissing { object: String, section: String },
    #[error("component entry for `{section}` at `{object}` matches no source section")]
    ComponentExtraneous { object: String, section: String },
    #[error("component of `{section}` at `{object}` is not a target section")]
    ComponentBadValue { object: String, section: String },
    #[error("components are not natural along `{morphism}` at `{section}`")]
    NotNatural { morphism: String, section: String },
    #[error("{candidates} candidate maps exceed the enumeration guard {guard}")]
    EnumerationOverflow { candidates: u128, guard: usize },
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("tree is not over the underlying signature of the map")]
    SignatureMismatch,
    #[error("restriction morphism must land in `{expected}`, not `{got}`")]
    RootObjectMismatch { expected: String, got: String },
    #[error("tree does not restrict consistently along morphisms")]
    TreeNotNatural,
}

/// `β.b`: the position of a tree shape, or a section of a fibre presheaf.
pub fn position_id(beta: &str, b: &str) -> String {
    format!("{beta}.{b}")
}

/// `a@C`: the shape of the underlying signature for a section a ∈ 𝔸(C).
pub fn shape_id(section: &str, object: &str) -> String {
    format!("{section}@{object}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presheaf {
    sections: BTreeMap<String, Vec<String>>,
    /// (morphism D → C, section at C) → section at D.  Identity entries are
    /// filled in automatically.
    restriction: BTreeMap<(String, String), String>,
}

impl Presheaf {
    pub fn new(
        cat: &FiniteCategory,
        sections: BTreeMap<String, Vec<String>>,
        mut restriction: BTreeMap<(String, String), String>,
    ) -> Result<Self, PresheafError> {
        for o in sections.keys() {
            if !cat.has_object(o) {
                return Err(PresheafError::UnknownObject(o.clone()));
            }
        }
        for o in cat.objects() {
            let secs = sections.get(o).ok_or_else(|| PresheafError::MissingObject(o.clone()))?;
            let mut seen = std::collections::BTreeSet::new();
            for s in secs {
                if !seen.insert(s) {
                    return Err(PresheafError::DuplicateSection {
                        object: o.clone(),
                        section: s.clone(),
                    });
                }
            }
            // Identity restrictions are forced; fill them in, reject lies.
            let id = cat.identity(o).to_string();
            for s in secs {
                match restriction.entry((id.clone(), s.clone())) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(s.clone());
                    }
                    std::collections::btree_map::Entry::Occupied(e) => {
                        if e.get() != s {
                            return Err(PresheafError::IdentityRestrictionFails {
                                object: o.clone(),
                                section: s.clone(),
                            });
                        }
                    }
                }
            }
        }
        for ((m, s), v) in &restriction {
            let mor = cat
                .morphism(m)
                .ok_or_else(|| PresheafError::RestrictionExtraneous {
                    morphism: m.clone(),
                    section: s.clone(),
                })?;
            if !sections[&mor.cod].contains(s) {
                return Err(PresheafError::RestrictionExtraneous {
                    morphism: m.clone(),
                    section: s.clone(),
                });
            }
            if !sections[&mor.dom].contains(v) {
                return Err(PresheafError::RestrictionBadValue {
                    morphism: m.clone(),
                    section: s.clone(),
                });
            }
        }
        for m in cat.morphisms() {
            for s in &sections[&m.cod] {
                if !restriction.contains_key(&(m.id.clone(), s.clone())) {
                    return Err(PresheafError::RestrictionMissing {
                        morphism: m.id.clone(),
                        section: s.clone(),
                    });
                }
            }
        }
        let psh = Presheaf { sections, restriction };
        // Functoriality: restricting along g, then f, is restricting along
        // their composite "f then g".
        for f in cat.morphisms() {
            for g in cat.morphisms() {
                if f.cod != g.dom {
                    continue;
                }
                let fg = cat.compose(&f.id, &g.id).to_string();
                for s in psh.sections(&g.cod) {
                    if psh.restrict(&fg, s) != psh.restrict(&f.id, psh.restrict(&g.id, s)) {
                        return Err(PresheafError::FunctorialityFails {
                            first: f.id.clone(),
                            second: g.id.clone(),
                            section: s.clone(),
                        });
                    }
                }
            }
        }
        Ok(psh)
    }

    /// Sections at an object, in declared order.  Panics on unknown objects.
    pub fn sections(&self, object: &str) -> &[String] {
        &self.sections[object]
    }

    pub fn has_section(&self, object: &str, section: &str) -> bool {
        self.sections.get(object).is_some_and(|s| s.iter().any(|x| x == section))
    }

    /// The restriction of `section` (at the codomain of `morphism`) along
    /// `morphism`.  Panics on pairs outside the table; validation makes the
    /// table total.
    pub fn restrict(&self, morphism: &str, section: &str) -> &str {
        &self.restriction[&(morphism.to_string(), section.to_string())]
    }
}

fn validate_components(
    cat: &FiniteCategory,
    source: &Presheaf,
    target: &Presheaf,
    components: &BTreeMap<(String, String), String>,
) -> Result<(), PresheafError> {
    for ((o, s), v) in components {
        if !cat.has_object(o) || !source.has_section(o, s) {
            return Err(PresheafError::ComponentExtraneous { object: o.clone(), section: s.clone() });
        }
        if !target.has_section(o, v) {
            return Err(PresheafError::ComponentBadValue { object: o.clone(), section: s.clone() });
        }
    }
    for o in cat.objects() {
        for s in source.sections(o) {
            if !components.contains_key(&(o.clone(), s.clone())) {
                return Err(PresheafError::ComponentMissing { object: o.clone(), section: s.clone() });
            }
        }
    }
    for m in cat.morphisms() {
        for s in source.sections(&m.cod) {
            let moved = &components[&(m.dom.clone(), source.restrict(&m.id, s).to_string())];
            let mapped = target.restrict(&m.id, &components[&(m.cod.clone(), s.clone())]);
            if moved != mapped {
                return Err(PresheafError::NotNatural { morphism: m.id.clone(), section: s.clone() });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafMorphism {
    source: Presheaf,
    target: Presheaf,
    /// (object, source section) → target section.
    components: BTreeMap<(String, String), String>,
}

impl PresheafMorphism {
    pub fn new(
        cat: &FiniteCategory,
        source: &Presheaf,
        target: &Presheaf,
        components: BTreeMap<(String, String), String>,
    ) -> Result<Self, PresheafError> {
        validate_components(cat, source, target, &components)?;
        Ok(PresheafMorphism { source: source.clone(), target: target.clone(), components })
    }

    pub fn source(&self) -> &Presheaf {
        &self.source
    }

    pub fn target(&self) -> &Presheaf {
        &self.target
    }

    pub fn apply(&self, object: &str, section: &str) -> &str {
        &self.components[&(object.to_string(), section.to_string())]
    }
}

/// All presheaf morphisms source → target, by exhausting the component maps
/// object by object and keeping the natural ones.  The number of candidate
/// maps is bounded by `guard` before anything is enumerated.
pub fn enumerate_presheaf_morphisms(
    cat: &FiniteCategory,
    source: &Presheaf,
    target: &Presheaf,
    guard: usize,
) -> Result<Vec<PresheafMorphism>, PresheafError> {
    let mut candidates: u128 = 1;
    for o in cat.objects() {
        let base = target.sections(o).len() as u128;
        let exp = source.sections(o).len() as u32;
        candidates = candidates.saturating_mul(base.checked_pow(exp).unwrap_or(u128::MAX));
    }
    if candidates > guard as u128 {
        return Err(PresheafError::EnumerationOverflow { candidates, guard });
    }
    let per_object: Vec<Vec<BTreeMap<String, String>>> = cat
        .objects()
        .iter()
        .map(|o| all_functions(source.sections(o), target.sections(o)))
        .collect();
    let mut out = Vec::new();
    for combo in cartesian(&per_object) {
        let mut components = BTreeMap::new();
        for (o, table) in cat.objects().iter().zip(combo) {
            for (s, v) in table {
                components.insert((o.clone(), s), v);
            }
        }
        if validate_components(cat, source, target, &components).is_ok() {
            out.push(PresheafMorphism {
                source: source.clone(),
                target: target.clone(),
                components,
            });
        }
    }
    Ok(out)
}

/// The sections of the fibre of f over a ∈ 𝔸(object), object by object:
/// at E, the pairs (β: E → object, b ∈ 𝔹(E)) with a·β = f(b).
fn fibre_table(
    cat: &FiniteCategory,
    f: &PresheafMorphism,
    object: &str,
    section: &str,
) -> BTreeMap<String, Vec<(String, String)>> {
    let mut table = BTreeMap::new();
    for e in cat.objects() {
        let mut secs = Vec::new();
        for beta in cat.hom(e, object) {
            let over = f.target().restrict(beta, section);
            for b in f.source().sections(e) {
                if f.apply(e, b) == over {
                    secs.push((beta.to_string(), b.clone()));
                }
            }
        }
        table.insert(e.clone(), secs);
    }
    table
}

/// The fibre of f: 𝔹 → 𝔸 over a section a ∈ 𝔸(object), as a presheaf whose
/// sections are named `β.b`.  Panics unless `section` is a section of the
/// target of f at `object`.
pub fn fibre_presheaf(
    cat: &FiniteCategory,
    f: &PresheafMorphism,
    object: &str,
    section: &str,
) -> Presheaf {
    assert!(
        f.target().has_section(object, section),
        "fibre_presheaf: `{section}` is not a section of the target at `{object}`"
    );
    let table = fibre_table(cat, f, object, section);
    let sections: BTreeMap<String, Vec<String>> = table
        .iter()
        .map(|(e, secs)| (e.clone(), secs.iter().map(|(b, s)| position_id(b, s)).collect()))
        .collect();
    let mut restriction = BTreeMap::new();
    for m in cat.morphisms() {
        for (beta, b) in &table[&m.cod] {
            let image = position_id(
                cat.compose(&m.id, beta),
                f.source().restrict(&m.id, b),
            );
            restriction.insert((m.id.clone(), position_id(beta, b)), image);
        }
    }
    Presheaf::new(cat, sections, restriction).expect("fibres of presheaf morphisms are presheaves")
}

/// An element of the polynomial functor's value at `object`: the base
/// section together with the component map of a morphism out of its fibre,
/// keyed by the fibre's (β, b) pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PshElement {
    pub object: String,
    pub base: String,
    pub component: BTreeMap<(String, String), String>,
}

/// The value of the polynomial functor on a presheaf, with the element
/// structure behind each generated section name `a@C#k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PfApplication {
    pub presheaf: Presheaf,
    pub elements: BTreeMap<String, PshElement>,
    pub ids: BTreeMap<PshElement, String>,
}

pub const DEFAULT_ENUMERATION_GUARD: usize = 100_000;

/// Apply the polynomial functor of f: 𝔹 → 𝔸 to the presheaf x.  At each
/// object C this enumerates, for each a ∈ 𝔸(C), the presheaf morphisms from
/// the fibre over a into x; restriction reindexes the component map along
/// the composite.  Enumeration is capped by `guard` candidate maps per fibre.
pub fn apply_pf(
    cat: &FiniteCategory,
    f: &PresheafMorphism,
    x: &Presheaf,
    guard: usize,
) -> Result<PfApplication, PresheafError> {
    let mut sections: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut elements = BTreeMap::new();
    let mut ids = BTreeMap::new();
    for c in cat.objects() {
        let mut secs = Vec::new();
        for a in f.target().sections(c) {
            let fibre = fibre_presheaf(cat, f, c, a);
            let table = fibre_table(cat, f, c, a);
            for (k, t) in enumerate_presheaf_morphisms(cat, &fibre, x, guard)?.iter().enumerate() {
                let mut component = BTreeMap::new();
                for (e, pairs) in &table {
                    for (beta, b) in pairs {
                        let v = t.apply(e, &position_id(beta, b));
                        component.insert((beta.clone(), b.clone()), v.to_string());
                    }
                }
                let el = PshElement { object: c.clone(), base: a.clone(), component };
                let id = format!("{}#{k}", shape_id(a, c));
                secs.push(id.clone());
                ids.insert(el.clone(), id.clone());
                elements.insert(id, el);
            }
        }
        sections.insert(c.clone(), secs);
    }
    let mut restriction = BTreeMap::new();
    for m in cat.morphisms() {
        for sec in &sections[&m.cod] {
            let el = &elements[sec];
            let base = f.target().restrict(&m.id, &el.base).to_string();
            let mut component = BTreeMap::new();
            for (e, pairs) in fibre_table(cat, f, &m.dom, &base) {
                let _ = e;
                for (beta, b) in pairs {
                    let through = cat.compose(beta.as_str(), &m.id).to_string();
                    let v = el.component[&(through, b.clone())].clone();
                    component.insert((beta, b), v);
                }
            }
            let moved = PshElement { object: m.dom.clone(), base, component };
            let id = ids
                .get(&moved)
                .expect("restriction of a functor element is again an element")
                .clone();
            restriction.insert((m.id.clone(), sec.clone()), id);
        }
    }
    let presheaf = Presheaf::new(cat, sections, restriction)
        .expect("the value of the polynomial functor is a presheaf");
    Ok(PfApplication { presheaf, elements, ids })
}

/// The plain signature a presheaf morphism induces, with the presheaf data
/// behind each generated shape and position name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnderlyingData {
    signature: Signature,
    shapes: BTreeMap<String, (String, String)>,
    positions: BTreeMap<(String, String), (String, String)>,
}

impl UnderlyingData {
    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// (base section, object) behind a shape name.  Panics on foreign shapes.
    pub fn shape_info(&self, shape: &str) -> (&str, &str) {
        let (a, c) = &self.shapes[shape];
        (a, c)
    }

    /// (morphism, source section) behind a position name.
    pub fn position_info(&self, shape: &str, position: &str) -> (&str, &str) {
        let (beta, b) = &self.positions[&(shape.to_string(), position.to_string())];
        (beta, b)
    }

    pub fn positions_of(&self, shape: &str) -> Vec<(&str, (&str, &str))> {
        self.positions
            .iter()
            .filter(|((s, _), _)| s == shape)
            .map(|((_, p), (beta, b))| (p.as_str(), (beta.as_str(), b.as_str())))
            .collect()
    }
}

/// Flatten a presheaf morphism to a plain signature: one shape `a@C` per
/// target section, one position `β.b` per fibre section of that shape.
pub fn underlying_data(cat: &FiniteCategory, f: &PresheafMorphism) -> UnderlyingData {
    let mut decls = Vec::new();
    let mut shapes = BTreeMap::new();
    let mut positions = BTreeMap::new();
    for c in cat.objects() {
        for a in f.target().sections(c) {
            let shape = shape_id(a, c);
            let mut poss = Vec::new();
            for (e, pairs) in fibre_table(cat, f, c, a) {
                let _ = e;
                for (beta, b) in pairs {
                    let pos = position_id(&beta, &b);
                    positions.insert((shape.clone(), pos.clone()), (beta, b));
                    poss.push(pos);
                }
            }
            shapes.insert(shape.clone(), (a.clone(), c.clone()));
            decls.push((shape, poss));
        }
    }
    let signature = Signature::new(decls, None).expect("generated shape names are distinct");
    UnderlyingData { signature, shapes, positions }
}

pub fn underlying_map(cat: &FiniteCategory, f: &PresheafMorphism) -> Signature {
    underlying_data(cat, f).signature
}

/// Re-root the tree at `state` along `alpha`: the root section is restricted
/// along alpha and every child is kept, looked up through the composite.
/// The result pairs original states with a pending morphism; after the first
/// step all pending morphisms are identities.
pub(crate) fn restrict_raw(
    cat: &FiniteCategory,
    f: &PresheafMorphism,
    data: &UnderlyingData,
    coalg: &Coalgebra,
    state: &str,
    alpha: &str,
) -> (Coalgebra, String) {
    let mut names: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::new();
    let mut states = Vec::new();
    let mut step = BTreeMap::new();
    let root = (state.to_string(), alpha.to_string());
    names.insert(root.clone(), "r0".to_string());
    states.push("r0".to_string());
    queue.push_back(root);
    while let Some((y, m)) = queue.pop_front() {
        let name = names[&(y.clone(), m.clone())].clone();
        let e = coalg.step(&y);
        let (a, c) = data.shape_info(e.shape());
        debug_assert_eq!(cat.cod(&m), c);
        let moved_shape = shape_id(f.target().restrict(&m, a), cat.dom(&m));
        let mut assignment = BTreeMap::new();
        for (pos, (delta, b)) in data.positions_of(&moved_shape) {
            let through = cat.compose(delta, &m).to_string();
            let child = e.child(&position_id(&through, b)).expect("composite position exists").clone();
            let pending = cat.identity(cat.dom(delta)).to_string();
            let key = (child, pending);
            let child_name = match names.get(&key) {
                Some(n) => n.clone(),
                None => {
                    let n = format!("r{}", names.len());
                    names.insert(key.clone(), n.clone());
                    states.push(n.clone());
                    queue.push_back(key);
                    n
                }
            };
            assignment.insert(pos.to_string(), child_name);
        }
        let el = PfElement::new(&data.signature, &moved_shape, assignment)
            .expect("re-rooted step fits the moved shape");
        step.insert(name, el);
    }
    let c = Coalgebra::new(data.signature.clone(), states, step)
        .expect("re-rooting yields a coalgebra");
    let root_name = names[&(state.to_string(), alpha.to_string())].clone();
    (c, root_name)
}

pub(crate) fn natural_states(
    cat: &FiniteCategory,
    f: &PresheafMorphism,
    data: &UnderlyingData,
    coalg: &Coalgebra,
) -> bool {
    // The child at a position (β, b) must be a tree at the domain of β;
    // without that the re-rooting below is not even well formed.
    for x in coalg.states() {
        let e = coalg.step(x);
        for (pos, (beta, _)) in data.positions_of(e.shape()) {
            let y = e.child(pos).expect("own position");
            let (_, cy) = data.shape_info(coalg.step(y).shape());
            if cy != cat.dom(beta) {
                return false;
            }
        }
    }
    for x in coalg.states() {
        let e = coalg.step(x);
        for (pos, (beta, b)) in data.positions_of(e.shape()) {
            let y = e.child(pos).expect("own position");
            let d = cat.dom(beta);
            for delta in cat.morphisms_into(d) {
                let moved = position_id(cat.compose(delta, beta), f.source().restrict(delta, b));
                let y2 = e.child(&moved).expect("moved position exists");
                let (rc, rs) = restrict_raw(cat, f, data, coalg, y, delta);
                if !bisimilar(coalg, y2, &rc, &rs) {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether a tree over the underlying signature restricts consistently: for
/// every node, every position (β, b) and every δ into the domain of β, the
/// child at (β∘δ, b·δ) is the child at (β, b) re-rooted along δ.
pub fn natural_tree(cat: &FiniteCategory, f: &PresheafMorphism, h: &TreeHandle) -> bool {
    let data = underlying_data(cat, f);
    assert_eq!(h.signature(), data.signature(), "tree is not over the underlying signature");
    natural_states(cat, f, &data, h.universe())
}

/// Re-root a natural tree along `alpha`.  The root shape must sit at the
/// codomain of alpha.
pub fn restrict_tree(
    cat: &FiniteCategory,
    f: &PresheafMorphism,
    h: &TreeHandle,
    alpha: &str,
) -> Result<TreeHandle, PresheafError> {
    let data = underlying_data(cat, f);
    if h.signature() != data.signature() {
        return Err(PresheafError::SignatureMismatch);
    }
    let m = cat.morphism(alpha).ok_or_else(|| PresheafError::UnknownMorphism(alpha.into()))?;
    let (_, c) = data.shape_info(h.universe().step(h.state()).shape());
    if m.cod != c {
        return Err(PresheafError::RootObjectMismatch { expected: c.to_string(), got: m.cod.clone() });
    }
    if !natural_states(cat, f, &data, h.universe()) {
        return Err(PresheafError::TreeNotNatural);
    }
    let (rc, rs) = restrict_raw(cat, f, &data, h.universe(), h.state(), alpha);
    Ok(rc.minimize(&rs))
}
