//! Sites, the sheaf condition, and glueing of tree families.
//!
//! A site fixes, per object, a list of covering families of morphisms.  The
//! identity cover is always present; validation checks that covers restrict
//! along the chosen pullbacks to covers (stability) and that composing a
//! cover with covers of its domains yields at least a refinement of a cover
//! (transitivity).
//!
//! Over a site, trees branching over a presheaf morphism f: 𝔹 → 𝔸 can be
//! given locally: a *compatible family* assigns a natural tree to each leg
//! of a cover such that the restrictions to the chosen pullbacks agree up to
//! bisimilarity.  When 𝔸 and 𝔹 are sheaves, such a family glues to a single
//! tree above the covered object, unique among trees with the same
//! restrictions; [`glue`] computes it by running the family itself as a
//! coalgebra state.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::category::FiniteCategory;
use crate::coalgebra::{bisimilar, Coalgebra, TreeHandle};
use crate::presheaf::{
    natural_states, position_id, restrict_raw, shape_id, underlying_data, Presheaf,
    PresheafMorphism, UnderlyingData,
};
use crate::signature::PfElement;
use crate::util::cartesian;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SiteError {
    #[error("covers listed for unknown object `{0}`")]
    UnknownObject(String),
    #[error("cover of `{object}` has leg `{leg}`, which does not end there")]
    BadLeg { object: String, leg: String },
    #[error("cover [{cover}] of `{object}` does not restrict to a cover along `{along}`")]
    NotStable { object: String, cover: String, along: String },
    #[error("cover [{cover}] of `{object}` composed with [{inner}] does not refine a cover")]
    NotTransitive { object: String, cover: String, inner: String },
    #[error("[{family}] is not a cover of `{object}`")]
    NotACover { object: String, family: String },
    #[error("family has {trees} trees for {legs} legs")]
    LengthMismatch { legs: usize, trees: usize },
    #[error("tree {index} is not over the underlying signature of the map")]
    TreeSignatureMismatch { index: usize },
    #[error("tree {index} is rooted at `{got}`, leg `{leg}` needs `{expected}`")]
    RootMismatch { index: usize, leg: String, expected: String, got: String },
    #[error("tree {index} does not restrict consistently along morphisms")]
    TreeNotNatural { index: usize },
    #[error("trees {left} and {right} disagree on the overlap of their legs")]
    NotMatching { left: usize, right: usize },
    #[error("restriction morphism must end at `{expected}`, not `{got}`")]
    WrongCodomain { expected: String, got: String },
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("the position sections do not form a sheaf")]
    SourceNotASheaf,
    #[error("the shape sections do not form a sheaf")]
    TargetNotASheaf,
    #[error("matching sections over `{object}` have no unique amalgamation")]
    AmalgamationFailed { object: String },
}

fn canon(family: &[String]) -> Vec<String> {
    let set: BTreeSet<&String> = family.iter().collect();
    set.into_iter().cloned().collect()
}

fn show(family: &[String]) -> String {
    family.join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Site {
    category: FiniteCategory,
    covers: BTreeMap<String, Vec<Vec<String>>>,
}

impl Site {
    /// Validate covers over a category.  The identity cover of each object
    /// is added when missing; stability and transitivity are checked against
    /// the chosen pullbacks.
    pub fn new(
        category: FiniteCategory,
        covers: BTreeMap<String, Vec<Vec<String>>>,
    ) -> Result<Self, SiteError> {
        for o in covers.keys() {
            if !category.has_object(o) {
                return Err(SiteError::UnknownObject(o.clone()));
            }
        }
        let mut full: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
        for o in category.objects() {
            let mut fams = covers.get(o).cloned().unwrap_or_default();
            for fam in &fams {
                for leg in fam {
                    if category.morphism(leg).map(|m| m.cod.as_str()) != Some(o.as_str()) {
                        return Err(SiteError::BadLeg { object: o.clone(), leg: leg.clone() });
                    }
                }
            }
            let identity = vec![category.identity(o).to_string()];
            if !fams.iter().any(|f| canon(f) == identity) {
                fams.insert(0, identity);
            }
            full.insert(o.clone(), fams);
        }
        let site = Site { category, covers: full };
        site.check_stability()?;
        site.check_transitivity()?;
        Ok(site)
    }

    fn check_stability(&self) -> Result<(), SiteError> {
        for (o, fams) in &self.covers {
            for fam in fams {
                for beta in self.category.morphisms_into(o) {
                    let d = self.category.dom(beta).to_string();
                    let restricted: Vec<String> = fam
                        .iter()
                        .map(|c| self.category.pullback(beta, c).to_left.clone())
                        .collect();
                    if !self.is_cover(&d, &restricted) {
                        return Err(SiteError::NotStable {
                            object: o.clone(),
                            cover: show(fam),
                            along: beta.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_transitivity(&self) -> Result<(), SiteError> {
        for (o, fams) in &self.covers {
            for fam in fams {
                let options: Vec<Vec<Vec<String>>> = fam
                    .iter()
                    .map(|c| self.covers[self.category.dom(c)].clone())
                    .collect();
                for choice in cartesian(&options) {
                    let mut composites = Vec::new();
                    for (c, inner) in fam.iter().zip(&choice) {
                        for d in inner {
                            composites.push(self.category.compose(d, c).to_string());
                        }
                    }
                    let refines = self.covers[o].iter().any(|g| {
                        g.iter().all(|leg| {
                            composites.iter().any(|e| {
                                self.category
                                    .hom(self.category.dom(leg), self.category.dom(e))
                                    .iter()
                                    .any(|s| self.category.compose(s, e) == leg)
                            })
                        })
                    });
                    if !refines {
                        let inner =
                            choice.iter().map(|f| show(f)).collect::<Vec<_>>().join(" | ");
                        return Err(SiteError::NotTransitive {
                            object: o.clone(),
                            cover: show(fam),
                            inner,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn category(&self) -> &FiniteCategory {
        &self.category
    }

    /// The covers of an object, identity cover included.
    pub fn covers(&self, object: &str) -> &[Vec<String>] {
        &self.covers[object]
    }

    /// Whether the family is one of the covers of the object, compared as
    /// sets of legs.
    pub fn is_cover(&self, object: &str, family: &[String]) -> bool {
        let c = canon(family);
        self.covers[object].iter().any(|f| canon(f) == c)
    }
}

/// The sheaf condition: every matching family of sections over every cover
/// has exactly one amalgamation.
pub fn sheaf_check(site: &Site, x: &Presheaf) -> bool {
    let cat = site.category();
    for o in cat.objects() {
        for fam in site.covers(o) {
            let slots: Vec<Vec<String>> =
                fam.iter().map(|c| x.sections(cat.dom(c)).to_vec()).collect();
            for pick in cartesian(&slots) {
                let matching = fam.iter().enumerate().all(|(i, ci)| {
                    fam.iter().enumerate().all(|(j, cj)| {
                        let sq = cat.pullback(ci, cj);
                        x.restrict(&sq.to_left, &pick[i]) == x.restrict(&sq.to_right, &pick[j])
                    })
                });
                if !matching {
                    continue;
                }
                let amalgamations = x
                    .sections(o)
                    .iter()
                    .filter(|s| fam.iter().zip(&pick).all(|(c, si)| x.restrict(c, s) == si))
                    .count();
                if amalgamations != 1 {
                    return false;
                }
            }
        }
    }
    true
}

/// Natural trees assigned to the legs of a cover, agreeing on the chosen
/// pullbacks of every pair of legs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibleFamily {
    target: String,
    cover: Vec<String>,
    trees: Vec<TreeHandle>,
}

impl CompatibleFamily {
    pub fn new(
        site: &Site,
        f: &PresheafMorphism,
        target: impl Into<String>,
        cover: Vec<String>,
        trees: Vec<TreeHandle>,
    ) -> Result<Self, SiteError> {
        let target = target.into();
        let cat = site.category();
        if !cat.has_object(&target) {
            return Err(SiteError::UnknownObject(target));
        }
        if !site.is_cover(&target, &cover) {
            return Err(SiteError::NotACover { object: target, family: show(&cover) });
        }
        if cover.len() != trees.len() {
            return Err(SiteError::LengthMismatch { legs: cover.len(), trees: trees.len() });
        }
        let data = underlying_data(cat, f);
        for (i, (leg, tree)) in cover.iter().zip(&trees).enumerate() {
            if tree.signature() != data.signature() {
                return Err(SiteError::TreeSignatureMismatch { index: i });
            }
            let root = tree.universe().step(tree.state()).shape();
            let (_, at) = data.shape_info(root);
            if at != cat.dom(leg) {
                return Err(SiteError::RootMismatch {
                    index: i,
                    leg: leg.clone(),
                    expected: cat.dom(leg).to_string(),
                    got: at.to_string(),
                });
            }
            if !natural_states(cat, f, &data, tree.universe()) {
                return Err(SiteError::TreeNotNatural { index: i });
            }
        }
        for (i, ci) in cover.iter().enumerate() {
            for (j, cj) in cover.iter().enumerate() {
                let sq = cat.pullback(ci, cj);
                let (li, si) =
                    restrict_raw(cat, f, &data, trees[i].universe(), trees[i].state(), &sq.to_left);
                let (rj, sj) = restrict_raw(
                    cat,
                    f,
                    &data,
                    trees[j].universe(),
                    trees[j].state(),
                    &sq.to_right,
                );
                if !bisimilar(&li, &si, &rj, &sj) {
                    return Err(SiteError::NotMatching { left: i, right: j });
                }
            }
        }
        Ok(CompatibleFamily { target, cover, trees })
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn cover(&self) -> &[String] {
        &self.cover
    }

    pub fn trees(&self) -> &[TreeHandle] {
        &self.trees
    }
}

/// The family with the identity cover and the tree itself: glueing it gives
/// the tree back.
pub fn unit_family(
    site: &Site,
    f: &PresheafMorphism,
    h: &TreeHandle,
) -> Result<CompatibleFamily, SiteError> {
    let data = underlying_data(site.category(), f);
    if h.signature() != data.signature() {
        return Err(SiteError::TreeSignatureMismatch { index: 0 });
    }
    let (_, at) = data.shape_info(h.universe().step(h.state()).shape());
    let id = site.category().identity(at).to_string();
    CompatibleFamily::new(site, f, at.to_string(), vec![id], vec![h.clone()])
}

/// Restrict a compatible family along β: each leg is pulled back along β and
/// the trees are restricted to the pullback apexes.
pub fn plus_restrict(
    site: &Site,
    f: &PresheafMorphism,
    fam: &CompatibleFamily,
    beta: &str,
) -> Result<CompatibleFamily, SiteError> {
    let cat = site.category();
    let m = cat.morphism(beta).ok_or_else(|| SiteError::UnknownMorphism(beta.into()))?;
    if m.cod != fam.target {
        return Err(SiteError::WrongCodomain { expected: fam.target.clone(), got: m.cod.clone() });
    }
    let data = underlying_data(cat, f);
    let mut cover = Vec::new();
    let mut trees = Vec::new();
    for (c, t) in fam.cover.iter().zip(&fam.trees) {
        let sq = cat.pullback(beta, c);
        cover.push(sq.to_left.clone());
        let (rc, rs) = restrict_raw(cat, f, &data, t.universe(), t.state(), &sq.to_right);
        trees.push(rc.minimize(&rs));
    }
    CompatibleFamily::new(site, f, m.dom.clone(), cover, trees)
}

/// The covers of an object derivable from the declared ones by composing
/// legs with covers of their domains, in canonical form.  Stability makes
/// pullback refinements a special case.
fn derivable_covers(site: &Site, object: &str) -> Vec<Vec<String>> {
    let cat = site.category();
    let mut out: BTreeSet<Vec<String>> =
        site.covers(object).iter().map(|f| canon(f)).collect();
    loop {
        let mut grew = false;
        for fam in out.clone() {
            let options: Vec<Vec<Vec<String>>> =
                fam.iter().map(|c| site.covers(cat.dom(c)).to_vec()).collect();
            for choice in cartesian(&options) {
                let mut composites = Vec::new();
                for (c, inner) in fam.iter().zip(&choice) {
                    for d in inner {
                        composites.push(cat.compose(d, c).to_string());
                    }
                }
                if out.insert(canon(&composites)) {
                    grew = true;
                }
            }
        }
        if !grew {
            return out.into_iter().collect();
        }
    }
}

fn equivalent_with(
    site: &Site,
    f: &PresheafMorphism,
    data: &UnderlyingData,
    derivable: &[Vec<String>],
    fam1: &CompatibleFamily,
    fam2: &CompatibleFamily,
) -> bool {
    let cat = site.category();
    let factorisations = |fam: &CompatibleFamily, e: &str| -> Vec<(Coalgebra, String)> {
        let mut out = Vec::new();
        for (c, t) in fam.cover.iter().zip(&fam.trees) {
            for sigma in cat.hom(cat.dom(e), cat.dom(c)) {
                if cat.compose(sigma, c) == e {
                    out.push(restrict_raw(cat, f, data, t.universe(), t.state(), sigma));
                }
            }
        }
        out
    };
    derivable.iter().any(|fine| {
        fine.iter().all(|e| {
            let lefts = factorisations(fam1, e);
            let rights = factorisations(fam2, e);
            lefts.iter().any(|(lc, ls)| {
                rights.iter().any(|(rc, rs)| bisimilar(lc, ls, rc, rs))
            })
        })
    })
}

/// Whether two families at the same object present the same glued tree: some
/// derivable cover factors through both, with bisimilar restricted trees at
/// every leg.
pub fn family_equivalent(
    site: &Site,
    f: &PresheafMorphism,
    fam1: &CompatibleFamily,
    fam2: &CompatibleFamily,
) -> bool {
    if fam1.target != fam2.target {
        return false;
    }
    let data = underlying_data(site.category(), f);
    let derivable = derivable_covers(site, &fam1.target);
    equivalent_with(site, f, &data, &derivable, fam1, fam2)
}

/// Glue a compatible family into a single tree over the covered object.
/// Requires both the shape and the position sections to be sheaves.  The
/// glued tree is computed by running families as coalgebra states: the root
/// section is the amalgamation of the root sections, and the subtree at a
/// position (β, b) is presented by the family of leg subtrees over the
/// pullback cover of dom β.
pub fn glue(
    site: &Site,
    f: &PresheafMorphism,
    fam: &CompatibleFamily,
) -> Result<TreeHandle, SiteError> {
    let cat = site.category();
    if !sheaf_check(site, f.target()) {
        return Err(SiteError::TargetNotASheaf);
    }
    if !sheaf_check(site, f.source()) {
        return Err(SiteError::SourceNotASheaf);
    }
    // Re-validate: the family may have been built against other data.
    let fam = CompatibleFamily::new(
        site,
        f,
        fam.target.clone(),
        fam.cover.clone(),
        fam.trees.clone(),
    )?;
    let data = underlying_data(cat, f);
    let mut derivable: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut states: Vec<CompatibleFamily> = vec![fam];
    let mut names = vec!["g0".to_string()];
    let mut step = BTreeMap::new();
    let mut next = 0usize;
    while next < states.len() {
        let current = states[next].clone();
        let name = names[next].clone();
        next += 1;
        let c = current.target.clone();
        let roots: Vec<String> = current
            .trees
            .iter()
            .map(|t| data.shape_info(t.universe().step(t.state()).shape()).0.to_string())
            .collect();
        let amalgamations: Vec<&String> = f
            .target()
            .sections(&c)
            .iter()
            .filter(|a| {
                current
                    .cover
                    .iter()
                    .zip(&roots)
                    .all(|(leg, ai)| f.target().restrict(leg, a) == ai)
            })
            .collect();
        if amalgamations.len() != 1 {
            return Err(SiteError::AmalgamationFailed { object: c });
        }
        let a = amalgamations[0].clone();
        let shape = shape_id(&a, &c);
        let mut assignment = BTreeMap::new();
        for (pos, (beta, b)) in data.positions_of(&shape) {
            let d = cat.dom(beta).to_string();
            let mut cover = Vec::new();
            let mut trees = Vec::new();
            for (leg, t) in current.cover.iter().zip(&current.trees) {
                let sq = cat.pullback(beta, leg);
                let moved = f.source().restrict(&sq.to_left, b);
                let child = t
                    .universe()
                    .step(t.state())
                    .child(&position_id(&sq.to_right, moved))
                    .expect("legs carry the pulled-back position")
                    .clone();
                cover.push(sq.to_left.clone());
                trees.push(t.universe().minimize(&child));
            }
            let child_fam = CompatibleFamily::new(site, f, d.clone(), cover, trees)
                .expect("subtrees of a matching family match");
            let der = derivable
                .entry(d.clone())
                .or_insert_with(|| derivable_covers(site, &d));
            let found = states
                .iter()
                .position(|s| {
                    s.target == d && equivalent_with(site, f, &data, der, s, &child_fam)
                });
            let child_name = match found {
                Some(k) => names[k].clone(),
                None => {
                    let n = format!("g{}", states.len());
                    states.push(child_fam);
                    names.push(n.clone());
                    n
                }
            };
            assignment.insert(pos.to_string(), child_name);
        }
        let el = PfElement::new(data.signature(), shape, assignment)
            .expect("amalgamated root carries the family's positions");
        step.insert(name, el);
    }
    let coalg = Coalgebra::new(data.signature().clone(), names, step)
        .expect("family states form a coalgebra");
    Ok(coalg.minimize("g0"))
}
