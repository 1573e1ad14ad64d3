//! Proto-coalgebras and the coherent-part coreflection.
//!
//! A proto-coalgebra relaxes a coalgebra: the step γ: X → Y lands in an
//! ambient set Y into which P(X) is merely embedded by an injection
//! m: P(X) ↣ Y.  A state x *branches* when γ(x) is hit by m, in which case it
//! has a well-defined shape and children.  The coherent states are those all
//! of whose iterated children keep branching; they form the largest honest
//! coalgebra inside the proto-coalgebra, and cutting down to them is right
//! adjoint to the evident inclusion of coalgebras into proto-coalgebras
//! (a coreflection).  Applied to a prefixed point — an injective algebra
//! P(X) ↣ X read backwards — the coherent part is a fixed point: its step is
//! a bijection.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::coalgebra::{check_coalgebra_morphism, Coalgebra, CoalgebraError};
use crate::signature::{PfElement, Signature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtoError {
    #[error("duplicate carrier element `{0}`")]
    DuplicateCarrier(String),
    #[error("duplicate ambient element")]
    DuplicateAmbient,
    #[error("γ is not defined on carrier element `{0}`")]
    GammaNotTotal(String),
    #[error("γ(`{0}`) is not an ambient element")]
    GammaBadValue(String),
    #[error("m is not defined on the whole of P(carrier)")]
    MNotTotal,
    #[error("m is defined on something outside P(carrier)")]
    MExtraneous,
    #[error("m hits an element outside the ambient set")]
    MBadValue,
    #[error("m is not injective")]
    MNotInjective,
    #[error("the two structures are not over the same signature")]
    SignatureMismatch,
    #[error("the supplied map is not a coalgebra morphism into the coherent part")]
    NotACoalgebraMorphism,
    #[error("the supplied pair does not satisfy the proto-coalgebra morphism squares")]
    SquaresFail,
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
}

/// A proto-coalgebra (γ: X → Y, m: P(X) ↣ Y) over a signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtoCoalgebra<Y: Ord + Clone> {
    signature: Signature,
    carrier: Vec<String>,
    ambient: Vec<Y>,
    gamma: BTreeMap<String, Y>,
    m: BTreeMap<PfElement<String>, Y>,
    /// Inverse of m on its image; well defined because m is injective.
    m_inv: BTreeMap<Y, PfElement<String>>,
}

impl<Y: Ord + Clone> ProtoCoalgebra<Y> {
    pub fn new(
        signature: Signature,
        carrier: Vec<String>,
        ambient: Vec<Y>,
        gamma: BTreeMap<String, Y>,
        m: BTreeMap<PfElement<String>, Y>,
    ) -> Result<Self, ProtoError> {
        let mut carrier_set = BTreeSet::new();
        for x in &carrier {
            if !carrier_set.insert(x.clone()) {
                return Err(ProtoError::DuplicateCarrier(x.clone()));
            }
        }
        let ambient_set: BTreeSet<&Y> = ambient.iter().collect();
        if ambient_set.len() != ambient.len() {
            return Err(ProtoError::DuplicateAmbient);
        }
        for x in &carrier {
            let y = gamma.get(x).ok_or_else(|| ProtoError::GammaNotTotal(x.clone()))?;
            if !ambient_set.contains(y) {
                return Err(ProtoError::GammaBadValue(x.clone()));
            }
        }
        let expected: BTreeSet<PfElement<String>> =
            signature.apply(&carrier).into_iter().collect();
        let given: BTreeSet<PfElement<String>> = m.keys().cloned().collect();
        if !expected.is_subset(&given) {
            return Err(ProtoError::MNotTotal);
        }
        if !given.is_subset(&expected) {
            return Err(ProtoError::MExtraneous);
        }
        let mut m_inv = BTreeMap::new();
        for (e, y) in &m {
            if !ambient_set.contains(y) {
                return Err(ProtoError::MBadValue);
            }
            if m_inv.insert(y.clone(), e.clone()).is_some() {
                return Err(ProtoError::MNotInjective);
            }
        }
        Ok(ProtoCoalgebra { signature, carrier, ambient, gamma, m, m_inv })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn carrier(&self) -> &[String] {
        &self.carrier
    }

    pub fn ambient(&self) -> &[Y] {
        &self.ambient
    }

    pub fn gamma(&self, x: &str) -> &Y {
        &self.gamma[x]
    }

    pub fn m(&self, e: &PfElement<String>) -> &Y {
        &self.m[e]
    }

    /// The branching structure of x: the unique element of P(carrier) that m
    /// sends to γ(x), absent when γ(x) misses the image of m.
    pub fn branching(&self, x: &str) -> Option<&PfElement<String>> {
        self.m_inv.get(&self.gamma[x])
    }

    /// Stage n of the coherence chain X₀ = X,
    /// X_{k+1} = {x ∈ X_k | x branches and all children lie in X_k},
    /// in carrier order.
    pub fn chain(&self, n: usize) -> Vec<String> {
        let mut stage: BTreeSet<String> = self.carrier.iter().cloned().collect();
        for _ in 0..n {
            let next: BTreeSet<String> = stage
                .iter()
                .filter(|x| match self.branching(x) {
                    Some(e) => e.assignment().values().all(|c| stage.contains(c)),
                    None => false,
                })
                .cloned()
                .collect();
            if next == stage {
                break;
            }
            stage = next;
        }
        self.carrier.iter().filter(|x| stage.contains(*x)).cloned().collect()
    }

    /// The coherent part: the stabilised chain, its induced coalgebra, and
    /// the inclusion of its states into the carrier.
    pub fn coh(&self) -> CohResult {
        // The chain is decreasing, so it stabilises within |carrier| stages.
        let coherent = self.chain(self.carrier.len() + 1);
        let step: BTreeMap<String, PfElement<String>> = coherent
            .iter()
            .map(|x| (x.clone(), self.branching(x).expect("coherent states branch").clone()))
            .collect();
        let coalgebra = Coalgebra::new(self.signature.clone(), coherent.clone(), step)
            .expect("children of coherent states are coherent");
        let inclusion = coherent.iter().map(|x| (x.clone(), x.clone())).collect();
        CohResult { coherent, coalgebra, inclusion }
    }
}

/// The coherent part of a proto-coalgebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohResult {
    /// Coherent carrier elements, in carrier order.
    pub coherent: Vec<String>,
    /// The induced coalgebra on the coherent part.
    pub coalgebra: Coalgebra,
    /// The (identity-on-names) inclusion of coherent states into the carrier.
    pub inclusion: BTreeMap<String, String>,
}

/// The inclusion of coalgebras into proto-coalgebras: ambient P(X) itself and
/// m the identity.
pub fn embed(c: &Coalgebra) -> ProtoCoalgebra<PfElement<String>> {
    let elements = c.signature().apply(&c.states().to_vec());
    let gamma = c.states().iter().map(|x| (x.clone(), c.step(x).clone())).collect();
    let m = elements.iter().map(|e| (e.clone(), e.clone())).collect();
    ProtoCoalgebra::new(
        c.signature().clone(),
        c.states().to_vec(),
        elements,
        gamma,
        m,
    )
    .expect("a coalgebra is a proto-coalgebra")
}

/// A morphism of proto-coalgebras out of an embedded coalgebra
/// I(z) = (γ_z, id): a map α on carriers and a map β: P(Z) → Y with
/// β ∘ γ_z = γ ∘ α and β = m ∘ P(α).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtoMorphism<Y: Ord + Clone> {
    pub alpha: BTreeMap<String, String>,
    pub beta: BTreeMap<PfElement<String>, Y>,
}

/// Check the two commuting squares for a candidate morphism I(z) → p.
pub fn is_proto_morphism<Y: Ord + Clone>(
    z: &Coalgebra,
    p: &ProtoCoalgebra<Y>,
    pm: &ProtoMorphism<Y>,
) -> Result<bool, ProtoError> {
    if z.signature() != p.signature() {
        return Err(ProtoError::SignatureMismatch);
    }
    let carrier: BTreeSet<&str> = p.carrier.iter().map(|s| s.as_str()).collect();
    for x in z.states() {
        match pm.alpha.get(x) {
            Some(v) if carrier.contains(v.as_str()) => {}
            _ => return Ok(false),
        }
    }
    for e in z.signature().apply(&z.states().to_vec()) {
        // Right square: β = m ∘ P(α).
        let image = match e.map(&pm.alpha) {
            Ok(im) => im,
            Err(_) => return Ok(false),
        };
        match pm.beta.get(&e) {
            Some(y) if *y == p.m[&image] => {}
            _ => return Ok(false),
        }
    }
    for x in z.states() {
        // Left square: β(γ_z(x)) = γ(α(x)).
        if pm.beta[z.step(x)] != p.gamma[&pm.alpha[x]] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Transpose a coalgebra morphism φ: z → Coh(p) across the coreflection:
/// α = inclusion ∘ φ and β = m ∘ P(α).
pub fn transpose_to_proto<Y: Ord + Clone>(
    z: &Coalgebra,
    p: &ProtoCoalgebra<Y>,
    phi: &BTreeMap<String, String>,
) -> Result<ProtoMorphism<Y>, ProtoError> {
    if z.signature() != p.signature() {
        return Err(ProtoError::SignatureMismatch);
    }
    let coh = p.coh();
    if !check_coalgebra_morphism(z, &coh.coalgebra, phi)? {
        return Err(ProtoError::NotACoalgebraMorphism);
    }
    let alpha: BTreeMap<String, String> =
        z.states().iter().map(|x| (x.clone(), coh.inclusion[&phi[x]].clone())).collect();
    let beta = z
        .signature()
        .apply(&z.states().to_vec())
        .into_iter()
        .map(|e| {
            let y = p.m[&e.map(&alpha).expect("α is total")].clone();
            (e, y)
        })
        .collect();
    let pm = ProtoMorphism { alpha, beta };
    debug_assert_eq!(is_proto_morphism(z, p, &pm), Ok(true));
    Ok(pm)
}

/// Transpose a proto-coalgebra morphism I(z) → p back to a coalgebra
/// morphism z → Coh(p): the squares force α to land in the coherent part,
/// and the corestriction commutes with the steps.
pub fn transpose_to_coalgebra<Y: Ord + Clone>(
    z: &Coalgebra,
    p: &ProtoCoalgebra<Y>,
    pm: &ProtoMorphism<Y>,
) -> Result<BTreeMap<String, String>, ProtoError> {
    if !is_proto_morphism(z, p, pm)? {
        return Err(ProtoError::SquaresFail);
    }
    let coh = p.coh();
    let phi = pm.alpha.clone();
    let coherent: BTreeSet<&str> = coh.coherent.iter().map(|s| s.as_str()).collect();
    for x in z.states() {
        // Guaranteed by the squares: α(x) branches with children in im(α),
        // so it survives every stage of the chain.
        assert!(
            coherent.contains(phi[x].as_str()),
            "squares force the transpose through the coherent part"
        );
    }
    debug_assert_eq!(check_coalgebra_morphism(z, &coh.coalgebra, &phi), Ok(true));
    Ok(phi)
}

/// Read a prefixed point — an injective algebra α: P(X) ↣ X — as the
/// proto-coalgebra (id_X, α) and take its coherent part.  The result is a
/// fixed point: its step is a bijection onto P(coherent).
pub fn prefixed_to_fixed(
    signature: &Signature,
    carrier: Vec<String>,
    alpha: BTreeMap<PfElement<String>, String>,
) -> Result<CohResult, ProtoError> {
    let ambient = carrier.clone();
    let gamma = carrier.iter().map(|x| (x.clone(), x.clone())).collect();
    let p = ProtoCoalgebra::new(signature.clone(), carrier, ambient, gamma, alpha)?;
    let coh = p.coh();
    // Fixed-point check: the step is injective and onto P(coherent).
    let elements: BTreeSet<PfElement<String>> =
        signature.apply(&coh.coherent).into_iter().collect();
    let hit: BTreeSet<PfElement<String>> =
        coh.coherent.iter().map(|x| coh.coalgebra.step(x).clone()).collect();
    assert_eq!(hit.len(), coh.coherent.len(), "step of a fixed point is injective");
    assert_eq!(hit, elements, "step of a fixed point is onto P(coherent)");
    Ok(coh)
}
