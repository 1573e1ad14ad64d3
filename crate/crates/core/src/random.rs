//! Seeded random generators for signatures and coalgebras, used by the
//! property and acceptance suites.  Everything is driven by a caller-supplied
//! RNG, so runs are reproducible from the seed.

use std::collections::BTreeMap;

use rand::Rng;

use crate::coalgebra::Coalgebra;
use crate::indexed::IndexedSignature;
use crate::signature::{PfElement, Signature};

/// A signature with 1..=max_shapes shapes of arity 0..=max_arity.
pub fn random_signature<R: Rng>(rng: &mut R, max_shapes: usize, max_arity: usize) -> Signature {
    let n = rng.gen_range(1..=max_shapes);
    let decls = (0..n)
        .map(|i| {
            let arity = rng.gen_range(0..=max_arity);
            (format!("s{i}"), (0..arity).map(|k| format!("p{k}")).collect())
        })
        .collect();
    Signature::new(decls, None).expect("generated identifiers are distinct")
}

/// A coalgebra with 1..=max_states states and uniformly random steps.
pub fn random_coalgebra<R: Rng>(rng: &mut R, sig: &Signature, max_states: usize) -> Coalgebra {
    let n = rng.gen_range(1..=max_states);
    let states: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let step = states
        .iter()
        .map(|s| {
            let shape = &sig.shapes()[rng.gen_range(0..sig.shapes().len())];
            let assignment: BTreeMap<String, String> = sig
                .positions(shape)
                .unwrap()
                .iter()
                .map(|p| (p.clone(), states[rng.gen_range(0..n)].clone()))
                .collect();
            (s.clone(), PfElement::new(sig, shape.clone(), assignment).unwrap())
        })
        .collect();
    Coalgebra::new(sig.clone(), states, step).expect("generated steps are closed")
}

/// Fibre the signature over 1..=max_indices indices, fibres uniform.
pub fn random_indexed<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    max_indices: usize,
) -> IndexedSignature {
    let n = rng.gen_range(1..=max_indices);
    let index: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();
    let fibre_of = sig
        .shapes()
        .iter()
        .map(|a| (a.clone(), index[rng.gen_range(0..n)].clone()))
        .collect();
    IndexedSignature::new(sig.clone(), index, fibre_of).expect("fibres are valid indices")
}

/// A uniformly random function between finite sets as a map.
pub fn random_function<R: Rng>(rng: &mut R, dom: &[String], cod: &[String]) -> BTreeMap<String, String> {
    dom.iter().map(|d| (d.clone(), cod[rng.gen_range(0..cod.len())].clone())).collect()
}
