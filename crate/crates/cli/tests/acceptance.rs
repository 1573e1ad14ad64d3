//! Acceptance suite: twelve executable checks covering the whole workspace,
//! one test per criterion, each ending in a single printed pass line.  All
//! randomness is drawn from fixed ChaCha8 seeds, so every run examines the
//! same instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mtypes_core::category::trivial_category;
use mtypes_core::fixtures::{build_category, square};
use mtypes_core::indexed::pair_shape;
use mtypes_core::presheaf::{
    apply_pf, natural_tree, position_id, restrict_tree, shape_id, underlying_data,
    DEFAULT_ENUMERATION_GUARD,
};
use mtypes_core::proto::{
    is_proto_morphism, transpose_to_coalgebra, transpose_to_proto, ProtoCoalgebra, ProtoMorphism,
};
use mtypes_core::random::{random_coalgebra, random_function, random_indexed, random_signature};
use mtypes_core::tree::is_approximation_sequence;
use mtypes_core::util::all_functions;
use mtypes_core::{
    bisimilar, check_coalgebra_morphism, family_equivalent, glue, lift_path, plus_restrict,
    sheaf_check, unit_family, Coalgebra, CompatibleFamily, FiniteCategory, FiniteTree,
    PathSequence, PfElement, Presheaf, PresheafMorphism, Signature, Site, TreeHandle,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pass(number: u32, what: &str) {
    println!("criterion {number:02}: PASS — {what}");
}

fn el(sig: &Signature, shape: &str, children: &[(&str, &str)]) -> PfElement<String> {
    PfElement::new(
        sig,
        shape.to_string(),
        children.iter().map(|(p, v)| (p.to_string(), v.to_string())).collect(),
    )
    .unwrap()
}

fn coalgebra(sig: &Signature, steps: &[(&str, PfElement<String>)]) -> Coalgebra {
    Coalgebra::new(
        sig.clone(),
        steps.iter().map(|(s, _)| s.to_string()).collect(),
        steps.iter().map(|(s, e)| (s.to_string(), e.clone())).collect(),
    )
    .unwrap()
}

/// Every coalgebra over `sig` with exactly `k` states, by running an
/// odometer over the step choices.
fn enumerate_coalgebras(sig: &Signature, k: usize) -> Vec<Coalgebra> {
    let states: Vec<String> = (0..k).map(|i| format!("e{i}")).collect();
    let options = sig.apply(&states);
    let mut out = Vec::new();
    let mut choice = vec![0usize; k];
    'odometer: loop {
        let step = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), options[choice[i]].clone()))
            .collect();
        out.push(Coalgebra::new(sig.clone(), states.clone(), step).unwrap());
        let mut i = 0;
        loop {
            if i == k {
                break 'odometer;
            }
            choice[i] += 1;
            if choice[i] < options.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
    out
}

// ----- criterion 1: polynomial application --------------------------------

#[test]
fn criterion_01_polynomial_sizes_and_functor_laws() {
    let mut rng = rng(0xAC01);
    for _ in 0..50 {
        let sig = random_signature(&mut rng, 4, 3);
        for n in 0usize..=4 {
            let xs: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
            let elements = sig.apply(&xs);
            let expected: usize =
                sig.shapes().iter().map(|a| n.pow(sig.arity(a).unwrap() as u32)).sum();
            assert_eq!(elements.len(), expected, "|P(X)| = Σ_a |X|^(arity a)");

            let id: BTreeMap<String, String> =
                xs.iter().map(|x| (x.clone(), x.clone())).collect();
            let ys: Vec<String> = (0..rng.gen_range(1..=3)).map(|i| format!("y{i}")).collect();
            let zs: Vec<String> = (0..rng.gen_range(1..=3)).map(|i| format!("z{i}")).collect();
            let f = random_function(&mut rng, &xs, &ys);
            let g = random_function(&mut rng, &ys, &zs);
            let gf: BTreeMap<String, String> =
                xs.iter().map(|x| (x.clone(), g[&f[x]].clone())).collect();
            for e in &elements {
                assert_eq!(&e.map(&id).unwrap(), e, "P(id) = id");
                assert_eq!(
                    e.map(&f).unwrap().map(&g).unwrap(),
                    e.map(&gf).unwrap(),
                    "P(g) ∘ P(f) = P(g∘f)"
                );
            }
        }
    }
    pass(1, "application sizes and functor laws on 50 random signatures");
}

// ----- criterion 2: unfoldings approximate each other ----------------------

#[test]
fn criterion_02_unfoldings_are_truncation_compatible() {
    let mut rng = rng(0xAC02);
    for _ in 0..100 {
        let sig = random_signature(&mut rng, 3, 3);
        let c = random_coalgebra(&mut rng, &sig, 6);
        let s = c.states()[rng.gen_range(0..c.states().len())].clone();
        let trees: Vec<FiniteTree> = (0..=8).map(|n| c.unfold(&s, n).unwrap()).collect();
        for m in 0..=8usize {
            for n in 0..m {
                assert_eq!(trees[m].truncate(n), trees[n], "unfold(m) cut at n is unfold(n)");
            }
        }
        assert!(is_approximation_sequence(&trees[1..]));
    }
    pass(2, "depth-n unfoldings of 100 random coalgebras cohere under truncation");
}

// ----- criterion 3: minimisation -------------------------------------------

#[test]
fn criterion_03_minimisation_is_the_unique_morphism() {
    let mut rng = rng(0xAC03);
    for _ in 0..100 {
        let sig = random_signature(&mut rng, 3, 2);
        let c = random_coalgebra(&mut rng, &sig, 6);
        let s = c.states()[rng.gen_range(0..c.states().len())].clone();
        let (h, map) = c.minimize_with_map(&s);
        let reach = c.reachable(&s).unwrap();
        assert!(
            check_coalgebra_morphism(&reach, h.universe(), &map).unwrap(),
            "the class map is a coalgebra morphism"
        );
        assert_eq!(map[&s], h.state(), "the start state lands on the handle state");
    }
    // Uniqueness: over a two-shape signature, every coalgebra with at most
    // three states admits exactly one function into its minimised universe
    // that is a morphism.
    let sig = adjunction_signature();
    let mut checked = 0usize;
    for k in 1..=3 {
        for c in enumerate_coalgebras(&sig, k) {
            let s0 = c.states()[0].clone();
            let reach = c.reachable(&s0).unwrap();
            let u = reach.minimize(&s0).universe().clone();
            let morphisms = all_functions(reach.states(), u.states())
                .into_iter()
                .filter(|f| check_coalgebra_morphism(&reach, &u, f).unwrap())
                .count();
            assert_eq!(morphisms, 1, "exactly one morphism into the minimised universe");
            checked += 1;
        }
    }
    assert_eq!(checked, 2 + 9 + 64);
    // and likewise on random signatures
    for _ in 0..30 {
        let sig = random_signature(&mut rng, 2, 2);
        let big = random_coalgebra(&mut rng, &sig, 3);
        let s0 = big.states()[0].clone();
        let reach = big.reachable(&s0).unwrap();
        let u = reach.minimize(&s0).universe().clone();
        let morphisms = all_functions(reach.states(), u.states())
            .into_iter()
            .filter(|f| check_coalgebra_morphism(&reach, &u, f).unwrap())
            .count();
        assert_eq!(morphisms, 1);
    }
    pass(3, "class maps are morphisms; uniqueness exhausted over all 75 small coalgebras");
}

// ----- criterion 4: minimised universes are strongly extensional -----------

#[test]
fn criterion_04_minimised_step_is_injective() {
    let mut rng = rng(0xAC04);
    for _ in 0..100 {
        let sig = random_signature(&mut rng, 3, 2);
        let c = random_coalgebra(&mut rng, &sig, 6);
        let s = c.states()[rng.gen_range(0..c.states().len())].clone();
        let u = c.minimize(&s).universe().clone();
        let mut inverse: BTreeMap<PfElement<String>, String> = BTreeMap::new();
        for x in u.states() {
            assert!(
                inverse.insert(u.step(x).clone(), x.clone()).is_none(),
                "step is injective on a minimised universe"
            );
        }
        for x in u.states() {
            assert_eq!(&inverse[u.step(x)], x, "the image inverse undoes step");
        }
        for (i, x) in u.states().iter().enumerate() {
            for y in &u.states()[i + 1..] {
                assert!(!bisimilar(&u, x, &u, y), "distinct minimised states differ as trees");
            }
        }
    }
    pass(4, "step maps of 100 minimised universes are injective with inverse on the image");
}

// ----- criterion 5: the coherent part is right adjoint to inclusion --------

fn adjunction_signature() -> Signature {
    Signature::new(vec![("u".into(), vec!["n".into()]), ("k".into(), vec![])], None).unwrap()
}

#[test]
fn criterion_05_coherent_part_adjunction_is_a_bijection() {
    let sig = adjunction_signature();
    // Every proto-coalgebra with carrier {a, b}, ambient P{a, b} plus one
    // spare point missed by m, and m the tautological injection: γ ranges
    // over all 4² maps into the ambient set.
    let carrier = vec!["a".to_string(), "b".to_string()];
    let elements = sig.apply(&carrier);
    let mut ambient: Vec<String> = elements.iter().map(|e| format!("[{e}]")).collect();
    ambient.push("out".into());
    let m: BTreeMap<PfElement<String>, String> =
        elements.iter().map(|e| (e.clone(), format!("[{e}]"))).collect();
    let protos: Vec<ProtoCoalgebra<String>> = all_functions(&carrier, &ambient)
        .into_iter()
        .map(|gamma| {
            ProtoCoalgebra::new(sig.clone(), carrier.clone(), ambient.clone(), gamma, m.clone())
                .unwrap()
        })
        .collect();
    assert_eq!(protos.len(), 16);
    // every coalgebra with at most three states over the same signature
    let zs: Vec<Coalgebra> =
        (1..=3).flat_map(|k| enumerate_coalgebras(&sig, k)).collect();
    assert_eq!(zs.len(), 2 + 9 + 64);
    let mut nonempty_homs = 0usize;
    let mut rejected_candidates = 0usize;
    for z in &zs {
        for p in &protos {
            let coh = p.coh();
            let into_coh: Vec<BTreeMap<String, String>> =
                all_functions(z.states(), coh.coalgebra.states())
                    .into_iter()
                    .filter(|f| check_coalgebra_morphism(z, &coh.coalgebra, f).unwrap())
                    .collect();
            // Every candidate pair (α, β) has β forced to m ∘ P(α), so
            // enumerating α enumerates all of them.
            let mut into_proto: Vec<ProtoMorphism<String>> = Vec::new();
            for alpha in all_functions(z.states(), p.carrier()) {
                let beta: BTreeMap<PfElement<String>, String> = sig
                    .apply(z.states())
                    .into_iter()
                    .map(|e| {
                        let y = p.m(&e.map(&alpha).unwrap()).clone();
                        (e, y)
                    })
                    .collect();
                let pm = ProtoMorphism { alpha, beta };
                if is_proto_morphism(z, p, &pm).unwrap() {
                    into_proto.push(pm);
                } else {
                    rejected_candidates += 1;
                }
            }
            assert_eq!(
                into_coh.len(),
                into_proto.len(),
                "hom-sets across the adjunction have equal size"
            );
            nonempty_homs += usize::from(!into_coh.is_empty());
            for phi in &into_coh {
                let pm = transpose_to_proto(z, p, phi).unwrap();
                assert!(is_proto_morphism(z, p, &pm).unwrap());
                assert_eq!(&transpose_to_coalgebra(z, p, &pm).unwrap(), phi, "round trip");
            }
            for pm in &into_proto {
                let phi = transpose_to_coalgebra(z, p, pm).unwrap();
                assert!(check_coalgebra_morphism(z, &coh.coalgebra, &phi).unwrap());
                assert_eq!(&transpose_to_proto(z, p, &phi).unwrap(), pm, "round trip");
            }
        }
    }
    assert!(nonempty_homs >= 3 && rejected_candidates >= 3, "the grid is not vacuous");
    pass(5, "transposition is a hom-set bijection over 16×75 enumerated pairs");
}

// ----- criterion 6: path sets ----------------------------------------------

#[test]
fn criterion_06_path_sets_match_brute_force_and_cohere() {
    let mut rng = rng(0xAC06);
    for _ in 0..50 {
        let sig = random_signature(&mut rng, 3, 2);
        let c = random_coalgebra(&mut rng, &sig, 4);
        let s = c.states()[rng.gen_range(0..c.states().len())].clone();
        let h = c.minimize(&s);
        let u = h.universe();
        let truth: BTreeSet<(Vec<String>, Vec<String>)> = u
            .paths_from(h.state(), 4)
            .unwrap()
            .into_iter()
            .map(|p| {
                let shapes =
                    p.states().iter().map(|x| u.step(x).shape().to_string()).collect();
                (shapes, p.labels().to_vec())
            })
            .collect();
        assert!(!truth.is_empty());
        for seq in PathSequence::enumerate(&sig, 4) {
            assert_eq!(
                h.path_set_contains(&seq),
                truth.contains(&(seq.shapes().to_vec(), seq.labels().to_vec())),
                "membership agrees with brute-forced path projections"
            );
        }
        assert!(h.path_set_coherent(4), "presented path sets are coherent");
    }
    pass(6, "path-set membership of 50 random trees matches enumeration and coheres");
}

// ----- criterion 7: paths lift uniquely along minimisation -----------------

#[test]
fn criterion_07_paths_lift_uniquely() {
    let mut rng = rng(0xAC07);
    let mut lifted = 0usize;
    for _ in 0..50 {
        let sig = random_signature(&mut rng, 3, 2);
        let big = random_coalgebra(&mut rng, &sig, 4);
        let s0 = big.states()[0].clone();
        let source = big.reachable(&s0).unwrap();
        let (h, map) = source.minimize_with_map(&s0);
        let target = h.universe().clone();
        for x in source.states() {
            // every target path of at most four steps out of the class of x
            for tau in target.paths_from(&map[x], 5).unwrap() {
                let lift = lift_path(&source, &target, &map, &tau, x).unwrap();
                assert_eq!(lift.states()[0], *x, "the lift starts at the chosen preimage");
                assert_eq!(lift.map_states(&map, &target).unwrap(), tau, "the lift projects back");
                let matching = source
                    .paths_from(x, 5)
                    .unwrap()
                    .into_iter()
                    .filter(|c| {
                        c.len_states() == tau.len_states()
                            && c.map_states(&map, &target).unwrap() == tau
                    })
                    .count();
                assert_eq!(matching, 1, "the lift is the only path over τ from x");
                lifted += 1;
            }
        }
    }
    assert!(lifted >= 200, "the family is not vacuous ({lifted} paths lifted)");
    pass(7, "every short path lifts uniquely along 50 random minimisation maps");
}

// ----- criterion 8: fibre coherence is equaliser agreement -----------------

#[test]
fn criterion_08_fibre_coherence_matches_the_equaliser() {
    let mut rng = rng(0xAC08);
    let mut coherent = 0usize;
    let mut incoherent = 0usize;
    for _ in 0..50 {
        let sig = random_signature(&mut rng, 3, 2);
        let ix = random_indexed(&mut rng, &sig, 3);
        let c = random_coalgebra(&mut rng, &sig, 5);
        for s in c.states() {
            let h = c.minimize(s);
            let direct = ix.fibre_coherent(&h);
            assert_eq!(direct, ix.equaliser_agrees(&h).unwrap());
            if direct {
                coherent += 1;
            } else {
                incoherent += 1;
            }
        }
    }
    assert!(coherent > 0 && incoherent > 0, "both verdicts are exercised");
    pass(8, "fibre coherence equals equaliser agreement on every state of 50 coalgebras");
}

// ----- criterion 9: reindexing relabels fibres -----------------------------

fn retag(tree: &FiniteTree, j: &str) -> FiniteTree {
    match tree {
        FiniteTree::Cut => FiniteTree::Cut,
        FiniteTree::Node { shape, children } => FiniteTree::node(
            pair_shape(j, shape),
            children.iter().map(|(p, t)| (p.clone(), retag(t, j))).collect(),
        ),
    }
}

#[test]
fn criterion_09_reindexed_trees_are_retagged_trees() {
    let mut rng = rng(0xAC09);
    for _ in 0..20 {
        let sig = random_signature(&mut rng, 3, 2);
        let ix = random_indexed(&mut rng, &sig, 3);
        let js: Vec<String> = vec!["j0".into(), "j1".into()];
        let mut x = random_function(&mut rng, &js, ix.index());
        // point j0 at a realisable fibre and build a tree that stays inside it
        let witness = sig.shapes()[rng.gen_range(0..sig.shapes().len())].clone();
        x.insert("j0".into(), ix.fibre_of(&witness).to_string());
        let i = x["j0"].clone();
        let fibre_shapes: Vec<String> =
            sig.shapes().iter().filter(|a| ix.fibre_of(a) == i).cloned().collect();
        let n = rng.gen_range(1..=4);
        let states: Vec<String> = (0..n).map(|k| format!("q{k}")).collect();
        let step: BTreeMap<String, PfElement<String>> = states
            .iter()
            .map(|s| {
                let shape = fibre_shapes[rng.gen_range(0..fibre_shapes.len())].clone();
                let assignment = sig
                    .positions(&shape)
                    .unwrap()
                    .iter()
                    .map(|p| (p.clone(), states[rng.gen_range(0..n)].clone()))
                    .collect();
                (s.clone(), PfElement::new(&sig, shape, assignment).unwrap())
            })
            .collect();
        let c = Coalgebra::new(sig.clone(), states.clone(), step).unwrap();
        let h = c.minimize(&states[0]);
        let rh = ix
            .reindex_handle("j0", &x, &h)
            .unwrap()
            .expect("the tree stays inside the selected fibre");
        for depth in 0..=5 {
            assert_eq!(rh.truncate(depth), retag(&h.truncate(depth), "j0"));
        }
        // a root in any other fibre transports to nothing
        if let Some(other) = sig.shapes().iter().find(|a| ix.fibre_of(a) != i) {
            let assignment: BTreeMap<String, String> = sig
                .positions(other)
                .unwrap()
                .iter()
                .map(|p| (p.clone(), "z".to_string()))
                .collect();
            let loner = coalgebra(
                &sig,
                &[("z", PfElement::new(&sig, other.clone(), assignment).unwrap())],
            );
            assert_eq!(ix.reindex_handle("j0", &x, &loner.minimize("z")).unwrap(), None);
        }
    }
    pass(9, "20 reindexed trees equal their retagged originals to depth 5");
}

// ----- criterion 10: glueing laws on two sites ------------------------------

fn triples(entries: &[(&str, &str, &str)]) -> BTreeMap<(String, String), String> {
    entries
        .iter()
        .map(|(m, s, v)| ((m.to_string(), s.to_string()), v.to_string()))
        .collect()
}

fn psections(entries: &[(&str, &[&str])]) -> BTreeMap<String, Vec<String>> {
    entries
        .iter()
        .map(|(o, ss)| (o.to_string(), ss.iter().map(|s| s.to_string()).collect()))
        .collect()
}

fn pcovers(entries: &[(&str, &[&[&str]])]) -> BTreeMap<String, Vec<Vec<String>>> {
    entries
        .iter()
        .map(|(o, fams)| {
            (
                o.to_string(),
                fams.iter().map(|f| f.iter().map(|l| l.to_string()).collect()).collect(),
            )
        })
        .collect()
}

/// The running cospan example: C covered by two pieces C1, C2 overlapping in
/// P, with shape sections distinguishing the pieces only over C1 and a
/// single position section over l0 traced onto the overlap.
fn square_map() -> (FiniteCategory, PresheafMorphism) {
    let cat = square();
    let a = Presheaf::new(
        &cat,
        psections(&[("C", &["s0", "s1"]), ("C1", &["l0", "l1"]), ("C2", &["r0"]), ("P", &["p"])]),
        triples(&[
            ("c1", "s0", "l0"),
            ("c1", "s1", "l1"),
            ("c2", "s0", "r0"),
            ("c2", "s1", "r0"),
            ("q1", "l0", "p"),
            ("q1", "l1", "p"),
            ("q2", "r0", "p"),
            ("diag", "s0", "p"),
            ("diag", "s1", "p"),
        ]),
    )
    .unwrap();
    let b = Presheaf::new(
        &cat,
        psections(&[("C", &[]), ("C1", &["m"]), ("C2", &[]), ("P", &["mp"])]),
        triples(&[("q1", "m", "mp")]),
    )
    .unwrap();
    let f =
        PresheafMorphism::new(&cat, &b, &a, triples(&[("C1", "m", "l0"), ("P", "mp", "p")]))
            .unwrap();
    (cat, f)
}

/// A cover by two genuinely disjoint pieces: the overlap object carries one
/// shape section and no position sections at all, so all shapes are leaves,
/// matching is vacuous, and glueing reduces to amalgamating root sections.
fn disjoint_map() -> (FiniteCategory, PresheafMorphism) {
    let cat = build_category(
        &["C", "C1", "C2", "O"],
        &[
            ("c1", "C1", "C"),
            ("c2", "C2", "C"),
            ("o1", "O", "C1"),
            ("o2", "O", "C2"),
            ("dC", "O", "C"),
        ],
        &[("o1", "c1", "dC"), ("o2", "c2", "dC")],
        &[
            ("c1", "c1", "C1", "id_C1", "id_C1"),
            ("c2", "c2", "C2", "id_C2", "id_C2"),
            ("c1", "c2", "O", "o1", "o2"),
            ("c2", "c1", "O", "o2", "o1"),
            ("c1", "dC", "O", "o1", "id_O"),
            ("dC", "c1", "O", "id_O", "o1"),
            ("c2", "dC", "O", "o2", "id_O"),
            ("dC", "c2", "O", "id_O", "o2"),
            ("dC", "dC", "O", "id_O", "id_O"),
            ("o1", "o1", "O", "id_O", "id_O"),
            ("o2", "o2", "O", "id_O", "id_O"),
        ],
    );
    let a = Presheaf::new(
        &cat,
        psections(&[("C", &["sa", "sb"]), ("C1", &["l0", "l1"]), ("C2", &["r0"]), ("O", &["pt"])]),
        triples(&[
            ("c1", "sa", "l0"),
            ("c1", "sb", "l1"),
            ("c2", "sa", "r0"),
            ("c2", "sb", "r0"),
            ("o1", "l0", "pt"),
            ("o1", "l1", "pt"),
            ("o2", "r0", "pt"),
            ("dC", "sa", "pt"),
            ("dC", "sb", "pt"),
        ]),
    )
    .unwrap();
    let b = Presheaf::new(
        &cat,
        psections(&[("C", &[]), ("C1", &[]), ("C2", &[]), ("O", &[])]),
        BTreeMap::new(),
    )
    .unwrap();
    let f = PresheafMorphism::new(&cat, &b, &a, BTreeMap::new()).unwrap();
    (cat, f)
}

/// All trees with at most `max_states` states over the underlying signature
/// whose restrictions are consistent, one representative per tree.
fn enumerate_natural_handles(
    cat: &FiniteCategory,
    f: &PresheafMorphism,
    sig: &Signature,
    max_states: usize,
) -> Vec<TreeHandle> {
    // minimize renumbers breadth-first, so bisimilar trees share their
    // canonical universe verbatim and a rendered key dedups exactly
    let mut seen = BTreeSet::new();
    let mut handles: Vec<TreeHandle> = Vec::new();
    for k in 1..=max_states {
        for c in enumerate_coalgebras(sig, k) {
            let start = c.states()[0].clone();
            let h = c.minimize(&start);
            let key: String = h
                .universe()
                .states()
                .iter()
                .map(|s| format!("{s}={};", h.universe().step(s)))
                .collect();
            if seen.insert(key) && natural_tree(cat, f, &h) {
                handles.push(h);
            }
        }
    }
    handles
}

/// Shared law checker for a family (t1 over the leg c1, t2 over c2) covering
/// the object C: the sheaf premises hold, the glued tree restricts back to
/// the legs, glueing the unit family of every supplied tree returns that
/// tree, and among consistent trees rooted over C the glued tree is the only
/// one restricting to the legs.
fn check_glueing_laws(
    cat: &FiniteCategory,
    f: &PresheafMorphism,
    site: &Site,
    t1: &TreeHandle,
    t2: &TreeHandle,
    naturals: &[TreeHandle],
    extra_handles: &[TreeHandle],
    foil: &TreeHandle,
) -> TreeHandle {
    let data = underlying_data(cat, f);
    assert!(sheaf_check(site, f.target()), "shape sections form a sheaf");
    assert!(sheaf_check(site, f.source()), "position sections form a sheaf");
    let fam = CompatibleFamily::new(
        site,
        f,
        "C",
        vec!["c1".into(), "c2".into()],
        vec![t1.clone(), t2.clone()],
    )
    .unwrap();
    let glued = glue(site, f, &fam).unwrap();
    assert!(natural_tree(cat, f, &glued));
    assert!(restrict_tree(cat, f, &glued, "c1").unwrap().bisimilar_to(t1));
    assert!(restrict_tree(cat, f, &glued, "c2").unwrap().bisimilar_to(t2));

    // glueing a unit family returns the tree, over every enumerated
    // consistent tree and over the extra fixtures
    assert!(naturals.len() >= 3, "the enumeration finds consistent trees");
    let mut pool = naturals.to_vec();
    pool.push(glued.clone());
    pool.extend_from_slice(extra_handles);
    for h in &pool {
        let uf = unit_family(site, f, h).unwrap();
        assert!(glue(site, f, &uf).unwrap().bisimilar_to(h), "η then glue is the identity");
    }

    // uniqueness: a consistent tree rooted over C restricts to the two legs
    // exactly when it is the glued tree
    assert!(natural_tree(cat, f, foil));
    let mut amalgamations = 0usize;
    let mut rejected = 0usize;
    pool.push(foil.clone());
    for h in &pool {
        let root = h.universe().step(h.state()).shape();
        if data.shape_info(root).1 != "C" {
            continue;
        }
        let restricts = restrict_tree(cat, f, h, "c1").unwrap().bisimilar_to(t1)
            && restrict_tree(cat, f, h, "c2").unwrap().bisimilar_to(t2);
        assert_eq!(restricts, h.bisimilar_to(&glued), "the glued tree is the unique amalgamation");
        if restricts {
            amalgamations += 1;
        } else {
            rejected += 1;
        }
    }
    assert!(amalgamations >= 1 && rejected >= 1);
    glued
}

#[test]
fn criterion_10_glueing_on_two_sites() {
    // site one: disjoint pieces — no position sections anywhere, so every
    // tree is a bare leaf and glueing is exactly section amalgamation
    let (dcat, df) = disjoint_map();
    let dsig = underlying_data(&dcat, &df).signature().clone();
    let dsite = Site::new(
        dcat.clone(),
        pcovers(&[
            ("C", &[&["c1", "c2"]]),
            ("C1", &[&["id_C1", "o1"]]),
            ("C2", &[&["id_C2", "o2"]]),
        ]),
    )
    .unwrap();
    let leaves = coalgebra(
        &dsig,
        &[
            ("l0", el(&dsig, "l0@C1", &[])),
            ("l1", el(&dsig, "l1@C1", &[])),
            ("r0", el(&dsig, "r0@C2", &[])),
            ("sb", el(&dsig, "sb@C", &[])),
        ],
    );
    let dt1 = leaves.minimize("l0");
    let dt2 = leaves.minimize("r0");
    let dfoil = leaves.minimize("sb");
    // every tree over this signature collapses to a leaf, so the sweep up to
    // four states is the complete list of consistent trees of that size
    let dnaturals = enumerate_natural_handles(&dcat, &df, &dsig, 4);
    assert_eq!(dnaturals.len(), 6, "one leaf tree per shape");
    let dglued = check_glueing_laws(&dcat, &df, &dsite, &dt1, &dt2, &dnaturals, &[], &dfoil);
    assert_eq!(dglued.universe().step(dglued.state()).shape(), "sa@C");
    // crossing the legs is also compatible (nothing to match on the overlap)
    // and glues to the other amalgamating section
    let crossed = CompatibleFamily::new(
        &dsite,
        &df,
        "C",
        vec!["c1".into(), "c2".into()],
        vec![leaves.minimize("l1"), dt2.clone()],
    )
    .unwrap();
    assert!(glue(&dsite, &df, &crossed).unwrap().bisimilar_to(&dfoil));
    assert!(!dglued.bisimilar_to(&dfoil));

    // site two: overlapping pieces on the square category, where matching on
    // the overlap does real work and a finer cover exposes the diagonal
    let (cat, f) = square_map();
    let sig = underlying_data(&cat, &f).signature().clone();
    let two_piece = Site::new(
        cat.clone(),
        pcovers(&[
            ("C", &[&["c1", "c2"]]),
            ("C1", &[&["id_C1", "q1"]]),
            ("C2", &[&["id_C2", "q2"]]),
        ]),
    )
    .unwrap();
    let pieces = coalgebra(
        &sig,
        &[
            ("w", el(&sig, "p@P", &[("id_P.mp", "w")])),
            ("u1", el(&sig, "l1@C1", &[("q1.mp", "w")])),
            ("t1", el(&sig, "l0@C1", &[("id_C1.m", "u1"), ("q1.mp", "w")])),
            ("t2", el(&sig, "r0@C2", &[("q2.mp", "w")])),
        ],
    );
    let t1 = pieces.minimize("t1");
    let t2 = pieces.minimize("t2");
    let w = pieces.minimize("w");
    // a four-state spine exercising the unit law beyond the fixtures
    let spine = {
        let c = coalgebra(
            &sig,
            &[
                ("a", el(&sig, "l0@C1", &[("id_C1.m", "b"), ("q1.mp", "z")])),
                ("b", el(&sig, "l0@C1", &[("id_C1.m", "u"), ("q1.mp", "z")])),
                ("u", el(&sig, "l1@C1", &[("q1.mp", "z")])),
                ("z", el(&sig, "p@P", &[("id_P.mp", "z")])),
            ],
        );
        c.minimize("a")
    };
    assert_eq!(spine.universe().states().len(), 4);
    let foil = {
        let c = coalgebra(
            &sig,
            &[
                ("v", el(&sig, "s1@C", &[("diag.mp", "v2")])),
                ("v2", el(&sig, "p@P", &[("id_P.mp", "v2")])),
            ],
        );
        c.minimize("v")
    };
    // exhaustive sweep of consistent trees with up to three states; the
    // four-state spine joins them in the unit-law pool
    let naturals = enumerate_natural_handles(&cat, &f, &sig, 3);
    assert!(naturals.iter().any(|h| h.bisimilar_to(&t1)), "the sweep finds the left leg");
    assert!(naturals.iter().any(|h| h.bisimilar_to(&w)), "the sweep finds the overlap tree");
    let glued =
        check_glueing_laws(&cat, &f, &two_piece, &t1, &t2, &naturals, &[spine], &foil);
    assert!(naturals.iter().any(|h| h.bisimilar_to(&glued)), "the sweep finds the amalgamation");

    // a finer site with the diagonal cover: restricting the family along the
    // diagonal presents the same tree as the unit family of the overlap tree
    let with_diag = Site::new(
        cat.clone(),
        pcovers(&[
            ("C", &[&["c1", "c2"], &["diag"]]),
            ("C1", &[&["id_C1", "q1"], &["q1"]]),
            ("C2", &[&["id_C2", "q2"], &["q2"]]),
        ]),
    )
    .unwrap();
    let fam_diag = CompatibleFamily::new(
        &with_diag,
        &f,
        "C",
        vec!["c1".into(), "c2".into()],
        vec![t1.clone(), t2.clone()],
    )
    .unwrap();
    let shrunk = plus_restrict(&with_diag, &f, &fam_diag, "diag").unwrap();
    assert_eq!(shrunk.target(), "P");
    let unit_w = unit_family(&with_diag, &f, &w).unwrap();
    assert!(family_equivalent(&with_diag, &f, &shrunk, &unit_w));
    assert!(family_equivalent(&with_diag, &f, &unit_w, &shrunk));
    // and the two presentations of the glued tree agree leg by leg
    assert!(family_equivalent(
        &with_diag,
        &f,
        &fam_diag,
        &unit_family(&with_diag, &f, &glued).unwrap()
    ));
    pass(10, "glueing laws hold on the disjoint-cover site and the overlapping square site");
}

// ----- criterion 11: the one-object case degenerates to plain sets ---------

#[test]
fn criterion_11_one_object_degeneration() {
    let mut rng = rng(0xAC11);
    let cat = trivial_category("pt");
    let id = cat.identity("pt").to_string();
    let site = Site::new(cat.clone(), BTreeMap::new()).unwrap();
    for _ in 0..20 {
        let sig = random_signature(&mut rng, 3, 2);
        // dictionary: shapes become sections, positions become sections
        // tagged by their shape
        let mut b_sections = Vec::new();
        let mut components = BTreeMap::new();
        for a in sig.shapes() {
            for p in sig.positions(a).unwrap() {
                let b = format!("{a}|{p}");
                components.insert(("pt".to_string(), b.clone()), a.clone());
                b_sections.push(b);
            }
        }
        let pa = Presheaf::new(
            &cat,
            BTreeMap::from([("pt".to_string(), sig.shapes().to_vec())]),
            BTreeMap::new(),
        )
        .unwrap();
        let pb = Presheaf::new(
            &cat,
            BTreeMap::from([("pt".to_string(), b_sections)]),
            BTreeMap::new(),
        )
        .unwrap();
        let f = PresheafMorphism::new(&cat, &pb, &pa, components).unwrap();
        let data = underlying_data(&cat, &f);
        let usig = data.signature().clone();
        assert_eq!(usig.shapes().len(), sig.shapes().len());
        for a in sig.shapes() {
            let positions = usig.positions(&shape_id(a, "pt")).unwrap();
            assert_eq!(positions.len(), sig.positions(a).unwrap().len());
            for p in sig.positions(a).unwrap() {
                assert!(positions.contains(&position_id(&id, &format!("{a}|{p}"))));
            }
        }
        // applying the indexed functor counts exactly like the plain one
        for n in 0..=3usize {
            let xs: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let px = Presheaf::new(
                &cat,
                BTreeMap::from([("pt".to_string(), xs.clone())]),
                BTreeMap::new(),
            )
            .unwrap();
            let app = apply_pf(&cat, &f, &px, DEFAULT_ENUMERATION_GUARD).unwrap();
            assert_eq!(app.presheaf.sections("pt").len(), sig.apply(&xs).len());
        }
        // a plain coalgebra and its translation present the same trees
        let plain = random_coalgebra(&mut rng, &sig, 3);
        let step: BTreeMap<String, PfElement<String>> = plain
            .states()
            .iter()
            .map(|s| {
                let e = plain.step(s);
                let assignment = e
                    .assignment()
                    .iter()
                    .map(|(p, v)| {
                        (position_id(&id, &format!("{}|{}", e.shape(), p)), v.clone())
                    })
                    .collect();
                (s.clone(), PfElement::new(&usig, shape_id(e.shape(), "pt"), assignment).unwrap())
            })
            .collect();
        let translated = Coalgebra::new(usig.clone(), plain.states().to_vec(), step).unwrap();
        for s in plain.states() {
            let h = translated.minimize(s);
            assert!(natural_tree(&cat, &f, &h), "every tree is consistent over one object");
            assert!(
                restrict_tree(&cat, &f, &h, &id).unwrap().bisimilar_to(&h),
                "restricting along the identity changes nothing"
            );
            assert!(glue(&site, &f, &unit_family(&site, &f, &h).unwrap()).unwrap().bisimilar_to(&h));
            for s2 in plain.states() {
                assert_eq!(
                    bisimilar(&plain, s, &plain, s2),
                    bisimilar(&translated, s, &translated, s2),
                    "the dictionary preserves and reflects tree equality"
                );
            }
        }
        // with only the identity cover, everything is a sheaf
        assert!(sheaf_check(&site, &pa));
        assert!(sheaf_check(&site, &pb));
    }
    pass(11, "one-object presheaf constructions agree with the plain-set ones");
}

// ----- criterion 12: the command line is deterministic ----------------------

fn sample_path(name: &str) -> PathBuf {
    FsPath::new(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name)
}

fn invoke(doc: &FsPath, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtypes"))
        .arg("--doc")
        .arg(doc)
        .args(args)
        .output()
        .expect("the binary runs")
}

#[test]
fn criterion_12_cli_runs_are_deterministic() {
    let streams = sample_path("streams.mt");
    let glueing = sample_path("glueing.mt");
    let broken = FsPath::new(env!("CARGO_TARGET_TMPDIR")).join("broken.mt");
    fs::write(&broken, "signature S { shape node [L R]; }\n").unwrap();

    let cases: Vec<(&FsPath, Vec<&str>, i32)> = vec![
        (&streams, vec!["check"], 0),
        (&glueing, vec!["check"], 0),
        (&streams, vec!["truncate", "--coalg", "alt", "--state", "even", "--depth", "4"], 0),
        (
            &glueing,
            vec!["truncate", "--coalg", "pieces", "--state", "t1", "--depth", "3", "--format", "dot"],
            0,
        ),
        (&streams, vec!["paths", "--coalg", "finite", "--state", "two", "--max-nodes", "5"], 0),
        (&streams, vec!["bisim", "--left", "alt.even", "--right", "alt_wide.e0"], 0),
        (&streams, vec!["bisim", "--left", "alt.even", "--right", "alt.odd"], 1),
        (&streams, vec!["bisim", "--left", "alt.even", "--right", "constant.aa"], 1),
        (&streams, vec!["minimize", "--coalg", "alt_wide", "--state", "e0"], 0),
        (&streams, vec!["coh", "--proto", "partial"], 0),
        (&streams, vec!["member", "--coalg", "alt", "--state", "even", "--seq", "emit_a,tail,emit_b"], 0),
        (&streams, vec!["member", "--coalg", "alt", "--state", "even", "--seq", "emit_a,tail,emit_a"], 1),
        (&streams, vec!["member", "--coalg", "alt", "--state", "nope", "--seq", "emit_a"], 2),
        (&streams, vec!["coherent", "--coalg", "alt", "--state", "even", "--max-len", "3"], 0),
        (&streams, vec!["slice-filter", "--indexed", "letters", "--coalg", "constant", "--state", "aa"], 0),
        (&streams, vec!["slice-filter", "--indexed", "letters", "--coalg", "alt", "--state", "even"], 1),
        (&streams, vec!["reindex", "--indexed", "letters", "--map", "x=la,y=lb,z=halt"], 0),
        (&glueing, vec!["sheaf-check", "--site", "two_piece", "--presheaf", "shapes"], 0),
        (&glueing, vec!["sheaf-check", "--site", "two_piece", "--presheaf", "twins"], 1),
        (&glueing, vec!["glue", "--site", "two_piece", "--family", "both_pieces"], 0),
        (&broken, vec!["check"], 2),
    ];
    for (doc, args, expected) in &cases {
        let first = invoke(doc, args);
        let second = invoke(doc, args);
        assert_eq!(
            first.status.code(),
            Some(*expected),
            "exit code of {args:?} on {}",
            doc.display()
        );
        assert_eq!(second.status.code(), Some(*expected));
        assert_eq!(first.stdout, second.stdout, "stdout of {args:?} is reproducible");
        assert_eq!(first.stderr, second.stderr, "stderr of {args:?} is reproducible");
    }

    // spot-check verdict output and error reporting
    let verdict = invoke(&streams, &["bisim", "--left", "alt.even", "--right", "alt_wide.e0"]);
    assert_eq!(verdict.stdout, b"true\n");
    let verdict = invoke(&streams, &["bisim", "--left", "alt.even", "--right", "alt.odd"]);
    assert_eq!(verdict.stdout, b"false\n");
    let json = invoke(&streams, &["truncate", "--coalg", "alt", "--state", "even", "--depth", "4"]);
    serde_json::from_slice::<serde_json::Value>(&json.stdout).expect("truncations print JSON");
    let dot = invoke(
        &glueing,
        &["truncate", "--coalg", "pieces", "--state", "t1", "--depth", "3", "--format", "dot"],
    );
    assert!(dot.stdout.starts_with(b"digraph"));
    let err = invoke(&broken, &["check"]);
    let message = String::from_utf8(err.stderr).unwrap();
    assert!(message.contains("broken.mt:1:"), "errors carry the document position: {message}");
    pass(12, "21 command invocations are deterministic with pinned exit codes");
}
