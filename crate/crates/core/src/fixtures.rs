//! Small example categories used by tests and documentation.
//!
//! Composition tables list only the non-identity composites; identity
//! composites and identity-cospan pullback squares are filled in here before
//! validation, since they are forced by the laws.

use std::collections::BTreeMap;

use crate::category::{FiniteCategory, Morphism, PullbackSquare};

/// Assemble a category from its non-identity data, completing identities,
/// identity composites and identity-cospan pullbacks.
pub fn build_category(
    objects: &[&str],
    arrows: &[(&str, &str, &str)],
    composites: &[(&str, &str, &str)],
    pullbacks: &[(&str, &str, &str, &str, &str)],
) -> FiniteCategory {
    let mut morphisms = Vec::new();
    let mut identities = BTreeMap::new();
    for o in objects {
        let id = format!("id_{o}");
        morphisms.push(Morphism { id: id.clone(), dom: o.to_string(), cod: o.to_string() });
        identities.insert(o.to_string(), id);
    }
    for (id, dom, cod) in arrows {
        morphisms.push(Morphism { id: id.to_string(), dom: dom.to_string(), cod: cod.to_string() });
    }
    let mut composition = BTreeMap::new();
    for m in &morphisms {
        composition.insert((identities[&m.dom].clone(), m.id.clone()), m.id.clone());
        composition.insert((m.id.clone(), identities[&m.cod].clone()), m.id.clone());
    }
    for (f, g, h) in composites {
        composition.insert((f.to_string(), g.to_string()), h.to_string());
    }
    let mut squares = BTreeMap::new();
    for m in &morphisms {
        let id_cod = identities[&m.cod].clone();
        let id_dom = identities[&m.dom].clone();
        // (id, g) has apex dom(g); (f, id) has apex dom(f).
        squares.insert(
            (id_cod.clone(), m.id.clone()),
            PullbackSquare { apex: m.dom.clone(), to_left: m.id.clone(), to_right: id_dom.clone() },
        );
        squares.insert(
            (m.id.clone(), id_cod.clone()),
            PullbackSquare { apex: m.dom.clone(), to_left: id_dom.clone(), to_right: m.id.clone() },
        );
    }
    for (l, r, apex, p1, p2) in pullbacks {
        squares.insert(
            (l.to_string(), r.to_string()),
            PullbackSquare {
                apex: apex.to_string(),
                to_left: p1.to_string(),
                to_right: p2.to_string(),
            },
        );
    }
    FiniteCategory::new(
        objects.iter().map(|o| o.to_string()).collect(),
        morphisms,
        identities,
        composition,
        squares,
    )
    .expect("fixture category must validate")
}

/// Two objects C, D and a single arrow u: D → C.
pub fn interval() -> FiniteCategory {
    build_category(
        &["C", "D"],
        &[("u", "D", "C")],
        &[],
        &[("u", "u", "D", "id_D", "id_D")],
    )
}

/// Three objects A ← B ← C with composite w = u ∘ v.
pub fn chain() -> FiniteCategory {
    build_category(
        &["A", "B", "Cc"],
        &[("u", "B", "A"), ("v", "Cc", "B"), ("w", "Cc", "A")],
        &[("v", "u", "w")],
        &[
            ("u", "u", "B", "id_B", "id_B"),
            ("u", "w", "Cc", "v", "id_Cc"),
            ("w", "u", "Cc", "id_Cc", "v"),
            ("w", "w", "Cc", "id_Cc", "id_Cc"),
            ("v", "v", "Cc", "id_Cc", "id_Cc"),
        ],
    )
}

/// A commuting square: C1 → C ← C2 with apex P mapping into both legs and a
/// diagonal diag = q1 ∘ c1 = q2 ∘ c2.  P is the chosen pullback of (c1, c2).
pub fn square() -> FiniteCategory {
    build_category(
        &["C", "C1", "C2", "P"],
        &[
            ("c1", "C1", "C"),
            ("c2", "C2", "C"),
            ("q1", "P", "C1"),
            ("q2", "P", "C2"),
            ("diag", "P", "C"),
        ],
        &[("q1", "c1", "diag"), ("q2", "c2", "diag")],
        &[
            ("c1", "c1", "C1", "id_C1", "id_C1"),
            ("c2", "c2", "C2", "id_C2", "id_C2"),
            ("c1", "c2", "P", "q1", "q2"),
            ("c2", "c1", "P", "q2", "q1"),
            ("c1", "diag", "P", "q1", "id_P"),
            ("diag", "c1", "P", "id_P", "q1"),
            ("c2", "diag", "P", "q2", "id_P"),
            ("diag", "c2", "P", "id_P", "q2"),
            ("diag", "diag", "P", "id_P", "id_P"),
            ("q1", "q1", "P", "id_P", "id_P"),
            ("q2", "q2", "P", "id_P", "id_P"),
        ],
    )
}
