//! Render declarations back to document syntax, and trees to JSON/DOT.
//!
//! Emitted text re-parses to the same declaration, which is what the
//! `minimize`, `coh`, `reindex` and `glue` commands rely on: their output can
//! be appended to a document and used in further runs.

use std::fmt::Write as _;

use mtypes_core::{Coalgebra, FiniteTree, Signature};

use crate::ast::{Decl, Over};

pub fn decl(d: &Decl) -> String {
    let mut out = String::new();
    match d {
        Decl::Signature { name, shapes, point } => {
            let _ = writeln!(out, "signature {name} {{");
            for (shape, positions) in shapes {
                let _ = writeln!(out, "  shape {shape} [{}];", positions.join(", "));
            }
            if let Some(p) = point {
                let _ = writeln!(out, "  point {p};");
            }
            out.push('}');
        }
        Decl::Coalgebra { name, over, states } => {
            let _ = writeln!(out, "coalgebra {name} over {} {{", over_text(over));
            for s in states {
                let children: Vec<String> =
                    s.children.iter().map(|(p, v)| format!("{p}: {v}")).collect();
                let _ = writeln!(out, "  state {} = {}({});", s.name, s.shape, children.join(", "));
            }
            out.push('}');
        }
        Decl::Indexed { name, over, index, fibres } => {
            let _ = writeln!(out, "indexed {name} over {over} {{");
            let _ = writeln!(out, "  index [{}];", index.join(", "));
            for (shape, i) in fibres {
                let _ = writeln!(out, "  fibre {shape} = {i};");
            }
            out.push('}');
        }
        Decl::Proto { name, over, carrier, ambient, gamma, branch } => {
            let _ = writeln!(out, "proto {name} over {over} {{");
            let _ = writeln!(out, "  carrier [{}];", carrier.join(", "));
            let _ = writeln!(out, "  ambient [{}];", ambient.join(", "));
            for (x, y) in gamma {
                let _ = writeln!(out, "  gamma {x} -> {y};");
            }
            for (el, y) in branch {
                let children: Vec<String> =
                    el.children.iter().map(|(p, v)| format!("{p}: {v}")).collect();
                let _ = writeln!(out, "  m {}({}) -> {y};", el.shape, children.join(", "));
            }
            out.push('}');
        }
        Decl::Category { name, objects, morphisms, composites, pullbacks } => {
            let _ = writeln!(out, "category {name} {{");
            for o in objects {
                let _ = writeln!(out, "  object {o};");
            }
            for (id, dom, cod) in morphisms {
                let _ = writeln!(out, "  morphism {id} : {dom} -> {cod};");
            }
            for (f, g, h) in composites {
                let _ = writeln!(out, "  compose {f} then {g} = {h};");
            }
            for (f, g, apex, p1, p2) in pullbacks {
                let _ = writeln!(out, "  pullback {f} with {g} = {apex} ({p1}, {p2});");
            }
            out.push('}');
        }
        Decl::Presheaf { name, over, sections, restrictions } => {
            let _ = writeln!(out, "presheaf {name} over {over} {{");
            for (object, secs) in sections {
                let _ = writeln!(out, "  at {object} = [{}];", secs.join(", "));
            }
            for (m, s, v) in restrictions {
                let _ = writeln!(out, "  restrict {m} : {s} -> {v};");
            }
            out.push('}');
        }
        Decl::PshMorphism { name, from, to, components } => {
            let _ = writeln!(out, "morphism {name} from {from} to {to} {{");
            for (object, s, v) in components {
                let _ = writeln!(out, "  at {object} : {s} -> {v};");
            }
            out.push('}');
        }
        Decl::Site { name, over, covers } => {
            let _ = writeln!(out, "site {name} over {over} {{");
            for (object, legs) in covers {
                let _ = writeln!(out, "  cover {object} = [{}];", legs.join(", "));
            }
            out.push('}');
        }
        Decl::Family { name, site, using, at, cover, legs } => {
            let _ = writeln!(out, "family {name} over {site} using {using} {{");
            let _ = writeln!(out, "  at {at} cover [{}];", cover.join(", "));
            for (leg, coalg, state) in legs {
                let _ = writeln!(out, "  leg {leg} = {coalg}.{state};");
            }
            out.push('}');
        }
    }
    out
}

fn over_text(over: &Over) -> String {
    match over {
        Over::Signature(s) => s.clone(),
        Over::Underlying(f) => format!("underlying {f}"),
    }
}

/// A coalgebra as a `coalgebra` declaration, states in carrier order.
pub fn coalgebra_decl(name: &str, over: &Over, coalg: &Coalgebra) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "coalgebra {name} over {} {{", over_text(over));
    for state in coalg.states() {
        let el = coalg.step(state);
        let children: Vec<String> = coalg
            .signature()
            .positions(el.shape())
            .expect("shape from the same signature")
            .iter()
            .map(|p| format!("{p}: {}", el.child(p).expect("total assignment")))
            .collect();
        let _ = writeln!(out, "  state {state} = {}({});", el.shape(), children.join(", "));
    }
    out.push('}');
    out
}

/// A signature as a `signature` declaration.
pub fn signature_decl(name: &str, sig: &Signature) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "signature {name} {{");
    for shape in sig.shapes() {
        let positions = sig.positions(shape).expect("shape of the same signature");
        let _ = writeln!(out, "  shape {shape} [{}];", positions.join(", "));
    }
    if let Some(p) = sig.point() {
        let _ = writeln!(out, "  point {p};");
    }
    out.push('}');
    out
}

/// Truncated unfolding as indented JSON.
pub fn tree_json(tree: &FiniteTree) -> String {
    serde_json::to_string_pretty(&tree.to_json()).expect("tree JSON serialises")
}

/// Truncated unfolding as a DOT digraph; each tree node becomes one graph
/// node labelled by its shape, edges labelled by position.
pub fn tree_dot(tree: &FiniteTree) -> String {
    let mut out = String::new();
    out.push_str("digraph tree {\n");
    out.push_str("  node [shape=box];\n");
    let mut counter = 0usize;
    dot_node(tree, &mut counter, &mut out);
    out.push('}');
    out
}

fn dot_node(tree: &FiniteTree, counter: &mut usize, out: &mut String) -> usize {
    let id = *counter;
    *counter += 1;
    match tree {
        FiniteTree::Cut => {
            let _ = writeln!(out, "  n{id} [label=\"⊥\"];");
        }
        FiniteTree::Node { shape, children } => {
            let _ = writeln!(out, "  n{id} [label=\"{shape}\"];");
            for (position, child) in children {
                let child_id = dot_node(child, counter, out);
                let _ = writeln!(out, "  n{id} -> n{child_id} [label=\"{position}\"];");
            }
        }
    }
    id
}
